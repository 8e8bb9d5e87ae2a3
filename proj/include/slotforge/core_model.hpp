#pragma once
// Shared domain types for the slot-filling engine.
//
// Everything here is plain data plus construction/validation helpers. Entity
// types are indexed 0..5 in arrays (`slot_index`); `ordinal` gives the 1-based
// index used in reports.

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slotforge {

inline constexpr std::size_t kNumEntityTypes = 6;

enum class EntityType : std::uint8_t {
    AudienceAge = 0,
    Genre,
    Keyword,
    CountryOrContinent,
    Person,
    ReleaseYear,
};

inline constexpr std::array<EntityType, kNumEntityTypes> kAllEntityTypes{
    EntityType::AudienceAge,        EntityType::Genre,  EntityType::Keyword,
    EntityType::CountryOrContinent, EntityType::Person, EntityType::ReleaseYear,
};

constexpr std::size_t slot_index(EntityType t) noexcept { return static_cast<std::size_t>(t); }
constexpr int ordinal(EntityType t) noexcept { return static_cast<int>(t) + 1; }
constexpr EntityType entity_type_at(std::size_t index) { return kAllEntityTypes.at(index); }

std::string_view to_string(EntityType t) noexcept;
std::optional<EntityType> entity_type_from_string(std::string_view name);

enum class Intent : std::uint8_t { Specify, Refuse, None };

std::string_view to_string(Intent intent) noexcept;
std::optional<Intent> intent_from_string(std::string_view name);

using Clock = std::chrono::system_clock;
using Timestamp = Clock::time_point;

// Raw provider score is at most 1.0; the largest positive bias is 0.5.
inline constexpr double kMaxScoreMagnitude = 1.5;

// Canonical value plus signed certainty. Negative score encodes negation.
// Genre values are decimal genre ids ("1"); other types are lowercase text.
struct ScoredValue {
    std::string value;
    double score = 0.0;

    // Clamps |score| to kMaxScoreMagnitude; throws on a zero score.
    static ScoredValue make(std::string value, double score);
    bool negated() const noexcept { return score < 0.0; }
    friend bool operator==(const ScoredValue&, const ScoredValue&) = default;
};

// FIFO with a fixed capacity; pushing onto a full queue evicts the oldest.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity = 10) : capacity_(capacity) {
        if (capacity_ == 0) throw std::invalid_argument("BoundedQueue capacity must be >= 1");
    }

    void push(T value) {
        if (items_.size() == capacity_) items_.pop_front();
        items_.push_back(std::move(value));
    }

    std::size_t size() const noexcept { return items_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    bool empty() const noexcept { return items_.empty(); }

    // j = 0 is the newest entry.
    const T& newest(std::size_t j) const { return items_.at(items_.size() - 1 - j); }
    const std::deque<T>& oldest_first() const noexcept { return items_; }

private:
    std::size_t capacity_;
    std::deque<T> items_;
};

struct SpecificationSlot {
    EntityType type = EntityType::AudienceAge;
    std::map<std::string, double> values;
    BoundedQueue<bool> skip_history;
    BoundedQueue<int> order_history;
    // Extracted value sets of past conversations; kept local for value-aware estimation.
    BoundedQueue<std::vector<std::string>> value_history;

    SpecificationSlot(EntityType t, std::size_t capacity)
        : type(t), skip_history(capacity), order_history(capacity), value_history(capacity) {}

    bool has_values() const noexcept { return !values.empty(); }
    std::vector<std::string> value_keys() const;
};

struct AssumptionRecord {
    bool skipped = false;
    int order = 0;
    friend bool operator==(const AssumptionRecord&, const AssumptionRecord&) = default;
};

using AssumptionArray = std::array<std::optional<AssumptionRecord>, kNumEntityTypes>;

struct ConversationRecord {
    std::array<bool, kNumEntityTypes> skips{};
    std::array<int, kNumEntityTypes> orders{};
    Timestamp timestamp{};
    std::optional<std::string> user_id;
    // Never serialized to the shared metadata store.
    std::array<std::vector<std::string>, kNumEntityTypes> values{};

    bool same_metadata(const ConversationRecord& other) const noexcept {
        return skips == other.skips && orders == other.orders;
    }
};

struct EstimatorConfig {
    std::size_t history_capacity = 10;  // K
    double bias_alpha = 0.4;
    double weight_alpha = 1.0;
    double beta = 0.5;
    double gamma = 0.5;
    double delta = 1.0;
    double initial_bias = 0.5;
    bool bias_cubed = false;
    // Flip the sign of probability_to_bias (the prose reading of the rule).
    bool bias_invert_sign = false;
    // Coefficient of the binary value distance term; 0 disables it.
    double value_weight = 0.0;

    void validate() const;
};

class ConversationState {
public:
    explicit ConversationState(std::size_t history_capacity = 10);

    SpecificationSlot& slot(EntityType t) { return slots_[slot_index(t)]; }
    const SpecificationSlot& slot(EntityType t) const { return slots_[slot_index(t)]; }
    const std::array<SpecificationSlot, kNumEntityTypes>& slots() const noexcept { return slots_; }

    std::optional<EntityType> last_question;

    const AssumptionArray& assumptions() const noexcept { return assumptions_; }
    const std::optional<AssumptionRecord>& assumption(EntityType t) const {
        return assumptions_[slot_index(t)];
    }
    bool is_assumed(EntityType t) const { return assumptions_[slot_index(t)].has_value(); }
    std::size_t assumed_count() const noexcept;

    // Records a batch of simultaneous assumptions (one utterance). All newly
    // assumed types share order = number of types assumed before the batch.
    // Types already assumed keep their order; their skip flag is updated.
    void assume(const std::vector<std::pair<EntityType, bool>>& batch);

    std::size_t history_capacity() const noexcept { return capacity_; }

private:
    static std::array<SpecificationSlot, kNumEntityTypes> make_slots(std::size_t capacity);

    std::size_t capacity_;
    std::array<SpecificationSlot, kNumEntityTypes> slots_;
    AssumptionArray assumptions_{};
};

ConversationState new_conversation(const EstimatorConfig& config);

// Never-assumed types are recorded skipped with order = number of assumed types.
ConversationRecord finalize_conversation(const ConversationState& state,
                                         Timestamp timestamp = Clock::now(),
                                         std::optional<std::string> user_id = std::nullopt);

// Appends the record to every slot's skip/order/value queues.
void push_record(ConversationState& state, const ConversationRecord& record);

// Fresh conversation that inherits the finished one's history queues plus `record`.
ConversationState begin_next_conversation(const ConversationState& finished,
                                          const ConversationRecord& record);

// Checks the record invariants (orders in range, ties only for same-step batches).
bool is_valid_record(const ConversationRecord& record);

}  // namespace slotforge
