#include "slotforge/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace slotforge {

namespace {

constexpr std::array<std::string_view, kNumEntityTypes> kTypeNames{
    "AudienceAge", "Genre", "Keyword", "CountryOrContinent", "Person", "ReleaseYear",
};

}  // namespace

std::string_view to_string(EntityType t) noexcept { return kTypeNames[slot_index(t)]; }

std::optional<EntityType> entity_type_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kNumEntityTypes; ++i) {
        if (kTypeNames[i] == name) return kAllEntityTypes[i];
    }
    return std::nullopt;
}

std::string_view to_string(Intent intent) noexcept {
    switch (intent) {
        case Intent::Specify: return "Specify";
        case Intent::Refuse: return "Refuse";
        case Intent::None: return "None";
    }
    return "None";
}

std::optional<Intent> intent_from_string(std::string_view name) {
    if (name == "Specify") return Intent::Specify;
    if (name == "Refuse") return Intent::Refuse;
    if (name == "None") return Intent::None;
    return std::nullopt;
}

ScoredValue ScoredValue::make(std::string value, double score) {
    if (score == 0.0 || !std::isfinite(score)) {
        throw std::invalid_argument("ScoredValue score must be finite and non-zero");
    }
    score = std::clamp(score, -kMaxScoreMagnitude, kMaxScoreMagnitude);
    return ScoredValue{std::move(value), score};
}

std::vector<std::string> SpecificationSlot::value_keys() const {
    std::vector<std::string> keys;
    keys.reserve(values.size());
    for (const auto& [k, _] : values) keys.push_back(k);
    return keys;
}

void EstimatorConfig::validate() const {
    if (history_capacity < 1) throw std::invalid_argument("history_capacity must be >= 1");
    if (!(weight_alpha > 0.0)) throw std::invalid_argument("weight_alpha must be > 0");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
    if (!(bias_alpha > 0.0)) throw std::invalid_argument("bias_alpha must be > 0");
    if (!(initial_bias >= 0.0 && initial_bias <= 1.0)) {
        throw std::invalid_argument("initial_bias must lie in [0, 1]");
    }
    if (value_weight < 0.0) throw std::invalid_argument("value_weight must be >= 0");
}

std::array<SpecificationSlot, kNumEntityTypes> ConversationState::make_slots(std::size_t capacity) {
    return {SpecificationSlot{EntityType::AudienceAge, capacity},
            SpecificationSlot{EntityType::Genre, capacity},
            SpecificationSlot{EntityType::Keyword, capacity},
            SpecificationSlot{EntityType::CountryOrContinent, capacity},
            SpecificationSlot{EntityType::Person, capacity},
            SpecificationSlot{EntityType::ReleaseYear, capacity}};
}

ConversationState::ConversationState(std::size_t history_capacity)
    : capacity_(history_capacity), slots_(make_slots(history_capacity)) {}

std::size_t ConversationState::assumed_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(assumptions_.begin(), assumptions_.end(), [](const auto& a) { return a.has_value(); }));
}

void ConversationState::assume(const std::vector<std::pair<EntityType, bool>>& batch) {
    const int order = static_cast<int>(assumed_count());
    for (const auto& [type, skipped] : batch) {
        auto& entry = assumptions_[slot_index(type)];
        if (entry) {
            entry->skipped = skipped;
        } else {
            entry = AssumptionRecord{skipped, order};
        }
    }
}

ConversationState new_conversation(const EstimatorConfig& config) {
    config.validate();
    return ConversationState(config.history_capacity);
}

ConversationRecord finalize_conversation(const ConversationState& state, Timestamp timestamp,
                                         std::optional<std::string> user_id) {
    ConversationRecord record;
    record.timestamp = timestamp;
    record.user_id = std::move(user_id);
    const int terminal = static_cast<int>(state.assumed_count());
    for (auto t : kAllEntityTypes) {
        const auto i = slot_index(t);
        const auto& slot = state.slot(t);
        record.skips[i] = !slot.has_values();
        const auto& a = state.assumption(t);
        record.orders[i] = a ? a->order : terminal;
        record.values[i] = slot.value_keys();
    }
    return record;
}

void push_record(ConversationState& state, const ConversationRecord& record) {
    for (auto t : kAllEntityTypes) {
        auto& slot = state.slot(t);
        slot.skip_history.push(record.skips[slot_index(t)]);
        slot.order_history.push(record.orders[slot_index(t)]);
        slot.value_history.push(record.values[slot_index(t)]);
    }
}

ConversationState begin_next_conversation(const ConversationState& finished,
                                          const ConversationRecord& record) {
    ConversationState next(finished.history_capacity());
    for (auto t : kAllEntityTypes) {
        auto& dst = next.slot(t);
        const auto& src = finished.slot(t);
        dst.skip_history = src.skip_history;
        dst.order_history = src.order_history;
        dst.value_history = src.value_history;
    }
    push_record(next, record);
    return next;
}

bool is_valid_record(const ConversationRecord& record) {
    const int n = static_cast<int>(kNumEntityTypes);
    for (int o : record.orders) {
        if (o < 0 || o >= n) return false;
    }
    // An order value v is reachable iff exactly v types were assumed before it.
    for (int v : record.orders) {
        const auto before = std::count_if(record.orders.begin(), record.orders.end(),
                                          [v](int o) { return o < v; });
        if (before != v) return false;
    }
    return true;
}

}  // namespace slotforge
