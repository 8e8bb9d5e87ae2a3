#pragma once
// Utterance understanding: provider interface, the built-in rule-based
// provider, a remote HTTP provider client, and the intra-conversation
// post-processing (asked-type bias, short-answer word search, negation).

#include <array>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "slotforge/core_model.hpp"

namespace slotforge {

// Inclusive character interval [start, end] within the input.
struct CharSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

struct EntityMention {
    EntityType type = EntityType::Genre;
    std::string value;  // provider-normalized text; canonicalized later through lexicons
    double raw_score = 0.0;
    CharSpan span;
};

struct ParsedUtterance {
    Intent intent = Intent::None;
    double intent_score = 0.0;
    std::vector<EntityMention> mentions;  // sorted by span start
};

// Recoverable failure of an understanding provider (network, timeout, bad payload).
class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnderstandingProvider {
public:
    virtual ~UnderstandingProvider() = default;
    virtual ParsedUtterance parse(std::string_view text) const = 0;
};

struct LexiconHit {
    std::string value;   // canonical value
    std::string phrase;  // matched lexicon key
    CharSpan span;
};

// Phrase -> canonical value map for one entity type. Matching is
// case-insensitive, longest-first, on word boundaries, non-overlapping.
class Lexicon {
public:
    Lexicon() = default;
    explicit Lexicon(std::map<std::string, std::string> entries);

    // JSON object {phrase: id}; ids may be integers or strings.
    static Lexicon from_json_text(std::string_view json_text);
    static Lexicon load(const std::filesystem::path& path);

    std::vector<LexiconHit> find_all(std::string_view text) const;
    std::optional<std::string> lookup(std::string_view phrase) const;
    bool empty() const noexcept { return entries_.empty(); }
    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

private:
    std::map<std::string, std::string> entries_;
    std::vector<std::string> by_length_;  // keys, longest first
};

// One lexicon per entity type that has an indexing dictionary. Person never has one.
struct Lexicons {
    std::array<std::optional<Lexicon>, kNumEntityTypes> by_type{};

    const Lexicon* get(EntityType t) const {
        const auto& l = by_type[slot_index(t)];
        return l ? &*l : nullptr;
    }
    // Reads <dir>/<type>.json for every type except Person (missing files are skipped).
    static Lexicons load_dir(const std::filesystem::path& dir);
};

// Canonical form of an extracted value: lexicon lookup for lexicon types,
// normalized year expression for ReleaseYear, lowercase text otherwise.
std::optional<std::string> canonicalize(EntityType type, std::string_view value, const Lexicons& lexicons);

// Year expression normalization: "1994", "the 90s" -> "1990s", "before 2000" -> "..1999",
// "after 1990" -> "1991..", "since 2010" -> "2010..", "between 1990 and 2000" -> "1990..2000".
std::optional<std::string> normalize_year_expression(std::string_view text);

// Known person names indexed by Metaphone key (full name and unique surnames).
class PersonGazetteer {
public:
    void add(std::string_view full_name);
    std::optional<std::string> match_full(std::string_view candidate) const;
    std::optional<std::string> match_surname(std::string_view candidate) const;
    std::size_t size() const noexcept { return by_key_.size(); }

private:
    std::unordered_map<std::string, std::string> by_key_;
    std::unordered_map<std::string, std::vector<std::string>> by_surname_key_;
};

// Rule-based provider over the lexicons, a year grammar and a person gazetteer.
class BuiltinProvider final : public UnderstandingProvider {
public:
    BuiltinProvider(Lexicons lexicons, PersonGazetteer people);
    ParsedUtterance parse(std::string_view text) const override;

private:
    Lexicons lexicons_;
    PersonGazetteer people_;
};

// POST {base_url}/parse {"text": ...} -> {"intent","score","entities":[{"type","value","score","start","end"}]}.
// `end` is inclusive. Any transport failure, non-2xx status or malformed body raises ProviderError.
class RemoteProvider final : public UnderstandingProvider {
public:
    explicit RemoteProvider(std::string base_url,
                            std::chrono::milliseconds timeout = std::chrono::milliseconds(2000));
    ParsedUtterance parse(std::string_view text) const override;

    // Maps a provider response body onto ParsedUtterance (exposed for tests).
    static ParsedUtterance decode(std::string_view body, std::size_t text_length);

private:
    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

// Runs the provider and normalizes its output: mentions sorted by span start,
// out-of-range spans and overlaps dropped, scores clamped to [0, 1].
ParsedUtterance parse(std::string_view input, const UnderstandingProvider& provider);

struct AcceptedValue {
    EntityType type;
    ScoredValue value;
};

inline constexpr double kScoreTolerance = 1e-9;

// Asked-type gate: a mention passes iff raw + (asked ? bias : 0) + type_bias >= threshold.
// Accepted scores keep the mention's sign (negation) and carry the biased magnitude.
std::vector<AcceptedValue> apply_asked_type_bias(const ParsedUtterance& parsed, std::optional<EntityType> asked,
                                                 double bias = 0.2, double threshold = 0.7,
                                                 const std::array<double, kNumEntityTypes>& type_bias = {});

// max(0.4, 1.0 - 0.3 (n - 1)) for an n-word input.
double word_count_score(std::size_t word_count);
std::size_t count_words(std::string_view text);

// Lexicon hits of the asked type scored by word_count_score. Empty when the type has no lexicon.
std::vector<ScoredValue> word_search(std::string_view input, EntityType asked, const Lexicons& lexicons);

struct NegationRules {
    std::vector<std::string> expressions{"not", "n't", "except", "but", "anything other than", "different from",
                                         "no "};
    // Ignore a window whose only negation is "but" when the previous mention was negated.
    bool contrastive_but = true;

    std::vector<std::string> found_in(std::string_view window) const;
};

// Flips the sign of mentions whose preceding window contains a negation expression.
std::vector<EntityMention> apply_negation(std::string_view input, std::vector<EntityMention> mentions,
                                          const NegationRules& rules = {});

struct NluConfig {
    double asked_bias = 0.2;
    double threshold = 0.7;
    NegationRules negation{};
    // Per-type certainty bias derived from skip estimates (zero when inactive).
    std::array<double, kNumEntityTypes> type_bias{};
};

struct Understanding {
    Intent intent = Intent::None;
    std::vector<AcceptedValue> extracted;
    bool refused_asked = false;      // Refuse intent for the pending question
    bool used_word_search = false;
    bool provider_failed = false;
    std::string provider_error;
};

// Provider + post-processing without touching any state.
Understanding interpret(std::string_view input, std::optional<EntityType> asked,
                        const UnderstandingProvider& provider, const Lexicons& lexicons, const NluConfig& config);

// Writes an Understanding into the state: values merged (latest score wins),
// extracted types assumed not-skipped, a refused pending question assumed skipped.
void apply_understanding(ConversationState& state, const Understanding& understanding);

// interpret + apply_understanding. Throws ProviderError when the provider
// failed and word search recovered nothing.
Understanding understand(std::string_view input, ConversationState& state, const UnderstandingProvider& provider,
                         const Lexicons& lexicons, const NluConfig& config = {});

}  // namespace slotforge
