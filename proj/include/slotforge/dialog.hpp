#pragma once
// Turn loop: understand the utterance, update the state, then ask about the
// unassumed type with the lowest estimated skip probability or show results.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slotforge/adaptation.hpp"
#include "slotforge/core_model.hpp"
#include "slotforge/history_store.hpp"
#include "slotforge/moviedb.hpp"
#include "slotforge/nlu.hpp"

namespace slotforge {

enum class TurnKind { AskType, ShowResults, Farewell };
std::string_view to_string(TurnKind kind) noexcept;

struct BotTurn {
    TurnKind kind = TurnKind::AskType;
    std::optional<EntityType> asked;  // set for AskType
    std::string utterance;
    std::vector<MovieDoc> results;
    std::map<EntityType, double> estimates;  // unassumed types only
    bool apology = false;
};

// Where estimators read past conversations from.
enum class HistorySource { Local, Aggregated };

struct DialogConfig {
    double sufficiency_threshold = 0.75;
    SkipModel model = SkipModel::OrderAskedNN;
    int min_questions = 1;  // distinct questions before results may be shown
    int reask_limit = 2;
    std::size_t result_limit = 5;
    EstimatorConfig estimator{};
    NluConfig nlu{};
    // Feed probability_to_bias(p_hat) of every unassumed type into the NLU gate.
    bool feedback_bias = false;
    HistorySource history_source = HistorySource::Local;
    std::chrono::milliseconds cache_max_age = std::chrono::minutes(10);

    void validate() const;
};

struct DialogDeps {
    const UnderstandingProvider* provider = nullptr;
    const Lexicons* lexicons = nullptr;
    const MovieStore* store = nullptr;
    const PersonIndex* index = nullptr;
    HistoryStore* history = nullptr;  // optional
    std::function<Timestamp()> clock = [] { return Clock::now(); };
    std::optional<std::string> user_id;
};

std::string render_question(EntityType t);
std::string greeting();
// "thanks", "perfect", "bye", ... after results are shown.
bool is_acceptance(std::string_view input);

// argmin over `estimates`, ties to the lowest type index.
std::optional<EntityType> pick_question(const std::map<EntityType, double>& estimates);

class DialogSession {
public:
    explicit DialogSession(DialogConfig config);
    DialogSession(DialogConfig config, ConversationState state);

    BotTurn step(std::string_view input, const DialogDeps& deps);
    // Applies an already computed understanding (bypasses NLU).
    BotTurn advance(const Understanding& understanding, const DialogDeps& deps);

    std::map<EntityType, double> estimates(const DialogDeps& deps) const;
    std::array<double, kNumEntityTypes> feedback_biases(const DialogDeps& deps) const;

    const ConversationState& state() const noexcept { return state_; }
    ConversationState& state() noexcept { return state_; }
    const DialogConfig& config() const noexcept { return config_; }
    bool finished() const noexcept { return finished_; }
    bool results_shown() const noexcept { return results_shown_; }
    int questions_asked() const noexcept { return questions_asked_; }
    int turns() const noexcept { return turns_; }
    const std::optional<ConversationRecord>& final_record() const noexcept { return final_record_; }
    // Finishes the conversation (also used when a user abandons it).
    BotTurn finish(const DialogDeps& deps);

private:
    BotTurn decide(const DialogDeps& deps, bool refused_without_question);
    BotTurn show_results(const DialogDeps& deps, std::map<EntityType, double> estimates);
    BotTurn ask(EntityType t, std::map<EntityType, double> estimates, bool reask);

    DialogConfig config_;
    ConversationState state_;
    int questions_asked_ = 0;
    int reask_count_ = 0;
    int turns_ = 0;
    bool results_shown_ = false;
    bool finished_ = false;
    bool extracted_this_turn_ = false;
    std::optional<ConversationRecord> final_record_;
};

// Fresh state whose queues hold `history` (newest-first view) oldest first.
ConversationState seeded_state(const HistoryView& history, std::size_t capacity);

}  // namespace slotforge
