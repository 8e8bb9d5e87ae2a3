#include "slotforge/dialog.hpp"

#include <spdlog/spdlog.h>

#include "slotforge/text.hpp"

namespace slotforge {

std::string_view to_string(TurnKind kind) noexcept {
    switch (kind) {
        case TurnKind::AskType: return "ask_type";
        case TurnKind::ShowResults: return "show_results";
        case TurnKind::Farewell: return "farewell";
    }
    return "ask_type";
}

void DialogConfig::validate() const {
    if (!(sufficiency_threshold > 0.0 && sufficiency_threshold < 1.0))
        throw std::invalid_argument("sufficiency_threshold must be in (0, 1)");
    if (min_questions < 0) throw std::invalid_argument("min_questions must be >= 0");
    if (reask_limit < 0) throw std::invalid_argument("reask_limit must be >= 0");
    estimator.validate();
}

std::string render_question(EntityType t) {
    switch (t) {
        case EntityType::AudienceAge: return "Who will be watching? Kids, teenagers or adults?";
        case EntityType::Genre: return "What genre of movies would you like?";
        case EntityType::Keyword: return "Is there a topic the movie should be about?";
        case EntityType::CountryOrContinent: return "Do you prefer movies from a particular country or continent?";
        case EntityType::Person: return "Is there a director or actor you would like to see?";
        case EntityType::ReleaseYear: return "From what year or decade should the movie be?";
    }
    return {};
}

std::string greeting() { return "Hi! I can help you search for a movie. What are you in the mood for?"; }

bool is_acceptance(std::string_view input) {
    static const std::array<std::string_view, 16> kPhrases{
        "thanks", "thank you", "thx", "perfect", "great", "awesome", "bye", "goodbye", "sounds good",
        "i'll take", "i will take", "that one", "ok", "okay", "cool", "yes",
    };
    const std::string bare = collapse_spaces(strip_punctuation(to_lower(input)));
    for (auto p : kPhrases) {
        const auto pos = bare.find(p);
        if (pos != std::string::npos && is_word_boundary(bare, pos, pos + p.size())) return true;
    }
    return false;
}

std::optional<EntityType> pick_question(const std::map<EntityType, double>& estimates) {
    std::optional<EntityType> best;
    double best_p = 0.0;
    for (auto t : kAllEntityTypes) {
        auto it = estimates.find(t);
        if (it == estimates.end()) continue;
        if (!best || it->second < best_p) {
            best = t;
            best_p = it->second;
        }
    }
    return best;
}

ConversationState seeded_state(const HistoryView& history, std::size_t capacity) {
    ConversationState state(capacity);
    for (auto it = history.records.rbegin(); it != history.records.rend(); ++it) push_record(state, *it);
    return state;
}

DialogSession::DialogSession(DialogConfig config)
    : DialogSession(config, new_conversation(config.estimator)) {}

DialogSession::DialogSession(DialogConfig config, ConversationState state)
    : config_(std::move(config)), state_(std::move(state)) {
    config_.validate();
}

std::map<EntityType, double> DialogSession::estimates(const DialogDeps& deps) const {
    const auto assumptions = assumptions_of(state_);
    std::map<EntityType, double> out;
    if (config_.history_source == HistorySource::Aggregated && deps.history) {
        for (auto t : assumptions.unassumed()) {
            out[t] = deps.history
                         ->estimate_with_cache(t, assumptions, config_.model, config_.estimator, config_.cache_max_age)
                         .p_hat;
        }
        return out;
    }
    const auto history = history_view(state_);
    for (auto t : assumptions.unassumed()) {
        out[t] = estimate_skip(config_.model, t, history, assumptions, config_.estimator).p_hat;
    }
    return out;
}

std::array<double, kNumEntityTypes> DialogSession::feedback_biases(const DialogDeps& deps) const {
    std::array<double, kNumEntityTypes> bias{};
    if (!config_.feedback_bias) return bias;
    for (const auto& [t, p] : estimates(deps)) {
        bias[slot_index(t)] = probability_to_bias(p, config_.estimator.bias_alpha, config_.estimator.bias_cubed,
                                                  config_.estimator.bias_invert_sign);
    }
    return bias;
}

BotTurn DialogSession::step(std::string_view input, const DialogDeps& deps) {
    if (finished_) {
        BotTurn t;
        t.kind = TurnKind::Farewell;
        t.utterance = "This conversation has ended. Start a new one to search again.";
        return t;
    }
    if (results_shown_ && is_acceptance(input)) return finish(deps);

    auto nlu = config_.nlu;
    nlu.type_bias = feedback_biases(deps);
    Understanding u;
    try {
        u = interpret(input, state_.last_question, *deps.provider, *deps.lexicons, nlu);
        if (u.provider_failed && u.extracted.empty()) throw ProviderError(u.provider_error);
    } catch (const ProviderError& e) {
        ++turns_;
        spdlog::warn("understanding provider failed: {}", e.what());
        BotTurn t;
        t.apology = true;
        t.estimates = estimates(deps);
        if (state_.last_question) {
            t.kind = TurnKind::AskType;
            t.asked = state_.last_question;
            t.utterance = "Sorry, I'm having trouble understanding right now. " + render_question(*t.asked);
        } else {
            t.kind = TurnKind::AskType;
            t.utterance = "Sorry, I'm having trouble understanding right now. Could you say that again?";
        }
        return t;
    }
    return advance(u, deps);
}

BotTurn DialogSession::advance(const Understanding& u, const DialogDeps& deps) {
    if (finished_) return step("", deps);
    ++turns_;
    apply_understanding(state_, u);
    extracted_this_turn_ = !u.extracted.empty();

    if (results_shown_) {
        if (!u.extracted.empty()) return show_results(deps, estimates(deps));
        if (u.intent == Intent::Refuse || u.intent == Intent::None) {
            results_shown_ = false;
            state_.last_question.reset();
            auto est = estimates(deps);
            if (auto q = pick_question(est)) return ask(*q, std::move(est), false);
            return finish(deps);
        }
        return show_results(deps, estimates(deps));
    }

    const bool refused_without_question = u.intent == Intent::Refuse && !state_.last_question;
    if (state_.last_question && !state_.is_assumed(*state_.last_question) && reask_count_ >= config_.reask_limit) {
        state_.assume({{*state_.last_question, true}});
    }
    return decide(deps, refused_without_question);
}

BotTurn DialogSession::decide(const DialogDeps& deps, bool refused_without_question) {
    auto est = estimates(deps);
    if (refused_without_question || est.empty()) return show_results(deps, std::move(est));
    const bool all_unlikely = std::all_of(est.begin(), est.end(), [&](const auto& kv) {
        return kv.second > config_.sufficiency_threshold;
    });
    if (all_unlikely && questions_asked_ >= config_.min_questions) return show_results(deps, std::move(est));
    const auto q = *pick_question(est);
    const bool reask = state_.last_question == q;
    return ask(q, std::move(est), reask);
}

BotTurn DialogSession::ask(EntityType t, std::map<EntityType, double> est, bool reask) {
    reask_count_ = reask ? reask_count_ + 1 : 0;
    state_.last_question = t;
    if (!reask) ++questions_asked_;
    BotTurn turn;
    turn.kind = TurnKind::AskType;
    turn.asked = t;
    turn.utterance = (reask && !extracted_this_turn_ ? "Sorry, I didn't catch that. " : "") + render_question(t);
    turn.estimates = std::move(est);
    return turn;
}

BotTurn DialogSession::show_results(const DialogDeps& deps, std::map<EntityType, double> est) {
    results_shown_ = true;
    state_.last_question.reset();
    reask_count_ = 0;
    BotTurn turn;
    turn.kind = TurnKind::ShowResults;
    turn.estimates = std::move(est);
    if (deps.store && deps.index) {
        turn.results = execute(build_query(state_, config_.result_limit), *deps.store, *deps.index);
    }
    if (turn.results.empty()) {
        turn.utterance = "I couldn't find any movies matching that. You can change your criteria.";
    } else {
        turn.utterance = "Here are some movies you might like:";
        for (std::size_t k = 0; k < turn.results.size(); ++k) {
            const auto& m = turn.results[k];
            turn.utterance += (k ? "; " : " ") + m.title + " (" + std::to_string(m.release_year) + ")";
        }
    }
    return turn;
}

BotTurn DialogSession::finish(const DialogDeps& deps) {
    BotTurn turn;
    turn.kind = TurnKind::Farewell;
    turn.utterance = "Enjoy the movie! Goodbye.";
    if (finished_) return turn;
    finished_ = true;
    final_record_ = finalize_conversation(state_, deps.clock(), deps.user_id);
    if (deps.history) {
        try {
            deps.history->record(*final_record_);
        } catch (const std::exception& e) {
            spdlog::error("could not record conversation: {}", e.what());
        }
    }
    return turn;
}

}  // namespace slotforge
