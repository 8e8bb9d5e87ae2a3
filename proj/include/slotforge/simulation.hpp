#pragma once
// Simulated users driving the full engine, for estimator evaluation.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "slotforge/dialog.hpp"

namespace slotforge {

// mt19937_64 with a portable uniform mapping.
class PortableRng {
public:
    explicit PortableRng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform() < p; }
    std::size_t index(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n))); }

private:
    std::mt19937_64 engine_;
};

struct CorrelationRule {
    EntityType if_type;
    EntityType then_type;
    double q = 1.0;  // then_type copies if_type's skip decision with probability q
};

struct Persona {
    std::string name;
    std::array<double, kNumEntityTypes> skip_propensity{};
    std::array<EntityType, kNumEntityTypes> order_preference = kAllEntityTypes;
    std::vector<CorrelationRule> correlations;
    // Surface phrase used when answering about each type.
    std::array<std::string, kNumEntityTypes> values{"kids", "comedy", "sharks", "france", "Natalie Portman", "1990s"};
    // Probability of also volunteering the next answered type (by order_preference) in the same utterance.
    double volunteer = 0.0;

    void validate() const;
    // Per-type skip decisions for one conversation.
    std::array<bool, kNumEntityTypes> draw_skips(PortableRng& rng) const;
};

Persona persona_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Persona& p);

struct SimulationConfig {
    std::vector<Persona> personas;
    std::size_t conversations = 50;
    std::uint64_t seed = 42;
    DialogConfig dialog{};
    std::vector<SkipModel> eval_models{SkipModel::IntraType, SkipModel::NN, SkipModel::WeightedNN,
                                       SkipModel::OrderNN, SkipModel::OrderAskedNN};
    bool direct = false;  // bypass NLU
    std::string preset;
};

// convergence, correlated, drift-high, drift-low, zero.
std::optional<SimulationConfig> simulation_preset(std::string_view name);
std::vector<std::string> simulation_preset_names();

struct PersonaReport {
    std::string name;
    std::vector<std::string> question_orders;  // one "Genre>Person>..." string per conversation
    std::vector<int> turns;
    std::array<std::vector<double>, kNumEntityTypes> trajectory;  // driving model p̂ after each conversation
    std::array<double, kNumEntityTypes> final_estimate{};
    std::array<double, kNumEntityTypes> realized_skip_rate{};  // over all ground-truth decisions
    std::array<double, kNumEntityTypes> recorded_skip_rate{};  // over the recorded history window
    std::vector<std::pair<SkipModel, double>> brier;
    std::size_t brier_samples = 0;
    std::size_t results_shown = 0;
    std::size_t forced_skips = 0;  // decided to answer but recorded as skipped
};

struct SimulationReport {
    SimulationConfig config;
    std::vector<PersonaReport> personas;

    nlohmann::json to_json() const;
    std::string to_table() const;
};

SimulationReport simulate(const SimulationConfig& config, const MovieStore& store, const PersonIndex& index,
                          const Lexicons& lexicons);

}  // namespace slotforge
