#include "slotforge/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "slotforge/phonetics.hpp"
#include "slotforge/service.hpp"
#include "slotforge/text.hpp"

namespace slotforge {

using nlohmann::json;

void Persona::validate() const {
    for (double p : skip_propensity) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("skip propensity must be in [0, 1]");
    }
    std::array<bool, kNumEntityTypes> seen{};
    for (auto t : order_preference) seen[slot_index(t)] = true;
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw std::invalid_argument("order_preference must be a permutation of the entity types");
    for (const auto& r : correlations) {
        if (!(r.q >= 0.0 && r.q <= 1.0)) throw std::invalid_argument("correlation q must be in [0, 1]");
    }
    if (!(volunteer >= 0.0 && volunteer <= 1.0)) throw std::invalid_argument("volunteer must be in [0, 1]");
}

std::array<bool, kNumEntityTypes> Persona::draw_skips(PortableRng& rng) const {
    std::array<bool, kNumEntityTypes> skips{};
    for (auto t : kAllEntityTypes) skips[slot_index(t)] = rng.bernoulli(skip_propensity[slot_index(t)]);
    for (const auto& r : correlations) {
        if (rng.bernoulli(r.q)) skips[slot_index(r.then_type)] = skips[slot_index(r.if_type)];
    }
    return skips;
}

Persona persona_from_json(const json& j) {
    Persona p;
    p.name = j.value("name", std::string("persona"));
    for (const auto& [type, v] : j.at("skip_propensity").items()) {
        auto t = entity_type_from_string(type);
        if (!t) throw std::invalid_argument("unknown entity type " + type);
        p.skip_propensity[slot_index(*t)] = v.get<double>();
    }
    if (j.contains("order_preference")) {
        const auto names = j.at("order_preference").get<std::vector<std::string>>();
        if (names.size() != kNumEntityTypes) throw std::invalid_argument("order_preference must list 6 types");
        for (std::size_t k = 0; k < kNumEntityTypes; ++k) {
            auto t = entity_type_from_string(names[k]);
            if (!t) throw std::invalid_argument("unknown entity type " + names[k]);
            p.order_preference[k] = *t;
        }
    }
    for (const auto& c : j.value("correlations", json::array())) {
        auto a = entity_type_from_string(c.at("if").get<std::string>());
        auto b = entity_type_from_string(c.at("then").get<std::string>());
        if (!a || !b) throw std::invalid_argument("unknown entity type in correlation");
        p.correlations.push_back({*a, *b, c.value("q", 1.0)});
    }
    if (j.contains("values")) {
        for (const auto& [type, v] : j.at("values").items()) {
            auto t = entity_type_from_string(type);
            if (!t) throw std::invalid_argument("unknown entity type " + type);
            p.values[slot_index(*t)] = v.get<std::string>();
        }
    }
    p.volunteer = j.value("volunteer", 0.0);
    p.validate();
    return p;
}

json to_json(const Persona& p) {
    json prop = json::object();
    json values = json::object();
    for (auto t : kAllEntityTypes) {
        prop[std::string(to_string(t))] = p.skip_propensity[slot_index(t)];
        values[std::string(to_string(t))] = p.values[slot_index(t)];
    }
    json order = json::array();
    for (auto t : p.order_preference) order.push_back(std::string(to_string(t)));
    json corr = json::array();
    for (const auto& r : p.correlations) {
        corr.push_back({{"if", std::string(to_string(r.if_type))}, {"then", std::string(to_string(r.then_type))}, {"q", r.q}});
    }
    return json{{"name", p.name}, {"skip_propensity", prop}, {"order_preference", order},
                {"correlations", corr}, {"values", values}, {"volunteer", p.volunteer}};
}

namespace {

Persona make_persona(std::string name, std::array<double, kNumEntityTypes> prop) {
    Persona p;
    p.name = std::move(name);
    p.skip_propensity = prop;
    return p;
}

}  // namespace

std::vector<std::string> simulation_preset_names() {
    return {"convergence", "correlated", "drift-high", "drift-low", "zero"};
}

std::optional<SimulationConfig> simulation_preset(std::string_view name) {
    SimulationConfig c;
    c.preset = std::string(name);
    c.seed = 42;
    c.dialog.min_questions = static_cast<int>(kNumEntityTypes);
    c.dialog.model = SkipModel::IntraType;
    if (name == "convergence") {
        c.personas.push_back(make_persona("tri-level", {0.1, 0.1, 0.5, 0.9, 0.9, 0.5}));
        c.conversations = 50;
        c.dialog.estimator.history_capacity = 50;
    } else if (name == "correlated") {
        auto p = make_persona("person-iff-year", {0.1, 0.1, 0.9, 0.9, 0.5, 0.5});
        p.correlations.push_back({EntityType::Person, EntityType::ReleaseYear, 1.0});
        c.personas.push_back(p);
        c.conversations = 100;
        c.dialog.estimator.history_capacity = 100;
    } else if (name == "drift-high" || name == "drift-low") {
        c.personas.push_back(make_persona("balanced", {0.5, 0.5, 0.5, 0.5, 0.5, 0.5}));
        c.conversations = 100;
        c.dialog.estimator.history_capacity = 20;
        c.dialog.estimator.bias_alpha = name == "drift-high" ? 2.0 : 0.2;
        c.dialog.feedback_bias = true;
    } else if (name == "zero") {
        c.personas.push_back(make_persona("always-answers", {0, 0, 0, 0, 0, 0}));
        c.conversations = 20;
        c.dialog.estimator.history_capacity = 10;
    } else {
        return std::nullopt;
    }
    return c;
}

namespace {

constexpr std::array<std::string_view, 6> kRefusals{
    "It doesn't matter", "No preference", "Skip this one", "I don't care", "Any is fine", "Whatever",
};

std::string cue_sentence(EntityType t, const std::string& v) {
    switch (t) {
        case EntityType::AudienceAge: return "It is for " + v;
        case EntityType::Genre: return "I'd like a " + v + " movie";
        case EntityType::Keyword: return "Something about " + v;
        case EntityType::CountryOrContinent: return "A movie from " + v;
        case EntityType::Person: return "Something with " + v;
        case EntityType::ReleaseYear: return "Released in the " + v;
    }
    return v;
}

std::string answer(EntityType t, const std::string& v, PortableRng& rng) {
    const double u = rng.uniform();
    if (u < 0.4) return cue_sentence(t, v);
    if (u < 0.7) return "I think " + v + " would be nice";
    if (u < 0.85) return v;
    return v + " please";
}

std::string canonical_for(EntityType t, const std::string& v, const Lexicons& lexicons) {
    if (t == EntityType::Person) return collapse_spaces(to_lower(v));
    return canonicalize(t, v, lexicons).value_or(to_lower(v));
}

std::string order_trace(const std::vector<EntityType>& asked) {
    std::string s;
    for (auto t : asked) {
        if (!s.empty()) s.push_back('>');
        s += to_string(t);
    }
    return s;
}

}  // namespace

SimulationReport simulate(const SimulationConfig& config, const MovieStore& store, const PersonIndex& index,
                          const Lexicons& lexicons) {
    config.dialog.validate();
    SimulationReport report;
    report.config = config;

    PersonGazetteer people;
    for (const auto& d : store.docs()) {
        for (const auto& n : d.directors) people.add(n);
        for (const auto& n : d.actors) people.add(n);
    }
    for (const auto& p : config.personas) people.add(p.values[slot_index(EntityType::Person)]);
    const BuiltinProvider provider(lexicons, people);

    for (std::size_t pi = 0; pi < config.personas.size(); ++pi) {
        const auto& persona = config.personas[pi];
        persona.validate();
        PortableRng rng(config.seed + 1000003ull * pi);
        PersonaReport pr;
        pr.name = persona.name;

        std::vector<double> brier_sum(config.eval_models.size(), 0.0);
        std::array<std::size_t, kNumEntityTypes> realized{};
        ConversationState carry = new_conversation(config.dialog.estimator);
        const Timestamp t0 = Timestamp(std::chrono::seconds(1'700'000'000));

        for (std::size_t j = 0; j < config.conversations; ++j) {
            const auto skips = persona.draw_skips(rng);
            for (std::size_t k = 0; k < kNumEntityTypes; ++k) realized[k] += skips[k] ? 1 : 0;

            DialogSession session(config.dialog, carry);
            DialogDeps deps;
            deps.provider = &provider;
            deps.lexicons = &lexicons;
            deps.store = &store;
            deps.index = &index;
            deps.clock = [t0, j] { return t0 + std::chrono::minutes(static_cast<long>(j)); };

            std::vector<EntityType> asked;
            auto respond = [&](const BotTurn& turn) -> BotTurn {
                if (turn.kind == TurnKind::ShowResults) {
                    ++pr.results_shown;
                    return session.step("Thanks, that's perfect", deps);
                }
                const auto t = *turn.asked;
                const bool skip = skips[slot_index(t)];
                if (config.direct) {
                    Understanding u;
                    if (skip) {
                        u.intent = Intent::Refuse;
                        u.refused_asked = true;
                    } else {
                        u.intent = Intent::Specify;
                        u.extracted.push_back(
                            {t, ScoredValue::make(canonical_for(t, persona.values[slot_index(t)], lexicons), 1.0)});
                    }
                    return session.advance(u, deps);
                }
                if (skip) return session.step(std::string(kRefusals[rng.index(kRefusals.size())]), deps);
                std::string text = answer(t, persona.values[slot_index(t)], rng);
                if (persona.volunteer > 0.0 && rng.bernoulli(persona.volunteer)) {
                    for (auto extra : persona.order_preference) {
                        if (extra == t || skips[slot_index(extra)] || session.state().is_assumed(extra)) continue;
                        text += ", and " + cue_sentence(extra, persona.values[slot_index(extra)]);
                        break;
                    }
                }
                return session.step(text, deps);
            };

            BotTurn turn = session.step("Hi, I'm looking for a movie", deps);
            const std::size_t turn_cap = kNumEntityTypes * (config.dialog.reask_limit + 1) + 4;
            for (std::size_t guard = 0; turn.kind != TurnKind::Farewell && guard < turn_cap; ++guard) {
                if (turn.kind == TurnKind::AskType) {
                    const auto t = *turn.asked;
                    const bool reask = !asked.empty() && asked.back() == t;
                    asked.push_back(t);
                    if (!reask) {
                        const auto history = history_view(session.state());
                        const auto assumptions = assumptions_of(session.state());
                        const double outcome = skips[slot_index(t)] ? 1.0 : 0.0;
                        for (std::size_t m = 0; m < config.eval_models.size(); ++m) {
                            const double p = estimate_skip(config.eval_models[m], t, history, assumptions,
                                                           config.dialog.estimator)
                                                 .p_hat;
                            brier_sum[m] += (p - outcome) * (p - outcome);
                        }
                        ++pr.brier_samples;
                    }
                }
                turn = respond(turn);
            }
            if (!session.finished()) session.finish(deps);
            const auto& record = *session.final_record();
            for (std::size_t k = 0; k < kNumEntityTypes; ++k) {
                if (record.skips[k] && !skips[k]) ++pr.forced_skips;
            }
            pr.question_orders.push_back(order_trace(asked));
            pr.turns.push_back(session.turns());
            carry = begin_next_conversation(session.state(), record);

            const auto history = history_view(carry);
            const CurrentAssumptions none;
            for (auto t : kAllEntityTypes) {
                pr.trajectory[slot_index(t)].push_back(
                    estimate_skip(config.dialog.model, t, history, none, config.dialog.estimator).p_hat);
            }
        }

        const auto history = history_view(carry);
        for (auto t : kAllEntityTypes) {
            const auto k = slot_index(t);
            pr.final_estimate[k] = pr.trajectory[k].empty() ? config.dialog.estimator.initial_bias : pr.trajectory[k].back();
            pr.realized_skip_rate[k] =
                config.conversations ? static_cast<double>(realized[k]) / static_cast<double>(config.conversations) : 0.0;
            const auto column = history.skip_column(t);
            const auto n = static_cast<double>(std::count(column.begin(), column.end(), true));
            pr.recorded_skip_rate[k] = column.empty() ? 0.0 : n / static_cast<double>(column.size());
        }
        for (std::size_t m = 0; m < config.eval_models.size(); ++m) {
            pr.brier.emplace_back(config.eval_models[m],
                                  pr.brier_samples ? brier_sum[m] / static_cast<double>(pr.brier_samples) : 0.0);
        }
        report.personas.push_back(std::move(pr));
    }
    return report;
}

json SimulationReport::to_json() const {
    json personas_json = json::array();
    for (std::size_t pi = 0; pi < personas.size(); ++pi) {
        const auto& pr = personas[pi];
        json traj = json::object();
        json final_est = json::object();
        json realized = json::object();
        json recorded = json::object();
        for (auto t : kAllEntityTypes) {
            const auto name = std::string(to_string(t));
            traj[name] = pr.trajectory[slot_index(t)];
            final_est[name] = pr.final_estimate[slot_index(t)];
            realized[name] = pr.realized_skip_rate[slot_index(t)];
            recorded[name] = pr.recorded_skip_rate[slot_index(t)];
        }
        json brier = json::object();
        for (const auto& [m, b] : pr.brier) brier[std::string(to_string(m))] = b;
        personas_json.push_back({{"name", pr.name},
                                 {"persona", slotforge::to_json(config.personas[pi])},
                                 {"brier", brier},
                                 {"brier_samples", pr.brier_samples},
                                 {"final_estimates", final_est},
                                 {"realized_skip_rate", realized},
                                 {"recorded_skip_rate", recorded},
                                 {"trajectory", traj},
                                 {"question_orders", pr.question_orders},
                                 {"turns", pr.turns},
                                 {"results_shown", pr.results_shown},
                                 {"forced_skips", pr.forced_skips}});
    }
    json models = json::array();
    for (auto m : config.eval_models) models.push_back(std::string(to_string(m)));
    return json{{"preset", config.preset},
                {"seed", config.seed},
                {"conversations", config.conversations},
                {"direct", config.direct},
                {"driving_model", std::string(to_string(config.dialog.model))},
                {"eval_models", models},
                {"config", slotforge::to_json(config.dialog)},
                {"personas", personas_json}};
}

std::string SimulationReport::to_table() const {
    std::ostringstream out;
    char buf[256];
    for (const auto& pr : personas) {
        out << "persona " << pr.name << "  (" << config.conversations << " conversations, seed " << config.seed
            << ")\n";
        std::snprintf(buf, sizeof buf, "  %-20s %8s %8s %8s %8s\n", "type", "final", "realized", "recorded", "min..max");
        out << buf;
        for (auto t : kAllEntityTypes) {
            const auto& tr = pr.trajectory[slot_index(t)];
            const double lo = tr.empty() ? 0.0 : *std::min_element(tr.begin(), tr.end());
            const double hi = tr.empty() ? 0.0 : *std::max_element(tr.begin(), tr.end());
            std::snprintf(buf, sizeof buf, "  %-20s %8.3f %8.3f %8.3f %4.2f..%4.2f\n",
                          std::string(to_string(t)).c_str(), pr.final_estimate[slot_index(t)],
                          pr.realized_skip_rate[slot_index(t)], pr.recorded_skip_rate[slot_index(t)], lo, hi);
            out << buf;
        }
        out << "  brier (" << pr.brier_samples << " predictions)\n";
        for (const auto& [m, b] : pr.brier) {
            std::snprintf(buf, sizeof buf, "    %-18s %.4f\n", std::string(to_string(m)).c_str(), b);
            out << buf;
        }
    }
    return out.str();
}

}  // namespace slotforge
