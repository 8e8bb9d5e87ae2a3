// slotforge command-line entry points: serve, ingest, query, chat, simulate.

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "httplib.h"
#include "slotforge/service.hpp"
#include "slotforge/simulation.hpp"

using namespace slotforge;
using nlohmann::json;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

struct DataPaths {
    std::string config;
    std::string movies;
    std::string lexicons;
};

ServiceConfig service_config(const DataPaths& p) {
    auto c = resolve_service_config(p.config.empty() ? std::nullopt
                                                     : std::optional<std::filesystem::path>(p.config));
    if (!p.movies.empty()) c.movies = p.movies;
    if (!p.lexicons.empty()) c.lexicons_dir = p.lexicons;
    return c;
}

void add_data_options(CLI::App* cmd, DataPaths& p) {
    cmd->add_option("--config", p.config, "Config JSON (default: $SLOTFORGE_CONFIG)");
    cmd->add_option("--movies", p.movies, "movies.jsonl or store directory");
    cmd->add_option("--lexicons", p.lexicons, "Lexicon directory");
}

struct QueryArgs {
    std::array<std::vector<std::string>, kNumEntityTypes> include;
    std::array<std::vector<std::string>, kNumEntityTypes> exclude;
    std::size_t limit = 10;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slotforge: adaptive slot-filling movie search bot"};
    app.require_subcommand(1);
    DataPaths paths;

    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    add_data_options(serve, paths);
    int port = 0;
    std::string host;
    serve->add_option("--port", port, "Port (overrides config and $SLOTFORGE_PORT)");
    serve->add_option("--host", host, "Bind address");

    auto* ingest = app.add_subcommand("ingest", "Validate a movies.jsonl file and write a store");
    std::string ingest_in;
    std::string ingest_out;
    ingest->add_option("--input", ingest_in, "movies.jsonl")->required();
    ingest->add_option("--out", ingest_out, "Output store directory")->required();

    auto* query = app.add_subcommand("query", "Run a query and print ranked JSON rows");
    add_data_options(query, paths);
    QueryArgs qa;
    const std::array<std::pair<const char*, EntityType>, kNumEntityTypes> query_flags{{
        {"audience", EntityType::AudienceAge},
        {"genre", EntityType::Genre},
        {"keyword", EntityType::Keyword},
        {"country", EntityType::CountryOrContinent},
        {"person", EntityType::Person},
        {"year", EntityType::ReleaseYear},
    }};
    for (const auto& [flag, type] : query_flags) {
        query->add_option(std::string("--") + flag, qa.include[slot_index(type)], std::string("Include ") + flag);
        query->add_option(std::string("--not-") + flag, qa.exclude[slot_index(type)], std::string("Exclude ") + flag);
    }
    query->add_option("--limit", qa.limit, "Maximum rows (0 = all)");

    auto* chat = app.add_subcommand("chat", "Interactive terminal conversation");
    add_data_options(chat, paths);
    bool show_estimates = false;
    chat->add_flag("--estimates", show_estimates, "Print skip estimates after each turn");

    auto* sim = app.add_subcommand("simulate", "Run simulated users against the engine");
    add_data_options(sim, paths);
    std::string preset = "convergence";
    std::string personas_file;
    std::size_t conversations = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string model_name;
    bool direct = false;
    std::string out_file;
    bool table = false;
    double bias_alpha = -1.0;
    std::vector<std::string> eval_models;
    sim->add_option("--preset", preset, "Preset scenario")
        ->check(CLI::IsMember(simulation_preset_names()));
    sim->add_option("--personas", personas_file, "Persona JSON file (array); replaces the preset's personas");
    sim->add_option("--conversations", conversations, "Conversations per persona");
    sim->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { seed = s; seed_set = true; }, "RNG seed");
    sim->add_option("--model", model_name, "Driving skip model");
    sim->add_option("--eval-models", eval_models, "Models scored by Brier");
    sim->add_option("--bias-alpha", bias_alpha, "Override bias_alpha");
    sim->add_flag("--direct", direct, "Bypass NLU");
    sim->add_option("--out", out_file, "Write the JSON report here (default: stdout)");
    sim->add_flag("--table", table, "Print the plain-text table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) {
            std::vector<std::string> warnings;
            const auto store = MovieStore::ingest(ingest_in, &warnings);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
            store.save(ingest_out);
            std::cout << "ingested " << store.size() << " movies into " << ingest_out << "\n";
            return 0;
        }

        auto config = service_config(paths);

        if (*serve) {
            if (port) config.port = port;
            if (!host.empty()) config.host = host;
            auto service = ChatService::from_config(config);
            httplib::Server server;
            mount_routes(server, *service);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            spdlog::info("listening on {}:{}", config.host, config.port);
            if (!server.listen(config.host, config.port)) {
                spdlog::error("cannot bind {}:{}", config.host, config.port);
                return 1;
            }
            return 0;
        }

        const auto store = MovieStore::ingest(config.movies);
        const PersonIndex index(store);
        const auto lexicons = Lexicons::load_dir(config.lexicons_dir);

        if (*query) {
            Query q;
            q.limit = qa.limit;
            for (auto t : kAllEntityTypes) {
                for (int side = 0; side < 2; ++side) {
                    const auto& raw = side == 0 ? qa.include[slot_index(t)] : qa.exclude[slot_index(t)];
                    for (const auto& v : raw) {
                        auto c = canonicalize(t, v, lexicons);
                        if (!c) {
                            std::cerr << "unknown " << to_string(t) << " value: " << v << "\n";
                            return 2;
                        }
                        (side == 0 ? q.clause(t).include : q.clause(t).exclude).insert(*c);
                    }
                }
            }
            for (const auto& m : execute(q, store, index)) std::cout << movie_to_json_line(m) << "\n";
            return 0;
        }

        if (*chat) {
            BuiltinProvider provider(lexicons, gazetteer_from_store(store));
            DialogSession session(config.dialog);
            DialogDeps deps;
            deps.provider = &provider;
            deps.lexicons = &lexicons;
            deps.store = &store;
            deps.index = &index;
            std::cout << "bot> " << greeting() << "\n";
            std::string line;
            while (true) {
                std::cout << "you> " << std::flush;
                if (!std::getline(std::cin, line)) break;
                const auto text = std::string(trim(line));
                if (text.empty()) continue;
                if (text == "quit" || text == "exit") break;
                const auto turn = session.step(text, deps);
                std::cout << "bot> " << turn.utterance << "\n";
                if (show_estimates && !turn.estimates.empty()) {
                    std::cout << "     estimates:";
                    for (const auto& [t, p] : turn.estimates) std::cout << " " << to_string(t) << "=" << p;
                    std::cout << "\n";
                }
                if (turn.kind == TurnKind::Farewell) break;
            }
            std::cout << "bye\n";
            return 0;
        }

        if (*sim) {
            auto sc = *simulation_preset(preset);
            if (!personas_file.empty()) {
                std::ifstream in(personas_file);
                if (!in) throw std::runtime_error("cannot open " + personas_file);
                const auto doc = json::parse(in);
                sc.personas.clear();
                for (const auto& p : doc) sc.personas.push_back(persona_from_json(p));
                sc.preset += "+personas";
            }
            if (conversations) sc.conversations = conversations;
            if (seed_set) sc.seed = seed;
            if (!model_name.empty()) {
                auto m = skip_model_from_string(model_name);
                if (!m) throw std::invalid_argument("unknown model " + model_name);
                sc.dialog.model = *m;
            }
            if (!eval_models.empty()) {
                sc.eval_models.clear();
                for (const auto& n : eval_models) {
                    auto m = skip_model_from_string(n);
                    if (!m) throw std::invalid_argument("unknown model " + n);
                    sc.eval_models.push_back(*m);
                }
            }
            if (bias_alpha > 0) sc.dialog.estimator.bias_alpha = bias_alpha;
            sc.direct = direct;
            const auto report = simulate(sc, store, index, lexicons);
            const auto text = report.to_json().dump(2) + "\n";
            if (out_file.empty()) {
                if (!table) std::cout << text;
            } else {
                std::ofstream out(out_file, std::ios::trunc);
                out << text;
            }
            if (table) std::cout << report.to_table();
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
