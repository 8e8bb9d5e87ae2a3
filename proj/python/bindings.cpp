// Python bindings. JSON payloads cross the boundary as strings; the Python
// package decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "slotforge/adaptation.hpp"
#include "slotforge/moviedb.hpp"
#include "slotforge/nlu.hpp"
#include "slotforge/phonetics.hpp"
#include "slotforge/service.hpp"
#include "slotforge/simulation.hpp"

namespace py = pybind11;
using namespace slotforge;
using nlohmann::json;

namespace {

using PyRecord = std::pair<std::vector<bool>, std::vector<int>>;

HistoryView to_history(const std::vector<PyRecord>& records) {
    HistoryView h;
    for (const auto& [skips, orders] : records) {
        if (skips.size() != kNumEntityTypes || orders.size() != kNumEntityTypes)
            throw std::invalid_argument("records need 6 skips and 6 orders");
        ConversationRecord r;
        for (std::size_t k = 0; k < kNumEntityTypes; ++k) {
            r.skips[k] = skips[k];
            r.orders[k] = orders[k];
        }
        h.records.push_back(r);
    }
    return h;
}

CurrentAssumptions to_assumptions(const std::map<int, std::pair<bool, int>>& assumed) {
    CurrentAssumptions a;
    for (const auto& [i, v] : assumed) {
        if (i < 0 || i >= static_cast<int>(kNumEntityTypes)) throw std::invalid_argument("type index out of range");
        a.assumed[static_cast<std::size_t>(i)] = AssumptionRecord{v.first, v.second};
    }
    return a;
}

class Engine {
public:
    Engine(const std::filesystem::path& movies, const std::filesystem::path& lexicons)
        : store_(MovieStore::ingest(movies)),
          index_(store_),
          lexicons_(Lexicons::load_dir(lexicons)),
          provider_(lexicons_, gazetteer_from_store(store_)) {}

    std::string parse_text(const std::string& text) const {
        const auto p = parse(text, provider_);
        json out{{"intent", to_string(p.intent)}, {"score", p.intent_score}, {"entities", json::array()}};
        for (const auto& m : p.mentions) {
            out["entities"].push_back({{"type", to_string(m.type)},
                                       {"value", m.value},
                                       {"canonical", canonicalize(m.type, m.value, lexicons_).value_or("")},
                                       {"score", m.raw_score},
                                       {"start", m.span.start},
                                       {"end", m.span.end}});
        }
        return out.dump();
    }

    std::vector<std::string> query(const std::string& clauses_json, std::size_t limit) const {
        Query q;
        q.limit = limit;
        const auto doc = json::parse(clauses_json);
        for (const auto& [name, clause] : doc.items()) {
            const auto t = entity_type_from_string(name);
            if (!t) throw std::invalid_argument("unknown entity type " + name);
            for (const auto& v : clause.value("include", std::vector<std::string>{})) q.clause(*t).include.insert(v);
            for (const auto& v : clause.value("exclude", std::vector<std::string>{})) q.clause(*t).exclude.insert(v);
        }
        std::vector<std::string> rows;
        for (const auto& d : execute(q, store_, index_)) rows.push_back(movie_to_json_line(d));
        return rows;
    }

    std::string simulate_preset(const std::string& name, std::optional<std::uint64_t> seed,
                                std::optional<std::size_t> conversations) const {
        auto cfg = simulation_preset(name);
        if (!cfg) throw std::invalid_argument("unknown preset " + name);
        if (seed) cfg->seed = *seed;
        if (conversations) cfg->conversations = *conversations;
        return simulate(*cfg, store_, index_, lexicons_).to_json().dump();
    }

    std::size_t movie_count() const { return store_.size(); }

private:
    MovieStore store_;
    PersonIndex index_;
    Lexicons lexicons_;
    BuiltinProvider provider_;
};

class Service {
public:
    Service(const std::string& config_json, const std::filesystem::path& base)
        : svc_(ChatService::from_config(ServiceConfig::from_json(json::parse(config_json), base))) {}

    std::pair<int, std::string> create_session(const std::string& body) { return wrap(svc_->create_session(body)); }
    std::pair<int, std::string> post_message(const std::string& id, const std::string& body) {
        return wrap(svc_->post_message(id, body));
    }
    std::pair<int, std::string> get_state(const std::string& id) { return wrap(svc_->get_state(id)); }
    std::pair<int, std::string> health() const { return wrap(svc_->health()); }

private:
    static std::pair<int, std::string> wrap(const ApiResponse& r) { return {r.status, r.body.dump()}; }
    std::unique_ptr<ChatService> svc_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "slotforge native core";

    m.def("metaphone_word", &metaphone_word, py::arg("word"));
    m.def("person_key", &person_key, py::arg("full_name"));
    m.def("orders_set", &orders_set, py::arg("M"), py::arg("assumed_count"));
    m.def(
        "intra_type",
        [](const std::vector<bool>& skips, std::size_t K, double initial_bias, bool padded) {
            return intra_type(skips, K, initial_bias, padded).p_hat;
        },
        py::arg("skips"), py::arg("K") = 10, py::arg("initial_bias") = 0.5, py::arg("padded") = true);
    m.def(
        "estimate",
        [](const std::string& model, int i, const std::vector<PyRecord>& history,
           const std::map<int, std::pair<bool, int>>& assumed, double weight_alpha, double beta, double gamma,
           double delta, double initial_bias) {
            const auto sm = skip_model_from_string(model);
            if (!sm) throw std::invalid_argument("unknown model " + model);
            if (i < 0 || i >= static_cast<int>(kNumEntityTypes)) throw std::invalid_argument("type index out of range");
            EstimatorConfig cfg;
            cfg.history_capacity = std::max<std::size_t>(1, history.size());
            cfg.weight_alpha = weight_alpha;
            cfg.beta = beta;
            cfg.gamma = gamma;
            cfg.delta = delta;
            cfg.initial_bias = initial_bias;
            cfg.validate();
            return estimate_skip(*sm, entity_type_at(static_cast<std::size_t>(i)), to_history(history),
                                 to_assumptions(assumed), cfg)
                .p_hat;
        },
        py::arg("model"), py::arg("i"), py::arg("history"), py::arg("assumed"), py::arg("weight_alpha") = 1.0,
        py::arg("beta") = 0.5, py::arg("gamma") = 0.5, py::arg("delta") = 1.0, py::arg("initial_bias") = 0.5);

    py::class_<Engine>(m, "Engine")
        .def(py::init<const std::filesystem::path&, const std::filesystem::path&>(), py::arg("movies"),
             py::arg("lexicons"))
        .def("parse", &Engine::parse_text, py::arg("text"))
        .def("query", &Engine::query, py::arg("clauses"), py::arg("limit") = 10)
        .def("simulate", &Engine::simulate_preset, py::arg("preset"), py::arg("seed") = py::none(),
             py::arg("conversations") = py::none(), py::call_guard<py::gil_scoped_release>())
        .def_property_readonly("movie_count", &Engine::movie_count);

    py::class_<Service>(m, "Service")
        .def(py::init<const std::string&, const std::filesystem::path&>(), py::arg("config"), py::arg("base"))
        .def("create_session", &Service::create_session, py::arg("body") = "",
             py::call_guard<py::gil_scoped_release>())
        .def("post_message", &Service::post_message, py::arg("session_id"), py::arg("body"),
             py::call_guard<py::gil_scoped_release>())
        .def("get_state", &Service::get_state, py::arg("session_id"), py::call_guard<py::gil_scoped_release>())
        .def("health", &Service::health);

    py::register_exception<IngestError>(m, "IngestError", PyExc_ValueError);
    py::register_exception<ProviderError>(m, "ProviderError", PyExc_RuntimeError);
}
