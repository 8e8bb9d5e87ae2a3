#include "slotforge/service.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "httplib.h"

namespace slotforge {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

DialogConfig dialog_config_from_json(const json& j) {
    DialogConfig c;
    if (auto it = j.find("estimator"); it != j.end()) {
        auto& e = c.estimator;
        e.history_capacity = it->value("K", e.history_capacity);
        e.bias_alpha = it->value("bias_alpha", e.bias_alpha);
        e.weight_alpha = it->value("weight_alpha", e.weight_alpha);
        e.beta = it->value("beta", e.beta);
        e.gamma = it->value("gamma", e.gamma);
        e.delta = it->value("delta", e.delta);
        e.initial_bias = it->value("initial_bias", e.initial_bias);
        e.bias_cubed = it->value("bias_cubed", e.bias_cubed);
        e.bias_invert_sign = it->value("bias_invert_sign", e.bias_invert_sign);
        e.value_weight = it->value("value_weight", e.value_weight);
    }
    if (auto it = j.find("dialog"); it != j.end()) {
        c.sufficiency_threshold = it->value("sufficiency_threshold", c.sufficiency_threshold);
        if (it->contains("model")) {
            const auto name = it->at("model").get<std::string>();
            auto m = skip_model_from_string(name);
            if (!m) throw std::invalid_argument("unknown model " + name);
            c.model = *m;
        }
        c.min_questions = it->value("min_questions", c.min_questions);
        c.reask_limit = it->value("reask_limit", c.reask_limit);
        c.result_limit = it->value("result_limit", c.result_limit);
        c.feedback_bias = it->value("feedback_bias", c.feedback_bias);
        const auto source = it->value("history_source", std::string("local"));
        if (source == "aggregated") {
            c.history_source = HistorySource::Aggregated;
        } else if (source != "local") {
            throw std::invalid_argument("history_source must be local or aggregated");
        }
        c.cache_max_age = std::chrono::milliseconds(
            static_cast<long long>(it->value("cache_max_age_seconds", 600.0) * 1000.0));
    }
    if (auto it = j.find("nlu"); it != j.end()) {
        c.nlu.asked_bias = it->value("asked_bias", c.nlu.asked_bias);
        c.nlu.threshold = it->value("threshold", c.nlu.threshold);
        if (it->contains("negation_expressions"))
            c.nlu.negation.expressions = it->at("negation_expressions").get<std::vector<std::string>>();
        c.nlu.negation.contrastive_but = it->value("contrastive_but", c.nlu.negation.contrastive_but);
    }
    c.validate();
    return c;
}

json to_json(const DialogConfig& c) {
    const auto& e = c.estimator;
    return json{
        {"estimator",
         {{"K", e.history_capacity},
          {"bias_alpha", e.bias_alpha},
          {"weight_alpha", e.weight_alpha},
          {"beta", e.beta},
          {"gamma", e.gamma},
          {"delta", e.delta},
          {"initial_bias", e.initial_bias},
          {"bias_cubed", e.bias_cubed},
          {"bias_invert_sign", e.bias_invert_sign},
          {"value_weight", e.value_weight}}},
        {"dialog",
         {{"sufficiency_threshold", c.sufficiency_threshold},
          {"model", std::string(to_string(c.model))},
          {"min_questions", c.min_questions},
          {"reask_limit", c.reask_limit},
          {"result_limit", c.result_limit},
          {"feedback_bias", c.feedback_bias},
          {"history_source", c.history_source == HistorySource::Local ? "local" : "aggregated"},
          {"cache_max_age_seconds", static_cast<double>(c.cache_max_age.count()) / 1000.0}}},
        {"nlu",
         {{"asked_bias", c.nlu.asked_bias},
          {"threshold", c.nlu.threshold},
          {"negation_expressions", c.nlu.negation.expressions},
          {"contrastive_but", c.nlu.negation.contrastive_but}}},
    };
}

ServiceConfig ServiceConfig::from_json(const json& j, const std::filesystem::path& base) {
    ServiceConfig c;
    c.dialog = dialog_config_from_json(j);
    c.movies = resolve(base, j.value("movies", std::string("data/movies.jsonl")));
    c.lexicons_dir = resolve(base, j.value("lexicons", std::string("data/lexicons")));
    c.history_dir = resolve(base, j.value("history_dir", std::string()));
    c.ui_dir = resolve(base, j.value("ui_dir", std::string()));
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.session_ttl = std::chrono::seconds(j.value("session_ttl_seconds", 1800));
    if (auto it = j.find("provider"); it != j.end()) {
        c.provider_mode = it->value("mode", c.provider_mode);
        c.remote_url = it->value("url", std::string());
        c.remote_timeout = std::chrono::milliseconds(it->value("timeout_ms", 2000));
    }
    if (c.provider_mode != "builtin" && c.provider_mode != "remote")
        throw std::invalid_argument("provider.mode must be builtin or remote");
    if (c.provider_mode == "remote" && c.remote_url.empty())
        throw std::invalid_argument("provider.url is required for remote mode");
    return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(json::parse(buf.str()), path.parent_path());
}

ServiceConfig resolve_service_config(const std::optional<std::filesystem::path>& cli_path) {
    ServiceConfig c;
    if (cli_path) {
        c = ServiceConfig::load(*cli_path);
    } else if (const char* env = std::getenv("SLOTFORGE_CONFIG"); env && *env) {
        c = ServiceConfig::load(env);
    } else {
        c = ServiceConfig::from_json(json::object());
    }
    if (const char* port = std::getenv("SLOTFORGE_PORT"); port && *port) c.port = std::stoi(port);
    return c;
}

// ---------------------------------------------------------------------------

json turn_to_json(const BotTurn& t) {
    json results = json::array();
    for (const auto& m : t.results) {
        results.push_back({{"id", m.id}, {"title", m.title}, {"year", m.release_year}, {"rating", m.quality_rating}});
    }
    json estimates = json::object();
    for (const auto& [type, p] : t.estimates) estimates[std::string(to_string(type))] = p;
    return json{{"kind", std::string(to_string(t.kind))},
                {"asked", t.asked ? json(std::string(to_string(*t.asked))) : json(nullptr)},
                {"utterance", t.utterance},
                {"results", results},
                {"estimates", estimates},
                {"apology", t.apology}};
}

json state_to_json(const ConversationState& s) {
    json slots = json::array();
    for (auto t : kAllEntityTypes) {
        const auto& slot = s.slot(t);
        json values = json::object();
        for (const auto& [v, score] : slot.values) values[v] = score;
        const auto& a = s.assumption(t);
        slots.push_back({{"type", std::string(to_string(t))},
                         {"values", values},
                         {"assumed", a.has_value()},
                         {"skipped", a ? json(a->skipped) : json(nullptr)},
                         {"order", a ? json(a->order) : json(nullptr)},
                         {"history_size", slot.skip_history.size()}});
    }
    return json{{"slots", slots},
                {"last_question", s.last_question ? json(std::string(to_string(*s.last_question))) : json(nullptr)},
                {"assumed_count", s.assumed_count()}};
}

PersonGazetteer gazetteer_from_store(const MovieStore& store) {
    PersonGazetteer g;
    for (const auto& d : store.docs()) {
        for (const auto& n : d.directors) g.add(n);
        for (const auto& n : d.actors) g.add(n);
    }
    return g;
}

std::string uuid_v4(std::uint64_t hi, std::uint64_t lo) {
    hi = (hi & 0xFFFFFFFFFFFF0FFFull) | 0x0000000000004000ull;
    lo = (lo & 0x3FFFFFFFFFFFFFFFull) | 0x8000000000000000ull;
    char buf[37];
    std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx", static_cast<unsigned>(hi >> 32),
                  static_cast<unsigned>((hi >> 16) & 0xFFFF), static_cast<unsigned>(hi & 0xFFFF),
                  static_cast<unsigned>(lo >> 48), static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFull));
    return buf;
}

ChatService::ChatService(ServiceConfig config, Resources resources, ClockFn clock)
    : config_(std::move(config)), res_(std::move(resources)), clock_(std::move(clock)), rng_(std::random_device{}()) {
    if (!res_.lexicons) res_.lexicons = std::make_shared<Lexicons>();
    if (res_.store && !res_.index) res_.index = std::make_shared<PersonIndex>(*res_.store);
}

std::unique_ptr<ChatService> ChatService::from_config(const ServiceConfig& config) {
    Resources r;
    std::string error;
    try {
        r.lexicons = std::make_shared<Lexicons>(Lexicons::load_dir(config.lexicons_dir));
    } catch (const std::exception& e) {
        error = e.what();
        r.lexicons = std::make_shared<Lexicons>();
    }
    try {
        std::vector<std::string> warnings;
        r.store = std::make_shared<MovieStore>(MovieStore::ingest(config.movies, &warnings));
        for (const auto& w : warnings) spdlog::warn("{}", w);
        r.index = std::make_shared<PersonIndex>(*r.store);
    } catch (const std::exception& e) {
        error = e.what();
        r.store.reset();
    }
    try {
        r.history = std::make_shared<HistoryStore>(config.history_dir);
    } catch (const std::exception& e) {
        error = e.what();
    }
    if (config.provider_mode == "remote") {
        r.provider = std::make_shared<RemoteProvider>(config.remote_url, config.remote_timeout);
    } else {
        r.provider = std::make_shared<BuiltinProvider>(*r.lexicons,
                                                        r.store ? gazetteer_from_store(*r.store) : PersonGazetteer{});
    }
    auto service = std::make_unique<ChatService>(config, std::move(r));
    service->load_error_ = error;
    if (!error.empty()) spdlog::error("service degraded: {}", error);
    return service;
}

std::string ChatService::new_id() {
    std::lock_guard lock(rng_mutex_);
    return uuid_v4(rng_(), rng_());
}

DialogDeps ChatService::deps_for(const Session& s) const {
    DialogDeps d;
    d.provider = res_.provider.get();
    d.lexicons = res_.lexicons.get();
    d.store = res_.store.get();
    d.index = res_.index.get();
    d.history = res_.history.get();
    d.clock = clock_;
    d.user_id = s.user_id;
    return d;
}

namespace {

ApiResponse error(int status, const std::string& message) { return {status, json{{"error", message}}}; }

}  // namespace

ApiResponse ChatService::create_session(std::string_view body) {
    if (!res_.store || !res_.history || !res_.provider) return error(503, "movie store unavailable");
    std::optional<std::string> user;
    if (!body.empty()) {
        json j;
        try {
            j = json::parse(body);
        } catch (const json::exception&) {
            return error(400, "body must be JSON");
        }
        if (j.is_object() && j.contains("user_id") && j.at("user_id").is_string()) user = j.at("user_id").get<std::string>();
    }
    evict_expired();
    const auto K = config_.dialog.estimator.history_capacity;
    auto state = seeded_state(res_.history->history_snapshot(user, K), K);
    auto id = new_id();
    auto session = std::make_shared<Session>(id, user, DialogSession(config_.dialog, std::move(state)), clock_());
    {
        std::lock_guard lock(sessions_mutex_);
        sessions_.emplace(id, session);
    }
    return {201, json{{"session_id", id}, {"greeting", greeting()}}};
}

std::shared_ptr<ChatService::Session> ChatService::find(const std::string& id) {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return nullptr;
    if (clock_() - it->second->last_active_at() > config_.session_ttl) {
        sessions_.erase(it);
        return nullptr;
    }
    return it->second;
}

ApiResponse ChatService::post_message(const std::string& id, std::string_view body) {
    auto session = find(id);
    if (!session) return error(404, "unknown session");
    std::string text;
    try {
        const auto j = json::parse(body);
        if (!j.is_object() || !j.contains("text") || !j.at("text").is_string()) return error(422, "text is required");
        text = j.at("text").get<std::string>();
    } catch (const json::exception&) {
        return error(400, "body must be JSON");
    }
    if (trim(text).empty()) return error(422, "text must not be empty");
    std::unique_lock busy(session->busy, std::try_to_lock);
    if (!busy.owns_lock()) return error(409, "a message for this session is already being processed");
    const auto turn = session->dialog.step(text, deps_for(*session));
    session->last_active = clock_().time_since_epoch().count();
    auto out = turn_to_json(turn);
    out["session_id"] = id;
    out["finished"] = session->dialog.finished();
    return {200, out};
}

ApiResponse ChatService::get_state(const std::string& id) {
    auto session = find(id);
    if (!session) return error(404, "unknown session");
    std::lock_guard busy(session->busy);
    auto out = state_to_json(session->dialog.state());
    out["session_id"] = id;
    out["results_shown"] = session->dialog.results_shown();
    out["finished"] = session->dialog.finished();
    out["questions_asked"] = session->dialog.questions_asked();
    return {200, out};
}

ApiResponse ChatService::health() const {
    const bool ok = res_.store && res_.history && load_error_.empty();
    return {200, json{{"status", ok ? "ok" : "degraded"},
                      {"movie_count", res_.store ? res_.store->size() : 0},
                      {"history_count", res_.history ? res_.history->total() : 0}}};
}

std::size_t ChatService::evict_expired() {
    std::lock_guard lock(sessions_mutex_);
    const auto now = clock_();
    std::size_t n = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        if (now - it->second->last_active_at() > config_.session_ttl) {
            it = sessions_.erase(it);
            ++n;
        } else {
            ++it;
        }
    }
    return n;
}

std::size_t ChatService::session_count() const {
    std::lock_guard lock(sessions_mutex_);
    return sessions_.size();
}

void mount_routes(httplib::Server& server, ChatService& service) {
    auto reply = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Post("/v1/sessions", [&service, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.create_session(req.body));
    });
    server.Post(R"(/v1/sessions/([^/]+)/messages)", [&service, reply](const httplib::Request& req,
                                                                      httplib::Response& res) {
        reply(res, service.post_message(req.matches[1], req.body));
    });
    server.Get(R"(/v1/sessions/([^/]+)/state)", [&service, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.get_state(req.matches[1]));
    });
    auto health = [&service, reply](const httplib::Request&, httplib::Response& res) { reply(res, service.health()); };
    server.Get("/v1/health", health);
    server.Get("/health", health);
    const auto& ui = service.config().ui_dir;
    if (!ui.empty() && std::filesystem::is_directory(ui)) server.set_mount_point("/", ui.string());
}

}  // namespace slotforge
