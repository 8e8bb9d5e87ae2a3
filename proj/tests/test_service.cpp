#include "doctest.h"
#include "service_harness.hpp"
#include "stub_providers.hpp"

#include <fstream>
#include <regex>

using namespace slotforge;
using nlohmann::json;

namespace {

struct ManualClock {
    std::shared_ptr<Timestamp> now = std::make_shared<Timestamp>(Clock::now());
    ChatService::ClockFn fn() const {
        auto n = now;
        return [n] { return *n; };
    }
};

bool is_uuid_v4(const std::string& s) {
    static const std::regex re("^[0-9a-f]{8}-[0-9a-f]{4}-4[0-9a-f]{3}-[89ab][0-9a-f]{3}-[0-9a-f]{12}$");
    return std::regex_match(s, re);
}

}  // namespace

TEST_CASE("sessions are created with distinct uuids") {
    ChatService svc(ServiceConfig{}, testing::fixture_resources());
    const auto a = svc.create_session("");
    const auto b = svc.create_session(R"({"user_id":"u1"})");
    CHECK(a.status == 201);
    CHECK(b.status == 201);
    CHECK(is_uuid_v4(a.body.at("session_id")));
    CHECK(a.body.at("session_id") != b.body.at("session_id"));
    CHECK(a.body.at("greeting").get<std::string>().find("movie") != std::string::npos);
    CHECK(svc.create_session("{oops").status == 400);
    CHECK(svc.session_count() == 2);
    CHECK(is_uuid_v4(uuid_v4(0, 0)));
}

TEST_CASE("message round trip") {
    ChatService svc(ServiceConfig{}, testing::fixture_resources());
    const std::string id = svc.create_session("").body.at("session_id");
    const auto r = svc.post_message(id, R"({"text":"I want a comedy movie"})");
    REQUIRE(r.status == 200);
    CHECK(r.body.at("kind") == "ask_type");
    CHECK(r.body.at("estimates").is_object());
    CHECK(r.body.at("estimates").size() == 5);
    CHECK(r.body.at("session_id") == id);
    const auto st = svc.get_state(id);
    REQUIRE(st.status == 200);
    CHECK(st.body.at("slots").size() == 6);
    CHECK(st.body.at("slots").at(1).at("type") == "Genre");
    CHECK(st.body.at("slots").at(1).at("values").contains("1"));
    CHECK(st.body.at("slots").at(1).at("assumed") == true);
    CHECK(st.body.at("last_question").is_string());

    CHECK(svc.post_message(id, "not json").status == 400);
    CHECK(svc.post_message(id, R"({"text":"   "})").status == 422);
    CHECK(svc.post_message(id, R"({"txt":"hi"})").status == 422);
    CHECK(svc.post_message("missing", R"({"text":"hi"})").status == 404);
    CHECK(svc.get_state("missing").status == 404);
}

TEST_CASE("expired sessions are gone") {
    ManualClock clock;
    ServiceConfig cfg;
    cfg.session_ttl = std::chrono::seconds(60);
    ChatService svc(cfg, testing::fixture_resources(), clock.fn());
    const std::string id = svc.create_session("").body.at("session_id");
    *clock.now += std::chrono::seconds(30);
    CHECK(svc.post_message(id, R"({"text":"hello"})").status == 200);
    *clock.now += std::chrono::seconds(61);
    CHECK(svc.post_message(id, R"({"text":"hello"})").status == 404);
    svc.create_session("");
    *clock.now += std::chrono::seconds(61);
    CHECK(svc.evict_expired() == 1);
    CHECK(svc.session_count() == 0);
}

TEST_CASE("finished conversations reach the shared history") {
    auto res = testing::fixture_resources();
    auto history = res.history;
    ChatService svc(ServiceConfig{}, res);
    const std::string id = svc.create_session(R"({"user_id":"ann"})").body.at("session_id");
    svc.post_message(id, R"({"text":"I want a comedy movie"})");
    // Each "show me" refuses the pending question until none are left.
    json r;
    for (int n = 0; n < 10; ++n) {
        r = svc.post_message(id, R"({"text":"show me"})").body;
        if (r.at("kind") == "show_results") break;
    }
    REQUIRE(r.at("kind") == "show_results");
    CHECK_FALSE(r.at("results").empty());
    const auto bye = svc.post_message(id, R"({"text":"Thanks, that's perfect"})").body;
    CHECK(bye.at("kind") == "farewell");
    CHECK(bye.at("finished") == true);
    CHECK(svc.health().body.at("history_count") == 1);
    CHECK(history->history_snapshot(std::string("ann"), 10).size() == 1);
    // A new session for the same user starts from that history.
    const std::string next = svc.create_session(R"({"user_id":"ann"})").body.at("session_id");
    CHECK(svc.get_state(next).body.at("slots").at(0).at("history_size") == 1);
}

TEST_CASE("degraded mode") {
    auto res = testing::fixture_resources();
    res.store.reset();
    ChatService svc(ServiceConfig{}, res);
    CHECK(svc.create_session("").status == 503);
    CHECK(svc.health().body.at("status") == "degraded");
    ServiceConfig bad;
    bad.movies = "/nonexistent/movies.jsonl";
    bad.lexicons_dir = testing::data_dir() / "lexicons";
    auto loaded = ChatService::from_config(bad);
    CHECK_FALSE(loaded->load_error().empty());
    CHECK(loaded->health().body.at("status") == "degraded");
}

TEST_CASE("config loading") {
    const auto dir = std::filesystem::temp_directory_path() / ("slotforge_cfg_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "config.json");
        f << R"({"movies":"movies.jsonl","lexicons":"lex","port":9001,"session_ttl_seconds":5,
                 "provider":{"mode":"remote","url":"http://x:1","timeout_ms":50},
                 "estimator":{"K":7,"weight_alpha":2.5},"dialog":{"model":"nn","min_questions":3},
                 "nlu":{"asked_bias":0.25}})";
    }
    const auto cfg = ServiceConfig::load(dir / "config.json");
    CHECK(cfg.movies == dir / "movies.jsonl");
    CHECK(cfg.lexicons_dir == dir / "lex");
    CHECK(cfg.port == 9001);
    CHECK(cfg.session_ttl == std::chrono::seconds(5));
    CHECK(cfg.provider_mode == "remote");
    CHECK(cfg.remote_timeout == std::chrono::milliseconds(50));
    CHECK(cfg.dialog.estimator.history_capacity == 7);
    CHECK(cfg.dialog.estimator.weight_alpha == 2.5);
    CHECK(cfg.dialog.model == SkipModel::NN);
    CHECK(cfg.dialog.min_questions == 3);
    CHECK(cfg.dialog.nlu.asked_bias == 0.25);
    const auto round = dialog_config_from_json(to_json(cfg.dialog));
    CHECK(round.estimator.history_capacity == 7);
    CHECK(round.model == SkipModel::NN);
    CHECK_THROWS(ServiceConfig::from_json(json{{"port", "eighty"}}));
    std::filesystem::remove_all(dir);
}

TEST_CASE("live server") {
    ChatService svc(ServiceConfig{}, testing::fixture_resources());
    testing::LiveServer server(svc);
    auto c = server.client();
    auto h = c.Get("/health");
    REQUIRE(h);
    CHECK(h->status == 200);
    CHECK(json::parse(h->body).at("movie_count") == 200);
    CHECK(c.Get("/v1/health")->status == 200);
    CHECK(c.Post("/v1/sessions/none/messages", R"({"text":"x"})", "application/json")->status == 404);

    const auto result = testing::run_isolation_scenario(server, 100);
    CHECK_MESSAGE(result.ok, result.detail);
    CHECK(svc.session_count() == 100);
}

TEST_CASE("double post yields one conflict") {
    auto slow = std::make_shared<testing::SlowProvider>();
    slow->inner = &testing::builtin();
    slow->delay = std::chrono::milliseconds(400);
    ChatService svc(ServiceConfig{}, testing::fixture_resources(slow));
    testing::LiveServer server(svc);
    for (int n = 0; n < 3; ++n) {
        const auto r = testing::run_double_post(server);
        CHECK(r.ok == 1);
        CHECK(r.conflict == 1);
        CHECK(r.other == 0);
    }
}
