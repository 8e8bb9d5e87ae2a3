#pragma once
// Session service behind the /v1 HTTP API. ChatService is transport-free and
// returns (status, JSON body); mount_routes binds it to an httplib server.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>

#include "json.hpp"
#include "slotforge/dialog.hpp"
#include "slotforge/text.hpp"

namespace httplib {
class Server;
}

namespace slotforge {

struct ServiceConfig {
    DialogConfig dialog{};
    std::filesystem::path movies;        // movies.jsonl or a store directory
    std::filesystem::path lexicons_dir;
    std::filesystem::path history_dir;   // empty = in-memory history
    std::filesystem::path ui_dir;        // static files served under /
    std::string provider_mode = "builtin";  // builtin | remote
    std::string remote_url;
    std::chrono::milliseconds remote_timeout{2000};
    std::string host = "0.0.0.0";
    int port = 8080;
    std::chrono::seconds session_ttl{30 * 60};

    // Relative paths resolve against `base`.
    static ServiceConfig from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
    static ServiceConfig load(const std::filesystem::path& path);
};

// Estimator/dialog/NLU sections of a config document (shared with the CLI).
DialogConfig dialog_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DialogConfig& config);

// Config from --config, else SLOTFORGE_CONFIG, else defaults; SLOTFORGE_PORT overrides the port.
ServiceConfig resolve_service_config(const std::optional<std::filesystem::path>& cli_path);

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

nlohmann::json turn_to_json(const BotTurn& turn);
nlohmann::json state_to_json(const ConversationState& state);

// Builds a gazetteer of every director and actor in the store.
PersonGazetteer gazetteer_from_store(const MovieStore& store);

class ChatService {
public:
    using ClockFn = std::function<Timestamp()>;

    struct Resources {
        std::shared_ptr<const UnderstandingProvider> provider;
        std::shared_ptr<const Lexicons> lexicons;
        std::shared_ptr<const MovieStore> store;  // null = unavailable
        std::shared_ptr<const PersonIndex> index;
        std::shared_ptr<HistoryStore> history;  // null = unavailable
    };

    ChatService(ServiceConfig config, Resources resources, ClockFn clock = [] { return Clock::now(); });

    // Loads the movie store, lexicons, history and provider named by the config.
    // Load failures leave the service running in degraded mode.
    static std::unique_ptr<ChatService> from_config(const ServiceConfig& config);

    ApiResponse create_session(std::string_view body);
    ApiResponse post_message(const std::string& id, std::string_view body);
    ApiResponse get_state(const std::string& id);
    ApiResponse health() const;

    std::size_t evict_expired();
    std::size_t session_count() const;
    const ServiceConfig& config() const noexcept { return config_; }
    const std::string& load_error() const noexcept { return load_error_; }

private:
    struct Session {
        std::string id;
        std::optional<std::string> user_id;
        DialogSession dialog;
        Timestamp created;
        std::atomic<Clock::rep> last_active;  // ticks since epoch
        std::mutex busy;

        Session(std::string i, std::optional<std::string> u, DialogSession d, Timestamp now)
            : id(std::move(i)), user_id(std::move(u)), dialog(std::move(d)), created(now), last_active(now.time_since_epoch().count()) {}
        Timestamp last_active_at() const { return Timestamp(Clock::duration(last_active.load())); }
    };

    std::shared_ptr<Session> find(const std::string& id);
    std::string new_id();
    DialogDeps deps_for(const Session& s) const;

    ServiceConfig config_;
    Resources res_;
    ClockFn clock_;
    std::string load_error_;

    mutable std::mutex sessions_mutex_;
    std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
};

std::string uuid_v4(std::uint64_t hi, std::uint64_t lo);

// /v1/sessions, /v1/sessions/{id}/messages, /v1/sessions/{id}/state, /v1/health (+ /health), static UI.
void mount_routes(httplib::Server& server, ChatService& service);

}  // namespace slotforge
