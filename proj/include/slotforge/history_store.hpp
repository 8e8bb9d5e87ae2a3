#pragma once
// Shared store of conversation metadata (counted by skips/orders) and a
// timestamped cache of computed skip estimates. Both stores are JSON-lines
// logs replayed into memory at startup; entity values are never written.

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "slotforge/adaptation.hpp"
#include "slotforge/core_model.hpp"

namespace slotforge {

class StorageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// "s:TFTFFT|o:0,1,2,2,2,2"
std::string metadata_key(const ConversationRecord& record);
// Inverse of metadata_key on the (skips, orders) projection. Throws std::invalid_argument.
ConversationRecord parse_metadata_key(std::string_view key);

std::string format_rfc3339(Timestamp ts);
std::optional<Timestamp> parse_rfc3339(std::string_view text);

// FNV-1a digest (hex) of every estimator parameter.
std::string config_digest(const EstimatorConfig& config);
std::string context_key(EntityType i, const CurrentAssumptions& assumptions, SkipModel model,
                        const EstimatorConfig& config);

// Trie of user inputs: each level is one input, labelled by the types it
// assumed and their skip flags. Leaves carry conversation counts.
class MetadataTrie {
public:
    struct Node {
        std::map<std::string, Node> children;
        std::size_t count = 0;  // conversations ending here
    };

    void insert(const ConversationRecord& record, std::size_t count = 1);
    std::map<std::string, std::size_t> counts() const;
    std::size_t node_count() const;
    std::string to_json() const;
    static MetadataTrie from_json(std::string_view text);
    const Node& root() const noexcept { return root_; }

private:
    Node root_;
};

struct EstimateCacheEntry {
    std::string context_key;
    double p_hat = 0.0;
    Timestamp timestamp{};
};

class HistoryStore {
public:
    using ClockFn = std::function<Timestamp()>;

    // An empty `dir` keeps everything in memory.
    explicit HistoryStore(std::filesystem::path dir = {}, ClockFn clock = [] { return Clock::now(); });

    // Appends to metadata.jsonl and then bumps the in-memory count. Throws StorageError on I/O failure.
    void record(const ConversationRecord& record);

    std::size_t count(const std::string& key) const;
    std::size_t total() const;
    std::map<std::string, std::size_t> counts() const;

    // Newest first, truncated to K. std::nullopt scope merges all users by recency.
    HistoryView history_snapshot(const std::optional<std::string>& user, std::size_t K) const;
    // Every counted record expanded by its multiplicity, in key order.
    HistoryView aggregated_history() const;

    SkipEstimate estimate_with_cache(EntityType i, const CurrentAssumptions& assumptions, SkipModel model,
                                     const EstimatorConfig& config,
                                     std::chrono::milliseconds max_age = std::chrono::minutes(10));
    std::size_t computation_count() const;
    std::optional<EstimateCacheEntry> cached(const std::string& key) const;

    MetadataTrie trie() const;
    // Rewrites the metadata log as metadata.trie.json (timestamps and users are dropped).
    void compact();

    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    void load();
    void add_in_memory(ConversationRecord record, std::size_t multiplicity);

    std::filesystem::path dir_;
    ClockFn clock_;

    mutable std::shared_mutex records_mutex_;
    std::vector<ConversationRecord> log_;  // insertion order
    std::map<std::string, std::size_t> counts_;

    mutable std::mutex cache_mutex_;
    std::unordered_map<std::string, EstimateCacheEntry> cache_;
    std::size_t computations_ = 0;
};

}  // namespace slotforge
