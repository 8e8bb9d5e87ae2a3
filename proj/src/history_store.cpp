#include "slotforge/history_store.hpp"

#include <cinttypes>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "slotforge/text.hpp"

namespace slotforge {

using nlohmann::json;

std::string metadata_key(const ConversationRecord& r) {
    std::string key = "s:";
    for (bool s : r.skips) key.push_back(s ? 'T' : 'F');
    key += "|o:";
    for (std::size_t k = 0; k < kNumEntityTypes; ++k) {
        if (k) key.push_back(',');
        key += std::to_string(r.orders[k]);
    }
    return key;
}

ConversationRecord parse_metadata_key(std::string_view key) {
    ConversationRecord r;
    if (key.size() < 2 + kNumEntityTypes + 3 || key.substr(0, 2) != "s:") {
        throw std::invalid_argument("bad metadata key");
    }
    for (std::size_t k = 0; k < kNumEntityTypes; ++k) {
        const char c = key[2 + k];
        if (c != 'T' && c != 'F') throw std::invalid_argument("bad skip flag in metadata key");
        r.skips[k] = c == 'T';
    }
    auto rest = key.substr(2 + kNumEntityTypes);
    if (rest.substr(0, 3) != "|o:") throw std::invalid_argument("bad metadata key");
    std::stringstream in{std::string(rest.substr(3))};
    std::string part;
    std::size_t k = 0;
    while (std::getline(in, part, ',')) {
        if (k >= kNumEntityTypes || part.empty()) throw std::invalid_argument("bad orders in metadata key");
        r.orders[k++] = std::stoi(part);
    }
    if (k != kNumEntityTypes) throw std::invalid_argument("bad orders in metadata key");
    return r;
}

std::string format_rfc3339(Timestamp ts) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(ts.time_since_epoch()).count();
    std::time_t secs = static_cast<std::time_t>(ms / 1000);
    long frac = static_cast<long>(ms % 1000);
    if (frac < 0) {
        frac += 1000;
        --secs;
    }
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03ldZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
    return buf;
}

std::optional<Timestamp> parse_rfc3339(std::string_view text) {
    std::tm tm{};
    int ms = 0;
    const std::string s(text);
    int n = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                    &tm.tm_min, &tm.tm_sec, &n) != 6) {
        return std::nullopt;
    }
    std::size_t pos = static_cast<std::size_t>(n);
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            if (digits < 3) ms = ms * 10 + (s[pos] - '0');
            ++digits;
            ++pos;
        }
        for (; digits < 3; ++digits) ms *= 10;
    }
    long offset = 0;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
        int oh = 0;
        int om = 0;
        if (std::sscanf(s.c_str() + pos + 1, "%2d:%2d", &oh, &om) != 2) return std::nullopt;
        offset = (s[pos] == '+' ? 1 : -1) * (oh * 3600L + om * 60L);
    } else if (pos >= s.size() || (s[pos] != 'Z' && s[pos] != 'z')) {
        return std::nullopt;
    }
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    const std::time_t secs = timegm(&tm) - offset;
    return Timestamp(std::chrono::duration_cast<Clock::duration>(std::chrono::seconds(secs) +
                                                                 std::chrono::milliseconds(ms)));
}

std::string config_digest(const EstimatorConfig& c) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%zu|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%d|%d|%.17g", c.history_capacity,
                  c.bias_alpha, c.weight_alpha, c.beta, c.gamma, c.delta, c.initial_bias, c.bias_cubed ? 1 : 0,
                  c.bias_invert_sign ? 1 : 0, c.value_weight);
    std::uint64_t h = 14695981039346656037ull;
    for (const char* p = buf; *p; ++p) {
        h ^= static_cast<unsigned char>(*p);
        h *= 1099511628211ull;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016" PRIx64, h);
    return hex;
}

std::string context_key(EntityType i, const CurrentAssumptions& assumptions, SkipModel model,
                        const EstimatorConfig& config) {
    std::string key = "i:";
    key += to_string(i);
    key += "|a:";
    for (std::size_t k = 0; k < kNumEntityTypes; ++k) {
        if (k) key.push_back(',');
        const auto& a = assumptions.assumed[k];
        key += a ? std::string(a->skipped ? "T" : "F") + std::to_string(a->order) : "-";
    }
    if (model == SkipModel::ValueAware && config.value_weight != 0.0) {
        key += "|v:";
        for (std::size_t k = 0; k < kNumEntityTypes; ++k) {
            if (k) key.push_back(';');
            for (const auto& v : assumptions.values[k]) key += v + "/";
        }
    }
    key += "|m:";
    key += to_string(model);
    key += "|c:" + config_digest(config);
    return key;
}

// ---------------------------------------------------------------------------
// Trie

namespace {

std::vector<std::string> input_labels(const ConversationRecord& r) {
    std::map<int, std::string> groups;
    for (std::size_t k = 0; k < kNumEntityTypes; ++k) {
        auto& label = groups[r.orders[k]];
        if (!label.empty()) label.push_back(',');
        label += std::to_string(k) + (r.skips[k] ? "T" : "F");
    }
    std::vector<std::string> out;
    for (auto& [_, label] : groups) out.push_back(label);
    return out;
}

void collect(const MetadataTrie::Node& node, std::vector<std::string>& path,
             std::map<std::string, std::size_t>& out) {
    if (node.count > 0) {
        ConversationRecord r;
        int before = 0;
        for (const auto& label : path) {
            std::stringstream in(label);
            std::string item;
            int group = 0;
            while (std::getline(in, item, ',')) {
                const auto k = static_cast<std::size_t>(std::stoi(item.substr(0, item.size() - 1)));
                r.skips.at(k) = item.back() == 'T';
                r.orders.at(k) = before;
                ++group;
            }
            before += group;
        }
        out[metadata_key(r)] += node.count;
    }
    for (const auto& [label, child] : node.children) {
        path.push_back(label);
        collect(child, path, out);
        path.pop_back();
    }
}

json node_to_json(const MetadataTrie::Node& n) {
    json j = json::object();
    if (n.count) j["count"] = n.count;
    if (!n.children.empty()) {
        json c = json::object();
        for (const auto& [label, child] : n.children) c[label] = node_to_json(child);
        j["children"] = std::move(c);
    }
    return j;
}

MetadataTrie::Node node_from_json(const json& j) {
    MetadataTrie::Node n;
    n.count = j.value("count", std::size_t{0});
    if (j.contains("children")) {
        for (const auto& [label, child] : j.at("children").items()) n.children.emplace(label, node_from_json(child));
    }
    return n;
}

std::size_t count_nodes(const MetadataTrie::Node& n) {
    std::size_t total = 1;
    for (const auto& [_, c] : n.children) total += count_nodes(c);
    return total;
}

}  // namespace

void MetadataTrie::insert(const ConversationRecord& record, std::size_t count) {
    Node* n = &root_;
    for (const auto& label : input_labels(record)) n = &n->children[label];
    n->count += count;
}

std::map<std::string, std::size_t> MetadataTrie::counts() const {
    std::map<std::string, std::size_t> out;
    std::vector<std::string> path;
    collect(root_, path, out);
    return out;
}

std::size_t MetadataTrie::node_count() const { return count_nodes(root_); }

std::string MetadataTrie::to_json() const { return node_to_json(root_).dump(); }

MetadataTrie MetadataTrie::from_json(std::string_view text) {
    MetadataTrie t;
    t.root_ = node_from_json(json::parse(text));
    return t;
}

// ---------------------------------------------------------------------------
// Store

HistoryStore::HistoryStore(std::filesystem::path dir, ClockFn clock) : dir_(std::move(dir)), clock_(std::move(clock)) {
    if (!dir_.empty()) {
        std::filesystem::create_directories(dir_);
        load();
    }
}

void HistoryStore::add_in_memory(ConversationRecord record, std::size_t multiplicity) {
    record.values = {};
    counts_[metadata_key(record)] += multiplicity;
    for (std::size_t k = 0; k < multiplicity; ++k) log_.push_back(record);
}

void HistoryStore::load() {
    const auto trie_path = dir_ / "metadata.trie.json";
    if (std::filesystem::exists(trie_path)) {
        std::ifstream in(trie_path);
        std::stringstream buf;
        buf << in.rdbuf();
        for (const auto& [key, c] : MetadataTrie::from_json(buf.str()).counts()) {
            add_in_memory(parse_metadata_key(key), c);
        }
    }
    std::ifstream meta(dir_ / "metadata.jsonl");
    std::string line;
    std::size_t n = 0;
    while (meta && std::getline(meta, line)) {
        ++n;
        if (trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            ConversationRecord r;
            const auto skips = j.at("skips").get<std::vector<bool>>();
            const auto orders = j.at("orders").get<std::vector<int>>();
            if (skips.size() != kNumEntityTypes || orders.size() != kNumEntityTypes)
                throw std::invalid_argument("wrong arity");
            for (std::size_t k = 0; k < kNumEntityTypes; ++k) {
                r.skips[k] = skips[k];
                r.orders[k] = orders[k];
            }
            if (auto ts = parse_rfc3339(j.value("ts", std::string()))) r.timestamp = *ts;
            if (j.contains("user") && j.at("user").is_string()) r.user_id = j.at("user").get<std::string>();
            if (!is_valid_record(r)) throw std::invalid_argument("invalid record");
            add_in_memory(std::move(r), 1);
        } catch (const std::exception& e) {
            spdlog::warn("metadata.jsonl line {} skipped: {}", n, e.what());
        }
    }
    std::ifstream est(dir_ / "estimates.jsonl");
    while (est && std::getline(est, line)) {
        if (trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            EstimateCacheEntry e{j.at("context_key").get<std::string>(), j.at("p").get<double>(), {}};
            if (auto ts = parse_rfc3339(j.at("ts").get<std::string>())) e.timestamp = *ts;
            if (e.p_hat < 0.0 || e.p_hat > 1.0) continue;
            cache_[e.context_key] = e;
        } catch (const std::exception&) {
        }
    }
}

void HistoryStore::record(const ConversationRecord& record) {
    if (!is_valid_record(record)) throw std::invalid_argument("invalid conversation record");
    std::unique_lock lock(records_mutex_);
    if (!dir_.empty()) {
        json j{{"skips", std::vector<bool>(record.skips.begin(), record.skips.end())},
               {"orders", std::vector<int>(record.orders.begin(), record.orders.end())},
               {"ts", format_rfc3339(record.timestamp)}};
        if (record.user_id) j["user"] = *record.user_id;
        std::ofstream out(dir_ / "metadata.jsonl", std::ios::app);
        out << j.dump() << '\n';
        out.flush();
        if (!out) throw StorageError("cannot append to " + (dir_ / "metadata.jsonl").string());
    }
    add_in_memory(record, 1);
}

std::size_t HistoryStore::count(const std::string& key) const {
    std::shared_lock lock(records_mutex_);
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
}

std::size_t HistoryStore::total() const {
    std::shared_lock lock(records_mutex_);
    return log_.size();
}

std::map<std::string, std::size_t> HistoryStore::counts() const {
    std::shared_lock lock(records_mutex_);
    return counts_;
}

HistoryView HistoryStore::history_snapshot(const std::optional<std::string>& user, std::size_t K) const {
    std::shared_lock lock(records_mutex_);
    std::vector<const ConversationRecord*> picked;
    for (auto it = log_.rbegin(); it != log_.rend(); ++it) {
        if (!user || it->user_id == user) picked.push_back(&*it);
    }
    std::stable_sort(picked.begin(), picked.end(),
                     [](const auto* a, const auto* b) { return a->timestamp > b->timestamp; });
    HistoryView view;
    for (std::size_t k = 0; k < picked.size() && k < K; ++k) view.records.push_back(*picked[k]);
    return view;
}

HistoryView HistoryStore::aggregated_history() const {
    std::shared_lock lock(records_mutex_);
    HistoryView view;
    for (const auto& [key, c] : counts_) {
        const auto r = parse_metadata_key(key);
        for (std::size_t k = 0; k < c; ++k) view.records.push_back(r);
    }
    return view;
}

SkipEstimate HistoryStore::estimate_with_cache(EntityType i, const CurrentAssumptions& assumptions, SkipModel model,
                                               const EstimatorConfig& config, std::chrono::milliseconds max_age) {
    if (max_age.count() < 0) throw std::invalid_argument("max_age must be >= 0");
    const auto key = context_key(i, assumptions, model, config);
    std::lock_guard lock(cache_mutex_);
    const auto now = clock_();
    if (auto it = cache_.find(key); it != cache_.end() && max_age.count() > 0 && now - it->second.timestamp <= max_age) {
        return {it->second.p_hat, model};
    }
    const auto history = aggregated_history();
    auto cfg = config;
    cfg.history_capacity = std::max(cfg.history_capacity, history.size());
    const auto estimate = estimate_skip(model, i, history, assumptions, cfg);
    ++computations_;
    EstimateCacheEntry entry{key, estimate.p_hat, now};
    cache_[key] = entry;
    if (!dir_.empty()) {
        std::ofstream out(dir_ / "estimates.jsonl", std::ios::app);
        out << json{{"context_key", key}, {"p", entry.p_hat}, {"ts", format_rfc3339(now)}}.dump() << '\n';
        out.flush();
        if (!out) spdlog::warn("cannot append to estimates.jsonl");
    }
    return estimate;
}

std::size_t HistoryStore::computation_count() const {
    std::lock_guard lock(cache_mutex_);
    return computations_;
}

std::optional<EstimateCacheEntry> HistoryStore::cached(const std::string& key) const {
    std::lock_guard lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) return std::nullopt;
    return it->second;
}

MetadataTrie HistoryStore::trie() const {
    MetadataTrie t;
    for (const auto& [key, c] : counts()) t.insert(parse_metadata_key(key), c);
    return t;
}

void HistoryStore::compact() {
    if (dir_.empty()) return;
    const auto t = trie();
    std::unique_lock lock(records_mutex_);
    const auto tmp = dir_ / "metadata.trie.json.tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << t.to_json() << '\n';
        if (!out) throw StorageError("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, dir_ / "metadata.trie.json");
    std::ofstream(dir_ / "metadata.jsonl", std::ios::trunc);
    for (auto& r : log_) {
        r.timestamp = {};
        r.user_id.reset();
    }
}

}  // namespace slotforge
