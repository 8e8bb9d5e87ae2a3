#include "slotforge/moviedb.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <unordered_set>

#include "json.hpp"
#include "slotforge/phonetics.hpp"
#include "slotforge/text.hpp"

namespace slotforge {

using nlohmann::json;

namespace {

template <typename T>
std::vector<T> optional_array(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return {};
    return j.at(key).get<std::vector<T>>();
}

std::vector<std::string> keys_for(const std::vector<std::string>& names) {
    std::vector<std::string> keys;
    keys.reserve(names.size());
    for (const auto& n : names) keys.push_back(person_key(n));
    return keys;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

int audience_tier_rank(std::string_view tier) {
    static constexpr std::array<std::string_view, 5> kTiers{"g", "pg", "pg-13", "r", "nc-17"};
    const std::string t = to_lower(trim(tier));
    for (std::size_t k = 0; k < kTiers.size(); ++k) {
        if (kTiers[k] == t) return static_cast<int>(k);
    }
    return -1;
}

void validate_movie(const MovieDoc& doc) {
    if (doc.id.empty()) throw std::invalid_argument("id must not be empty");
    if (doc.director_keys.size() != doc.directors.size())
        throw std::invalid_argument("director_keys length differs from directors");
    if (doc.actor_keys.size() != doc.actors.size())
        throw std::invalid_argument("actor_keys length differs from actors");
    if (!contains(doc.countries, doc.main_country)) throw std::invalid_argument("main_country not in countries");
    if (!contains(doc.continents, doc.main_continent))
        throw std::invalid_argument("main_continent not in continents");
}

MovieDoc movie_from_json_line(std::string_view line) {
    const auto j = json::parse(line);
    if (!j.is_object()) throw std::invalid_argument("movie must be a JSON object");
    MovieDoc d;
    d.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    d.title = j.at("title").get<std::string>();
    d.release_year = j.at("release_year").get<int>();
    d.audience_age = to_lower(j.value("audience_age", std::string()));
    d.quality_rating = j.value("quality_rating", 0.0);
    d.genre_ids = optional_array<int>(j, "genre_ids");
    d.directors = optional_array<std::string>(j, "directors");
    d.actors = optional_array<std::string>(j, "actors");
    d.director_keys = j.contains("director_keys") ? optional_array<std::string>(j, "director_keys")
                                                  : keys_for(d.directors);
    d.actor_keys = j.contains("actor_keys") ? optional_array<std::string>(j, "actor_keys") : keys_for(d.actors);
    for (auto& c : optional_array<std::string>(j, "countries")) d.countries.push_back(to_lower(c));
    for (auto& c : optional_array<std::string>(j, "continents")) d.continents.push_back(to_lower(c));
    d.main_country = to_lower(j.at("main_country").get<std::string>());
    d.main_continent = to_lower(j.at("main_continent").get<std::string>());
    for (auto& k : optional_array<std::string>(j, "keywords")) d.keywords.push_back(to_lower(k));
    validate_movie(d);
    return d;
}

std::string movie_to_json_line(const MovieDoc& d) {
    json j{{"id", d.id},
           {"title", d.title},
           {"release_year", d.release_year},
           {"audience_age", d.audience_age},
           {"quality_rating", d.quality_rating},
           {"genre_ids", d.genre_ids},
           {"directors", d.directors},
           {"actors", d.actors},
           {"director_keys", d.director_keys},
           {"actor_keys", d.actor_keys},
           {"countries", d.countries},
           {"continents", d.continents},
           {"main_country", d.main_country},
           {"main_continent", d.main_continent},
           {"keywords", d.keywords}};
    return j.dump();
}

MovieStore::MovieStore(std::vector<MovieDoc> docs, std::vector<std::string>* warnings) {
    for (auto& d : docs) {
        auto it = by_id_.find(d.id);
        if (it != by_id_.end()) {
            if (warnings) warnings->push_back("duplicate id " + d.id + ", keeping the last one");
            docs_[it->second] = std::move(d);
            continue;
        }
        by_id_.emplace(d.id, docs_.size());
        docs_.push_back(std::move(d));
    }
}

MovieStore MovieStore::ingest(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    const auto file = std::filesystem::is_directory(path) ? path / "movies.jsonl" : path;
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open movie file " + file.string());
    std::vector<MovieDoc> docs;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        try {
            docs.push_back(movie_from_json_line(line));
        } catch (const std::exception& e) {
            throw IngestError(n, e.what());
        }
    }
    return MovieStore(std::move(docs), warnings);
}

void MovieStore::save(const std::filesystem::path& path) const {
    auto file = path;
    if (std::filesystem::is_directory(path) || !path.has_extension()) {
        std::filesystem::create_directories(path);
        file = path / "movies.jsonl";
    }
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    for (const auto& d : docs_) out << movie_to_json_line(d) << '\n';
}

const MovieDoc* MovieStore::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &docs_[it->second];
}

PersonIndex::PersonIndex(const MovieStore& store) {
    for (const auto& d : store.docs()) {
        std::unordered_set<std::string> keys(d.director_keys.begin(), d.director_keys.end());
        keys.insert(d.actor_keys.begin(), d.actor_keys.end());
        for (const auto& k : keys) {
            if (!k.empty()) index_[k].push_back(d);
        }
    }
}

const std::vector<MovieDoc>* PersonIndex::lookup(const std::string& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : &it->second;
}

std::optional<YearRange> parse_year_value(std::string_view value) {
    static const std::regex exact(R"(^(\d{4})$)");
    static const std::regex decade(R"(^(\d{3})0s$)");
    static const std::regex upto(R"(^\.\.(\d{4})$)");
    static const std::regex from(R"(^(\d{4})\.\.$)");
    static const std::regex range(R"(^(\d{4})\.\.(\d{4})$)");
    const std::string s(trim(value));
    std::smatch m;
    if (std::regex_match(s, m, exact)) return YearRange{std::stoi(m[1]), std::stoi(m[1])};
    if (std::regex_match(s, m, decade)) return YearRange{std::stoi(m[1]) * 10, std::stoi(m[1]) * 10 + 9};
    if (std::regex_match(s, m, upto)) return YearRange{0, std::stoi(m[1])};
    if (std::regex_match(s, m, from)) return YearRange{std::stoi(m[1]), 9999};
    if (std::regex_match(s, m, range)) {
        const int a = std::stoi(m[1]);
        const int b = std::stoi(m[2]);
        return YearRange{std::min(a, b), std::max(a, b)};
    }
    return std::nullopt;
}

Query build_query(const ConversationState& state, std::size_t limit) {
    Query q;
    q.limit = limit;
    for (auto t : kAllEntityTypes) {
        for (const auto& [value, score] : state.slot(t).values) {
            if (score > 0) {
                q.clause(t).include.insert(value);
            } else if (score < 0) {
                q.clause(t).exclude.insert(value);
            }
        }
    }
    return q;
}

namespace {

bool year_in(const std::set<std::string>& values, int year) {
    return std::any_of(values.begin(), values.end(), [&](const std::string& v) {
        auto r = parse_year_value(v);
        return r && r->contains(year);
    });
}

bool genre_in(const std::set<std::string>& values, const MovieDoc& d) {
    return std::any_of(d.genre_ids.begin(), d.genre_ids.end(),
                       [&](int g) { return values.count(std::to_string(g)) > 0; });
}

bool person_in(const std::set<std::string>& values, const MovieDoc& d) {
    return std::any_of(values.begin(), values.end(), [&](const std::string& v) {
        const auto key = person_key(v);
        return contains(d.director_keys, key) || contains(d.actor_keys, key);
    });
}

bool include_ok(EntityType t, const std::set<std::string>& inc, const MovieDoc& d) {
    switch (t) {
        case EntityType::AudienceAge: {
            const int rank = audience_tier_rank(d.audience_age);
            int max_rank = -1;
            for (const auto& v : inc) max_rank = std::max(max_rank, audience_tier_rank(v));
            return rank >= 0 && rank <= max_rank;
        }
        case EntityType::Genre:
            return genre_in(inc, d);
        case EntityType::Keyword:
            return std::any_of(d.keywords.begin(), d.keywords.end(), [&](const auto& k) { return inc.count(k) > 0; });
        case EntityType::CountryOrContinent:
            return inc.count(d.main_country) > 0 || inc.count(d.main_continent) > 0;
        case EntityType::Person:
            return person_in(inc, d);
        case EntityType::ReleaseYear:
            return year_in(inc, d.release_year);
    }
    return false;
}

bool exclude_hit(EntityType t, const std::set<std::string>& exc, const MovieDoc& d) {
    switch (t) {
        case EntityType::AudienceAge:
            return exc.count(d.audience_age) > 0;
        case EntityType::Genre:
            return genre_in(exc, d);
        case EntityType::Keyword:
            return std::any_of(d.keywords.begin(), d.keywords.end(), [&](const auto& k) { return exc.count(k) > 0; });
        case EntityType::CountryOrContinent:
            return std::any_of(d.countries.begin(), d.countries.end(), [&](const auto& c) { return exc.count(c) > 0; }) ||
                   std::any_of(d.continents.begin(), d.continents.end(),
                               [&](const auto& c) { return exc.count(c) > 0; });
        case EntityType::Person:
            return person_in(exc, d);
        case EntityType::ReleaseYear:
            return year_in(exc, d.release_year);
    }
    return false;
}

void finish(std::vector<MovieDoc>& out, std::size_t limit) {
    rank_movies(out);
    if (limit > 0 && out.size() > limit) out.resize(limit);
}

}  // namespace

bool matches(const MovieDoc& doc, const Query& query) {
    for (auto t : kAllEntityTypes) {
        const auto& c = query.clause(t);
        if (!c.include.empty() && !include_ok(t, c.include, doc)) return false;
        if (!c.exclude.empty() && exclude_hit(t, c.exclude, doc)) return false;
    }
    return true;
}

void rank_movies(std::vector<MovieDoc>& movies) {
    std::sort(movies.begin(), movies.end(), [](const MovieDoc& a, const MovieDoc& b) {
        if (a.quality_rating != b.quality_rating) return a.quality_rating > b.quality_rating;
        if (a.release_year != b.release_year) return a.release_year > b.release_year;
        return a.id < b.id;
    });
}

std::vector<MovieDoc> execute_scan(const Query& query, const MovieStore& store) {
    std::vector<MovieDoc> out;
    for (const auto& d : store.docs()) {
        if (matches(d, query)) out.push_back(d);
    }
    finish(out, query.limit);
    return out;
}

std::vector<MovieDoc> execute(const Query& query, const MovieStore& store, const PersonIndex& index) {
    if (!query.has_person_include()) return execute_scan(query, store);
    std::vector<MovieDoc> out;
    std::unordered_set<std::string> seen;
    for (const auto& name : query.clause(EntityType::Person).include) {
        const auto* list = index.lookup(person_key(name));
        if (!list) continue;
        for (const auto& d : *list) {
            if (seen.insert(d.id).second && matches(d, query)) out.push_back(d);
        }
    }
    finish(out, query.limit);
    return out;
}

}  // namespace slotforge
