#pragma once
// Movie document store, person-key inverted index and query engine.

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "slotforge/core_model.hpp"

namespace slotforge {

struct MovieDoc {
    std::string id;
    std::string title;
    int release_year = 0;
    std::string audience_age;  // tier: g, pg, pg-13, r, nc-17
    double quality_rating = 0.0;
    std::vector<int> genre_ids;
    std::vector<std::string> directors;
    std::vector<std::string> actors;
    std::vector<std::string> director_keys;
    std::vector<std::string> actor_keys;
    std::vector<std::string> countries;
    std::vector<std::string> continents;
    std::string main_country;
    std::string main_continent;
    std::vector<std::string> keywords;

    friend bool operator==(const MovieDoc&, const MovieDoc&) = default;
};

class IngestError : public std::runtime_error {
public:
    IngestError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// One JSON object per line. Missing key arrays are computed from names.
MovieDoc movie_from_json_line(std::string_view line);
std::string movie_to_json_line(const MovieDoc& doc);
// Throws std::invalid_argument when a MovieDoc invariant is violated.
void validate_movie(const MovieDoc& doc);

// Ordered audience scale; -1 for an unknown tier.
int audience_tier_rank(std::string_view tier);

class MovieStore {
public:
    MovieStore() = default;
    explicit MovieStore(std::vector<MovieDoc> docs, std::vector<std::string>* warnings = nullptr);

    // Reads a movies.jsonl file, or <dir>/movies.jsonl when given a directory.
    static MovieStore ingest(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
    void save(const std::filesystem::path& path) const;

    const std::vector<MovieDoc>& docs() const noexcept { return docs_; }
    std::size_t size() const noexcept { return docs_.size(); }
    const MovieDoc* find(std::string_view id) const;

private:
    std::vector<MovieDoc> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

// PersonKey -> full movie documents (copies) listing that key as director or actor.
class PersonIndex {
public:
    PersonIndex() = default;
    explicit PersonIndex(const MovieStore& store);

    const std::vector<MovieDoc>* lookup(const std::string& key) const;
    std::size_t key_count() const noexcept { return index_.size(); }
    const std::unordered_map<std::string, std::vector<MovieDoc>>& entries() const noexcept { return index_; }

private:
    std::unordered_map<std::string, std::vector<MovieDoc>> index_;
};

struct YearRange {
    int lo = 0;
    int hi = 0;
    bool contains(int y) const noexcept { return lo <= y && y <= hi; }
};

// "1994", "1990s", "..1999", "1991..", "1990..2000".
std::optional<YearRange> parse_year_value(std::string_view value);

struct TypeClause {
    std::set<std::string> include;
    std::set<std::string> exclude;
    bool empty() const noexcept { return include.empty() && exclude.empty(); }
};

struct Query {
    std::array<TypeClause, kNumEntityTypes> clauses{};
    std::size_t limit = 10;  // 0 = unlimited

    TypeClause& clause(EntityType t) { return clauses[slot_index(t)]; }
    const TypeClause& clause(EntityType t) const { return clauses[slot_index(t)]; }
    bool has_person_include() const { return !clause(EntityType::Person).include.empty(); }
};

// Positive-score values -> include, negative -> exclude, empty slots -> no clause.
Query build_query(const ConversationState& state, std::size_t limit = 10);

bool matches(const MovieDoc& doc, const Query& query);

// quality_rating desc, release_year desc, id asc.
void rank_movies(std::vector<MovieDoc>& movies);

// Starts from the person index when the query has person includes, otherwise scans.
std::vector<MovieDoc> execute(const Query& query, const MovieStore& store, const PersonIndex& index);
// Linear scan over the whole store.
std::vector<MovieDoc> execute_scan(const Query& query, const MovieStore& store);

}  // namespace slotforge
