#pragma once
// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "slotforge/adaptation.hpp"
#include "slotforge/moviedb.hpp"
#include "slotforge/nlu.hpp"
#include "slotforge/phonetics.hpp"
#include "slotforge/text.hpp"

namespace testing {

using namespace slotforge;

inline std::filesystem::path source_dir() { return SLOTFORGE_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }

struct Fixture {
    MovieStore store;
    PersonIndex index;
    Lexicons lexicons;
    PersonGazetteer people;
};

inline const Fixture& fixture() {
    static const Fixture f = [] {
        Fixture x;
        x.store = MovieStore::ingest(data_dir() / "movies.jsonl");
        x.index = PersonIndex(x.store);
        x.lexicons = Lexicons::load_dir(data_dir() / "lexicons");
        for (const auto& d : x.store.docs()) {
            for (const auto& n : d.directors) x.people.add(n);
            for (const auto& n : d.actors) x.people.add(n);
        }
        return x;
    }();
    return f;
}

inline const BuiltinProvider& builtin() {
    static const BuiltinProvider p(fixture().lexicons, fixture().people);
    return p;
}

inline ConversationRecord make_record(std::array<bool, kNumEntityTypes> skips, std::array<int, kNumEntityTypes> orders) {
    ConversationRecord r;
    r.skips = skips;
    r.orders = orders;
    return r;
}

// A record produced by a random sequence of non-empty assumption batches.
inline ConversationRecord random_record(std::mt19937_64& rng) {
    ConversationRecord r;
    std::vector<std::size_t> remaining{0, 1, 2, 3, 4, 5};
    int assumed = 0;
    std::bernoulli_distribution coin(0.8);
    while (!remaining.empty() && coin(rng)) {
        std::shuffle(remaining.begin(), remaining.end(), rng);
        const auto take = std::uniform_int_distribution<std::size_t>(1, remaining.size())(rng);
        for (std::size_t k = 0; k < take; ++k) {
            r.orders[remaining[k]] = assumed;
            r.skips[remaining[k]] = coin(rng) ? rng() % 2 == 0 : false;
        }
        assumed += static_cast<int>(take);
        remaining.erase(remaining.begin(), remaining.begin() + static_cast<long>(take));
    }
    for (auto k : remaining) {
        r.orders[k] = assumed;
        r.skips[k] = true;
    }
    return r;
}

inline HistoryView random_history(std::mt19937_64& rng, std::size_t K) {
    HistoryView h;
    for (std::size_t j = 0; j < K; ++j) h.records.push_back(random_record(rng));
    return h;
}

// Random current assumptions with `count` assumed types assumed in random batches.
inline CurrentAssumptions random_assumptions(std::mt19937_64& rng, std::size_t count) {
    CurrentAssumptions a;
    std::vector<std::size_t> types{0, 1, 2, 3, 4, 5};
    std::shuffle(types.begin(), types.end(), rng);
    int order = 0;
    std::size_t k = 0;
    while (k < count) {
        const auto batch = std::uniform_int_distribution<std::size_t>(1, count - k)(rng);
        for (std::size_t b = 0; b < batch; ++b) a.assumed[types[k + b]] = AssumptionRecord{rng() % 2 == 0, order};
        order += static_cast<int>(batch);
        k += batch;
    }
    return a;
}

// ---------------------------------------------------------------------------
// Oracles

// Nearest-neighbour estimate written directly from its definition.
inline double oracle_nn(EntityType i, const HistoryView& h, const CurrentAssumptions& a) {
    std::vector<int> d;
    for (const auto& r : h.records) {
        int x = 0;
        for (std::size_t t = 0; t < kNumEntityTypes; ++t) {
            if (a.assumed[t] && a.assumed[t]->skipped != r.skips[t]) ++x;
        }
        d.push_back(x);
    }
    const int m = *std::min_element(d.begin(), d.end());
    double num = 0;
    double den = 0;
    for (std::size_t j = 0; j < h.size(); ++j) {
        if (d[j] != m) continue;
        den += 1;
        num += h.records[j].skips[slot_index(i)] ? 1 : 0;
    }
    return num / den;
}

inline double oracle_skip_ratio(EntityType i, const HistoryView& h) {
    double n = 0;
    for (const auto& r : h.records) n += r.skips[slot_index(i)] ? 1 : 0;
    return n / static_cast<double>(h.size());
}

// Every order vector of M types reachable by a sequence of non-empty batches,
// enumerated by recursion over which batch each step assumes.
inline std::set<std::vector<int>> oracle_orders(int M, int offset) {
    std::set<std::vector<int>> out;
    std::function<void(std::vector<int>&, int)> rec = [&](std::vector<int>& cur, int assigned) {
        if (assigned == M) {
            auto v = cur;
            for (auto& x : v) x += offset;
            out.insert(v);
            return;
        }
        std::vector<int> free;
        for (int k = 0; k < M; ++k) {
            if (cur[static_cast<std::size_t>(k)] < 0) free.push_back(k);
        }
        const int F = static_cast<int>(free.size());
        for (int mask = 1; mask < (1 << F); ++mask) {
            int n = 0;
            for (int b = 0; b < F; ++b) {
                if (mask & (1 << b)) {
                    cur[static_cast<std::size_t>(free[static_cast<std::size_t>(b)])] = assigned;
                    ++n;
                }
            }
            rec(cur, assigned + n);
            for (int b = 0; b < F; ++b) {
                if (mask & (1 << b)) cur[static_cast<std::size_t>(free[static_cast<std::size_t>(b)])] = -1;
            }
        }
    };
    std::vector<int> cur(static_cast<std::size_t>(M), -1);
    if (M == 0) {
        out.insert(std::vector<int>{});
    } else {
        rec(cur, 0);
    }
    return out;
}

// Ordered Bell numbers via a(n) = sum_k C(n,k) a(n-k).
inline long long fubini(int n) {
    std::vector<long long> a(static_cast<std::size_t>(n) + 1, 0);
    a[0] = 1;
    for (int m = 1; m <= n; ++m) {
        long long c = 1;
        for (int k = 1; k <= m; ++k) {
            c = c * (m - k + 1) / k;
            a[static_cast<std::size_t>(m)] += c * a[static_cast<std::size_t>(m - k)];
        }
    }
    return a[static_cast<std::size_t>(n)];
}

// Clause semantics restated independently over the raw documents.
inline bool oracle_match(const MovieDoc& d, const Query& q) {
    auto in = [](const std::vector<std::string>& v, const std::string& s) {
        return std::find(v.begin(), v.end(), s) != v.end();
    };
    auto year_ok = [](const std::string& v, int y) {
        if (v.size() == 4) return std::stoi(v) == y;
        if (v.size() == 5 && v[4] == 's') return y / 10 == std::stoi(v.substr(0, 3));
        const auto dots = v.find("..");
        const int lo = dots == 0 ? -100000 : std::stoi(v.substr(0, dots));
        const int hi = dots + 2 == v.size() ? 100000 : std::stoi(v.substr(dots + 2));
        return lo <= y && y <= hi;
    };
    const std::vector<std::string> tiers{"g", "pg", "pg-13", "r", "nc-17"};
    auto rank = [&](const std::string& t) {
        return static_cast<int>(std::find(tiers.begin(), tiers.end(), t) - tiers.begin());
    };
    for (auto t : kAllEntityTypes) {
        const auto& c = q.clause(t);
        for (int side = 0; side < 2; ++side) {
            const auto& values = side == 0 ? c.include : c.exclude;
            if (values.empty()) continue;
            bool any = false;
            for (const auto& v : values) {
                bool hit = false;
                switch (t) {
                    case EntityType::AudienceAge: {
                        int max_rank = -1;
                        for (const auto& x : c.include) max_rank = std::max(max_rank, rank(x));
                        hit = side == 0 ? rank(d.audience_age) <= max_rank : d.audience_age == v;
                        break;
                    }
                    case EntityType::Genre:
                        hit = std::find(d.genre_ids.begin(), d.genre_ids.end(), std::stoi(v)) != d.genre_ids.end();
                        break;
                    case EntityType::Keyword: hit = in(d.keywords, v); break;
                    case EntityType::CountryOrContinent:
                        hit = side == 0 ? (d.main_country == v || d.main_continent == v)
                                        : (in(d.countries, v) || in(d.continents, v));
                        break;
                    case EntityType::Person: {
                        const auto key = person_key(v);
                        hit = in(d.director_keys, key) || in(d.actor_keys, key);
                        break;
                    }
                    case EntityType::ReleaseYear: hit = year_ok(v, d.release_year); break;
                }
                any = any || hit;
            }
            if (side == 0 && !any) return false;
            if (side == 1 && any) return false;
        }
    }
    return true;
}

inline std::vector<std::string> oracle_execute_ids(const MovieStore& store, const Query& q) {
    std::vector<const MovieDoc*> hits;
    for (const auto& d : store.docs()) {
        if (oracle_match(d, q)) hits.push_back(&d);
    }
    std::sort(hits.begin(), hits.end(), [](const MovieDoc* a, const MovieDoc* b) {
        return std::tie(b->quality_rating, b->release_year, a->id) < std::tie(a->quality_rating, a->release_year, b->id);
    });
    std::vector<std::string> ids;
    for (auto* d : hits) ids.push_back(d->id);
    if (q.limit && ids.size() > q.limit) ids.resize(q.limit);
    return ids;
}

inline std::vector<std::string> ids_of(const std::vector<MovieDoc>& v) {
    std::vector<std::string> ids;
    for (const auto& d : v) ids.push_back(d.id);
    return ids;
}

// Random query over values present in the fixture.
inline Query random_query(std::mt19937_64& rng, const MovieStore& store, bool with_person) {
    Query q;
    q.limit = rng() % 3 == 0 ? 0 : 1 + rng() % 20;
    const auto& docs = store.docs();
    auto pick = [&]() -> const MovieDoc& { return docs[rng() % docs.size()]; };
    auto coin = [&](int pct) { return static_cast<int>(rng() % 100) < pct; };
    if (with_person) {
        const int n = 1 + static_cast<int>(rng() % 2);
        for (int k = 0; k < n; ++k) {
            const auto& d = pick();
            const auto& names = (coin(50) && !d.directors.empty()) ? d.directors : d.actors;
            q.clause(EntityType::Person).include.insert(to_lower(names[rng() % names.size()]));
        }
    }
    if (coin(50)) q.clause(EntityType::Genre).include.insert(std::to_string(1 + rng() % 17));
    if (coin(30)) q.clause(EntityType::Genre).exclude.insert(std::to_string(1 + rng() % 17));
    if (coin(30)) q.clause(EntityType::CountryOrContinent).include.insert(coin(50) ? pick().main_country : pick().main_continent);
    if (coin(30)) q.clause(EntityType::CountryOrContinent).exclude.insert(pick().countries.back());
    static const std::vector<std::string> tiers{"g", "pg", "pg-13", "r", "nc-17"};
    if (coin(30)) q.clause(EntityType::AudienceAge).include.insert(tiers[rng() % tiers.size()]);
    if (coin(20)) q.clause(EntityType::AudienceAge).exclude.insert(tiers[rng() % tiers.size()]);
    static const std::vector<std::string> years{"1994", "1990s", "..1999", "1991..", "1980..2000", "2010s"};
    if (coin(30)) q.clause(EntityType::ReleaseYear).include.insert(years[rng() % years.size()]);
    if (coin(15)) q.clause(EntityType::ReleaseYear).exclude.insert(years[rng() % years.size()]);
    static const std::vector<std::string> kws{"space", "robots", "sharks", "magic", "heist", "dragons"};
    if (coin(20)) q.clause(EntityType::Keyword).include.insert(kws[rng() % kws.size()]);
    if (coin(15)) q.clause(EntityType::Keyword).exclude.insert(kws[rng() % kws.size()]);
    if (coin(10)) q.clause(EntityType::Person).exclude.insert(to_lower(pick().actors.front()));
    for (auto& c : q.clauses) {
        for (const auto& v : c.include) c.exclude.erase(v);
    }
    return q;
}

}  // namespace testing
