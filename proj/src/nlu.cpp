#include "slotforge/nlu.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

#include "slotforge/phonetics.hpp"
#include "slotforge/text.hpp"

namespace slotforge {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Lexicon

Lexicon::Lexicon(std::map<std::string, std::string> entries) {
    for (auto& [phrase, value] : entries) entries_.emplace(to_lower(trim(phrase)), std::move(value));
    if (entries_.count("")) entries_.erase("");
    for (const auto& [phrase, _] : entries_) by_length_.push_back(phrase);
    std::stable_sort(by_length_.begin(), by_length_.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
}

Lexicon Lexicon::from_json_text(std::string_view json_text) {
    const auto doc = json::parse(json_text);
    if (!doc.is_object()) throw std::invalid_argument("lexicon must be a JSON object");
    std::map<std::string, std::string> entries;
    for (const auto& [phrase, id] : doc.items()) {
        if (id.is_number_integer()) {
            entries.emplace(phrase, std::to_string(id.get<long long>()));
        } else if (id.is_string()) {
            entries.emplace(phrase, id.get<std::string>());
        } else {
            throw std::invalid_argument("lexicon id for '" + phrase + "' must be an integer or string");
        }
    }
    if (entries.empty()) throw std::invalid_argument("lexicon must not be empty");
    return Lexicon(std::move(entries));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::vector<LexiconHit> Lexicon::find_all(std::string_view text) const {
    const std::string lower = to_lower(text);
    std::vector<bool> used(lower.size(), false);
    std::vector<LexiconHit> hits;
    for (const auto& phrase : by_length_) {
        std::size_t pos = 0;
        while ((pos = lower.find(phrase, pos)) != std::string::npos) {
            const std::size_t end = pos + phrase.size();
            const bool bounded = is_word_boundary(lower, pos, end);
            const bool free = std::none_of(used.begin() + static_cast<long>(pos), used.begin() + static_cast<long>(end),
                                           [](bool u) { return u; });
            if (bounded && free) {
                std::fill(used.begin() + static_cast<long>(pos), used.begin() + static_cast<long>(end), true);
                hits.push_back({entries_.at(phrase), phrase, {pos, end - 1}});
            }
            pos += 1;
        }
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.span.start < b.span.start; });
    return hits;
}

std::optional<std::string> Lexicon::lookup(std::string_view phrase) const {
    auto it = entries_.find(to_lower(trim(phrase)));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

namespace {

constexpr std::array<std::string_view, kNumEntityTypes> kLexiconFiles{
    "audience_age.json", "genre.json", "keyword.json", "country_or_continent.json", "", "",
};

}  // namespace

Lexicons Lexicons::load_dir(const std::filesystem::path& dir) {
    Lexicons out;
    for (auto t : kAllEntityTypes) {
        const auto file = kLexiconFiles[slot_index(t)];
        if (file.empty()) continue;
        const auto path = dir / std::string(file);
        if (std::filesystem::exists(path)) out.by_type[slot_index(t)] = Lexicon::load(path);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Canonicalization

std::optional<std::string> normalize_year_expression(std::string_view text) {
    static const std::regex between(R"(^between ((?:18|19|20)\d{2}) and ((?:18|19|20)\d{2})$)");
    static const std::regex bounded(R"(^(before|after|since|until) ((?:18|19|20)\d{2})$)");
    static const std::regex decade_long(R"(^((?:18|19|20)\d)0s$)");
    static const std::regex decade_short(R"(^(\d)0s$)");
    static const std::regex exact(R"(^((?:18|19|20)\d{2})$)");

    std::string s = collapse_spaces(to_lower(trim(text)));
    for (std::string_view prefix : {"released ", "from ", "in ", "the "}) {
        if (s.rfind(prefix, 0) == 0) s = s.substr(prefix.size());
    }
    if (s.rfind("the ", 0) == 0) s = s.substr(4);
    if (!s.empty() && s.front() == '\'') s = s.substr(1);

    std::smatch m;
    if (std::regex_match(s, m, between)) {
        int a = std::stoi(m[1]);
        int b = std::stoi(m[2]);
        if (a > b) std::swap(a, b);
        return std::to_string(a) + ".." + std::to_string(b);
    }
    if (std::regex_match(s, m, bounded)) {
        const int y = std::stoi(m[2]);
        const std::string op = m[1];
        if (op == "before") return ".." + std::to_string(y - 1);
        if (op == "until") return ".." + std::to_string(y);
        if (op == "after") return std::to_string(y + 1) + "..";
        return std::to_string(y) + "..";
    }
    if (std::regex_match(s, m, decade_long)) return m[1].str() + "0s";
    if (std::regex_match(s, m, decade_short)) {
        const int d = std::stoi(m[1]);
        return std::string(d >= 3 ? "19" : "20") + m[1].str() + "0s";
    }
    if (std::regex_match(s, m, exact)) return m[1].str();
    return std::nullopt;
}

std::optional<std::string> canonicalize(EntityType type, std::string_view value, const Lexicons& lexicons) {
    if (type == EntityType::ReleaseYear) return normalize_year_expression(value);
    if (const auto* lex = lexicons.get(type)) {
        if (auto id = lex->lookup(value)) return id;
        // Already-canonical values (e.g. a genre id) pass through.
        const std::string v = to_lower(trim(value));
        for (const auto& [_, id] : lex->entries()) {
            if (id == v) return id;
        }
        return std::nullopt;
    }
    std::string v = collapse_spaces(to_lower(trim(value)));
    if (v.empty()) return std::nullopt;
    return v;
}

// ---------------------------------------------------------------------------
// Person gazetteer

void PersonGazetteer::add(std::string_view full_name) {
    const auto key = person_key(full_name);
    if (key.empty()) return;
    const std::string canonical = collapse_spaces(to_lower(trim(full_name)));
    by_key_.emplace(key, canonical);
    const auto space = key.rfind(' ');
    if (space == std::string::npos) return;
    auto& names = by_surname_key_[key.substr(space + 1)];
    if (std::find(names.begin(), names.end(), canonical) == names.end()) names.push_back(canonical);
}

std::optional<std::string> PersonGazetteer::match_full(std::string_view candidate) const {
    auto it = by_key_.find(person_key(candidate));
    if (it == by_key_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::string> PersonGazetteer::match_surname(std::string_view candidate) const {
    auto it = by_surname_key_.find(metaphone_word(candidate));
    if (it == by_surname_key_.end() || it->second.size() != 1) return std::nullopt;
    return it->second.front();
}

// ---------------------------------------------------------------------------
// Built-in provider

namespace {

struct Token {
    std::string text;  // lowercase
    std::size_t start;
    std::size_t end;   // inclusive
    bool capitalized;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (!std::isalnum(c)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size()) {
            const auto cj = static_cast<unsigned char>(text[j]);
            if (std::isalnum(cj) || ((cj == '\'' || cj == '-') && j + 1 < text.size() &&
                                     std::isalnum(static_cast<unsigned char>(text[j + 1])))) {
                ++j;
            } else {
                break;
            }
        }
        tokens.push_back({to_lower(text.substr(i, j - i)), i, j - 1, std::isupper(c) != 0});
        i = j;
    }
    return tokens;
}

const std::set<std::string>& cues_for(EntityType t) {
    static const std::array<std::set<std::string>, kNumEntityTypes> cues{
        std::set<std::string>{"for", "rated", "suitable", "appropriate", "audience", "watch"},
        std::set<std::string>{"movie", "movies", "film", "films", "flick", "flicks", "genre"},
        std::set<std::string>{"about", "featuring", "involving", "with", "on"},
        std::set<std::string>{"from", "made", "movie", "movies", "film", "films", "cinema"},
        std::set<std::string>{"by", "with", "starring", "directed", "director", "actor", "actress", "featuring"},
        std::set<std::string>{"from", "released", "year", "in", "before", "after", "since", "until", "between"},
    };
    return cues[slot_index(t)];
}

// 0.9 with a type cue within three tokens, 0.8 right after a contrast word
// ("anything but X"), 0.5 for one- or two-word inputs, else 0.6.
double context_score(EntityType type, const std::vector<Token>& tokens, CharSpan span, std::size_t word_count,
                     std::size_t window = 3) {
    const auto& cues = cues_for(type);
    std::size_t first = tokens.size();
    std::size_t last = 0;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
        if (tokens[k].start >= span.start && tokens[k].end <= span.end) {
            first = std::min(first, k);
            last = std::max(last, k);
        }
    }
    if (first != tokens.size()) {
        const std::size_t lo = first >= window ? first - window : 0;
        const std::size_t hi = std::min(tokens.size() - 1, last + window);
        for (std::size_t k = lo; k <= hi; ++k) {
            if (k >= first && k <= last && type != EntityType::ReleaseYear) continue;
            if (cues.count(tokens[k].text)) return 0.9;
        }
        static const std::set<std::string> contrast{"but", "except", "than", "not"};
        if (first > 0 && contrast.count(tokens[first - 1].text)) return 0.8;
    }
    return word_count <= 2 ? 0.5 : 0.6;
}

bool overlaps(const std::vector<bool>& used, CharSpan span) {
    for (std::size_t k = span.start; k <= span.end && k < used.size(); ++k) {
        if (used[k]) return true;
    }
    return false;
}

void mark(std::vector<bool>& used, CharSpan span) {
    for (std::size_t k = span.start; k <= span.end && k < used.size(); ++k) used[k] = true;
}

struct IntentPattern {
    std::string_view phrase;
    double score;
};

constexpr std::array<IntentPattern, 20> kRefusals{{
    {"doesn't matter", 0.95}, {"does not matter", 0.95}, {"doesnt matter", 0.95}, {"don't care", 0.95},
    {"do not care", 0.95},    {"no preference", 0.95},   {"any is fine", 0.95},  {"anything is fine", 0.95},
    {"whatever", 0.9},        {"i don't mind", 0.9},     {"not important", 0.9}, {"no idea", 0.85},
    {"skip", 0.85},           {"pass", 0.8},             {"that's all", 0.85},   {"thats all", 0.85},
    {"that is all", 0.85},    {"show me", 0.8},          {"nothing else", 0.85}, {"just show", 0.85},
}};

constexpr std::array<std::string_view, 11> kRequestVerbs{
    "want", "give me", "find", "looking for", "recommend", "would like", "i'd like", "search", "watch", "like",
    "need",
};

constexpr std::array<std::string_view, 8> kGreetings{"hey", "hi", "hello", "good morning", "good evening",
                                                    "yo", "greetings", "howdy"};

bool contains_phrase(std::string_view lower, std::string_view phrase) {
    std::size_t pos = 0;
    while ((pos = lower.find(phrase, pos)) != std::string_view::npos) {
        if (is_word_boundary(lower, pos, pos + phrase.size())) return true;
        ++pos;
    }
    return false;
}

}  // namespace

BuiltinProvider::BuiltinProvider(Lexicons lexicons, PersonGazetteer people)
    : lexicons_(std::move(lexicons)), people_(std::move(people)) {}

ParsedUtterance BuiltinProvider::parse(std::string_view text) const {
    static const std::regex year_expr(
        R"(\b(between (?:18|19|20)\d{2} and (?:18|19|20)\d{2}|(?:before|after|since|until|from|in) (?:the )?(?:(?:18|19|20)\d0s|\d0s|(?:18|19|20)\d{2})|(?:the )?(?:(?:18|19|20)\d0s|\d0s)|(?:18|19|20)\d{2})\b)");

    ParsedUtterance out;
    const std::string lower = to_lower(text);
    const auto tokens = tokenize(text);
    const std::size_t words = count_words(text);
    std::vector<bool> used(lower.size(), false);

    // Release years.
    for (auto it = std::sregex_iterator(lower.begin(), lower.end(), year_expr); it != std::sregex_iterator(); ++it) {
        const auto start = static_cast<std::size_t>(it->position(1));
        const CharSpan span{start, start + static_cast<std::size_t>(it->length(1)) - 1};
        if (overlaps(used, span)) continue;
        mark(used, span);
        out.mentions.push_back({EntityType::ReleaseYear, it->str(1),
                                context_score(EntityType::ReleaseYear, tokens, span, words), span});
    }

    // Lexicon phrases across all types, longest first.
    struct Candidate {
        EntityType type;
        LexiconHit hit;
    };
    std::vector<Candidate> candidates;
    for (auto t : kAllEntityTypes) {
        if (const auto* lex = lexicons_.get(t)) {
            for (auto& hit : lex->find_all(text)) candidates.push_back({t, std::move(hit)});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        const auto la = a.hit.span.end - a.hit.span.start;
        const auto lb = b.hit.span.end - b.hit.span.start;
        if (la != lb) return la > lb;
        return a.hit.span.start < b.hit.span.start;
    });
    for (auto& c : candidates) {
        if (overlaps(used, c.hit.span)) continue;
        mark(used, c.hit.span);
        out.mentions.push_back({c.type, c.hit.phrase, context_score(c.type, tokens, c.hit.span, words), c.hit.span});
    }

    // People: 3- and 2-token windows against full-name keys, then unique surnames.
    auto free_token = [&](std::size_t k) { return !overlaps(used, {tokens[k].start, tokens[k].end}); };
    auto contiguous = [&](std::size_t a, std::size_t b) {
        for (std::size_t k = a; k < b; ++k) {
            const auto gap = text.substr(tokens[k].end + 1, tokens[k + 1].start - tokens[k].end - 1);
            if (gap.find_first_not_of(' ') != std::string_view::npos) return false;
        }
        return true;
    };
    auto person_score = [&](CharSpan span) {
        return context_score(EntityType::Person, tokens, span, words, 2) > 0.8 ? 0.8
                                                                               : (words <= 2 ? 0.5 : 0.6);
    };
    for (std::size_t width : {3u, 2u}) {
        if (tokens.size() < width) continue;
        for (std::size_t k = 0; k + width <= tokens.size(); ++k) {
            bool ok = contiguous(k, k + width - 1);
            for (std::size_t w = 0; w < width && ok; ++w) ok = free_token(k + w) && std::isalpha(
                static_cast<unsigned char>(tokens[k + w].text.front()));
            if (!ok) continue;
            const CharSpan span{tokens[k].start, tokens[k + width - 1].end};
            const auto surface = text.substr(span.start, span.end - span.start + 1);
            if (auto name = people_.match_full(surface)) {
                mark(used, span);
                out.mentions.push_back({EntityType::Person, *name, person_score(span), span});
            }
        }
    }
    static const std::set<std::string> stop{"the", "and", "with", "movie", "film", "something", "anything",
                                            "please", "maybe", "about", "from", "want", "like", "would"};
    for (std::size_t k = 0; k < tokens.size(); ++k) {
        const auto& tok = tokens[k];
        if (!free_token(k) || tok.text.size() < 4 || stop.count(tok.text)) continue;
        const bool cued = k > 0 && cues_for(EntityType::Person).count(tokens[k - 1].text);
        const bool capitalized = tok.capitalized && (k > 0 || tokens.size() == 1);
        if (!capitalized && !cued) continue;
        if (auto name = people_.match_surname(tok.text)) {
            const CharSpan span{tok.start, tok.end};
            mark(used, span);
            out.mentions.push_back({EntityType::Person, *name, person_score(span), span});
        }
    }
    // Unknown capitalized names right after a person cue.
    for (std::size_t k = 1; k + 1 < tokens.size(); ++k) {
        if (!cues_for(EntityType::Person).count(tokens[k - 1].text)) continue;
        if (!tokens[k].capitalized || !tokens[k + 1].capitalized) continue;
        if (!free_token(k) || !free_token(k + 1) || !contiguous(k, k + 1)) continue;
        const CharSpan span{tokens[k].start, tokens[k + 1].end};
        mark(used, span);
        out.mentions.push_back({EntityType::Person, tokens[k].text + " " + tokens[k + 1].text, 0.6, span});
    }

    std::sort(out.mentions.begin(), out.mentions.end(),
              [](const auto& a, const auto& b) { return a.span.start < b.span.start; });

    // Intent.
    const std::string bare = collapse_spaces(strip_punctuation(lower));
    if (!out.mentions.empty()) {
        out.intent = Intent::Specify;
        out.intent_score = 0.9;
        return out;
    }
    double refuse = 0.0;
    for (const auto& p : kRefusals) {
        if (contains_phrase(lower, p.phrase)) refuse = std::max(refuse, p.score);
    }
    if (bare == "no" || bare == "nope" || bare == "nah" || bare == "no thanks" || bare == "none") {
        refuse = std::max(refuse, 0.8);
    }
    if (refuse > 0.0) {
        out.intent = Intent::Refuse;
        out.intent_score = refuse;
        return out;
    }
    for (auto verb : kRequestVerbs) {
        if (contains_phrase(lower, verb)) {
            out.intent = Intent::Specify;
            out.intent_score = 0.6;
            return out;
        }
    }
    out.intent = Intent::None;
    out.intent_score = 0.5;
    for (auto g : kGreetings) {
        if (contains_phrase(lower, g)) out.intent_score = 0.9;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Normalization and post-processing

ParsedUtterance parse(std::string_view input, const UnderstandingProvider& provider) {
    ParsedUtterance parsed = provider.parse(input);
    parsed.intent_score = std::clamp(parsed.intent_score, 0.0, 1.0);
    std::vector<EntityMention> kept;
    for (auto& m : parsed.mentions) {
        if (m.span.start > m.span.end || m.span.end >= input.size()) continue;
        m.raw_score = std::clamp(m.raw_score, 0.0, 1.0);
        kept.push_back(std::move(m));
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.span.start != b.span.start) return a.span.start < b.span.start;
        return a.raw_score > b.raw_score;
    });
    parsed.mentions.clear();
    for (auto& m : kept) {
        if (!parsed.mentions.empty() && m.span.start <= parsed.mentions.back().span.end) continue;
        parsed.mentions.push_back(std::move(m));
    }
    return parsed;
}

std::vector<AcceptedValue> apply_asked_type_bias(const ParsedUtterance& parsed, std::optional<EntityType> asked,
                                                 double bias, double threshold,
                                                 const std::array<double, kNumEntityTypes>& type_bias) {
    std::vector<AcceptedValue> out;
    for (const auto& m : parsed.mentions) {
        const double magnitude =
            std::abs(m.raw_score) + (asked && *asked == m.type ? bias : 0.0) + type_bias[slot_index(m.type)];
        if (magnitude + kScoreTolerance < threshold || magnitude <= 0.0) continue;
        const double sign = m.raw_score < 0.0 ? -1.0 : 1.0;
        out.push_back({m.type, ScoredValue::make(m.value, sign * magnitude)});
    }
    return out;
}

std::size_t count_words(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string w;
    std::size_t n = 0;
    while (in >> w) ++n;
    return n;
}

double word_count_score(std::size_t word_count) {
    if (word_count == 0) return 1.0;
    return std::max(0.4, 1.0 - 0.3 * static_cast<double>(word_count - 1));
}

std::vector<ScoredValue> word_search(std::string_view input, EntityType asked, const Lexicons& lexicons) {
    const auto* lex = lexicons.get(asked);
    if (!lex) return {};
    const double score = word_count_score(count_words(input));
    std::vector<ScoredValue> out;
    for (const auto& hit : lex->find_all(input)) out.push_back(ScoredValue::make(hit.value, score));
    return out;
}

std::vector<std::string> NegationRules::found_in(std::string_view window) const {
    const std::string lower = to_lower(window);
    std::vector<std::string> found;
    for (const auto& expr : expressions) {
        if (expr.empty()) continue;
        // "n't" attaches to the preceding word.
        const bool alpha_start = std::isalpha(static_cast<unsigned char>(expr.front())) != 0 &&
                                 expr.find('\'') == std::string::npos;
        const bool alpha_end = std::isalpha(static_cast<unsigned char>(expr.back())) != 0;
        std::size_t pos = 0;
        while ((pos = lower.find(expr, pos)) != std::string::npos) {
            const std::size_t end = pos + expr.size();
            const bool left_ok = !alpha_start || pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]));
            const bool right_ok = !alpha_end || end >= lower.size() ||
                                  !std::isalnum(static_cast<unsigned char>(lower[end]));
            if (left_ok && right_ok) {
                found.push_back(expr);
                break;
            }
            ++pos;
        }
    }
    return found;
}

std::vector<EntityMention> apply_negation(std::string_view input, std::vector<EntityMention> mentions,
                                          const NegationRules& rules) {
    bool previous_negated = false;
    for (std::size_t i = 0; i < mentions.size(); ++i) {
        auto& m = mentions[i];
        const std::size_t from = i > 0 ? mentions[i - 1].span.end + 1 : 0;
        const std::size_t to = std::min(m.span.start, input.size());
        const auto window = from < to ? input.substr(from, to - from) : std::string_view{};
        const auto found = rules.found_in(window);
        bool negated = !found.empty();
        if (negated && rules.contrastive_but && previous_negated && found.size() == 1 && found.front() == "but") {
            negated = false;
        }
        m.raw_score = negated ? -std::abs(m.raw_score) : std::abs(m.raw_score);
        previous_negated = negated;
    }
    return mentions;
}

Understanding interpret(std::string_view input, std::optional<EntityType> asked,
                        const UnderstandingProvider& provider, const Lexicons& lexicons, const NluConfig& config) {
    Understanding out;
    ParsedUtterance parsed;
    try {
        parsed = parse(input, provider);
    } catch (const ProviderError& e) {
        out.provider_failed = true;
        out.provider_error = e.what();
    }

    if (!out.provider_failed) {
        parsed.mentions = apply_negation(input, std::move(parsed.mentions), config.negation);
        for (auto& accepted :
             apply_asked_type_bias(parsed, asked, config.asked_bias, config.threshold, config.type_bias)) {
            auto canonical = canonicalize(accepted.type, accepted.value.value, lexicons);
            if (!canonical) continue;
            accepted.value.value = std::move(*canonical);
            out.extracted.push_back(std::move(accepted));
        }
        out.intent = parsed.intent_score + kScoreTolerance >= config.threshold ? parsed.intent : Intent::None;
    }

    if (out.extracted.empty() && asked) {
        if (const auto* lex = lexicons.get(*asked)) {
            const double base = word_count_score(count_words(input)) + config.type_bias[slot_index(*asked)];
            std::vector<EntityMention> hits;
            for (const auto& h : lex->find_all(input)) hits.push_back({*asked, h.value, 1.0, h.span});
            hits = apply_negation(input, std::move(hits), config.negation);
            if (base + kScoreTolerance >= config.threshold) {
                for (const auto& h : hits) {
                    out.extracted.push_back({*asked, ScoredValue::make(h.value, h.raw_score < 0 ? -base : base)});
                }
            }
            if (!out.extracted.empty()) {
                out.used_word_search = true;
                out.intent = Intent::Specify;
            }
        }
    }

    if (out.intent == Intent::Refuse && asked) {
        out.refused_asked = std::none_of(out.extracted.begin(), out.extracted.end(),
                                         [&](const AcceptedValue& v) { return v.type == *asked; });
    }
    return out;
}

void apply_understanding(ConversationState& state, const Understanding& understanding) {
    std::vector<std::pair<EntityType, bool>> batch;
    for (const auto& v : understanding.extracted) {
        state.slot(v.type).values[v.value.value] = v.value.score;
        if (std::none_of(batch.begin(), batch.end(), [&](const auto& b) { return b.first == v.type; })) {
            batch.emplace_back(v.type, false);
        }
    }
    if (understanding.refused_asked && state.last_question &&
        std::none_of(batch.begin(), batch.end(), [&](const auto& b) { return b.first == *state.last_question; }) &&
        !state.slot(*state.last_question).has_values()) {
        batch.emplace_back(*state.last_question, true);
    }
    if (!batch.empty()) state.assume(batch);
}

Understanding understand(std::string_view input, ConversationState& state, const UnderstandingProvider& provider,
                         const Lexicons& lexicons, const NluConfig& config) {
    auto result = interpret(input, state.last_question, provider, lexicons, config);
    if (result.provider_failed && result.extracted.empty()) throw ProviderError(result.provider_error);
    apply_understanding(state, result);
    return result;
}

}  // namespace slotforge
