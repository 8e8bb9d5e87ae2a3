#include "doctest.h"
#include "stub_providers.hpp"
#include "support.hpp"

#include "slotforge/nlu.hpp"

using namespace slotforge;
using testing::builtin;
using testing::fixture;
using testing::mention;

namespace {

std::set<std::string> values_of(const std::vector<EntityMention>& ms, EntityType t, const Lexicons& lex) {
    std::set<std::string> out;
    for (const auto& m : ms) {
        if (m.type == t) out.insert(canonicalize(t, m.value, lex).value_or("?"));
    }
    return out;
}

std::set<EntityType> types_of(const std::vector<EntityMention>& ms) {
    std::set<EntityType> out;
    for (const auto& m : ms) out.insert(m.type);
    return out;
}

bool passes_gate(const EntityMention& m, std::optional<EntityType> asked) {
    return m.raw_score + (asked == m.type ? 0.2 : 0.0) >= 0.7 - 1e-9;
}

}  // namespace

TEST_CASE("lexicon matching") {
    Lexicon lex({{"science fiction", "9"}, {"science", "16"}, {"comedy", "1"}, {"funny", "1"}});
    const auto hits = lex.find_all("A Science Fiction comedy, not funnybones");
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].value == "9");
    CHECK(hits[0].span == CharSpan{2, 16});
    CHECK(hits[1].value == "1");
    CHECK(lex.lookup("COMEDY") == "1");
    CHECK_FALSE(lex.lookup("drama").has_value());
    const auto j = Lexicon::from_json_text(R"({"comedy": 1, "Horror": "3"})");
    CHECK(j.lookup("horror") == "3");
    CHECK_THROWS(Lexicon::from_json_text("[1,2]"));
}

TEST_CASE("fixture lexicons") {
    const auto& lex = fixture().lexicons;
    for (auto t : kAllEntityTypes) CHECK((lex.get(t) != nullptr) == (t != EntityType::Person && t != EntityType::ReleaseYear));
    CHECK(canonicalize(EntityType::Genre, "comedy", lex) == "1");
    CHECK(canonicalize(EntityType::Genre, "1", lex) == "1");
    CHECK(canonicalize(EntityType::Genre, "horror", lex) == "3");
    CHECK(canonicalize(EntityType::CountryOrContinent, "French", lex) == "france");
    CHECK(canonicalize(EntityType::Person, "Natalie Portman", lex) == "natalie portman");
    CHECK(canonicalize(EntityType::ReleaseYear, "the 90s", lex) == "1990s");
}

TEST_CASE("year expressions") {
    CHECK(normalize_year_expression("1994") == "1994");
    CHECK(normalize_year_expression("the 90s") == "1990s");
    CHECK(normalize_year_expression("the 1980s") == "1980s");
    CHECK(normalize_year_expression("00s") == "2000s");
    CHECK(normalize_year_expression("before 2000") == "..1999");
    CHECK(normalize_year_expression("after 1990") == "1991..");
    CHECK(normalize_year_expression("since 2010") == "2010..");
    CHECK(normalize_year_expression("until 1980") == "..1980");
    CHECK(normalize_year_expression("between 1990 and 2000") == "1990..2000");
    CHECK(normalize_year_expression("released in 1975") == "1975");
    CHECK_FALSE(normalize_year_expression("soon").has_value());
}

TEST_CASE("person gazetteer tolerates misspellings") {
    PersonGazetteer g;
    g.add("Natalie Portman");
    g.add("Steven Spielberg");
    g.add("Sofia Portman");
    CHECK(g.match_full("Nataly Portman") == "natalie portman");
    CHECK(g.match_full("steven spilberg") == "steven spielberg");
    CHECK(g.match_surname("Spillberg") == "steven spielberg");
    CHECK_FALSE(g.match_surname("Portman").has_value());  // ambiguous
    CHECK_FALSE(g.match_full("Tom Hanks").has_value());
}

TEST_CASE("fixture utterances through the builtin provider") {
    const auto& lex = fixture().lexicons;
    SUBCASE("greeting") {
        const auto p = parse("Hey", builtin());
        CHECK(p.intent == Intent::None);
        CHECK(p.mentions.empty());
    }
    SUBCASE("refusal") {
        const auto p = parse("No, it doesn't matter", builtin());
        CHECK(p.intent == Intent::Refuse);
        CHECK(p.intent_score >= 0.7);
        CHECK(p.mentions.empty());
    }
    SUBCASE("single genre") {
        const auto p = parse("I want a comedy movie", builtin());
        CHECK(p.intent == Intent::Specify);
        CHECK(types_of(p.mentions) == std::set<EntityType>{EntityType::Genre});
        CHECK(values_of(p.mentions, EntityType::Genre, lex) == std::set<std::string>{"1"});
        for (const auto& m : p.mentions) CHECK(passes_gate(m, std::nullopt));
    }
    SUBCASE("genres and a director") {
        const std::string text = "Give me a comedy or action movie by Steven Spielberg";
        const auto p = parse(text, builtin());
        CHECK(p.intent == Intent::Specify);
        CHECK(types_of(p.mentions) == std::set<EntityType>{EntityType::Genre, EntityType::Person});
        CHECK(values_of(p.mentions, EntityType::Genre, lex) == std::set<std::string>{"1", "2"});
        CHECK(values_of(p.mentions, EntityType::Person, lex) == std::set<std::string>{"steven spielberg"});
        for (const auto& m : p.mentions) {
            CHECK(passes_gate(m, std::nullopt));
            CHECK(m.span.end < text.size());
        }
    }
}

TEST_CASE("builtin provider intents") {
    for (const char* s : {"skip", "I don't care", "no preference", "any is fine", "no", "Skip this one", "Whatever"}) {
        CAPTURE(s);
        CHECK(parse(s, builtin()).intent == Intent::Refuse);
    }
    CHECK(parse("show me what you have", builtin()).intent == Intent::Refuse);
    CHECK(parse("I want to watch something", builtin()).intent == Intent::Specify);
    CHECK(parse("Hello there", builtin()).intent == Intent::None);
    const auto p = parse("Something with Nataly Portman", builtin());
    REQUIRE(p.mentions.size() == 1);
    CHECK(p.mentions[0].type == EntityType::Person);
    CHECK(p.mentions[0].value == "natalie portman");
    const auto y = parse("a scary film from the 90s", builtin());
    CHECK(types_of(y.mentions) == std::set<EntityType>{EntityType::Genre, EntityType::ReleaseYear});
}

TEST_CASE("parse normalizes provider output") {
    testing::FixedProvider fp;
    fp.out.intent = Intent::Specify;
    fp.out.intent_score = 3.0;
    fp.out.mentions = {mention(EntityType::Person, "b", 0.9, 6, 9), mention(EntityType::Genre, "a", 1.7, 0, 4),
                       mention(EntityType::Genre, "c", 0.9, 3, 5), mention(EntityType::Keyword, "d", 0.9, 8, 40)};
    const auto p = parse("comedy Bob x", fp);
    CHECK(p.intent_score == 1.0);
    REQUIRE(p.mentions.size() == 2);
    CHECK(p.mentions[0].value == "a");
    CHECK(p.mentions[0].raw_score == 1.0);
    CHECK(p.mentions[1].value == "b");
}

TEST_CASE("asked-type bias gate boundaries") {
    auto gate = [](EntityType t, double raw, std::optional<EntityType> asked) {
        ParsedUtterance p;
        p.mentions = {mention(t, "x", raw, 0, 0)};
        return apply_asked_type_bias(p, asked);
    };
    const auto a = gate(EntityType::Genre, 0.5, EntityType::Genre);
    REQUIRE(a.size() == 1);
    CHECK(a[0].value.score == doctest::Approx(0.7));
    CHECK(gate(EntityType::Genre, 0.49, EntityType::Genre).empty());
    CHECK(gate(EntityType::Person, 0.69, EntityType::Genre).empty());
    CHECK(gate(EntityType::Genre, 0.69, std::nullopt).empty());
    const auto b = gate(EntityType::Genre, 0.7, std::nullopt);
    REQUIRE(b.size() == 1);
    CHECK(b[0].value.score == doctest::Approx(0.7));
    CHECK(gate(EntityType::Person, 0.70, EntityType::Genre).size() == 1);
    // Negated mentions are gated on magnitude and keep their sign.
    const auto n = gate(EntityType::Genre, -0.5, EntityType::Genre);
    REQUIRE(n.size() == 1);
    CHECK(n[0].value.score == doctest::Approx(-0.7));
}

TEST_CASE("gate monotonicity") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    for (int n = 0; n < 500; ++n) {
        ParsedUtterance p;
        p.mentions = {mention(entity_type_at(rng() % 6), "x", u(rng), 0, 0)};
        const auto asked = entity_type_at(rng() % 6);
        const double t1 = u(rng);
        const double t2 = t1 + u(rng) * (1 - t1);
        CHECK(apply_asked_type_bias(p, asked, 0.2, t2).size() <= apply_asked_type_bias(p, asked, 0.2, t1).size());
        CHECK(apply_asked_type_bias(p, asked, 0.0, t1).size() <= apply_asked_type_bias(p, asked, 0.2, t1).size());
    }
}

TEST_CASE("word search") {
    const auto& lex = fixture().lexicons;
    CHECK(word_search("comedy", EntityType::Genre, lex) == std::vector<ScoredValue>{{"1", 1.0}});
    const auto two = word_search("something funny", EntityType::Genre, lex);
    REQUIRE(two.size() == 1);
    CHECK(two[0].value == "1");
    CHECK(two[0].score == doctest::Approx(0.7));
    const auto four = word_search("maybe a horror film", EntityType::Genre, lex);
    REQUIRE(four.size() == 1);
    CHECK(four[0].value == "3");
    CHECK(four[0].score == doctest::Approx(0.4));
    CHECK(word_search("Portman", EntityType::Person, lex).empty());
    double prev = 1.0;
    for (std::size_t n = 1; n < 12; ++n) {
        const double s = word_count_score(n);
        CHECK(s >= 0.4);
        CHECK(s <= 1.0);
        CHECK(s <= prev);
        prev = s;
    }
    CHECK(count_words("  a  b c ") == 3);
}

TEST_CASE("negation windows") {
    SUBCASE("anything but horror") {
        const auto p = parse("anything but horror", builtin());
        const auto n = apply_negation("anything but horror", p.mentions);
        REQUIRE(n.size() == 1);
        CHECK(n[0].raw_score < 0);
    }
    SUBCASE("comedy or action") {
        const auto p = parse("comedy or action", builtin());
        const auto n = apply_negation("comedy or action", p.mentions);
        REQUIRE(n.size() == 2);
        CHECK(n[0].raw_score > 0);
        CHECK(n[1].raw_score > 0);
    }
    SUBCASE("not French but by Spielberg") {
        const std::string text = "not French but by Spielberg";
        const std::vector<EntityMention> ms{mention(EntityType::CountryOrContinent, "French", 0.9, 4, 9),
                                            mention(EntityType::Person, "Spielberg", 0.9, 18, 26)};
        const auto n = apply_negation(text, ms);
        CHECK(n[0].raw_score < 0);
        CHECK(n[1].raw_score > 0);
        NegationRules plain;
        plain.contrastive_but = false;
        CHECK(apply_negation(text, ms, plain)[1].raw_score < 0);
    }
    SUBCASE("only signs change") {
        std::mt19937_64 rng(6);
        const std::vector<std::string> words{"not", "comedy", "but", "horror", "except", "french", "or", "no", "kids", "don't"};
        for (int k = 0; k < 200; ++k) {
            std::string text;
            for (int w = 0; w < 6; ++w) text += words[rng() % words.size()] + " ";
            const auto p = parse(text, builtin());
            const auto n = apply_negation(text, p.mentions);
            REQUIRE(n.size() == p.mentions.size());
            for (std::size_t m = 0; m < n.size(); ++m) {
                CHECK(std::abs(n[m].raw_score) == std::abs(p.mentions[m].raw_score));
                CHECK(n[m].span == p.mentions[m].span);
                CHECK(n[m].value == p.mentions[m].value);
            }
        }
    }
    CHECK(NegationRules{}.found_in("nothing special").empty());
    CHECK(NegationRules{}.found_in("I don't like") == std::vector<std::string>{"n't"});
}

TEST_CASE("understand") {
    const auto& lex = fixture().lexicons;
    SUBCASE("word search fallback when the provider finds nothing") {
        testing::FixedProvider empty;
        ConversationState s;
        s.last_question = EntityType::Genre;
        const auto u = understand("comedy", s, empty, lex);
        CHECK(u.used_word_search);
        CHECK(s.slot(EntityType::Genre).values == std::map<std::string, double>{{"1", 1.0}});
        CHECK(s.assumption(EntityType::Genre) == AssumptionRecord{false, 0});
    }
    SUBCASE("two volunteered types share one order") {
        ConversationState s;
        s.assume({{EntityType::AudienceAge, true}});
        understand("Give me a comedy or action movie by Steven Spielberg", s, builtin(), lex);
        CHECK(s.slot(EntityType::Genre).values.size() == 2);
        CHECK(s.slot(EntityType::Person).values.size() == 1);
        CHECK(s.assumption(EntityType::Genre) == AssumptionRecord{false, 1});
        CHECK(s.assumption(EntityType::Person) == AssumptionRecord{false, 1});
        CHECK(s.assumed_count() == 3);
    }
    SUBCASE("refusing the pending question") {
        ConversationState s;
        s.last_question = EntityType::Person;
        const auto u = understand("skip that", s, builtin(), lex);
        CHECK(u.refused_asked);
        CHECK(s.assumption(EntityType::Person) == AssumptionRecord{true, 0});
        CHECK(s.slot(EntityType::Person).values.empty());
        CHECK(s.assumed_count() == 1);
    }
    SUBCASE("latest score wins") {
        testing::FixedProvider fp;
        fp.out.intent = Intent::Specify;
        ConversationState s;
        fp.out.mentions = {mention(EntityType::Genre, "comedy", 0.8, 0, 5)};
        understand("comedy", s, fp, lex);
        fp.out.mentions = {mention(EntityType::Genre, "comedy", 0.95, 0, 5)};
        understand("comedy", s, fp, lex);
        CHECK(s.slot(EntityType::Genre).values.at("1") == doctest::Approx(0.95));
    }
    SUBCASE("nothing recognised assumes nothing") {
        ConversationState s;
        s.last_question = EntityType::Keyword;
        understand("Hmm, let me think", s, builtin(), lex);
        CHECK(s.assumed_count() == 0);
    }
    SUBCASE("provider failure") {
        testing::FailingProvider bad;
        ConversationState s;
        s.last_question = EntityType::Genre;
        const auto u = understand("comedy", s, bad, lex);
        CHECK(u.provider_failed);
        CHECK(s.slot(EntityType::Genre).values.count("1") == 1);
        ConversationState t;
        t.last_question = EntityType::Person;
        CHECK_THROWS_AS(understand("Portman", t, bad, lex), ProviderError);
        CHECK(t.assumed_count() == 0);
    }
    SUBCASE("negated value reaches the slot with a negative score") {
        ConversationState s;
        understand("anything but horror", s, builtin(), lex);
        REQUIRE(s.slot(EntityType::Genre).values.count("3") == 1);
        CHECK(s.slot(EntityType::Genre).values.at("3") < 0);
    }
}

TEST_CASE("remote provider decoding") {
    const auto p = RemoteProvider::decode(
        R"({"intent":"Specify","score":0.9,"entities":[{"type":"Genre","value":"comedy","score":0.8,"start":2,"end":7}]})",
        20);
    CHECK(p.intent == Intent::Specify);
    REQUIRE(p.mentions.size() == 1);
    CHECK(p.mentions[0].span == CharSpan{2, 7});
    CHECK_THROWS_AS(RemoteProvider::decode("not json", 5), ProviderError);
    CHECK(RemoteProvider::decode(R"({"intent":"Maybe","score":1,"entities":[]})", 5).intent == Intent::None);
    CHECK(RemoteProvider::decode(R"({"intent":"Specify","entities":[{"type":"Colour","value":"x","score":1,"start":0,"end":1}]})", 5).mentions.empty());
    CHECK_THROWS_AS(RemoteProvider::decode(R"({"intent":"Specify","entities":[{"type":"Genre"}]})", 5), ProviderError);
    RemoteProvider unreachable("http://127.0.0.1:1", std::chrono::milliseconds(200));
    CHECK_THROWS_AS(unreachable.parse("hi"), ProviderError);
}
