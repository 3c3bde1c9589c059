#include <catch_amalgamated.hpp>

#include <random>

#include "accforge/text.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace accforge;

TEST_CASE("caption normalization", "[text]") {
    SECTION("lowercases and strips terminal punctuation") {
        const auto seq = normalize_caption("A man speaks.");
        CHECK(seq.tokens == std::vector<std::string>{"a", "man", "speaks"});
    }
    SECTION("strips the full punctuation set") {
        const auto seq = normalize_caption("Hello, (world)! \"Quote\"; col:on?");
        CHECK(seq.tokens == std::vector<std::string>{"hello", "world", "quote", "colon"});
    }
    SECTION("keeps apostrophes and hyphens inside tokens") {
        const auto seq = normalize_caption("Don't stop in the well-lit room");
        CHECK(seq.tokens[0] == "don't");
        CHECK(seq.tokens[4] == "well-lit");
    }
    SECTION("pure punctuation tokens vanish") {
        const auto seq = normalize_caption("wind - , blows");
        CHECK(seq.tokens == std::vector<std::string>{"wind", "-", "blows"});
        const auto gone = normalize_caption(". , !");
        CHECK(gone.empty());
    }
    SECTION("spans recover the original-cased text") {
        const std::string text = "  A Dog  Barks!  ";
        const auto seq = normalize_caption(text);
        REQUIRE(seq.tokens == std::vector<std::string>{"a", "dog", "barks"});
        const auto [begin, _] = seq.spans.front();
        const auto [__, end] = seq.spans.back();
        CHECK(text.substr(begin, end - begin) == "A Dog  Barks");
    }
    SECTION("mixed whitespace splits") {
        const auto seq = normalize_caption("a\tb\nc\r d");
        CHECK(seq.tokens == std::vector<std::string>{"a", "b", "c", "d"});
    }
}

TEST_CASE("longest common word substring", "[text]") {
    auto run_of = [](const char* a, const char* b) {
        return longest_common_word_substring(normalize_caption(a), normalize_caption(b));
    };

    SECTION("finds the shared run") {
        const auto run = run_of("the dog barks at the moon", "a cat and the dog barks loudly");
        CHECK(run.length == 3);
        CHECK(run.start_a == 0);
        CHECK(run.start_b == 3);
    }
    SECTION("no overlap yields length zero") {
        CHECK(run_of("alpha beta", "gamma delta").length == 0);
    }
    SECTION("ties break toward the earliest start in a, then b") {
        // Two runs of length 2: (a b) at (0, 0) and (x y) at (2, 3).
        const auto run = run_of("a b x y", "a b q x y");
        CHECK(run.length == 2);
        CHECK(run.start_a == 0);
        CHECK(run.start_b == 0);
    }
    SECTION("full containment") {
        const auto run = run_of("rain falls", "heavy rain falls outside");
        CHECK(run.length == 2);
        CHECK(run.start_a == 0);
        CHECK(run.start_b == 1);
    }
}

TEST_CASE("substring search agrees with the brute-force oracle", "[text]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const std::string a = fx::random_caption(rng, 12);
        const std::string b = fx::random_caption(rng, 12);
        const TokenSeq sa = normalize_caption(a);
        const TokenSeq sb = normalize_caption(b);

        const CommonRun fast = longest_common_word_substring(sa, sb);
        const CommonRun slow = oracle::lcs_substring(sa.tokens, sb.tokens);

        REQUIRE(fast.length == slow.length);
        if (fast.length > 0) {
            REQUIRE(fast.start_a == slow.start_a);
            REQUIRE(fast.start_b == slow.start_b);
        }
    }
}

TEST_CASE("longest common subsequence length", "[text]") {
    auto lcs = [](const char* a, const char* b) {
        return longest_common_subsequence_length(normalize_caption(a).tokens,
                                                 normalize_caption(b).tokens);
    };
    CHECK(lcs("a b c d e", "a c e") == 3);
    CHECK(lcs("a b c", "c b a") == 1);
    CHECK(lcs("x y z", "x y z") == 3);
    CHECK(lcs("", "a b") == 0);

    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = normalize_caption(fx::random_caption(rng, 10)).tokens;
        const auto b = normalize_caption(fx::random_caption(rng, 10)).tokens;
        REQUIRE(longest_common_subsequence_length(a, b) == oracle::lcs_length(a, b));
    }
}
