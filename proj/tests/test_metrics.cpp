#include <catch_amalgamated.hpp>

#include <cmath>

#include "accforge/metrics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace accforge;

namespace {

EvalInstance inst(const char* id, const char* cand, std::vector<std::string> refs) {
    return {id, cand, std::move(refs)};
}

std::vector<EvalInstance> identity_corpus() {
    return {
        inst("a", "a man speaks in a room", {"a man speaks in a room"}),
        inst("b", "rain falls on the roof", {"rain falls on the roof"}),
        inst("c", "the loud bird sings", {"the loud bird sings"}),
    };
}

}  // namespace

TEST_CASE("bleu hand-checked values", "[metrics]") {
    SECTION("brevity penalty on a short candidate") {
        const std::vector<EvalInstance> corpus = {inst("x", "the cat", {"the cat sat"})};
        const auto scores = bleu(corpus);
        // p1 = 2/2, p2 = 1/1, BP = exp(1 - 3/2).
        const double bp = std::exp(1.0 - 3.0 / 2.0);
        CHECK(scores[0] == Catch::Approx(bp).epsilon(1e-12));
        CHECK(scores[1] == Catch::Approx(bp).epsilon(1e-12));
        CHECK(scores[2] == 0.0);  // no trigram support
        CHECK(scores[3] == 0.0);
    }
    SECTION("clipping caps repeated candidate n-grams") {
        const std::vector<EvalInstance> corpus = {
            inst("x", "the the the the", {"the cat sat on the mat"})};
        const auto scores = bleu(corpus);
        // "the" appears twice in the reference: p1 = 2/4; c=4 < r=6.
        const double bp = std::exp(1.0 - 6.0 / 4.0);
        CHECK(scores[0] == Catch::Approx(bp * 0.5).epsilon(1e-12));
        CHECK(scores[1] == 0.0);
    }
    SECTION("closest reference length, ties to the shorter") {
        // c = 4; refs of length 3 and 5 are equally distant -> r = 3 -> BP = 1
        // (a tie to the longer one would give BP = exp(1 - 5/4) < 1).
        const std::vector<EvalInstance> corpus = {
            inst("x", "a b c d", {"a b x", "a b c q e"})};
        const auto scores = bleu(corpus);
        CHECK(scores[0] == Catch::Approx(3.0 / 4.0).epsilon(1e-12));
    }
    SECTION("corpus-level pooling, not instance averaging") {
        const std::vector<EvalInstance> corpus = {
            inst("x", "a b", {"a b"}),      // 2/2 unigrams
            inst("y", "c d e f", {"c x y z"}),  // 1/4 unigrams
        };
        // pooled p1 = 3/6, c = 6, r = 6.
        const auto scores = bleu(corpus);
        CHECK(scores[0] == Catch::Approx(0.5).epsilon(1e-12));
    }
    SECTION("an instance with no references is invalid") {
        try {
            bleu({inst("x", "a", {})});
            FAIL("expected InvalidRecord");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidRecord);
        }
    }
}

TEST_CASE("rouge-l hand-checked values", "[metrics]") {
    SECTION("P = R = 0.75 gives F = 0.75") {
        const std::vector<EvalInstance> corpus = {inst("x", "a b c d", {"a b c e"})};
        CHECK(rouge_l(corpus) == Catch::Approx(0.75).epsilon(1e-12));
    }
    SECTION("asymmetric lengths weight recall via beta") {
        const std::vector<EvalInstance> corpus = {inst("x", "a b", {"a b c d"})};
        // lcs = 2, P = 1, R = 0.5, beta^2 = 1.44.
        const double expected = (1.0 + 1.44) * 0.5 * 1.0 / (0.5 + 1.44 * 1.0);
        CHECK(rouge_l(corpus) == Catch::Approx(expected).epsilon(1e-12));
    }
    SECTION("best reference wins") {
        const std::vector<EvalInstance> corpus = {
            inst("x", "a b c", {"z z z", "a b c"})};
        CHECK(rouge_l(corpus) == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("per-instance values are exposed") {
        std::vector<double> per;
        const std::vector<EvalInstance> corpus = {inst("x", "a b c d", {"a b c e"}),
                                                  inst("y", "q", {"z"})};
        const double mean = rouge_l(corpus, &per);
        REQUIRE(per.size() == 2);
        CHECK(per[0] == Catch::Approx(0.75).epsilon(1e-12));
        CHECK(per[1] == 0.0);
        CHECK(mean == Catch::Approx((0.75 + 0.0) / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("meteor hand-checked values", "[metrics]") {
    SECTION("identity with four tokens") {
        const std::vector<EvalInstance> corpus = {inst("x", "a man dog walks", {"a man dog walks"})};
        // m = 4, one chunk: 1 - 0.5 * (1/4)^3 = 0.9921875.
        CHECK(meteor_lite(corpus) == Catch::Approx(0.9921875).epsilon(1e-12));
    }
    SECTION("full match in two chunks halves the score") {
        const std::vector<EvalInstance> corpus = {inst("x", "man walks", {"walks man"})};
        // m = 2, P = R = 1, chunks = 2: penalty = 0.5.
        CHECK(meteor_lite(corpus) == Catch::Approx(0.5).epsilon(1e-12));
    }
    SECTION("no overlap scores zero") {
        const std::vector<EvalInstance> corpus = {inst("x", "a b", {"c d"})};
        CHECK(meteor_lite(corpus) == 0.0);
    }
    SECTION("duplicated tokens use the alignment with fewest chunks") {
        // "a b a" vs "a a b": best maximum matching keeps "a b" adjacent.
        const std::vector<EvalInstance> corpus = {inst("x", "a b a", {"a a b"})};
        // m = 3; chunks = 2 (a..ab or ab..a); P = R = 1.
        const double expected = 1.0 * (1.0 - 0.5 * std::pow(2.0 / 3.0, 3));
        CHECK(meteor_lite(corpus) == Catch::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("cider-d on a controlled corpus", "[metrics]") {
    SECTION("two disjoint identity instances score exactly 10") {
        // Four tokens each so every n in 1..4 has support.
        const std::vector<EvalInstance> corpus = {
            inst("x", "a man walks home", {"a man walks home"}),
            inst("y", "rain falls loud today", {"rain falls loud today"}),
        };
        std::vector<double> per;
        const double mean = cider_d(corpus, &per);
        REQUIRE(per.size() == 2);
        // Disjoint vocab: df = 1 for every gram, idf = log(2) > 0, candidate
        // equals the only reference, delta = 0 -> cosine 1 for all n -> 10.
        CHECK(per[0] == Catch::Approx(10.0).epsilon(1e-12));
        CHECK(per[1] == Catch::Approx(10.0).epsilon(1e-12));
        CHECK(mean == Catch::Approx(10.0).epsilon(1e-12));
    }
    SECTION("ubiquitous grams carry no weight") {
        // Both instances share the same single-token reference text, so its
        // idf is log(2) - log(2) = 0 and the score collapses to zero.
        const std::vector<EvalInstance> corpus = {
            inst("x", "rain", {"rain"}),
            inst("y", "rain", {"rain"}),
        };
        CHECK(cider_d(corpus) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("length mismatch is penalized by the gaussian") {
        const std::vector<EvalInstance> corpus = {
            inst("x", "a man walks home now quickly today", {"a man walks"}),
            inst("y", "rain falls", {"rain falls"}),
        };
        std::vector<double> per;
        cider_d(corpus, &per);
        std::vector<double> oracle_per;
        oracle::cider_d(corpus, &oracle_per);
        CHECK(per[0] == Catch::Approx(oracle_per[0]).margin(1e-12));
        // delta = 4: penalty = exp(-16/72) < 1 strictly reduces the score.
        CHECK(per[0] < 10.0 * std::exp(-16.0 / 72.0) + 1e-9);
    }
    SECTION("a single instance is rejected") {
        try {
            cider_d({inst("x", "a", {"a"})});
            FAIL("expected CorpusTooSmall");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::CorpusTooSmall);
        }
    }
}

TEST_CASE("identity corpus saturates the overlap metrics", "[metrics]") {
    const auto corpus = identity_corpus();
    const auto b = bleu(corpus);
    for (double score : b) CHECK(score == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(rouge_l(corpus) == Catch::Approx(1.0).epsilon(1e-12));

    std::vector<double> per;
    meteor_lite(corpus, &per);
    REQUIRE(per.size() == 3);
    for (size_t i = 0; i < corpus.size(); ++i) {
        const double m = static_cast<double>(tokenize(corpus[i].candidate).size());
        CHECK(per[i] == Catch::Approx(1.0 - 0.5 * std::pow(1.0 / m, 3)).epsilon(1e-12));
    }
}

TEST_CASE("all metrics match the brute-force oracles on seeded corpora", "[metrics]") {
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        const auto corpus = fx::random_eval_corpus(seed);
        CAPTURE(seed);

        const auto fast_bleu = bleu(corpus);
        const auto slow_bleu = oracle::bleu(corpus);
        for (size_t n = 0; n < 4; ++n) {
            REQUIRE(std::abs(fast_bleu[n] - slow_bleu[n]) <= 1e-9);
        }
        REQUIRE(std::abs(rouge_l(corpus) - oracle::rouge_l(corpus)) <= 1e-9);
        REQUIRE(std::abs(meteor_lite(corpus) - oracle::meteor(corpus)) <= 1e-9);
        REQUIRE(std::abs(cider_d(corpus) - oracle::cider_d(corpus)) <= 1e-9);
    }
}

TEST_CASE("spider aggregation", "[metrics]") {
    CHECK(spider(0.8, 0.4) == Catch::Approx(0.6).epsilon(1e-12));
    try {
        spider(0.8, std::nullopt);
        FAIL("expected MissingComponent");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingComponent);
    }
    try {
        spider(std::nullopt, 0.4);
        FAIL("expected MissingComponent");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingComponent);
    }
}

TEST_CASE("published spider row is reproduced by the aggregation", "[metrics]") {
    // cider_d 2.4699 and spice 0.3701 round to spider 1.4200.
    CHECK(std::abs(spider(2.4699, 0.3701) - 1.4200) <= 5e-5);
}

TEST_CASE("evaluate_corpus report behavior", "[metrics]") {
    const auto corpus = identity_corpus();

    SECTION("without external scores: no spice, fense, or spider keys") {
        const auto report = evaluate_corpus(corpus);
        CHECK(report.get("bleu_1").has_value());
        CHECK(report.get("rouge_l").has_value());
        CHECK(report.get("meteor").has_value());
        CHECK(report.get("cider_d").has_value());
        CHECK(!report.get("spice").has_value());
        CHECK(!report.get("fense").has_value());
        CHECK(!report.get("spider").has_value());
        REQUIRE(report.instances.size() == 3);
        CHECK(report.instances[0].id == "a");
    }
    SECTION("external spice enables spider; fense is carried through") {
        ExternalScores external;
        external.spice = 0.4;
        external.fense = 0.62;
        const auto report = evaluate_corpus(corpus, external);
        REQUIRE(report.get("spider").has_value());
        const double expected = (*report.get("cider_d") + 0.4) / 2.0;
        CHECK(*report.get("spider") == Catch::Approx(expected).epsilon(1e-12));
        CHECK(*report.get("fense") == Catch::Approx(0.62).epsilon(1e-12));
    }
    SECTION("empty corpus is rejected") {
        try {
            evaluate_corpus({});
            FAIL("expected EmptyCorpus");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyCorpus);
        }
    }
    SECTION("empty candidate scores zero without crashing") {
        auto corpus2 = identity_corpus();
        corpus2[0].candidate = "";
        const auto report = evaluate_corpus(corpus2);
        CHECK(report.instances[0].rouge_l == 0.0);
        CHECK(report.instances[0].meteor == 0.0);
        CHECK(*report.get("bleu_1") < 1.0);
    }
}

TEST_CASE("report rendering", "[metrics]") {
    const auto report = evaluate_corpus(identity_corpus());

    SECTION("table holds every column in order, dash for absent") {
        const std::string table = render_report_table(report);
        const auto newline = table.find('\n');
        const std::string header = table.substr(0, newline);
        size_t cursor = 0;
        for (const char* column : kReportColumns) {
            const size_t at = header.find(column, cursor);
            REQUIRE(at != std::string::npos);
            cursor = at + 1;
        }
        const std::string values = table.substr(newline + 1);
        CHECK(values.find('-') != std::string::npos);  // spice/fense/spider absent
        CHECK(values.find("1.0000") != std::string::npos);
    }
    SECTION("json always carries the full key set with nulls") {
        const auto j = report_to_json(report);
        REQUIRE(j.contains("metrics"));
        for (const char* column : kReportColumns) {
            REQUIRE(j["metrics"].contains(column));
        }
        CHECK(j["metrics"]["spice"].is_null());
        CHECK(j["metrics"]["spider"].is_null());
        CHECK(j["metrics"]["fense"].is_null());
        CHECK(j["metrics"]["bleu_1"].is_number());
        CHECK(j["metrics"]["meteor"].is_number());
        CHECK(j.contains("notes"));
        CHECK(j["instances"].size() == 3);
    }
}
