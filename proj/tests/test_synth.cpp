#include <doctest.h>

#include <cmath>

#include "ecgssl/synth.hpp"

using namespace ecgssl;

TEST_CASE("synth_record: mean RR follows the configured heart rate") {
    SynthParams p;
    p.duration_s = 60;
    p.seed = 3;
    const EcgRecord rec = synth_record(Label::Normal, p);
    REQUIRE(rec.annotations.size() > 10);
    double mean_rr = 0;
    for (std::size_t i = 1; i < rec.annotations.size(); ++i)
        mean_rr += rec.annotations[i] - rec.annotations[i - 1];
    mean_rr /= static_cast<double>(rec.annotations.size() - 1);
    CHECK(mean_rr == doctest::Approx(60.0 / 70.0).epsilon(0.05));
}

TEST_CASE("synth_record: annotations strictly increasing and inside the record") {
    const EcgRecord rec = synth_record(Label::AF, SynthParams{.seed = 17});
    REQUIRE(!rec.annotations.empty());
    for (std::size_t i = 1; i < rec.annotations.size(); ++i)
        CHECK(rec.annotations[i] > rec.annotations[i - 1]);
    CHECK(rec.annotations.back() < rec.duration_s());
}

TEST_CASE("synth_record: RR irregularity separates the classes") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        SynthParams p;
        p.duration_s = 60;
        p.seed = seed;
        CHECK(annotation_rr_cv(synth_record(Label::Normal, p)) < 0.10);
        CHECK(annotation_rr_cv(synth_record(Label::AF, p)) >= 0.15);
    }
}

TEST_CASE("synth_record: P bumps present for Normal, absent for AF") {
    for (std::uint64_t seed : {11ull, 12ull, 13ull, 14ull}) {
        SynthParams p;
        p.duration_s = 60;
        p.seed = seed;
        const EcgRecord normal = synth_record(Label::Normal, p);
        const EcgRecord af = synth_record(Label::AF, p);
        const double bar = 2.0 * p.noise_amp;
        CHECK(p_bump_score(normal) > bar);
        CHECK(p_bump_score(af) < bar);
    }
}

TEST_CASE("synth_record: deterministic under fixed seed") {
    SynthParams p;
    p.seed = 99;
    const EcgRecord a = synth_record(Label::AF, p);
    const EcgRecord b = synth_record(Label::AF, p);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
    REQUIRE(a.annotations.size() == b.annotations.size());
}

TEST_CASE("synth_record: too-short duration errors") {
    SynthParams p;
    p.duration_s = 0.3;
    CHECK_THROWS_AS(synth_record(Label::Normal, p), DataError);
}

TEST_CASE("synth_corpus: counts, labels, ids, seed sensitivity") {
    SynthParams p;
    p.duration_s = 10;
    const auto corpus = synth_corpus(2, 3, p, 7);
    REQUIRE(corpus.size() == 5);
    int n_normal = 0, n_af = 0;
    for (const auto& r : corpus) (r.label == Label::Normal ? n_normal : n_af)++;
    CHECK(n_normal == 2);
    CHECK(n_af == 3);
    CHECK(corpus[0].id == "N0000");
    CHECK(corpus[4].id == "A0002");

    CHECK(synth_corpus(0, 0, p, 7).empty());

    const auto c1 = synth_corpus(1, 0, p, 1);
    const auto c2 = synth_corpus(1, 0, p, 2);
    bool differ = false;
    for (std::size_t i = 0; i < std::min(c1[0].samples.size(), c2[0].samples.size()); ++i)
        if (c1[0].samples[i] != c2[0].samples[i]) {
            differ = true;
            break;
        }
    CHECK(differ);
}

TEST_CASE("synth_corpus: records differ from each other") {
    SynthParams p;
    p.duration_s = 10;
    const auto corpus = synth_corpus(2, 0, p, 5);
    bool differ = false;
    for (std::size_t i = 0; i < corpus[0].samples.size(); ++i)
        if (corpus[0].samples[i] != corpus[1].samples[i]) {
            differ = true;
            break;
        }
    CHECK(differ);
}
