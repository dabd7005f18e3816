#include <doctest.h>

#include <cmath>

#include "ecgssl/rng.hpp"
#include "ecgssl/signal.hpp"

using namespace ecgssl;

namespace {

EcgRecord ramp_record(std::size_t n, int fs = 300) {
    EcgRecord r;
    r.id = "ramp";
    r.fs = fs;
    r.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.samples[i] = static_cast<Real>(i % 977) * 0.001f;
    return r;
}

} // namespace

TEST_CASE("segment: window arithmetic") {
    // 30 s at 300 Hz -> five windows at stride offsets
    auto w = segment(ramp_record(9000));
    REQUIRE(w.size() == 5);
    for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(w[i].offset == i * 1500);
        CHECK(w[i].samples.size() == 3000);
    }

    // 61 s record: count must match direct enumeration of valid offsets
    std::size_t expected = 0;
    for (std::size_t off = 0; off + 3000 <= 18300; off += 1500) ++expected;
    CHECK(expected == 11);
    CHECK(segment(ramp_record(18300)).size() == expected);

    // 9 s record is shorter than one window
    CHECK(segment(ramp_record(2700)).empty());
}

TEST_CASE("segment: slices reproduce the source") {
    const auto rec = ramp_record(10234);
    for (const auto& w : segment(rec)) {
        CHECK(w.offset % 1500 == 0);
        for (std::size_t i = 0; i < w.samples.size(); ++i)
            CHECK(w.samples[i] == rec.samples[w.offset + i]);
    }
}

TEST_CASE("normalize: linear map and range") {
    RawWindow w;
    w.samples.resize(3000);
    for (std::size_t i = 0; i < 3000; ++i) w.samples[i] = 2.0f + 4.0f * ((i * 7) % 3) / 2.0f;
    w.samples[0] = 2.0f;
    w.samples[1] = 4.0f;
    w.samples[2] = 6.0f;
    auto s = normalize(w);
    CHECK(!s.degenerate);
    CHECK(s.samples[0] == 0.0f);
    CHECK(s.samples[1] == doctest::Approx(0.5));
    CHECK(s.samples[2] == 1.0f);
    Real lo = 1, hi = 0;
    for (Real v : s.samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo == 0.0f);
    CHECK(hi == 1.0f);
}

TEST_CASE("normalize: idempotent") {
    Rng rng(11);
    RawWindow w;
    w.samples.resize(3000);
    for (auto& v : w.samples) v = static_cast<Real>(rng.normal(0.0, 3.0));
    const auto once = normalize(w);
    RawWindow again;
    again.samples = once.samples;
    const auto twice = normalize(again);
    for (std::size_t i = 0; i < 3000; ++i) CHECK(twice.samples[i] == once.samples[i]);
}

TEST_CASE("normalize: constant window is degenerate") {
    RawWindow w;
    w.samples.assign(3000, 0.7f);
    auto s = normalize(w);
    CHECK(s.degenerate);
    for (Real v : s.samples) CHECK(v == 0.0f);
}

TEST_CASE("segment_normalized drops degenerate windows") {
    EcgRecord rec;
    rec.id = "flat";
    rec.fs = 300;
    rec.samples.assign(4500, 1.0f);  // one full window, flat
    CHECK(segment_normalized(rec).empty());
    CHECK(segment_normalized(rec, false).size() == 2);
}
