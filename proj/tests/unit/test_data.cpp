// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rsad/data.hpp"
#include "rsad/error.hpp"

using namespace rsad;

namespace {

std::vector<RawRecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_daphnet(in, "mem");
}

std::vector<RawRecord> records_with(const std::vector<int>& annotations) {
  std::vector<RawRecord> out;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    RawRecord r;
    r.timestamp_ms = static_cast<std::int64_t>(i) * 15;
    r.channels.fill(static_cast<double>(i));
    r.annotation = annotations[i];
    out.push_back(r);
  }
  return out;
}

SeriesSet series_of(std::size_t channels, std::size_t length, std::mt19937_64& rng) {
  SeriesSet s;
  s.x = oracle::random_mat(channels, length, rng, 3.0);
  for (double& v : s.x.values()) v += 7.0;
  s.labels.assign(length, false);
  s.segments = {{0, length}};
  return s;
}

}  // namespace

TEST_CASE("parse_daphnet") {
  const auto recs = parse("15 70 39 -970 0 0 0 0 0 0 1\n");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].timestamp_ms == 15);
  CHECK(recs[0].channels[0] == 70);
  CHECK(recs[0].channels[1] == 39);
  CHECK(recs[0].channels[2] == -970);
  CHECK(recs[0].channels[8] == 0);
  CHECK(recs[0].annotation == 1);

  SUBCASE("wrong field count names the line") {
    try {
      (void)parse("15 70 39 -970 0 0 0 0 0 0 1\n15 70 39 -970 0 0 0 0 0 1\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("10") != std::string::npos);
    }
  }
  SUBCASE("non-integer token") {
    CHECK_THROWS_AS(parse("15 70 39 abc 0 0 0 0 0 0 1\n"), ParseError);
    CHECK_THROWS_AS(parse("15 70 39 1.5 0 0 0 0 0 0 1\n"), ParseError);
  }
  SUBCASE("annotation out of range") { CHECK_THROWS_AS(parse("15 0 0 0 0 0 0 0 0 0 3\n"), ParseError); }
  SUBCASE("empty input is a distinct error") {
    CHECK_THROWS_AS(parse(""), EmptyInputError);
    CHECK_THROWS_AS(parse("\n  \n"), EmptyInputError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(parse_daphnet("/nonexistent/S01R01.txt"), DataError); }
}

TEST_CASE("segmentize") {
  const SeriesSet s = segmentize(records_with({0, 0, 1, 1, 2, 1, 0, 1}));
  REQUIRE(s.segments.size() == 2);
  CHECK(s.segments[0].length() == 4);
  CHECK(s.segments[1].length() == 1);
  CHECK(s.length() == 5);
  CHECK(s.channels() == kDaphnetChannels);
  CHECK(s.x(0, 0) == 2.0);  // first kept record is index 2

  CHECK(segmentize(records_with({1, 2, 2, 1})).labels == std::vector<bool>{false, true, true, false});
  CHECK_THROWS_AS(segmentize(records_with({0, 0, 0})), DataError);
  CHECK_THROWS_AS(segmentize({}), EmptyInputError);

  SUBCASE("decimation keeps every n-th record per run") {
    const SeriesSet d = segmentize(records_with({1, 1, 1, 1, 1, 0, 1, 1}), 2);
    REQUIRE(d.segments.size() == 2);
    CHECK(d.segments[0].length() == 3);
    CHECK(d.segments[1].length() == 1);
  }
}

TEST_CASE("normalization") {
  std::mt19937_64 rng(5);

  SUBCASE("constant channel maps to zeros") {
    SeriesSet s;
    s.x = Mat(1, 50, 4.2);
    s.labels.assign(50, false);
    s.segments = {{0, 50}};
    const NormStats st = fit_normalize(s);
    CHECK(st.stddev[0] == kStdFloor);
    const SeriesSet n = apply_normalize(s, st);
    for (double v : n.x.values()) CHECK(v == 0.0);
  }

  SUBCASE("random channels reach zero mean and unit std") {
    const SeriesSet s = series_of(4, 1000, rng);
    const SeriesSet n = apply_normalize(s, fit_normalize(s));
    for (std::size_t c = 0; c < 4; ++c) {
      double sum = 0.0, ss = 0.0;
      for (std::size_t t = 0; t < 1000; ++t) sum += n.x(c, t);
      const double mean = sum / 1000.0;
      for (std::size_t t = 0; t < 1000; ++t) ss += (n.x(c, t) - mean) * (n.x(c, t) - mean);
      CHECK(std::abs(mean) < 1e-10);
      CHECK(std::abs(std::sqrt(ss / 1000.0) - 1.0) < 1e-9);
    }
  }

  SUBCASE("standardized channel is left nearly unchanged") {
    const SeriesSet s = series_of(2, 500, rng);
    const SeriesSet once = apply_normalize(s, fit_normalize(s));
    const SeriesSet twice = apply_normalize(once, fit_normalize(once));
    for (std::size_t i = 0; i < once.x.size(); ++i) CHECK(std::abs(once.x[i] - twice.x[i]) < 1e-9);
  }

  SUBCASE("apply then invert recovers the input") {
    for (int trial = 0; trial < 20; ++trial) {
      const SeriesSet s = series_of(3, 200, rng);
      const NormStats st = fit_normalize(s);
      const SeriesSet back = invert_normalize(apply_normalize(s, st), st);
      for (std::size_t i = 0; i < s.x.size(); ++i) CHECK(std::abs(back.x[i] - s.x[i]) < 1e-9);
    }
  }

  SUBCASE("channel mismatch") {
    const SeriesSet s = series_of(3, 10, rng);
    CHECK_THROWS_AS(apply_normalize(s, NormStats{{0.0}, {1.0}}), ShapeError);
  }
}

TEST_CASE("make_windows") {
  SeriesSet s;
  s.x = Mat(2, 10);
  for (std::size_t t = 0; t < 10; ++t) {
    s.x(0, t) = static_cast<double>(t);
    s.x(1, t) = -static_cast<double>(t);
  }
  s.labels.assign(10, false);
  s.segments = {{0, 10}};

  const auto ws = make_windows(s, 4, 2, 1);
  REQUIRE(ws.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) CHECK(ws[k].origin_index == k);
  CHECK(ws[2].x == Mat{{2, 3, 4, 5}, {-2, -3, -4, -5}});
  CHECK(ws[2].x_f == Mat{{6, 7}, {-6, -7}});

  // Offsets 0 and 4 both fit: floor((10 - 4 - 2) / 4) + 1.
  CHECK(make_windows(s, 4, 2, 4).size() == 2);

  SUBCASE("a single anomalous timestamp in the input window sets the label") {
    s.labels[5] = true;
    const auto lw = make_windows(s, 4, 2, 1);
    std::vector<bool> got;
    for (const auto& w : lw) got.push_back(w.label);
    CHECK(got == std::vector<bool>{false, false, true, true, true});
    CHECK(normal_only(lw).size() == 2);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(make_windows(s, 8, 3, 1), DataError);
    CHECK_THROWS_AS(make_windows(s, 4, 2, 0), ConfigError);
  }
}

TEST_CASE("make_windows properties") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> len_d(1, 120), wh_d(1, 20), stride_d(1, 15);
  int checked = 0;
  while (checked < 1000) {
    const std::size_t w = wh_d(rng), h = wh_d(rng), stride = stride_d(rng);
    const std::size_t l1 = len_d(rng), l2 = len_d(rng);
    if (std::max(l1, l2) < w + h) continue;
    ++checked;

    SeriesSet s;
    s.x = Mat(1, l1 + l2);
    for (std::size_t t = 0; t < s.length(); ++t) s.x(0, t) = static_cast<double>(t);
    s.labels.resize(s.length());
    std::bernoulli_distribution flip(0.05);
    for (std::size_t t = 0; t < s.length(); ++t) s.labels[t] = flip(rng);
    s.segments = {{0, l1}, {l1, l1 + l2}};

    const auto ws = make_windows(s, w, h, stride);
    const std::size_t want = oracle::count_windows(l1, w, h, stride) + oracle::count_windows(l2, w, h, stride);
    REQUIRE(ws.size() == want);
    for (const auto& win : ws) {
      const std::size_t o = win.origin_index;
      const bool first = o < l1;
      const std::size_t seg_end = first ? l1 : l1 + l2;
      CHECK(o + w + h <= seg_end);
      bool any = false;
      for (std::size_t t = o; t < o + w; ++t) any = any || s.labels[t];
      CHECK(win.label == any);
    }
  }
}

TEST_CASE("split") {
  SeriesSet s;
  s.x = Mat(1, 100);
  for (std::size_t t = 0; t < 100; ++t) s.x(0, t) = static_cast<double>(t);
  s.labels.assign(100, false);
  s.segments = {{0, 100}};

  const SeriesSplit sp = split(s, {});
  CHECK(sp.train.length() == 60);
  CHECK(sp.val.length() == 20);
  CHECK(sp.test.length() == 20);
  CHECK(sp.val.x(0, 0) == 60.0);
  CHECK(sp.test.x(0, 0) == 80.0);
  CHECK(std::none_of(sp.test.labels.begin(), sp.test.labels.end(), [](bool b) { return b; }));
  CHECK(sp.warnings.size() == 1);

  SUBCASE("split is per segment") {
    SeriesSet two = s;
    two.segments = {{0, 50}, {50, 100}};
    const SeriesSplit p = split(two, {});
    CHECK(p.train.segments.size() == 2);
    CHECK(p.train.x(0, 30) == 50.0);
  }

  SUBCASE("normal-only filtering of mixed training data") {
    SeriesSet mixed = s;
    for (std::size_t t = 20; t < 25; ++t) mixed.labels[t] = true;
    for (std::size_t t = 70; t < 72; ++t) mixed.labels[t] = true;
    const SeriesSplit p = split(mixed, {});
    CHECK(p.warnings.empty());
    const auto train = normal_only(make_windows(p.train, 8, 2, 1));
    CHECK(!train.empty());
    for (const auto& w : train) CHECK_FALSE(w.label);
  }

  SUBCASE("bad ratios") {
    CHECK_THROWS_AS(split(s, {0.5, 0.5, 0.0}), ConfigError);
    CHECK_THROWS_AS(split(s, {0.6, 0.3, 0.3}), ConfigError);
  }
}

TEST_CASE("synth_generate") {
  SynthSpec spec;
  spec.length = 500;

  const SeriesSet clean = synth_generate(spec, 1);
  CHECK(clean.channels() == 6);
  CHECK(clean.length() == 500);
  CHECK(std::none_of(clean.labels.begin(), clean.labels.end(), [](bool b) { return b; }));

  SUBCASE("same seed gives bit-identical output, another seed differs") {
    CHECK(synth_generate(spec, 1).x == clean.x);
    CHECK_FALSE(synth_generate(spec, 2).x == clean.x);
  }

  SUBCASE("noise around the phase-locked sinusoids has the configured std") {
    const double two_pi = 2.0 * std::acos(-1.0);
    double ss = 0.0;
    for (std::size_t c = 0; c < 6; ++c) {
      for (std::size_t t = 0; t < 500; ++t) {
        const double ideal = std::sin(two_pi * spec.frequencies[c % 3] * static_cast<double>(t) +
                                      two_pi * static_cast<double>(c) / 6.0);
        ss += (clean.x(c, t) - ideal) * (clean.x(c, t) - ideal);
      }
    }
    CHECK(std::abs(std::sqrt(ss / 3000.0) - spec.noise_std) < 0.005);
  }

  SUBCASE("one spike on [100,110) labels exactly 10 timestamps and offsets by 5 sigma") {
    spec.anomalies = {{AnomalyKind::kSpike, 2, 100, 110}};
    const SeriesSet s = synth_generate(spec, 1);
    CHECK(std::count(s.labels.begin(), s.labels.end(), true) == 10);
    for (std::size_t t = 100; t < 110; ++t) {
      CHECK(s.labels[t]);
      CHECK(std::abs(std::abs(s.x(2, t) - clean.x(2, t)) - 5 * spec.noise_std) < 1e-12);
    }
    CHECK(s.x(2, 99) == clean.x(2, 99));
    CHECK(s.x(1, 105) == clean.x(1, 105));
  }

  SUBCASE("frequency shift and correlation break change only their channel and interval") {
    spec.anomalies = {{AnomalyKind::kFrequencyShift, 0, 50, 90},
                      {AnomalyKind::kCorrelationBreak, 4, 200, 260}};
    const SeriesSet s = synth_generate(spec, 1);
    double d0 = 0.0, d4 = 0.0;
    for (std::size_t t = 50; t < 90; ++t) d0 += std::abs(s.x(0, t) - clean.x(0, t));
    for (std::size_t t = 200; t < 260; ++t) d4 += std::abs(s.x(4, t) - clean.x(4, t));
    CHECK(d0 / 40 > 0.3);
    CHECK(d4 / 60 > 0.3);
    CHECK(s.x(0, 49) == clean.x(0, 49));
    CHECK(s.x(0, 90) == clean.x(0, 90));
    CHECK(s.x(3, 220) == clean.x(3, 220));
    CHECK(std::count(s.labels.begin(), s.labels.end(), true) == 100);
  }

  SUBCASE("overlapping intervals are rejected") {
    spec.anomalies = {{AnomalyKind::kSpike, 0, 10, 20}, {AnomalyKind::kSpike, 1, 15, 30}};
    CHECK_THROWS_AS(synth_generate(spec, 1), ConfigError);
  }
  SUBCASE("interval past the end is rejected") {
    spec.anomalies = {{AnomalyKind::kSpike, 0, 490, 510}};
    CHECK_THROWS_AS(synth_generate(spec, 1), ConfigError);
  }
}

TEST_CASE("plan_anomalies") {
  const auto plan = plan_anomalies(6, 1000, 2000, 5, 40, 3);
  REQUIRE(plan.size() == 5);
  for (std::size_t k = 0; k < plan.size(); ++k) {
    CHECK(plan[k].end - plan[k].begin == 40);
    CHECK(plan[k].begin >= 1000 + k * 200);
    CHECK(plan[k].end <= 1000 + (k + 1) * 200);
    CHECK(static_cast<int>(plan[k].kind) == static_cast<int>(k % 3));
  }
  SynthSpec spec;
  spec.length = 2000;
  spec.anomalies = plan;
  CHECK_NOTHROW(spec.validate());
  CHECK_THROWS_AS(plan_anomalies(6, 0, 100, 5, 40, 3), ConfigError);
  CHECK(anomaly_kind_from_string(to_string(AnomalyKind::kCorrelationBreak)) == AnomalyKind::kCorrelationBreak);
  CHECK_THROWS_AS(anomaly_kind_from_string("drift"), ConfigError);
}
