#include <catch2/catch_amalgamated.hpp>

#include "dvs/rng.hpp"
#include "dvs/sampler.hpp"

using namespace dvs;

TEST_CASE("a one-item stream yields that item and flags short draws") {
  sampler_center<int> c(5);
  c.on_item(42, 3);
  rng r(1);
  bool short_sample = false;
  auto got = c.draw(5, r, &short_sample);
  CHECK(got == std::vector<int>{42});
  CHECK(short_sample);
}

TEST_CASE("draw before any item yields an empty flagged sample") {
  sampler_center<int> c(4);
  rng r(2);
  bool short_sample = false;
  CHECK(c.draw(4, r, &short_sample).empty());
  CHECK(short_sample);
}

TEST_CASE("rounds only increase and the pool keeps level >= round") {
  const long long s = 8;
  sampler_center<long long> center(s);
  sampler_site<long long> site;
  rng r(99);
  int last_round = 0;
  for (long long i = 0; i < 5000; ++i) {
    if (auto level = site.on_item(r)) {
      if (auto raised = center.on_item(i, *level)) {
        CHECK(*raised > last_round);
        last_round = *raised;
        site.on_round_broadcast(*raised);
      }
    }
    REQUIRE(static_cast<long long>(center.pool().size()) <= 4 * s);
    for (const auto& e : center.pool()) REQUIRE(e.level >= center.round());
  }
  CHECK(center.round() == last_round);
  CHECK(center.round() > 0);  // 5000 items against a 32-cap must have raised r
}

TEST_CASE("pool inclusion is uniform across stream positions") {
  // run many seeds; count how often position p of a fixed stream lands in
  // the pool, then compare against the binomial three-sigma band
  const long long n = 400, s = 25;
  const int trials = 300;
  std::vector<int> included(n, 0);
  double mean_pool = 0;
  for (int t = 0; t < trials; ++t) {
    sampler_center<long long> center(s);
    sampler_site<long long> site;
    rng r(1000 + t);
    for (long long i = 0; i < n; ++i) {
      if (auto level = site.on_item(r)) {
        if (auto raised = center.on_item(i, *level)) site.on_round_broadcast(*raised);
      }
    }
    mean_pool += static_cast<double>(center.pool().size());
    for (const auto& e : center.pool()) ++included[e.item];
  }
  mean_pool /= trials;
  double p = mean_pool / static_cast<double>(n);
  double sigma = std::sqrt(p * (1 - p) * trials);
  int outliers = 0;
  for (long long i = 0; i < n; ++i)
    if (std::abs(included[i] - p * trials) > 3 * sigma) ++outliers;
  // 3-sigma misses ~0.3% of positions; allow a conservative 2%
  CHECK(outliers <= n / 50);
}

TEST_CASE("draws of four item types pass a chi-square uniformity check") {
  // n items of 4 types in equal proportion; chi-square over repeated trials
  const long long n = 10000, s = 400;
  const int trials = 100;
  double worst = 0;
  int rejections = 0;
  for (int t = 0; t < trials; ++t) {
    sampler_center<int> center(s);
    sampler_site<int> site;
    rng r(31 * t + 7);
    for (long long i = 0; i < n; ++i) {
      int type = static_cast<int>(i % 4);
      if (auto level = site.on_item(r)) {
        if (auto raised = center.on_item(type, *level)) site.on_round_broadcast(*raised);
      }
    }
    rng draw_rng(555 + t);
    auto sample = center.draw(s, draw_rng);
    std::vector<double> counts(4, 0);
    for (int x : sample) counts[x] += 1;
    double expect = static_cast<double>(sample.size()) / 4.0;
    double chi2 = 0;
    for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
    worst = std::max(worst, chi2);
    if (chi2 > 11.345) ++rejections;  // chi-square(3) at significance 0.01
  }
  // at significance 0.01 about one trial in a hundred may trip; allow five
  CHECK(rejections <= 5);
}
