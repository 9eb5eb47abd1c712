#include <catch2/catch_amalgamated.hpp>

#include "dvs/generators.hpp"
#include "dvs/oracle.hpp"

using namespace dvs;

TEST_CASE("n = 0 yields an empty stream") {
  generator_spec g;
  g.kind = generator_kind::uniform_impartial;
  g.n = 0;
  g.m = 3;
  CHECK(generate(g).empty());
}

TEST_CASE("generation is replayable") {
  generator_spec g;
  g.kind = generator_kind::uniform_impartial;
  g.n = 50;
  g.m = 4;
  g.ballots = ballot_kind::ordinal;
  g.seed = 17;
  auto a = generate(g);
  auto b = generate(g);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].b == b[i].b);
}

TEST_CASE("planted winner reaches margin plus 1/m plurality share") {
  generator_spec g;
  g.kind = generator_kind::planted_winner;
  g.margin = 0.3;
  g.n = 1000;
  g.m = 3;
  g.ballots = ballot_kind::ordinal;
  g.seed = 23;
  auto events = generate(g);
  long long tops = 0;
  for (const auto& ev : events)
    if (ev.b.ids.front() == 0) ++tops;
  double share = static_cast<double>(tops) / 1000.0;
  double want = 0.3 + 1.0 / 3.0;
  CHECK(share >= want - 0.05);
  CHECK(share <= want + 0.05);
}

TEST_CASE("skewed generator validates its weights") {
  generator_spec g;
  g.kind = generator_kind::skewed;
  g.n = 10;
  g.m = 3;
  CHECK_THROWS_AS(generate(g), dvs_error);  // missing weights
  g.weights = {0, 0, 0};
  CHECK_THROWS_AS(generate(g), dvs_error);  // all-zero weights
  g.weights = {1, -1, 0};
  CHECK_THROWS_AS(generate(g), dvs_error);  // negative weight
  g.weights = {5, 1, 1};
  auto events = generate(g);
  CHECK(events.size() == 10);
}

TEST_CASE("round robin and single site assignment") {
  std::vector<stream_event> events(6);
  for (int i = 0; i < 6; ++i) events[i] = {i + 1, -1, ballot::approval({0})};
  assignment_policy rr{assignment_kind::round_robin, 3, 1};
  assign_sites(events, rr);
  std::vector<int> sites;
  for (const auto& ev : events) sites.push_back(ev.site);
  CHECK(sites == std::vector<int>{0, 1, 2, 0, 1, 2});

  assignment_policy ss{assignment_kind::single_site, 3, 1};
  assign_sites(events, ss);
  for (const auto& ev : events) CHECK(ev.site == 0);
}

TEST_CASE("uniform random assignment balances within three sigma") {
  const long long n = 10000;
  const int k = 4;
  std::vector<stream_event> events(n);
  for (long long i = 0; i < n; ++i) events[i] = {i + 1, -1, ballot::approval({0})};
  assignment_policy ur{assignment_kind::uniform_random, k, 33};
  assign_sites(events, ur);
  std::vector<long long> per(k, 0);
  for (const auto& ev : events) ++per[ev.site];
  double expect = static_cast<double>(n) / k;
  double sigma = std::sqrt(static_cast<double>(n) * (1.0 / k) * (1.0 - 1.0 / k));
  for (int s = 0; s < k; ++s) CHECK(std::abs(per[s] - expect) <= 3 * sigma);
}

TEST_CASE("adversarial flip phase sizes follow the ceiling recurrence") {
  // eps=0.1, k=2: x1=1, x2=ceil(2.6)=3, x3=ceil(1.3*2*4)=11
  auto x = adversarial_phase_sizes(0.1, 2, 3);
  CHECK(x[1] == 1);
  CHECK(x[2] == 3);
  CHECK(x[3] == 11);
}

TEST_CASE("adversarial stream floods every site in site-major order") {
  generator_spec g;
  g.kind = generator_kind::adversarial_flip;
  g.m = 2;
  g.eps = 0.1;
  g.k = 2;
  g.phases = 2;
  g.ballots = ballot_kind::approval;
  auto events = generate(g);
  // phase 1: 1 ballot per site for candidate 1; phase 2: 3 per site for 0
  REQUIRE(events.size() == 2 + 6);
  CHECK(events[0].site == 0);
  CHECK(events[0].b.ids == std::vector<candidate_id>{1});
  CHECK(events[1].site == 1);
  CHECK(events[2].site == 0);
  CHECK(events[2].b.ids == std::vector<candidate_id>{0});
  CHECK(events[4].site == 0);
  CHECK(events[5].site == 1);
  for (std::size_t i = 0; i < events.size(); ++i) CHECK(events[i].time == (long long)i + 1);
}

TEST_CASE("adversarial phase ends have the constructed unique eps-winner") {
  for (int k : {1, 2}) {
    generator_spec g;
    g.kind = generator_kind::adversarial_flip;
    g.m = 2;
    g.eps = 0.1;
    g.k = k;
    g.phases = 4;
    g.ballots = ballot_kind::approval;
    auto events = generate(g);
    auto x = adversarial_phase_sizes(g.eps, g.k, g.phases);
    long long t = 0;
    for (int i = 1; i <= g.phases; ++i) {
      t += x[i] * k;
      election e = election_prefix(events, 2, ballot_kind::approval, t);
      candidate_id flood = i % 2;
      rule_spec rule = rule_spec::plain(rule_kind::plurality);
      CAPTURE(k, i);
      CHECK(is_eps_winner_exact(e, flood, g.eps, rule));
      CHECK_FALSE(is_eps_winner_exact(e, 1 - flood, g.eps, rule));
    }
  }
}

TEST_CASE("adversarial spec validation") {
  generator_spec g;
  g.kind = generator_kind::adversarial_flip;
  g.m = 3;
  g.phases = 2;
  CHECK_THROWS_AS(generate(g), dvs_error);  // m must be 2
  g.m = 2;
  g.eps = 0.5;
  CHECK_THROWS_AS(generate(g), dvs_error);  // eps < 1/3
}

TEST_CASE("stream text round-trips with the site column") {
  generator_spec g;
  g.kind = generator_kind::uniform_impartial;
  g.n = 12;
  g.m = 3;
  g.ballots = ballot_kind::ordinal;
  g.seed = 5;
  auto events = generate(g);
  assignment_policy rr{assignment_kind::round_robin, 3, 1};
  assign_sites(events, rr);
  std::stringstream ss;
  write_stream(ss, events, 3, ballot_kind::ordinal);
  auto back = read_stream(ss);
  CHECK(back.m == 3);
  REQUIRE(back.events.size() == events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(back.events[i].site == events[i].site);
    CHECK(back.events[i].b == events[i].b);
  }
}
