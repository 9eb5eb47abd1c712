#include <catch2/catch_amalgamated.hpp>

#include "dvs/experiment.hpp"

using namespace dvs;

TEST_CASE("frequency declaration example: plurality argmax") {
  std::vector<double> scores = {3, 1};
  CHECK(declare::argmax(scores) == 0);
  std::vector<double> tied = {2, 2, 1};
  CHECK(declare::argmax(tied) == 0);  // lowest id on ties
}

TEST_CASE("copeland with a unanimous pair declares the dominator") {
  // m=2, N(a,b) = n_hat: Sc(a)=1 vs Sc(b)=0
  auto N = [](candidate_id a, candidate_id b) { return a == 0 && b == 1 ? 10.0 : 0.0; };
  CHECK(declare::copeland_soft(2, N, soft_majority_threshold(10, 0)) == 0);
}

TEST_CASE("bucklin declaration finds c2 at round 1 with exact estimates") {
  // {c1>c2>c3>c4, c2>c1>c3>c4, c2>c3>c1>c4}: N(c2,1)=2 of 3
  election e = make_election(4, ballot_kind::ordinal);
  e.add(ballot::ordinal({0, 1, 2, 3}));
  e.add(ballot::ordinal({1, 0, 2, 3}));
  e.add(ballot::ordinal({1, 2, 0, 3}));
  tallies t(e);
  auto Nck = [&](candidate_id c, int j) { return static_cast<double>(t.prefix_count(c, j)); };
  // eps -> 0: threshold is the exact strict majority (n+1)/2
  CHECK(declare::bucklin_soft(4, Nck, soft_majority_threshold(3, 0)) == 1);
}

TEST_CASE("exact frequencies declare a member of the exact co-winner set for every rule") {
  rng r(12);
  for (int iter = 0; iter < 30; ++iter) {
    int m = 2 + static_cast<int>(r.below(5));
    int n = 1 + static_cast<int>(r.below(40));
    election e = make_election(m, ballot_kind::ordinal);
    for (int i = 0; i < n; ++i) {
      std::vector<candidate_id> p(m);
      for (int c = 0; c < m; ++c) p[c] = c;
      for (int c = m - 1; c > 0; --c) std::swap(p[c], p[r.below(c + 1)]);
      e.add(ballot::ordinal(p));
    }
    tallies t(e);
    auto N = [&](candidate_id a, candidate_id b) { return static_cast<double>(t.preferring(a, b)); };
    auto Nck = [&](candidate_id c, int j) { return static_cast<double>(t.prefix_count(c, j)); };
    double majority = soft_majority_threshold(n, 0);

    {
      std::vector<double> s(m);
      for (int c = 0; c < m; ++c) s[c] = static_cast<double>(t.borda_score(c));
      auto w = evaluate_rule(t, rule_spec::plain(rule_kind::borda));
      candidate_id d = declare::argmax(s);
      CHECK(std::find(w.begin(), w.end(), d) != w.end());
    }
    {
      auto w = evaluate_rule(t, rule_spec::plain(rule_kind::copeland));
      candidate_id d = declare::copeland_soft(m, N, majority);
      CAPTURE(m, n, iter);
      CHECK(std::find(w.begin(), w.end(), d) != w.end());
    }
    {
      auto w = evaluate_rule(t, rule_spec::plain(rule_kind::cup));
      candidate_id d = declare::cup_walk(m, cup_tree::balanced(m), N);
      CHECK(std::find(w.begin(), w.end(), d) != w.end());
    }
    {
      auto w = evaluate_rule(t, rule_spec::plain(rule_kind::bucklin));
      candidate_id d = declare::bucklin_soft(m, Nck, majority);
      CAPTURE(m, n, iter);
      CHECK(std::find(w.begin(), w.end(), d) != w.end());
    }
    {
      auto w = evaluate_rule(t, rule_spec::plain(rule_kind::runoff));
      std::vector<double> plur(m);
      for (int c = 0; c < m; ++c) plur[c] = static_cast<double>(t.plurality_score(c));
      candidate_id d = declare::runoff_pick(m, plur, N);
      CHECK(std::find(w.begin(), w.end(), d) != w.end());
    }
    {
      auto w = evaluate_rule(t, rule_spec::plain(rule_kind::condorcet));
      candidate_id d = declare::copeland_soft(m, N, majority);
      CHECK(std::find(w.begin(), w.end(), d) != w.end());
    }
  }
}

TEST_CASE("topological contest order obeys the pairs and detects cycles") {
  auto order = topological_contest_order(4, {{0, 1}, {0, 2}, {1, 3}});
  auto pos = [&](candidate_id c) {
    return std::find(order.begin(), order.end(), c) - order.begin();
  };
  CHECK(pos(0) == 0);
  CHECK(pos(1) < pos(3));
  CHECK_THROWS_AS(topological_contest_order(2, {{0, 1}, {1, 0}}), dvs_error);
}

TEST_CASE("topological order of a full bracket outcome") {
  // winners: 0 over 1, 2 over 3, 0 over 2
  auto order = topological_contest_order(4, {{0, 1}, {2, 3}, {0, 2}});
  auto pos = [&](candidate_id c) {
    return std::find(order.begin(), order.end(), c) - order.begin();
  };
  CHECK(pos(0) < pos(1));
  CHECK(pos(0) < pos(2));
  CHECK(pos(2) < pos(3));
}

TEST_CASE("cup static exchanges two pairs in round one and one pair in round two") {
  generator_spec gen;
  gen.kind = generator_kind::uniform_impartial;
  gen.n = 64;
  gen.m = 4;
  gen.ballots = ballot_kind::ordinal;
  gen.seed = 77;
  auto events = generate(gen);
  assignment_policy ap{assignment_kind::round_robin, 2, 1};
  assign_sites(events, ap);
  tracker_config cfg;
  cfg.rule = rule_spec::plain(rule_kind::cup);
  cfg.tech = technique::checkpoint;
  cfg.eps = 0.2;
  cfg.k = 2;
  cfg.m = 4;
  auto tr = run_stream(events, make_tracker_family(cfg), {64}, 5, 2);
  REQUIRE(tr.checkpoint_count >= 1);
  REQUIRE(tr.declarations.size() == 1);
  CHECK(tr.declarations.front().declared >= 0);
  CHECK(tr.declarations.front().declared < 4);
  // polls to one site per checkpoint: exact-n (1 bit), round 1 listing two
  // pairs (2 * 2 * log m = 8 bits), round 2 listing one pair (4 bits)
  std::vector<long long> poll_bits;
  for (const auto& msg : tr.messages)
    if (msg.tag == msg_tag::poll && msg.site == 0) poll_bits.push_back(msg.bits);
  REQUIRE(poll_bits.size() == 3u * static_cast<std::size_t>(tr.checkpoint_count));
  for (std::size_t c = 0; c < poll_bits.size(); c += 3) {
    CHECK(poll_bits[c] == 1);
    CHECK(poll_bits[c + 1] == 8);
    CHECK(poll_bits[c + 2] == 4);
  }
}

TEST_CASE("runoff hybrid at m=2 reduces to the exact pairwise majority") {
  std::vector<stream_event> events;
  long long t = 1;
  // 7 votes a>b, 5 votes b>a interleaved over 2 sites
  for (int i = 0; i < 7; ++i) events.push_back({t++, i % 2, ballot::ordinal({0, 1})});
  for (int i = 0; i < 5; ++i) events.push_back({t++, i % 2, ballot::ordinal({1, 0})});
  tracker_config cfg;
  cfg.rule = rule_spec::plain(rule_kind::runoff);
  cfg.tech = technique::hybrid;
  cfg.eps = 0.3;
  cfg.k = 2;
  cfg.m = 2;
  auto tr = run_stream(events, make_tracker_family(cfg), {12}, 3, 2);
  REQUIRE(tr.declarations.size() == 1);
  CHECK(tr.declarations.front().declared == 0);
}

TEST_CASE("runoff hybrid declares the head-to-head winner of the top two") {
  // a and b lead on plurality; a beats b head-to-head; c is padding
  std::vector<stream_event> events;
  long long t = 1;
  for (int i = 0; i < 10; ++i) events.push_back({t++, i % 2, ballot::ordinal({0, 1, 2})});
  for (int i = 0; i < 9; ++i) events.push_back({t++, i % 2, ballot::ordinal({1, 0, 2})});
  for (int i = 0; i < 3; ++i) events.push_back({t++, i % 2, ballot::ordinal({2, 0, 1})});
  tracker_config cfg;
  cfg.rule = rule_spec::plain(rule_kind::runoff);
  cfg.tech = technique::hybrid;
  cfg.eps = 0.2;
  cfg.k = 2;
  cfg.m = 3;
  auto tr = run_stream(events, make_tracker_family(cfg), {11, 22}, 3, 2);
  REQUIRE(tr.declarations.size() == 2);
  CHECK(tr.declarations.back().declared == 0);
  // per checkpoint the exchange beyond the tracker is the 2k-value poll
  long long polls = 0;
  for (const auto& msg : tr.messages)
    if (msg.tag == msg_tag::poll) ++polls;
  CHECK(polls == 2 * tr.checkpoint_count);
}

TEST_CASE("invalid rule-technique cells are rejected") {
  tracker_config cfg;
  cfg.rule = rule_spec::plain(rule_kind::borda);
  cfg.tech = technique::hybrid;
  cfg.k = 1;
  cfg.m = 3;
  CHECK_THROWS_AS(make_tracker_family(cfg), dvs_error);
  cfg.rule = rule_spec::plain(rule_kind::runoff);
  cfg.tech = technique::checkpoint;
  CHECK_THROWS_AS(make_tracker_family(cfg), dvs_error);
}

TEST_CASE("sampling tracker with a full pool matches exact winners") {
  // pool target far above n: the sample is the whole election
  generator_spec gen;
  gen.kind = generator_kind::planted_winner;
  gen.margin = 0.4;
  gen.n = 300;
  gen.m = 4;
  gen.ballots = ballot_kind::ordinal;
  gen.seed = 15;
  auto events = generate(gen);
  assignment_policy ap{assignment_kind::round_robin, 4, 2};
  assign_sites(events, ap);
  for (rule_kind r : {rule_kind::borda, rule_kind::copeland, rule_kind::bucklin,
                      rule_kind::runoff, rule_kind::cup}) {
    tracker_config cfg;
    cfg.rule = rule_spec::plain(r);
    cfg.tech = technique::sampling;
    cfg.eps = 0.1;
    cfg.delta = 0.1;
    cfg.k = 4;
    cfg.m = 4;
    auto tr = run_stream(events, make_tracker_family(cfg), {300}, 10, 4);
    REQUIRE(tr.declarations.size() == 1);
    CAPTURE(to_string(r));
    CHECK(tr.declarations.front().declared == 0);  // planted winner dominates
  }
}
