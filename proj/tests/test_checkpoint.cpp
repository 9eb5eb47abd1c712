#include <catch2/catch_amalgamated.hpp>

#include "dvs/experiment.hpp"

using namespace dvs;

TEST_CASE("trigger fires index 0 as soon as the estimate reaches one") {
  checkpoint_trigger t(0.1);
  CHECK_FALSE(t.should_fire(0ll).has_value());
  auto fired = t.should_fire(1ll);
  REQUIRE(fired);
  CHECK(*fired == 0);
}

TEST_CASE("a jump across several thresholds fires once with the largest index") {
  checkpoint_trigger t(0.1);
  REQUIRE(t.should_fire(1.0).has_value());
  auto fired = t.should_fire(1.21);  // crosses 1.1 and 1.21
  REQUIRE(fired);
  CHECK(*fired == 2);
  CHECK(t.fired_count() == 2);
}

TEST_CASE("a static estimate never fires again") {
  checkpoint_trigger t(0.1);
  REQUIRE(t.should_fire(5ll).has_value());
  CHECK_FALSE(t.should_fire(5ll).has_value());
  CHECK_FALSE(t.should_fire(5ll).has_value());
}

TEST_CASE("rounding to a multiple is half-up at midpoints") {
  CHECK(round_to_multiple(3, 2) == 4);
  CHECK(round_to_multiple(5, 2) == 6);
  CHECK(round_to_multiple(1, 2) == 2);
  CHECK(round_to_multiple(4, 2) == 4);
  CHECK(round_to_multiple(7, 3) == 6);
  CHECK(round_to_multiple(8, 3) == 9);
  CHECK(round_to_multiple(11, 1) == 11);
}

namespace {

transcript run_plurality_checkpoint(const std::vector<stream_event>& events, int k, double eps,
                                    const std::vector<long long>& queries) {
  tracker_config cfg;
  cfg.rule = rule_spec::plain(rule_kind::plurality);
  cfg.tech = technique::checkpoint;
  cfg.eps = eps;
  cfg.k = k;
  cfg.m = 2;
  return run_stream(events, make_tracker_family(cfg), queries, 21, k);
}

}  // namespace

TEST_CASE("two-site plurality static declares the true leader") {
  // site0: a,a,a,b   site1: b,b,b,b,b  -> a: 3, b: 6
  std::vector<stream_event> events;
  long long t = 1;
  for (int i = 0; i < 3; ++i) events.push_back({t++, 0, ballot::approval({0})});
  events.push_back({t++, 0, ballot::approval({1})});
  for (int i = 0; i < 5; ++i) events.push_back({t++, 1, ballot::approval({1})});
  auto tr = run_plurality_checkpoint(events, 2, 0.4, {9});
  REQUIRE(tr.declarations.size() == 1);
  CHECK(tr.declarations.front().declared == 1);
  CHECK(tr.checkpoint_count >= 1);
}

TEST_CASE("single site with unit granularity matches the exact winner") {
  generator_spec gen;
  gen.kind = generator_kind::uniform_impartial;
  gen.n = 200;
  gen.m = 4;
  gen.ballots = ballot_kind::ordinal;
  gen.seed = 3;
  auto events = generate(gen);  // all on site 0
  for (rule_kind r : {rule_kind::borda, rule_kind::copeland, rule_kind::cup, rule_kind::bucklin,
                      rule_kind::condorcet}) {
    tracker_config cfg;
    cfg.rule = rule_spec::plain(r);
    cfg.tech = technique::checkpoint;
    cfg.eps = 0.1;
    cfg.k = 1;
    cfg.m = 4;
    auto tr = run_stream(events, make_tracker_family(cfg), {200}, 9, 1);
    REQUIRE(tr.declarations.size() == 1);
    // the declared candidate was an exact co-winner at the last checkpoint;
    // with eps/4 slack it must still be an eps-winner of the full prefix
    election e = election_prefix(events, 4, ballot_kind::ordinal, 200);
    auto w = is_eps_winner_witness(e, tr.declarations.front().declared, 0.1, cfg.rule);
    CAPTURE(to_string(r));
    CHECK(w.yes());
  }
}

TEST_CASE("checkpoint count respects the closed-form bound") {
  generator_spec gen;
  gen.kind = generator_kind::uniform_impartial;
  gen.n = 4096;
  gen.m = 2;
  gen.ballots = ballot_kind::approval;
  gen.approval_t = 1;
  gen.seed = 8;
  auto events = generate(gen);
  assignment_policy ap{assignment_kind::round_robin, 4, 1};
  assign_sites(events, ap);
  double eps = 0.1;
  auto tr = run_plurality_checkpoint(events, 4, eps, {4096});
  double lambda = eps / 12.0;
  double bound = 1.0 + std::log(1.1 * 4096.0) / std::log(1.0 + lambda);
  CHECK(tr.checkpoint_count >= 1);
  CHECK(static_cast<double>(tr.checkpoint_count) <= bound);
}

TEST_CASE("stale declarations stay eps-winners between checkpoints") {
  // a,a,b,a then one more b inside the same window: a must survive the audit
  std::vector<stream_event> events = {{1, 0, ballot::approval({0})},
                                      {2, 0, ballot::approval({0})},
                                      {3, 1, ballot::approval({1})},
                                      {4, 2, ballot::approval({0})},
                                      {5, 2, ballot::approval({1})}};
  auto tr = run_plurality_checkpoint(events, 3, 0.5, {4, 5});
  transcript_meta meta{2, ballot_kind::approval, rule_kind::plurality, 1, 0.5, 3};
  auto summary = audit_transcript(tr, meta, oracle_mode::both);
  CHECK(summary.queries == 2);
  CHECK(summary.failures == 0);
  CHECK(summary.unknowns == 0);
}

TEST_CASE("query exactly at a checkpoint passes the audit") {
  std::vector<stream_event> events;
  for (long long t = 1; t <= 64; ++t)
    events.push_back({t, static_cast<int>(t % 2), ballot::approval({t % 3 == 0 ? 1 : 0})});
  auto tr = run_plurality_checkpoint(events, 2, 0.25, {1, 2, 4, 8, 16, 32, 64});
  transcript_meta meta{2, ballot_kind::approval, rule_kind::plurality, 1, 0.25, 2};
  auto summary = audit_transcript(tr, meta, oracle_mode::both);
  CHECK(summary.failures == 0);
}
