#include <catch2/catch_amalgamated.hpp>

#include "dvs/trackers.hpp"
#include "dvs/transcript_io.hpp"

using namespace dvs;

namespace {

std::vector<stream_event> approval_stream(const std::vector<std::pair<int, candidate_id>>& seq) {
  std::vector<stream_event> out;
  long long t = 1;
  for (auto [site, c] : seq) out.push_back({t++, site, ballot::approval({c})});
  return out;
}

}  // namespace

TEST_CASE("null protocol moves no bits and answers the sentinel") {
  std::vector<stream_event> events;
  for (long long t = 1; t <= 100; ++t)
    events.push_back({t, static_cast<int>(t % 3), ballot::approval({0})});
  auto tr = run_stream(events, make_null_protocol(3), {1, 64, 100}, 7, 3);
  CHECK(tr.ledger.total_bits == 0);
  CHECK(tr.ledger.message_count == 0);
  REQUIRE(tr.declarations.size() == 3);
  for (const auto& d : tr.declarations) CHECK(d.declared == no_winner);
}

TEST_CASE("naive protocol pays exactly n * ceil(log2(m!)) bits for ordinal streams") {
  const int m = 5, k = 2;
  const long long n = 40;
  std::vector<stream_event> events;
  std::vector<candidate_id> perm = {3, 1, 4, 0, 2};
  for (long long t = 1; t <= n; ++t)
    events.push_back({t, static_cast<int>(t % k), ballot::ordinal(perm)});
  auto tr = run_stream(events, make_naive_protocol(rule_spec::plain(rule_kind::borda), m, k), {n},
                       1, k);
  CHECK(tr.ledger.total_bits == n * ceil_log2_factorial(m));
  CHECK(tr.declarations.back().declared == 3);
}

TEST_CASE("ceil_log2_factorial spot values") {
  CHECK(ceil_log2_factorial(1) == 0);
  CHECK(ceil_log2_factorial(2) == 1);   // 2! = 2
  CHECK(ceil_log2_factorial(3) == 3);   // 6 -> 3 bits
  CHECK(ceil_log2_factorial(5) == 7);   // 120 -> 7 bits
  CHECK(ceil_log2_factorial(8) == 16);  // 40320 -> 16 bits
}

TEST_CASE("word conversion is a ceiling over log2(n_ref)-bit words") {
  comm_ledger l(1);
  l.charge(0, direction::up, 5);
  l.charge(0, direction::up, 5);
  l.charge(0, direction::down, 5);
  CHECK(l.total_bits == 15);
  comm_ledger big(1);
  big.charge(0, direction::up, 140);
  CHECK(big.words(1024) == 14);
  comm_ledger one(1);
  one.charge(0, direction::up, 1);
  CHECK(one.words(2) == 1);
}

TEST_CASE("zero-size payloads are rejected") {
  comm_ledger l(1);
  CHECK_THROWS_AS(l.charge(0, direction::up, 0), dvs_error);
}

TEST_CASE("replaying the same events and seed yields identical transcripts") {
  generator_spec gen;
  gen.kind = generator_kind::uniform_impartial;
  gen.n = 400;
  gen.m = 4;
  gen.ballots = ballot_kind::approval;
  gen.approval_t = 1;
  gen.seed = 11;
  auto events = generate(gen);
  assignment_policy ap{assignment_kind::round_robin, 4, 1};
  assign_sites(events, ap);

  tracker_config cfg;
  cfg.rule = rule_spec::plain(rule_kind::plurality);
  cfg.tech = technique::frequency;
  cfg.mode = freq_mode::randomized;
  cfg.eps = 0.2;
  cfg.k = 4;
  cfg.m = 4;

  auto t1 = run_stream(events, make_tracker_family(cfg), {64, 400}, 99, 4);
  auto t2 = run_stream(events, make_tracker_family(cfg), {64, 400}, 99, 4);
  CHECK(t1.ledger.total_bits == t2.ledger.total_bits);
  CHECK(t1.messages.size() == t2.messages.size());
  REQUIRE(t1.declarations.size() == t2.declarations.size());
  for (std::size_t i = 0; i < t1.declarations.size(); ++i)
    CHECK(t1.declarations[i].declared == t2.declarations[i].declared);
}

TEST_CASE("queries are free and consecutive queries agree") {
  auto events = approval_stream({{0, 0}, {0, 0}, {1, 1}, {2, 0}});
  tracker_config cfg;
  cfg.rule = rule_spec::plain(rule_kind::plurality);
  cfg.tech = technique::frequency;
  cfg.eps = 0.5;
  cfg.k = 3;
  cfg.m = 2;

  auto few = run_stream(events, make_tracker_family(cfg), {4}, 5, 3);
  auto many = run_stream(events, make_tracker_family(cfg), {1, 2, 3, 4}, 5, 3);
  CHECK(few.ledger.total_bits == many.ledger.total_bits);

  simulation sim(make_tracker_family(cfg), 3, 5);
  for (const auto& ev : events) sim.step(ev);
  CHECK(sim.query(4) == sim.query(4));
}

TEST_CASE("table-1 stream declares a at t=4 under the plurality tracker") {
  // sites S1,S1,S2,S3,S3,S2,S2 with votes a,a,b,a,a,b,b
  auto events = approval_stream({{0, 0}, {0, 0}, {1, 1}, {2, 0}, {2, 0}, {1, 1}, {1, 1}});
  tracker_config cfg;
  cfg.rule = rule_spec::plain(rule_kind::plurality);
  cfg.tech = technique::frequency;
  cfg.eps = 0.5;
  cfg.k = 3;
  cfg.m = 2;
  auto tr = run_stream(events, make_tracker_family(cfg), {4}, 5, 3);
  REQUIRE(tr.declarations.size() == 1);
  CHECK(tr.declarations.front().declared == 0);
}

TEST_CASE("before the first ballot the center answers the sentinel") {
  tracker_config cfg;
  cfg.rule = rule_spec::plain(rule_kind::plurality);
  cfg.tech = technique::frequency;
  cfg.k = 1;
  cfg.m = 2;
  simulation sim(make_tracker_family(cfg), 1, 3);
  CHECK(sim.query(0) == no_winner);
  sim.step({1, 0, ballot::approval({1})});
  CHECK(sim.query(1) == 1);
}

TEST_CASE("protocol violations are detected") {
  struct chatty_center : center_endpoint {
    void on_message(int, const message&, net_context& net) override {
      net.send_to_center({"x", {}, 1});  // center pretending to be a site
    }
    candidate_id on_query() const override { return 0; }
  };
  struct gossiping_site : site_endpoint {
    void on_ballot(const ballot&, net_context& net) override {
      net.send_to_site(0, {"x", {}, 1});  // site-to-site is not a link
    }
  };
  struct reporting_site : site_endpoint {
    void on_ballot(const ballot&, net_context& net) override {
      net.send_to_center({"r", {}, 1});
    }
  };

  protocol_family bad_site;
  bad_site.center = std::make_unique<null_center>();
  bad_site.sites.push_back(std::make_unique<gossiping_site>());
  simulation s1(std::move(bad_site), 1, 1);
  CHECK_THROWS_AS(s1.step({1, 0, ballot::approval({0})}), protocol_violation_error);

  protocol_family bad_center;
  bad_center.center = std::make_unique<chatty_center>();
  bad_center.sites.push_back(std::make_unique<reporting_site>());
  simulation s2(std::move(bad_center), 1, 1);
  CHECK_THROWS_AS(s2.step({1, 0, ballot::approval({0})}), protocol_violation_error);
}

TEST_CASE("transcripts round-trip through jsonl") {
  auto events = approval_stream({{0, 0}, {1, 1}, {0, 0}});
  tracker_config cfg;
  cfg.rule = rule_spec::plain(rule_kind::plurality);
  cfg.tech = technique::frequency;
  cfg.eps = 0.5;
  cfg.k = 2;
  cfg.m = 2;
  auto tr = run_stream(events, make_tracker_family(cfg), {2, 3}, 5, 2);
  transcript_meta meta{2, ballot_kind::approval, rule_kind::plurality, 1, 0.5, 2};
  std::stringstream ss;
  write_transcript(ss, tr, meta);
  auto back = read_transcript(ss);
  CHECK(back.meta.m == 2);
  CHECK(back.meta.rule == rule_kind::plurality);
  CHECK(back.tr.events.size() == tr.events.size());
  CHECK(back.tr.declarations.size() == tr.declarations.size());
  CHECK(back.tr.messages.size() == tr.messages.size());
}
