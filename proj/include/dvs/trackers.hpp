#pragma once

#include <map>

#include "dvs/checkpoint.hpp"
#include "dvs/freq_tracker.hpp"
#include "dvs/harness.hpp"
#include "dvs/reduction.hpp"
#include "dvs/sample_size.hpp"
#include "dvs/sampler.hpp"

namespace dvs {

enum class technique { frequency, checkpoint, sampling, hybrid };

inline const char* to_string(technique t) {
  switch (t) {
    case technique::frequency: return "frequency";
    case technique::checkpoint: return "checkpoint";
    case technique::sampling: return "sampling";
    case technique::hybrid: return "hybrid";
  }
  return "?";
}

inline std::optional<technique> technique_from_string(const std::string& s) {
  for (technique t :
       {technique::frequency, technique::checkpoint, technique::sampling, technique::hybrid})
    if (s == to_string(t)) return t;
  return std::nullopt;
}

enum class freq_mode { deterministic, randomized };

struct tracker_config {
  rule_spec rule;
  technique tech = technique::frequency;
  freq_mode mode = freq_mode::deterministic;  // meaningful for frequency only
  double eps = 0.1;
  double delta = 0.1;
  int k = 1;
  int m = 2;

  bool randomized() const {
    return tech == technique::sampling ||
           (tech == technique::frequency && mode == freq_mode::randomized);
  }
};

// hybrid is the runoff checkpoint variant; every other rule supports the
// three stock techniques (plurality rides the t=1 machinery where needed)
inline bool valid_cell(rule_kind r, technique t) {
  if (r == rule_kind::runoff) return t != technique::checkpoint;
  return t != technique::hybrid;
}

// --- declaration logic shared by the estimated regimes -----------------------

namespace declare {

inline candidate_id argmax(const std::vector<double>& score) {
  candidate_id best = 0;
  for (candidate_id c = 1; c < static_cast<int>(score.size()); ++c)
    if (score[c] > score[best]) best = c;  // ties keep the lowest id
  return best;
}

// N(a,b) estimates the number of voters preferring a to b.
template <typename PairFn>
candidate_id copeland_soft(int m, PairFn&& N, double threshold) {
  candidate_id best = 0;
  int best_score = -1;
  for (candidate_id c = 0; c < m; ++c) {
    int sc = 0;
    for (candidate_id d = 0; d < m; ++d)
      if (d != c && N(c, d) >= threshold) ++sc;
    if (sc > best_score) { best_score = sc; best = c; }
  }
  return best;
}

template <typename PairFn>
candidate_id cup_walk(int m, const cup_tree& tree, PairFn&& N) {
  std::vector<candidate_id> winner(tree.nodes.size());
  for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
    const auto& nd = tree.nodes[v];
    if (nd.left < 0) { winner[v] = nd.leaf; continue; }
    candidate_id a = winner[nd.left], b = winner[nd.right];
    if (a > b) std::swap(a, b);  // exact ties resolve toward the lower id
    winner[v] = N(a, b) >= N(b, a) ? a : b;
  }
  return winner[tree.root];
}

// Nck(c, j) estimates the voters ranking c within the top j positions.
template <typename PrefixFn>
candidate_id bucklin_soft(int m, PrefixFn&& Nck, double threshold) {
  for (int j = 1; j <= m; ++j)
    for (candidate_id c = 0; c < m; ++c)
      if (Nck(c, j) >= threshold) return c;
  return 0;  // unreachable: every candidate reaches n at j = m
}

// pick the top two by estimated plurality score, then their head-to-head
template <typename PairFn>
candidate_id runoff_pick(int m, const std::vector<double>& plurality, PairFn&& N) {
  candidate_id c1 = 0, c2 = 1;
  if (plurality[1] > plurality[0]) { c1 = 1; c2 = 0; }
  for (candidate_id c = 2; c < m; ++c) {
    if (plurality[c] > plurality[c1]) { c2 = c1; c1 = c; }
    else if (plurality[c] > plurality[c2]) c2 = c;
  }
  double ab = N(c1, c2), ba = N(c2, c1);
  if (ab == ba) return std::min(c1, c2);
  return ab > ba ? c1 : c2;
}

}  // namespace declare

// Frequency precision eps' for each rule's reduced stream, relative to the
// reduced stream length.
inline double reduction_precision(const tracker_config& cfg) {
  const double eps = cfg.eps;
  const int m = cfg.m;
  switch (cfg.rule.kind) {
    case rule_kind::plurality: return eps / 2;
    case rule_kind::t_approval: return eps / (2.0 * cfg.rule.t);
    case rule_kind::approval: return eps / (2.0 * m);
    case rule_kind::borda: return eps / (4.0 * m);
    case rule_kind::copeland:
    case rule_kind::condorcet:
    case rule_kind::cup: return eps / (static_cast<double>(m) * m);
    case rule_kind::bucklin: {
      int mp = pow2_ceil(m);
      double lg = static_cast<double>(log2_exact(mp));
      return eps / (2.0 * mp * std::max(1.0, lg * lg));
    }
    case rule_kind::runoff: throw dvs_error("runoff uses two components");
  }
  throw dvs_error("unknown rule");
}

// Majority-threshold declarations need the stream-length estimate within an
// O(eps) band of n rather than the generic factor two.
inline bool needs_sharp_count(rule_kind r) {
  return r == rule_kind::copeland || r == rule_kind::condorcet || r == rule_kind::bucklin;
}

namespace msg_tag {
inline constexpr const char* count = "count";      // embedded count-tracker report
inline constexpr const char* item = "item";        // frequency item report
inline constexpr const char* nhat = "nhat";        // count estimate broadcast
inline constexpr const char* sample = "sample";    // sampled ballot forward
inline constexpr const char* round = "round";      // sampler round broadcast
inline constexpr const char* poll = "poll";        // checkpoint poll
inline constexpr const char* resp = "resp";        // checkpoint poll response
inline constexpr const char* bcast_n = "bcast_n";  // checkpoint exact-n broadcast
}  // namespace msg_tag

// =============================================================================
// frequency family
// =============================================================================

// One reduced stream fed into one frequency tracker. Runoff runs two
// components (plurality scores and ordered pairs); every other rule runs one.
struct freq_component_spec {
  reduction_kind reduce = reduction_kind::candidate_scores;
  double eps_prime = 0.1;
  double count_lambda = 0.5;
};

inline std::vector<freq_component_spec> freq_components(const tracker_config& cfg) {
  if (cfg.rule.kind == rule_kind::runoff) {
    const double m2 = static_cast<double>(cfg.m) * cfg.m;
    return {{reduction_kind::candidate_scores, cfg.eps / 12.0, 0.5},
            {reduction_kind::ordered_pairs, cfg.eps / 3.0 / m2, 0.5}};
  }
  freq_component_spec c;
  c.reduce = reduction_for(cfg.rule.kind);
  c.eps_prime = reduction_precision(cfg);
  c.count_lambda = needs_sharp_count(cfg.rule.kind) ? std::min(0.5, cfg.eps / 8.0) : 0.5;
  return {c};
}

inline std::vector<reduction_item> reduce_by_kind(reduction_kind kind, const ballot& b, int m) {
  switch (kind) {
    case reduction_kind::candidate_scores:
      if (b.kind == ballot_kind::ordinal) return {reduction_item::cand(b.ids.front())};
      return reduce_ballot(rule_kind::approval, b, m);
    case reduction_kind::borda_scores: return reduce_ballot(rule_kind::borda, b, m);
    case reduction_kind::ordered_pairs: return reduce_ballot(rule_kind::copeland, b, m);
    case reduction_kind::bucklin_blocks: return reduce_ballot(rule_kind::bucklin, b, m);
  }
  throw dvs_error("unknown reduction");
}

inline rule_kind universe_rule_for(reduction_kind k) {
  switch (k) {
    case reduction_kind::candidate_scores: return rule_kind::plurality;
    case reduction_kind::borda_scores: return rule_kind::borda;
    case reduction_kind::ordered_pairs: return rule_kind::copeland;
    case reduction_kind::bucklin_blocks: return rule_kind::bucklin;
  }
  return rule_kind::plurality;
}

class freq_site_endpoint : public site_endpoint {
 public:
  explicit freq_site_endpoint(const tracker_config& cfg) : cfg_(cfg) {
    for (const auto& spec : freq_components(cfg)) {
      item_universe u(universe_rule_for(spec.reduce), cfg.m);
      freq_tracker_params p;
      p.eps = spec.eps_prime;
      p.k = cfg.k;
      p.universe = u.size();
      p.count_lambda = spec.count_lambda;
      p.randomized = cfg.tech == technique::frequency && cfg.mode == freq_mode::randomized;
      comps_.push_back({spec.reduce, u, freq_tracker_site(p),
                        std::max<long long>(1, ceil_log2(u.size()))});
    }
  }

  void on_ballot(const ballot& b, net_context& net) override {
    rng coin = net.endpoint_rng();
    const long long comp_bit = comps_.size() > 1 ? 1 : 0;
    for (std::size_t ci = 0; ci < comps_.size(); ++ci) {
      auto& comp = comps_[ci];
      for (const reduction_item& it : reduce_by_kind(comp.reduce, b, cfg_.m)) {
        auto out = comp.site.on_item(comp.universe.id_of(it), &coin);
        if (out.count_report)
          net.send_to_center({msg_tag::count,
                              {static_cast<long long>(ci), *out.count_report},
                              comp_bit + value_bits(*out.count_report)});
        for (auto [item, cnt] : out.item_reports)
          net.send_to_center({msg_tag::item,
                              {static_cast<long long>(ci), item, cnt},
                              comp_bit + comp.id_bits + value_bits(cnt)});
      }
    }
  }

  void on_message(const message& msg, net_context&) override {
    if (msg.tag == msg_tag::nhat) comps_[msg.values.at(0)].site.on_nhat_broadcast(msg.values.at(1));
  }

 private:
  struct comp {
    reduction_kind reduce;
    item_universe universe;
    freq_tracker_site site;
    long long id_bits;
  };

  tracker_config cfg_;
  std::vector<comp> comps_;
};

class freq_center_endpoint : public center_endpoint {
 public:
  explicit freq_center_endpoint(const tracker_config& cfg) : cfg_(cfg) {
    for (const auto& spec : freq_components(cfg)) {
      item_universe u(universe_rule_for(spec.reduce), cfg.m);
      freq_tracker_params p;
      p.eps = spec.eps_prime;
      p.k = cfg.k;
      p.universe = u.size();
      p.count_lambda = spec.count_lambda;
      comps_.push_back({spec.reduce, u, freq_tracker_center(p)});
    }
  }

  void on_message(int site, const message& msg, net_context& net) override {
    if (msg.tag == msg_tag::count) {
      auto& comp = comps_[msg.values.at(0)];
      comp.center.on_count_report(site, msg.values.at(1));
      if (auto nh = comp.center.pending_broadcast()) {
        comp.center.broadcast_sent(*nh);
        for (int s = 0; s < cfg_.k; ++s)
          net.send_to_site(s, {msg_tag::nhat, {msg.values.at(0), *nh}, value_bits(*nh)});
      }
    } else if (msg.tag == msg_tag::item) {
      comps_[msg.values.at(0)].center.on_item_report(site, msg.values.at(1), msg.values.at(2));
    }
  }

  candidate_id on_query() const override {
    const int m = cfg_.m;
    const auto& c0 = comps_[0];
    if (c0.center.n_hat() <= 0) return no_winner;
    auto pair_est = [this](const comp& c) {
      return [this, &c](candidate_id a, candidate_id b) {
        return static_cast<double>(c.center.estimate(c.universe.pair_id(a, b)));
      };
    };
    // N'(c, j) by the aligned-block decomposition of the prefix [1..j]
    auto bucklin_est = [this](const comp& c) {
      return [this, &c](candidate_id cand, int j) {
        double total = 0;
        for (auto [i, block] : bucklin_prefix_blocks(c.universe.levels, j))
          total += static_cast<double>(c.center.estimate(c.universe.bucklin_id(cand, i, block)));
        return total;
      };
    };
    switch (cfg_.rule.kind) {
      case rule_kind::plurality:
      case rule_kind::t_approval:
      case rule_kind::approval:
      case rule_kind::borda: {
        std::vector<double> s(m);
        for (candidate_id c = 0; c < m; ++c)
          s[c] = static_cast<double>(c0.center.estimate(c));
        return declare::argmax(s);
      }
      case rule_kind::copeland:
      case rule_kind::condorcet: {
        auto [nh, qh] = original_scale(c0);
        double thr = soft_majority_threshold(nh, qh);
        return declare::copeland_soft(m, pair_est(c0), thr);
      }
      case rule_kind::cup: {
        const cup_tree tree = cfg_.rule.tree.empty() ? cup_tree::balanced(m) : cfg_.rule.tree;
        return declare::cup_walk(m, tree, pair_est(c0));
      }
      case rule_kind::bucklin: {
        auto [nh, qh] = original_scale(c0);
        double thr = soft_majority_threshold(nh, qh);
        return declare::bucklin_soft(m, bucklin_est(c0), thr);
      }
      case rule_kind::runoff: {
        std::vector<double> s(m);
        for (candidate_id c = 0; c < m; ++c)
          s[c] = static_cast<double>(c0.center.estimate(c));
        return declare::runoff_pick(m, s, pair_est(comps_[1]));
      }
    }
    return no_winner;
  }

 private:
  struct comp {
    reduction_kind reduce;
    item_universe universe;
    freq_tracker_center center;
  };

  // n_hat and budget translated back from the reduced stream to ballots
  std::pair<long long, long long> original_scale(const comp& c) const {
    long long per = c.universe.items_per_ballot(cfg_.rule.kind, cfg_.rule.t);
    long long nh = per > 0 ? c.center.n_hat() / per : c.center.n_hat();
    long long qh = static_cast<long long>(std::floor(cfg_.eps * static_cast<double>(nh)));
    return {nh, qh};
  }

  tracker_config cfg_;
  std::vector<comp> comps_;
};

// =============================================================================
// checkpoint family
// =============================================================================

namespace poll_code {
inline constexpr long long exact_n = 0;
inline constexpr long long scores = 1;
inline constexpr long long all_pairs = 2;
inline constexpr long long cup_pairs = 3;
inline constexpr long long bucklin_prefix = 4;
inline constexpr long long runoff_pair = 5;
}  // namespace poll_code

class checkpoint_site_endpoint : public site_endpoint {
 public:
  explicit checkpoint_site_endpoint(const tracker_config& cfg)
      : cfg_(cfg), counter_(cfg.eps / 12.0),
        local_(cfg.m, required_kind(cfg.rule.kind)) {}

  void on_ballot(const ballot& b, net_context& net) override {
    local_.add(b);
    if (auto rep = counter_.on_arrival())
      net.send_to_center({msg_tag::count, {*rep}, value_bits(*rep)});
  }

  void on_message(const message& msg, net_context& net) override {
    if (msg.tag == msg_tag::bcast_n) {
      exact_n_ = msg.values.at(0);
      return;
    }
    if (msg.tag != msg_tag::poll) return;
    const long long code = msg.values.at(0);
    switch (code) {
      case poll_code::exact_n:
        net.send_to_center({msg_tag::resp, {code, local_.n}, value_bits(local_.n)});
        break;
      case poll_code::scores: {
        const long long max_v = score_bound();
        const long long g = granularity(cfg_.rule.kind == rule_kind::borda ? cfg_.m : 1);
        std::vector<long long> vals = {code};
        for (candidate_id c = 0; c < cfg_.m; ++c) vals.push_back(round_to_multiple(score(c), g));
        net.send_to_center({msg_tag::resp, std::move(vals),
                            cfg_.m * level_bits(max_v, g)});
        break;
      }
      case poll_code::all_pairs: {
        const long long g = granularity(1);
        std::vector<long long> vals = {code};
        for (candidate_id a = 0; a < cfg_.m; ++a)
          for (candidate_id b = a + 1; b < cfg_.m; ++b)
            vals.push_back(round_to_multiple(local_.preferring(a, b), g));
        long long npairs = static_cast<long long>(cfg_.m) * (cfg_.m - 1) / 2;
        net.send_to_center({msg_tag::resp, std::move(vals), npairs * level_bits(score_bound(), g)});
        break;
      }
      case poll_code::cup_pairs: {
        const long long g = granularity(1);
        std::vector<long long> vals = {code};
        long long pairs = (static_cast<long long>(msg.values.size()) - 1) / 2;
        for (long long i = 0; i < pairs; ++i) {
          candidate_id a = static_cast<candidate_id>(msg.values[1 + 2 * i]);
          candidate_id b = static_cast<candidate_id>(msg.values[2 + 2 * i]);
          vals.push_back(round_to_multiple(local_.preferring(a, b), g));
        }
        net.send_to_center({msg_tag::resp, std::move(vals),
                            std::max<long long>(1, pairs * level_bits(score_bound(), g))});
        break;
      }
      case poll_code::bucklin_prefix: {
        const int j = static_cast<int>(msg.values.at(1));
        const long long g = granularity(1);
        std::vector<long long> vals = {code};
        for (candidate_id c = 0; c < cfg_.m; ++c)
          vals.push_back(round_to_multiple(local_.prefix_count(c, j), g));
        net.send_to_center({msg_tag::resp, std::move(vals), cfg_.m * level_bits(score_bound(), g)});
        break;
      }
      case poll_code::runoff_pair: {
        candidate_id a = static_cast<candidate_id>(msg.values.at(1));
        candidate_id b = static_cast<candidate_id>(msg.values.at(2));
        net.send_to_center({msg_tag::resp,
                            {code, local_.preferring(a, b), local_.preferring(b, a)},
                            value_bits(local_.preferring(a, b)) + value_bits(local_.preferring(b, a))});
        break;
      }
      default: throw protocol_violation_error("unknown poll code");
    }
  }

 private:
  double eps_static() const { return cfg_.eps / 4.0; }

  long long granularity(int scale) const {
    return static_granularity(eps_static(), exact_n_, cfg_.k, static_cast<double>(scale));
  }

  long long score_bound() const {
    // per-site scores are bounded by the global count known from phase 0
    long long b = exact_n_ > 0 ? exact_n_ : 1;
    if (cfg_.rule.kind == rule_kind::borda) b *= std::max(1, cfg_.m - 1);
    return b;
  }

  static long long level_bits(long long max_v, long long g) {
    return std::max<long long>(1, ceil_log2(granularity_levels(max_v, g)));
  }

  long long score(candidate_id c) const {
    switch (cfg_.rule.kind) {
      case rule_kind::plurality:
      case rule_kind::t_approval:
      case rule_kind::approval: return local_.approval_score(c);
      case rule_kind::borda: return local_.borda_score(c);
      default: return local_.plurality_score(c);
    }
  }

  tracker_config cfg_;
  count_tracker_site counter_;
  tallies local_;
  long long exact_n_ = 0;
};

class checkpoint_center_endpoint : public center_endpoint {
 public:
  explicit checkpoint_center_endpoint(const tracker_config& cfg)
      : cfg_(cfg), counter_(cfg.k), trigger_(cfg.eps / 12.0),
        tree_(cfg.rule.tree.empty() ? cup_tree::balanced(cfg.m) : cfg.rule.tree) {}

  void on_message(int site, const message& msg, net_context& net) override {
    if (msg.tag == msg_tag::count) {
      counter_.on_report(site, msg.values.at(0));
      if (!exchange_active_ && trigger_.should_fire(counter_.estimate())) start_exchange(net);
      return;
    }
    if (msg.tag != msg_tag::resp) return;
    collected_.push_back(msg.values);
    if (static_cast<int>(collected_.size()) < cfg_.k) return;
    std::vector<std::vector<long long>> batch;
    batch.swap(collected_);
    advance(batch, net);
  }

  candidate_id on_query() const override { return declared_; }
  long long checkpoint_count() const override { return trigger_.fired_count(); }
  long long exact_n() const { return n_; }

 private:
  double eps_static() const { return cfg_.eps / 4.0; }
  long long q_static() const {
    return static_cast<long long>(std::floor(eps_static() * static_cast<double>(n_)));
  }

  void poll_all(net_context& net, std::vector<long long> values, long long bits) {
    for (int s = 0; s < cfg_.k; ++s) net.send_to_site(s, {msg_tag::poll, values, bits});
  }

  void start_exchange(net_context& net) {
    exchange_active_ = true;
    stage_ = stage::exact_n;
    poll_all(net, {poll_code::exact_n}, 1);
  }

  void advance(const std::vector<std::vector<long long>>& batch, net_context& net) {
    switch (stage_) {
      case stage::exact_n: {
        n_ = 0;
        for (const auto& v : batch) n_ += v.at(1);
        for (int s = 0; s < cfg_.k; ++s)
          net.send_to_site(s, {msg_tag::bcast_n, {n_}, value_bits(n_)});
        begin_rule_rounds(net);
        break;
      }
      case stage::scores: {
        std::vector<double> sum(cfg_.m, 0.0);
        for (const auto& v : batch)
          for (candidate_id c = 0; c < cfg_.m; ++c) sum[c] += static_cast<double>(v.at(1 + c));
        declared_ = declare::argmax(sum);
        finish();
        break;
      }
      case stage::all_pairs: {
        pair_sum_.assign(static_cast<std::size_t>(cfg_.m) * cfg_.m, 0.0);
        for (const auto& v : batch) {
          std::size_t idx = 1;
          for (candidate_id a = 0; a < cfg_.m; ++a)
            for (candidate_id b = a + 1; b < cfg_.m; ++b)
              pair_sum_[static_cast<std::size_t>(a) * cfg_.m + b] +=
                  static_cast<double>(v.at(idx++));
        }
        auto N = [this](candidate_id a, candidate_id b) {
          if (a < b) return pair_sum_[static_cast<std::size_t>(a) * cfg_.m + b];
          return static_cast<double>(n_) - pair_sum_[static_cast<std::size_t>(b) * cfg_.m + a];
        };
        double thr = soft_majority_threshold(n_, q_static());
        declared_ = declare::copeland_soft(cfg_.m, N, thr);
        finish();
        break;
      }
      case stage::cup_round: {
        for (auto& [pr, sum] : cup_live_) sum = 0;
        for (const auto& v : batch) {
          std::size_t vi = 1;
          for (auto& [pr, sum] : cup_live_) sum += static_cast<double>(v.at(vi++));
        }
        for (auto& [pr, sum] : cup_live_) {
          // complement derived from the exact n of phase 0
          bool first_wins = sum >= static_cast<double>(n_) - sum;
          cup_winner_[cup_node_of_[pr]] = first_wins ? pr.first : pr.second;
        }
        if (!next_cup_round(net)) {
          declared_ = cup_winner_[tree_.root];
          finish();
        }
        break;
      }
      case stage::bucklin_probe: {
        std::vector<double> sum(cfg_.m, 0.0);
        for (const auto& v : batch)
          for (candidate_id c = 0; c < cfg_.m; ++c) sum[c] += static_cast<double>(v.at(1 + c));
        double thr = soft_majority_threshold(n_, q_static());
        candidate_id found = no_winner;
        for (candidate_id c = 0; c < cfg_.m; ++c)
          if (sum[c] >= thr) { found = c; break; }
        if (found != no_winner) {
          bk_hi_ = bk_probe_;
          bk_hi_candidate_ = found;
        } else {
          bk_lo_ = bk_probe_ + 1;
        }
        if (!next_bucklin_probe(net)) {
          declared_ = bk_hi_candidate_;
          finish();
        }
        break;
      }
      case stage::idle: break;
    }
  }

  void begin_rule_rounds(net_context& net) {
    switch (cfg_.rule.kind) {
      case rule_kind::plurality:
      case rule_kind::t_approval:
      case rule_kind::approval:
      case rule_kind::borda:
        stage_ = stage::scores;
        poll_all(net, {poll_code::scores}, 1);
        break;
      case rule_kind::copeland:
      case rule_kind::condorcet:
        stage_ = stage::all_pairs;
        poll_all(net, {poll_code::all_pairs}, 1);
        break;
      case rule_kind::cup:
        cup_winner_.assign(tree_.nodes.size(), no_winner);
        for (std::size_t v = 0; v < tree_.nodes.size(); ++v)
          if (tree_.nodes[v].left < 0) cup_winner_[v] = tree_.nodes[v].leaf;
        if (!next_cup_round(net)) {
          declared_ = cup_winner_[tree_.root];
          finish();
        }
        break;
      case rule_kind::bucklin:
        bk_lo_ = 1;
        bk_hi_ = cfg_.m;
        bk_hi_candidate_ = no_winner;
        if (!next_bucklin_probe(net)) {
          declared_ = bk_hi_candidate_;
          finish();
        }
        break;
      case rule_kind::runoff: throw dvs_error("runoff uses the hybrid tracker");
    }
  }

  // polls the lowest tree level whose contests are still unresolved
  bool next_cup_round(net_context& net) {
    cup_live_.clear();
    cup_node_of_.clear();
    for (std::size_t v = 0; v < tree_.nodes.size(); ++v) {
      const auto& nd = tree_.nodes[v];
      if (nd.left < 0 || cup_winner_[v] != no_winner) continue;
      if (cup_winner_[nd.left] == no_winner || cup_winner_[nd.right] == no_winner) continue;
      candidate_id a = cup_winner_[nd.left], b = cup_winner_[nd.right];
      if (a > b) std::swap(a, b);
      cup_live_.emplace_back(std::make_pair(a, b), 0.0);
      cup_node_of_[{a, b}] = v;
    }
    if (cup_live_.empty()) return false;
    stage_ = stage::cup_round;
    std::vector<long long> values = {poll_code::cup_pairs};
    for (auto& [pr, sum] : cup_live_) {
      values.push_back(pr.first);
      values.push_back(pr.second);
    }
    long long idb = std::max<long long>(1, ceil_log2(cfg_.m));
    poll_all(net, std::move(values), 2 * idb * static_cast<long long>(cup_live_.size()));
    return true;
  }

  bool next_bucklin_probe(net_context& net) {
    if (bk_lo_ >= bk_hi_ && bk_hi_candidate_ != no_winner) return false;
    if (bk_lo_ >= bk_hi_) bk_probe_ = bk_hi_;  // never-probed upper end
    else bk_probe_ = (bk_lo_ + bk_hi_) / 2;
    stage_ = stage::bucklin_probe;
    poll_all(net, {poll_code::bucklin_prefix, bk_probe_},
             1 + std::max<long long>(1, ceil_log2(cfg_.m)));
    return true;
  }

  void finish() {
    stage_ = stage::idle;
    exchange_active_ = false;
  }

  enum class stage { idle, exact_n, scores, all_pairs, cup_round, bucklin_probe };

  tracker_config cfg_;
  count_tracker_center counter_;
  checkpoint_trigger trigger_;
  cup_tree tree_;
  bool exchange_active_ = false;
  stage stage_ = stage::idle;
  std::vector<std::vector<long long>> collected_;
  candidate_id declared_ = no_winner;
  long long n_ = 0;

  std::vector<double> pair_sum_;
  std::vector<candidate_id> cup_winner_;
  std::vector<std::pair<std::pair<candidate_id, candidate_id>, double>> cup_live_;
  std::map<std::pair<candidate_id, candidate_id>, std::size_t> cup_node_of_;
  long long bk_lo_ = 1, bk_hi_ = 1, bk_probe_ = 1;
  candidate_id bk_hi_candidate_ = no_winner;
};

// =============================================================================
// runoff hybrid: continuous deterministic plurality tracking plus an exact
// head-to-head poll of the current top two at every checkpoint
// =============================================================================

class hybrid_site_endpoint : public site_endpoint {
 public:
  explicit hybrid_site_endpoint(const tracker_config& cfg)
      : cfg_(cfg), counter_(cfg.eps / 12.0), freq_(plurality_params(cfg)),
        local_(cfg.m, ballot_kind::ordinal) {}

  void on_ballot(const ballot& b, net_context& net) override {
    local_.add(b);
    if (auto rep = counter_.on_arrival())
      net.send_to_center({msg_tag::count, {0, *rep}, value_bits(*rep)});
    auto out = freq_.on_item(b.ids.front(), nullptr);
    if (out.count_report)
      net.send_to_center({msg_tag::count, {1, *out.count_report}, value_bits(*out.count_report)});
    for (auto [item, cnt] : out.item_reports)
      net.send_to_center({msg_tag::item,
                          {item, cnt},
                          std::max<long long>(1, ceil_log2(cfg_.m)) + value_bits(cnt)});
  }

  void on_message(const message& msg, net_context& net) override {
    if (msg.tag == msg_tag::nhat) {
      freq_.on_nhat_broadcast(msg.values.at(0));
    } else if (msg.tag == msg_tag::poll && msg.values.at(0) == poll_code::runoff_pair) {
      candidate_id a = static_cast<candidate_id>(msg.values.at(1));
      candidate_id b = static_cast<candidate_id>(msg.values.at(2));
      net.send_to_center(
          {msg_tag::resp,
           {poll_code::runoff_pair, local_.preferring(a, b), local_.preferring(b, a)},
           value_bits(local_.preferring(a, b)) + value_bits(local_.preferring(b, a))});
    }
  }

  static freq_tracker_params plurality_params(const tracker_config& cfg) {
    freq_tracker_params p;
    p.eps = cfg.eps / 12.0;  // static phase needs eps/4-grade top-2 estimates
    p.k = cfg.k;
    p.universe = cfg.m;
    return p;
  }

 private:
  tracker_config cfg_;
  count_tracker_site counter_;
  freq_tracker_site freq_;
  tallies local_;
};

class hybrid_center_endpoint : public center_endpoint {
 public:
  explicit hybrid_center_endpoint(const tracker_config& cfg)
      : cfg_(cfg), counter_(cfg.k), trigger_(cfg.eps / 12.0),
        freq_(hybrid_site_endpoint::plurality_params(cfg)) {}

  void on_message(int site, const message& msg, net_context& net) override {
    if (msg.tag == msg_tag::count) {
      if (msg.values.at(0) == 0) {
        counter_.on_report(site, msg.values.at(1));
        if (!exchange_active_ && trigger_.should_fire(counter_.estimate())) begin_exchange(net);
      } else {
        freq_.on_count_report(site, msg.values.at(1));
        if (auto nh = freq_.pending_broadcast()) {
          freq_.broadcast_sent(*nh);
          for (int s = 0; s < cfg_.k; ++s)
            net.send_to_site(s, {msg_tag::nhat, {*nh}, value_bits(*nh)});
        }
      }
      return;
    }
    if (msg.tag == msg_tag::item) {
      freq_.on_item_report(site, msg.values.at(0), msg.values.at(1));
      return;
    }
    if (msg.tag != msg_tag::resp) return;
    collected_a_ += msg.values.at(1);
    collected_b_ += msg.values.at(2);
    if (++responses_ < cfg_.k) return;
    declared_ = collected_a_ == collected_b_ ? std::min(top1_, top2_)
                                             : (collected_a_ > collected_b_ ? top1_ : top2_);
    exchange_active_ = false;
  }

  candidate_id on_query() const override { return declared_; }
  long long checkpoint_count() const override { return trigger_.fired_count(); }

 private:
  void begin_exchange(net_context& net) {
    exchange_active_ = true;
    responses_ = 0;
    collected_a_ = collected_b_ = 0;
    std::vector<double> s(cfg_.m, 0.0);
    for (candidate_id c = 0; c < cfg_.m; ++c) s[c] = static_cast<double>(freq_.estimate(c));
    top1_ = 0;
    top2_ = 1;
    if (s[1] > s[0]) { top1_ = 1; top2_ = 0; }
    for (candidate_id c = 2; c < cfg_.m; ++c) {
      if (s[c] > s[top1_]) { top2_ = top1_; top1_ = c; }
      else if (s[c] > s[top2_]) top2_ = c;
    }
    long long idb = std::max<long long>(1, ceil_log2(cfg_.m));
    for (int st = 0; st < cfg_.k; ++st)
      net.send_to_site(st, {msg_tag::poll, {poll_code::runoff_pair, top1_, top2_}, 1 + 2 * idb});
  }

  tracker_config cfg_;
  count_tracker_center counter_;
  checkpoint_trigger trigger_;
  freq_tracker_center freq_;
  bool exchange_active_ = false;
  int responses_ = 0;
  long long collected_a_ = 0, collected_b_ = 0;
  candidate_id top1_ = 0, top2_ = 1;
  candidate_id declared_ = no_winner;
};

// =============================================================================
// sampling family
// =============================================================================

class sampling_site_endpoint : public site_endpoint {
 public:
  explicit sampling_site_endpoint(const tracker_config& cfg)
      : cfg_(cfg), counter_(count_lambda(cfg)) {}

  static double count_lambda(const tracker_config& cfg) {
    return needs_sharp_count(cfg.rule.kind) ? std::min(0.5, cfg.eps / 16.0) : 0.5;
  }

  void on_ballot(const ballot& b, net_context& net) override {
    if (auto rep = counter_.on_arrival())
      net.send_to_center({msg_tag::count, {*rep}, value_bits(*rep)});
    rng coin = net.endpoint_rng();
    if (auto level = site_.on_item(coin)) {
      std::vector<long long> values = {static_cast<long long>(*level)};
      for (candidate_id c : b.ids) values.push_back(c);
      net.send_to_center({msg_tag::sample, std::move(values),
                          ballot_bits(b.kind, cfg_.m) + value_bits(*level)});
    }
  }

  void on_message(const message& msg, net_context&) override {
    if (msg.tag == msg_tag::round) site_.on_round_broadcast(static_cast<int>(msg.values.at(0)));
  }

 private:
  tracker_config cfg_;
  count_tracker_site counter_;
  sampler_site<ballot> site_;
};

class sampling_center_endpoint : public center_endpoint {
 public:
  explicit sampling_center_endpoint(const tracker_config& cfg)
      : cfg_(cfg), counter_(cfg.k),
        target_(required_sample_size({cfg.rule.kind, cfg.eps, cfg.delta, cfg.rule.t, cfg.m})),
        pool_(target_),
        kind_(required_kind(cfg.rule.kind)),
        full_(cfg.m, kind_), even_(cfg.m, kind_), odd_(cfg.m, kind_) {}

  void on_message(int site, const message& msg, net_context& net) override {
    if (msg.tag == msg_tag::count) {
      counter_.on_report(site, msg.values.at(0));
      return;
    }
    if (msg.tag != msg_tag::sample) return;
    int level = static_cast<int>(msg.values.at(0));
    std::vector<candidate_id> ids(msg.values.begin() + 1, msg.values.end());
    ballot b{kind_, std::move(ids)};
    std::size_t before = pool_.pool().size();
    auto raised = pool_.on_item(stamped{std::move(b), seq_++}, level);
    if (raised) {
      for (int s = 0; s < cfg_.k; ++s)
        net.send_to_site(s, {msg_tag::round, {static_cast<long long>(*raised)}, value_bits(*raised)});
      rebuild_tallies();
    } else if (pool_.pool().size() == before + 1) {
      add_to_tallies(pool_.pool().back().item);
    }
  }

  candidate_id on_query() const override {
    if (full_.n <= 0) return no_winner;
    const int m = cfg_.m;
    const double n_hat = static_cast<double>(counter_.estimate());
    const double scale = n_hat / static_cast<double>(full_.n);
    const long long q_hat = static_cast<long long>(std::floor(cfg_.eps * n_hat));
    const double thr = soft_majority_threshold(counter_.estimate(), q_hat);
    switch (cfg_.rule.kind) {
      case rule_kind::plurality:
      case rule_kind::t_approval:
      case rule_kind::approval:
      case rule_kind::borda: {
        std::vector<double> s(m);
        for (candidate_id c = 0; c < m; ++c)
          s[c] = static_cast<double>(cfg_.rule.kind == rule_kind::borda ? full_.borda_score(c)
                                                                        : full_.approval_score(c));
        return declare::argmax(s);
      }
      case rule_kind::copeland:
      case rule_kind::condorcet:
        return declare::copeland_soft(
            m, [&](candidate_id a, candidate_id b) { return scale * full_.preferring(a, b); }, thr);
      case rule_kind::cup: {
        const cup_tree tree = cfg_.rule.tree.empty() ? cup_tree::balanced(m) : cfg_.rule.tree;
        return declare::cup_walk(
            m, tree, [&](candidate_id a, candidate_id b) { return scale * full_.preferring(a, b); });
      }
      case rule_kind::bucklin:
        return declare::bucklin_soft(
            m, [&](candidate_id c, int j) { return scale * full_.prefix_count(c, j); }, thr);
      case rule_kind::runoff: {
        // independent halves: S1 picks the top two, S2 settles them
        const tallies& s1 = even_.n > 0 ? even_ : full_;
        const tallies& s2 = odd_.n > 0 ? odd_ : full_;
        std::vector<double> plur(m);
        for (candidate_id c = 0; c < m; ++c) plur[c] = static_cast<double>(s1.plurality_score(c));
        return declare::runoff_pick(
            m, plur, [&](candidate_id a, candidate_id b) { return static_cast<double>(s2.preferring(a, b)); });
      }
    }
    return no_winner;
  }

  long long pool_size() const { return static_cast<long long>(pool_.pool().size()); }
  long long sample_target() const { return target_; }

 private:
  struct stamped {
    ballot b;
    long long seq;
  };

  void add_to_tallies(const stamped& s) {
    full_.add(s.b);
    (s.seq % 2 == 0 ? even_ : odd_).add(s.b);
  }

  void rebuild_tallies() {
    full_ = tallies(cfg_.m, kind_);
    even_ = tallies(cfg_.m, kind_);
    odd_ = tallies(cfg_.m, kind_);
    for (const auto& e : pool_.pool()) add_to_tallies(e.item);
  }

  tracker_config cfg_;
  count_tracker_center counter_;
  long long target_;
  sampler_center<stamped> pool_;
  ballot_kind kind_;
  tallies full_, even_, odd_;
  long long seq_ = 0;
};

// =============================================================================
// naive baseline: every ballot forwarded verbatim
// =============================================================================

class naive_site_endpoint : public site_endpoint {
 public:
  explicit naive_site_endpoint(int m) : m_(m) {}
  void on_ballot(const ballot& b, net_context& net) override {
    std::vector<long long> values;
    for (candidate_id c : b.ids) values.push_back(c);
    net.send_to_center({"ballot", std::move(values), ballot_bits(b.kind, m_)});
  }

 private:
  int m_;
};

class naive_center_endpoint : public center_endpoint {
 public:
  explicit naive_center_endpoint(const rule_spec& rule, int m)
      : rule_(rule), seen_(m, required_kind(rule.kind)) {}

  void on_message(int, const message& msg, net_context&) override {
    if (msg.tag != "ballot") return;
    std::vector<candidate_id> ids(msg.values.begin(), msg.values.end());
    seen_.add(ballot{seen_.kind, std::move(ids)});
  }

  candidate_id on_query() const override {
    if (seen_.n == 0) return no_winner;
    return evaluate_rule(seen_, rule_).front();
  }

 private:
  rule_spec rule_;
  tallies seen_;
};

inline protocol_family make_naive_protocol(const rule_spec& rule, int m, int k) {
  protocol_family f;
  f.center = std::make_unique<naive_center_endpoint>(rule, m);
  for (int i = 0; i < k; ++i) f.sites.push_back(std::make_unique<naive_site_endpoint>(m));
  return f;
}

// Builds the endpoint family for one tracker cell.
inline protocol_family make_tracker_family(const tracker_config& cfg) {
  if (!valid_cell(cfg.rule.kind, cfg.tech))
    throw dvs_error(std::string("invalid rule/technique cell: ") + to_string(cfg.rule.kind) + "/" +
                    to_string(cfg.tech));
  protocol_family f;
  switch (cfg.tech) {
    case technique::frequency:
      f.center = std::make_unique<freq_center_endpoint>(cfg);
      for (int i = 0; i < cfg.k; ++i) f.sites.push_back(std::make_unique<freq_site_endpoint>(cfg));
      break;
    case technique::checkpoint:
      f.center = std::make_unique<checkpoint_center_endpoint>(cfg);
      for (int i = 0; i < cfg.k; ++i)
        f.sites.push_back(std::make_unique<checkpoint_site_endpoint>(cfg));
      break;
    case technique::hybrid:
      f.center = std::make_unique<hybrid_center_endpoint>(cfg);
      for (int i = 0; i < cfg.k; ++i) f.sites.push_back(std::make_unique<hybrid_site_endpoint>(cfg));
      break;
    case technique::sampling:
      f.center = std::make_unique<sampling_center_endpoint>(cfg);
      for (int i = 0; i < cfg.k; ++i)
        f.sites.push_back(std::make_unique<sampling_site_endpoint>(cfg));
      break;
  }
  return f;
}

}  // namespace dvs
