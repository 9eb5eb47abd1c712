#pragma once

#include <cmath>
#include <functional>
#include <numeric>

#include "dvs/rules.hpp"

namespace dvs {

// Additive budget: at most floor(eps*n) extra ballots may be appended.
inline long long eps_budget(double eps, long long n) {
  if (eps < 0) throw dvs_error("eps must be non-negative");
  return static_cast<long long>(std::floor(eps * static_cast<double>(n) + 1e-9));
}

// All ballots an augmenting voter may cast under the given rule.
inline std::vector<ballot> augmentation_space(const rule_spec& r, int m) {
  std::vector<ballot> out;
  if (required_kind(r.kind) == ballot_kind::approval) {
    int t = r.kind == rule_kind::plurality ? 1 : (r.kind == rule_kind::t_approval ? r.t : 0);
    if (t > 0) {
      std::vector<candidate_id> idx(t);
      std::iota(idx.begin(), idx.end(), 0);
      while (true) {
        out.push_back(ballot::approval(idx));
        int i = t - 1;
        while (i >= 0 && idx[i] == m - t + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < t; ++j) idx[j] = idx[j - 1] + 1;
      }
    } else {
      for (unsigned mask = 1; mask < (1u << m); ++mask) {
        std::vector<candidate_id> set;
        for (int c = 0; c < m; ++c)
          if (mask & (1u << c)) set.push_back(c);
        out.push_back(ballot::approval(std::move(set)));
      }
    }
  } else {
    std::vector<candidate_id> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    do out.push_back(ballot::ordinal(perm));
    while (std::next_permutation(perm.begin(), perm.end()));
  }
  return out;
}

// Number of multisets of size <= q over `space` ballot types, saturating at cap.
inline long long augmentation_multisets(long long space, long long q, long long cap) {
  long long total = 1;
  double binom = 1.0;  // C(space-1+j, j)
  for (long long j = 1; j <= q; ++j) {
    binom = binom * static_cast<double>(space - 1 + j) / static_cast<double>(j);
    if (binom > static_cast<double>(cap)) return cap + 1;
    total += static_cast<long long>(binom + 0.5);
    if (total > cap) return cap + 1;
  }
  return total;
}

inline constexpr long long default_oracle_cap = 2'000'000;

// Exhaustive decision of "c becomes a co-winner after appending at most
// floor(eps*n) ballots". Enumerates augmentation multisets with incremental
// tallies; throws oracle_too_large_error beyond the cap.
class eps_winner_oracle {
 public:
  explicit eps_winner_oracle(long long cap = default_oracle_cap) : cap_(cap) {}

  bool exact(const election& e, candidate_id c, double eps, const rule_spec& r) const {
    tallies t(e);
    return exact(t, c, eps, r);
  }

  // `t` is scratch-modified during the search but restored before returning.
  bool exact(tallies& t, candidate_id c, double eps, const rule_spec& r) const {
    if (t.n <= 0) throw empty_election_error("eps-winner is undefined for an empty election");
    const long long q = eps_budget(eps, t.n);
    const std::vector<ballot> space = augmentation_space(r, t.m);
    if (augmentation_multisets(static_cast<long long>(space.size()), q, cap_) > cap_)
      throw oracle_too_large_error("augmentation space too large for exhaustive oracle");
    return search(t, c, r, space, 0, q);
  }

 private:
  bool search(tallies& t, candidate_id c, const rule_spec& r, const std::vector<ballot>& space,
              std::size_t first, long long left) const {
    if (is_winner(t, r, c)) return true;
    if (left == 0) return false;
    for (std::size_t i = first; i < space.size(); ++i) {
      t.add(space[i]);
      bool ok = search(t, c, r, space, i, left - 1);
      t.remove(space[i]);
      if (ok) return true;
    }
    return false;
  }

  long long cap_;
};

inline bool is_eps_winner_exact(const election& e, candidate_id c, double eps, const rule_spec& r,
                                long long cap = default_oracle_cap) {
  return eps_winner_oracle(cap).exact(e, c, eps, r);
}

// --- witness oracle ----------------------------------------------------------

enum class witness_result { yes, unknown };

struct witness_outcome {
  witness_result result = witness_result::unknown;
  std::vector<ballot> witness;  // verified: c co-wins e + witness
  bool yes() const { return result == witness_result::yes; }
};

// Topological order of candidates consistent with a set of ordered pairs.
// Throws on a cycle. Ready candidates are taken lowest-id first.
inline std::vector<candidate_id> topological_contest_order(
    int m, const std::vector<std::pair<candidate_id, candidate_id>>& pairs) {
  std::vector<std::vector<candidate_id>> adj(m);
  std::vector<int> indeg(m, 0);
  for (auto [w, l] : pairs) {
    adj[w].push_back(l);
    ++indeg[l];
  }
  std::vector<candidate_id> order;
  std::vector<char> done(m, 0);
  for (int step = 0; step < m; ++step) {
    candidate_id pick = no_winner;
    for (candidate_id c = 0; c < m; ++c)
      if (!done[c] && indeg[c] == 0) { pick = c; break; }
    if (pick == no_winner) throw dvs_error("contest pairs contain a cycle");
    done[pick] = 1;
    order.push_back(pick);
    for (candidate_id l : adj[pick]) --indeg[l];
  }
  return order;
}

namespace detail {

inline std::vector<candidate_id> others_of(int m, candidate_id c) {
  std::vector<candidate_id> o;
  for (candidate_id d = 0; d < m; ++d)
    if (d != c) o.push_back(d);
  return o;
}

inline ballot top_rank_ballot(int m, candidate_id c, const std::vector<candidate_id>& tail) {
  std::vector<candidate_id> order;
  order.reserve(m);
  order.push_back(c);
  order.insert(order.end(), tail.begin(), tail.end());
  return ballot::ordinal(std::move(order));
}

// `a` pairs of "c first" ballots whose tails are mutual reverses; the pairs
// cancel out among everyone but c.
inline std::vector<ballot> reverse_tail_pairs(int m, candidate_id c, long long a) {
  std::vector<candidate_id> asc = others_of(m, c);
  std::vector<candidate_id> desc(asc.rbegin(), asc.rend());
  std::vector<ballot> out;
  out.reserve(2 * a);
  for (long long i = 0; i < a; ++i) {
    out.push_back(top_rank_ballot(m, c, asc));
    out.push_back(top_rank_ballot(m, c, desc));
  }
  return out;
}

inline bool verified(const tallies& base, const std::vector<ballot>& w, const rule_spec& r,
                     candidate_id c) {
  tallies t = base;
  for (const ballot& b : w) t.add(b);
  return is_winner(t, r, c);
}

// Bracket outcome in which c reaches the root and every contest winner's
// deficit is at most q. Returns all m-1 (winner, loser) pairs, or nullopt.
inline std::optional<std::vector<std::pair<candidate_id, candidate_id>>> cup_contest_plan(
    const tallies& t, const cup_tree& tree, candidate_id c, long long q) {
  const int nn = static_cast<int>(tree.nodes.size());
  auto deficit_ok = [&](candidate_id w, candidate_id l) {
    return t.preferring(l, w) - t.preferring(w, l) <= q;
  };
  std::vector<std::vector<char>> feasible(nn, std::vector<char>(t.m, 0));
  for (int v = 0; v < nn; ++v) {  // children precede parents by construction
    const auto& nd = tree.nodes[v];
    if (nd.left < 0) { feasible[v][nd.leaf] = 1; continue; }
    for (candidate_id a = 0; a < t.m; ++a) {
      bool ok = false;
      if (feasible[nd.left][a])
        for (candidate_id b = 0; b < t.m && !ok; ++b)
          if (feasible[nd.right][b] && deficit_ok(a, b)) ok = true;
      if (!ok && feasible[nd.right][a])
        for (candidate_id b = 0; b < t.m && !ok; ++b)
          if (feasible[nd.left][b] && deficit_ok(a, b)) ok = true;
      feasible[v][a] = ok;
    }
  }
  if (!feasible[tree.root][c]) return std::nullopt;

  std::vector<std::pair<candidate_id, candidate_id>> plan;
  std::function<void(int, candidate_id)> assign = [&](int v, candidate_id want) {
    const auto& nd = tree.nodes[v];
    if (nd.left < 0) return;
    int side = feasible[nd.left][want] ? nd.left : nd.right;
    // prefer keeping `want` on the left subtree when feasible on both
    int other = side == nd.left ? nd.right : nd.left;
    candidate_id opp = no_winner;
    for (candidate_id b = 0; b < t.m; ++b)
      if (feasible[other][b] && deficit_ok(want, b)) { opp = b; break; }
    plan.emplace_back(want, opp);
    assign(side, want);
    assign(other, opp);
  };
  assign(tree.root, c);
  return plan;
}

inline std::optional<std::vector<ballot>> plurality_style_witness(const tallies& t, candidate_id c,
                                                                  long long q) {
  // ballots approving only c; feasibility is analytic
  long long best = 0;
  for (candidate_id d = 0; d < t.m; ++d) best = std::max(best, t.approval_score(d));
  if (t.approval_score(c) + q < best) return std::nullopt;
  long long need = std::max<long long>(0, best - t.approval_score(c));
  return std::vector<ballot>(need, ballot::approval({c}));
}

inline std::optional<std::vector<ballot>> t_approval_witness(const tallies& t, candidate_id c,
                                                             long long q, int tap) {
  // q ballots approve c plus tap-1 fillers; fillers must not push anyone
  // past score(c)+q. Capacity per rival: min(q, score(c)+q-score(d)).
  const long long target = t.approval_score(c) + q;
  std::vector<long long> cap(t.m, 0);
  long long total_cap = 0;
  for (candidate_id d = 0; d < t.m; ++d) {
    if (d == c) continue;
    if (t.approval_score(d) > target) return std::nullopt;
    cap[d] = std::min<long long>(q, target - t.approval_score(d));
    total_cap += cap[d];
  }
  if (total_cap < q * (tap - 1)) return std::nullopt;
  std::vector<ballot> out;
  out.reserve(q);
  for (long long i = 0; i < q; ++i) {
    std::vector<candidate_id> set = {c};
    // largest remaining capacity first, ties by id
    std::vector<candidate_id> order = others_of(t.m, c);
    std::stable_sort(order.begin(), order.end(),
                     [&](candidate_id a, candidate_id b) { return cap[a] > cap[b]; });
    for (int j = 0; j < tap - 1; ++j) {
      if (cap[order[j]] <= 0) return std::nullopt;
      --cap[order[j]];
      set.push_back(order[j]);
    }
    out.push_back(ballot::approval(std::move(set)));
  }
  return out;
}

inline std::vector<ballot> borda_witness(const tallies& t, candidate_id c, long long q) {
  std::vector<ballot> w = reverse_tail_pairs(t.m, c, q / 2);
  if (q % 2 == 1) {
    // leftover ballot: weakest rivals get the heavier tail positions
    std::vector<candidate_id> tail = others_of(t.m, c);
    std::stable_sort(tail.begin(), tail.end(), [&](candidate_id a, candidate_id b) {
      return t.borda_score(a) < t.borda_score(b);
    });
    w.push_back(top_rank_ballot(t.m, c, tail));
  }
  return w;
}

inline std::optional<std::vector<ballot>> runoff_witness(const tallies& t, candidate_id c,
                                                         candidate_id partner, long long q) {
  // 2q/3 ballots top-rank c, q/3 top-rank the partner
  long long b_cnt = q / 3, a_cnt = q - b_cnt;
  std::vector<ballot> w;
  w.reserve(q);
  std::vector<candidate_id> tail_c, tail_p;
  tail_c.push_back(partner);
  for (candidate_id d : others_of(t.m, c))
    if (d != partner) tail_c.push_back(d);
  tail_p.push_back(c);
  for (candidate_id d : others_of(t.m, partner))
    if (d != c) tail_p.push_back(d);
  for (long long i = 0; i < a_cnt; ++i) w.push_back(top_rank_ballot(t.m, c, tail_c));
  for (long long i = 0; i < b_cnt; ++i) w.push_back(top_rank_ballot(t.m, partner, tail_p));
  return w;
}

}  // namespace detail

// Per-rule constructive certificate. A `yes` always carries a witness that
// was re-verified through evaluate_rule; `unknown` only means the
// construction did not certify c.
inline witness_outcome is_eps_winner_witness(const tallies& t, candidate_id c, double eps,
                                             const rule_spec& r) {
  if (t.n <= 0) throw empty_election_error("eps-winner is undefined for an empty election");
  const long long q = eps_budget(eps, t.n);
  if (is_winner(t, r, c)) return {witness_result::yes, {}};
  if (q == 0) return {witness_result::unknown, {}};

  auto accept = [&](std::vector<ballot> w) -> witness_outcome {
    if (static_cast<long long>(w.size()) <= q && detail::verified(t, w, r, c))
      return {witness_result::yes, std::move(w)};
    return {witness_result::unknown, {}};
  };

  switch (r.kind) {
    case rule_kind::plurality:
    case rule_kind::approval: {
      auto w = detail::plurality_style_witness(t, c, q);
      if (!w) return {witness_result::unknown, {}};
      return accept(std::move(*w));
    }
    case rule_kind::t_approval: {
      auto w = detail::t_approval_witness(t, c, q, r.t);
      if (!w) return {witness_result::unknown, {}};
      return accept(std::move(*w));
    }
    case rule_kind::borda: return accept(detail::borda_witness(t, c, q));
    case rule_kind::copeland:
    case rule_kind::condorcet:
    case rule_kind::bucklin: return accept(detail::reverse_tail_pairs(t.m, c, q / 2));
    case rule_kind::cup: {
      const cup_tree tree = r.tree.empty() ? cup_tree::balanced(t.m) : r.tree;
      auto plan = detail::cup_contest_plan(t, tree, c, q);
      if (!plan) return {witness_result::unknown, {}};
      std::vector<candidate_id> order = topological_contest_order(t.m, *plan);
      return accept(std::vector<ballot>(q, ballot::ordinal(order)));
    }
    case rule_kind::runoff: {
      for (candidate_id partner = 0; partner < t.m; ++partner) {
        if (partner == c) continue;
        auto w = detail::runoff_witness(t, c, partner, q);
        if (!w) continue;
        auto out = accept(std::move(*w));
        if (out.yes()) return out;
      }
      return {witness_result::unknown, {}};
    }
  }
  return {witness_result::unknown, {}};
}

inline witness_outcome is_eps_winner_witness(const election& e, candidate_id c, double eps,
                                             const rule_spec& r) {
  tallies t(e);
  return is_eps_winner_witness(t, c, eps, r);
}

}  // namespace dvs
