#pragma once

#include <cassert>
#include <limits>
#include <optional>

#include "dvs/types.hpp"

namespace dvs {

enum class rule_kind {
  plurality,
  t_approval,
  approval,
  borda,
  cup,
  copeland,
  condorcet,
  runoff,
  bucklin,
};

inline const char* to_string(rule_kind r) {
  switch (r) {
    case rule_kind::plurality: return "plurality";
    case rule_kind::t_approval: return "t_approval";
    case rule_kind::approval: return "approval";
    case rule_kind::borda: return "borda";
    case rule_kind::cup: return "cup";
    case rule_kind::copeland: return "copeland";
    case rule_kind::condorcet: return "condorcet";
    case rule_kind::runoff: return "runoff";
    case rule_kind::bucklin: return "bucklin";
  }
  return "?";
}

inline std::optional<rule_kind> rule_from_string(const std::string& s) {
  for (rule_kind r :
       {rule_kind::plurality, rule_kind::t_approval, rule_kind::approval, rule_kind::borda,
        rule_kind::cup, rule_kind::copeland, rule_kind::condorcet, rule_kind::runoff,
        rule_kind::bucklin})
    if (s == to_string(r)) return r;
  return std::nullopt;
}

inline bool is_approval_rule(rule_kind r) {
  return r == rule_kind::plurality || r == rule_kind::t_approval || r == rule_kind::approval;
}

inline ballot_kind required_kind(rule_kind r) {
  return is_approval_rule(r) ? ballot_kind::approval : ballot_kind::ordinal;
}

// Knockout bracket. Leaves carry candidates; each internal node is the
// head-to-head contest between the winners of its children.
struct cup_tree {
  struct node {
    int left = -1, right = -1;          // child node indices, -1 for leaf
    candidate_id leaf = no_winner;      // candidate at a leaf
  };
  std::vector<node> nodes;  // nodes.back() is the root
  int root = -1;

  bool empty() const { return nodes.empty(); }

  // Balanced bracket over candidates 0..m-1 in id order.
  static cup_tree balanced(int m) {
    cup_tree t;
    t.root = t.build(0, m);
    return t;
  }

 private:
  int build(int lo, int len) {
    if (len == 1) {
      nodes.push_back({-1, -1, lo});
      return static_cast<int>(nodes.size()) - 1;
    }
    int half = (len + 1) / 2;
    int l = build(lo, half);
    int r = build(lo + half, len - half);
    nodes.push_back({l, r, no_winner});
    return static_cast<int>(nodes.size()) - 1;
  }
};

struct rule_spec {
  rule_kind kind = rule_kind::plurality;
  int t = 1;          // t-Approval only; must satisfy t <= m/2
  cup_tree tree;      // Cup only; balanced(m) substituted when empty

  static rule_spec plain(rule_kind k) { return rule_spec{k, 1, {}}; }
  static rule_spec t_app(int t) { return rule_spec{rule_kind::t_approval, t, {}}; }
};

// Sufficient statistics for every rule in the catalogue. Ballots can be
// added and removed, which is what the exhaustive oracle leans on.
struct tallies {
  int m = 0;
  ballot_kind kind = ballot_kind::approval;
  long long n = 0;
  std::vector<long long> approvals;  // approval kind: per-candidate score
  std::vector<long long> pos;        // ordinal: m*m, pos[c*m+p] = # ballots ranking c at position p
  std::vector<long long> pair;       // ordinal: m*m, pair[a*m+b]  = # ballots preferring a to b

  tallies() = default;
  tallies(int m_, ballot_kind kind_) : m(m_), kind(kind_) {
    if (kind == ballot_kind::approval) approvals.assign(m, 0);
    else {
      pos.assign(static_cast<std::size_t>(m) * m, 0);
      pair.assign(static_cast<std::size_t>(m) * m, 0);
    }
  }

  explicit tallies(const election& e) : tallies(e.m, e.kind) {
    for (const ballot& b : e.ballots) add(b);
  }

  void apply(const ballot& b, long long w) {
    if (b.kind != kind) throw kind_mismatch_error("tally/ballot kind mismatch");
    n += w;
    if (kind == ballot_kind::approval) {
      for (candidate_id c : b.ids) approvals[c] += w;
    } else {
      for (int p = 0; p < m; ++p) {
        candidate_id c = b.ids[p];
        pos[static_cast<std::size_t>(c) * m + p] += w;
        for (int q = p + 1; q < m; ++q) pair[static_cast<std::size_t>(c) * m + b.ids[q]] += w;
      }
    }
  }
  void add(const ballot& b) { apply(b, 1); }
  void remove(const ballot& b) { apply(b, -1); }

  long long approval_score(candidate_id c) const { return approvals[c]; }
  long long plurality_score(candidate_id c) const {
    // top-position count for ordinal ballots, approval score otherwise
    return kind == ballot_kind::approval ? approvals[c] : pos[static_cast<std::size_t>(c) * m];
  }
  long long borda_score(candidate_id c) const {
    long long s = 0;
    for (int p = 0; p < m; ++p) s += pos[static_cast<std::size_t>(c) * m + p] * (m - 1 - p);
    return s;
  }
  long long preferring(candidate_id a, candidate_id b) const {
    return pair[static_cast<std::size_t>(a) * m + b];
  }
  // # ballots ranking c within the top j positions (1-based j)
  long long prefix_count(candidate_id c, int j) const {
    long long s = 0;
    for (int p = 0; p < j && p < m; ++p) s += pos[static_cast<std::size_t>(c) * m + p];
    return s;
  }
};

// PairwiseMatrix: N[a][b] = # voters preferring a to b. Requires ordinal ballots.
struct pairwise_matrix {
  int m = 0;
  long long n = 0;
  std::vector<long long> v;  // m*m, diagonal zero
  long long at(candidate_id a, candidate_id b) const { return v[static_cast<std::size_t>(a) * m + b]; }
};

inline pairwise_matrix pairwise(const tallies& t) {
  if (t.kind != ballot_kind::ordinal) throw kind_mismatch_error("pairwise matrix needs ordinal ballots");
  return pairwise_matrix{t.m, t.n, t.pair};
}

inline pairwise_matrix pairwise(const election& e) { return pairwise(tallies(e)); }

namespace detail {

inline std::vector<candidate_id> argmax_set(const std::vector<long long>& scores) {
  long long best = std::numeric_limits<long long>::min();
  for (long long s : scores) best = std::max(best, s);
  std::vector<candidate_id> out;
  for (candidate_id c = 0; c < static_cast<int>(scores.size()); ++c)
    if (scores[c] == best) out.push_back(c);
  return out;
}

inline std::vector<long long> scores_for(const tallies& t, rule_kind r, int /*tap*/) {
  std::vector<long long> s(t.m);
  for (candidate_id c = 0; c < t.m; ++c) {
    switch (r) {
      case rule_kind::plurality:
      case rule_kind::t_approval:
      case rule_kind::approval: s[c] = t.approval_score(c); break;
      case rule_kind::borda: s[c] = t.borda_score(c); break;
      default: assert(false);
    }
  }
  return s;
}

// Copeland score under strict pairwise majorities.
inline int copeland_score(const tallies& t, candidate_id c) {
  int wins = 0;
  for (candidate_id d = 0; d < t.m; ++d)
    if (d != c && t.preferring(c, d) > t.preferring(d, c)) ++wins;
  return wins;
}

// Candidates that can reach the root of the bracket under some resolution
// of tied contests (favorable tie-breaking).
inline std::vector<char> cup_survivors(const tallies& t, const cup_tree& tree, int node_idx) {
  const cup_tree::node& nd = tree.nodes[node_idx];
  std::vector<char> mine(t.m, 0);
  if (nd.left < 0) {
    mine[nd.leaf] = 1;
    return mine;
  }
  std::vector<char> l = cup_survivors(t, tree, nd.left);
  std::vector<char> r = cup_survivors(t, tree, nd.right);
  for (candidate_id a = 0; a < t.m; ++a) {
    if (!l[a]) continue;
    for (candidate_id b = 0; b < t.m; ++b)
      if (r[b] && t.preferring(a, b) >= t.preferring(b, a)) { mine[a] = 1; break; }
  }
  for (candidate_id b = 0; b < t.m; ++b) {
    if (!r[b] || mine[b]) continue;
    for (candidate_id a = 0; a < t.m; ++a)
      if (l[a] && t.preferring(b, a) >= t.preferring(a, b)) { mine[b] = 1; break; }
  }
  return mine;
}

inline std::vector<candidate_id> runoff_winners(const tallies& t) {
  std::vector<long long> s(t.m);
  for (candidate_id c = 0; c < t.m; ++c) s[c] = t.plurality_score(c);
  std::vector<candidate_id> out;
  for (candidate_id c = 0; c < t.m; ++c) {
    bool wins = false;
    for (candidate_id d = 0; d < t.m && !wins; ++d) {
      if (d == c) continue;
      // {c,d} is a legal top-2 selection iff no third candidate strictly
      // out-scores either of them.
      long long lo = std::min(s[c], s[d]);
      bool legal = true;
      for (candidate_id x = 0; x < t.m; ++x)
        if (x != c && x != d && s[x] > lo) { legal = false; break; }
      if (legal && t.preferring(c, d) >= t.preferring(d, c)) wins = true;
    }
    if (wins) out.push_back(c);
  }
  return out;
}

inline std::vector<candidate_id> bucklin_winners(const tallies& t) {
  for (int j = 1; j <= t.m; ++j) {
    std::vector<candidate_id> out;
    for (candidate_id c = 0; c < t.m; ++c)
      if (2 * t.prefix_count(c, j) > t.n) out.push_back(c);
    if (!out.empty()) return out;
  }
  return {};  // unreachable for n >= 1: round m counts every voter
}

}  // namespace detail

// Co-winner set under favorable tie-breaking. Never empty for n >= 1.
inline std::vector<candidate_id> evaluate_rule(const tallies& t, const rule_spec& r) {
  if (t.n <= 0) throw empty_election_error("no winner is defined for an empty election");
  if (t.kind != required_kind(r.kind)) throw kind_mismatch_error("ballot kind does not fit the rule");

  switch (r.kind) {
    case rule_kind::plurality:
    case rule_kind::t_approval:
    case rule_kind::approval:
    case rule_kind::borda:
      return detail::argmax_set(detail::scores_for(t, r.kind, r.t));
    case rule_kind::copeland: {
      std::vector<long long> s(t.m);
      for (candidate_id c = 0; c < t.m; ++c) s[c] = detail::copeland_score(t, c);
      return detail::argmax_set(s);
    }
    case rule_kind::condorcet: {
      for (candidate_id c = 0; c < t.m; ++c)
        if (detail::copeland_score(t, c) == t.m - 1) return {c};
      std::vector<candidate_id> all(t.m);
      for (candidate_id c = 0; c < t.m; ++c) all[c] = c;
      return all;
    }
    case rule_kind::cup: {
      const cup_tree tree = r.tree.empty() ? cup_tree::balanced(t.m) : r.tree;
      std::vector<char> surv = detail::cup_survivors(t, tree, tree.root);
      std::vector<candidate_id> out;
      for (candidate_id c = 0; c < t.m; ++c)
        if (surv[c]) out.push_back(c);
      return out;
    }
    case rule_kind::runoff: return detail::runoff_winners(t);
    case rule_kind::bucklin: return detail::bucklin_winners(t);
  }
  throw dvs_error("unknown rule");
}

inline std::vector<candidate_id> evaluate_rule(const election& e, const rule_spec& r) {
  return evaluate_rule(tallies(e), r);
}

inline bool is_winner(const tallies& t, const rule_spec& r, candidate_id c) {
  auto w = evaluate_rule(t, r);
  return std::find(w.begin(), w.end(), c) != w.end();
}

}  // namespace dvs
