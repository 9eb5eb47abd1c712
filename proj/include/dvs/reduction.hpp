#pragma once

#include "dvs/rules.hpp"

namespace dvs {

// Item vocabulary the frequency trackers run on. Items are also packed into
// dense integer ids (see item_universe) for the tracker maps.
struct reduction_item {
  enum class tag { candidate, pair, bucklin } t = tag::candidate;
  candidate_id c = 0;
  candidate_id c2 = 0;  // pair: loser side
  int i = 0, j = 0;     // bucklin: level and block

  static reduction_item cand(candidate_id c) { return {tag::candidate, c, 0, 0, 0}; }
  static reduction_item pair(candidate_id w, candidate_id l) { return {tag::pair, w, l, 0, 0}; }
  static reduction_item buck(candidate_id c, int i, int j) { return {tag::bucklin, c, 0, i, j}; }
  bool operator==(const reduction_item&) const = default;
};

inline int pow2_ceil(int m) {
  int p = 1;
  while (p < m) p *= 2;
  return p;
}

inline int log2_exact(int p) {
  int l = 0;
  while ((1 << l) < p) ++l;
  return l;
}

// Which reduction a rule's frequency protocol uses.
enum class reduction_kind { candidate_scores, borda_scores, ordered_pairs, bucklin_blocks };

inline reduction_kind reduction_for(rule_kind r) {
  switch (r) {
    case rule_kind::plurality:
    case rule_kind::t_approval:
    case rule_kind::approval: return reduction_kind::candidate_scores;
    case rule_kind::borda: return reduction_kind::borda_scores;
    case rule_kind::copeland:
    case rule_kind::condorcet:
    case rule_kind::cup:
    case rule_kind::runoff: return reduction_kind::ordered_pairs;
    case rule_kind::bucklin: return reduction_kind::bucklin_blocks;
  }
  throw dvs_error("unknown rule");
}

// Emission orders follow the source constructions: approval sets ascending;
// Borda per position, m-j copies each; pairs in (position i, position j>i)
// order; Bucklin per position with the level index i ascending.
inline std::vector<reduction_item> reduce_ballot(rule_kind rule, const ballot& b, int m) {
  if (b.kind != required_kind(rule)) throw kind_mismatch_error("ballot kind does not fit the rule");
  std::vector<reduction_item> out;
  switch (reduction_for(rule)) {
    case reduction_kind::candidate_scores:
      if (b.kind == ballot_kind::approval) {
        for (candidate_id c : b.ids) out.push_back(reduction_item::cand(c));
      } else {
        out.push_back(reduction_item::cand(b.ids.front()));  // runoff plurality side
      }
      break;
    case reduction_kind::borda_scores:
      for (int p = 0; p < m; ++p)
        for (int copies = 0; copies < m - 1 - p; ++copies)
          out.push_back(reduction_item::cand(b.ids[p]));
      break;
    case reduction_kind::ordered_pairs:
      for (int p = 0; p < m; ++p)
        for (int q = p + 1; q < m; ++q)
          out.push_back(reduction_item::pair(b.ids[p], b.ids[q]));
      break;
    case reduction_kind::bucklin_blocks: {
      const int mp = pow2_ceil(m);
      const int levels = log2_exact(mp);
      for (int p = 0; p < m; ++p)
        for (int i = 0; i < levels; ++i)
          out.push_back(reduction_item::buck(b.ids[p], i, p >> i));
      break;
    }
  }
  return out;
}

// Aligned-block cover of the position prefix [1..j]: at most two blocks at
// the top level and one per lower level, so a prefix count is the sum of at
// most log m + 1 tracked frequencies.
inline std::vector<std::pair<int, int>> bucklin_prefix_blocks(int levels, int j) {
  std::vector<std::pair<int, int>> out;
  int pos = 0;
  for (int i = levels - 1; i >= 0; --i)
    while (pos + (1 << i) <= j) {
      out.emplace_back(i, pos >> i);
      pos += 1 << i;
    }
  return out;
}

// Dense integer ids for the reduced items of one rule instance.
struct item_universe {
  reduction_kind kind = reduction_kind::candidate_scores;
  int m = 0;
  int m_padded = 0;
  int levels = 0;
  std::vector<int> bucklin_offset;  // per level i: id offset of (.., i, ..) block

  item_universe() = default;
  item_universe(rule_kind rule, int m_) : kind(reduction_for(rule)), m(m_) {
    m_padded = pow2_ceil(m);
    levels = log2_exact(m_padded);
    if (kind == reduction_kind::bucklin_blocks) {
      bucklin_offset.resize(levels + 1);
      int off = 0;
      for (int i = 0; i < levels; ++i) {
        bucklin_offset[i] = off;
        off += m_padded * (m_padded >> i);
      }
      bucklin_offset[levels] = off;
    }
  }

  long long size() const {
    switch (kind) {
      case reduction_kind::candidate_scores:
      case reduction_kind::borda_scores: return m;
      case reduction_kind::ordered_pairs: return static_cast<long long>(m) * m;
      case reduction_kind::bucklin_blocks: return bucklin_offset[levels];
    }
    return 0;
  }

  long long id_of(const reduction_item& it) const {
    switch (it.t) {
      case reduction_item::tag::candidate: return it.c;
      case reduction_item::tag::pair: return static_cast<long long>(it.c) * m + it.c2;
      case reduction_item::tag::bucklin:
        return bucklin_offset[it.i] + static_cast<long long>(it.c) * (m_padded >> it.i) + it.j;
    }
    return 0;
  }

  long long pair_id(candidate_id w, candidate_id l) const {
    return static_cast<long long>(w) * m + l;
  }
  long long bucklin_id(candidate_id c, int i, int j) const {
    return bucklin_offset[i] + static_cast<long long>(c) * (m_padded >> i) + j;
  }

  // expected items per ballot; 0 when it varies (arbitrary approval sets)
  long long items_per_ballot(rule_kind rule, int t) const {
    switch (kind) {
      case reduction_kind::candidate_scores:
        if (rule == rule_kind::plurality || rule == rule_kind::runoff) return 1;
        if (rule == rule_kind::t_approval) return t;
        return 0;
      case reduction_kind::borda_scores: return static_cast<long long>(m) * (m - 1) / 2;
      case reduction_kind::ordered_pairs: return static_cast<long long>(m) * (m - 1) / 2;
      case reduction_kind::bucklin_blocks: return static_cast<long long>(m) * levels;
    }
    return 0;
  }
};

}  // namespace dvs
