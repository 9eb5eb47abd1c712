#pragma once

#include <numeric>

#include "dvs/harness.hpp"
#include "dvs/rng.hpp"

namespace dvs {

enum class generator_kind { uniform_impartial, skewed, planted_winner, adversarial_flip };

inline const char* to_string(generator_kind g) {
  switch (g) {
    case generator_kind::uniform_impartial: return "uniform_impartial";
    case generator_kind::skewed: return "skewed";
    case generator_kind::planted_winner: return "planted_winner";
    case generator_kind::adversarial_flip: return "adversarial_flip";
  }
  return "?";
}

inline std::optional<generator_kind> generator_from_string(const std::string& s) {
  for (generator_kind g : {generator_kind::uniform_impartial, generator_kind::skewed,
                           generator_kind::planted_winner, generator_kind::adversarial_flip})
    if (s == to_string(g)) return g;
  return std::nullopt;
}

struct generator_spec {
  generator_kind kind = generator_kind::uniform_impartial;
  long long n = 0;
  int m = 2;
  ballot_kind ballots = ballot_kind::ordinal;
  int approval_t = 0;  // approval kind: fixed set size, 0 = arbitrary non-empty
  std::uint64_t seed = 1;

  std::vector<double> weights;  // skewed
  double margin = 0.0;          // planted_winner: extra top-share of candidate 0
  double eps = 0.1;             // adversarial_flip
  int k = 2;                    // adversarial_flip: sites flooded per phase
  int phases = 0;               // adversarial_flip
};

enum class assignment_kind { round_robin, uniform_random, single_site, per_generator };

struct assignment_policy {
  assignment_kind kind = assignment_kind::round_robin;
  int k = 1;
  std::uint64_t seed = 1;

  int assign(long long index, rng& r) const {
    switch (kind) {
      case assignment_kind::round_robin: return static_cast<int>(index % k);
      case assignment_kind::uniform_random: return static_cast<int>(r.below(k));
      case assignment_kind::single_site: return 0;
      case assignment_kind::per_generator: return 0;  // stream already carries sites
    }
    return 0;
  }
};

namespace gen_detail {

inline std::vector<candidate_id> random_permutation(int m, rng& r) {
  std::vector<candidate_id> p(m);
  std::iota(p.begin(), p.end(), 0);
  for (int i = m - 1; i > 0; --i) std::swap(p[i], p[static_cast<int>(r.below(i + 1))]);
  return p;
}

// permutation with `top` first, remaining candidates shuffled
inline std::vector<candidate_id> topped_permutation(int m, candidate_id top, rng& r) {
  std::vector<candidate_id> rest;
  for (candidate_id c = 0; c < m; ++c)
    if (c != top) rest.push_back(c);
  for (int i = static_cast<int>(rest.size()) - 1; i > 0; --i)
    std::swap(rest[i], rest[static_cast<int>(r.below(i + 1))]);
  std::vector<candidate_id> p = {top};
  p.insert(p.end(), rest.begin(), rest.end());
  return p;
}

inline ballot ballot_with_top(const generator_spec& spec, candidate_id top, rng& r) {
  if (spec.ballots == ballot_kind::ordinal)
    return ballot::ordinal(topped_permutation(spec.m, top, r));
  if (spec.approval_t <= 1) return ballot::approval({top});
  // approval set of size t containing top
  std::vector<candidate_id> set = {top};
  std::vector<candidate_id> rest;
  for (candidate_id c = 0; c < spec.m; ++c)
    if (c != top) rest.push_back(c);
  for (int i = static_cast<int>(rest.size()) - 1; i > 0; --i)
    std::swap(rest[i], rest[static_cast<int>(r.below(i + 1))]);
  for (int i = 0; i + 1 < spec.approval_t && i < static_cast<int>(rest.size()); ++i)
    set.push_back(rest[i]);
  return ballot::approval(std::move(set));
}

inline ballot impartial_ballot(const generator_spec& spec, rng& r) {
  if (spec.ballots == ballot_kind::ordinal)
    return ballot::ordinal(random_permutation(spec.m, r));
  if (spec.approval_t >= 1) {
    std::vector<candidate_id> perm = random_permutation(spec.m, r);
    perm.resize(spec.approval_t);
    return ballot::approval(std::move(perm));
  }
  // uniform non-empty subset
  while (true) {
    std::vector<candidate_id> set;
    for (candidate_id c = 0; c < spec.m; ++c)
      if (r.coin()) set.push_back(c);
    if (!set.empty()) return ballot::approval(std::move(set));
  }
}

inline candidate_id weighted_pick(const std::vector<double>& w, rng& r) {
  double total = 0;
  for (double x : w) total += x;
  double u = r.uniform01() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    u -= w[i];
    if (u <= 0) return static_cast<candidate_id>(i);
  }
  return static_cast<candidate_id>(w.size() - 1);
}

}  // namespace gen_detail

// Phase sizes of the adversarial flip stream:
//   x_1 = y_1 = 1,  x_i = ceil((1+3 eps) * k * y_{i-1}),  y_i = y_{i-1} + x_i.
// Phase i sends x_i ballots for candidate (i mod 2) to every site.
inline std::vector<long long> adversarial_phase_sizes(double eps, int k, int phases) {
  std::vector<long long> x(phases + 1, 0);
  long long y = 1;
  x[1] = 1;
  for (int i = 2; i <= phases; ++i) {
    x[i] = static_cast<long long>(std::ceil((1.0 + 3.0 * eps) * static_cast<double>(k) *
                                            static_cast<double>(y) - 1e-9));
    y += x[i];
  }
  return x;
}

inline std::vector<stream_event> generate(const generator_spec& spec) {
  if (spec.m < 2) throw dvs_error("generator needs m >= 2");
  rng r(spec.seed);
  std::vector<stream_event> events;

  if (spec.kind == generator_kind::adversarial_flip) {
    if (spec.m != 2) throw dvs_error("adversarial_flip requires m = 2");
    if (!(spec.eps < 1.0 / 3.0)) throw dvs_error("adversarial_flip requires eps < 1/3");
    if (spec.phases < 1) throw dvs_error("adversarial_flip requires phases >= 1");
    auto x = adversarial_phase_sizes(spec.eps, spec.k, spec.phases);
    long long time = 1;
    for (int i = 1; i <= spec.phases; ++i) {
      candidate_id c = i % 2;
      ballot b = spec.ballots == ballot_kind::ordinal
                     ? ballot::ordinal({c, 1 - c})
                     : ballot::approval({c});
      for (int site = 0; site < spec.k; ++site)  // site-major order within a phase
        for (long long v = 0; v < x[i]; ++v) events.push_back({time++, site, b});
    }
    return events;
  }

  if (spec.kind == generator_kind::skewed) {
    if (spec.weights.empty()) throw dvs_error("skewed generator needs weights");
    if (static_cast<int>(spec.weights.size()) != spec.m)
      throw dvs_error("skewed generator needs one weight per candidate");
    double total = 0;
    for (double w : spec.weights) {
      if (w < 0) throw dvs_error("weights must be non-negative");
      total += w;
    }
    if (total <= 0) throw dvs_error("weights must not all be zero");
  }
  if (spec.kind == generator_kind::planted_winner &&
      !(spec.margin >= 0 && spec.margin + 1.0 / spec.m <= 1.0))
    throw dvs_error("planted margin out of range");

  for (long long i = 0; i < spec.n; ++i) {
    ballot b;
    switch (spec.kind) {
      case generator_kind::uniform_impartial: b = gen_detail::impartial_ballot(spec, r); break;
      case generator_kind::skewed:
        b = gen_detail::ballot_with_top(spec, gen_detail::weighted_pick(spec.weights, r), r);
        break;
      case generator_kind::planted_winner: {
        double share = spec.margin + 1.0 / spec.m;
        candidate_id top = r.uniform01() < share
                               ? 0
                               : 1 + static_cast<candidate_id>(r.below(spec.m - 1));
        b = gen_detail::ballot_with_top(spec, top, r);
        break;
      }
      case generator_kind::adversarial_flip: break;  // handled above
    }
    events.push_back({i + 1, 0, std::move(b)});
  }
  return events;
}

// Applies a site-assignment policy in place (adversarial streams keep theirs).
inline void assign_sites(std::vector<stream_event>& events, const assignment_policy& policy) {
  if (policy.kind == assignment_kind::per_generator) return;
  rng r(policy.seed);
  for (std::size_t i = 0; i < events.size(); ++i)
    events[i].site = policy.assign(static_cast<long long>(i), r);
}

// Prefix election of a stream: ballots with time <= t.
inline election election_prefix(const std::vector<stream_event>& events, int m, ballot_kind kind,
                                long long t) {
  election e = make_election(m, kind);
  for (const auto& ev : events) {
    if (ev.time > t) break;
    e.add(ev.b);
  }
  return e;
}

// --- stream text format (election format + "site=<id>" column) ---------------

inline void write_stream(std::ostream& os, const std::vector<stream_event>& events, int m,
                         ballot_kind kind) {
  os << "m=" << m << " kind=" << to_string(kind) << "\n";
  for (const auto& ev : events) os << "site=" << ev.site << " " << format_ballot(ev.b) << "\n";
}

struct parsed_stream {
  int m = 0;
  ballot_kind kind = ballot_kind::ordinal;
  std::vector<stream_event> events;
};

inline parsed_stream read_stream(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw dvs_error("empty stream file");
  parsed_stream out;
  auto [m, kind] = parse_election_header(line);
  out.m = m;
  out.kind = kind;
  long long time = 1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("site=", 0) != 0) throw dvs_error("stream line missing site column: " + line);
    std::size_t sp = line.find(' ');
    if (sp == std::string::npos) throw dvs_error("malformed stream line: " + line);
    int site = std::stoi(line.substr(5, sp - 5));
    ballot b = parse_ballot(line.substr(sp + 1), kind);
    validate_ballot(b, m);
    out.events.push_back({time++, site, std::move(b)});
  }
  return out;
}

}  // namespace dvs
