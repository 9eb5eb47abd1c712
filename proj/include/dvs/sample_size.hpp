#pragma once

#include <cmath>

#include "dvs/rules.hpp"

namespace dvs {

// Sample sizes for the sampling-based trackers. The t-Approval count is the
// source formula ceil(24/eps^2 * ln(2t/delta)); the other rules follow the
// same Chernoff recipe with the union-bound count and per-quantity precision
// their declaration logic needs:
//   score rules       union m,   precision eps/4  ->  48/eps^2 * ln(2m/delta)
//   pairwise, Bucklin union m^2, precision eps/8  -> 192/eps^2 * ln(2m^2/delta)
//   runoff            two halves, each 108/eps^2 * ln(4/delta)
// Everything dominates the basic-sampler floor 3/eps^2 * ln(2/delta).

struct sample_size_spec {
  rule_kind rule = rule_kind::plurality;
  double eps = 0.1;
  double delta = 0.1;
  int t = 1;
  int m = 2;
};

namespace detail {

inline long long ceil_ll(double x) { return static_cast<long long>(std::ceil(x - 1e-9)); }

inline int pow2_at_least(int m) {
  int p = 1;
  while (p < m) p *= 2;
  return p;
}

}  // namespace detail

inline long long lemma3_floor(double eps, double delta) {
  return detail::ceil_ll(3.0 / (eps * eps) * std::log(2.0 / delta));
}

inline long long required_sample_size(const sample_size_spec& s) {
  if (!(s.eps > 0.0 && s.eps < 1.0)) throw dvs_error("eps must lie in (0,1)");
  if (!(s.delta > 0.0 && s.delta < 1.0)) throw dvs_error("delta must lie in (0,1)");
  const double e2 = s.eps * s.eps;
  const double m = static_cast<double>(s.m);
  switch (s.rule) {
    case rule_kind::plurality:
      return detail::ceil_ll(24.0 / e2 * std::log(2.0 / s.delta));
    case rule_kind::t_approval:
      return detail::ceil_ll(24.0 / e2 * std::log(2.0 * s.t / s.delta));
    case rule_kind::approval:
    case rule_kind::borda:
      return detail::ceil_ll(48.0 / e2 * std::log(2.0 * m / s.delta));
    case rule_kind::copeland:
    case rule_kind::condorcet:
    case rule_kind::cup:
      return detail::ceil_ll(192.0 / e2 * std::log(2.0 * m * m / s.delta));
    case rule_kind::bucklin: {
      double mp = detail::pow2_at_least(s.m);
      return detail::ceil_ll(192.0 / e2 * std::log(2.0 * mp * mp / s.delta));
    }
    case rule_kind::runoff:
      return 2 * detail::ceil_ll(108.0 / e2 * std::log(4.0 / s.delta));
  }
  throw dvs_error("unknown rule");
}

}  // namespace dvs
