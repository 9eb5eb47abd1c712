#pragma once

#include <cmath>

#include "dvs/count_tracker.hpp"
#include "dvs/rules.hpp"

namespace dvs {

// Checkpoint trigger: fire at the largest i with (1+lambda)^i <= n_hat when
// that i is new. Thresholds are grown multiplicatively so every run crosses
// the identical float sequence.
class checkpoint_trigger {
 public:
  explicit checkpoint_trigger(double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw dvs_error("lambda must lie in (0,1)");
  }

  // new index to fire on, if any; n_hat must be non-decreasing across calls
  std::optional<long long> should_fire(double n_hat) {
    // tolerance keeps e.g. 1.21 >= 1.1^2 true under float rounding
    if (n_hat < next_threshold_ * (1.0 - 1e-12)) return std::nullopt;
    long long fired = last_index_;
    while (n_hat >= next_threshold_ * (1.0 - 1e-12)) {
      ++fired;
      next_threshold_ *= 1.0 + lambda_;
    }
    last_index_ = fired;
    ++count_;
    return fired;  // several crossed indices collapse into one subprotocol
  }

  std::optional<long long> should_fire(long long n_hat) {
    return should_fire(static_cast<double>(n_hat));
  }

  long long last_index() const { return last_index_; }
  long long fired_count() const { return count_; }

 private:
  double lambda_;
  double next_threshold_ = 1.0;  // (1+lambda)^0
  long long last_index_ = -1;
  long long count_ = 0;
};

// Round v to the closest multiple of g, half-up on exact midpoints.
inline long long round_to_multiple(long long v, long long g) {
  if (g <= 1) return v;
  long long q = v / g, r = v % g;
  if (2 * r >= g) ++q;
  return q * g;
}

// Static-exchange granularity. eps_s is the subprotocol's own precision
// (the framework passes eps/4). The 4k divisor keeps the summed rounding
// error at eps_s*n/8; micro-budget checkpoints fall back to exact counts.
inline long long static_granularity(double eps_s, long long n, int k, double scale = 1.0) {
  if (std::floor(eps_s * static_cast<double>(n)) < 4.0) return 1;
  double g = std::floor(scale * eps_s * static_cast<double>(n) / (4.0 * k));
  return std::max<long long>(1, static_cast<long long>(g));
}

// Number of representable levels for a score in [0, max_value] at granularity g.
inline long long granularity_levels(long long max_value, long long g) {
  return max_value / std::max<long long>(1, g) + 1;
}

// Soft majority threshold shared by the estimated-regime declarations:
// count a contest/round for c when estimate >= (n_hat+1)/2 - floor(q_hat/2)/2.
// Derivation: with estimate error e and a witness of a = floor(q/2) balanced
// pairs, soundness needs a threshold in (n/2 - a + e, n/2 - e], which this
// midpoint hits whenever a > 2e.
inline double soft_majority_threshold(long long n_hat, long long q_hat) {
  return (static_cast<double>(n_hat) + 1.0) / 2.0 - static_cast<double>(q_hat / 2) / 2.0;
}

}  // namespace dvs
