#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "dvs/types.hpp"

namespace dvs {

// Deterministic count tracking. A site reports its exact local count n_j
// whenever n_j >= ceil((1+lambda) * r_j), or immediately on its first item.
// The center's estimate n' = sum of last reports satisfies
// (1-lambda) * n <= n' <= n at all times.
class count_tracker_site {
 public:
  explicit count_tracker_site(double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw dvs_error("lambda must lie in (0,1)");
  }

  // Returns the value to report, if the threshold rule fires.
  std::optional<long long> on_arrival() {
    ++local_;
    bool fire = reported_ == 0
                    ? local_ >= 1
                    : local_ >= static_cast<long long>(
                                    std::ceil((1.0 + lambda_) * static_cast<double>(reported_)));
    if (!fire) return std::nullopt;
    reported_ = local_;
    return local_;
  }

  long long local() const { return local_; }
  long long reported() const { return reported_; }

 private:
  double lambda_;
  long long local_ = 0;
  long long reported_ = 0;
};

class count_tracker_center {
 public:
  explicit count_tracker_center(int k) : last_(k, 0) {}

  void on_report(int site, long long value) {
    estimate_ += value - last_[site];
    last_[site] = value;
  }

  long long estimate() const { return estimate_; }

 private:
  std::vector<long long> last_;
  long long estimate_ = 0;
};

// Single-owner composite for in-process use (tests, embedded estimators).
class count_tracker {
 public:
  count_tracker(double lambda, int k) : center_(k) {
    for (int i = 0; i < k; ++i) sites_.emplace_back(lambda);
  }

  // feeds one arrival; true if a report message was sent
  bool arrive(int site) {
    auto rep = sites_[site].on_arrival();
    if (rep) {
      center_.on_report(site, *rep);
      ++messages_;
    }
    return rep.has_value();
  }

  long long estimate() const { return center_.estimate(); }
  long long true_count() const {
    long long n = 0;
    for (const auto& s : sites_) n += s.local();
    return n;
  }
  long long messages() const { return messages_; }

 private:
  std::vector<count_tracker_site> sites_;
  count_tracker_center center_;
  long long messages_ = 0;
};

}  // namespace dvs
