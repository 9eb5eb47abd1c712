#pragma once

#include <cmath>
#include <unordered_map>

#include "dvs/count_tracker.hpp"
#include "dvs/rng.hpp"

namespace dvs {

// Frequency tracking over a known item universe. The deterministic variant
// reports an item's exact local count once its unreported increments reach
//   delta = max(1, floor(eps * n_hat / (4k))),
// where n_hat is the embedded count tracker's estimate of the item-stream
// length. Sites learn n_hat through broadcasts issued every time the
// center's estimate doubles, so their delta lags the current one by at most
// a factor of two and never exceeds it.
//
// The randomized variant additionally reports on each arrival with
// probability p = min(1, c_p * sqrt(k) / (eps * n_hat)); the deterministic
// threshold stays on as a staleness backstop so the eps*n error contract
// holds regardless of coin luck.

struct freq_tracker_params {
  double eps = 0.1;           // precision relative to the item-stream length
  int k = 1;                  // sites
  long long universe = 1;     // item types
  double count_lambda = 0.5;  // embedded count tracker precision
  bool randomized = false;
  double c_p = 4.0;           // randomized reporting constant
};

namespace freq_detail {

inline long long delta_for(double eps, long long n_hat, int k) {
  double d = std::floor(eps * static_cast<double>(n_hat) / (4.0 * k));
  return std::max<long long>(1, static_cast<long long>(d));
}

}  // namespace freq_detail

// Site half. Owns per-item unreported counts and the site part of the
// embedded count tracker.
class freq_tracker_site {
 public:
  freq_tracker_site(const freq_tracker_params& p)
      : p_(p), counter_(p.count_lambda) {}

  struct outbox {
    std::optional<long long> count_report;                  // embedded tracker
    std::vector<std::pair<long long, long long>> item_reports;  // (item, exact local count)
  };

  // item arrival; `coin` used only by the randomized variant
  outbox on_item(long long item, rng* coin) {
    outbox out;
    ++local_[item];
    ++unreported_[item];
    if (auto rep = counter_.on_arrival()) out.count_report = *rep;

    bool fire = unreported_[item] >= delta_;
    if (!fire && p_.randomized) {
      double p = report_probability();
      if (p >= 1.0 || (coin && coin->uniform01() < p)) fire = true;
    }
    if (fire) {
      out.item_reports.emplace_back(item, local_[item]);
      unreported_[item] = 0;
    }
    return out;
  }

  void on_nhat_broadcast(long long n_hat) {
    known_nhat_ = n_hat;
    delta_ = freq_detail::delta_for(p_.eps, n_hat, p_.k);
  }

  double report_probability() const {
    if (known_nhat_ <= 0) return 1.0;
    double p = p_.c_p * std::sqrt(static_cast<double>(p_.k)) /
               (p_.eps * static_cast<double>(known_nhat_));
    return std::min(1.0, p);
  }

  long long local_count(long long item) const {
    auto it = local_.find(item);
    return it == local_.end() ? 0 : it->second;
  }
  long long delta() const { return delta_; }

 private:
  freq_tracker_params p_;
  count_tracker_site counter_;
  std::unordered_map<long long, long long> local_;
  std::unordered_map<long long, long long> unreported_;
  long long delta_ = 1;
  long long known_nhat_ = 0;
};

// Center half. Maintains per-(site,item) last reports, the count-tracker
// center, and decides when to broadcast the new n_hat.
class freq_tracker_center {
 public:
  explicit freq_tracker_center(const freq_tracker_params& p) : p_(p), counter_(p.k) {}

  void on_count_report(int site, long long value) { counter_.on_report(site, value); }

  void on_item_report(int site, long long item, long long count) {
    long long& slot = last_[key(site, item)];
    estimate_[item] += count - slot;
    slot = count;
  }

  // n_hat broadcast is due when the estimate doubled since the last one
  std::optional<long long> pending_broadcast() const {
    long long nh = counter_.estimate();
    if (nh > 0 && nh >= 2 * last_broadcast_) return nh;
    return std::nullopt;
  }
  void broadcast_sent(long long n_hat) { last_broadcast_ = n_hat; }

  long long n_hat() const { return counter_.estimate(); }
  long long estimate(long long item) const {
    auto it = estimate_.find(item);
    return it == estimate_.end() ? 0 : it->second;
  }
  const std::unordered_map<long long, long long>& estimates() const { return estimate_; }

 private:
  static std::uint64_t key(int site, long long item) {
    return (static_cast<std::uint64_t>(site) << 48) ^ static_cast<std::uint64_t>(item);
  }
  freq_tracker_params p_;
  count_tracker_center counter_;
  std::unordered_map<std::uint64_t, long long> last_;
  std::unordered_map<long long, long long> estimate_;
  long long last_broadcast_ = 0;  // first report triggers the first broadcast
};

// Single-owner composite for direct use; message accounting is left to the
// harness adapters in trackers.hpp.
class freq_tracker {
 public:
  freq_tracker(const freq_tracker_params& p, std::uint64_t seed = 0)
      : p_(p), center_(p), rng_(seed) {
    for (int i = 0; i < p.k; ++i) sites_.emplace_back(p);
  }

  void arrive(int site, long long item) {
    auto out = sites_[site].on_item(item, &rng_);
    if (out.count_report) {
      center_.on_count_report(site, *out.count_report);
      ++messages_;
    }
    for (auto [it, cnt] : out.item_reports) {
      center_.on_item_report(site, it, cnt);
      ++messages_;
    }
    if (auto nh = center_.pending_broadcast()) {
      center_.broadcast_sent(*nh);
      for (auto& s : sites_) s.on_nhat_broadcast(*nh);
      messages_ += p_.k;
    }
  }

  long long estimate(long long item) const { return center_.estimate(item); }
  long long n_hat() const { return center_.n_hat(); }
  long long messages() const { return messages_; }

 private:
  freq_tracker_params p_;
  std::vector<freq_tracker_site> sites_;
  freq_tracker_center center_;
  rng rng_;
  long long messages_ = 0;
};

}  // namespace dvs
