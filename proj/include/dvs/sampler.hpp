#pragma once

#include <cstdint>
#include <vector>

#include "dvs/rng.hpp"
#include "dvs/types.hpp"

namespace dvs {

// Distributed uniform sampling. Every item draws a level = number of leading
// successes of fair coin flips; sites forward items with level >= r. When the
// center's pool exceeds 4s it raises r, discards low-level items, and
// broadcasts the new round, so the pool stays a uniform random subset of the
// stream.

template <typename Item>
class sampler_site {
 public:
  explicit sampler_site(int round = 0) : round_(round) {}

  // returns the level to forward with, if the item survives the local filter
  std::optional<int> on_item(rng& coin) {
    int level = coin.geometric_level();
    if (level >= round_) return level;
    return std::nullopt;
  }

  void on_round_broadcast(int r) { round_ = r; }
  int round() const { return round_; }

 private:
  int round_ = 0;
};

template <typename Item>
class sampler_center {
 public:
  explicit sampler_center(long long target) : target_(target) {
    if (target_ < 1) throw dvs_error("sample target must be positive");
  }

  struct entry {
    Item item;
    int level;
  };

  // returns the new round if the pool overflowed and r was raised
  std::optional<int> on_item(Item item, int level) {
    if (level < round_) return std::nullopt;  // stale forward from a lagging site
    pool_.push_back({std::move(item), level});
    std::optional<int> raised;
    while (static_cast<long long>(pool_.size()) > 4 * target_) {
      ++round_;
      raised = round_;
      std::vector<entry> kept;
      kept.reserve(pool_.size() / 2 + 1);
      for (auto& e : pool_)
        if (e.level >= round_) kept.push_back(std::move(e));
      pool_.swap(kept);
    }
    return raised;
  }

  // min(s, |pool|) distinct uniform picks; `short_sample` flags |pool| < s
  std::vector<Item> draw(long long s, rng& r, bool* short_sample = nullptr) const {
    if (short_sample) *short_sample = static_cast<long long>(pool_.size()) < s;
    std::vector<std::size_t> idx(pool_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<Item> out;
    long long want = std::min<long long>(s, static_cast<long long>(pool_.size()));
    for (long long i = 0; i < want; ++i) {
      std::size_t j = i + static_cast<std::size_t>(r.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
      out.push_back(pool_[idx[i]].item);
    }
    return out;
  }

  const std::vector<entry>& pool() const { return pool_; }
  int round() const { return round_; }

 private:
  long long target_;
  int round_ = 0;
  std::vector<entry> pool_;
};

}  // namespace dvs
