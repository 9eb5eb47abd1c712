#pragma once

#include <cmath>
#include <deque>
#include <memory>

#include "dvs/rng.hpp"
#include "dvs/types.hpp"

namespace dvs {

// One stream element: ballot `b` reaches site `site` at step `time`.
// Times are consecutive from 1; exactly one ballot per step.
struct stream_event {
  long long time = 0;
  int site = 0;
  ballot b;
};

enum class direction { up, down };  // up = site -> center

// Semantic payload of a protocol message plus its declared size in bits.
// Tag overhead (fixed 8 bits per message) is accounted separately so the
// headline bit counts follow the payload-only convention.
struct message {
  std::string tag;
  std::vector<long long> values;
  long long bits = 1;
};

struct message_record {
  long long time = 0;
  int site = 0;
  direction dir = direction::up;
  std::string tag;
  long long bits = 1;
};

inline constexpr long long message_tag_bits = 8;

inline long long value_bits(long long v) {
  if (v < 0) v = -2 * v;  // zig-zag style sizing for the rare signed payload
  int w = std::bit_width(static_cast<std::uint64_t>(v));
  return w == 0 ? 1 : w;
}

// ceil(log2(x)) for x >= 1
inline long long ceil_log2(long long x) {
  if (x <= 1) return 0;
  return std::bit_width(static_cast<std::uint64_t>(x - 1));
}

// ceil(log2(m!)), exact in unsigned 128-bit arithmetic up to m = 33,
// falling back to a summed-logarithm bound above that.
inline long long ceil_log2_factorial(int m) {
  if (m <= 33) {
    unsigned __int128 f = 1;
    for (int i = 2; i <= m; ++i) f *= static_cast<unsigned>(i);
    unsigned __int128 p = 1;
    long long bits = 0;
    while (p < f) { p <<= 1; ++bits; }
    return bits;
  }
  long double s = 0;
  for (int i = 2; i <= m; ++i) s += std::log2(static_cast<long double>(i));
  return static_cast<long long>(std::ceil(s - 1e-9L));
}

inline long long ballot_bits(ballot_kind kind, int m) {
  return kind == ballot_kind::approval ? m : ceil_log2_factorial(m);
}

// Exact bit counts per link and direction; monotone non-decreasing.
struct comm_ledger {
  std::vector<long long> bits_up, bits_down;
  long long total_bits = 0;
  long long tag_bits = 0;
  long long message_count = 0;

  explicit comm_ledger(int k = 0) : bits_up(k, 0), bits_down(k, 0) {}

  void charge(int site, direction dir, long long payload_bits) {
    if (payload_bits <= 0) throw dvs_error("message payload must be at least one bit");
    (dir == direction::up ? bits_up : bits_down)[site] += payload_bits;
    total_bits += payload_bits;
    tag_bits += message_tag_bits;
    ++message_count;
  }

  // post-hoc conversion to the paper's word unit of log n bits
  long long words(long long n_ref) const {
    long long w = std::max<long long>(1, ceil_log2(n_ref));
    return (total_bits + w - 1) / w;
  }
};

struct declaration_record {
  long long time = 0;
  candidate_id declared = no_winner;
};

enum class audit_verdict { pass, fail, unknown, skipped };

struct audit_record {
  long long time = 0;
  candidate_id declared = no_winner;
  audit_verdict verdict = audit_verdict::skipped;
  std::string mode;  // "exact" | "witness" | "-"
};

// Full record of one simulation run.
struct transcript {
  int k = 0;
  std::vector<stream_event> events;
  std::vector<message_record> messages;
  std::vector<declaration_record> declarations;
  std::vector<audit_record> audits;
  comm_ledger ledger{0};
  long long checkpoint_count = 0;  // filled by trackers that use checkpoints
};

class net_context;

// Site role: consumes ballots and center messages, may send to the center.
class site_endpoint {
 public:
  virtual ~site_endpoint() = default;
  virtual void on_ballot(const ballot& b, net_context& net) = 0;
  virtual void on_message(const message& msg, net_context& net) { (void)msg; (void)net; }
};

// Center role: consumes site messages, answers queries from state alone.
class center_endpoint {
 public:
  virtual ~center_endpoint() = default;
  virtual void on_message(int site, const message& msg, net_context& net) = 0;
  virtual candidate_id on_query() const = 0;
  // optional statistic surfaced into the transcript
  virtual long long checkpoint_count() const { return 0; }
};

// Mediates all communication; enforces the star topology and the
// no-communication-on-query rule at run time.
class net_context {
 public:
  net_context(int k, std::uint64_t root_seed) : k_(k), root_seed_(root_seed) {}

  void send_to_center(message m) {
    if (mode_ != mode::site_handler)
      throw protocol_violation_error("only a site handling an input may send to the center");
    pending_.push_back({current_site_, direction::up, std::move(m)});
  }

  void send_to_site(int site, message m) {
    if (mode_ != mode::center_handler)
      throw protocol_violation_error("only the center handling an input may send to a site");
    if (site < 0 || site >= k_) throw protocol_violation_error("message to unknown site");
    pending_.push_back({site, direction::down, std::move(m)});
  }

  // deterministic per (endpoint, event index); endpoint id k_ is the center
  rng endpoint_rng() const {
    int id = mode_ == mode::center_handler ? k_ : current_site_;
    return rng(mix_seed(root_seed_, static_cast<std::uint64_t>(id),
                        static_cast<std::uint64_t>(event_index_)));
  }

  int sites() const { return k_; }

 private:
  friend class simulation;
  enum class mode { idle, site_handler, center_handler };
  struct pending_message {
    int site;
    direction dir;
    message msg;
  };

  int k_;
  std::uint64_t root_seed_;
  mode mode_ = mode::idle;
  int current_site_ = -1;
  long long event_index_ = 0;
  std::deque<pending_message> pending_;
};

// A protocol instance: one center plus k site endpoints.
struct protocol_family {
  std::unique_ptr<center_endpoint> center;
  std::vector<std::unique_ptr<site_endpoint>> sites;
};

class simulation {
 public:
  simulation(protocol_family family, int k, std::uint64_t seed)
      : family_(std::move(family)), net_(k, seed) {
    out_.k = k;
    out_.ledger = comm_ledger(k);
    if (static_cast<int>(family_.sites.size()) != k) throw dvs_error("need one endpoint per site");
  }

  // Feeds one event and drains the resulting message cascade.
  void step(const stream_event& ev) {
    if (ev.site < 0 || ev.site >= net_.k_) throw dvs_error("event addressed to unknown site");
    out_.events.push_back(ev);
    ++net_.event_index_;
    net_.mode_ = net_context::mode::site_handler;
    net_.current_site_ = ev.site;
    family_.sites[ev.site]->on_ballot(ev.b, net_);
    drain(ev.time);
    net_.mode_ = net_context::mode::idle;
  }

  // Zero-communication query; records and returns the declaration.
  candidate_id query(long long time) {
    net_.mode_ = net_context::mode::idle;  // any send attempt now violates
    candidate_id c = family_.center->on_query();
    out_.declarations.push_back({time, c});
    return c;
  }

  const transcript& result() {
    out_.checkpoint_count = family_.center->checkpoint_count();
    return out_;
  }

  center_endpoint& center() { return *family_.center; }

 private:
  void drain(long long time) {
    while (!net_.pending_.empty()) {
      auto pm = std::move(net_.pending_.front());
      net_.pending_.pop_front();
      out_.ledger.charge(pm.site, pm.dir, pm.msg.bits);
      out_.messages.push_back({time, pm.site, pm.dir, pm.msg.tag, pm.msg.bits});
      if (pm.dir == direction::up) {
        net_.mode_ = net_context::mode::center_handler;
        net_.current_site_ = -1;
        family_.center->on_message(pm.site, pm.msg, net_);
      } else {
        net_.mode_ = net_context::mode::site_handler;
        net_.current_site_ = pm.site;
        family_.sites[pm.site]->on_message(pm.msg, net_);
      }
    }
  }

  protocol_family family_;
  net_context net_;
  transcript out_;
};

// Runs a full stream with queries served after the events whose times are
// listed in `query_times` (time 0 queries before the first event).
inline transcript run_stream(const std::vector<stream_event>& events, protocol_family family,
                             const std::vector<long long>& query_times, std::uint64_t seed,
                             int k) {
  simulation sim(std::move(family), k, seed);
  std::size_t qi = 0;
  std::vector<long long> sorted_queries = query_times;
  std::sort(sorted_queries.begin(), sorted_queries.end());
  while (qi < sorted_queries.size() && sorted_queries[qi] < 1) {
    sim.query(sorted_queries[qi]);
    ++qi;
  }
  for (const stream_event& ev : events) {
    sim.step(ev);
    while (qi < sorted_queries.size() && sorted_queries[qi] == ev.time) {
      sim.query(ev.time);
      ++qi;
    }
  }
  // queries beyond the final event observe the final state
  for (; qi < sorted_queries.size(); ++qi) sim.query(sorted_queries[qi]);
  return transcript(sim.result());
}

// --- reference protocols ------------------------------------------------------

// Sites stay silent; the center can only ever answer the sentinel.
struct null_center : center_endpoint {
  void on_message(int, const message&, net_context&) override {}
  candidate_id on_query() const override { return no_winner; }
};
struct null_site : site_endpoint {
  void on_ballot(const ballot&, net_context&) override {}
};

inline protocol_family make_null_protocol(int k) {
  protocol_family f;
  f.center = std::make_unique<null_center>();
  for (int i = 0; i < k; ++i) f.sites.push_back(std::make_unique<null_site>());
  return f;
}

}  // namespace dvs
