#pragma once

#include <atomic>
#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <thread>

#include "dvs/generators.hpp"
#include "dvs/oracle.hpp"
#include "dvs/trackers.hpp"
#include "dvs/transcript_io.hpp"

namespace dvs {

enum class oracle_mode { exact, witness, both };

inline const char* to_string(oracle_mode m) {
  switch (m) {
    case oracle_mode::exact: return "exact";
    case oracle_mode::witness: return "witness";
    case oracle_mode::both: return "both";
  }
  return "?";
}

// Audits every declaration of a transcript against the election prefix at
// its query time. `both` uses the exhaustive oracle when the instance fits
// under the cap and the witness construction otherwise.
struct audit_summary {
  long long queries = 0;
  long long failures = 0;
  long long unknowns = 0;
  long long skipped = 0;  // declarations before the first ballot

  double failure_rate() const {
    return queries ? static_cast<double>(failures) / static_cast<double>(queries) : 0.0;
  }
  double unknown_rate() const {
    return queries ? static_cast<double>(unknowns) / static_cast<double>(queries) : 0.0;
  }
};

inline audit_summary audit_transcript(transcript& tr, const transcript_meta& meta,
                                      oracle_mode mode,
                                      long long cap = default_oracle_cap) {
  const rule_spec rule{meta.rule, meta.t, {}};
  audit_summary out;
  tallies prefix(meta.m, meta.kind);
  std::size_t ei = 0;
  std::vector<ballot> prefix_ballots;
  eps_winner_oracle oracle(cap);

  for (const auto& decl : tr.declarations) {
    while (ei < tr.events.size() && tr.events[ei].time <= decl.time) {
      prefix.add(tr.events[ei].b);
      prefix_ballots.push_back(tr.events[ei].b);
      ++ei;
    }
    audit_record rec{decl.time, decl.declared, audit_verdict::skipped, "-"};
    if (prefix.n == 0) {
      ++out.skipped;
      tr.audits.push_back(rec);
      continue;  // rules are undefined before the first ballot
    }
    ++out.queries;
    if (decl.declared == no_winner) {
      rec.verdict = audit_verdict::fail;  // a vote was seen, sentinel not allowed
      rec.mode = "-";
      ++out.failures;
      tr.audits.push_back(rec);
      continue;
    }
    bool use_exact = mode != oracle_mode::witness;
    if (mode == oracle_mode::both) {
      long long space = static_cast<long long>(augmentation_space(rule, meta.m).size());
      long long q = eps_budget(meta.eps, prefix.n);
      use_exact = augmentation_multisets(space, q, cap) <= cap;
    }
    if (use_exact) {
      rec.mode = "exact";
      bool ok = oracle.exact(prefix, decl.declared, meta.eps, rule);
      rec.verdict = ok ? audit_verdict::pass : audit_verdict::fail;
      if (!ok) ++out.failures;
    } else {
      rec.mode = "witness";
      auto w = is_eps_winner_witness(prefix, decl.declared, meta.eps, rule);
      rec.verdict = w.yes() ? audit_verdict::pass : audit_verdict::unknown;
      if (!w.yes()) ++out.unknowns;
    }
    tr.audits.push_back(rec);
  }
  return out;
}

// --- experiment configuration -------------------------------------------------

struct query_schedule {
  enum class kind { powers_of_two, every, list } k = kind::powers_of_two;
  long long every = 0;
  std::vector<long long> times;

  std::vector<long long> materialize(long long n, const std::vector<long long>& phase_ends) const {
    std::vector<long long> out;
    switch (k) {
      case kind::powers_of_two:
        for (long long t = 1; t <= n; t *= 2) out.push_back(t);
        if (out.empty() || out.back() != n) out.push_back(n);
        break;
      case kind::every:
        for (long long t = every; t <= n; t += every) out.push_back(t);
        break;
      case kind::list: out = times; break;
    }
    out.insert(out.end(), phase_ends.begin(), phase_ends.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

struct experiment_cell {
  std::string name;
  tracker_config tracker;
  generator_spec gen;
  assignment_policy assign;
  query_schedule queries;
  int trials = 1;
};

struct experiment_config {
  std::vector<experiment_cell> cells;
  oracle_mode oracle = oracle_mode::both;
  std::uint64_t root_seed = 1;
  int threads = 0;          // 0 = hardware concurrency
  bool keep_transcripts = false;
};

struct report_row {
  std::string cell;
  int trial = 0;
  std::string rule, tech, mode;
  double eps = 0, delta = 0;
  int k = 0, m = 0, t = 1;
  long long n = 0;
  std::uint64_t seed = 0;
  long long comm_bits = 0, tag_bits = 0, comm_words = 0;
  long long message_count = 0, checkpoint_count = 0;
  audit_summary audit;
  long long runtime_ms = 0;  // reported in the run metadata, not the CSV
};

inline const std::string report_csv_header =
    "cell,trial,rule,technique,mode,eps,delta,k,m,t,n,seed,comm_bits,tag_bits,comm_words,"
    "message_count,checkpoint_count,queries,failures,failure_rate,unknowns,unknown_rate";

inline std::string csv_line(const report_row& r) {
  std::ostringstream os;
  os << r.cell << ',' << r.trial << ',' << r.rule << ',' << r.tech << ',' << r.mode << ','
     << std::setprecision(10) << r.eps << ',' << r.delta << ',' << r.k << ',' << r.m << ',' << r.t
     << ',' << r.n << ',' << r.seed << ',' << r.comm_bits << ',' << r.tag_bits << ','
     << r.comm_words << ',' << r.message_count << ',' << r.checkpoint_count << ','
     << r.audit.queries << ',' << r.audit.failures << ',' << std::fixed << std::setprecision(6)
     << r.audit.failure_rate() << ',' << r.audit.unknowns << ',' << r.audit.unknown_rate();
  return os.str();
}

struct trial_result {
  report_row row;
  transcript tr;
  transcript_meta meta;
};

// Runs one seeded trial of one cell: generate, simulate, audit, account.
inline trial_result run_trial(const experiment_cell& cell, int trial, std::uint64_t root_seed,
                              oracle_mode om) {
  auto t0 = std::chrono::steady_clock::now();
  trial_result out;
  const std::uint64_t cell_seed =
      mix_seed(root_seed, std::hash<std::string>{}(cell.name), static_cast<std::uint64_t>(trial));

  generator_spec gen = cell.gen;
  gen.seed = mix_seed(cell_seed, 0xabcdull);
  std::vector<stream_event> events = generate(gen);
  assignment_policy ap = cell.assign;
  ap.seed = mix_seed(cell_seed, 0xbeefull);
  assign_sites(events, ap);

  std::vector<long long> phase_ends;
  if (gen.kind == generator_kind::adversarial_flip) {
    auto x = adversarial_phase_sizes(gen.eps, gen.k, gen.phases);
    long long t = 0;
    for (int i = 1; i <= gen.phases; ++i) {
      t += x[i] * gen.k;
      phase_ends.push_back(t);
    }
  }
  const long long n = static_cast<long long>(events.size());
  std::vector<long long> queries = cell.queries.materialize(n, phase_ends);

  transcript tr = run_stream(events, make_tracker_family(cell.tracker), queries,
                             mix_seed(cell_seed, 0xfeedull), cell.tracker.k);

  out.meta = transcript_meta{cell.tracker.m, required_kind(cell.tracker.rule.kind),
                             cell.tracker.rule.kind, cell.tracker.rule.t, cell.tracker.eps,
                             cell.tracker.k};
  audit_summary audit = audit_transcript(tr, out.meta, om);

  report_row& row = out.row;
  row.cell = cell.name;
  row.trial = trial;
  row.rule = to_string(cell.tracker.rule.kind);
  row.tech = to_string(cell.tracker.tech);
  row.mode = cell.tracker.tech == technique::frequency
                 ? (cell.tracker.mode == freq_mode::deterministic ? "det" : "rand")
                 : "-";
  row.eps = cell.tracker.eps;
  row.delta = cell.tracker.delta;
  row.k = cell.tracker.k;
  row.m = cell.tracker.m;
  row.t = cell.tracker.rule.t;
  row.n = n;
  row.seed = cell_seed;
  row.comm_bits = tr.ledger.total_bits;
  row.tag_bits = tr.ledger.tag_bits;
  row.comm_words = tr.ledger.words(std::max<long long>(2, n));
  row.message_count = tr.ledger.message_count;
  row.checkpoint_count = tr.checkpoint_count;
  row.audit = audit;
  row.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  out.tr = std::move(tr);
  return out;
}

// Fans trials out across workers; rows come back in deterministic
// (cell, trial) order regardless of scheduling.
inline std::vector<trial_result> run_experiment(const experiment_config& cfg) {
  struct task {
    const experiment_cell* cell;
    int trial;
  };
  std::vector<task> tasks;
  for (const auto& cell : cfg.cells)
    for (int t = 0; t < cell.trials; ++t) tasks.push_back({&cell, t});

  std::vector<trial_result> results(tasks.size());
  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, std::max<std::size_t>(1, tasks.size()));
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      results[i] = run_trial(*tasks[i].cell, tasks[i].trial, cfg.root_seed, cfg.oracle);
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  return results;
}

inline void write_report_csv(std::ostream& os, const std::vector<trial_result>& results) {
  os << report_csv_header << "\n";
  for (const auto& r : results) os << csv_line(r.row) << "\n";
}

}  // namespace dvs
