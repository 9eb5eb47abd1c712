#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dvs/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

dvs::ballot_kind parse_kind(const std::string& s) {
  if (s == "approval") return dvs::ballot_kind::approval;
  if (s == "ordinal") return dvs::ballot_kind::ordinal;
  throw dvs::dvs_error("unknown ballot kind: " + s);
}

dvs::generator_spec parse_generator(const json& j) {
  dvs::generator_spec g;
  auto kind = dvs::generator_from_string(j.at("kind"));
  if (!kind) throw dvs::dvs_error("unknown generator kind");
  g.kind = *kind;
  g.n = j.value("n", 0ll);
  g.m = j.at("m");
  g.ballots = parse_kind(j.value("ballots", "ordinal"));
  g.approval_t = j.value("approval_t", 0);
  g.seed = j.value("seed", 1ull);
  if (j.contains("weights")) g.weights = j.at("weights").get<std::vector<double>>();
  g.margin = j.value("margin", 0.0);
  g.eps = j.value("eps", 0.1);
  g.k = j.value("k", 2);
  g.phases = j.value("phases", 0);
  return g;
}

dvs::experiment_cell parse_cell(const json& j, int index) {
  dvs::experiment_cell cell;
  cell.name = j.value("name", "cell" + std::to_string(index));

  auto rule = dvs::rule_from_string(j.at("rule"));
  if (!rule) throw dvs::dvs_error("unknown rule in cell " + cell.name);
  cell.tracker.rule.kind = *rule;
  cell.tracker.rule.t = j.value("t", 1);

  auto tech = dvs::technique_from_string(j.at("technique"));
  if (!tech) throw dvs::dvs_error("unknown technique in cell " + cell.name);
  cell.tracker.tech = *tech;
  cell.tracker.mode = j.value("freq_mode", std::string("deterministic")) == "randomized"
                          ? dvs::freq_mode::randomized
                          : dvs::freq_mode::deterministic;
  cell.tracker.eps = j.at("eps");
  cell.tracker.delta = j.value("delta", 0.1);
  cell.tracker.k = j.at("k");
  cell.tracker.m = j.at("m");

  cell.gen = parse_generator(j.at("generator"));
  cell.gen.m = cell.tracker.m;
  cell.gen.ballots = dvs::required_kind(cell.tracker.rule.kind);
  if (cell.tracker.rule.kind == dvs::rule_kind::plurality) cell.gen.approval_t = 1;
  if (cell.tracker.rule.kind == dvs::rule_kind::t_approval)
    cell.gen.approval_t = cell.tracker.rule.t;

  const std::string assign = j.value("assignment", "round_robin");
  if (assign == "round_robin") cell.assign.kind = dvs::assignment_kind::round_robin;
  else if (assign == "uniform_random") cell.assign.kind = dvs::assignment_kind::uniform_random;
  else if (assign == "single_site") cell.assign.kind = dvs::assignment_kind::single_site;
  else if (assign == "per_generator") cell.assign.kind = dvs::assignment_kind::per_generator;
  else throw dvs::dvs_error("unknown assignment policy: " + assign);
  cell.assign.k = cell.tracker.k;
  if (cell.gen.kind == dvs::generator_kind::adversarial_flip) {
    cell.assign.kind = dvs::assignment_kind::per_generator;
    cell.gen.k = cell.tracker.k;
  }

  if (j.contains("queries")) {
    const json& q = j.at("queries");
    const std::string qk = q.value("kind", "powers_of_two");
    if (qk == "powers_of_two") cell.queries.k = dvs::query_schedule::kind::powers_of_two;
    else if (qk == "every") {
      cell.queries.k = dvs::query_schedule::kind::every;
      cell.queries.every = q.at("every");
    } else if (qk == "list") {
      cell.queries.k = dvs::query_schedule::kind::list;
      cell.queries.times = q.at("times").get<std::vector<long long>>();
    } else throw dvs::dvs_error("unknown query schedule: " + qk);
  }
  cell.trials = j.value("trials", 1);
  return cell;
}

dvs::oracle_mode parse_oracle(const std::string& s) {
  if (s == "exact") return dvs::oracle_mode::exact;
  if (s == "witness") return dvs::oracle_mode::witness;
  if (s == "both") return dvs::oracle_mode::both;
  throw dvs::dvs_error("unknown oracle mode: " + s);
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int trials_override,
            std::uint64_t seed_override, bool seed_set, const std::string& oracle, int threads) {
  std::ifstream in(config_path);
  if (!in) throw dvs::dvs_error("cannot open config: " + config_path);
  json j = json::parse(in);

  dvs::experiment_config cfg;
  cfg.root_seed = j.value("seed", 1ull);
  if (seed_set) cfg.root_seed = seed_override;
  cfg.oracle = parse_oracle(j.value("oracle", "both"));
  if (!oracle.empty()) cfg.oracle = parse_oracle(oracle);
  cfg.threads = threads;
  cfg.keep_transcripts = j.value("transcripts", true);
  int index = 0;
  for (const json& cj : j.at("cells")) {
    dvs::experiment_cell cell = parse_cell(cj, index++);
    if (trials_override > 0) cell.trials = trials_override;
    cfg.cells.push_back(std::move(cell));
  }

  auto results = dvs::run_experiment(cfg);

  fs::create_directories(out_dir);
  std::ofstream csv(fs::path(out_dir) / "report.csv", std::ios::binary);
  dvs::write_report_csv(csv, results);

  if (cfg.keep_transcripts) {
    fs::create_directories(fs::path(out_dir) / "transcripts");
    for (const auto& r : results) {
      std::ofstream ts(fs::path(out_dir) / "transcripts" /
                           (r.row.cell + "_t" + std::to_string(r.row.trial) + ".jsonl"),
                       std::ios::binary);
      dvs::write_transcript(ts, r.tr, r.meta);
    }
  }

  json meta;
  meta["config"] = config_path;
  meta["rows"] = results.size();
  long long total_ms = 0, failures = 0, queries = 0;
  for (const auto& r : results) {
    total_ms += r.row.runtime_ms;
    failures += r.row.audit.failures;
    queries += r.row.audit.queries;
  }
  meta["runtime_ms_total"] = total_ms;
  meta["audit_queries"] = queries;
  meta["audit_failures"] = failures;
  std::ofstream ms(fs::path(out_dir) / "meta.json", std::ios::binary);
  ms << meta.dump(2) << "\n";

  std::cout << "wrote " << results.size() << " rows to " << (fs::path(out_dir) / "report.csv")
            << " (" << failures << "/" << queries << " audit failures)\n";
  return failures == 0 ? 0 : 2;
}

int cmd_audit(const std::string& transcript_path, const std::string& oracle, double eps_override) {
  std::ifstream in(transcript_path);
  if (!in) throw dvs::dvs_error("cannot open transcript: " + transcript_path);
  auto loaded = dvs::read_transcript(in);
  if (eps_override > 0) loaded.meta.eps = eps_override;
  auto summary = dvs::audit_transcript(loaded.tr, loaded.meta,
                                       parse_oracle(oracle.empty() ? "both" : oracle));
  std::cout << "queries=" << summary.queries << " failures=" << summary.failures
            << " unknowns=" << summary.unknowns << " skipped=" << summary.skipped << "\n";
  for (const auto& a : loaded.tr.audits)
    std::cout << "t=" << a.time << " declared=" << a.declared << " " << dvs::to_string(a.verdict)
              << " (" << a.mode << ")\n";
  return summary.failures == 0 ? 0 : 2;
}

int cmd_gen(const std::string& spec_path, const std::string& out_path) {
  std::ifstream in(spec_path);
  if (!in) throw dvs::dvs_error("cannot open generator spec: " + spec_path);
  json j = json::parse(in);
  dvs::generator_spec g = parse_generator(j);
  auto events = dvs::generate(g);
  if (g.kind != dvs::generator_kind::adversarial_flip) {
    dvs::assignment_policy ap;
    ap.kind = dvs::assignment_kind::round_robin;
    ap.k = j.value("k", 1);
    ap.seed = g.seed;
    const std::string assign = j.value("assignment", "round_robin");
    if (assign == "uniform_random") ap.kind = dvs::assignment_kind::uniform_random;
    else if (assign == "single_site") ap.kind = dvs::assignment_kind::single_site;
    dvs::assign_sites(events, ap);
  }
  std::ofstream out(out_path, std::ios::binary);
  dvs::write_stream(out, events, g.m, g.ballots);
  std::cout << "wrote " << events.size() << " events to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed vote-stream winner monitoring"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment grid from a JSON config");
  std::string config_path, out_dir = "out", oracle;
  int trials = 0, threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--trials", trials, "override trials per cell");
  run->add_option("--seed", seed, "override root seed")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--oracle", oracle, "audit oracle: exact, witness, or both");
  run->add_option("--threads", threads, "worker threads (0 = all cores)");

  auto* audit = app.add_subcommand("audit", "re-audit a transcript");
  std::string transcript_path, audit_oracle;
  double eps_override = 0;
  audit->add_option("--transcript", transcript_path, "transcript JSONL path")->required();
  audit->add_option("--oracle", audit_oracle, "audit oracle: exact, witness, or both");
  audit->add_option("--eps", eps_override, "override the eps recorded in the transcript");

  auto* gen = app.add_subcommand("gen", "generate a stream file from a spec");
  std::string spec_path, gen_out;
  gen->add_option("--spec", spec_path, "generator spec (JSON)")->required();
  gen->add_option("--out", gen_out, "output stream file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, trials, seed, seed_set, oracle, threads);
    if (audit->parsed()) return cmd_audit(transcript_path, audit_oracle, eps_override);
    if (gen->parsed()) return cmd_gen(spec_path, gen_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
