#pragma once

#include <fstream>

#include <json.hpp>

#include "dvs/generators.hpp"
#include "dvs/harness.hpp"
#include "dvs/rules.hpp"

namespace dvs {

// Transcript JSONL schema (one object per line):
//   {"type":"meta", "m":, "kind":, "rule":, "t":, "eps":, "k":}
//   {"type":"event", "time":, "site":, "ballot":[ids...]}
//   {"type":"message", "time":, "site":, "dir":"up"|"down", "tag":, "bits":}
//   {"type":"declaration", "time":, "winner":}
//   {"type":"audit", "time":, "declared":, "verdict":, "mode":}

struct transcript_meta {
  int m = 2;
  ballot_kind kind = ballot_kind::ordinal;
  rule_kind rule = rule_kind::plurality;
  int t = 1;
  double eps = 0.1;
  int k = 1;
};

inline const char* to_string(audit_verdict v) {
  switch (v) {
    case audit_verdict::pass: return "pass";
    case audit_verdict::fail: return "fail";
    case audit_verdict::unknown: return "unknown";
    case audit_verdict::skipped: return "skipped";
  }
  return "?";
}

inline void write_transcript(std::ostream& os, const transcript& tr, const transcript_meta& meta) {
  nlohmann::json j = {{"type", "meta"},         {"m", meta.m},
                      {"kind", to_string(meta.kind)}, {"rule", to_string(meta.rule)},
                      {"t", meta.t},            {"eps", meta.eps},
                      {"k", meta.k}};
  os << j.dump() << "\n";
  for (const auto& ev : tr.events) {
    nlohmann::json e = {{"type", "event"}, {"time", ev.time}, {"site", ev.site},
                        {"ballot", ev.b.ids}};
    os << e.dump() << "\n";
  }
  for (const auto& msg : tr.messages) {
    nlohmann::json m = {{"type", "message"},
                        {"time", msg.time},
                        {"site", msg.site},
                        {"dir", msg.dir == direction::up ? "up" : "down"},
                        {"tag", msg.tag},
                        {"bits", msg.bits}};
    os << m.dump() << "\n";
  }
  for (const auto& d : tr.declarations) {
    nlohmann::json m = {{"type", "declaration"}, {"time", d.time}, {"winner", d.declared}};
    os << m.dump() << "\n";
  }
  for (const auto& a : tr.audits) {
    nlohmann::json m = {{"type", "audit"},
                        {"time", a.time},
                        {"declared", a.declared},
                        {"verdict", to_string(a.verdict)},
                        {"mode", a.mode}};
    os << m.dump() << "\n";
  }
}

struct loaded_transcript {
  transcript_meta meta;
  transcript tr;
};

inline loaded_transcript read_transcript(std::istream& is) {
  loaded_transcript out;
  std::string line;
  long long seen_meta = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    const std::string type = j.at("type");
    if (type == "meta") {
      out.meta.m = j.at("m");
      out.meta.kind = j.at("kind") == "approval" ? ballot_kind::approval : ballot_kind::ordinal;
      if (auto r = rule_from_string(j.at("rule"))) out.meta.rule = *r;
      out.meta.t = j.value("t", 1);
      out.meta.eps = j.at("eps");
      out.meta.k = j.value("k", 1);
      ++seen_meta;
    } else if (type == "event") {
      stream_event ev;
      ev.time = j.at("time");
      ev.site = j.at("site");
      ev.b.kind = out.meta.kind;
      for (const auto& x : j.at("ballot")) ev.b.ids.push_back(x.get<candidate_id>());
      out.tr.events.push_back(std::move(ev));
    } else if (type == "declaration") {
      out.tr.declarations.push_back({j.at("time"), j.at("winner")});
    } else if (type == "message") {
      message_record m;
      m.time = j.at("time");
      m.site = j.at("site");
      m.dir = j.at("dir") == "up" ? direction::up : direction::down;
      m.tag = j.at("tag");
      m.bits = j.at("bits");
      out.tr.messages.push_back(std::move(m));
    }
  }
  if (seen_meta != 1) throw dvs_error("transcript must contain exactly one meta record");
  return out;
}

}  // namespace dvs
