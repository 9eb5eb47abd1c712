#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dvs {

using candidate_id = int;

// Declared by a center that has not yet seen a single ballot.
inline constexpr candidate_id no_winner = -1;

struct dvs_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ballot kind does not match what the rule consumes.
struct kind_mismatch_error : dvs_error {
  using dvs_error::dvs_error;
};

// Voting rules are undefined on an election with no ballots.
struct empty_election_error : dvs_error {
  using dvs_error::dvs_error;
};

// Exhaustive oracle asked to enumerate beyond its feasibility cap.
struct oracle_too_large_error : dvs_error {
  using dvs_error::dvs_error;
};

// An endpoint broke a model rule (message from a query, site-to-site send, ...).
struct protocol_violation_error : dvs_error {
  using dvs_error::dvs_error;
};

enum class ballot_kind { approval, ordinal };

inline const char* to_string(ballot_kind k) {
  return k == ballot_kind::approval ? "approval" : "ordinal";
}

// Approval: `ids` is the approved set, kept sorted ascending, non-empty.
// Ordinal: `ids` is a full permutation of 0..m-1 in preference order.
struct ballot {
  ballot_kind kind = ballot_kind::approval;
  std::vector<candidate_id> ids;

  static ballot approval(std::vector<candidate_id> set) {
    std::sort(set.begin(), set.end());
    return ballot{ballot_kind::approval, std::move(set)};
  }
  static ballot ordinal(std::vector<candidate_id> order) {
    return ballot{ballot_kind::ordinal, std::move(order)};
  }
  bool operator==(const ballot&) const = default;
};

inline void validate_ballot(const ballot& b, int m) {
  if (b.ids.empty()) throw dvs_error("ballot has no entries");
  for (candidate_id c : b.ids)
    if (c < 0 || c >= m) throw dvs_error("ballot references candidate out of roster");
  if (b.kind == ballot_kind::ordinal) {
    if (static_cast<int>(b.ids.size()) != m) throw dvs_error("ordinal ballot is not a full ranking");
    std::vector<char> seen(m, 0);
    for (candidate_id c : b.ids) {
      if (seen[c]) throw dvs_error("ordinal ballot repeats a candidate");
      seen[c] = 1;
    }
  } else {
    for (std::size_t i = 1; i < b.ids.size(); ++i)
      if (b.ids[i - 1] >= b.ids[i]) throw dvs_error("approval set not strictly sorted");
  }
}

struct election {
  int m = 0;
  ballot_kind kind = ballot_kind::approval;
  std::vector<ballot> ballots;

  long long n() const { return static_cast<long long>(ballots.size()); }

  void add(ballot b) {
    if (b.kind != kind) throw kind_mismatch_error("ballot kind differs from election kind");
    validate_ballot(b, m);
    ballots.push_back(std::move(b));
  }
};

inline election make_election(int m, ballot_kind kind) {
  if (m < 2) throw dvs_error("need at least two candidates");
  return election{m, kind, {}};
}

// --- text format ------------------------------------------------------------
//
// Header line:  m=<int> kind=<approval|ordinal>
// Body: one ballot per line, candidate ids comma-separated.
// Stream variant: each ballot line is prefixed with "site=<id> ".

inline std::string format_ballot(const ballot& b) {
  std::string out;
  for (std::size_t i = 0; i < b.ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(b.ids[i]);
  }
  return out;
}

inline ballot parse_ballot(const std::string& line, ballot_kind kind) {
  std::vector<candidate_id> ids;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    ids.push_back(std::stoi(tok));
  }
  return kind == ballot_kind::approval ? ballot::approval(std::move(ids))
                                       : ballot::ordinal(std::move(ids));
}

inline void write_election(std::ostream& os, const election& e) {
  os << "m=" << e.m << " kind=" << to_string(e.kind) << "\n";
  for (const ballot& b : e.ballots) os << format_ballot(b) << "\n";
}

inline std::pair<int, ballot_kind> parse_election_header(const std::string& line) {
  int m = 0;
  std::string kind_str;
  std::stringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    if (tok.rfind("m=", 0) == 0) m = std::stoi(tok.substr(2));
    else if (tok.rfind("kind=", 0) == 0) kind_str = tok.substr(5);
  }
  if (m < 2) throw dvs_error("bad election header: " + line);
  if (kind_str == "approval") return {m, ballot_kind::approval};
  if (kind_str == "ordinal") return {m, ballot_kind::ordinal};
  throw dvs_error("bad ballot kind in header: " + line);
}

inline election read_election(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw dvs_error("empty election file");
  auto [m, kind] = parse_election_header(line);
  election e = make_election(m, kind);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    e.add(parse_ballot(line, kind));
  }
  return e;
}

}  // namespace dvs
