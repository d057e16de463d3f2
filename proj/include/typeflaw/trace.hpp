#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "typeflaw/analysis.hpp"

namespace tf {

struct TraceMessage {
  std::string label;  // e.g. "α.1"
  std::string strand;
  int step = 0;
  std::string sender;    // "i(a)" when the attacker poses as a
  std::string receiver;  // "i(a)" when the attacker intercepts a message meant for a
  bool spoofed = false;
  std::string term;

  friend bool operator==(const TraceMessage&, const TraceMessage&) = default;
};

struct TraceStats {
  std::size_t sequences = 0;
  std::size_t states = 0;
  std::size_t memo_hits = 0;
  std::size_t unifiers = 0;
  std::size_t ill_typed_unifiers = 0;
  std::size_t subterm_violations = 0;
  std::size_t weakness_steps = 0;

  friend bool operator==(const TraceStats&, const TraceStats&) = default;
};

struct AttackTrace {
  std::string protocol;
  std::string scenario;
  std::string verdict;
  bool type_flaw = false;
  bool exhausted = true;
  std::string note;
  std::vector<std::pair<std::string, std::string>> substitution;
  std::vector<TraceMessage> messages;
  std::vector<RuleStep> rule_trace;
  TraceStats stats;

  bool operator==(const AttackTrace& o) const;
};

AttackTrace make_trace(const AttackVerdict& v, const SemiBundle& S, const std::string& protocol,
                       const std::string& scenario);
std::string write_trace_json(const AttackTrace& t);
AttackTrace read_trace_json(std::string_view text);
std::string render_alice_bob(const AttackTrace& t);

}  // namespace tf
