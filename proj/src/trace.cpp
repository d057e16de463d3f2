#include <sstream>

#include "json.hpp"
#include "typeflaw/trace.hpp"

namespace tf {

using json = nlohmann::ordered_json;

bool AttackTrace::operator==(const AttackTrace& o) const {
  auto steps_equal = [](const std::vector<RuleStep>& a, const std::vector<RuleStep>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].rule != b[i].rule || a[i].detail != b[i].detail) return false;
    return true;
  };
  return protocol == o.protocol && scenario == o.scenario && verdict == o.verdict && type_flaw == o.type_flaw &&
         exhausted == o.exhausted && note == o.note && substitution == o.substitution && messages == o.messages &&
         steps_equal(rule_trace, o.rule_trace) && stats == o.stats;
}

namespace {

std::string display_label(const std::string& label) {
  static const std::map<std::string, std::string> greek = {
      {"alpha", "α"}, {"beta", "β"}, {"gamma", "γ"}, {"delta", "δ"}};
  auto it = greek.find(label);
  return it == greek.end() ? label : it->second;
}

Term owner_of(const Strand& s, const Substitution& honest, const Substitution& sigma) {
  if (const Term* t = honest.lookup(s.role_name)) return *t;
  const std::string renamed = s.role_name + "_" + s.label;
  if (const Term* t = sigma.lookup(renamed)) return *t;
  return mk_var(renamed, TypeTag::agent());
}

std::string note_for(const AttackVerdict& v) {
  switch (v.kind) {
    case VerdictKind::TypeFlawAttack: return "every satisfier of this sequence is ill-typed";
    case VerdictKind::WellTypedAttackExists: return "not a type-flaw attack: a well-typed satisfier exists";
    case VerdictKind::NoAttackWithinBounds:
      return v.exhausted ? "search exhausted" : "search limits were hit; the claim is bounded";
  }
  return "";
}

}  // namespace

AttackTrace make_trace(const AttackVerdict& v, const SemiBundle& S, const std::string& protocol,
                       const std::string& scenario) {
  AttackTrace t;
  t.protocol = protocol;
  t.scenario = scenario;
  t.verdict = to_string(v.kind);
  t.type_flaw = v.kind == VerdictKind::TypeFlawAttack;
  t.exhausted = v.exhausted;
  t.note = note_for(v);
  t.rule_trace = v.trace;
  t.stats = TraceStats{v.sequences,          v.stats.states,
                       v.stats.memo_hits,    v.stats.unifiers,
                       v.stats.ill_typed_unifiers, v.stats.subterm_violations,
                       v.stats.weakness_steps};

  std::map<std::string, Term> vars;
  for (const auto& s : S.strands)
    for (const auto& n : s.nodes) collect_vars(n.term, vars);
  for (const auto& [name, b] : v.sigma.bindings())
    if (vars.count(name)) t.substitution.emplace_back(name, to_string(b.value));

  if (!v.sequence || v.kind == VerdictKind::NoAttackWithinBounds) return t;
  const Term attacker = mk_attacker();
  for (const NodeRef& r : v.sequence->order) {
    const Strand& s = S.strands[r.strand];
    if (s.role_name == "goal") continue;
    const Node& n = s.nodes[r.index];
    Term owner = owner_of(s, S.honest[r.strand], v.sigma);
    std::optional<Term> peer;
    if (n.peer) peer = apply(v.sigma, *n.peer);
    std::string other = !peer ? "i" : *peer == attacker ? "i" : "i(" + to_string(*peer) + ")";
    TraceMessage m;
    m.strand = s.label;
    m.step = static_cast<int>(r.index) + 1;
    m.label = display_label(s.label) + "." + std::to_string(m.step);
    if (n.sign == Sign::Plus) {
      m.sender = to_string(owner);
      m.receiver = other;
    } else {
      m.sender = other;
      m.receiver = to_string(owner);
      m.spoofed = peer && *peer != attacker;
    }
    m.term = to_string(apply(v.sigma, n.term));
    t.messages.push_back(std::move(m));
  }
  return t;
}

std::string write_trace_json(const AttackTrace& t) {
  json j;
  j["protocol"] = t.protocol;
  j["scenario"] = t.scenario;
  j["verdict"] = {{"kind", t.verdict}, {"type_flaw", t.type_flaw}, {"exhausted", t.exhausted}, {"note", t.note}};
  json sub = json::object();
  for (const auto& [k, v] : t.substitution) sub[k] = v;
  j["substitution"] = sub;
  json msgs = json::array();
  for (const auto& m : t.messages)
    msgs.push_back({{"label", m.label},
                    {"strand", m.strand},
                    {"step", m.step},
                    {"sender", m.sender},
                    {"receiver", m.receiver},
                    {"spoofed", m.spoofed},
                    {"term", m.term}});
  j["messages"] = msgs;
  json rules = json::array();
  for (const auto& r : t.rule_trace) rules.push_back({{"rule", r.rule}, {"detail", r.detail}});
  j["rule_trace"] = rules;
  j["search_stats"] = {{"sequences", t.stats.sequences},
                       {"states", t.stats.states},
                       {"memo_hits", t.stats.memo_hits},
                       {"unifiers", t.stats.unifiers},
                       {"ill_typed_unifiers", t.stats.ill_typed_unifiers},
                       {"subterm_violations", t.stats.subterm_violations},
                       {"weakness_steps", t.stats.weakness_steps}};
  return j.dump(2) + "\n";
}

AttackTrace read_trace_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed trace: ") + e.what());
  }
  AttackTrace t;
  try {
    t.protocol = j.at("protocol").get<std::string>();
    t.scenario = j.at("scenario").get<std::string>();
    const json& v = j.at("verdict");
    t.verdict = v.at("kind").get<std::string>();
    t.type_flaw = v.at("type_flaw").get<bool>();
    t.exhausted = v.at("exhausted").get<bool>();
    t.note = v.at("note").get<std::string>();
    for (const auto& [k, val] : j.at("substitution").items()) t.substitution.emplace_back(k, val.get<std::string>());
    for (const json& m : j.at("messages"))
      t.messages.push_back(TraceMessage{m.at("label").get<std::string>(), m.at("strand").get<std::string>(),
                                        m.at("step").get<int>(), m.at("sender").get<std::string>(),
                                        m.at("receiver").get<std::string>(), m.at("spoofed").get<bool>(),
                                        m.at("term").get<std::string>()});
    for (const json& r : j.at("rule_trace"))
      t.rule_trace.push_back(RuleStep{r.at("rule").get<std::string>(), r.at("detail").get<std::string>()});
    const json& s = j.at("search_stats");
    t.stats.sequences = s.at("sequences").get<std::size_t>();
    t.stats.states = s.at("states").get<std::size_t>();
    t.stats.memo_hits = s.at("memo_hits").get<std::size_t>();
    t.stats.unifiers = s.at("unifiers").get<std::size_t>();
    t.stats.ill_typed_unifiers = s.at("ill_typed_unifiers").get<std::size_t>();
    t.stats.subterm_violations = s.at("subterm_violations").get<std::size_t>();
    t.stats.weakness_steps = s.at("weakness_steps").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(std::string("malformed trace: ") + e.what());
  }
  return t;
}

std::string render_alice_bob(const AttackTrace& t) {
  std::ostringstream os;
  os << t.protocol << " / " << t.scenario << ": " << t.verdict << " (" << t.note << ")\n";
  if (!t.substitution.empty()) {
    os << "substitution:";
    for (const auto& [k, v] : t.substitution) os << ' ' << v << '/' << k;
    os << '\n';
  }
  for (const auto& m : t.messages)
    os << "Msg " << m.label << ". " << m.sender << " → " << m.receiver << " : " << m.term << '\n';
  return os.str();
}

}  // namespace tf
