#include <fstream>
#include <sstream>

#include "typeflaw/dsl.hpp"
#include "typeflaw/parse.hpp"

namespace tf {

namespace {

struct Line {
  int number;
  std::string text;
};

std::vector<Line> lines_of(std::string_view text) {
  std::vector<Line> out;
  int n = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++n;
    std::string line(text.substr(pos, end - pos));
    if (auto c = line.find("--"); c != std::string::npos) line.erase(c);
    if (line.find_first_not_of(" \t\r") != std::string::npos) out.push_back({n, line});
    pos = end + 1;
  }
  return out;
}

std::string ident(Lexer& lx, const std::string& what) {
  if (lx.peek().type != Token::Type::Ident) lx.fail("expected " + what);
  return lx.next().text;
}

void end_of_line(Lexer& lx) {
  if (!lx.at_end()) lx.fail("unexpected input");
}

// `X, Y : Type`
void declarations(Lexer& lx, std::map<std::string, TypeTag>& into, int line) {
  std::vector<std::string> names{ident(lx, "a name")};
  while (lx.accept(",")) names.push_back(ident(lx, "a name"));
  if (lx.at_end()) throw TypeAnnotationMissing("line " + std::to_string(line) + ": no type given for " + names[0]);
  lx.expect(":");
  TypeTag ty = parse_type(lx);
  end_of_line(lx);
  for (const auto& n : names) into[n] = ty;
}

std::string rest(const std::string& line, const std::string& keyword) {
  std::string s = line.substr(line.find(keyword) + keyword.size());
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

Protocol parse_protocol(std::string_view text) {
  Protocol P;
  Symbols syms;
  std::optional<std::size_t> role;
  for (const auto& [number, line] : lines_of(text)) {
    Lexer lx(line, number);
    Token kw = lx.next();
    if (kw.type != Token::Type::Ident) throw SyntaxError("expected a keyword", kw.line, kw.col);
    if (kw.text == "protocol") {
      P.name = ident(lx, "a protocol name");
      end_of_line(lx);
    } else if (kw.text == "var") {
      declarations(lx, syms.vars, number);
    } else if (kw.text == "atom") {
      declarations(lx, syms.atoms, number);
    } else if (kw.text == "role") {
      std::string name = ident(lx, "a role name");
      lx.expect(":");
      end_of_line(lx);
      if (P.role(name)) throw SyntaxError("duplicate role " + name, kw.line, kw.col);
      P.roles.push_back(Strand{name, {}, ""});
      role = P.roles.size() - 1;
    } else if (kw.text == "send" || kw.text == "recv") {
      if (!role) throw SyntaxError(kw.text + " outside a role", kw.line, kw.col);
      Node n;
      n.sign = kw.text == "send" ? Sign::Plus : Sign::Minus;
      const char* dir = n.sign == Sign::Plus ? "to" : "from";
      if (lx.peek().type == Token::Type::Ident && lx.peek().text == dir) {
        lx.next();
        n.peer = parse_term(lx, syms);
        lx.expect(":");
      }
      n.term = parse_term(lx, syms);
      end_of_line(lx);
      P.roles[*role].nodes.push_back(std::move(n));
    } else {
      throw SyntaxError("unknown keyword '" + kw.text + "'", kw.line, kw.col);
    }
  }
  if (P.roles.empty()) throw SyntaxError("protocol has no roles", 1, 1);
  P.var_types = syms.vars;
  return P;
}

Scenario parse_scenario(std::string_view text) {
  Scenario sc;
  Symbols syms;
  bool any = false;
  for (const auto& [number, line] : lines_of(text)) {
    any = true;
    Lexer lx(line, number);
    Token kw = lx.next();
    if (kw.type != Token::Type::Ident) throw SyntaxError("expected a keyword", kw.line, kw.col);
    if (kw.text == "scenario") {
      sc.name = ident(lx, "a scenario name");
      end_of_line(lx);
    } else if (kw.text == "protocol") {
      sc.protocol = ident(lx, "a protocol name");
      end_of_line(lx);
    } else if (kw.text == "atom") {
      declarations(lx, syms.atoms, number);
    } else if (kw.text == "strand") {
      StrandInstance inst;
      inst.label = ident(lx, "a strand label");
      lx.expect(":");
      inst.role = ident(lx, "a role name");
      if (lx.accept("{") && !lx.accept("}")) {
        do {
          std::string var = ident(lx, "a variable");
          lx.expect("=");
          inst.bindings.emplace_back(var, parse_term(lx, syms));
        } while (lx.accept(","));
        lx.expect("}");
      }
      end_of_line(lx);
      sc.instances.push_back(std::move(inst));
    } else if (kw.text == "goal" || kw.text == "know" || kw.text == "weak") {
      Term t = parse_term(lx, syms);
      end_of_line(lx);
      (kw.text == "goal" ? sc.goals : kw.text == "know" ? sc.know : sc.weak).push_back(t);
    } else if (kw.text == "option") {
      std::string opt = rest(line, "option");
      if (opt != "assoc-pairs") throw SyntaxError("unknown option '" + opt + "'", kw.line, kw.col);
      sc.assoc_pairs = true;
    } else {
      throw SyntaxError("unknown keyword '" + kw.text + "'", kw.line, kw.col);
    }
  }
  if (!any) throw SyntaxError("empty scenario", 1, 1);
  sc.atoms = syms.atoms;
  return sc;
}

namespace {

void collect_atoms(const Term& t, std::map<std::string, TypeTag>& out) {
  if (t.is_atom()) out[t.name()] = t.declared_type();
  for (const Term& a : t.args()) collect_atoms(a, out);
}

void group(std::ostringstream& os, const char* kw, const std::map<std::string, TypeTag>& decls) {
  std::map<std::string, std::vector<std::string>> by_type;
  std::vector<std::string> order;
  for (const auto& [name, ty] : decls) {
    std::string t = to_string(ty);
    if (!by_type.count(t)) order.push_back(t);
    by_type[t].push_back(name);
  }
  for (const auto& t : order) {
    os << kw << ' ';
    for (std::size_t i = 0; i < by_type[t].size(); ++i) os << (i ? ", " : "") << by_type[t][i];
    os << " : " << t << '\n';
  }
}

}  // namespace

std::string print_protocol(const Protocol& P) {
  std::map<std::string, TypeTag> vars = P.var_types, atoms;
  for (const auto& r : P.roles)
    for (const auto& n : r.nodes) {
      std::map<std::string, Term> vs;
      collect_vars(n.term, vs);
      if (n.peer) collect_vars(*n.peer, vs);
      for (const auto& [name, v] : vs) vars[name] = v.declared_type();
      collect_atoms(n.term, atoms);
      if (n.peer) collect_atoms(*n.peer, atoms);
    }
  std::ostringstream os;
  if (!P.name.empty()) os << "protocol " << P.name << "\n\n";
  group(os, "var", vars);
  group(os, "atom", atoms);
  for (const auto& r : P.roles) {
    os << "\nrole " << r.role_name << ":\n";
    for (const auto& n : r.nodes) {
      os << "  " << (n.sign == Sign::Plus ? "send" : "recv");
      if (n.peer) os << (n.sign == Sign::Plus ? " to " : " from ") << to_string(*n.peer) << ':';
      os << ' ' << to_string(n.term) << '\n';
    }
  }
  return os.str();
}

SemiBundle build_semibundle(const Protocol& P, const Scenario& sc) {
  SemiBundle S;
  std::set<Term> agents;
  for (const auto& [name, ty] : sc.atoms)
    if (ty.kind == TypeTag::Kind::Agent) agents.insert(mk_atom(name, ty));
  for (const auto& inst : sc.instances) {
    const Strand* role = P.role(inst.role);
    if (!role) throw UnknownRole("no role " + inst.role + " in protocol " + P.name);
    std::map<std::string, Term> vars;
    for (const auto& n : role->nodes) {
      collect_vars(n.term, vars);
      if (n.peer) collect_vars(*n.peer, vars);
    }
    Substitution sigma;
    for (const auto& [name, value] : inst.bindings) {
      auto it = vars.find(name);
      if (it == vars.end()) throw UnknownVariable("role " + inst.role + " has no variable " + name);
      sigma.bind(it->second, value);
    }
    S.strands.push_back(instantiate_role(*role, sigma, inst.label));
    S.honest.push_back(sigma);
  }
  for (std::size_t g = 0; g < sc.goals.size(); ++g) {
    std::string label = g == 0 ? "goal" : "goal" + std::to_string(g + 1);
    S.strands.push_back(Strand{"goal", {Node{Sign::Minus, sc.goals[g], std::nullopt}}, label});
    S.honest.emplace_back();
  }
  S.initial_knowledge = initial_knowledge(S.strands, agents);
  for (const Term& t : sc.know) S.initial_knowledge.insert(t);
  S.weak_keys.insert(sc.weak.begin(), sc.weak.end());
  S.assoc_pairs = sc.assoc_pairs;
  return S;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Protocol load_protocol(const std::string& path) { return parse_protocol(read_file(path)); }
Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

}  // namespace tf
