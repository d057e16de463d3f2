#include <algorithm>
#include <functional>

#include "typeflaw/unify.hpp"

namespace tf {

namespace {

bool same_head(const Term& a, const Term& b) {
  return a.kind() == b.kind() && a.name() == b.name() && a.args().size() == b.args().size() &&
         (a.args().size() > 0 || compare(a, b) == 0);
}

// Adds v -> t to an idempotent substitution, keeping it idempotent.
void extend(Substitution& s, const Term& v, const Term& t) {
  Substitution one;
  one.bind(v, t);
  Substitution next;
  for (const auto& [k, b] : s.bindings()) next.bind(b.var, apply(one, b.value));
  next.bind(v, t);
  s = std::move(next);
}

}  // namespace

std::optional<Substitution> unify_free(const std::vector<Equation>& eqs) {
  std::vector<Equation> work(eqs.rbegin(), eqs.rend());
  Substitution s;
  while (!work.empty()) {
    auto [a, b] = work.back();
    work.pop_back();
    a = apply(s, a);
    b = apply(s, b);
    if (a == b) continue;
    if (!a.is_var() && b.is_var()) std::swap(a, b);
    if (a.is_var()) {
      if (occurs(a.name(), b)) return std::nullopt;
      extend(s, a, b);
      continue;
    }
    if (!same_head(a, b)) return std::nullopt;
    for (std::size_t i = a.args().size(); i-- > 0;) work.emplace_back(a.arg(i), b.arg(i));
  }
  return s;
}

std::optional<Substitution> mgu_syntactic(const UnifyProblem& p) {
  for (const auto& [a, b] : p.equations)
    if (a.has_xor() || b.has_xor()) throw ImpureProblem("XOR term in a free-theory problem");
  return unify_free(p.equations);
}

std::optional<Substitution> mgu_syntactic(const Term& a, const Term& b) { return mgu_syntactic(UnifyProblem{{{a, b}}}); }

namespace {

void assoc_solve(std::vector<Equation> work, Substitution s, std::vector<Substitution>& out, int budget) {
  while (!work.empty()) {
    auto [a, b] = work.back();
    work.pop_back();
    a = flatten_concat(apply(s, a));
    b = flatten_concat(apply(s, b));
    if (a == b) continue;
    if (!a.is_var() && b.is_var()) std::swap(a, b);
    if (a.is_var()) {
      if (occurs(a.name(), b)) return;
      extend(s, a, b);
      continue;
    }
    if (a.is_concat() && b.is_concat() && budget > 0) {
      const auto& L = a.args();
      const auto& R = b.args();
      auto tail = [](const std::vector<Term>& v, std::size_t from) {
        return mk_concat(std::vector<Term>(v.begin() + static_cast<long>(from), v.end()));
      };
      auto head = [](const std::vector<Term>& v, std::size_t to) {
        return mk_concat(std::vector<Term>(v.begin(), v.begin() + static_cast<long>(to)));
      };
      // element against element
      {
        auto w = work;
        w.emplace_back(tail(L, 1), tail(R, 1));
        w.emplace_back(L[0], R[0]);
        assoc_solve(std::move(w), s, out, budget - 1);
      }
      // a variable absorbing a longer prefix of the other side
      auto absorb = [&](const std::vector<Term>& V, const std::vector<Term>& W) {
        if (!V[0].is_var()) return;
        for (std::size_t k = 2; k + 1 <= W.size() && V.size() >= 2; ++k) {
          auto w = work;
          w.emplace_back(tail(V, 1), tail(W, k));
          w.emplace_back(V[0], head(W, k));
          assoc_solve(std::move(w), s, out, budget - 1);
        }
      };
      absorb(L, R);
      absorb(R, L);
      return;
    }
    if (!same_head(a, b)) return;
    for (std::size_t i = a.args().size(); i-- > 0;) work.emplace_back(a.arg(i), b.arg(i));
  }
  for (const auto& r : out)
    if (r == s) return;
  out.push_back(s);
}

}  // namespace

std::vector<Substitution> unify_assoc(const Term& a, const Term& b) {
  std::vector<Substitution> out;
  assoc_solve({{a, b}}, Substitution{}, out, 64);
  return out;
}

bool match(const Term& pattern, const Term& target, std::map<std::string, Term>& rho) {
  if (pattern.is_var()) {
    auto it = rho.find(pattern.name());
    if (it != rho.end()) return it->second == target;
    rho.emplace(pattern.name(), target);
    return true;
  }
  if (pattern.ground()) return pattern == target;
  if (!same_head(pattern, target)) return false;
  for (std::size_t i = 0; i < pattern.args().size(); ++i)
    if (!match(pattern.arg(i), target.arg(i), rho)) return false;
  return true;
}

bool is_instance(const Substitution& specific, const Substitution& general, const std::map<std::string, Term>& vars) {
  std::map<std::string, Term> rho;
  for (const auto& [name, v] : vars) {
    const Term* g = general.lookup(name);
    const Term* s = specific.lookup(name);
    if (!match(g ? *g : v, s ? *s : v, rho)) return false;
  }
  return true;
}

}  // namespace tf
