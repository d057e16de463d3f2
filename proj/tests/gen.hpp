#pragma once

#include <functional>
#include <random>

#include "typeflaw/protocol.hpp"

namespace tf::gen {

// Random terms over atoms {a,b,c}, an optional set of variables, 0, numerals and tags.
struct TermGen {
  std::mt19937 rng;
  std::vector<Term> vars;
  bool use_vars = true;

  explicit TermGen(unsigned seed) : rng(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  Term leaf() {
    static const Term atoms[] = {mk_atom("a", TypeTag::agent()), mk_atom("b", TypeTag::agent()),
                                 mk_atom("c", TypeTag::agent())};
    int k = pick(use_vars && !vars.empty() ? 6 : 5);
    if (k < 3) return atoms[k];
    if (k == 3) return mk_zero();
    if (k == 4) return pick(2) ? mk_num(1 + pick(2)) : mk_tag("nonce");
    return vars[pick(static_cast<int>(vars.size()))];
  }

  Term agent_leaf() {
    static const Term atoms[] = {mk_atom("a", TypeTag::agent()), mk_atom("b", TypeTag::agent())};
    return atoms[pick(2)];
  }

  Term term(int depth) {
    if (depth <= 1 || pick(3) == 0) return leaf();
    switch (pick(7)) {
      case 0: return mk_concat({term(depth - 1), term(depth - 1)});
      case 1: return mk_hash(term(depth - 1));
      case 2: return mk_penc(term(depth - 1), mk_pk(agent_leaf()));
      case 3: return mk_senc(term(depth - 1), mk_sh(agent_leaf(), agent_leaf()));
      default: {
        std::vector<Term> es;
        int n = 2 + pick(3);
        for (int i = 0; i < n; ++i) es.push_back(term(depth - 1));
        return mk_xor_raw(std::move(es));
      }
    }
  }
};

// Two-role protocols over A, B, N_A, N_B, K: each message is an encryption, hash or
// signature of a short field list, sometimes with an XOR of two fields.
struct ProtocolGen {
  std::mt19937 rng;
  explicit ProtocolGen(unsigned seed) : rng(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  static const std::vector<Term>& fields() {
    static const std::vector<Term> fs = {mk_var("A", TypeTag::agent()), mk_var("B", TypeTag::agent()),
                                         mk_var("N_A", TypeTag::nonce()), mk_var("N_B", TypeTag::nonce()),
                                         mk_var("K", TypeTag::key())};
    return fs;
  }

  Term field() {
    if (pick(5) == 0) return mk_xor({fields()[pick(4)], fields()[pick(4)]});
    return fields()[pick(5)];
  }

  Term message() {
    std::vector<Term> body;
    int n = 1 + pick(3);
    for (int i = 0; i < n; ++i) body.push_back(field());
    Term b = mk_concat(body);
    const Term A = fields()[0], B = fields()[1];
    switch (pick(4)) {
      case 0: return mk_penc(b, mk_pk(pick(2) ? A : B));
      case 1: return mk_senc(b, mk_sh(A, B));
      case 2: return mk_hash(b);
      default: return mk_sig(b, mk_pk(pick(2) ? A : B));
    }
  }

  Protocol protocol() {
    Protocol P;
    P.name = "generated";
    Strand a{"A", {}, ""}, b{"B", {}, ""};
    const Term A = fields()[0], B = fields()[1];
    int n = 1 + pick(3);
    for (int i = 0; i < n; ++i) {
      Term m = message();
      bool from_a = i % 2 == 0;
      a.nodes.push_back(Node{from_a ? Sign::Plus : Sign::Minus, m, B});
      b.nodes.push_back(Node{from_a ? Sign::Minus : Sign::Plus, m, A});
    }
    P.roles = {a, b};
    for (const Term& f : fields()) P.var_types[f.name()] = f.declared_type();
    return P;
  }
};

}  // namespace tf::gen
