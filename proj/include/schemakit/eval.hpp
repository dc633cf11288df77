#pragma once

#include <map>
#include <string>
#include <vector>

#include "schemakit/sequent.hpp"
#include "schemakit/theory.hpp"

namespace schemakit {

/// Total-on-demand mapping from parameters to naturals.
struct ParameterAssignment {
  std::map<std::string, Nat> bindings;

  bool binds(const std::string& p) const { return bindings.count(p) > 0; }
  const Nat& at(const std::string& p) const {
    auto it = bindings.find(p);
    if (it == bindings.end()) throw UnboundParameter(p);
    return it->second;
  }
  ParameterAssignment with(const std::string& p, Nat v) const {
    ParameterAssignment out = *this;
    out.bindings[p] = std::move(v);
    return out;
  }
};

/// Map from ordinary variable names to terms. The domain never contains
/// parameters.
using Substitution = std::map<std::string, Term>;

/// Map from parameter names to terms over {s, 0, parameters}.
struct ParameterReplacement {
  std::map<std::string, Term> map;

  ParameterReplacement() = default;
  explicit ParameterReplacement(std::map<std::string, Term> m) : map(std::move(m)) {
    for (const auto& [p, t] : map) {
      (void)p;
      if (!term_ordinary_vars(t).empty() || term_contains_fn(t))
        throw Error("parameter replacement image must be a term over {s, 0, parameters}");
    }
  }

  bool empty() const { return map.empty(); }
  Term image(const std::string& p) const {
    auto it = map.find(p);
    return it == map.end() ? Term::param(p) : it->second;
  }

  friend bool operator==(const ParameterReplacement& a, const ParameterReplacement& b) {
    return a.map == b.map;
  }
};

/// psi2 after psi1: x span psi1 then psi2.
inline ParameterReplacement compose(const ParameterReplacement& first,
                                    const ParameterReplacement& then) {
  std::map<std::string, Term> out;
  for (const auto& [p, t] : first.map) out[p] = replace_vars(t, then.map, VarKind::Parameter);
  for (const auto& [p, t] : then.map)
    if (!out.count(p)) out[p] = t;
  return ParameterReplacement(std::move(out));
}

// ---- parameter assignment application (no evaluation) ----

inline Term assign(const ParameterAssignment& sigma, const Term& t) {
  if (t.as_num()) return t;
  if (const auto* s = t.as_succ()) return Term::succ(assign(sigma, s->arg));
  if (const auto* v = t.as_var()) {
    if (v->kind == VarKind::Parameter) return Term::numeral(sigma.at(v->name));
    return t;
  }
  const auto* f = t.as_fn();
  std::vector<Term> args;
  args.reserve(f->args.size());
  for (const auto& a : f->args) args.push_back(assign(sigma, a));
  return Term::fn(f->symbol, std::move(args));
}

inline Formula assign(const ParameterAssignment& sigma, const Formula& f) {
  if (const auto* e = f.as_eq()) return Formula::eq(assign(sigma, e->lhs), assign(sigma, e->rhs));
  if (const auto* p = f.as_pred()) {
    std::vector<Term> args;
    args.reserve(p->args.size());
    for (const auto& a : p->args) args.push_back(assign(sigma, a));
    return Formula::pred(p->symbol, std::move(args));
  }
  if (const auto* n = f.as_neg()) return Formula::neg(assign(sigma, n->body));
  if (const auto* b = f.as_bin())
    return Formula::bin(b->conn, assign(sigma, b->lhs), assign(sigma, b->rhs));
  const auto* q = f.as_quant();
  return Formula::quant(q->q, q->var, assign(sigma, q->body));
}

// ---- the evaluation operator ----

namespace detail {

inline Term evaluate_term(const Term& t, const EquationalTheory& E);

// Unfolds f(args..., k) for numeral k, iteratively over k so deep numerals do
// not blow the stack. Self-calls f(xs, y) in the step are replaced by the
// previously computed layer rather than re-evaluated.
inline Term unfold_defined(const Definition& d, const std::vector<Term>& passive, const Nat& k,
                           const EquationalTheory& E) {
  std::map<std::string, Term> bind;
  for (std::size_t i = 0; i < d.vars.size(); ++i) bind[d.vars[i]] = passive[i];
  Term cur = evaluate_term(replace_vars(d.base_rhs, bind, VarKind::Ordinary), E);
  for (Nat i = 0; i < k; ++i) {
    bind[d.rec_var] = Term::numeral(i);
    Term rhs = replace_vars(d.step_rhs, bind, VarKind::Ordinary);
    // the substituted self-call is exactly fn(symbol, passive..., numeral i)
    std::vector<Term> self_args = passive;
    self_args.push_back(Term::numeral(i));
    Term self = Term::fn(d.symbol, std::move(self_args));
    struct Replacer {
      const Term& self;
      const Term& value;
      Term operator()(const Term& t) const {
        if (t == self) return value;
        if (const auto* s = t.as_succ()) return Term::succ((*this)(s->arg));
        if (const auto* f = t.as_fn()) {
          std::vector<Term> args;
          args.reserve(f->args.size());
          for (const auto& a : f->args) args.push_back((*this)(a));
          return Term::fn(f->symbol, std::move(args));
        }
        return t;
      }
    };
    cur = evaluate_term(Replacer{self, cur}(rhs), E);
  }
  return cur;
}

inline Term evaluate_term(const Term& t, const EquationalTheory& E) {
  if (t.as_num() || t.as_var()) return t;
  if (const auto* s = t.as_succ()) return Term::succ(evaluate_term(s->arg, E));
  const auto* f = t.as_fn();
  std::vector<Term> args;
  args.reserve(f->args.size());
  for (const auto& a : f->args) args.push_back(evaluate_term(a, E));
  const Definition* d = E.definition(f->symbol);
  if (!d) {
    if (!E.is_uninterpreted(f->symbol)) throw UnknownSymbol(f->symbol);
    return Term::fn(f->symbol, std::move(args));
  }
  if (args.size() != d->arity()) throw UnknownSymbol(f->symbol + " (arity mismatch)");
  const Term& rec = args.back();
  if (!rec.is_numeral()) return Term::fn(f->symbol, std::move(args));  // frozen residual
  std::vector<Term> passive(args.begin(), args.end() - 1);
  return unfold_defined(*d, passive, rec.as_num()->value, E);
}

inline Formula evaluate_formula(const Formula& f, const EquationalTheory& E) {
  if (const auto* e = f.as_eq())
    return Formula::eq(evaluate_term(e->lhs, E), evaluate_term(e->rhs, E));
  if (const auto* p = f.as_pred()) {
    std::vector<Term> args;
    args.reserve(p->args.size());
    for (const auto& a : p->args) args.push_back(evaluate_term(a, E));
    return Formula::pred(p->symbol, std::move(args));
  }
  if (const auto* n = f.as_neg()) return Formula::neg(evaluate_formula(n->body, E));
  if (const auto* b = f.as_bin())
    return Formula::bin(b->conn, evaluate_formula(b->lhs, E), evaluate_formula(b->rhs, E));
  const auto* q = f.as_quant();
  return Formula::quant(q->q, q->var, evaluate_formula(q->body, E));
}

}  // namespace detail

inline void require_well_founded(const EquationalTheory& E) {
  std::string err = E.validate();
  if (!err.empty()) throw IllFoundedTheory(err);
}

/// The evaluation operator: unfolds every defined-symbol application whose
/// recursion argument is a numeral; everything else is left frozen.
inline Term evaluate(const Term& t, const EquationalTheory& E) {
  require_well_founded(E);
  return detail::evaluate_term(t, E);
}

inline Formula evaluate(const Formula& f, const EquationalTheory& E) {
  require_well_founded(E);
  return detail::evaluate_formula(f, E);
}

inline Formula assign_and_evaluate(const ParameterAssignment& sigma, const Formula& f,
                                   const EquationalTheory& E) {
  return evaluate(assign(sigma, f), E);
}

inline Sequent evaluate_sequent(const ParameterAssignment& sigma, const Sequent& s,
                                const EquationalTheory& E) {
  Sequent out;
  out.antecedent.reserve(s.antecedent.size());
  out.succedent.reserve(s.succedent.size());
  for (const auto& f : s.antecedent) out.antecedent.push_back(assign_and_evaluate(sigma, f, E));
  for (const auto& f : s.succedent) out.succedent.push_back(assign_and_evaluate(sigma, f, E));
  return out;
}

// ---- parameter replacement application ----

inline Term apply_replacement(const ParameterReplacement& psi, const Term& t) {
  return replace_vars(t, psi.map, VarKind::Parameter);
}
inline Formula apply_replacement(const ParameterReplacement& psi, const Formula& f) {
  return replace_params(f, psi.map);
}
inline Sequent apply_replacement(const ParameterReplacement& psi, const Sequent& s) {
  return replace_params(s, psi.map);
}

}  // namespace schemakit
