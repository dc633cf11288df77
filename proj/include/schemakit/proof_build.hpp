#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include "schemakit/check.hpp"

namespace schemakit {

/// Rule-application helpers. Each derives the conclusion from the premises,
/// appending new formulas at the end of a cedent so existing principal
/// indices stay put.
namespace build {

inline Proof weak_l(const Proof& p, const Formula& f) {
  Sequent c = p->conclusion();
  c.antecedent.push_back(f);
  RuleData d;
  d.pos = c.antecedent.size() - 1;
  return make_proof(RuleTag::WeakL, std::move(c), std::move(d), {p});
}

inline Proof weak_r(const Proof& p, const Formula& f) {
  Sequent c = p->conclusion();
  c.succedent.push_back(f);
  RuleData d;
  d.pos = c.succedent.size() - 1;
  return make_proof(RuleTag::WeakR, std::move(c), std::move(d), {p});
}

inline Proof contr_l(const Proof& p, const Formula& f) {
  Sequent c = p->conclusion();
  if (!ms_remove_one(c.antecedent, f)) throw InternalError("contr_l: formula missing");
  auto i = ms_find(c.antecedent, f);
  if (!i) throw InternalError("contr_l: second occurrence missing");
  RuleData d;
  d.pos = *i;
  return make_proof(RuleTag::ContrL, std::move(c), std::move(d), {p});
}

inline Proof contr_r(const Proof& p, const Formula& f) {
  Sequent c = p->conclusion();
  if (!ms_remove_one(c.succedent, f)) throw InternalError("contr_r: formula missing");
  auto i = ms_find(c.succedent, f);
  if (!i) throw InternalError("contr_r: second occurrence missing");
  RuleData d;
  d.pos = *i;
  return make_proof(RuleTag::ContrR, std::move(c), std::move(d), {p});
}

inline Proof neg_l(const Proof& p, const Formula& body) {
  Sequent c = p->conclusion();
  if (!ms_remove_one(c.succedent, body)) throw InternalError("neg_l: body missing on the right");
  c.antecedent.push_back(Formula::neg(body));
  RuleData d;
  d.pos = c.antecedent.size() - 1;
  return make_proof(RuleTag::NegL, std::move(c), std::move(d), {p});
}

inline Proof neg_r(const Proof& p, const Formula& body) {
  Sequent c = p->conclusion();
  if (!ms_remove_one(c.antecedent, body)) throw InternalError("neg_r: body missing on the left");
  c.succedent.push_back(Formula::neg(body));
  RuleData d;
  d.pos = c.succedent.size() - 1;
  return make_proof(RuleTag::NegR, std::move(c), std::move(d), {p});
}

inline Proof and_l(const Proof& p, const Formula& lhs, const Formula& rhs) {
  Sequent c = p->conclusion();
  if (!ms_remove_one(c.antecedent, lhs) || !ms_remove_one(c.antecedent, rhs))
    throw InternalError("and_l: conjuncts missing");
  c.antecedent.push_back(Formula::conj(lhs, rhs));
  RuleData d;
  d.pos = c.antecedent.size() - 1;
  return make_proof(RuleTag::AndL, std::move(c), std::move(d), {p});
}

inline Proof and_r(const Proof& pl, const Proof& pr, const Formula& lhs, const Formula& rhs) {
  Sequent c;
  c.antecedent = ms_concat(pl->conclusion().antecedent, pr->conclusion().antecedent);
  std::vector<Formula> ls = pl->conclusion().succedent;
  std::vector<Formula> rs = pr->conclusion().succedent;
  if (!ms_remove_one(ls, lhs) || !ms_remove_one(rs, rhs))
    throw InternalError("and_r: conjuncts missing");
  c.succedent = ms_concat(ls, rs);
  c.succedent.push_back(Formula::conj(lhs, rhs));
  RuleData d;
  d.pos = c.succedent.size() - 1;
  return make_proof(RuleTag::AndR, std::move(c), std::move(d), {pl, pr});
}

inline Proof or_r(const Proof& p, const Formula& lhs, const Formula& rhs) {
  Sequent c = p->conclusion();
  if (!ms_remove_one(c.succedent, lhs) || !ms_remove_one(c.succedent, rhs))
    throw InternalError("or_r: disjuncts missing");
  c.succedent.push_back(Formula::disj(lhs, rhs));
  RuleData d;
  d.pos = c.succedent.size() - 1;
  return make_proof(RuleTag::OrR, std::move(c), std::move(d), {p});
}

inline Proof or_l(const Proof& pl, const Proof& pr, const Formula& lhs, const Formula& rhs) {
  std::vector<Formula> la = pl->conclusion().antecedent;
  std::vector<Formula> ra = pr->conclusion().antecedent;
  if (!ms_remove_one(la, lhs) || !ms_remove_one(ra, rhs))
    throw InternalError("or_l: disjuncts missing");
  Sequent c;
  c.antecedent = ms_concat(la, ra);
  c.antecedent.push_back(Formula::disj(lhs, rhs));
  c.succedent = ms_concat(pl->conclusion().succedent, pr->conclusion().succedent);
  RuleData d;
  d.pos = c.antecedent.size() - 1;
  return make_proof(RuleTag::OrL, std::move(c), std::move(d), {pl, pr});
}

inline Proof imp_r(const Proof& p, const Formula& lhs, const Formula& rhs) {
  Sequent c = p->conclusion();
  if (!ms_remove_one(c.antecedent, lhs) || !ms_remove_one(c.succedent, rhs))
    throw InternalError("imp_r: parts missing");
  c.succedent.push_back(Formula::implies(lhs, rhs));
  RuleData d;
  d.pos = c.succedent.size() - 1;
  return make_proof(RuleTag::ImpR, std::move(c), std::move(d), {p});
}

inline Proof imp_l(const Proof& pl, const Proof& pr, const Formula& lhs, const Formula& rhs) {
  std::vector<Formula> ls = pl->conclusion().succedent;
  std::vector<Formula> ra = pr->conclusion().antecedent;
  if (!ms_remove_one(ls, lhs) || !ms_remove_one(ra, rhs))
    throw InternalError("imp_l: parts missing");
  Sequent c;
  c.antecedent = ms_concat(pl->conclusion().antecedent, ra);
  c.antecedent.push_back(Formula::implies(lhs, rhs));
  c.succedent = ms_concat(ls, pr->conclusion().succedent);
  RuleData d;
  d.pos = c.antecedent.size() - 1;
  return make_proof(RuleTag::ImpL, std::move(c), std::move(d), {pl, pr});
}

inline Proof all_l(const Proof& p, const Formula& quantified, const Term& witness) {
  const auto* q = quantified.as_quant();
  if (!q || q->q != Quantifier::Forall) throw InternalError("all_l: not a universal");
  Sequent c = p->conclusion();
  if (!ms_remove_one(c.antecedent, substitute(q->body, {{q->var, witness}})))
    throw InternalError("all_l: instance missing");
  c.antecedent.push_back(quantified);
  RuleData d;
  d.pos = c.antecedent.size() - 1;
  d.witness = witness;
  return make_proof(RuleTag::AllL, std::move(c), std::move(d), {p});
}

inline Proof ex_r(const Proof& p, const Formula& quantified, const Term& witness) {
  const auto* q = quantified.as_quant();
  if (!q || q->q != Quantifier::Exists) throw InternalError("ex_r: not an existential");
  Sequent c = p->conclusion();
  if (!ms_remove_one(c.succedent, substitute(q->body, {{q->var, witness}})))
    throw InternalError("ex_r: instance missing");
  c.succedent.push_back(quantified);
  RuleData d;
  d.pos = c.succedent.size() - 1;
  d.witness = witness;
  return make_proof(RuleTag::ExR, std::move(c), std::move(d), {p});
}

inline Proof all_r(const Proof& p, const Formula& quantified, const std::string& eigen) {
  const auto* q = quantified.as_quant();
  if (!q || q->q != Quantifier::Forall) throw InternalError("all_r: not a universal");
  Sequent c = p->conclusion();
  if (!ms_remove_one(c.succedent, substitute(q->body, {{q->var, Term::var(eigen)}})))
    throw InternalError("all_r: generalized instance missing");
  c.succedent.push_back(quantified);
  RuleData d;
  d.pos = c.succedent.size() - 1;
  d.eigen = eigen;
  return make_proof(RuleTag::AllR, std::move(c), std::move(d), {p});
}

inline Proof ex_l(const Proof& p, const Formula& quantified, const std::string& eigen) {
  const auto* q = quantified.as_quant();
  if (!q || q->q != Quantifier::Exists) throw InternalError("ex_l: not an existential");
  Sequent c = p->conclusion();
  if (!ms_remove_one(c.antecedent, substitute(q->body, {{q->var, Term::var(eigen)}})))
    throw InternalError("ex_l: generalized instance missing");
  c.antecedent.push_back(quantified);
  RuleData d;
  d.pos = c.antecedent.size() - 1;
  d.eigen = eigen;
  return make_proof(RuleTag::ExL, std::move(c), std::move(d), {p});
}

inline Proof cut(const Proof& pl, const Proof& pr, const Formula& a) {
  std::vector<Formula> ls = pl->conclusion().succedent;
  std::vector<Formula> ra = pr->conclusion().antecedent;
  if (!ms_remove_one(ls, a)) throw InternalError("cut: formula missing in left succedent");
  if (!ms_remove_one(ra, a)) throw InternalError("cut: formula missing in right antecedent");
  Sequent c;
  c.antecedent = ms_concat(pl->conclusion().antecedent, ra);
  c.succedent = ms_concat(ls, pr->conclusion().succedent);
  RuleData d;
  d.cut_formula = a;
  return make_proof(RuleTag::Cut, std::move(c), std::move(d), {pl, pr});
}

inline Proof ind(const Proof& base, const Proof& step, IndData data) {
  Term n = data.concl_term();
  Formula principal = data.step_var_is_param
                          ? replace_params(data.formula, {{data.step_var, n}})
                          : substitute(data.formula, {{data.step_var, n}});
  Sequent c;
  c.antecedent = base->conclusion().antecedent;
  std::vector<Formula> delta = base->conclusion().succedent;
  if (!ms_remove_one(delta, data.step_var_is_param
                                ? replace_params(data.formula, {{data.step_var, Term::zero()}})
                                : substitute(data.formula, {{data.step_var, Term::zero()}})))
    throw InternalError("ind: base premise lacks F(0)");
  c.succedent = delta;
  c.succedent.push_back(principal);
  data.pos = c.succedent.size() - 1;
  RuleData d;
  d.ind = std::move(data);
  return make_proof(RuleTag::Ind, std::move(c), std::move(d), {base, step});
}

/// Weakens extra formulas in (appended on the respective sides).
inline Proof weaken(Proof p, const std::vector<Formula>& extra_l,
                    const std::vector<Formula>& extra_r) {
  for (const auto& f : extra_l) p = weak_l(p, f);
  for (const auto& f : extra_r) p = weak_r(p, f);
  return p;
}

/// Contracts duplicates until the conclusion matches `target` as a multiset.
inline Proof contract_to(Proof p, const Sequent& target) {
  auto shrink = [&](Side side) {
    bool again = true;
    while (again) {
      again = false;
      std::vector<Formula> cur = cedent(p->conclusion(), side);
      for (const auto& f : cur) {
        if (ms_count(cur, f) > ms_count(cedent(target, side), f)) {
          p = side == Side::Ante ? contr_l(p, f) : contr_r(p, f);
          again = true;
          break;
        }
      }
    }
  };
  shrink(Side::Ante);
  shrink(Side::Succ);
  if (!sequent_multiset_equal(p->conclusion(), target))
    throw InternalError("contract_to: target unreachable by contraction");
  return p;
}

/// A derivation of A |- A for an arbitrary formula A from atomic axioms.
inline Proof taut_id(const Formula& a) {
  if (a.is_atomic()) return make_axiom(a);
  if (const auto* n = a.as_neg()) {
    Proof p = taut_id(n->body);             // B |- B
    p = neg_r(p, n->body);                  // |- B, ~B  (B moved right)
    return neg_l(p, n->body);               // ~B |- ~B
  }
  if (const auto* b = a.as_bin()) {
    switch (b->conn) {
      case Conn::And: {
        Proof l = and_l(weak_l(taut_id(b->lhs), b->rhs), b->lhs, b->rhs);
        Proof r = and_l(weak_l(taut_id(b->rhs), b->lhs), b->lhs, b->rhs);
        Proof p = and_r(l, r, b->lhs, b->rhs);  // A,A |- A
        return contract_to(p, Sequent{{a}, {a}});
      }
      case Conn::Or: {
        Proof l = or_r(weak_r(taut_id(b->lhs), b->rhs), b->lhs, b->rhs);
        Proof r = or_r(weak_r(taut_id(b->rhs), b->lhs), b->lhs, b->rhs);
        Proof p = or_l(l, r, b->lhs, b->rhs);
        return contract_to(p, Sequent{{a}, {a}});
      }
      case Conn::Implies: {
        Proof p = imp_l(taut_id(b->lhs), taut_id(b->rhs), b->lhs, b->rhs);  // B, B->C |- C
        return imp_r(p, b->lhs, b->rhs);
      }
    }
  }
  const auto* q = a.as_quant();
  std::set<std::string> avoid = free_ordinary_vars(a);
  avoid.insert(q->var);
  std::string y = fresh_name("v", avoid);
  Formula inst = substitute(q->body, {{q->var, Term::var(y)}});
  Proof p = taut_id(inst);
  if (q->q == Quantifier::Forall) {
    p = all_l(p, a, Term::var(y));
    return all_r(p, a, y);
  }
  p = ex_r(p, a, Term::var(y));
  return ex_l(p, a, y);
}

}  // namespace build

// ---- equational certificates ----

/// One evaluation-operator step: the leftmost-innermost redex unfolded once.
struct UnfoldStep {
  TermPath path;  // position of the redex inside the term
  std::string symbol;
  bool base = true;
  Term result;  // whole term after the step
};

namespace detail {

inline bool find_redex(const Term& t, const EquationalTheory& E, TermPath& path) {
  if (const auto* s = t.as_succ()) {
    path.push_back(0);
    if (find_redex(s->arg, E, path)) return true;
    path.pop_back();
    return false;
  }
  const auto* f = t.as_fn();
  if (!f) return false;
  for (std::size_t i = 0; i < f->args.size(); ++i) {
    path.push_back(i);
    if (find_redex(f->args[i], E, path)) return true;
    path.pop_back();
  }
  const Definition* d = E.definition(f->symbol);
  return d && f->args.size() == d->arity() && f->args.back().is_numeral();
}

inline std::optional<UnfoldStep> single_unfold(const Term& t, const EquationalTheory& E) {
  TermPath path;
  if (!find_redex(t, E, path)) return std::nullopt;
  const Term* red = subterm_at(t, path);
  if (!red) throw InternalError("redex path invalid");
  const auto* f = red->as_fn();
  const Definition* d = E.definition(f->symbol);
  const Nat& k = f->args.back().as_num()->value;
  std::map<std::string, Term> bind;
  for (std::size_t i = 0; i < d->vars.size(); ++i) bind[d->vars[i]] = f->args[i];
  Term rhs;
  bool base = k == 0;
  if (base) {
    rhs = replace_vars(d->base_rhs, bind, VarKind::Ordinary);
  } else {
    bind[d->rec_var] = Term::numeral(k - 1);
    rhs = replace_vars(d->step_rhs, bind, VarKind::Ordinary);
  }
  return UnfoldStep{path, f->symbol, base, replace_subterm(t, path, rhs)};
}

/// Leftmost term position of a formula holding a redex, as a formula path.
struct FormulaUnfoldStep {
  std::vector<std::size_t> path;
  std::string symbol;
  bool base = true;
  Formula result;
};

inline std::optional<FormulaUnfoldStep> single_unfold_formula(const Formula& f,
                                                              const EquationalTheory& E) {
  auto from_term = [&](const Term& t, std::vector<std::size_t> prefix,
                       const std::function<Formula(Term)>& rebuild)
      -> std::optional<FormulaUnfoldStep> {
    auto step = single_unfold(t, E);
    if (!step) return std::nullopt;
    prefix.insert(prefix.end(), step->path.begin(), step->path.end());
    return FormulaUnfoldStep{std::move(prefix), step->symbol, step->base,
                             rebuild(step->result)};
  };
  if (const auto* e = f.as_eq()) {
    if (auto s = from_term(e->lhs, {0}, [&](Term t) { return Formula::eq(t, e->rhs); })) return s;
    return from_term(e->rhs, {1}, [&](Term t) { return Formula::eq(e->lhs, t); });
  }
  if (const auto* p = f.as_pred()) {
    for (std::size_t i = 0; i < p->args.size(); ++i) {
      auto s = from_term(p->args[i], {i}, [&](Term t) {
        std::vector<Term> args = p->args;
        args[i] = std::move(t);
        return Formula::pred(p->symbol, std::move(args));
      });
      if (s) return s;
    }
    return std::nullopt;
  }
  if (const auto* n = f.as_neg()) {
    auto s = single_unfold_formula(n->body, E);
    if (!s) return std::nullopt;
    s->path.insert(s->path.begin(), 0);
    s->result = Formula::neg(s->result);
    return s;
  }
  if (const auto* b = f.as_bin()) {
    if (auto s = single_unfold_formula(b->lhs, E)) {
      s->path.insert(s->path.begin(), 0);
      s->result = Formula::bin(b->conn, s->result, b->rhs);
      return s;
    }
    if (auto s = single_unfold_formula(b->rhs, E)) {
      s->path.insert(s->path.begin(), 1);
      s->result = Formula::bin(b->conn, b->lhs, s->result);
      return s;
    }
    return std::nullopt;
  }
  const auto* q = f.as_quant();
  auto s = single_unfold_formula(q->body, E);
  if (!s) return std::nullopt;
  s->path.insert(s->path.begin(), 0);
  s->result = Formula::quant(q->q, q->var, s->result);
  return s;
}

}  // namespace detail

/// Extends `p` downward with E inferences so its conclusion formula at
/// (side,index) becomes `target`; `p`'s current formula there must be the
/// normal form of `target`. Certificates cite the unfolding equations in
/// folding orientation.
inline Proof fold_chain(Proof p, Side side, std::size_t index, const Formula& target,
                        const EquationalTheory& E) {
  // forward-unfold the target, then replay the steps downward in reverse
  std::vector<detail::FormulaUnfoldStep> steps;
  std::vector<Formula> stages{target};
  Formula cur = target;
  while (auto s = detail::single_unfold_formula(cur, E)) {
    cur = s->result;
    stages.push_back(cur);
    steps.push_back(std::move(*s));
  }
  if (!(cedent(p->conclusion(), side)[index] == cur))
    throw InternalError("fold_chain: normal forms do not agree");
  for (std::size_t i = steps.size(); i-- > 0;) {
    Sequent c = p->conclusion();
    cedent(c, side)[index] = stages[i];
    EqStep eq;
    eq.symbol = steps[i].symbol;
    eq.base = steps[i].base;
    eq.forward = false;  // premise holds the unfolded side
    eq.side = side;
    eq.index = index;
    eq.path = steps[i].path;
    RuleData d;
    d.eq = eq;
    p = make_proof(RuleTag::ERule, std::move(c), std::move(d), {p});
  }
  return p;
}

/// Finds the single position where two otherwise-identical formulas differ
/// and certifies it as one equation instance, trying every definition in
/// both orientations. Used to re-anchor E inferences after evaluation.
inline std::optional<EqStep> recompute_eq_certificate(const Sequent& premise,
                                                      const Sequent& conclusion,
                                                      const EquationalTheory& E);

namespace detail {

// Extends `path` to the deepest single term position containing every
// difference between a and b. Precondition: a != b structurally.
inline void divergence_path(const Term& a, const Term& b, TermPath& path) {
  if (a.node().index() == b.node().index()) {
    if (const auto* sa = a.as_succ()) {
      path.push_back(0);
      divergence_path(sa->arg, b.as_succ()->arg, path);
      return;
    }
    if (const auto* fa = a.as_fn()) {
      const auto* fb = b.as_fn();
      if (fa->symbol == fb->symbol && fa->args.size() == fb->args.size()) {
        std::size_t diff = fa->args.size();
        bool multiple = false;
        for (std::size_t i = 0; i < fa->args.size(); ++i) {
          if (!(fa->args[i] == fb->args[i])) {
            if (diff != fa->args.size()) multiple = true;
            diff = i;
          }
        }
        if (!multiple && diff != fa->args.size()) {
          path.push_back(diff);
          divergence_path(fa->args[diff], fb->args[diff], path);
          return;
        }
      }
    }
  }
  // diverge exactly here
}

// Same for formulas whose logical skeleton agrees; returns false when the
// skeletons differ or several cedent-level term children diverge.
inline bool find_divergence(const Formula& a, const Formula& b, std::vector<std::size_t>& path) {
  if (a.node().index() != b.node().index()) return false;
  auto descend_terms = [&](const std::vector<Term>& xs, const std::vector<Term>& ys) {
    if (xs.size() != ys.size()) return false;
    std::size_t diff = xs.size();
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (!(xs[i] == ys[i])) {
        if (diff != xs.size()) return false;
        diff = i;
      }
    if (diff == xs.size()) return false;
    path.push_back(diff);
    divergence_path(xs[diff], ys[diff], path);
    return true;
  };
  if (const auto* e = a.as_eq()) {
    const auto* f = b.as_eq();
    return descend_terms({e->lhs, e->rhs}, {f->lhs, f->rhs});
  }
  if (const auto* pa = a.as_pred()) {
    const auto* pb = b.as_pred();
    if (pa->symbol != pb->symbol) return false;
    return descend_terms(pa->args, pb->args);
  }
  if (const auto* na = a.as_neg()) {
    path.push_back(0);
    return find_divergence(na->body, b.as_neg()->body, path);
  }
  if (const auto* ba = a.as_bin()) {
    const auto* bb = b.as_bin();
    if (ba->conn != bb->conn) return false;
    bool dl = !(ba->lhs == bb->lhs);
    bool dr = !(ba->rhs == bb->rhs);
    if (dl == dr) return false;
    path.push_back(dl ? 0 : 1);
    return find_divergence(dl ? ba->lhs : ba->rhs, dl ? bb->lhs : bb->rhs, path);
  }
  const auto* qa = a.as_quant();
  const auto* qb = b.as_quant();
  if (qa->q != qb->q || qa->var != qb->var) return false;
  path.push_back(0);
  return find_divergence(qa->body, qb->body, path);
}

}  // namespace detail

inline std::optional<EqStep> recompute_eq_certificate(const Sequent& premise,
                                                      const Sequent& conclusion,
                                                      const EquationalTheory& E) {
  auto try_side = [&](Side side) -> std::optional<EqStep> {
    const auto& ps = cedent(premise, side);
    const auto& cs = cedent(conclusion, side);
    if (ps.size() != cs.size()) return std::nullopt;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (ps[i] == cs[i]) continue;
      std::vector<std::size_t> path;
      if (!detail::find_divergence(cs[i], ps[i], path)) return std::nullopt;
      auto sub_c = formula_subterm_at(cs[i], path);
      auto sub_p = formula_subterm_at(ps[i], path);
      if (!sub_c || !sub_p) return std::nullopt;
      for (const auto& [name, def] : E.definitions()) {
        for (bool base : {true, false}) {
          std::vector<Term> largs;
          for (const auto& v : def.vars) largs.push_back(Term::var(v));
          largs.push_back(base ? Term::zero() : Term::succ(Term::var(def.rec_var)));
          Term lhs_pat = Term::fn(name, largs);
          const Term& rhs_pat = base ? def.base_rhs : def.step_rhs;
          for (bool forward : {true, false}) {
            const Term& from = forward ? *sub_p : *sub_c;
            const Term& to = forward ? *sub_c : *sub_p;
            std::map<std::string, Term> m;
            if (match_term(lhs_pat, from, m) &&
                replace_vars(rhs_pat, m, VarKind::Ordinary) == to) {
              EqStep eq;
              eq.symbol = name;
              eq.base = base;
              eq.forward = forward;
              eq.side = side;
              eq.index = i;
              eq.path = path;
              return eq;
            }
          }
        }
      }
      return std::nullopt;
    }
    return std::nullopt;
  };
  if (auto e = try_side(Side::Ante)) return e;
  return try_side(Side::Succ);
}

}  // namespace schemakit
