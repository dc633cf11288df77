#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "schemakit/proof.hpp"

namespace schemakit {

inline void collect_names(const Term& t, std::set<std::string>& out) {
  std::set<std::string> o, p;
  collect_vars(t, o, p);
  out.insert(o.begin(), o.end());
  out.insert(p.begin(), p.end());
}

inline void collect_names(const Formula& f, std::set<std::string>& out) {
  if (const auto* e = f.as_eq()) {
    collect_names(e->lhs, out);
    collect_names(e->rhs, out);
  } else if (const auto* pr = f.as_pred()) {
    for (const auto& a : pr->args) collect_names(a, out);
  } else if (const auto* n = f.as_neg()) {
    collect_names(n->body, out);
  } else if (const auto* b = f.as_bin()) {
    collect_names(b->lhs, out);
    collect_names(b->rhs, out);
  } else if (const auto* q = f.as_quant()) {
    out.insert(q->var);
    collect_names(q->body, out);
  }
}

inline void collect_names(const Sequent& s, std::set<std::string>& out) {
  for (const auto& f : s.antecedent) collect_names(f, out);
  for (const auto& f : s.succedent) collect_names(f, out);
}

inline void collect_names(const Proof& p, std::set<std::string>& out) {
  collect_names(p->conclusion(), out);
  const RuleData& d = p->data();
  if (d.witness) collect_names(*d.witness, out);
  if (d.eigen) out.insert(*d.eigen);
  if (d.cut_formula) collect_names(*d.cut_formula, out);
  if (d.ind) {
    out.insert(d.ind->step_var);
    out.insert(d.ind->concl_var);
    collect_names(d.ind->formula, out);
  }
  if (d.label)
    for (const auto& [k, v] : d.label->replacement.map) {
      out.insert(k);
      collect_names(v, out);
    }
  for (const auto& q : p->premises()) collect_names(q, out);
}

namespace detail {

// Homomorphic application of variable/parameter renamings and substitutions
// with no capture handling; callers must have freshened binders first.
struct ProofSubst {
  Substitution ord;                       // ordinary variables -> terms
  std::map<std::string, Term> par;        // parameters -> terms

  Term on_term(const Term& t) const {
    return replace_vars(replace_vars(t, ord, VarKind::Ordinary), par, VarKind::Parameter);
  }
  Formula on_formula(const Formula& f) const {
    return replace_params(substitute(f, ord), par);
  }
  Sequent on_sequent(const Sequent& s) const {
    return replace_params(substitute(s, ord), par);
  }
  // Renames a bound-like occurrence (eigenvariable, induction variable); the
  // image must itself be a variable.
  std::pair<std::string, bool> on_var_name(const std::string& name, bool is_param) const {
    const auto& m = is_param ? par : ord;
    auto it = m.find(name);
    if (it == m.end()) return {name, is_param};
    const auto* v = it->second.as_var();
    if (!v) throw InternalError("substitution maps inference variable " + name + " to a non-variable");
    return {v->name, v->kind == VarKind::Parameter};
  }
};

inline Proof apply_raw(const Proof& p, const ProofSubst& s) {
  std::vector<Proof> premises;
  premises.reserve(p->premises().size());
  for (const auto& q : p->premises()) premises.push_back(apply_raw(q, s));
  RuleData d = p->data();
  if (d.witness) d.witness = s.on_term(*d.witness);
  if (d.cut_formula) d.cut_formula = s.on_formula(*d.cut_formula);
  if (d.eigen) {
    auto [n, param] = s.on_var_name(*d.eigen, false);
    if (param) throw InternalError("eigenvariable renamed into a parameter");
    d.eigen = n;
  }
  if (d.ind) {
    IndData ind = *d.ind;
    auto [sn, sp] = s.on_var_name(ind.step_var, ind.step_var_is_param);
    auto [cn, cp] = s.on_var_name(ind.concl_var, ind.concl_var_is_param);
    ind.step_var = sn;
    ind.step_var_is_param = sp;
    ind.concl_var = cn;
    ind.concl_var_is_param = cp;
    ind.formula = s.on_formula(ind.formula);
    d.ind = std::move(ind);
  }
  if (d.label && !s.par.empty()) {
    ProofLabel lab = *d.label;
    lab.replacement = compose(lab.replacement, ParameterReplacement(s.par));
    d.label = std::move(lab);
  }
  return make_proof(p->tag(), s.on_sequent(p->conclusion()), std::move(d), std::move(premises));
}

}  // namespace detail

/// Renames every eigenvariable (and induction step variable) clashing with
/// `avoid` to a fresh name; records all binder names finally used in `avoid`.
inline Proof freshen_eigenvariables(const Proof& p, std::set<std::string>& avoid) {
  std::vector<Proof> premises;
  premises.reserve(p->premises().size());
  for (const auto& q : p->premises()) premises.push_back(freshen_eigenvariables(q, avoid));
  RuleData d = p->data();
  auto rename_in = [&](std::vector<Proof>& prems, const std::string& from, bool is_param,
                       std::vector<std::size_t> which) -> std::string {
    std::set<std::string> used = avoid;
    for (const auto& q : prems) collect_names(q, used);
    std::string to = fresh_name("v", used);
    detail::ProofSubst s;
    if (is_param)
      s.par[from] = Term::param(to);
    else
      s.ord[from] = Term::var(to);
    for (std::size_t i : which) prems[i] = detail::apply_raw(prems[i], s);
    return to;
  };
  if ((p->tag() == RuleTag::AllR || p->tag() == RuleTag::ExL) && d.eigen && avoid.count(*d.eigen)) {
    d.eigen = rename_in(premises, *d.eigen, false, {0});
  }
  if (p->tag() == RuleTag::Ind && d.ind && avoid.count(d.ind->step_var)) {
    IndData ind = *d.ind;
    std::set<std::string> used = avoid;
    for (const auto& q : premises) collect_names(q, used);
    collect_names(ind.formula, used);
    std::string to = fresh_name("v", used);
    detail::ProofSubst s;
    if (ind.step_var_is_param)
      s.par[ind.step_var] = Term::param(to);
    else
      s.ord[ind.step_var] = Term::var(to);
    premises[1] = detail::apply_raw(premises[1], s);
    ind.formula = s.on_formula(ind.formula);
    ind.step_var = to;
    d.ind = std::move(ind);
  }
  if (d.eigen) avoid.insert(*d.eigen);
  if (d.ind) avoid.insert(d.ind->step_var);
  return make_proof(p->tag(), p->conclusion(), std::move(d), std::move(premises));
}

/// Applies a substitution (or parameter replacement) to a whole proof,
/// renaming eigenvariables first so nothing is captured.
inline Proof apply_substitution_proof(const Substitution& theta, const Proof& p) {
  std::set<std::string> avoid;
  for (const auto& [k, v] : theta) {
    avoid.insert(k);
    collect_names(v, avoid);
  }
  Proof q = freshen_eigenvariables(p, avoid);
  detail::ProofSubst s;
  s.ord = theta;
  return detail::apply_raw(q, s);
}

inline Proof apply_replacement_proof(const ParameterReplacement& psi, const Proof& p) {
  if (psi.empty()) return p;
  std::set<std::string> avoid;
  for (const auto& [k, v] : psi.map) {
    avoid.insert(k);
    collect_names(v, avoid);
  }
  Proof q = freshen_eigenvariables(p, avoid);
  detail::ProofSubst s;
  s.par = psi.map;
  return detail::apply_raw(q, s);
}

// ---- structural comparison up to eigenvariable renaming ----

namespace detail {

struct Renaming {
  std::map<std::string, std::string> fwd;
  std::set<std::string> taken;

  bool pair(const std::string& a, const std::string& b) {
    auto it = fwd.find(a);
    if (it != fwd.end()) return it->second == b;
    if (taken.count(b)) return false;
    fwd[a] = b;
    taken.insert(b);
    return true;
  }
  Term on(const Term& t, VarKind kind) const {
    std::map<std::string, Term> m;
    for (const auto& [a, b] : fwd)
      m[a] = kind == VarKind::Parameter ? Term::param(b) : Term::var(b);
    return replace_vars(t, m, kind);
  }
};

inline bool equal_term_ren(const Term& a, const Term& b, const Renaming& ord,
                           const Renaming& par) {
  return par.on(ord.on(a, VarKind::Ordinary), VarKind::Parameter) == b;
}

inline bool equal_formula_ren(const Formula& a, const Formula& b, const Renaming& ord,
                              const Renaming& par) {
  std::map<std::string, Term> mo, mp;
  for (const auto& [x, y] : ord.fwd) mo[x] = Term::var(y);
  for (const auto& [x, y] : par.fwd) mp[x] = Term::param(y);
  return replace_params(substitute(a, mo), mp) == b;
}

inline bool equal_sequent_ren(const Sequent& a, const Sequent& b, const Renaming& ord,
                              const Renaming& par) {
  if (a.antecedent.size() != b.antecedent.size() || a.succedent.size() != b.succedent.size())
    return false;
  for (std::size_t i = 0; i < a.antecedent.size(); ++i)
    if (!equal_formula_ren(a.antecedent[i], b.antecedent[i], ord, par)) return false;
  for (std::size_t i = 0; i < a.succedent.size(); ++i)
    if (!equal_formula_ren(a.succedent[i], b.succedent[i], ord, par)) return false;
  return true;
}

inline bool equal_mod_eigen(const Proof& a, const Proof& b, Renaming ord, Renaming par) {
  if (a->tag() != b->tag()) return false;
  const RuleData& da = a->data();
  const RuleData& db = b->data();
  if (da.pos != db.pos) return false;
  if (da.eigen.has_value() != db.eigen.has_value()) return false;
  if (da.eigen && !ord.pair(*da.eigen, *db.eigen)) return false;
  if (da.ind.has_value() != db.ind.has_value()) return false;
  if (da.ind) {
    if (da.ind->step_var_is_param != db.ind->step_var_is_param ||
        da.ind->concl_var_is_param != db.ind->concl_var_is_param ||
        da.ind->pos != db.ind->pos)
      return false;
    Renaming& r = da.ind->step_var_is_param ? par : ord;
    if (!r.pair(da.ind->step_var, db.ind->step_var)) return false;
    if (!equal_term_ren(da.ind->concl_term(), db.ind->concl_term(), ord, par)) return false;
    if (!equal_formula_ren(da.ind->formula, db.ind->formula, ord, par)) return false;
  }
  if (da.witness.has_value() != db.witness.has_value()) return false;
  if (da.witness && !equal_term_ren(*da.witness, *db.witness, ord, par)) return false;
  if (da.cut_formula.has_value() != db.cut_formula.has_value()) return false;
  if (da.cut_formula && !equal_formula_ren(*da.cut_formula, *db.cut_formula, ord, par))
    return false;
  if (da.eq.has_value() != db.eq.has_value()) return false;
  if (da.eq && !(*da.eq == *db.eq)) return false;
  if (da.label.has_value() != db.label.has_value()) return false;
  if (da.label) {
    if (da.label->symbol != db.label->symbol) return false;
    if (da.label->replacement.map.size() != db.label->replacement.map.size()) return false;
    for (const auto& [k, v] : da.label->replacement.map) {
      auto it = db.label->replacement.map.find(k);
      if (it == db.label->replacement.map.end()) return false;
      if (!equal_term_ren(v, it->second, ord, par)) return false;
    }
  }
  if (!equal_sequent_ren(a->conclusion(), b->conclusion(), ord, par)) return false;
  if (a->premises().size() != b->premises().size()) return false;
  for (std::size_t i = 0; i < a->premises().size(); ++i)
    if (!equal_mod_eigen(a->premises()[i], b->premises()[i], ord, par)) return false;
  return true;
}

}  // namespace detail

/// Structural equality of proofs up to a bijective renaming of
/// eigenvariables (and induction variables).
inline bool proofs_equal_mod_eigenvariables(const Proof& a, const Proof& b) {
  return detail::equal_mod_eigen(a, b, {}, {});
}

}  // namespace schemakit
