#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "schemakit/term.hpp"

namespace schemakit {

enum class Conn { And, Or, Implies };
enum class Quantifier { Forall, Exists };

struct FormulaNode;

/// First-order formula over schematic terms. Bound variables are always
/// ordinary; quantification over parameters is unrepresentable by
/// construction.
class Formula {
 public:
  struct Eq {
    Term lhs, rhs;
  };
  struct Pred {
    std::string symbol;
    std::vector<Term> args;
  };
  struct Neg;
  struct Bin;
  struct Quant;

  static Formula eq(Term a, Term b);
  static Formula pred(std::string symbol, std::vector<Term> args);
  static Formula neg(Formula f);
  static Formula bin(Conn c, Formula a, Formula b);
  static Formula conj(Formula a, Formula b) { return bin(Conn::And, std::move(a), std::move(b)); }
  static Formula disj(Formula a, Formula b) { return bin(Conn::Or, std::move(a), std::move(b)); }
  static Formula implies(Formula a, Formula b) {
    return bin(Conn::Implies, std::move(a), std::move(b));
  }
  static Formula quant(Quantifier q, const std::string& var, Formula body);
  static Formula forall(const std::string& var, Formula body) {
    return quant(Quantifier::Forall, var, std::move(body));
  }
  static Formula exists(const std::string& var, Formula body) {
    return quant(Quantifier::Exists, var, std::move(body));
  }

  const FormulaNode& node() const { return *node_; }
  const Eq* as_eq() const;
  const Pred* as_pred() const;
  const Neg* as_neg() const;
  const Bin* as_bin() const;
  const Quant* as_quant() const;

  bool is_atomic() const { return as_eq() || as_pred(); }

  // Equality of formulas is alpha-equivalence.
  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const FormulaNode> node_;

  static bool alpha_eq(const Formula& a, const Formula& b,
                       std::vector<std::pair<std::string, std::string>>& env);
  static bool alpha_eq_term(const Term& a, const Term& b,
                            const std::vector<std::pair<std::string, std::string>>& env);
};

struct Formula::Neg {
  Formula body;
};
struct Formula::Bin {
  Conn conn;
  Formula lhs, rhs;
};
struct Formula::Quant {
  Quantifier q;
  std::string var;  // ordinary
  Formula body;
};

struct FormulaNode {
  std::variant<Formula::Eq, Formula::Pred, Formula::Neg, Formula::Bin, Formula::Quant> v;
  std::size_t index() const { return v.index(); }
};

inline Formula Formula::eq(Term a, Term b) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{Eq{std::move(a), std::move(b)}}));
}
inline Formula Formula::pred(std::string symbol, std::vector<Term> args) {
  return Formula(
      std::make_shared<const FormulaNode>(FormulaNode{Pred{std::move(symbol), std::move(args)}}));
}
inline Formula Formula::neg(Formula f) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{Neg{std::move(f)}}));
}
inline Formula Formula::bin(Conn c, Formula a, Formula b) {
  return Formula(
      std::make_shared<const FormulaNode>(FormulaNode{Bin{c, std::move(a), std::move(b)}}));
}
inline Formula Formula::quant(Quantifier q, const std::string& var, Formula body) {
  return Formula(
      std::make_shared<const FormulaNode>(FormulaNode{Quant{q, var, std::move(body)}}));
}
inline const Formula::Eq* Formula::as_eq() const { return std::get_if<Eq>(&node_->v); }
inline const Formula::Pred* Formula::as_pred() const { return std::get_if<Pred>(&node_->v); }
inline const Formula::Neg* Formula::as_neg() const { return std::get_if<Neg>(&node_->v); }
inline const Formula::Bin* Formula::as_bin() const { return std::get_if<Bin>(&node_->v); }
inline const Formula::Quant* Formula::as_quant() const { return std::get_if<Quant>(&node_->v); }

inline bool Formula::alpha_eq_term(const Term& a, const Term& b,
                                   const std::vector<std::pair<std::string, std::string>>& env) {
  if (a.node().index() != b.node().index()) return false;
  if (const auto* n = a.as_num()) return n->value == b.as_num()->value;
  if (const auto* s = a.as_succ()) return alpha_eq_term(s->arg, b.as_succ()->arg, env);
  if (const auto* v = a.as_var()) {
    const auto* w = b.as_var();
    if (v->kind != w->kind) return false;
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
      bool la = it->first == v->name, lb = it->second == w->name;
      if (la || lb) return la && lb;
    }
    return v->name == w->name;
  }
  const auto* f = a.as_fn();
  const auto* g = b.as_fn();
  if (f->symbol != g->symbol || f->args.size() != g->args.size()) return false;
  for (std::size_t i = 0; i < f->args.size(); ++i)
    if (!alpha_eq_term(f->args[i], g->args[i], env)) return false;
  return true;
}

inline bool Formula::alpha_eq(const Formula& a, const Formula& b,
                              std::vector<std::pair<std::string, std::string>>& env) {
  if (a.node_ == b.node_ && env.empty()) return true;
  if (a.node_->index() != b.node_->index()) return false;
  if (const auto* e = a.as_eq()) {
    const auto* f = b.as_eq();
    return alpha_eq_term(e->lhs, f->lhs, env) && alpha_eq_term(e->rhs, f->rhs, env);
  }
  if (const auto* p = a.as_pred()) {
    const auto* q = b.as_pred();
    if (p->symbol != q->symbol || p->args.size() != q->args.size()) return false;
    for (std::size_t i = 0; i < p->args.size(); ++i)
      if (!alpha_eq_term(p->args[i], q->args[i], env)) return false;
    return true;
  }
  if (const auto* n = a.as_neg()) return alpha_eq(n->body, b.as_neg()->body, env);
  if (const auto* x = a.as_bin()) {
    const auto* y = b.as_bin();
    return x->conn == y->conn && alpha_eq(x->lhs, y->lhs, env) && alpha_eq(x->rhs, y->rhs, env);
  }
  const auto* qa = a.as_quant();
  const auto* qb = b.as_quant();
  if (qa->q != qb->q) return false;
  env.emplace_back(qa->var, qb->var);
  bool ok = alpha_eq(qa->body, qb->body, env);
  env.pop_back();
  return ok;
}

inline bool operator==(const Formula& a, const Formula& b) {
  std::vector<std::pair<std::string, std::string>> env;
  return Formula::alpha_eq(a, b, env);
}

inline void collect_free_vars(const Formula& f, std::set<std::string>& ordinary,
                              std::set<std::string>& params, std::set<std::string>& bound) {
  if (const auto* e = f.as_eq()) {
    std::set<std::string> o, p;
    collect_vars(e->lhs, o, p);
    collect_vars(e->rhs, o, p);
    for (auto& n : o)
      if (!bound.count(n)) ordinary.insert(n);
    params.insert(p.begin(), p.end());
  } else if (const auto* pr = f.as_pred()) {
    std::set<std::string> o, p;
    for (const auto& a : pr->args) collect_vars(a, o, p);
    for (auto& n : o)
      if (!bound.count(n)) ordinary.insert(n);
    params.insert(p.begin(), p.end());
  } else if (const auto* n = f.as_neg()) {
    collect_free_vars(n->body, ordinary, params, bound);
  } else if (const auto* b = f.as_bin()) {
    collect_free_vars(b->lhs, ordinary, params, bound);
    collect_free_vars(b->rhs, ordinary, params, bound);
  } else if (const auto* q = f.as_quant()) {
    bool fresh = bound.insert(q->var).second;
    collect_free_vars(q->body, ordinary, params, bound);
    if (fresh) bound.erase(q->var);
  }
}

inline std::set<std::string> free_ordinary_vars(const Formula& f) {
  std::set<std::string> o, p, b;
  collect_free_vars(f, o, p, b);
  return o;
}

inline std::set<std::string> formula_params(const Formula& f) {
  std::set<std::string> o, p, b;
  collect_free_vars(f, o, p, b);
  return p;
}

inline bool is_quantifier_free(const Formula& f) {
  if (f.is_atomic()) return true;
  if (const auto* n = f.as_neg()) return is_quantifier_free(n->body);
  if (const auto* b = f.as_bin()) return is_quantifier_free(b->lhs) && is_quantifier_free(b->rhs);
  return false;
}

/// First `stem`K (K = 0,1,...) not in `avoid`.
inline std::string fresh_name(const std::string& stem, const std::set<std::string>& avoid) {
  for (std::size_t k = 0;; ++k) {
    std::string cand = stem + std::to_string(k);
    if (!avoid.count(cand)) return cand;
  }
}

inline Term substitute(const Term& t, const std::map<std::string, Term>& m) {
  return replace_vars(t, m, VarKind::Ordinary);
}

namespace detail {
inline Formula substitute_impl(const Formula& f, const std::map<std::string, Term>& m) {
  if (m.empty()) return f;
  if (const auto* e = f.as_eq()) return Formula::eq(substitute(e->lhs, m), substitute(e->rhs, m));
  if (const auto* p = f.as_pred()) {
    std::vector<Term> args;
    args.reserve(p->args.size());
    for (const auto& a : p->args) args.push_back(substitute(a, m));
    return Formula::pred(p->symbol, std::move(args));
  }
  if (const auto* n = f.as_neg()) return Formula::neg(substitute_impl(n->body, m));
  if (const auto* b = f.as_bin())
    return Formula::bin(b->conn, substitute_impl(b->lhs, m), substitute_impl(b->rhs, m));
  const auto* q = f.as_quant();
  std::map<std::string, Term> inner = m;
  inner.erase(q->var);
  if (inner.empty()) return f;
  bool capture = false;
  for (const auto& [k, v] : inner) {
    (void)k;
    if (term_ordinary_vars(v).count(q->var)) {
      capture = true;
      break;
    }
  }
  std::string var = q->var;
  Formula body = q->body;
  if (capture) {
    std::set<std::string> avoid = free_ordinary_vars(f);
    for (const auto& [k, v] : inner) {
      (void)k;
      auto vs = term_ordinary_vars(v);
      avoid.insert(vs.begin(), vs.end());
    }
    avoid.insert(q->var);
    var = fresh_name("v", avoid);
    body = substitute_impl(body, {{q->var, Term::var(var)}});
  }
  return Formula::quant(q->q, var, substitute_impl(body, inner));
}
}  // namespace detail

/// Capture-avoiding substitution of ordinary variables by terms. Bound
/// variables are renamed on demand from the fresh supply v0, v1, ...
inline Formula substitute(const Formula& f, const std::map<std::string, Term>& m) {
  return detail::substitute_impl(f, m);
}

/// Textual replacement of parameters; parameters are never bound, so no
/// capture handling is needed at the formula level.
inline Formula replace_params(const Formula& f, const std::map<std::string, Term>& m) {
  if (m.empty()) return f;
  if (const auto* e = f.as_eq())
    return Formula::eq(replace_vars(e->lhs, m, VarKind::Parameter),
                       replace_vars(e->rhs, m, VarKind::Parameter));
  if (const auto* p = f.as_pred()) {
    std::vector<Term> args;
    args.reserve(p->args.size());
    for (const auto& a : p->args) args.push_back(replace_vars(a, m, VarKind::Parameter));
    return Formula::pred(p->symbol, std::move(args));
  }
  if (const auto* n = f.as_neg()) return Formula::neg(replace_params(n->body, m));
  if (const auto* b = f.as_bin())
    return Formula::bin(b->conn, replace_params(b->lhs, m), replace_params(b->rhs, m));
  const auto* q = f.as_quant();
  return Formula::quant(q->q, q->var, replace_params(q->body, m));
}

}  // namespace schemakit
