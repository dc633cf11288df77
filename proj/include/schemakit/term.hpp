#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "schemakit/errors.hpp"

namespace schemakit {

/// Arbitrary-precision natural number; numerals s^k(0) are stored as k.
using Nat = boost::multiprecision::cpp_int;

enum class VarKind { Ordinary, Parameter };

struct TermNode;

/// Schematic term: numerals, successor applications, variables (ordinary or
/// parameter) and applications of theory function symbols.
///
/// Numerals are kept canonical: succ(numeral k) collapses to numeral k+1 at
/// construction, so s^1000(0) costs O(1) and structural equality is exact.
class Term {
 public:
  struct Num {
    Nat value;
  };
  struct Var {
    std::string name;
    VarKind kind;
  };
  struct Succ;
  struct Fn;

  Term();

  static Term zero() { return Term(); }
  static Term numeral(Nat k);
  static Term succ(const Term& t);
  static Term succ_n(Term t, const Nat& k);
  static Term var(std::string name);
  static Term param(std::string name);
  static Term fn(std::string symbol, std::vector<Term> args);

  const TermNode& node() const { return *node_; }
  const Num* as_num() const;
  const Succ* as_succ() const;
  const Var* as_var() const;
  const Fn* as_fn() const;

  bool is_zero() const;
  bool is_numeral() const { return as_num() != nullptr; }

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  explicit Term(std::shared_ptr<const TermNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const TermNode> node_;
};

struct Term::Succ {
  Term arg;  // never itself a pure numeral
};
struct Term::Fn {
  std::string symbol;
  std::vector<Term> args;
};

struct TermNode {
  std::variant<Term::Num, Term::Succ, Term::Var, Term::Fn> v;
  std::size_t index() const { return v.index(); }
};

inline Term::Term() {
  static const std::shared_ptr<const TermNode> z =
      std::make_shared<const TermNode>(TermNode{Term::Num{Nat(0)}});
  node_ = z;
}
inline Term Term::numeral(Nat k) {
  return Term(std::make_shared<const TermNode>(TermNode{Num{std::move(k)}}));
}
inline Term Term::succ(const Term& t) {
  if (const auto* n = t.as_num()) return numeral(n->value + 1);
  return Term(std::make_shared<const TermNode>(TermNode{Succ{t}}));
}
inline Term Term::succ_n(Term t, const Nat& k) {
  if (const auto* n = t.as_num()) return numeral(n->value + k);
  for (Nat i = 0; i < k; ++i) t = succ(t);
  return t;
}
inline Term Term::var(std::string name) {
  return Term(std::make_shared<const TermNode>(TermNode{Var{std::move(name), VarKind::Ordinary}}));
}
inline Term Term::param(std::string name) {
  return Term(
      std::make_shared<const TermNode>(TermNode{Var{std::move(name), VarKind::Parameter}}));
}
inline Term Term::fn(std::string symbol, std::vector<Term> args) {
  return Term(std::make_shared<const TermNode>(TermNode{Fn{std::move(symbol), std::move(args)}}));
}
inline const Term::Num* Term::as_num() const { return std::get_if<Num>(&node_->v); }
inline const Term::Succ* Term::as_succ() const { return std::get_if<Succ>(&node_->v); }
inline const Term::Var* Term::as_var() const { return std::get_if<Var>(&node_->v); }
inline const Term::Fn* Term::as_fn() const { return std::get_if<Fn>(&node_->v); }
inline bool Term::is_zero() const {
  const auto* n = as_num();
  return n && n->value == 0;
}

inline bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.node_->index() != b.node_->index()) return false;
  if (const auto* n = a.as_num()) return n->value == b.as_num()->value;
  if (const auto* s = a.as_succ()) return s->arg == b.as_succ()->arg;
  if (const auto* v = a.as_var()) {
    const auto* w = b.as_var();
    return v->name == w->name && v->kind == w->kind;
  }
  const auto* f = a.as_fn();
  const auto* g = b.as_fn();
  return f->symbol == g->symbol && f->args == g->args;
}

inline void collect_vars(const Term& t, std::set<std::string>& ordinary,
                         std::set<std::string>& params) {
  if (const auto* s = t.as_succ()) {
    collect_vars(s->arg, ordinary, params);
  } else if (const auto* v = t.as_var()) {
    (v->kind == VarKind::Parameter ? params : ordinary).insert(v->name);
  } else if (const auto* f = t.as_fn()) {
    for (const auto& a : f->args) collect_vars(a, ordinary, params);
  }
}

inline std::set<std::string> term_params(const Term& t) {
  std::set<std::string> o, p;
  collect_vars(t, o, p);
  return p;
}

inline std::set<std::string> term_ordinary_vars(const Term& t) {
  std::set<std::string> o, p;
  collect_vars(t, o, p);
  return o;
}

inline bool term_contains_fn(const Term& t) {
  if (t.as_fn()) return true;
  if (const auto* s = t.as_succ()) return term_contains_fn(s->arg);
  return false;
}

/// Simultaneous replacement of variables by terms. `kind` selects whether the
/// domain names are ordinary variables or parameters. Purely textual.
inline Term replace_vars(const Term& t, const std::map<std::string, Term>& m, VarKind kind) {
  if (m.empty() || t.as_num()) return t;
  if (const auto* s = t.as_succ()) return Term::succ(replace_vars(s->arg, m, kind));
  if (const auto* v = t.as_var()) {
    if (v->kind == kind) {
      auto it = m.find(v->name);
      if (it != m.end()) return it->second;
    }
    return t;
  }
  const auto* f = t.as_fn();
  std::vector<Term> args;
  args.reserve(f->args.size());
  bool changed = false;
  for (const auto& a : f->args) {
    args.push_back(replace_vars(a, m, kind));
    changed = changed || !(args.back() == a);
  }
  if (!changed) return t;
  return Term::fn(f->symbol, std::move(args));
}

/// First-order matching: find a substitution for `pattern`'s ordinary
/// variables making it equal to `subject`. Parameters and numerals in the
/// pattern match only themselves.
inline bool match_term(const Term& pattern, const Term& subject,
                       std::map<std::string, Term>& out) {
  if (const auto* v = pattern.as_var()) {
    if (v->kind == VarKind::Parameter) return pattern == subject;
    auto it = out.find(v->name);
    if (it != out.end()) return it->second == subject;
    out.emplace(v->name, subject);
    return true;
  }
  if (const auto* n = pattern.as_num()) {
    const auto* m = subject.as_num();
    return m && m->value == n->value;
  }
  if (const auto* s = pattern.as_succ()) {
    if (const auto* u = subject.as_succ()) return match_term(s->arg, u->arg, out);
    if (const auto* m = subject.as_num()) {
      if (m->value == 0) return false;
      return match_term(s->arg, Term::numeral(m->value - 1), out);
    }
    return false;
  }
  const auto* f = pattern.as_fn();
  const auto* g = subject.as_fn();
  if (!g || f->symbol != g->symbol || f->args.size() != g->args.size()) return false;
  for (std::size_t i = 0; i < f->args.size(); ++i)
    if (!match_term(f->args[i], g->args[i], out)) return false;
  return true;
}

// Positions address subterms as child-index paths. For Succ the only child is
// 0; numerals have no children (a numeral is atomic for path purposes).
using TermPath = std::vector<std::size_t>;

inline const Term* subterm_at(const Term& t, const TermPath& path, std::size_t from = 0) {
  if (from == path.size()) return &t;
  std::size_t i = path[from];
  if (const auto* s = t.as_succ()) {
    if (i != 0) return nullptr;
    return subterm_at(s->arg, path, from + 1);
  }
  if (const auto* f = t.as_fn()) {
    if (i >= f->args.size()) return nullptr;
    return subterm_at(f->args[i], path, from + 1);
  }
  return nullptr;
}

inline Term replace_subterm(const Term& t, const TermPath& path, const Term& repl,
                            std::size_t from = 0) {
  if (from == path.size()) return repl;
  std::size_t i = path[from];
  if (const auto* s = t.as_succ()) {
    if (i != 0) throw InternalError("bad term path");
    return Term::succ(replace_subterm(s->arg, path, repl, from + 1));
  }
  if (const auto* f = t.as_fn()) {
    if (i >= f->args.size()) throw InternalError("bad term path");
    std::vector<Term> args = f->args;
    args[i] = replace_subterm(args[i], path, repl, from + 1);
    return Term::fn(f->symbol, std::move(args));
  }
  throw InternalError("bad term path");
}

}  // namespace schemakit
