#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "schemakit/term.hpp"

namespace schemakit {

/// Primitive recursive definition of one function symbol f:
///   f(xs..., 0)    = base_rhs           over xs
///   f(xs..., s(y)) = step_rhs           over xs, y, and self-calls f(xs..., y)
/// The recursion argument is the last one.
struct Definition {
  std::string symbol;
  std::vector<std::string> vars;  // xs
  std::string rec_var;            // y
  Term base_rhs;
  Term step_rhs;

  std::size_t arity() const { return vars.size() + 1; }
};

/// An ordered family of primitive recursive definitions plus uninterpreted
/// symbols (declared arity, no equations) and predicate declarations.
class EquationalTheory {
 public:
  void define(Definition d) { defs_.emplace(d.symbol, std::move(d)); }
  void declare_uninterpreted(const std::string& name, std::size_t arity) {
    uninterpreted_[name] = arity;
  }
  void declare_predicate(const std::string& name, std::size_t arity) {
    predicates_[name] = arity;
  }
  /// Records `a < b` in the symbol ordering.
  void declare_less(const std::string& a, const std::string& b) {
    less_.emplace(a, b);
  }
  void declare_symbol(const std::string& a) { mentioned_.insert(a); }

  const Definition* definition(const std::string& name) const {
    auto it = defs_.find(name);
    return it == defs_.end() ? nullptr : &it->second;
  }
  bool is_uninterpreted(const std::string& name) const { return uninterpreted_.count(name) > 0; }
  bool is_predicate(const std::string& name) const { return predicates_.count(name) > 0; }

  std::optional<std::size_t> fn_arity(const std::string& name) const {
    if (const auto* d = definition(name)) return d->arity();
    auto it = uninterpreted_.find(name);
    if (it != uninterpreted_.end()) return it->second;
    return std::nullopt;
  }
  std::optional<std::size_t> pred_arity(const std::string& name) const {
    auto it = predicates_.find(name);
    if (it != predicates_.end()) return it->second;
    return std::nullopt;
  }

  const std::map<std::string, Definition>& definitions() const { return defs_; }
  const std::map<std::string, std::size_t>& uninterpreted() const { return uninterpreted_; }
  const std::map<std::string, std::size_t>& predicates() const { return predicates_; }
  const std::set<std::pair<std::string, std::string>>& declared_less() const { return less_; }

  /// Transitive `a < b` under the declared pairs.
  bool less(const std::string& a, const std::string& b) const {
    if (a == b) return false;
    std::set<std::string> seen{a};
    std::vector<std::string> work{a};
    while (!work.empty()) {
      std::string cur = work.back();
      work.pop_back();
      for (const auto& [x, y] : less_) {
        if (x != cur) continue;
        if (y == b) return true;
        if (seen.insert(y).second) work.push_back(y);
      }
    }
    return false;
  }

  /// Checks the definition-ordering invariants; returns a diagnostic for the
  /// first violation, empty string when well-founded.
  std::string validate() const {
    for (const auto& [name, d] : defs_) {
      if (d.vars.size() + 1 != d.arity()) return "arity bookkeeping broken for " + name;
      std::set<std::string> seen(d.vars.begin(), d.vars.end());
      if (seen.size() != d.vars.size()) return "repeated variable in definition of " + name;
      if (seen.count(d.rec_var)) return "recursion variable repeats a left-hand variable in " + name;
      std::string err = check_rhs(name, d, d.base_rhs, /*allow_self=*/false);
      if (!err.empty()) return err;
      err = check_rhs(name, d, d.step_rhs, /*allow_self=*/true);
      if (!err.empty()) return err;
    }
    for (const auto& [a, b] : less_) {
      if (less(b, a) || a == b) return "ordering cycle through " + a + " and " + b;
    }
    return "";
  }

  EquationalTheory with_uninterpreted(const std::string& name, std::size_t arity) const {
    EquationalTheory out = *this;
    out.declare_uninterpreted(name, arity);
    return out;
  }

 private:
  std::string check_rhs(const std::string& f, const Definition& d, const Term& t,
                        bool allow_self) const {
    if (const auto* s = t.as_succ()) return check_rhs(f, d, s->arg, allow_self);
    const auto* app = t.as_fn();
    if (!app) return "";
    if (app->symbol == f) {
      if (!allow_self) return "definition of " + f + " recurses in its base equation";
      // self-calls must be exactly f(xs..., y)
      if (app->args.size() != d.arity()) return "self-call arity mismatch in " + f;
      for (std::size_t i = 0; i < d.vars.size(); ++i)
        if (app->args[i] != Term::var(d.vars[i]))
          return "self-call in " + f + " alters a passive argument";
      if (app->args.back() != Term::var(d.rec_var))
        return "self-call in " + f + " does not recurse on " + d.rec_var;
      return "";
    }
    if (defs_.count(app->symbol) || uninterpreted_.count(app->symbol)) {
      if (!less(app->symbol, f))
        return "symbol " + app->symbol + " used in definition of " + f +
               " is not declared smaller";
    } else {
      return "definition of " + f + " uses undeclared symbol " + app->symbol;
    }
    for (const auto& a : app->args) {
      std::string err = check_rhs(f, d, a, allow_self);
      if (!err.empty()) return err;
    }
    return "";
  }

  std::map<std::string, Definition> defs_;
  std::map<std::string, std::size_t> uninterpreted_;
  std::map<std::string, std::size_t> predicates_;
  std::set<std::pair<std::string, std::string>> less_;
  std::set<std::string> mentioned_;
};

}  // namespace schemakit
