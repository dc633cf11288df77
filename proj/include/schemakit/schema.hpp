#pragma once

#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "schemakit/proof_build.hpp"

namespace schemakit {

/// One proof-symbol tuple (delta, rho0, rho1) with its passive/active
/// parameters and end-sequent template.
struct SchemaTuple {
  std::string symbol;
  std::vector<std::string> passive;
  std::string active;
  Sequent end_sequent_template;
  Proof base;  // proves template{active <- 0}, no self-calls
  Proof step;  // proves template{active <- s(active)}, self-calls allowed

  std::vector<std::string> all_params() const {
    std::vector<std::string> out = passive;
    out.push_back(active);
    return out;
  }
  bool uniform() const { return proofs_equal_mod_eigenvariables(base, step); }
};

struct ProofSchema {
  std::string main;
  std::map<std::string, SchemaTuple> tuples;
  std::vector<std::string> order;  // strictly descending; order[0] is main

  const SchemaTuple& tuple(const std::string& sym) const {
    auto it = tuples.find(sym);
    if (it == tuples.end()) throw InternalError("unknown proof symbol " + sym);
    return it->second;
  }
  /// a > b in the symbol order
  bool greater(const std::string& a, const std::string& b) const {
    auto ia = std::find(order.begin(), order.end(), a);
    auto ib = std::find(order.begin(), order.end(), b);
    return ia < ib && ia != order.end() && ib != order.end();
  }
};

enum class EvalAction { ExpandBase, ExpandStep, SpliceCall };

struct EvalStep {
  std::string symbol;
  ParameterAssignment assignment;
  EvalAction action;
};

struct EvaluationTrace {
  std::vector<EvalStep> steps;
  Proof result;

  std::size_t splice_count() const {
    std::size_t n = 0;
    for (const auto& s : steps)
      if (s.action == EvalAction::SpliceCall) ++n;
    return n;
  }
};

inline std::size_t default_fuel() {
  if (const char* env = std::getenv("SCHEMAKIT_FUEL")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1000000;
}

// ---- well-formedness ----

namespace detail {

inline void collect_params_in_proof(const Proof& p, std::set<std::string>& out) {
  std::set<std::string> names;
  collect_names(p, names);
  // collect_names gathers both kinds; filter parameters by re-walking terms
  // would be costly, so walk sequents and data directly instead.
  (void)names;
  visit_proof(p, [&](const Proof& n) {
    auto add = [&](const std::set<std::string>& s) { out.insert(s.begin(), s.end()); };
    add(sequent_params(n->conclusion()));
    const RuleData& d = n->data();
    if (d.witness) add(term_params(*d.witness));
    if (d.cut_formula) add(formula_params(*d.cut_formula));
    if (d.ind) {
      add(formula_params(d.ind->formula));
      if (d.ind->step_var_is_param) out.insert(d.ind->step_var);
      if (d.ind->concl_var_is_param) out.insert(d.ind->concl_var);
    }
    if (d.label)
      for (const auto& [k, v] : d.label->replacement.map) {
        out.insert(k);
        add(term_params(v));
      }
  });
}

}  // namespace detail

/// Validates the proof-schema conditions: main symbol maximal, passive
/// parameters distinct, base/step end-sequents instantiate the template,
/// proof calls descend the symbol order with well-shaped replacements, and
/// every body is a correct labeled LK+E derivation.
inline CheckReport check_schema(const ProofSchema& D, const EquationalTheory& E) {
  CheckReport report;
  auto fail = [&](const std::string& reason) {
    report.violations.push_back({{}, RuleTag::LabeledLeaf, reason});
  };

  if (!D.tuples.count(D.main)) {
    fail("main symbol " + D.main + " has no tuple");
    return report;
  }
  if (D.order.empty() || D.order.front() != D.main)
    fail("main symbol must be maximal in the order");
  {
    std::set<std::string> seen;
    for (const auto& s : D.order) {
      if (!seen.insert(s).second) fail("symbol " + s + " repeats in the order");
      if (!D.tuples.count(s)) fail("ordered symbol " + s + " has no tuple");
    }
    for (const auto& [sym, t] : D.tuples) {
      (void)t;
      if (!seen.count(sym)) fail("tuple " + sym + " missing from the order");
    }
  }

  for (const auto& [sym, tup] : D.tuples) {
    std::set<std::string> passive(tup.passive.begin(), tup.passive.end());
    if (passive.size() != tup.passive.size())
      fail(sym + ": passive parameters must be pairwise distinct");
    if (passive.count(tup.active)) fail(sym + ": active parameter repeats a passive one");

    std::set<std::string> scope = passive;
    scope.insert(tup.active);
    for (const auto& p : sequent_params(tup.end_sequent_template))
      if (!scope.count(p)) fail(sym + ": template uses undeclared parameter " + p);

    ParameterReplacement to_zero({{tup.active, Term::zero()}});
    ParameterReplacement to_succ({{tup.active, Term::succ(Term::param(tup.active))}});
    if (!sequent_multiset_equal(end_sequent(tup.base),
                                apply_replacement(to_zero, tup.end_sequent_template)))
      fail(sym + ": base end-sequent is not the template at 0");
    if (!sequent_multiset_equal(end_sequent(tup.step),
                                apply_replacement(to_succ, tup.end_sequent_template)))
      fail(sym + ": step end-sequent is not the template at s(active)");

    std::set<std::string> base_params;
    detail::collect_params_in_proof(tup.base, base_params);
    if (base_params.count(tup.active))
      fail(sym + ": base body mentions the active parameter");
    for (const auto& p : base_params)
      if (!passive.count(p) && p != tup.active)
        fail(sym + ": base body uses undeclared parameter " + p);
    std::set<std::string> step_params;
    detail::collect_params_in_proof(tup.step, step_params);
    for (const auto& p : step_params)
      if (!scope.count(p)) fail(sym + ": step body uses undeclared parameter " + p);

    for (bool in_step : {false, true}) {
      const Proof& body = in_step ? tup.step : tup.base;
      visit_proof(body, [&](const Proof& n) {
        if (n->tag() == RuleTag::Ind) fail(sym + ": induction inside a schema body");
        if (n->tag() != RuleTag::LabeledLeaf) return;
        const ProofLabel& lab = *n->data().label;
        if (lab.symbol == sym) {
          if (!in_step) fail(sym + ": self-call in the base body");
          if (!lab.replacement.empty())
            fail(sym + ": self-call must carry the empty replacement");
          if (!sequent_multiset_equal(n->conclusion(), tup.end_sequent_template))
            fail(sym + ": self-call sequent differs from the template");
          return;
        }
        if (!D.tuples.count(lab.symbol)) {
          fail(sym + ": call to unknown symbol " + lab.symbol);
          return;
        }
        if (!D.greater(sym, lab.symbol))
          fail(sym + ": call to " + lab.symbol + " does not descend the order");
        const SchemaTuple& callee = D.tuple(lab.symbol);
        std::set<std::string> callee_scope(callee.passive.begin(), callee.passive.end());
        callee_scope.insert(callee.active);
        for (const auto& [p, img] : lab.replacement.map) {
          if (!callee_scope.count(p))
            fail(sym + ": replacement binds " + p + " which is not a parameter of " +
                 lab.symbol);
          for (const auto& q : term_params(img))
            if (!scope.count(q))
              fail(sym + ": replacement image uses undeclared parameter " + q);
        }
        for (const auto& p : callee_scope)
          if (!lab.replacement.map.count(p) && !scope.count(p))
            fail(sym + ": call leaves callee parameter " + p + " without a caller image");
        if (!sequent_multiset_equal(
                n->conclusion(),
                apply_replacement(lab.replacement, callee.end_sequent_template)))
          fail(sym + ": call sequent is not the callee template under the replacement");
      });
      CheckReport body_report = check_lk(body, E, CheckMode::PureLk, /*allow_labels=*/true);
      for (auto v : body_report.violations) {
        v.reason = sym + (in_step ? " step: " : " base: ") + v.reason;
        report.violations.push_back(std::move(v));
      }
    }
  }
  return report;
}

// ---- evaluation ----

namespace detail {

struct EvalContext {
  const ProofSchema& D;
  const EquationalTheory& E;
  std::size_t fuel;
  std::size_t used = 0;
  std::vector<EvalStep> steps;
  std::set<std::string> used_names;

  void burn() {
    if (++used > fuel) throw FuelExhausted("schema evaluation");
  }
};

inline Proof eval_tuple(EvalContext& ctx, const std::string& symbol,
                        const ParameterAssignment& sigma);

inline ParameterAssignment call_assignment(EvalContext& ctx, const ParameterAssignment& sigma,
                                           const SchemaTuple& callee,
                                           const ParameterReplacement& psi) {
  ParameterAssignment out;
  for (const auto& p : callee.all_params()) {
    Term image = psi.image(p);
    const auto* v = image.as_var();
    if (v && v->kind == VarKind::Parameter && v->name == p && !sigma.binds(p)) continue;
    Term val = detail::evaluate_term(assign(sigma, image), ctx.E);
    if (!val.is_numeral())
      throw InternalError("replacement image did not evaluate to a numeral");
    out.bindings[p] = val.as_num()->value;
  }
  return out;
}

inline Proof eval_body(EvalContext& ctx, const Proof& node, const ParameterAssignment& sigma) {
  ctx.burn();
  const RuleData& d = node->data();
  switch (node->tag()) {
    case RuleTag::LabeledLeaf: {
      const ProofLabel& lab = *d.label;
      const SchemaTuple& callee = ctx.D.tuple(lab.symbol);
      ParameterAssignment inner = call_assignment(ctx, sigma, callee, lab.replacement);
      ctx.steps.push_back({lab.symbol, inner, EvalAction::SpliceCall});
      Proof sub = eval_tuple(ctx, lab.symbol, inner);
      sub = freshen_eigenvariables(sub, ctx.used_names);
      Sequent want = evaluate_sequent(sigma, node->conclusion(), ctx.E);
      if (!sequent_multiset_equal(end_sequent(sub), want))
        throw InternalError("spliced proof does not close the call leaf");
      return sub;
    }
    case RuleTag::Ind:
      throw InternalError("induction inside a schema body");
    case RuleTag::ERule: {
      Proof sub = eval_body(ctx, node->premises()[0], sigma);
      Sequent want = evaluate_sequent(sigma, node->conclusion(), ctx.E);
      if (end_sequent(sub) == want) return sub;  // the defined-symbol inference collapses
      auto cert = recompute_eq_certificate(end_sequent(sub), want, ctx.E);
      if (!cert)
        throw InternalError("equational inference did not survive evaluation");
      RuleData nd;
      nd.eq = *cert;
      return make_proof(RuleTag::ERule, std::move(want), std::move(nd), {sub});
    }
    case RuleTag::AllL:
    case RuleTag::ExR: {
      Side side = node->tag() == RuleTag::AllL ? Side::Ante : Side::Succ;
      Proof sub = eval_body(ctx, node->premises()[0], sigma);
      Sequent concl = evaluate_sequent(sigma, node->conclusion(), ctx.E);
      const Formula& quantified = cedent(concl, side)[*d.pos];
      const auto* q = quantified.as_quant();
      if (!q) throw InternalError("weak quantifier node lost its quantifier");
      Term witness = detail::evaluate_term(assign(sigma, *d.witness), ctx.E);
      Formula expected = substitute(q->body, {{q->var, witness}});
      // locate the instance in the original premise to keep its position
      const auto* oq = cedent(node->conclusion(), side)[*d.pos].as_quant();
      Formula orig_inst = substitute(oq->body, {{oq->var, *d.witness}});
      auto idx = ms_find(cedent(node->premises()[0]->conclusion(), side), orig_inst);
      if (!idx) throw InternalError("weak quantifier instance missing in premise");
      if (!(cedent(end_sequent(sub), side)[*idx] == expected))
        sub = fold_chain(sub, side, *idx, expected, ctx.E);
      RuleData nd;
      nd.pos = d.pos;
      nd.witness = witness;
      return make_proof(node->tag(), std::move(concl), std::move(nd), {sub});
    }
    default: {
      std::vector<Proof> premises;
      premises.reserve(node->premises().size());
      for (const auto& p : node->premises()) premises.push_back(eval_body(ctx, p, sigma));
      Sequent concl = evaluate_sequent(sigma, node->conclusion(), ctx.E);
      RuleData nd = d;
      if (nd.witness) nd.witness = detail::evaluate_term(assign(sigma, *nd.witness), ctx.E);
      if (nd.cut_formula) nd.cut_formula = assign_and_evaluate(sigma, *nd.cut_formula, ctx.E);
      return make_proof(node->tag(), std::move(concl), std::move(nd), std::move(premises));
    }
  }
}

inline Proof eval_tuple(EvalContext& ctx, const std::string& symbol,
                        const ParameterAssignment& sigma) {
  const SchemaTuple& tup = ctx.D.tuple(symbol);
  if (!sigma.binds(tup.active)) {
    if (!tup.uniform()) throw UnboundParameter(tup.active);
    ctx.steps.push_back({symbol, sigma, EvalAction::ExpandBase});
    return eval_body(ctx, tup.base, sigma);
  }
  Nat alpha = sigma.at(tup.active);
  if (alpha == 0) {
    ctx.steps.push_back({symbol, sigma, EvalAction::ExpandBase});
    return eval_body(ctx, tup.base, sigma);
  }
  ctx.steps.push_back({symbol, sigma, EvalAction::ExpandStep});
  return eval_body(ctx, tup.step, sigma.with(tup.active, alpha - 1));
}

}  // namespace detail

/// Evaluates a proof schema under a parameter assignment into a ground
/// LK(+E) proof. Trivialized defined-symbol inferences are elided; unfolding
/// chains are inserted where weak-quantifier instances need them.
inline EvaluationTrace eval_schema(const ProofSchema& D, const ParameterAssignment& sigma,
                                   const EquationalTheory& E, std::size_t fuel = default_fuel()) {
  require_well_founded(E);
  detail::EvalContext ctx{D, E, fuel};
  for (const auto& [sym, tup] : D.tuples) {
    (void)sym;
    collect_names(tup.base, ctx.used_names);
    collect_names(tup.step, ctx.used_names);
    collect_names(tup.end_sequent_template, ctx.used_names);
  }
  Proof result = detail::eval_tuple(ctx, D.main, sigma);
  return EvaluationTrace{std::move(ctx.steps), std::move(result)};
}

/// Number of proof-call splices eval_schema will perform for this
/// assignment, without building the proof.
inline std::size_t unfold_depth(const ProofSchema& D, const ParameterAssignment& sigma,
                                const EquationalTheory& E) {
  struct Walker {
    const ProofSchema& D;
    const EquationalTheory& E;
    std::size_t count = 0;

    void tuple(const std::string& symbol, const ParameterAssignment& sigma) {
      const SchemaTuple& tup = D.tuple(symbol);
      if (!sigma.binds(tup.active)) {
        if (!tup.uniform()) throw UnboundParameter(tup.active);
        body(tup.base, sigma);
        return;
      }
      Nat alpha = sigma.at(tup.active);
      if (alpha == 0) {
        body(tup.base, sigma);
      } else {
        body(tup.step, sigma.with(tup.active, alpha - 1));
      }
    }
    void body(const Proof& p, const ParameterAssignment& sigma) {
      visit_proof(p, [&](const Proof& n) {
        if (n->tag() != RuleTag::LabeledLeaf) return;
        const ProofLabel& lab = *n->data().label;
        const SchemaTuple& callee = D.tuple(lab.symbol);
        ParameterAssignment inner;
        for (const auto& q : callee.all_params()) {
          Term image = lab.replacement.image(q);
          const auto* v = image.as_var();
          if (v && v->kind == VarKind::Parameter && v->name == q && !sigma.binds(q)) continue;
          Term val = evaluate(assign(sigma, image), E);
          if (!val.is_numeral()) throw InternalError("non-numeral call image");
          inner.bindings[q] = val.as_num()->value;
        }
        ++count;
        tuple(lab.symbol, inner);
      });
    }
  };
  Walker w{D, E};
  w.tuple(D.main, sigma);
  return w.count;
}

}  // namespace schemakit
