#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "schemakit/analysis.hpp"
#include "schemakit/schema.hpp"

namespace schemakit {

// ---- sequent formulas ----

inline std::vector<Formula> disjunct_list(const Sequent& s) {
  std::vector<Formula> out;
  out.reserve(s.antecedent.size() + s.succedent.size());
  for (const auto& a : s.antecedent) out.push_back(Formula::neg(a));
  for (const auto& b : s.succedent) out.push_back(b);
  return out;
}

/// F(S): the disjunction of the negated antecedent and the succedent,
/// right-associated; the empty sequent maps to ~(0 = 0).
inline Formula sequent_formula(const Sequent& s) {
  auto list = disjunct_list(s);
  if (list.empty()) return Formula::neg(Formula::eq(Term::zero(), Term::zero()));
  Formula cur = list.back();
  for (std::size_t i = list.size() - 1; i-- > 0;) cur = Formula::disj(list[i], cur);
  return cur;
}

namespace detail {

// folds the whole succedent (which must be the multiset of `list`) into the
// right-associated disjunction of `list`
inline Proof fold_succedent(Proof p, const std::vector<Formula>& list) {
  if (list.empty()) return build::weak_r(std::move(p), sequent_formula(Sequent{}));
  Formula acc = list.back();
  for (std::size_t i = list.size() - 1; i-- > 0;) {
    p = build::or_r(std::move(p), list[i], acc);
    acc = Formula::disj(list[i], acc);
  }
  return p;
}

// from a proof of Gamma |- Delta, a proof of |- F(Gamma |- Delta)
inline Proof prove_sequent_formula(Proof p) {
  Sequent s = p->conclusion();
  for (const auto& a : s.antecedent) p = build::neg_r(std::move(p), a);
  return fold_succedent(std::move(p), disjunct_list(s));
}

// derivation of Gamma, F(S) |- Delta for S = Gamma |- Delta
inline Proof derive_from_sequent_formula(const Sequent& s) {
  auto list = disjunct_list(s);
  if (list.empty())
    throw Error("the empty sequent's formula cannot be discharged from atomic axioms");
  auto case_proof = [&](std::size_t i) -> Proof {
    if (i < s.antecedent.size()) {
      const Formula& a = s.antecedent[i];
      Proof p = build::taut_id(a);  // A |- A
      std::vector<Formula> rest = s.antecedent;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      p = build::weaken(std::move(p), rest, s.succedent);
      return build::neg_l(std::move(p), a);  // Gamma, ~A |- Delta
    }
    const Formula& b = s.succedent[i - s.antecedent.size()];
    Proof p = build::taut_id(b);
    std::vector<Formula> rest = s.succedent;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i - s.antecedent.size()));
    return build::weaken(std::move(p), s.antecedent, rest);  // Gamma, B |- Delta
  };
  std::function<Proof(std::size_t)> orfold = [&](std::size_t i) -> Proof {
    Proof head = case_proof(i);
    if (i + 1 == list.size()) return head;
    Proof tail = orfold(i + 1);
    Formula tail_f = list.back();
    for (std::size_t j = list.size() - 1; j-- > i + 1;) tail_f = Formula::disj(list[j], tail_f);
    Proof p = build::or_l(head, tail, list[i], tail_f);
    Sequent target;
    target.antecedent = s.antecedent;
    target.antecedent.push_back(Formula::disj(list[i], tail_f));
    target.succedent = s.succedent;
    return build::contract_to(std::move(p), target);
  };
  return orfold(0);
}

}  // namespace detail

// ---- proof schema -> PRA ----

namespace detail {

struct SchemaToPra {
  const ProofSchema& D;
  const EquationalTheory& E;
  std::map<std::string, Proof> prepared_step;
  std::set<std::string> used_names;

  static bool is_recursive(const SchemaTuple& t) {
    bool found = false;
    visit_proof(t.step, [&](const Proof& n) {
      if (n->tag() == RuleTag::LabeledLeaf && n->data().label->symbol == t.symbol) found = true;
    });
    return found;
  }

  static bool strong_on_self_paths(const Proof& step, const std::string& sym) {
    std::vector<std::vector<std::size_t>> leaves;
    std::vector<std::size_t> cur;
    find_nodes(step,
               [&](const Proof& n) {
                 return n->tag() == RuleTag::LabeledLeaf && n->data().label->symbol == sym;
               },
               leaves, cur);
    for (const auto& path : leaves) {
      const Proof* node = &step;
      for (std::size_t i : path) {
        if ((*node)->tag() == RuleTag::AllR || (*node)->tag() == RuleTag::ExL) return true;
        node = &(*node)->premises()[i];
      }
    }
    return false;
  }

  void prepare() {
    for (const auto& [sym, tup] : D.tuples) {
      collect_names(tup.base, used_names);
      collect_names(tup.step, used_names);
      collect_names(tup.end_sequent_template, used_names);
      Proof step = tup.step;
      if (is_recursive(tup) && strong_on_self_paths(step, sym)) {
        step = cut_eliminate_partial(step, E);
        if (strong_on_self_paths(step, sym)) throw StrongQuantifierOnCallBranch(sym);
      }
      prepared_step.emplace(sym, std::move(step));
    }
  }

  ParameterReplacement with_active(const ParameterReplacement& psip, const std::string& act,
                                   const Term& val) const {
    std::map<std::string, Term> m = psip.map;
    m[act] = val;
    return ParameterReplacement(std::move(m));
  }

  // rebuilds a body under a parameter replacement, splicing cross-calls
  // recursively and self-calls with `self` (when given)
  Proof rebuild(const Proof& node, const std::string& host, const ParameterReplacement& psi,
                const std::optional<Proof>& self) {
    if (node->tag() == RuleTag::LabeledLeaf) {
      const ProofLabel& lab = *node->data().label;
      Sequent want = apply_replacement(psi, node->conclusion());
      Proof sub;
      if (lab.symbol == host) {
        if (!self) throw InternalError("unexpected self-call during translation");
        sub = *self;
      } else {
        sub = make(lab.symbol, compose(lab.replacement, psi));
      }
      sub = freshen_eigenvariables(sub, used_names);
      if (!sequent_multiset_equal(end_sequent(sub), want))
        throw InternalError("spliced translation does not close its call leaf");
      return sub;
    }
    std::vector<Proof> premises;
    premises.reserve(node->premises().size());
    for (const auto& q : node->premises()) premises.push_back(rebuild(q, host, psi, self));
    Sequent concl = apply_replacement(psi, node->conclusion());
    RuleData d = node->data();
    if (d.witness) d.witness = apply_replacement(psi, *d.witness);
    if (d.cut_formula) d.cut_formula = apply_replacement(psi, *d.cut_formula);
    if (d.eq) {
      // numeral collapse can invalidate the stored position
      auto sub_c = formula_subterm_at(cedent(concl, d.eq->side)[d.eq->index], d.eq->path);
      auto sub_p = formula_subterm_at(
          cedent(premises[0]->conclusion(), d.eq->side)[d.eq->index], d.eq->path);
      if (!sub_c || !sub_p) {
        auto cert = recompute_eq_certificate(premises[0]->conclusion(), concl, E);
        if (!cert) throw InternalError("equational certificate lost under replacement");
        d.eq = *cert;
      }
    }
    return make_proof(node->tag(), std::move(concl), std::move(d), std::move(premises));
  }

  // like rebuild, but self-calls become the assumption F(S(host)) via the
  // glue derivation; the assumption is threaded down the antecedent.
  // Returns the proof and how many copies of fS its antecedent carries.
  std::pair<Proof, std::size_t> rebuild_graft(const Proof& node, const std::string& host,
                                              const ParameterReplacement& psi,
                                              const Formula& fS) {
    if (node->tag() == RuleTag::LabeledLeaf) {
      const ProofLabel& lab = *node->data().label;
      Sequent want = apply_replacement(psi, node->conclusion());
      if (lab.symbol == host) {
        Proof glue = derive_from_sequent_formula(want);
        glue = freshen_eigenvariables(glue, used_names);
        return {glue, 1};
      }
      Proof sub = freshen_eigenvariables(make(lab.symbol, compose(lab.replacement, psi)),
                                         used_names);
      if (!sequent_multiset_equal(end_sequent(sub), want))
        throw InternalError("spliced translation does not close its call leaf");
      return {sub, 0};
    }
    std::vector<Proof> premises;
    std::size_t extra = 0;
    for (const auto& q : node->premises()) {
      auto [sub, k] = rebuild_graft(q, host, psi, fS);
      premises.push_back(std::move(sub));
      extra += k;
    }
    Sequent concl = apply_replacement(psi, node->conclusion());
    for (std::size_t i = 0; i < extra; ++i) concl.antecedent.push_back(fS);
    RuleData d = node->data();
    if (d.witness) d.witness = apply_replacement(psi, *d.witness);
    if (d.cut_formula) d.cut_formula = apply_replacement(psi, *d.cut_formula);
    if (d.eq) {
      auto sub_c = formula_subterm_at(cedent(concl, d.eq->side)[d.eq->index], d.eq->path);
      if (!sub_c) throw InternalError("equational certificate lost while grafting");
    }
    return {make_proof(node->tag(), std::move(concl), std::move(d), std::move(premises)), extra};
  }

  // one induction per instantiation target: proof of S(sym){act <- p}psip
  Proof build_ind(const std::string& sym, const ParameterReplacement& psip,
                  const std::string& p_name) {
    const SchemaTuple& tup = D.tuple(sym);
    // keep the active parameter clear of caller names
    std::string act = fresh_name("m", used_names);
    used_names.insert(act);
    ParameterReplacement to_fresh({{tup.active, Term::param(act)}});
    Sequent templ = apply_replacement(psip, apply_replacement(to_fresh, tup.end_sequent_template));
    Proof step = apply_replacement_proof(to_fresh, prepared_step.at(sym));

    Proof base_b = rebuild(tup.base, sym, psip, std::nullopt);
    Formula fS = sequent_formula(templ);
    auto [step_g, copies] = rebuild_graft(step, sym, psip, fS);
    if (copies == 0) step_g = build::weak_l(std::move(step_g), fS);
    Sequent succ_templ = apply_replacement(ParameterReplacement({{act, Term::succ(Term::param(act))}}), templ);
    {
      Sequent want = succ_templ;
      want.antecedent.push_back(fS);
      step_g = build::contract_to(std::move(step_g), want);
    }

    // |- F(S){act<-0}
    Proof left = prove_sequent_formula(base_b);
    // F(S) |- F(S){act<-s(act)}
    Proof right = std::move(step_g);
    for (const auto& a : succ_templ.antecedent) right = build::neg_r(std::move(right), a);
    right = fold_succedent(std::move(right), disjunct_list(succ_templ));

    std::string y = fresh_name("m", used_names);
    used_names.insert(y);
    right = apply_replacement_proof(ParameterReplacement({{act, Term::param(y)}}), right);

    IndData ind;
    ind.step_var = y;
    ind.step_var_is_param = true;
    ind.concl_var = p_name;
    ind.concl_var_is_param = true;
    ind.formula = replace_params(fS, {{act, Term::param(y)}});
    Proof ind_node = build::ind(left, right, std::move(ind));

    Sequent instance = apply_replacement(ParameterReplacement({{act, Term::param(p_name)}}), templ);
    Proof glue = derive_from_sequent_formula(instance);
    glue = freshen_eigenvariables(glue, used_names);
    return build::cut(ind_node, glue, replace_params(fS, {{act, Term::param(p_name)}}));
  }

  Proof make(const std::string& sym, const ParameterReplacement& psi) {
    const SchemaTuple& tup = D.tuple(sym);
    Term t = psi.image(tup.active);
    std::map<std::string, Term> pm = psi.map;
    pm.erase(tup.active);
    ParameterReplacement psip(std::move(pm));
    bool act_in_template = sequent_params(tup.end_sequent_template).count(tup.active) > 0;
    bool recursive = is_recursive(tup);
    if (!recursive && !act_in_template)
      return rebuild(prepared_step.at(sym), sym, psi, std::nullopt);

    std::size_t d = 0;
    Term b = t;
    while (b.as_succ()) {
      ++d;
      b = b.as_succ()->arg;
    }
    Proof core;
    Term cur;
    if (b.is_numeral()) {
      Nat k = b.as_num()->value;
      core = rebuild(tup.base, sym, psip, std::nullopt);
      cur = Term::zero();
      for (Nat i = 0; i < k; ++i) {
        core = rebuild(prepared_step.at(sym), sym, with_active(psip, tup.active, cur), core);
        cur = Term::succ(cur);
      }
    } else {
      const auto* v = b.as_var();
      if (!v || v->kind != VarKind::Parameter)
        throw InternalError("replacement image is not over {s, 0, parameters}");
      core = build_ind(sym, psip, v->name);
      cur = b;
    }
    for (std::size_t i = 0; i < d; ++i) {
      core = rebuild(prepared_step.at(sym), sym, with_active(psip, tup.active, cur), core);
      cur = Term::succ(cur);
    }
    return core;
  }
};

}  // namespace detail

/// Translates a proof schema into a PRA proof of its main end-sequent
/// template: cross-calls are spliced bottom-up over the symbol order, each
/// self-recursive tuple contributes an induction on its sequent formula, and
/// instantiated calls peel successor layers with spliced step instances.
inline Proof schema_to_pra(const ProofSchema& D, const EquationalTheory& E) {
  auto rep = check_schema(D, E);
  if (!rep.accepted()) throw Error("schema_to_pra: " + describe(rep));
  detail::SchemaToPra ctx{D, E};
  ctx.prepare();
  return ctx.make(D.main, ParameterReplacement{});
}

// ---- PRA -> proof schema ----

/// One induction inference of a PRA proof, addressed by its position.
struct InductionSite {
  std::vector<std::size_t> path;
  Formula formula;   // F over the step variable
  Term variable;     // the conclusion variable
  Proof base;        // left premise subtree
  Proof step;        // right premise subtree
  InductionSite() : formula(Formula::eq(Term::zero(), Term::zero())) {}
};

inline std::vector<InductionSite> collect_induction_sites(const Proof& p) {
  std::vector<std::vector<std::size_t>> paths;
  std::vector<std::size_t> cur;
  find_nodes(p, [](const Proof& n) { return n->tag() == RuleTag::Ind; }, paths, cur);
  std::vector<InductionSite> out;
  for (auto& path : paths) {
    const Proof& n = node_at(p, path);
    InductionSite site;
    site.path = path;
    site.formula = n->data().ind->formula;
    site.variable = n->data().ind->concl_term();
    site.base = n->premises()[0];
    site.step = n->premises()[1];
    out.push_back(std::move(site));
  }
  return out;
}

namespace detail {

struct PraToSchema {
  const EquationalTheory& E;
  std::set<std::string> used_names;

  struct MadeTuple {
    SchemaTuple tuple;
    // components with the conclusion variable abstracted to a placeholder,
    // for structural sharing of repeated inductions
    Proof key_base;
    Proof key_step_premise;
    Formula key_formula;
    Sequent key_context;
    MadeTuple()
        : key_formula(Formula::eq(Term::zero(), Term::zero())) {}
  };
  std::vector<MadeTuple> made;  // creation order (innermost first)

  static constexpr const char* kPlaceholder = "_cv";

  Proof transform(const Proof& node) {
    std::vector<Proof> premises;
    premises.reserve(node->premises().size());
    for (const auto& q : node->premises()) premises.push_back(transform(q));
    if (node->tag() != RuleTag::Ind)
      return make_proof(node->tag(), node->conclusion(), node->data(), std::move(premises));

    const IndData& ind = *node->data().ind;
    if (!ind.concl_var_is_param)
      throw InternalError("induction variable should have been made a parameter");

    // abstract the conclusion variable for sharing
    ParameterReplacement abstr({{ind.concl_var, Term::param(kPlaceholder)}});
    Formula f_abs = ind.step_var_is_param
                        ? replace_params(ind.formula, {{ind.step_var, Term::param(kPlaceholder)}})
                        : substitute(ind.formula, {{ind.step_var, Term::param(kPlaceholder)}});
    Sequent context = node->conclusion();
    context.succedent.erase(context.succedent.begin() +
                            static_cast<std::ptrdiff_t>(ind.pos));
    Sequent context_abs = apply_replacement(abstr, context);
    Proof base_abs = apply_replacement_proof(abstr, premises[0]);
    Proof step_abs = apply_replacement_proof(abstr, premises[1]);

    const MadeTuple* found = nullptr;
    for (const auto& m : made) {
      if (m.key_formula == f_abs && m.key_context == context_abs &&
          proofs_equal_mod_eigenvariables(m.key_base, base_abs) &&
          proofs_equal_mod_eigenvariables(m.key_step_premise, step_abs)) {
        found = &m;
        break;
      }
    }
    std::string symbol;
    if (found) {
      symbol = found->tuple.symbol;
    } else {
      symbol = "tmp" + std::to_string(made.size());
      std::string act = fresh_name("m", used_names);
      used_names.insert(act);

      SchemaTuple tup;
      tup.symbol = symbol;
      tup.active = act;
      tup.end_sequent_template = node->conclusion();
      tup.end_sequent_template.succedent[ind.pos] =
          ind.step_var_is_param
              ? replace_params(ind.formula, {{ind.step_var, Term::param(act)}})
              : substitute(ind.formula, {{ind.step_var, Term::param(act)}});
      tup.base = premises[0];

      Proof leaf = make_leaf(ProofLabel{symbol, ParameterReplacement{}},
                             tup.end_sequent_template);
      Formula f_act = ind.step_var_is_param
                          ? replace_params(ind.formula, {{ind.step_var, Term::param(act)}})
                          : substitute(ind.formula, {{ind.step_var, Term::param(act)}});
      Proof step_inst =
          ind.step_var_is_param
              ? apply_replacement_proof(
                    ParameterReplacement({{ind.step_var, Term::param(act)}}), premises[1])
              : apply_substitution_proof({{ind.step_var, Term::param(act)}}, premises[1]);
      Proof cut = build::cut(leaf, step_inst, f_act);
      Sequent target = apply_replacement(
          ParameterReplacement({{act, Term::succ(Term::param(act))}}), tup.end_sequent_template);
      tup.step = build::contract_to(std::move(cut), target);

      MadeTuple m;
      m.tuple = std::move(tup);
      m.key_base = std::move(base_abs);
      m.key_step_premise = std::move(step_abs);
      m.key_formula = std::move(f_abs);
      m.key_context = std::move(context_abs);
      made.push_back(std::move(m));
    }
    const SchemaTuple& tup = made[find_symbol(symbol)].tuple;
    ParameterReplacement call(
        std::map<std::string, Term>{{tup.active, ind.concl_term()}});
    return make_leaf(ProofLabel{symbol, call}, node->conclusion());
  }

  std::size_t find_symbol(const std::string& sym) const {
    for (std::size_t i = 0; i < made.size(); ++i)
      if (made[i].tuple.symbol == sym) return i;
    throw InternalError("lost a freshly made tuple");
  }
};

inline Proof relabel(const Proof& p, const std::map<std::string, std::string>& names) {
  std::vector<Proof> premises;
  premises.reserve(p->premises().size());
  for (const auto& q : p->premises()) premises.push_back(relabel(q, names));
  RuleData d = p->data();
  if (d.label) {
    auto it = names.find(d.label->symbol);
    if (it != names.end()) d.label->symbol = it->second;
  }
  return make_proof(p->tag(), p->conclusion(), std::move(d), std::move(premises));
}

inline void collect_tuple_params(const SchemaTuple& t, std::set<std::string>& out) {
  detail::collect_params_in_proof(t.base, out);
  detail::collect_params_in_proof(t.step, out);
  for (const auto& q : sequent_params(t.end_sequent_template)) out.insert(q);
}

}  // namespace detail

/// Translates a PRA proof into a proof schema: each induction becomes a
/// tuple whose step cuts a self-call against the induction step, repeated
/// structurally equal inductions share one tuple, and the remainder of the
/// proof becomes the main tuple.
inline ProofSchema pra_to_schema(const Proof& p, const EquationalTheory& E) {
  {
    auto rep = check_lk(p, E, CheckMode::Pra);
    if (!rep.accepted()) throw Error("pra_to_schema: " + describe(rep));
  }
  // induction conclusion variables must stay free below their inference
  {
    std::vector<std::vector<std::size_t>> paths;
    std::vector<std::size_t> cur;
    find_nodes(p, [](const Proof& n) { return n->tag() == RuleTag::Ind; }, paths, cur);
    for (const auto& path : paths) {
      const Proof& ind = node_at(p, path);
      const IndData& d = *ind->data().ind;
      const Proof* node = &p;
      for (std::size_t i : path) {
        if (((*node)->tag() == RuleTag::AllR || (*node)->tag() == RuleTag::ExL) &&
            !d.concl_var_is_param && *(*node)->data().eigen == d.concl_var)
          throw StrongQuantifiedInductionVariable(d.concl_var);
        node = &(*node)->premises()[i];
      }
    }
  }
  // turn ordinary induction conclusion variables into parameters
  Proof q = p;
  {
    std::set<std::string> names;
    collect_names(q, names);
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<std::vector<std::size_t>> paths;
      std::vector<std::size_t> cur;
      find_nodes(q, [](const Proof& n) { return n->tag() == RuleTag::Ind; }, paths, cur);
      for (const auto& path : paths) {
        const IndData& d = *node_at(q, path)->data().ind;
        if (d.concl_var_is_param) continue;
        std::string pname = d.concl_var;
        q = apply_substitution_proof({{d.concl_var, Term::param(pname)}}, q);
        changed = true;
        break;
      }
    }
  }

  detail::PraToSchema ctx{E};
  collect_names(q, ctx.used_names);
  ctx.used_names.insert(detail::PraToSchema::kPlaceholder);
  Proof main_body = ctx.transform(q);

  // final names: delta0 for the main symbol, then outermost to innermost
  std::map<std::string, std::string> names;
  std::vector<std::string> order{"delta0"};
  for (std::size_t i = ctx.made.size(); i-- > 0;) {
    std::string fresh = "delta" + std::to_string(ctx.made.size() - i);
    names[ctx.made[i].tuple.symbol] = fresh;
    order.push_back(fresh);
  }

  ProofSchema D;
  D.main = "delta0";
  D.order = std::move(order);
  for (auto& m : ctx.made) {
    SchemaTuple t = m.tuple;
    t.symbol = names.at(t.symbol);
    t.base = detail::relabel(t.base, names);
    t.step = detail::relabel(t.step, names);
    std::set<std::string> params;
    detail::collect_tuple_params(t, params);
    params.erase(t.active);
    t.passive.assign(params.begin(), params.end());
    D.tuples.emplace(t.symbol, std::move(t));
  }
  {
    SchemaTuple main;
    main.symbol = "delta0";
    main.active = fresh_name("m", ctx.used_names);
    main.end_sequent_template = end_sequent(q);
    main.base = detail::relabel(main_body, names);
    main.step = main.base;
    std::set<std::string> params;
    detail::collect_tuple_params(main, params);
    params.erase(main.active);
    main.passive.assign(params.begin(), params.end());
    D.tuples.emplace("delta0", std::move(main));
  }
  auto rep = check_schema(D, E);
  if (!rep.accepted()) throw InternalError("pra_to_schema built an ill-formed schema: " + describe(rep));
  return D;
}

// ---- strong-quantifier elimination (the cut-shift transformation) ----

namespace detail {

struct ThreadRebuild {
  const EquationalTheory& E;
  const std::vector<Formula>& instances;  // F(t1), ..., F(tk)
  std::vector<Term> witnesses;            // collected t_i in discovery order

  // thread = indices of antecedent occurrences descending to the cut formula
  Proof rec(const Proof& node, const std::vector<std::size_t>& thread) {
    if (thread.empty()) return node;
    const RuleData& d = node->data();
    auto maps = premise_occurrence_maps(node);

    auto in_thread = [&](std::size_t i) {
      return std::find(thread.begin(), thread.end(), i) != thread.end();
    };

    // principal on the thread?
    if (node->tag() == RuleTag::AllL && d.pos && in_thread(*d.pos)) {
      // drop the inference, weaken the siblings in
      std::vector<std::size_t> sub_thread = premise_thread(maps[0], thread);
      Proof premise = rec(node->premises()[0], sub_thread);
      const auto* q = node->conclusion().antecedent[*d.pos].as_quant();
      Formula inst = substitute(q->body, {{q->var, *d.witness}});
      for (const auto& f : instances)
        if (!(f == inst)) premise = build::weak_l(std::move(premise), f);
      return premise;
    }
    if (node->tag() == RuleTag::WeakL && d.pos && in_thread(*d.pos)) {
      std::vector<std::size_t> sub_thread = premise_thread(maps[0], thread);
      Proof premise = rec(node->premises()[0], sub_thread);
      for (const auto& f : instances) premise = build::weak_l(std::move(premise), f);
      return premise;
    }
    if (node->tag() == RuleTag::ContrL && d.pos && in_thread(*d.pos)) {
      std::vector<std::size_t> sub_thread = premise_thread(maps[0], thread);
      Proof premise = rec(node->premises()[0], sub_thread);
      for (const auto& f : instances) premise = build::contr_l(std::move(premise), f);
      return premise;
    }
    if (node->tag() == RuleTag::ERule && in_thread(d.eq->index) && d.eq->side == Side::Ante)
      throw InternalError("equational inference on the shifted cut thread");

    std::vector<Proof> premises;
    for (std::size_t k = 0; k < node->premises().size(); ++k)
      premises.push_back(rec(node->premises()[k], premise_thread(maps[k], thread)));

    Sequent concl = node->conclusion();
    // in-place: first thread occurrence becomes F(t1), the rest appended
    std::vector<std::size_t> sorted = thread;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i : sorted) {
      concl.antecedent[i] = instances[0];
      for (std::size_t j = 1; j < instances.size(); ++j)
        concl.antecedent.push_back(instances[j]);
    }
    return make_proof(node->tag(), std::move(concl), node->data(), std::move(premises));
  }

  static std::vector<std::size_t> premise_thread(const PremiseOccMap& map,
                                                 const std::vector<std::size_t>& thread) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < map.ante.size(); ++i) {
      if (!map.ante[i] || map.ante[i]->side != Side::Ante) continue;
      if (std::find(thread.begin(), thread.end(), map.ante[i]->index) != thread.end())
        out.push_back(i);
    }
    return out;
  }
};

// collects the witnesses of AllL inferences feeding the thread
inline void collect_thread_witnesses(const Proof& node, const std::vector<std::size_t>& thread,
                                     std::vector<Term>& out) {
  if (thread.empty()) return;
  const RuleData& d = node->data();
  auto maps = premise_occurrence_maps(node);
  if (node->tag() == RuleTag::AllL && d.pos &&
      std::find(thread.begin(), thread.end(), *d.pos) != thread.end()) {
    bool seen = false;
    for (const auto& t : out)
      if (t == *d.witness) seen = true;
    if (!seen) out.push_back(*d.witness);
  }
  for (std::size_t k = 0; k < node->premises().size(); ++k)
    collect_thread_witnesses(node->premises()[k],
                             ThreadRebuild::premise_thread(maps[k], thread), out);
}

// builds Gamma |- Delta, F(t) from the induction node for conclusion term t
inline Proof induction_at(const Proof& ind_node, const Term& t,
                          std::set<std::string>& used_names) {
  const IndData& d = *ind_node->data().ind;
  auto inst = [&](const Term& u) {
    if (d.step_var_is_param) return replace_params(d.formula, {{d.step_var, u}});
    return substitute(d.formula, {{d.step_var, u}});
  };
  Proof base = freshen_eigenvariables(ind_node->premises()[0], used_names);
  Proof step = freshen_eigenvariables(ind_node->premises()[1], used_names);
  if (const auto* v = t.as_var()) {
    IndData nd = d;
    nd.concl_var = v->name;
    nd.concl_var_is_param = v->kind == VarKind::Parameter;
    return build::ind(base, step, std::move(nd));
  }
  if (!t.is_numeral()) throw UnsupportedWitnessShape("witness must be a variable, parameter or numeral");
  // finite unrolling with cuts
  Nat k = t.as_num()->value;
  Proof cur = base;  // Gamma |- Delta, F(0)
  Sequent context = base->conclusion();
  if (!ms_remove_one(context.succedent, inst(Term::zero())))
    throw InternalError("induction base does not prove F(0)");
  for (Nat i = 0; i < k; ++i) {
    Term here = Term::numeral(i);
    Proof step_i = d.step_var_is_param
                       ? apply_replacement_proof(ParameterReplacement({{d.step_var, here}}),
                                                 ind_node->premises()[1])
                       : apply_substitution_proof({{d.step_var, here}}, ind_node->premises()[1]);
    step_i = freshen_eigenvariables(step_i, used_names);
    Proof cut = build::cut(cur, step_i, inst(here));
    Sequent target = context;
    target.succedent.push_back(inst(Term::numeral(i + 1)));
    cur = build::contract_to(std::move(cut), target);
  }
  return cur;
}

}  // namespace detail

/// Shifts a cut over a strongly quantified induction conclusion upward: the
/// universal cut formula is replaced by the conjunction of its instances at
/// the weak-quantifier witnesses found in the right branch, with the
/// induction duplicated once per witness.
inline Proof eliminate_strong_quantifier(const Proof& p, const EquationalTheory& E) {
  // locate the pattern: Cut whose left premise is AllR directly above Ind,
  // binding the induction's conclusion variable
  std::vector<std::vector<std::size_t>> cuts;
  std::vector<std::size_t> cur;
  find_nodes(p, [](const Proof& n) { return n->tag() == RuleTag::Cut; }, cuts, cur);
  const Proof* target = nullptr;
  std::vector<std::size_t> target_path;
  for (const auto& path : cuts) {
    const Proof& c = node_at(p, path);
    const Proof& left = c->premises()[0];
    if (left->tag() != RuleTag::AllR) continue;
    const Proof& ind = left->premises()[0];
    if (ind->tag() != RuleTag::Ind) continue;
    const IndData& d = *ind->data().ind;
    if (d.concl_var_is_param || d.concl_var != *left->data().eigen) continue;
    target = &c;
    target_path = path;
    break;
  }
  if (!target) throw PatternNotFound("no cut over a strongly quantified induction conclusion");

  const Proof& cut_node = *target;
  const Formula& a = *cut_node->data().cut_formula;
  const auto* aq = a.as_quant();
  const Proof& right = cut_node->premises()[1];
  const Proof& ind_node = cut_node->premises()[0]->premises()[0];

  std::set<std::string> used_names;
  collect_names(p, used_names);

  // thread of the cut formula in the right branch
  auto root_idx = ms_find(right->conclusion().antecedent, a);
  if (!root_idx) throw InternalError("cut formula missing from the right premise");
  std::vector<Term> witnesses;
  detail::collect_thread_witnesses(right, {*root_idx}, witnesses);
  if (witnesses.empty()) witnesses.push_back(Term::zero());
  for (const auto& t : witnesses) {
    if (!t.as_var() && !t.is_numeral())
      throw UnsupportedWitnessShape("witness must be a variable, parameter or numeral");
    if (term_ordinary_vars(t).count(aq->var))
      throw UnsupportedWitnessShape("witness contains the quantified variable");
  }

  std::vector<Formula> instances;
  for (const auto& t : witnesses) instances.push_back(substitute(aq->body, {{aq->var, t}}));

  detail::ThreadRebuild tr{E, instances, witnesses};
  Proof new_right = tr.rec(right, {*root_idx});

  // left side: one induction per witness, conjoined left-nested
  Proof left = detail::induction_at(ind_node, witnesses[0], used_names);
  Formula conj = instances[0];
  Sequent left_ctx = ind_node->conclusion();
  left_ctx.succedent.erase(left_ctx.succedent.begin() +
                           static_cast<std::ptrdiff_t>(ind_node->data().ind->pos));
  for (std::size_t i = 1; i < instances.size(); ++i) {
    Proof li = detail::induction_at(ind_node, witnesses[i], used_names);
    left = build::and_r(std::move(left), std::move(li), conj, instances[i]);
    conj = Formula::conj(conj, instances[i]);
    Sequent t = left_ctx;
    t.succedent.push_back(conj);
    left = build::contract_to(std::move(left), t);
  }

  // right side: fold the instances with AndL
  Proof folded = new_right;
  if (instances.size() >= 2) {
    Formula acc = instances[0];
    for (std::size_t i = 1; i < instances.size(); ++i) {
      folded = build::and_l(std::move(folded), acc, instances[i]);
      acc = Formula::conj(acc, instances[i]);
    }
  }
  Proof new_cut = build::cut(std::move(left), std::move(folded), conj);
  new_cut = build::contract_to(std::move(new_cut), cut_node->conclusion());

  // replace the cut node
  std::function<Proof(const Proof&, std::size_t)> splice = [&](const Proof& node,
                                                               std::size_t depth) -> Proof {
    if (depth == target_path.size()) return new_cut;
    std::vector<Proof> premises;
    for (std::size_t i = 0; i < node->premises().size(); ++i) {
      if (i == target_path[depth])
        premises.push_back(splice(node->premises()[i], depth + 1));
      else
        premises.push_back(node->premises()[i]);
    }
    return make_proof(node->tag(), node->conclusion(), node->data(), std::move(premises));
  };
  return splice(p, 0);
}

}  // namespace schemakit
