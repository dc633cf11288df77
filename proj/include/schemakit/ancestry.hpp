#pragma once

#include <optional>
#include <vector>

#include "schemakit/proof.hpp"

namespace schemakit {

struct OccRef {
  Side side;
  std::size_t index;
  friend bool operator==(const OccRef& a, const OccRef& b) {
    return a.side == b.side && a.index == b.index;
  }
};

/// For one premise: where each of its formula occurrences descends to in the
/// conclusion. Cut occurrences (and other consumed formulas) map nowhere.
struct PremiseOccMap {
  std::vector<std::optional<OccRef>> ante;
  std::vector<std::optional<OccRef>> succ;
};

namespace detail {

// Greedy first-fit pairing of context formulas onto unused conclusion slots.
inline void pair_context(const std::vector<Formula>& prem, std::vector<std::optional<OccRef>>& out,
                         const std::vector<Formula>& concl, std::vector<bool>& used, Side side) {
  for (std::size_t i = 0; i < prem.size(); ++i) {
    if (out[i]) continue;
    for (std::size_t j = 0; j < concl.size(); ++j) {
      if (used[j] || !(concl[j] == prem[i])) continue;
      out[i] = OccRef{side, j};
      used[j] = true;
      break;
    }
  }
}

inline std::optional<std::size_t> first_unset_match(const std::vector<Formula>& xs,
                                                    const std::vector<std::optional<OccRef>>& out,
                                                    const Formula& f,
                                                    std::size_t skip_index = SIZE_MAX) {
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (i != skip_index && !out[i] && xs[i] == f) return i;
  return std::nullopt;
}

}  // namespace detail

/// Computes, for a correctly checked node, how each premise occurrence maps
/// into the conclusion.
inline std::vector<PremiseOccMap> premise_occurrence_maps(const Proof& p) {
  const Sequent& c = p->conclusion();
  const RuleData& d = p->data();
  std::vector<PremiseOccMap> maps;
  maps.reserve(p->premises().size());
  for (const auto& q : p->premises()) {
    maps.push_back(PremiseOccMap{
        std::vector<std::optional<OccRef>>(q->conclusion().antecedent.size()),
        std::vector<std::optional<OccRef>>(q->conclusion().succedent.size())});
  }
  std::vector<bool> used_a(c.antecedent.size(), false);
  std::vector<bool> used_s(c.succedent.size(), false);

  auto prem = [&](std::size_t i) -> const Sequent& { return p->premises()[i]->conclusion(); };
  auto mark_principal = [&](Side side) {
    (side == Side::Ante ? used_a : used_s)[*d.pos] = true;
  };
  auto bind = [&](std::size_t premise, Side prem_side, std::size_t prem_idx, Side concl_side,
                  std::size_t concl_idx) {
    auto& slot = prem_side == Side::Ante ? maps[premise].ante[prem_idx]
                                         : maps[premise].succ[prem_idx];
    slot = OccRef{concl_side, concl_idx};
  };

  switch (p->tag()) {
    case RuleTag::Axiom:
    case RuleTag::LabeledLeaf:
      return maps;
    case RuleTag::Cut: {
      const Formula& a = *d.cut_formula;
      auto i0 = detail::first_unset_match(prem(0).succedent, maps[0].succ, a);
      auto i1 = detail::first_unset_match(prem(1).antecedent, maps[1].ante, a);
      if (i0) maps[0].succ[*i0] = std::nullopt;  // consumed
      if (i1) maps[1].ante[*i1] = std::nullopt;
      // exclude the cut occurrences from pairing by temporarily marking them
      std::vector<std::optional<OccRef>>& s0 = maps[0].succ;
      std::vector<std::optional<OccRef>>& a1 = maps[1].ante;
      if (i0) s0[*i0] = OccRef{Side::Succ, SIZE_MAX};
      if (i1) a1[*i1] = OccRef{Side::Ante, SIZE_MAX};
      detail::pair_context(prem(0).antecedent, maps[0].ante, c.antecedent, used_a, Side::Ante);
      detail::pair_context(prem(1).antecedent, maps[1].ante, c.antecedent, used_a, Side::Ante);
      detail::pair_context(prem(0).succedent, maps[0].succ, c.succedent, used_s, Side::Succ);
      detail::pair_context(prem(1).succedent, maps[1].succ, c.succedent, used_s, Side::Succ);
      if (i0) s0[*i0] = std::nullopt;
      if (i1) a1[*i1] = std::nullopt;
      return maps;
    }
    case RuleTag::WeakL:
    case RuleTag::WeakR: {
      mark_principal(p->tag() == RuleTag::WeakL ? Side::Ante : Side::Succ);
      break;
    }
    case RuleTag::ContrL: {
      const Formula& f = c.antecedent[*d.pos];
      for (int k = 0; k < 2; ++k) {
        auto i = detail::first_unset_match(prem(0).antecedent, maps[0].ante, f);
        if (i) bind(0, Side::Ante, *i, Side::Ante, *d.pos);
      }
      mark_principal(Side::Ante);
      break;
    }
    case RuleTag::ContrR: {
      const Formula& f = c.succedent[*d.pos];
      for (int k = 0; k < 2; ++k) {
        auto i = detail::first_unset_match(prem(0).succedent, maps[0].succ, f);
        if (i) bind(0, Side::Succ, *i, Side::Succ, *d.pos);
      }
      mark_principal(Side::Succ);
      break;
    }
    case RuleTag::AndL: {
      const auto* b = c.antecedent[*d.pos].as_bin();
      auto i = detail::first_unset_match(prem(0).antecedent, maps[0].ante, b->lhs);
      if (i) bind(0, Side::Ante, *i, Side::Ante, *d.pos);
      auto j = detail::first_unset_match(prem(0).antecedent, maps[0].ante, b->rhs);
      if (j) bind(0, Side::Ante, *j, Side::Ante, *d.pos);
      mark_principal(Side::Ante);
      break;
    }
    case RuleTag::OrR: {
      const auto* b = c.succedent[*d.pos].as_bin();
      auto i = detail::first_unset_match(prem(0).succedent, maps[0].succ, b->lhs);
      if (i) bind(0, Side::Succ, *i, Side::Succ, *d.pos);
      auto j = detail::first_unset_match(prem(0).succedent, maps[0].succ, b->rhs);
      if (j) bind(0, Side::Succ, *j, Side::Succ, *d.pos);
      mark_principal(Side::Succ);
      break;
    }
    case RuleTag::ImpR: {
      const auto* b = c.succedent[*d.pos].as_bin();
      auto i = detail::first_unset_match(prem(0).antecedent, maps[0].ante, b->lhs);
      if (i) bind(0, Side::Ante, *i, Side::Succ, *d.pos);
      auto j = detail::first_unset_match(prem(0).succedent, maps[0].succ, b->rhs);
      if (j) bind(0, Side::Succ, *j, Side::Succ, *d.pos);
      mark_principal(Side::Succ);
      break;
    }
    case RuleTag::NegL: {
      const auto* n = c.antecedent[*d.pos].as_neg();
      auto i = detail::first_unset_match(prem(0).succedent, maps[0].succ, n->body);
      if (i) bind(0, Side::Succ, *i, Side::Ante, *d.pos);
      mark_principal(Side::Ante);
      break;
    }
    case RuleTag::NegR: {
      const auto* n = c.succedent[*d.pos].as_neg();
      auto i = detail::first_unset_match(prem(0).antecedent, maps[0].ante, n->body);
      if (i) bind(0, Side::Ante, *i, Side::Succ, *d.pos);
      mark_principal(Side::Succ);
      break;
    }
    case RuleTag::AndR: {
      const auto* b = c.succedent[*d.pos].as_bin();
      auto i = detail::first_unset_match(prem(0).succedent, maps[0].succ, b->lhs);
      if (i) bind(0, Side::Succ, *i, Side::Succ, *d.pos);
      auto j = detail::first_unset_match(prem(1).succedent, maps[1].succ, b->rhs);
      if (j) bind(1, Side::Succ, *j, Side::Succ, *d.pos);
      mark_principal(Side::Succ);
      break;
    }
    case RuleTag::OrL: {
      const auto* b = c.antecedent[*d.pos].as_bin();
      auto i = detail::first_unset_match(prem(0).antecedent, maps[0].ante, b->lhs);
      if (i) bind(0, Side::Ante, *i, Side::Ante, *d.pos);
      auto j = detail::first_unset_match(prem(1).antecedent, maps[1].ante, b->rhs);
      if (j) bind(1, Side::Ante, *j, Side::Ante, *d.pos);
      mark_principal(Side::Ante);
      break;
    }
    case RuleTag::ImpL: {
      const auto* b = c.antecedent[*d.pos].as_bin();
      auto i = detail::first_unset_match(prem(0).succedent, maps[0].succ, b->lhs);
      if (i) bind(0, Side::Succ, *i, Side::Ante, *d.pos);
      auto j = detail::first_unset_match(prem(1).antecedent, maps[1].ante, b->rhs);
      if (j) bind(1, Side::Ante, *j, Side::Ante, *d.pos);
      mark_principal(Side::Ante);
      break;
    }
    case RuleTag::AllL:
    case RuleTag::ExR: {
      Side side = p->tag() == RuleTag::AllL ? Side::Ante : Side::Succ;
      const auto* q = cedent(c, side)[*d.pos].as_quant();
      Formula inst = substitute(q->body, {{q->var, *d.witness}});
      auto& slots = side == Side::Ante ? maps[0].ante : maps[0].succ;
      auto i = detail::first_unset_match(cedent(prem(0), side), slots, inst);
      if (i) bind(0, side, *i, side, *d.pos);
      mark_principal(side);
      break;
    }
    case RuleTag::AllR:
    case RuleTag::ExL: {
      Side side = p->tag() == RuleTag::AllR ? Side::Succ : Side::Ante;
      const auto* q = cedent(c, side)[*d.pos].as_quant();
      Formula inst = substitute(q->body, {{q->var, Term::var(*d.eigen)}});
      auto& slots = side == Side::Ante ? maps[0].ante : maps[0].succ;
      auto i = detail::first_unset_match(cedent(prem(0), side), slots, inst);
      if (i) bind(0, side, *i, side, *d.pos);
      mark_principal(side);
      break;
    }
    case RuleTag::ERule: {
      // strictly positional
      for (std::size_t i = 0; i < prem(0).antecedent.size(); ++i)
        maps[0].ante[i] = OccRef{Side::Ante, i};
      for (std::size_t i = 0; i < prem(0).succedent.size(); ++i)
        maps[0].succ[i] = OccRef{Side::Succ, i};
      return maps;
    }
    case RuleTag::Ind: {
      const IndData& ind = *d.ind;
      auto inst = [&](const Term& t) {
        if (ind.step_var_is_param) return replace_params(ind.formula, {{ind.step_var, t}});
        return substitute(ind.formula, {{ind.step_var, t}});
      };
      auto i0 = detail::first_unset_match(prem(0).succedent, maps[0].succ, inst(Term::zero()));
      if (i0) bind(0, Side::Succ, *i0, Side::Succ, ind.pos);
      auto i1 = detail::first_unset_match(prem(1).antecedent, maps[1].ante, inst(ind.step_term()));
      if (i1) bind(1, Side::Ante, *i1, Side::Ante, SIZE_MAX);  // consumed
      auto i2 =
          detail::first_unset_match(prem(1).succedent, maps[1].succ, inst(Term::succ(ind.step_term())));
      if (i2) bind(1, Side::Succ, *i2, Side::Succ, ind.pos);
      if (i1) maps[1].ante[*i1] = std::nullopt;
      used_s[ind.pos] = true;
      break;
    }
  }

  for (std::size_t i = 0; i < p->premises().size(); ++i) {
    detail::pair_context(prem(i).antecedent, maps[i].ante, c.antecedent, used_a, Side::Ante);
    detail::pair_context(prem(i).succedent, maps[i].succ, c.succedent, used_s, Side::Succ);
  }
  return maps;
}

/// Positions (root premise-index paths) of every node satisfying `pred`.
template <typename Pred>
inline void find_nodes(const Proof& p, Pred&& pred, std::vector<std::vector<std::size_t>>& out,
                       std::vector<std::size_t>& cur) {
  if (pred(p)) out.push_back(cur);
  for (std::size_t i = 0; i < p->premises().size(); ++i) {
    cur.push_back(i);
    find_nodes(p->premises()[i], pred, out, cur);
    cur.pop_back();
  }
}

inline const Proof& node_at(const Proof& p, const std::vector<std::size_t>& path) {
  const Proof* cur = &p;
  for (std::size_t i : path) cur = &(*cur)->premises()[i];
  return *cur;
}

}  // namespace schemakit
