#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "schemakit/ancestry.hpp"
#include "schemakit/proof_build.hpp"

namespace schemakit {

// ---- term ordering (for deterministic sets of witnesses) ----

inline int term_compare(const Term& a, const Term& b) {
  if (a.node().index() != b.node().index())
    return a.node().index() < b.node().index() ? -1 : 1;
  if (const auto* n = a.as_num()) {
    const auto& m = b.as_num()->value;
    return n->value == m ? 0 : (n->value < m ? -1 : 1);
  }
  if (const auto* s = a.as_succ()) return term_compare(s->arg, b.as_succ()->arg);
  if (const auto* v = a.as_var()) {
    const auto* w = b.as_var();
    if (v->kind != w->kind) return v->kind == VarKind::Ordinary ? -1 : 1;
    return v->name.compare(w->name);
  }
  const auto* f = a.as_fn();
  const auto* g = b.as_fn();
  if (int c = f->symbol.compare(g->symbol)) return c;
  if (f->args.size() != g->args.size()) return f->args.size() < g->args.size() ? -1 : 1;
  for (std::size_t i = 0; i < f->args.size(); ++i)
    if (int c = term_compare(f->args[i], g->args[i])) return c;
  return 0;
}

struct TermTupleLess {
  bool operator()(const std::vector<Term>& a, const std::vector<Term>& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i)
      if (int c = term_compare(a[i], b[i])) return c < 0;
    return false;
  }
};

using TermTupleSet = std::set<std::vector<Term>, TermTupleLess>;

// ---- Skolemization ----

struct SkolemMap {
  struct Entry {
    Side side;
    std::size_t index;                 // end-sequent formula occurrence
    std::vector<std::size_t> path;     // quantifier position inside it
    std::string symbol;
    std::size_t arity;
  };
  std::vector<Entry> entries;
};

namespace detail {

struct Skolemizer {
  const EquationalTheory& E;
  SkolemMap* map;
  std::size_t counter = 0;

  std::string fresh_symbol() {
    for (;; ++counter) {
      std::string cand = "sk" + std::to_string(counter);
      if (!E.fn_arity(cand) && !E.pred_arity(cand)) {
        ++counter;
        return cand;
      }
    }
  }

  // `positive` is succedent polarity; strong quantifiers are positive
  // universals and negative existentials.
  Formula walk(const Formula& f, bool positive, std::vector<Term>& weak_args, Side side,
               std::size_t index, std::vector<std::size_t>& path) {
    if (f.is_atomic()) return f;
    if (const auto* n = f.as_neg()) {
      path.push_back(0);
      Formula body = walk(n->body, !positive, weak_args, side, index, path);
      path.pop_back();
      return Formula::neg(std::move(body));
    }
    if (const auto* b = f.as_bin()) {
      path.push_back(0);
      Formula lhs =
          walk(b->lhs, b->conn == Conn::Implies ? !positive : positive, weak_args, side, index, path);
      path.back() = 1;
      Formula rhs = walk(b->rhs, positive, weak_args, side, index, path);
      path.pop_back();
      return Formula::bin(b->conn, std::move(lhs), std::move(rhs));
    }
    const auto* q = f.as_quant();
    bool strong = (positive && q->q == Quantifier::Forall) ||
                  (!positive && q->q == Quantifier::Exists);
    if (strong) {
      std::string sym = fresh_symbol();
      map->entries.push_back({side, index, path, sym, weak_args.size()});
      Term sk = Term::fn(sym, weak_args);
      Formula inst = substitute(q->body, {{q->var, sk}});
      return walk(inst, positive, weak_args, side, index, path);
    }
    weak_args.push_back(Term::var(q->var));
    path.push_back(0);
    Formula body = walk(q->body, positive, weak_args, side, index, path);
    path.pop_back();
    weak_args.pop_back();
    return Formula::quant(q->q, q->var, std::move(body));
  }
};

}  // namespace detail

/// Structural Skolemization of a sequent: strong quantifier occurrences are
/// removed and their variables replaced by fresh function symbols applied to
/// the dominating weakly quantified variables.
inline std::pair<Sequent, SkolemMap> skolemize(const Sequent& s, const EquationalTheory& E) {
  SkolemMap map;
  detail::Skolemizer sk{E, &map};
  Sequent out;
  std::vector<Term> weak;
  std::vector<std::size_t> path;
  for (std::size_t i = 0; i < s.antecedent.size(); ++i)
    out.antecedent.push_back(sk.walk(s.antecedent[i], false, weak, Side::Ante, i, path));
  for (std::size_t i = 0; i < s.succedent.size(); ++i)
    out.succedent.push_back(sk.walk(s.succedent[i], true, weak, Side::Succ, i, path));
  return {std::move(out), std::move(map)};
}

inline EquationalTheory extend_with_skolem(const EquationalTheory& E, const SkolemMap& m) {
  EquationalTheory out = E;
  for (const auto& e : m.entries) out.declare_uninterpreted(e.symbol, e.arity);
  return out;
}

// ---- Skolemization of ground proofs ----

namespace detail {

// Finds the term aligned with variable y: first position where `shape` holds
// Var(y) determines the corresponding subterm of `image`.
inline std::optional<Term> aligned_term(const Formula& shape, const Formula& image,
                                        const std::string& y);

inline std::optional<Term> aligned_term(const Term& shape, const Term& image,
                                        const std::string& y) {
  if (const auto* v = shape.as_var()) {
    if (v->kind == VarKind::Ordinary && v->name == y) return image;
    return std::nullopt;
  }
  if (const auto* s = shape.as_succ()) {
    if (const auto* t = image.as_succ()) return aligned_term(s->arg, t->arg, y);
    if (const auto* m = image.as_num()) {
      if (m->value == 0) return std::nullopt;
      return aligned_term(s->arg, Term::numeral(m->value - 1), y);
    }
    return std::nullopt;
  }
  if (const auto* f = shape.as_fn()) {
    const auto* g = image.as_fn();
    if (!g || f->args.size() != g->args.size()) return std::nullopt;
    for (std::size_t i = 0; i < f->args.size(); ++i)
      if (auto t = aligned_term(f->args[i], g->args[i], y)) return t;
  }
  return std::nullopt;
}

inline std::optional<Term> aligned_term(const Formula& shape, const Formula& image,
                                        const std::string& y) {
  if (const auto* e = shape.as_eq()) {
    const auto* f = image.as_eq();
    if (!f) return std::nullopt;
    if (auto t = aligned_term(e->lhs, f->lhs, y)) return t;
    return aligned_term(e->rhs, f->rhs, y);
  }
  if (const auto* p = shape.as_pred()) {
    const auto* q = image.as_pred();
    if (!q || p->args.size() != q->args.size()) return std::nullopt;
    for (std::size_t i = 0; i < p->args.size(); ++i)
      if (auto t = aligned_term(p->args[i], q->args[i], y)) return t;
    return std::nullopt;
  }
  if (const auto* n = shape.as_neg()) {
    const auto* m = image.as_neg();
    return m ? aligned_term(n->body, m->body, y) : std::nullopt;
  }
  if (const auto* b = shape.as_bin()) {
    const auto* c = image.as_bin();
    if (!c) return std::nullopt;
    if (auto t = aligned_term(b->lhs, c->lhs, y)) return t;
    return aligned_term(b->rhs, c->rhs, y);
  }
  const auto* qa = shape.as_quant();
  const auto* qb = image.as_quant();
  if (!qb) return std::nullopt;
  if (qa->var == y) return std::nullopt;  // shadowed
  return aligned_term(qa->body, qb->body, y);
}

struct ProofSkolemizer {
  using Images =
      std::pair<std::vector<std::optional<Formula>>, std::vector<std::optional<Formula>>>;

  static std::optional<Formula>& slot(Images& im, Side side, std::size_t i) {
    return side == Side::Ante ? im.first[i] : im.second[i];
  }

  Proof rec(const Proof& p, const Images& images) {
    const RuleData& d = p->data();
    Sequent concl = p->conclusion();
    for (std::size_t i = 0; i < images.first.size(); ++i)
      if (images.first[i]) concl.antecedent[i] = *images.first[i];
    for (std::size_t i = 0; i < images.second.size(); ++i)
      if (images.second[i]) concl.succedent[i] = *images.second[i];

    if (p->premises().empty()) {
      if (p->tag() == RuleTag::LabeledLeaf) throw NotGround("labeled leaf");
      if (!(concl == p->conclusion()))
        throw InternalError("skolemization reached an axiom with a changed formula");
      return p;
    }
    if (p->tag() == RuleTag::Ind) throw InternalError("skolemize_proof on an induction proof");

    auto maps = premise_occurrence_maps(p);
    auto images_on = [&](Side s) -> const std::vector<std::optional<Formula>>& {
      return s == Side::Ante ? images.first : images.second;
    };
    // premise occurrences inherit the image of the conclusion occurrence
    // they descend to; principal occurrences are refined below
    std::vector<Images> pulled;
    for (std::size_t k = 0; k < p->premises().size(); ++k) {
      const Sequent& ps = p->premises()[k]->conclusion();
      Images out{std::vector<std::optional<Formula>>(ps.antecedent.size()),
                 std::vector<std::optional<Formula>>(ps.succedent.size())};
      auto fill = [&](Side side) {
        const auto& slots = side == Side::Ante ? maps[k].ante : maps[k].succ;
        for (std::size_t i = 0; i < slots.size(); ++i) {
          if (!slots[i] || slots[i]->index == SIZE_MAX) continue;
          const auto& src = images_on(slots[i]->side);
          if (slots[i]->index < src.size() && src[slots[i]->index])
            slot(out, side, i) = src[slots[i]->index];
        }
      };
      fill(Side::Ante);
      fill(Side::Succ);
      pulled.push_back(std::move(out));
    }

    // override the occurrences that descend to the principal with the
    // structurally matching piece of the principal's image
    auto assign_pieces = [&](Side pr_side, std::vector<std::tuple<std::size_t, Side, Formula>> pieces) {
      // pieces are consumed in order over the premise occurrences that map
      // to the principal position
      for (std::size_t k = 0; k < p->premises().size(); ++k) {
        for (Side side : {Side::Ante, Side::Succ}) {
          const auto& slots = side == Side::Ante ? maps[k].ante : maps[k].succ;
          for (std::size_t i = 0; i < slots.size(); ++i) {
            if (!slots[i] || slots[i]->side != pr_side || slots[i]->index != *d.pos) continue;
            for (auto it = pieces.begin(); it != pieces.end(); ++it) {
              if (std::get<0>(*it) == k && std::get<1>(*it) == side) {
                slot(pulled[k], side, i) = std::get<2>(*it);
                pieces.erase(it);
                break;
              }
            }
          }
        }
      }
    };

    switch (p->tag()) {
      case RuleTag::AllR:
      case RuleTag::ExL: {
        Side pr_side = p->tag() == RuleTag::AllR ? Side::Succ : Side::Ante;
        if (d.pos && images_on(pr_side)[*d.pos]) {
          // strong inference on a skolemized ancestor: drop it
          const Formula& image = *images_on(pr_side)[*d.pos];
          const auto* q = cedent(p->conclusion(), pr_side)[*d.pos].as_quant();
          Formula old_inst = substitute(q->body, {{q->var, Term::var(*d.eigen)}});
          auto sk = aligned_term(old_inst, image, *d.eigen);
          // the premise's instance occurrence carries the full image
          const auto& slots = pr_side == Side::Ante ? maps[0].ante : maps[0].succ;
          for (std::size_t i = 0; i < slots.size(); ++i)
            if (slots[i] && slots[i]->side == pr_side && slots[i]->index == *d.pos)
              slot(pulled[0], pr_side, i) = image;
          Proof premise = p->premises()[0];
          if (sk) premise = apply_substitution_proof({{*d.eigen, *sk}}, premise);
          return rec(premise, pulled[0]);
        }
        break;
      }
      case RuleTag::AllL:
      case RuleTag::ExR: {
        Side pr_side = p->tag() == RuleTag::AllL ? Side::Ante : Side::Succ;
        if (d.pos && images_on(pr_side)[*d.pos]) {
          const Formula& image = *images_on(pr_side)[*d.pos];
          const auto* qi = image.as_quant();
          if (!qi) throw InternalError("weak quantifier image lost its quantifier");
          assign_pieces(pr_side, {{0, pr_side, substitute(qi->body, {{qi->var, *d.witness}})}});
        }
        break;
      }
      case RuleTag::AndL:
      case RuleTag::OrR: {
        Side pr_side = p->tag() == RuleTag::AndL ? Side::Ante : Side::Succ;
        if (d.pos && images_on(pr_side)[*d.pos]) {
          const auto* bi = images_on(pr_side)[*d.pos]->as_bin();
          if (!bi) throw InternalError("binary image lost its connective");
          assign_pieces(pr_side, {{0, pr_side, bi->lhs}, {0, pr_side, bi->rhs}});
        }
        break;
      }
      case RuleTag::ImpR: {
        if (d.pos && images_on(Side::Succ)[*d.pos]) {
          const auto* bi = images_on(Side::Succ)[*d.pos]->as_bin();
          if (!bi) throw InternalError("implication image lost its connective");
          assign_pieces(Side::Succ, {{0, Side::Ante, bi->lhs}, {0, Side::Succ, bi->rhs}});
        }
        break;
      }
      case RuleTag::NegL:
      case RuleTag::NegR: {
        Side pr_side = p->tag() == RuleTag::NegL ? Side::Ante : Side::Succ;
        Side body_side = pr_side == Side::Ante ? Side::Succ : Side::Ante;
        if (d.pos && images_on(pr_side)[*d.pos]) {
          const auto* ni = images_on(pr_side)[*d.pos]->as_neg();
          if (!ni) throw InternalError("negation image lost its connective");
          assign_pieces(pr_side, {{0, body_side, ni->body}});
        }
        break;
      }
      case RuleTag::AndR: {
        if (d.pos && images_on(Side::Succ)[*d.pos]) {
          const auto* bi = images_on(Side::Succ)[*d.pos]->as_bin();
          if (!bi) throw InternalError("conjunction image lost its connective");
          assign_pieces(Side::Succ, {{0, Side::Succ, bi->lhs}, {1, Side::Succ, bi->rhs}});
        }
        break;
      }
      case RuleTag::OrL: {
        if (d.pos && images_on(Side::Ante)[*d.pos]) {
          const auto* bi = images_on(Side::Ante)[*d.pos]->as_bin();
          if (!bi) throw InternalError("disjunction image lost its connective");
          assign_pieces(Side::Ante, {{0, Side::Ante, bi->lhs}, {1, Side::Ante, bi->rhs}});
        }
        break;
      }
      case RuleTag::ImpL: {
        if (d.pos && images_on(Side::Ante)[*d.pos]) {
          const auto* bi = images_on(Side::Ante)[*d.pos]->as_bin();
          if (!bi) throw InternalError("implication image lost its connective");
          assign_pieces(Side::Ante, {{0, Side::Succ, bi->lhs}, {1, Side::Ante, bi->rhs}});
        }
        break;
      }
      case RuleTag::ERule: {
        const EqStep& e = *d.eq;
        if (images_on(e.side)[e.index])
          throw InternalError("equational inference on a skolemized end-sequent ancestor");
        break;
      }
      default:
        break;  // weakening, contraction, cut: plain image inheritance
    }

    std::vector<Proof> premises;
    for (std::size_t k = 0; k < p->premises().size(); ++k)
      premises.push_back(rec(p->premises()[k], pulled[k]));
    return make_proof(p->tag(), std::move(concl), d, std::move(premises));
  }
};

}  // namespace detail

/// Propagates an end-sequent Skolemization through a ground proof: strong
/// inferences on end-sequent ancestors are dropped and their eigenvariables
/// replaced by the Skolem terms; everything on cut ancestors stays.
inline Proof skolemize_proof(const Proof& p, const SkolemMap& m, const EquationalTheory& E) {
  auto [target, m2] = skolemize(p->conclusion(), E);
  if (m2.entries.size() != m.entries.size())
    throw InternalError("skolem map does not match the proof's end-sequent");
  detail::ProofSkolemizer sk;
  detail::ProofSkolemizer::Images images{
      std::vector<std::optional<Formula>>(p->conclusion().antecedent.size()),
      std::vector<std::optional<Formula>>(p->conclusion().succedent.size())};
  for (std::size_t i = 0; i < target.antecedent.size(); ++i)
    if (!(target.antecedent[i] == p->conclusion().antecedent[i]))
      images.first[i] = target.antecedent[i];
  for (std::size_t i = 0; i < target.succedent.size(); ++i)
    if (!(target.succedent[i] == p->conclusion().succedent[i]))
      images.second[i] = target.succedent[i];
  return sk.rec(p, images);
}

// ---- cut-elimination (Gentzen, via the mix rule) ----

namespace detail {

struct CutEliminator {
  const EquationalTheory& E;
  std::size_t fuel;
  std::size_t used = 0;
  bool allow_labels = false;

  void burn() {
    if (++used > fuel) throw FuelExhausted("cut-elimination");
  }

  static std::size_t grade(const Formula& f) {
    if (f.is_atomic()) return 0;
    if (const auto* n = f.as_neg()) return 1 + grade(n->body);
    if (const auto* b = f.as_bin()) return 1 + grade(b->lhs) + grade(b->rhs);
    return 1 + grade(f.as_quant()->body);
  }

  Sequent target_of(const Proof& L, const Proof& R, const Formula& A) const {
    Sequent t;
    t.antecedent = L->conclusion().antecedent;
    for (const auto& f : R->conclusion().antecedent)
      if (!(f == A)) t.antecedent.push_back(f);
    for (const auto& f : L->conclusion().succedent)
      if (!(f == A)) t.succedent.push_back(f);
    for (const auto& f : R->conclusion().succedent) t.succedent.push_back(f);
    return t;
  }

  // weaken anything missing, contract anything duplicated
  Proof fit(Proof p, const Sequent& target) {
    for (Side side : {Side::Ante, Side::Succ}) {
      const auto& want = cedent(target, side);
      for (const auto& f : want) {
        while (ms_count(cedent(p->conclusion(), side), f) < ms_count(want, f))
          p = side == Side::Ante ? build::weak_l(p, f) : build::weak_r(p, f);
      }
    }
    return build::contract_to(std::move(p), target);
  }

  static Proof ensure_present(Proof p, Side side, const Formula& f) {
    if (ms_find(cedent(p->conclusion(), side), f)) return p;
    return side == Side::Ante ? build::weak_l(p, f) : build::weak_r(p, f);
  }

  // conclusion-side principal occurrence of the last inference, when it is a
  // succedent (resp. antecedent) principal
  static std::optional<Formula> principal(const Proof& p, Side side) {
    const RuleData& d = p->data();
    switch (p->tag()) {
      case RuleTag::WeakR:
      case RuleTag::ContrR:
      case RuleTag::AndR:
      case RuleTag::OrR:
      case RuleTag::ImpR:
      case RuleTag::NegR:
      case RuleTag::AllR:
      case RuleTag::ExR:
        if (side == Side::Succ && d.pos) return p->conclusion().succedent[*d.pos];
        return std::nullopt;
      case RuleTag::WeakL:
      case RuleTag::ContrL:
      case RuleTag::AndL:
      case RuleTag::OrL:
      case RuleTag::ImpL:
      case RuleTag::NegL:
      case RuleTag::AllL:
      case RuleTag::ExL:
        if (side == Side::Ante && d.pos) return p->conclusion().antecedent[*d.pos];
        return std::nullopt;
      case RuleTag::ERule: {
        const EqStep& e = *d.eq;
        if (e.side == side) return cedent(p->conclusion(), side)[e.index];
        return std::nullopt;
      }
      default:
        return std::nullopt;
    }
  }

  // Rebuilds p's last inference over replacement premises, re-weakening any
  // consumed side formulas the mix may have eaten, then fits `target`.
  std::optional<Proof> reapply(const Proof& p, std::vector<Proof> np, const Sequent& target) {
    const RuleData& d = p->data();
    const Sequent& c = p->conclusion();
    Proof out;
    switch (p->tag()) {
      case RuleTag::WeakL:
        out = build::weak_l(np[0], c.antecedent[*d.pos]);
        break;
      case RuleTag::WeakR:
        out = build::weak_r(np[0], c.succedent[*d.pos]);
        break;
      case RuleTag::ContrL: {
        const Formula& f = c.antecedent[*d.pos];
        while (ms_count(np[0]->conclusion().antecedent, f) < 2)
          np[0] = build::weak_l(np[0], f);
        out = build::contr_l(np[0], f);
        break;
      }
      case RuleTag::ContrR: {
        const Formula& f = c.succedent[*d.pos];
        while (ms_count(np[0]->conclusion().succedent, f) < 2)
          np[0] = build::weak_r(np[0], f);
        out = build::contr_r(np[0], f);
        break;
      }
      case RuleTag::AndL: {
        const auto* b = c.antecedent[*d.pos].as_bin();
        np[0] = ensure_present(np[0], Side::Ante, b->lhs);
        np[0] = ensure_present(np[0], Side::Ante, b->rhs);
        out = build::and_l(np[0], b->lhs, b->rhs);
        break;
      }
      case RuleTag::OrR: {
        const auto* b = c.succedent[*d.pos].as_bin();
        np[0] = ensure_present(np[0], Side::Succ, b->lhs);
        np[0] = ensure_present(np[0], Side::Succ, b->rhs);
        out = build::or_r(np[0], b->lhs, b->rhs);
        break;
      }
      case RuleTag::ImpR: {
        const auto* b = c.succedent[*d.pos].as_bin();
        np[0] = ensure_present(np[0], Side::Ante, b->lhs);
        np[0] = ensure_present(np[0], Side::Succ, b->rhs);
        out = build::imp_r(np[0], b->lhs, b->rhs);
        break;
      }
      case RuleTag::NegL: {
        const auto* n = c.antecedent[*d.pos].as_neg();
        np[0] = ensure_present(np[0], Side::Succ, n->body);
        out = build::neg_l(np[0], n->body);
        break;
      }
      case RuleTag::NegR: {
        const auto* n = c.succedent[*d.pos].as_neg();
        np[0] = ensure_present(np[0], Side::Ante, n->body);
        out = build::neg_r(np[0], n->body);
        break;
      }
      case RuleTag::AndR: {
        const auto* b = c.succedent[*d.pos].as_bin();
        np[0] = ensure_present(np[0], Side::Succ, b->lhs);
        np[1] = ensure_present(np[1], Side::Succ, b->rhs);
        out = build::and_r(np[0], np[1], b->lhs, b->rhs);
        break;
      }
      case RuleTag::OrL: {
        const auto* b = c.antecedent[*d.pos].as_bin();
        np[0] = ensure_present(np[0], Side::Ante, b->lhs);
        np[1] = ensure_present(np[1], Side::Ante, b->rhs);
        out = build::or_l(np[0], np[1], b->lhs, b->rhs);
        break;
      }
      case RuleTag::ImpL: {
        const auto* b = c.antecedent[*d.pos].as_bin();
        np[0] = ensure_present(np[0], Side::Succ, b->lhs);
        np[1] = ensure_present(np[1], Side::Ante, b->rhs);
        out = build::imp_l(np[0], np[1], b->lhs, b->rhs);
        break;
      }
      case RuleTag::AllL: {
        const Formula& q = c.antecedent[*d.pos];
        Formula inst = substitute(q.as_quant()->body, {{q.as_quant()->var, *d.witness}});
        np[0] = ensure_present(np[0], Side::Ante, inst);
        out = build::all_l(np[0], q, *d.witness);
        break;
      }
      case RuleTag::ExR: {
        const Formula& q = c.succedent[*d.pos];
        Formula inst = substitute(q.as_quant()->body, {{q.as_quant()->var, *d.witness}});
        np[0] = ensure_present(np[0], Side::Succ, inst);
        out = build::ex_r(np[0], q, *d.witness);
        break;
      }
      case RuleTag::AllR: {
        const Formula& q = c.succedent[*d.pos];
        out = build::all_r(np[0], q, *d.eigen);
        break;
      }
      case RuleTag::ExL: {
        const Formula& q = c.antecedent[*d.pos];
        out = build::ex_l(np[0], q, *d.eigen);
        break;
      }
      case RuleTag::Cut: {
        const Formula& a = *d.cut_formula;
        np[0] = ensure_present(np[0], Side::Succ, a);
        np[1] = ensure_present(np[1], Side::Ante, a);
        out = build::cut(np[0], np[1], a);
        break;
      }
      case RuleTag::ERule: {
        const EqStep& e = *d.eq;
        Formula concl_f = cedent(c, e.side)[e.index];
        Formula prem_f = cedent(p->premises()[0]->conclusion(), e.side)[e.index];
        np[0] = ensure_present(np[0], e.side, prem_f);
        auto idx = ms_find(cedent(np[0]->conclusion(), e.side), prem_f);
        Sequent nc = np[0]->conclusion();
        cedent(nc, e.side)[*idx] = concl_f;
        EqStep ne = e;
        ne.index = *idx;
        RuleData nd;
        nd.eq = ne;
        out = make_proof(RuleTag::ERule, std::move(nc), std::move(nd), {np[0]});
        break;
      }
      default:
        return std::nullopt;
    }
    return fit(std::move(out), target);
  }

  // Renames the eigenvariable of a strong-quantifier node away from `avoid`.
  Proof rename_eigen(const Proof& p, const std::set<std::string>& avoid) {
    std::set<std::string> names = avoid;
    collect_names(p, names);
    std::string fresh = fresh_name("v", names);
    RuleData d = p->data();
    detail::ProofSubst s;
    s.ord[*d.eigen] = Term::var(fresh);
    d.eigen = fresh;
    return make_proof(p->tag(), p->conclusion(), std::move(d),
                      {detail::apply_raw(p->premises()[0], s)});
  }

  std::optional<Proof> mix(Proof L, Proof R, const Formula& A) {
    burn();
    const Sequent target = target_of(L, R, A);
    if (!ms_find(L->conclusion().succedent, A)) return fit(L, target);
    if (!ms_find(R->conclusion().antecedent, A)) return fit(R, target);
    if (L->tag() == RuleTag::Axiom) return fit(R, target);
    if (R->tag() == RuleTag::Axiom) return fit(L, target);
    if (L->tag() == RuleTag::LabeledLeaf || R->tag() == RuleTag::LabeledLeaf)
      return std::nullopt;  // anchored; kept by the caller

    auto lp = principal(L, Side::Succ);
    bool l_principal = lp && *lp == A;
    if (l_principal) {
      if (L->tag() == RuleTag::WeakR || L->tag() == RuleTag::ContrR)
        return mix(L->premises()[0], R, A);
      if (L->tag() == RuleTag::ERule)
        throw InternalError("cut formula rewritten by an equational inference");
    } else {
      // rank reduction on the left
      return permute(L, R, A, target, /*into_left=*/true);
    }

    auto rp = principal(R, Side::Ante);
    bool r_principal = rp && *rp == A;
    if (r_principal) {
      if (R->tag() == RuleTag::WeakL || R->tag() == RuleTag::ContrL)
        return mix(L, R->premises()[0], A);
      if (R->tag() == RuleTag::ERule)
        throw InternalError("cut formula rewritten by an equational inference");
    } else {
      return permute(L, R, A, target, /*into_left=*/false);
    }

    // both principal: grade reduction
    auto purge_l = [&](const Proof& sub) -> std::optional<Proof> {
      Sequent t;
      t.antecedent = sub->conclusion().antecedent;
      for (const auto& f : R->conclusion().antecedent)
        if (!(f == A)) t.antecedent.push_back(f);
      for (const auto& f : sub->conclusion().succedent)
        if (!(f == A)) t.succedent.push_back(f);
      for (const auto& f : R->conclusion().succedent) t.succedent.push_back(f);
      if (ms_find(sub->conclusion().succedent, A)) return mix(sub, R, A);
      return fit(sub, t);
    };
    auto purge_r = [&](const Proof& sub) -> std::optional<Proof> {
      Sequent t;
      t.antecedent = L->conclusion().antecedent;
      for (const auto& f : sub->conclusion().antecedent)
        if (!(f == A)) t.antecedent.push_back(f);
      for (const auto& f : L->conclusion().succedent)
        if (!(f == A)) t.succedent.push_back(f);
      for (const auto& f : sub->conclusion().succedent) t.succedent.push_back(f);
      if (ms_find(sub->conclusion().antecedent, A)) return mix(L, sub, A);
      return fit(sub, t);
    };

    if (const auto* n = A.as_neg()) {
      auto hl = purge_l(L->premises()[0]);  // ..., B |- ...
      auto hr = purge_r(R->premises()[0]);  // ... |- ..., B
      if (!hl || !hr) return std::nullopt;
      auto res = mix(*hr, *hl, n->body);
      return res ? std::optional<Proof>(fit(*res, target)) : std::nullopt;
    }
    if (const auto* b = A.as_bin()) {
      switch (b->conn) {
        case Conn::And: {
          auto h1 = purge_l(L->premises()[0]);
          auto h2 = purge_l(L->premises()[1]);
          auto hr = purge_r(R->premises()[0]);
          if (!h1 || !h2 || !hr) return std::nullopt;
          Proof hr2 = ensure_present(*hr, Side::Ante, b->lhs);
          auto x = mix(*h1, hr2, b->lhs);
          if (!x) return std::nullopt;
          Proof x2 = ensure_present(*x, Side::Ante, b->rhs);
          auto y = mix(*h2, x2, b->rhs);
          return y ? std::optional<Proof>(fit(*y, target)) : std::nullopt;
        }
        case Conn::Or: {
          auto hl = purge_l(L->premises()[0]);
          auto h1 = purge_r(R->premises()[0]);
          auto h2 = purge_r(R->premises()[1]);
          if (!hl || !h1 || !h2) return std::nullopt;
          Proof hl1 = ensure_present(*hl, Side::Succ, b->lhs);
          auto x = mix(hl1, *h1, b->lhs);
          if (!x) return std::nullopt;
          Proof x2 = ensure_present(*x, Side::Succ, b->rhs);
          auto y = mix(x2, *h2, b->rhs);
          return y ? std::optional<Proof>(fit(*y, target)) : std::nullopt;
        }
        case Conn::Implies: {
          auto hl = purge_l(L->premises()[0]);  // Γ,B ⊢ ...,C
          auto h1 = purge_r(R->premises()[0]);  // ... ⊢ ...,B
          auto h2 = purge_r(R->premises()[1]);  // ...,C ⊢ ...
          if (!hl || !h1 || !h2) return std::nullopt;
          Proof hl1 = ensure_present(*hl, Side::Ante, b->lhs);
          auto x = mix(*h1, hl1, b->lhs);  // ... ⊢ ...,C
          if (!x) return std::nullopt;
          Proof x2 = ensure_present(*x, Side::Succ, b->rhs);
          auto y = mix(x2, *h2, b->rhs);
          return y ? std::optional<Proof>(fit(*y, target)) : std::nullopt;
        }
      }
    }
    if (const auto* q = A.as_quant()) {
      if (q->q == Quantifier::Forall) {
        const Term& t = *R->data().witness;
        Proof lt = apply_substitution_proof({{*L->data().eigen, t}}, L->premises()[0]);
        Formula inst = substitute(q->body, {{q->var, t}});
        auto hl = purge_l(lt);
        auto hr = purge_r(R->premises()[0]);
        if (!hl || !hr) return std::nullopt;
        Proof hl1 = ensure_present(*hl, Side::Succ, inst);
        Proof hr1 = ensure_present(*hr, Side::Ante, inst);
        auto res = mix(hl1, hr1, inst);
        return res ? std::optional<Proof>(fit(*res, target)) : std::nullopt;
      }
      const Term& t = *L->data().witness;
      Proof rt = apply_substitution_proof({{*R->data().eigen, t}}, R->premises()[0]);
      Formula inst = substitute(q->body, {{q->var, t}});
      auto hl = purge_l(L->premises()[0]);
      auto hr = purge_r(rt);
      if (!hl || !hr) return std::nullopt;
      Proof hl1 = ensure_present(*hl, Side::Succ, inst);
      Proof hr1 = ensure_present(*hr, Side::Ante, inst);
      auto res = mix(hl1, hr1, inst);
      return res ? std::optional<Proof>(fit(*res, target)) : std::nullopt;
    }
    throw InternalError("atomic cut formula principal on both sides");
  }

  std::optional<Proof> permute(const Proof& node, const Proof& other, const Formula& A,
                               const Sequent& target, bool into_left) {
    Proof n = node;
    if (n->tag() == RuleTag::AllR || n->tag() == RuleTag::ExL) {
      std::set<std::string> avoid;
      collect_names(other, avoid);
      collect_names(target, avoid);
      if (avoid.count(*n->data().eigen)) n = rename_eigen(n, avoid);
    }
    std::vector<Proof> np;
    for (const auto& q : n->premises()) {
      bool carries = into_left ? ms_find(q->conclusion().succedent, A).has_value()
                               : ms_find(q->conclusion().antecedent, A).has_value();
      if (!carries) {
        np.push_back(q);
        continue;
      }
      auto mixed = into_left ? mix(q, other, A) : mix(other, q, A);
      if (!mixed) return std::nullopt;
      np.push_back(*mixed);
    }
    return reapply(n, std::move(np), target);
  }
};

}  // namespace detail

/// Full reductive cut-elimination on a ground LK(+E) proof. Output has the
/// same end-sequent (as a multiset) and no Cut nodes at all.
inline Proof cut_eliminate(const Proof& p, const EquationalTheory& E,
                           std::size_t fuel = 10000000) {
  if (count_rule(p, RuleTag::Ind) > 0)
    throw Error("cut_eliminate: input contains an induction inference");
  if (count_rule(p, RuleTag::LabeledLeaf) > 0)
    throw NotGround("cut_eliminate requires a ground proof");
  detail::CutEliminator ce{E, fuel};
  struct Rec {
    detail::CutEliminator& ce;
    Proof operator()(const Proof& node) {
      std::vector<Proof> np;
      np.reserve(node->premises().size());
      for (const auto& q : node->premises()) np.push_back((*this)(q));
      if (node->tag() != RuleTag::Cut)
        return make_proof(node->tag(), node->conclusion(), node->data(), std::move(np));
      const Formula& a = *node->data().cut_formula;
      auto mixed = ce.mix(np[0], np[1], a);
      if (!mixed) throw InternalError("irreducible cut in a ground proof");
      // mix removes every occurrence of the cut formula; re-weaken the
      // context copies the cut conclusion keeps
      Proof out = *mixed;
      std::size_t extra_l = ms_count(np[1]->conclusion().antecedent, a) - 1;
      std::size_t extra_r = ms_count(np[0]->conclusion().succedent, a) - 1;
      for (std::size_t i = 0; i < extra_l; ++i) out = build::weak_l(out, a);
      for (std::size_t i = 0; i < extra_r; ++i) out = build::weak_r(out, a);
      if (!sequent_multiset_equal(out->conclusion(), node->conclusion()))
        throw InternalError("cut-elimination changed the sequent");
      return out;
    }
  };
  Proof out = Rec{ce}(p);
  if (count_rule(out, RuleTag::Cut) != 0)
    throw InternalError("cut remains after elimination");
  return out;
}

/// Cut-elimination that tolerates labeled leaves: cuts whose reduction runs
/// into a proof call are kept.
inline Proof cut_eliminate_partial(const Proof& p, const EquationalTheory& E,
                                   std::size_t fuel = 10000000) {
  detail::CutEliminator ce{E, fuel, 0, true};
  struct Rec {
    detail::CutEliminator& ce;
    Proof operator()(const Proof& node) {
      std::vector<Proof> np;
      np.reserve(node->premises().size());
      for (const auto& q : node->premises()) np.push_back((*this)(q));
      if (node->tag() != RuleTag::Cut)
        return make_proof(node->tag(), node->conclusion(), node->data(), std::move(np));
      const Formula& a = *node->data().cut_formula;
      auto mixed = ce.mix(np[0], np[1], a);
      if (!mixed)
        return make_proof(RuleTag::Cut, node->conclusion(), node->data(), std::move(np));
      Proof out = *mixed;
      std::size_t extra_l = ms_count(np[1]->conclusion().antecedent, a) - 1;
      std::size_t extra_r = ms_count(np[0]->conclusion().succedent, a) - 1;
      for (std::size_t i = 0; i < extra_l; ++i) out = build::weak_l(out, a);
      for (std::size_t i = 0; i < extra_r; ++i) out = build::weak_r(out, a);
      if (!sequent_multiset_equal(out->conclusion(), node->conclusion()))
        throw InternalError("cut-elimination changed the sequent");
      return out;
    }
  };
  return Rec{ce}(p);
}

// ---- Herbrand extraction ----

struct HerbrandReport {
  struct Entry {
    Side side = Side::Ante;
    std::size_t index = 0;
    Formula formula;                       // the quantified end-sequent formula
    std::vector<std::string> prefix_vars;  // its weak quantifier prefix
    TermTupleSet instances;                // witness tuples, normalized
    TermTupleSet instances_raw;            // as recorded in the proof
    Entry() : formula(Formula::eq(Term::zero(), Term::zero())) {}
  };
  std::vector<Entry> entries;  // one per quantified end-sequent occurrence
  Sequent herbrand_sequent;
};

namespace detail {

inline void assert_weak_only(const Formula& f, bool positive) {
  if (f.is_atomic()) return;
  if (const auto* n = f.as_neg()) return assert_weak_only(n->body, !positive);
  if (const auto* b = f.as_bin()) {
    assert_weak_only(b->lhs, b->conn == Conn::Implies ? !positive : positive);
    assert_weak_only(b->rhs, positive);
    return;
  }
  const auto* q = f.as_quant();
  bool strong =
      (positive && q->q == Quantifier::Forall) || (!positive && q->q == Quantifier::Exists);
  if (strong) throw StrongQuantifierPresent("end-sequent has a strong quantifier");
  assert_weak_only(q->body, positive);
}

// weak prefix: maximal chain of same-polarity weak quantifiers; the body
// below the prefix must be quantifier-free for Herbrand extraction
inline std::vector<std::string> weak_prefix(const Formula& f, Side side) {
  std::vector<std::string> vars;
  const Formula* cur = &f;
  Quantifier want = side == Side::Ante ? Quantifier::Forall : Quantifier::Exists;
  while (const auto* q = cur->as_quant()) {
    if (q->q != want) break;
    vars.push_back(q->var);
    cur = &q->body;
  }
  if (!is_quantifier_free(*cur))
    throw Error("herbrand extraction supports prenex weak prefixes only");
  return vars;
}

struct HerbrandState {
  std::size_t entry;           // index into report.entries
  std::vector<Term> args;      // witnesses collected so far
};

struct HerbrandWalker {
  const EquationalTheory& E;
  HerbrandReport* report;

  using Labels =
      std::pair<std::vector<std::optional<HerbrandState>>, std::vector<std::optional<HerbrandState>>>;

  void rec(const Proof& p, const Labels& labels) {
    if (p->premises().empty()) return;
    auto maps = premise_occurrence_maps(p);
    const RuleData& d = p->data();
    std::vector<Labels> pulled;
    for (std::size_t k = 0; k < p->premises().size(); ++k) {
      const Sequent& ps = p->premises()[k]->conclusion();
      Labels out{std::vector<std::optional<HerbrandState>>(ps.antecedent.size()),
                 std::vector<std::optional<HerbrandState>>(ps.succedent.size())};
      auto fill = [&](Side side) {
        const auto& slots = side == Side::Ante ? maps[k].ante : maps[k].succ;
        for (std::size_t i = 0; i < slots.size(); ++i) {
          if (!slots[i] || slots[i]->index == SIZE_MAX) continue;
          const auto& src = slots[i]->side == Side::Ante ? labels.first : labels.second;
          auto& dst = side == Side::Ante ? out.first : out.second;
          if (slots[i]->index < src.size() && src[slots[i]->index])
            dst[i] = src[slots[i]->index];
        }
      };
      fill(Side::Ante);
      fill(Side::Succ);
      pulled.push_back(std::move(out));
    }

    if (p->tag() == RuleTag::AllL || p->tag() == RuleTag::ExR) {
      Side side = p->tag() == RuleTag::AllL ? Side::Ante : Side::Succ;
      const auto& src = side == Side::Ante ? labels.first : labels.second;
      if (d.pos && src[*d.pos]) {
        HerbrandState st = *src[*d.pos];
        auto& entry = report->entries[st.entry];
        if (st.args.size() < entry.prefix_vars.size()) {
          st.args.push_back(*d.witness);
          if (st.args.size() == entry.prefix_vars.size()) {
            entry.instances_raw.insert(st.args);
            std::vector<Term> norm;
            norm.reserve(st.args.size());
            for (const auto& t : st.args) norm.push_back(evaluate(t, E));
            entry.instances.insert(std::move(norm));
          }
          // the instance occurrence in the premise carries the extended state
          const auto& slots = side == Side::Ante ? maps[0].ante : maps[0].succ;
          for (std::size_t i = 0; i < slots.size(); ++i)
            if (slots[i] && slots[i]->side == side && slots[i]->index == *d.pos)
              (side == Side::Ante ? pulled[0].first : pulled[0].second)[i] = st;
        }
      }
    }

    for (std::size_t k = 0; k < p->premises().size(); ++k) rec(p->premises()[k], pulled[k]);
  }
};

}  // namespace detail

/// Collects, per weakly quantified end-sequent formula, the witness tuples of
/// the weak quantifier inferences that introduce it in a cut-free proof, and
/// builds the quantifier-free Herbrand sequent.
inline HerbrandReport herbrand_extract(const Proof& p, const EquationalTheory& E) {
  if (count_rule(p, RuleTag::Cut) > 0) throw CutPresent("herbrand extraction needs a cut-free proof");
  if (count_rule(p, RuleTag::LabeledLeaf) > 0) throw NotGround("labeled leaf");
  const Sequent& es = p->conclusion();
  for (const auto& f : es.antecedent) detail::assert_weak_only(f, false);
  for (const auto& f : es.succedent) detail::assert_weak_only(f, true);

  HerbrandReport report;
  detail::HerbrandWalker::Labels labels{
      std::vector<std::optional<detail::HerbrandState>>(es.antecedent.size()),
      std::vector<std::optional<detail::HerbrandState>>(es.succedent.size())};
  auto add_entry = [&](Side side, std::size_t i, const Formula& f) {
    auto prefix = detail::weak_prefix(f, side);
    if (prefix.empty()) return;
    HerbrandReport::Entry e;
    e.side = side;
    e.index = i;
    e.formula = f;
    e.prefix_vars = std::move(prefix);
    report.entries.push_back(std::move(e));
    (side == Side::Ante ? labels.first : labels.second)[i] =
        detail::HerbrandState{report.entries.size() - 1, {}};
  };
  for (std::size_t i = 0; i < es.antecedent.size(); ++i) add_entry(Side::Ante, i, es.antecedent[i]);
  for (std::size_t i = 0; i < es.succedent.size(); ++i) add_entry(Side::Succ, i, es.succedent[i]);

  detail::HerbrandWalker walker{E, &report};
  walker.rec(p, labels);

  // assemble the quantifier-free sequent
  auto instance_body = [&](const HerbrandReport::Entry& e,
                           const std::vector<Term>& args) -> Formula {
    Formula cur = e.formula;
    for (std::size_t i = 0; i < e.prefix_vars.size(); ++i) {
      const auto* q = cur.as_quant();
      cur = substitute(q->body, {{q->var, args[i]}});
    }
    return cur;
  };
  auto fold = [&](const HerbrandReport::Entry& e, Conn conn) -> std::optional<Formula> {
    std::vector<Formula> bodies;
    for (const auto& tup : e.instances) bodies.push_back(instance_body(e, tup));
    if (bodies.empty()) return std::nullopt;
    Formula cur = bodies.back();
    for (std::size_t i = bodies.size() - 1; i-- > 0;) cur = Formula::bin(conn, bodies[i], cur);
    return cur;
  };
  Sequent hs;
  for (std::size_t i = 0; i < es.antecedent.size(); ++i) {
    auto it = std::find_if(report.entries.begin(), report.entries.end(), [&](const auto& e) {
      return e.side == Side::Ante && e.index == i;
    });
    if (it == report.entries.end()) {
      hs.antecedent.push_back(es.antecedent[i]);
    } else if (auto f = fold(*it, Conn::And)) {
      hs.antecedent.push_back(*f);
    }
  }
  for (std::size_t i = 0; i < es.succedent.size(); ++i) {
    auto it = std::find_if(report.entries.begin(), report.entries.end(), [&](const auto& e) {
      return e.side == Side::Succ && e.index == i;
    });
    if (it == report.entries.end()) {
      hs.succedent.push_back(es.succedent[i]);
    } else if (auto f = fold(*it, Conn::Or)) {
      hs.succedent.push_back(*f);
    }
  }
  report.herbrand_sequent = std::move(hs);
  return report;
}

// ---- validity modulo the equational theory ----

/// True iff the quantifier-free sequent is propositionally valid after
/// normalizing all terms and identifying syntactically equal atoms.
inline bool is_quasi_tautology(const Sequent& s, const EquationalTheory& E) {
  // normalize and collect distinct atoms
  std::vector<Formula> atoms;
  auto atom_index = [&](const Formula& a) -> std::size_t {
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (atoms[i] == a) return i;
    atoms.push_back(a);
    return atoms.size() - 1;
  };
  struct Prop {
    // -1 = atom index encoded separately
    int kind;  // 0 atom, 1 neg, 2 and, 3 or, 4 imp
    std::size_t atom = 0;
    std::size_t lhs = 0, rhs = 0;
  };
  std::vector<Prop> pool;
  std::function<std::size_t(const Formula&)> compile = [&](const Formula& f) -> std::size_t {
    if (f.is_atomic()) {
      Formula norm = evaluate(f, E);
      pool.push_back({0, atom_index(norm), 0, 0});
      return pool.size() - 1;
    }
    if (const auto* n = f.as_neg()) {
      std::size_t b = compile(n->body);
      pool.push_back({1, 0, b, 0});
      return pool.size() - 1;
    }
    const auto* b = f.as_bin();
    if (!b) throw Error("is_quasi_tautology requires a quantifier-free sequent");
    std::size_t l = compile(b->lhs);
    std::size_t r = compile(b->rhs);
    int kind = b->conn == Conn::And ? 2 : b->conn == Conn::Or ? 3 : 4;
    pool.push_back({kind, 0, l, r});
    return pool.size() - 1;
  };
  std::vector<std::size_t> ante, succ;
  for (const auto& f : s.antecedent) ante.push_back(compile(f));
  for (const auto& f : s.succedent) succ.push_back(compile(f));
  if (atoms.size() > 20) throw TooManyAtoms(atoms.size());

  std::function<bool(std::size_t, unsigned long)> val = [&](std::size_t i,
                                                            unsigned long row) -> bool {
    const Prop& p = pool[i];
    switch (p.kind) {
      case 0: return (row >> p.atom) & 1u;
      case 1: return !val(p.lhs, row);
      case 2: return val(p.lhs, row) && val(p.rhs, row);
      case 3: return val(p.lhs, row) || val(p.rhs, row);
      default: return !val(p.lhs, row) || val(p.rhs, row);
    }
  };
  unsigned long rows = 1ul << atoms.size();
  for (unsigned long row = 0; row < rows; ++row) {
    bool all_ante = true;
    for (auto i : ante)
      if (!val(i, row)) {
        all_ante = false;
        break;
      }
    if (!all_ante) continue;
    bool any_succ = false;
    for (auto i : succ)
      if (val(i, row)) {
        any_succ = true;
        break;
      }
    if (!any_succ) return false;
  }
  return true;
}

}  // namespace schemakit
