#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "schemakit/eval.hpp"
#include "schemakit/sequent.hpp"

namespace schemakit {

enum class RuleTag {
  Axiom,
  Cut,
  WeakL,
  WeakR,
  ContrL,
  ContrR,
  AndL,
  AndR,
  OrL,
  OrR,
  NegL,
  NegR,
  ImpL,
  ImpR,
  AllL,
  AllR,
  ExL,
  ExR,
  ERule,
  Ind,
  LabeledLeaf
};

inline const char* rule_name(RuleTag t) {
  switch (t) {
    case RuleTag::Axiom: return "Axiom";
    case RuleTag::Cut: return "Cut";
    case RuleTag::WeakL: return "WeakL";
    case RuleTag::WeakR: return "WeakR";
    case RuleTag::ContrL: return "ContrL";
    case RuleTag::ContrR: return "ContrR";
    case RuleTag::AndL: return "AndL";
    case RuleTag::AndR: return "AndR";
    case RuleTag::OrL: return "OrL";
    case RuleTag::OrR: return "OrR";
    case RuleTag::NegL: return "NegL";
    case RuleTag::NegR: return "NegR";
    case RuleTag::ImpL: return "ImpL";
    case RuleTag::ImpR: return "ImpR";
    case RuleTag::AllL: return "AllL";
    case RuleTag::AllR: return "AllR";
    case RuleTag::ExL: return "ExL";
    case RuleTag::ExR: return "ExR";
    case RuleTag::ERule: return "ERule";
    case RuleTag::Ind: return "Ind";
    case RuleTag::LabeledLeaf: return "Leaf";
  }
  return "?";
}

inline std::size_t rule_arity(RuleTag t) {
  switch (t) {
    case RuleTag::Axiom:
    case RuleTag::LabeledLeaf:
      return 0;
    case RuleTag::Cut:
    case RuleTag::AndR:
    case RuleTag::OrL:
    case RuleTag::ImpL:
    case RuleTag::Ind:
      return 2;
    default:
      return 1;
  }
}

/// (delta, Psi): a proof-call leaf standing for tuple delta's end-sequent
/// under the parameter replacement Psi.
struct ProofLabel {
  std::string symbol;
  ParameterReplacement replacement;

  friend bool operator==(const ProofLabel& a, const ProofLabel& b) {
    return a.symbol == b.symbol && a.replacement == b.replacement;
  }
};

/// One E-inference certificate: which equation, read in which direction, and
/// where in the conclusion the rewritten subterm sits. `forward` means the
/// premise holds an instance of the equation's left side and the conclusion
/// the matching right side.
struct EqStep {
  std::string symbol;
  bool base = true;
  bool forward = true;
  Side side = Side::Ante;
  std::size_t index = 0;
  std::vector<std::size_t> path;  // formula-then-term child indices

  friend bool operator==(const EqStep& a, const EqStep& b) {
    return a.symbol == b.symbol && a.base == b.base && a.forward == b.forward &&
           a.side == b.side && a.index == b.index && a.path == b.path;
  }
};

/// Certificate for an induction inference. `formula` is F written with the
/// step variable free; the conclusion's principal formula is F with that
/// variable replaced by `concl_var`.
struct IndData {
  std::string step_var;
  bool step_var_is_param = false;
  std::string concl_var;
  bool concl_var_is_param = false;
  Formula formula = Formula::eq(Term::zero(), Term::zero());
  std::size_t pos = 0;  // index of F(concl_var) in the conclusion succedent

  Term step_term() const {
    return step_var_is_param ? Term::param(step_var) : Term::var(step_var);
  }
  Term concl_term() const {
    return concl_var_is_param ? Term::param(concl_var) : Term::var(concl_var);
  }
};

struct RuleData {
  std::optional<std::size_t> pos;       // principal index for single-principal rules
  std::optional<Term> witness;          // AllL / ExR
  std::optional<std::string> eigen;     // AllR / ExL
  std::optional<Formula> cut_formula;   // Cut
  std::optional<EqStep> eq;             // ERule
  std::optional<IndData> ind;           // Ind
  std::optional<ProofLabel> label;      // LabeledLeaf
};

class ProofNode;
using Proof = std::shared_ptr<const ProofNode>;

class ProofNode {
 public:
  ProofNode(RuleTag tag, Sequent conclusion, RuleData data, std::vector<Proof> premises)
      : tag_(tag),
        conclusion_(std::move(conclusion)),
        data_(std::move(data)),
        premises_(std::move(premises)) {}

  RuleTag tag() const { return tag_; }
  const Sequent& conclusion() const { return conclusion_; }
  const RuleData& data() const { return data_; }
  const std::vector<Proof>& premises() const { return premises_; }

 private:
  RuleTag tag_;
  Sequent conclusion_;
  RuleData data_;
  std::vector<Proof> premises_;
};

inline Proof make_proof(RuleTag tag, Sequent conclusion, RuleData data,
                        std::vector<Proof> premises) {
  if (premises.size() != rule_arity(tag))
    throw InternalError(std::string("premise count does not match arity of ") + rule_name(tag));
  return std::make_shared<const ProofNode>(tag, std::move(conclusion), std::move(data),
                                           std::move(premises));
}

inline Proof make_axiom(const Formula& a) {
  return make_proof(RuleTag::Axiom, Sequent{{a}, {a}}, {}, {});
}

inline Proof make_leaf(ProofLabel label, Sequent s) {
  RuleData d;
  d.label = std::move(label);
  return make_proof(RuleTag::LabeledLeaf, std::move(s), std::move(d), {});
}

inline const Sequent& end_sequent(const Proof& p) { return p->conclusion(); }

inline std::size_t proof_size(const Proof& p) {
  std::size_t n = 1;
  for (const auto& q : p->premises()) n += proof_size(q);
  return n;
}

inline std::size_t count_rule(const Proof& p, RuleTag t) {
  std::size_t n = p->tag() == t ? 1 : 0;
  for (const auto& q : p->premises()) n += count_rule(q, t);
  return n;
}

template <typename F>
void visit_proof(const Proof& p, F&& f) {
  f(p);
  for (const auto& q : p->premises()) visit_proof(q, f);
}

// ---- navigation by formula-then-term paths ----

inline std::optional<Term> formula_subterm_at(const Formula& f, const std::vector<std::size_t>& path,
                                              std::size_t from = 0) {
  if (const auto* e = f.as_eq()) {
    if (from >= path.size()) return std::nullopt;
    const Term& t = path[from] == 0 ? e->lhs : e->rhs;
    if (path[from] > 1) return std::nullopt;
    const Term* sub = subterm_at(t, {path.begin() + static_cast<std::ptrdiff_t>(from) + 1, path.end()});
    return sub ? std::optional<Term>(*sub) : std::nullopt;
  }
  if (const auto* pr = f.as_pred()) {
    if (from >= path.size() || path[from] >= pr->args.size()) return std::nullopt;
    const Term* sub = subterm_at(pr->args[path[from]],
                                 {path.begin() + static_cast<std::ptrdiff_t>(from) + 1, path.end()});
    return sub ? std::optional<Term>(*sub) : std::nullopt;
  }
  if (from >= path.size()) return std::nullopt;
  if (const auto* n = f.as_neg()) {
    if (path[from] != 0) return std::nullopt;
    return formula_subterm_at(n->body, path, from + 1);
  }
  if (const auto* b = f.as_bin()) {
    if (path[from] > 1) return std::nullopt;
    return formula_subterm_at(path[from] == 0 ? b->lhs : b->rhs, path, from + 1);
  }
  const auto* q = f.as_quant();
  if (path[from] != 0) return std::nullopt;
  return formula_subterm_at(q->body, path, from + 1);
}

inline Formula formula_replace_subterm(const Formula& f, const std::vector<std::size_t>& path,
                                       const Term& repl, std::size_t from = 0) {
  auto tail = [&](std::size_t k) {
    return std::vector<std::size_t>(path.begin() + static_cast<std::ptrdiff_t>(k), path.end());
  };
  if (const auto* e = f.as_eq()) {
    if (from >= path.size() || path[from] > 1) throw InternalError("bad formula path");
    if (path[from] == 0) return Formula::eq(replace_subterm(e->lhs, tail(from + 1), repl), e->rhs);
    return Formula::eq(e->lhs, replace_subterm(e->rhs, tail(from + 1), repl));
  }
  if (const auto* pr = f.as_pred()) {
    if (from >= path.size() || path[from] >= pr->args.size())
      throw InternalError("bad formula path");
    std::vector<Term> args = pr->args;
    args[path[from]] = replace_subterm(args[path[from]], tail(from + 1), repl);
    return Formula::pred(pr->symbol, std::move(args));
  }
  if (from >= path.size()) throw InternalError("bad formula path");
  if (const auto* n = f.as_neg())
    return Formula::neg(formula_replace_subterm(n->body, path, repl, from + 1));
  if (const auto* b = f.as_bin()) {
    if (path[from] == 0)
      return Formula::bin(b->conn, formula_replace_subterm(b->lhs, path, repl, from + 1), b->rhs);
    return Formula::bin(b->conn, b->lhs, formula_replace_subterm(b->rhs, path, repl, from + 1));
  }
  const auto* q = f.as_quant();
  return Formula::quant(q->q, q->var, formula_replace_subterm(q->body, path, repl, from + 1));
}

}  // namespace schemakit
