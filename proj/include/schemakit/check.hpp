#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "schemakit/proof_ops.hpp"
#include "schemakit/theory.hpp"

namespace schemakit {

enum class CheckMode { PureLk, Pra };

struct Violation {
  std::vector<std::size_t> path;  // premise indices from the root
  RuleTag rule;
  std::string reason;
};

struct CheckReport {
  std::vector<Violation> violations;
  bool accepted() const { return violations.empty(); }
};

namespace detail {

struct Checker {
  const EquationalTheory& E;
  CheckMode mode;
  bool allow_labels;
  std::vector<Violation>* out;

  void fail(const std::vector<std::size_t>& path, RuleTag rule, const std::string& why) const {
    out->push_back({path, rule, why});
  }

  bool check_term_symbols(const Term& t, std::string& why) const {
    if (const auto* s = t.as_succ()) return check_term_symbols(s->arg, why);
    if (const auto* f = t.as_fn()) {
      auto ar = E.fn_arity(f->symbol);
      if (!ar) {
        why = "undeclared function symbol " + f->symbol;
        return false;
      }
      if (*ar != f->args.size()) {
        why = "arity mismatch for " + f->symbol;
        return false;
      }
      for (const auto& a : f->args)
        if (!check_term_symbols(a, why)) return false;
    }
    return true;
  }

  bool check_formula_symbols(const Formula& f, std::string& why) const {
    if (const auto* e = f.as_eq())
      return check_term_symbols(e->lhs, why) && check_term_symbols(e->rhs, why);
    if (const auto* p = f.as_pred()) {
      auto ar = E.pred_arity(p->symbol);
      if (!ar) {
        why = "undeclared predicate symbol " + p->symbol;
        return false;
      }
      if (*ar != p->args.size()) {
        why = "arity mismatch for predicate " + p->symbol;
        return false;
      }
      for (const auto& a : p->args)
        if (!check_term_symbols(a, why)) return false;
      return true;
    }
    if (const auto* n = f.as_neg()) return check_formula_symbols(n->body, why);
    if (const auto* b = f.as_bin())
      return check_formula_symbols(b->lhs, why) && check_formula_symbols(b->rhs, why);
    return check_formula_symbols(f.as_quant()->body, why);
  }

  // premise side/context comparisons; principal formula picked by index
  const Formula* principal(const Proof& p, Side side, std::vector<std::size_t>& path) const {
    const RuleData& d = p->data();
    const auto& xs = cedent(p->conclusion(), side);
    if (!d.pos || *d.pos >= xs.size()) {
      fail(path, p->tag(), "missing or out-of-range principal index");
      return nullptr;
    }
    return &xs[*d.pos];
  }

  void expect_ms(const std::vector<Formula>& got, const std::vector<Formula>& want,
                 const std::vector<std::size_t>& path, RuleTag tag, const char* what) const {
    if (!ms_equal(got, want)) fail(path, tag, std::string("premise ") + what + " does not match");
  }

  void check(const Proof& p, std::vector<std::size_t>& path) const {
    const RuleTag tag = p->tag();
    const RuleData& d = p->data();
    const Sequent& c = p->conclusion();

    if (p->premises().size() != rule_arity(tag))
      fail(path, tag, "premise count does not match rule arity");

    // symbol discipline over the whole conclusion
    {
      std::string why;
      for (const auto& f : c.antecedent)
        if (!check_formula_symbols(f, why)) {
          fail(path, tag, why);
          break;
        }
      for (const auto& f : c.succedent)
        if (!check_formula_symbols(f, why)) {
          fail(path, tag, why);
          break;
        }
    }

    auto prem = [&](std::size_t i) -> const Sequent& { return p->premises()[i]->conclusion(); };

    switch (tag) {
      case RuleTag::Axiom: {
        if (c.antecedent.size() != 1 || c.succedent.size() != 1)
          fail(path, tag, "axiom must be of the form A |- A");
        else if (c.antecedent[0] != c.succedent[0])
          fail(path, tag, "axiom sides differ");
        else if (!c.antecedent[0].is_atomic())
          fail(path, tag, "axiom formula must be atomic");
        break;
      }
      case RuleTag::LabeledLeaf: {
        if (!allow_labels) fail(path, tag, "labeled leaf in a ground proof");
        if (!d.label) fail(path, tag, "labeled leaf without a label");
        break;
      }
      case RuleTag::Cut: {
        if (!d.cut_formula) {
          fail(path, tag, "cut without cut formula");
          break;
        }
        const Formula& a = *d.cut_formula;
        std::vector<Formula> ls = prem(0).succedent;
        std::vector<Formula> ra = prem(1).antecedent;
        if (!ms_remove_one(ls, a)) {
          fail(path, tag, "cut formula not in left premise succedent");
          break;
        }
        if (!ms_remove_one(ra, a)) {
          fail(path, tag, "cut formula not in right premise antecedent");
          break;
        }
        expect_ms(ms_concat(prem(0).antecedent, ra), c.antecedent, path, tag, "antecedent");
        expect_ms(ms_concat(ls, prem(1).succedent), c.succedent, path, tag, "succedent");
        break;
      }
      case RuleTag::WeakL:
      case RuleTag::WeakR: {
        Side side = tag == RuleTag::WeakL ? Side::Ante : Side::Succ;
        const Formula* f = principal(p, side, path);
        if (!f) break;
        std::vector<Formula> rest = cedent(c, side);
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(*d.pos));
        expect_ms(cedent(prem(0), side), rest, path, tag, "principal cedent");
        expect_ms(cedent(prem(0), side == Side::Ante ? Side::Succ : Side::Ante),
                  cedent(c, side == Side::Ante ? Side::Succ : Side::Ante), path, tag,
                  "context cedent");
        break;
      }
      case RuleTag::ContrL:
      case RuleTag::ContrR: {
        Side side = tag == RuleTag::ContrL ? Side::Ante : Side::Succ;
        const Formula* f = principal(p, side, path);
        if (!f) break;
        std::vector<Formula> want = cedent(c, side);
        want.push_back(*f);
        expect_ms(cedent(prem(0), side), want, path, tag, "principal cedent");
        expect_ms(cedent(prem(0), side == Side::Ante ? Side::Succ : Side::Ante),
                  cedent(c, side == Side::Ante ? Side::Succ : Side::Ante), path, tag,
                  "context cedent");
        break;
      }
      case RuleTag::AndL: {
        const Formula* f = principal(p, Side::Ante, path);
        if (!f) break;
        const auto* b = f->as_bin();
        if (!b || b->conn != Conn::And) {
          fail(path, tag, "principal formula is not a conjunction");
          break;
        }
        std::vector<Formula> want = c.antecedent;
        want.erase(want.begin() + static_cast<std::ptrdiff_t>(*d.pos));
        want.push_back(b->lhs);
        want.push_back(b->rhs);
        expect_ms(prem(0).antecedent, want, path, tag, "antecedent");
        expect_ms(prem(0).succedent, c.succedent, path, tag, "succedent");
        break;
      }
      case RuleTag::OrR: {
        const Formula* f = principal(p, Side::Succ, path);
        if (!f) break;
        const auto* b = f->as_bin();
        if (!b || b->conn != Conn::Or) {
          fail(path, tag, "principal formula is not a disjunction");
          break;
        }
        std::vector<Formula> want = c.succedent;
        want.erase(want.begin() + static_cast<std::ptrdiff_t>(*d.pos));
        want.push_back(b->lhs);
        want.push_back(b->rhs);
        expect_ms(prem(0).succedent, want, path, tag, "succedent");
        expect_ms(prem(0).antecedent, c.antecedent, path, tag, "antecedent");
        break;
      }
      case RuleTag::ImpR: {
        const Formula* f = principal(p, Side::Succ, path);
        if (!f) break;
        const auto* b = f->as_bin();
        if (!b || b->conn != Conn::Implies) {
          fail(path, tag, "principal formula is not an implication");
          break;
        }
        std::vector<Formula> wa = c.antecedent;
        wa.push_back(b->lhs);
        std::vector<Formula> ws = c.succedent;
        ws.erase(ws.begin() + static_cast<std::ptrdiff_t>(*d.pos));
        ws.push_back(b->rhs);
        expect_ms(prem(0).antecedent, wa, path, tag, "antecedent");
        expect_ms(prem(0).succedent, ws, path, tag, "succedent");
        break;
      }
      case RuleTag::AndR: {
        const Formula* f = principal(p, Side::Succ, path);
        if (!f) break;
        const auto* b = f->as_bin();
        if (!b || b->conn != Conn::And) {
          fail(path, tag, "principal formula is not a conjunction");
          break;
        }
        std::vector<Formula> ls = prem(0).succedent;
        std::vector<Formula> rs = prem(1).succedent;
        if (!ms_remove_one(ls, b->lhs)) {
          fail(path, tag, "left premise lacks the left conjunct");
          break;
        }
        if (!ms_remove_one(rs, b->rhs)) {
          fail(path, tag, "right premise lacks the right conjunct");
          break;
        }
        std::vector<Formula> ws = c.succedent;
        ws.erase(ws.begin() + static_cast<std::ptrdiff_t>(*d.pos));
        expect_ms(ms_concat(ls, rs), ws, path, tag, "succedent context");
        expect_ms(ms_concat(prem(0).antecedent, prem(1).antecedent), c.antecedent, path, tag,
                  "antecedent");
        break;
      }
      case RuleTag::OrL: {
        const Formula* f = principal(p, Side::Ante, path);
        if (!f) break;
        const auto* b = f->as_bin();
        if (!b || b->conn != Conn::Or) {
          fail(path, tag, "principal formula is not a disjunction");
          break;
        }
        std::vector<Formula> la = prem(0).antecedent;
        std::vector<Formula> ra = prem(1).antecedent;
        if (!ms_remove_one(la, b->lhs)) {
          fail(path, tag, "left premise lacks the left disjunct");
          break;
        }
        if (!ms_remove_one(ra, b->rhs)) {
          fail(path, tag, "right premise lacks the right disjunct");
          break;
        }
        std::vector<Formula> wa = c.antecedent;
        wa.erase(wa.begin() + static_cast<std::ptrdiff_t>(*d.pos));
        expect_ms(ms_concat(la, ra), wa, path, tag, "antecedent context");
        expect_ms(ms_concat(prem(0).succedent, prem(1).succedent), c.succedent, path, tag,
                  "succedent");
        break;
      }
      case RuleTag::ImpL: {
        const Formula* f = principal(p, Side::Ante, path);
        if (!f) break;
        const auto* b = f->as_bin();
        if (!b || b->conn != Conn::Implies) {
          fail(path, tag, "principal formula is not an implication");
          break;
        }
        std::vector<Formula> ls = prem(0).succedent;
        std::vector<Formula> ra = prem(1).antecedent;
        if (!ms_remove_one(ls, b->lhs)) {
          fail(path, tag, "left premise lacks the antecedent of the implication");
          break;
        }
        if (!ms_remove_one(ra, b->rhs)) {
          fail(path, tag, "right premise lacks the consequent of the implication");
          break;
        }
        std::vector<Formula> wa = c.antecedent;
        wa.erase(wa.begin() + static_cast<std::ptrdiff_t>(*d.pos));
        expect_ms(ms_concat(prem(0).antecedent, ra), wa, path, tag, "antecedent context");
        std::vector<Formula> ws = c.succedent;
        expect_ms(ms_concat(ls, prem(1).succedent), ws, path, tag, "succedent");
        break;
      }
      case RuleTag::NegL: {
        const Formula* f = principal(p, Side::Ante, path);
        if (!f) break;
        const auto* n = f->as_neg();
        if (!n) {
          fail(path, tag, "principal formula is not a negation");
          break;
        }
        std::vector<Formula> wa = c.antecedent;
        wa.erase(wa.begin() + static_cast<std::ptrdiff_t>(*d.pos));
        std::vector<Formula> ws = c.succedent;
        ws.push_back(n->body);
        expect_ms(prem(0).antecedent, wa, path, tag, "antecedent");
        expect_ms(prem(0).succedent, ws, path, tag, "succedent");
        break;
      }
      case RuleTag::NegR: {
        const Formula* f = principal(p, Side::Succ, path);
        if (!f) break;
        const auto* n = f->as_neg();
        if (!n) {
          fail(path, tag, "principal formula is not a negation");
          break;
        }
        std::vector<Formula> ws = c.succedent;
        ws.erase(ws.begin() + static_cast<std::ptrdiff_t>(*d.pos));
        std::vector<Formula> wa = c.antecedent;
        wa.push_back(n->body);
        expect_ms(prem(0).succedent, ws, path, tag, "succedent");
        expect_ms(prem(0).antecedent, wa, path, tag, "antecedent");
        break;
      }
      case RuleTag::AllL:
      case RuleTag::ExR: {
        Side side = tag == RuleTag::AllL ? Side::Ante : Side::Succ;
        const Formula* f = principal(p, side, path);
        if (!f) break;
        const auto* q = f->as_quant();
        Quantifier want_q = tag == RuleTag::AllL ? Quantifier::Forall : Quantifier::Exists;
        if (!q || q->q != want_q) {
          fail(path, tag, "principal formula has the wrong quantifier");
          break;
        }
        if (!d.witness) {
          fail(path, tag, "missing witness term");
          break;
        }
        std::vector<Formula> want = cedent(c, side);
        want.erase(want.begin() + static_cast<std::ptrdiff_t>(*d.pos));
        want.push_back(substitute(q->body, {{q->var, *d.witness}}));
        expect_ms(cedent(prem(0), side), want, path, tag, "instantiated cedent");
        expect_ms(cedent(prem(0), side == Side::Ante ? Side::Succ : Side::Ante),
                  cedent(c, side == Side::Ante ? Side::Succ : Side::Ante), path, tag,
                  "context cedent");
        break;
      }
      case RuleTag::AllR:
      case RuleTag::ExL: {
        Side side = tag == RuleTag::AllR ? Side::Succ : Side::Ante;
        const Formula* f = principal(p, side, path);
        if (!f) break;
        const auto* q = f->as_quant();
        Quantifier want_q = tag == RuleTag::AllR ? Quantifier::Forall : Quantifier::Exists;
        if (!q || q->q != want_q) {
          fail(path, tag, "principal formula has the wrong quantifier");
          break;
        }
        if (!d.eigen) {
          fail(path, tag, "missing eigenvariable");
          break;
        }
        const std::string& y = *d.eigen;
        // eigenvariables are ordinary; parameters may not be quantified
        auto free_in_concl = sequent_free_ordinary_vars(c);
        if (free_in_concl.count(y)) {
          fail(path, tag, "eigenvariable " + y + " occurs free in the lower sequent");
          break;
        }
        std::vector<Formula> want = cedent(c, side);
        want.erase(want.begin() + static_cast<std::ptrdiff_t>(*d.pos));
        want.push_back(substitute(q->body, {{q->var, Term::var(y)}}));
        expect_ms(cedent(prem(0), side), want, path, tag, "instantiated cedent");
        expect_ms(cedent(prem(0), side == Side::Ante ? Side::Succ : Side::Ante),
                  cedent(c, side == Side::Ante ? Side::Succ : Side::Ante), path, tag,
                  "context cedent");
        break;
      }
      case RuleTag::ERule: {
        if (!d.eq) {
          fail(path, tag, "equational inference without certificate");
          break;
        }
        const EqStep& e = *d.eq;
        const Definition* def = E.definition(e.symbol);
        if (!def) {
          fail(path, tag, "equational inference on undefined symbol " + e.symbol);
          break;
        }
        const auto& cs = cedent(c, e.side);
        const auto& ps = cedent(prem(0), e.side);
        if (e.index >= cs.size() || cs.size() != ps.size() ||
            cedent(c, e.side == Side::Ante ? Side::Succ : Side::Ante).size() !=
                cedent(prem(0), e.side == Side::Ante ? Side::Succ : Side::Ante).size()) {
          fail(path, tag, "equational inference index out of range");
          break;
        }
        // all formulas except the rewritten one must agree in order
        bool rest_ok = true;
        for (std::size_t i = 0; i < cs.size() && rest_ok; ++i)
          if (i != e.index && !(cs[i] == ps[i])) rest_ok = false;
        const auto& co = cedent(c, e.side == Side::Ante ? Side::Succ : Side::Ante);
        const auto& po = cedent(prem(0), e.side == Side::Ante ? Side::Succ : Side::Ante);
        for (std::size_t i = 0; i < co.size() && rest_ok; ++i)
          if (!(co[i] == po[i])) rest_ok = false;
        if (!rest_ok) {
          fail(path, tag, "equational inference changes more than one formula");
          break;
        }
        auto sub_c = formula_subterm_at(cs[e.index], e.path);
        auto sub_p = formula_subterm_at(ps[e.index], e.path);
        if (!sub_c || !sub_p) {
          fail(path, tag, "equational rewrite position is invalid");
          break;
        }
        if (!(formula_replace_subterm(cs[e.index], e.path, *sub_p) == ps[e.index])) {
          fail(path, tag, "premise and conclusion differ outside the rewrite position");
          break;
        }
        // orientation: forward reads premise = lhs instance, conclusion = rhs instance
        Term lhs_pat = Term::fn(e.symbol, [&] {
          std::vector<Term> args;
          for (const auto& v : def->vars) args.push_back(Term::var(v));
          args.push_back(e.base ? Term::zero() : Term::succ(Term::var(def->rec_var)));
          return args;
        }());
        const Term& rhs_pat = e.base ? def->base_rhs : def->step_rhs;
        const Term& from = e.forward ? *sub_p : *sub_c;
        const Term& to = e.forward ? *sub_c : *sub_p;
        std::map<std::string, Term> m;
        if (!match_term(lhs_pat, from, m) ||
            !(replace_vars(rhs_pat, m, VarKind::Ordinary) == to)) {
          fail(path, tag, "rewrite is not an instance of the cited equation");
          break;
        }
        break;
      }
      case RuleTag::Ind: {
        if (mode != CheckMode::Pra) {
          fail(path, tag, "induction is only admitted in PRA mode");
          break;
        }
        if (!d.ind) {
          fail(path, tag, "induction without certificate");
          break;
        }
        const IndData& ind = *d.ind;
        if (ind.pos >= c.succedent.size()) {
          fail(path, tag, "induction principal index out of range");
          break;
        }
        Term y = ind.step_term();
        Term n = ind.concl_term();
        auto inst = [&](const Term& t) {
          if (ind.step_var_is_param)
            return replace_params(ind.formula, {{ind.step_var, t}});
          return substitute(ind.formula, {{ind.step_var, t}});
        };
        if (!(c.succedent[ind.pos] == inst(n))) {
          fail(path, tag, "conclusion principal formula is not F(n)");
          break;
        }
        std::vector<Formula> delta = c.succedent;
        delta.erase(delta.begin() + static_cast<std::ptrdiff_t>(ind.pos));
        const std::vector<Formula>& gamma = c.antecedent;
        // y fresh in Gamma, Delta, F(0)
        bool fresh = true;
        auto occurs = [&](const Formula& f) {
          if (ind.step_var_is_param) return formula_params(f).count(ind.step_var) > 0;
          return free_ordinary_vars(f).count(ind.step_var) > 0;
        };
        for (const auto& f : gamma)
          if (occurs(f)) fresh = false;
        for (const auto& f : delta)
          if (occurs(f)) fresh = false;
        if (occurs(inst(Term::zero()))) fresh = false;
        if (!fresh) {
          fail(path, tag, "induction variable is not fresh in the context");
          break;
        }
        std::vector<Formula> w0 = delta;
        w0.push_back(inst(Term::zero()));
        expect_ms(prem(0).antecedent, gamma, path, tag, "base antecedent");
        expect_ms(prem(0).succedent, w0, path, tag, "base succedent");
        std::vector<Formula> wa = gamma;
        wa.push_back(inst(y));
        std::vector<Formula> ws = delta;
        ws.push_back(inst(Term::succ(y)));
        expect_ms(prem(1).antecedent, wa, path, tag, "step antecedent");
        expect_ms(prem(1).succedent, ws, path, tag, "step succedent");
        break;
      }
    }

    for (std::size_t i = 0; i < p->premises().size(); ++i) {
      path.push_back(i);
      check(p->premises()[i], path);
      path.pop_back();
    }
  }
};

}  // namespace detail

/// Validates a derivation rule by rule against LK, the E rule, the axiom set
/// and (in PRA mode) the induction rule. All failures are report entries.
inline CheckReport check_lk(const Proof& p, const EquationalTheory& E, CheckMode mode,
                            bool allow_labels = false) {
  CheckReport report;
  detail::Checker checker{E, mode, allow_labels, &report.violations};
  std::vector<std::size_t> path;
  checker.check(p, path);
  return report;
}

inline std::string describe(const CheckReport& r) {
  if (r.accepted()) return "accept";
  std::ostringstream os;
  os << "reject (" << r.violations.size() << " violation" << (r.violations.size() == 1 ? "" : "s")
     << ")";
  for (const auto& v : r.violations) {
    os << "\n  at [";
    for (std::size_t i = 0; i < v.path.size(); ++i) os << (i ? "." : "") << v.path[i];
    os << "] " << rule_name(v.rule) << ": " << v.reason;
  }
  return os.str();
}

}  // namespace schemakit
