#pragma once

#include <optional>
#include <vector>

#include "schemakit/formula.hpp"

namespace schemakit {

/// A sequent; both cedents are ordered multisets (duplicates and order kept).
struct Sequent {
  std::vector<Formula> antecedent;
  std::vector<Formula> succedent;

  friend bool operator==(const Sequent& a, const Sequent& b) {
    return a.antecedent == b.antecedent && a.succedent == b.succedent;
  }
  friend bool operator!=(const Sequent& a, const Sequent& b) { return !(a == b); }
};

enum class Side { Ante, Succ };

inline const std::vector<Formula>& cedent(const Sequent& s, Side side) {
  return side == Side::Ante ? s.antecedent : s.succedent;
}
inline std::vector<Formula>& cedent(Sequent& s, Side side) {
  return side == Side::Ante ? s.antecedent : s.succedent;
}

// -- multiset helpers (alpha-equivalence as the element equality) --

inline std::optional<std::size_t> ms_find(const std::vector<Formula>& xs, const Formula& f) {
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] == f) return i;
  return std::nullopt;
}

inline bool ms_remove_one(std::vector<Formula>& xs, const Formula& f) {
  auto i = ms_find(xs, f);
  if (!i) return false;
  xs.erase(xs.begin() + static_cast<std::ptrdiff_t>(*i));
  return true;
}

inline bool ms_equal(std::vector<Formula> a, const std::vector<Formula>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& f : b)
    if (!ms_remove_one(a, f)) return false;
  return true;
}

inline std::vector<Formula> ms_concat(std::vector<Formula> a, const std::vector<Formula>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline std::size_t ms_count(const std::vector<Formula>& xs, const Formula& f) {
  std::size_t n = 0;
  for (const auto& g : xs)
    if (g == f) ++n;
  return n;
}

inline bool sequent_multiset_equal(const Sequent& a, const Sequent& b) {
  return ms_equal(a.antecedent, b.antecedent) && ms_equal(a.succedent, b.succedent);
}

inline std::set<std::string> sequent_free_ordinary_vars(const Sequent& s) {
  std::set<std::string> out;
  for (const auto& f : s.antecedent) {
    auto v = free_ordinary_vars(f);
    out.insert(v.begin(), v.end());
  }
  for (const auto& f : s.succedent) {
    auto v = free_ordinary_vars(f);
    out.insert(v.begin(), v.end());
  }
  return out;
}

inline std::set<std::string> sequent_params(const Sequent& s) {
  std::set<std::string> out;
  for (const auto& f : s.antecedent) {
    auto v = formula_params(f);
    out.insert(v.begin(), v.end());
  }
  for (const auto& f : s.succedent) {
    auto v = formula_params(f);
    out.insert(v.begin(), v.end());
  }
  return out;
}

inline Sequent substitute(const Sequent& s, const std::map<std::string, Term>& m) {
  Sequent out;
  out.antecedent.reserve(s.antecedent.size());
  out.succedent.reserve(s.succedent.size());
  for (const auto& f : s.antecedent) out.antecedent.push_back(substitute(f, m));
  for (const auto& f : s.succedent) out.succedent.push_back(substitute(f, m));
  return out;
}

inline Sequent replace_params(const Sequent& s, const std::map<std::string, Term>& m) {
  Sequent out;
  out.antecedent.reserve(s.antecedent.size());
  out.succedent.reserve(s.succedent.size());
  for (const auto& f : s.antecedent) out.antecedent.push_back(replace_params(f, m));
  for (const auto& f : s.succedent) out.succedent.push_back(replace_params(f, m));
  return out;
}

}  // namespace schemakit
