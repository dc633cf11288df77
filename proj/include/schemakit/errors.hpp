#pragma once

#include <stdexcept>
#include <string>

namespace schemakit {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnboundParameter : Error {
  std::string name;
  explicit UnboundParameter(const std::string& n)
      : Error("unbound parameter: " + n), name(n) {}
};

struct UnknownSymbol : Error {
  std::string name;
  explicit UnknownSymbol(const std::string& n)
      : Error("unknown function symbol: " + n), name(n) {}
};

struct IllFoundedTheory : Error {
  explicit IllFoundedTheory(const std::string& msg)
      : Error("ill-founded theory: " + msg) {}
};

struct FuelExhausted : Error {
  explicit FuelExhausted(const std::string& what_ran_out)
      : Error("fuel exhausted in " + what_ran_out) {}
};

struct TooManyAtoms : Error {
  explicit TooManyAtoms(std::size_t n)
      : Error("quasi-tautology check limited to 20 atoms, got " + std::to_string(n)) {}
};

struct PatternNotFound : Error {
  explicit PatternNotFound(const std::string& msg)
      : Error("pattern not found: " + msg) {}
};

struct UnsupportedWitnessShape : Error {
  explicit UnsupportedWitnessShape(const std::string& msg)
      : Error("unsupported witness shape: " + msg) {}
};

struct StrongQuantifierOnCallBranch : Error {
  explicit StrongQuantifierOnCallBranch(const std::string& sym)
      : Error("strong quantifier inference on a self-call branch of tuple " + sym) {}
};

struct StrongQuantifiedInductionVariable : Error {
  std::string variable;
  explicit StrongQuantifiedInductionVariable(const std::string& v)
      : Error("induction variable " + v + " is strongly quantified below its induction"),
        variable(v) {}
};

struct NotGround : Error {
  explicit NotGround(const std::string& msg) : Error("proof is not ground: " + msg) {}
};

struct StrongQuantifierPresent : Error {
  explicit StrongQuantifierPresent(const std::string& msg)
      : Error("strong quantifier present: " + msg) {}
};

struct CutPresent : Error {
  explicit CutPresent(const std::string& msg) : Error("cut present: " + msg) {}
};

// Internal invariant violations; seeing one of these is a bug, not bad input.
struct InternalError : Error {
  explicit InternalError(const std::string& msg) : Error("internal error: " + msg) {}
};

}  // namespace schemakit
