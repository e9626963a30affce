#pragma once

#include <set>
#include <string>
#include <vector>

#include "aleph/syntax.hpp"

namespace aleph {

/// A problem found in a term. `path` is the sequence of child indices from
/// the root to the offending subterm; `where` identifies the node (a Term or
/// a letrec value) so that the frontend can map it back to a position.
struct Diagnostic {
  std::string message;
  std::vector<std::size_t> path;
  const void* where = nullptr;
  int line = 0;    // 1-based, 0 when unknown
  int column = 0;  // 1-based, 0 when unknown

  std::string to_string() const;
};

enum class CheckMode {
  Term,     // structural constraints only
  Program,  // additionally the term must be closed
};

/// Source-syntax constraints: no machine-only forms, distinct table and
/// tuple indices, and (in Program mode) no free variables.
///
/// Child-index convention for paths: operands left to right as written in
/// the concrete syntax; a function's children are its term parts in order
/// (domain, body / type domain, instantiation, domain, body); a letrec's
/// children are its values followed by its body.
std::vector<Diagnostic> well_formed_source(const Term& t, CheckMode mode = CheckMode::Program);

std::set<VarName> free_vars(const Term& t);
std::set<VarName> free_vars(const Fun& f);

/// Equality up to consistent renaming of bound variables. Labels are
/// compared by identity; use canonicalize() to compare whole states up to
/// label renaming.
bool alpha_equal(const Term& a, const Term& b);

/// Terms that test mode handles by generating a value and comparing:
/// uop, bop, len, appE, appF, new, read, write, ptrto, in, out, fxthen.
bool is_revert_to_generate(const Term& t);

/// A variable name not in `avoid`, built from `base`. Machine-generated
/// names start with '%' so they can never collide with source variables.
VarName fresh_var(const std::string& base, const std::set<VarName>& avoid);

}  // namespace aleph
