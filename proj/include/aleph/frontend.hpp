#pragma once

// Concrete syntax: keyword-first parenthesized expressions, one form per
// term constructor, comments from ';' to end of line.
//
//   (let x 5 (bop add x 1))
//   (fun x ints contra T {P} (out x))
//   (letrec ((a (tuple (0 b))) (b (tuple (0 a)))) (table))

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aleph/syntax.hpp"
#include "aleph/term_utils.hpp"

namespace aleph {

struct SourcePos {
  int line = 1;
  int column = 1;
};

struct ParseResult {
  TermPtr term;  // null when there are syntax errors
  std::vector<Diagnostic> diagnostics;
  /// Position of every parsed term node and letrec value, keyed by address.
  std::unordered_map<const void*, SourcePos> positions;

  bool ok() const { return term && diagnostics.empty(); }
};

/// Parses one term. Syntax errors stop parsing; when the text is
/// syntactically fine, well-formedness diagnostics for `mode` are attached
/// with positions.
ParseResult parse(std::string_view text, CheckMode mode = CheckMode::Program);

/// Pretty-prints with line breaks so that lines stay within `width` where
/// possible. Machine forms use reserved spellings (#n, @n, frame, ifm, chk)
/// that the parser does not accept.
std::string print(const Term& t, std::size_t width = 80);

/// Everything on one line.
std::string print_flat(const Term& t);

/// One-line form cut to at most `max` characters, ending in "..." if cut.
std::string summarize(const Term& t, std::size_t max = 80);

std::string to_string(const Environment& env);  // "[x=#0, y=#3]"
std::string to_string(const Head& h);           // "5", "<0:#1, 1:#2>", "clos(...)", "@0"

/// Integers separated by commas and/or whitespace, as given to --input.
/// nullopt if any item is not a plain decimal integer.
std::optional<std::vector<Integer>> parse_integer_list(std::string_view text);

/// Source keywords; none of them can be used as a variable name.
bool is_keyword(std::string_view word);

}  // namespace aleph
