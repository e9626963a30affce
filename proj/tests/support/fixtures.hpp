#pragma once

// Hand-built machine states for the rules that no closed, well-formed
// source program can reach: unbound variables and undefined head labels.

#include <string>
#include <vector>

#include "aleph/rules.hpp"
#include "aleph/syntax.hpp"

namespace aleph::testing {

struct Fixture {
  std::string name;
  Rule expected;  // the rule at the redex
  MachineState state;
};

std::vector<Fixture> unreachable_rule_fixtures();

/// Reads a whole file; throws std::runtime_error if it cannot.
std::string read_file(const std::string& path);

/// The integers listed on a "; input:" comment line, if any.
std::vector<Integer> declared_inputs(const std::string& program_text);

/// Paths of the .aleph files under `dir`, sorted.
std::vector<std::string> list_programs(const std::string& dir);

}  // namespace aleph::testing
