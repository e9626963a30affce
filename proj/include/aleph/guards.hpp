#pragma once

// Rule guards, written out premise by premise and kept apart from the
// stepper. Used to check that exactly one rule applies in every state the
// stepper visits, and that it is the rule the stepper fired.

#include <optional>
#include <string>
#include <vector>

#include "aleph/machine.hpp"

namespace aleph {

/// Every rule whose premises hold at the root of `m`, in rule order,
/// without duplicates. Empty when the term is a head label.
std::vector<Rule> matching_rules(const MachineState& m);

/// The rule that applies at the root of `m`; nullopt when `m` is terminal.
/// Throws std::logic_error when no rule applies or when rules from more
/// than one outcome class apply. Among several error rules (a letrec value
/// that is both erroneous and a pointer where new effects are not allowed)
/// the first in rule order is returned.
std::optional<Rule> applicable_rule(const MachineState& m);

/// Checks one observed step against the guards: exactly one of terminal,
/// one step rule, failure or error holds, and it agrees with `observed`,
/// the class and derivation the stepper reported. `observed.rules` must be
/// filled. Returns a description of the first disagreement, or nullopt.
std::optional<std::string> uniqueness_violation(const MachineState& m,
                                                const Machine::Result& observed);

}  // namespace aleph
