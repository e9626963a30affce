#pragma once

// Whole programs: run from the initial state until the machine stops, the
// step budget runs out, or the input script runs dry.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "aleph/machine.hpp"

namespace aleph {

/// 1,000,000 unless ALEPH_MAX_STEPS holds a valid count.
std::uint64_t default_max_steps();

enum class ProgramStatus : std::uint8_t {
  Terminated,       // RP1
  BudgetExhausted,  // stand-in for RP2
  ProgramError,     // RPE1, RPE2, RPE3
  InputExhausted,   // not a program outcome: the input script ran out
  LimitExceeded,    // not a program outcome: an implementation limit was hit
};

enum class ErrorCause : std::uint8_t { NonEmptyTableResult, ToplevelFailure, MachineError };

const char* to_string(ProgramStatus s);
const char* to_string(ErrorCause c);

struct ProgramOutcome {
  ProgramStatus status = ProgramStatus::Terminated;
  std::optional<ErrorCause> cause;  // ProgramError only
  std::optional<Rule> error_rule;   // MachineError only: the rule at the redex
  std::string detail;               // MachineError and LimitExceeded only
  std::vector<Action> actions;      // every step, pure ones included
  std::uint64_t steps = 0;

  /// RP1, RP2, RPE1, RPE2 or RPE3; nullopt for InputExhausted and LimitExceeded.
  std::optional<Rule> program_rule() const;
  /// The actions without the pure ones.
  std::vector<Action> observable_actions() const;
};

struct TraceEntry {
  enum class Kind : std::uint8_t { Step, Fail, Error };

  std::uint64_t step = 0;
  Kind kind = Kind::Step;
  std::vector<Rule> rules;  // derivation, outermost first
  Action action;            // Step only
  std::string term;         // summary of the term after the step (before, for Fail/Error)
  std::size_t head_count = 0;
  std::size_t ptr_count = 0;
  std::optional<std::string> state;  // canonical state after the step, when requested

  /// "RGframe2/RGctxt/RGi"
  std::string rule_path() const;
};

struct RunOptions {
  std::uint64_t max_steps = default_max_steps();
  std::uint64_t label_base = 0;
  /// Trace entries carry canonical states and canonical term summaries, so
  /// traces do not depend on label_base.
  bool canonical = false;
  /// Check monotonicity and rule uniqueness on every step. Slow.
  bool check_theorems = false;
  std::size_t summary_width = 80;
};

struct RunReport {
  ProgramOutcome outcome;
  std::vector<TraceEntry> trace;  // filled by trace() only
  std::vector<std::string> violations;
  std::uint64_t checked_steps = 0;
};

RunReport run(const TermPtr& program, InputSource& in, const RunOptions& options = {});
RunReport trace(const TermPtr& program, InputSource& in, const RunOptions& options = {});

/// Number of rule firings per rule over a trace, including congruence and
/// letrec value rules, plus the program rule of the outcome.
std::vector<std::uint64_t> rule_counts(const RunReport& report);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string to_string(const ProgramOutcome& o);  // one line
std::string to_string(const TraceEntry& e);      // one line

nlohmann::json to_json(const ProgramOutcome& o);
nlohmann::json to_json(const TraceEntry& e);

/// A state written out in full, labels as they are. Deterministic.
std::string to_string(const MachineState& m);

}  // namespace aleph
