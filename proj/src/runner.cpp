#include "aleph/runner.hpp"

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "aleph/frontend.hpp"
#include "aleph/guards.hpp"

namespace aleph {

std::uint64_t default_max_steps() {
  constexpr std::uint64_t kDefault = 1'000'000;
  const char* env = std::getenv("ALEPH_MAX_STEPS");
  if (!env || !*env) return kDefault;
  char* end = nullptr;
  unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0' || env[0] == '-') return kDefault;
  return v;
}

const char* to_string(ProgramStatus s) {
  switch (s) {
    case ProgramStatus::Terminated: return "Terminated";
    case ProgramStatus::BudgetExhausted: return "BudgetExhausted";
    case ProgramStatus::ProgramError: return "ProgramError";
    case ProgramStatus::InputExhausted: return "InputExhausted";
    case ProgramStatus::LimitExceeded: return "LimitExceeded";
  }
  return "?";
}

const char* to_string(ErrorCause c) {
  switch (c) {
    case ErrorCause::NonEmptyTableResult: return "NonEmptyTableResult";
    case ErrorCause::ToplevelFailure: return "ToplevelFailure";
    case ErrorCause::MachineError: return "MachineError";
  }
  return "?";
}

std::optional<Rule> ProgramOutcome::program_rule() const {
  switch (status) {
    case ProgramStatus::Terminated: return Rule::RP1;
    case ProgramStatus::BudgetExhausted: return Rule::RP2;
    case ProgramStatus::InputExhausted:
    case ProgramStatus::LimitExceeded: return std::nullopt;
    case ProgramStatus::ProgramError: break;
  }
  switch (*cause) {
    case ErrorCause::NonEmptyTableResult: return Rule::RPE1;
    case ErrorCause::ToplevelFailure: return Rule::RPE2;
    case ErrorCause::MachineError: return Rule::RPE3;
  }
  return std::nullopt;
}

std::vector<Action> ProgramOutcome::observable_actions() const {
  std::vector<Action> out;
  for (const auto& a : actions) {
    if (!a.is_pure()) out.push_back(a);
  }
  return out;
}

std::string TraceEntry::rule_path() const {
  std::string out;
  for (Rule r : rules) {
    if (!out.empty()) out += '/';
    out += rule_name(r);
  }
  return out;
}

namespace {

class Driver {
 public:
  Driver(const TermPtr& program, InputSource& in, const RunOptions& options, bool tracing)
      : machine_(MachineState::initial(program, options.label_base)),
        in_(in),
        options_(options),
        tracing_(tracing) {}

  RunReport go() {
    auto& o = report_.outcome;
    for (;;) {
      if (machine_.terminal()) {
        HeadLabel hl = *machine_.term()->label();
        const Head* h = lookup(machine_.heads(), hl);
        const auto* t = h ? std::get_if<TableHead>(h) : nullptr;
        if (t && t->entries.empty()) {
          o.status = ProgramStatus::Terminated;
        } else {
          o.status = ProgramStatus::ProgramError;
          o.cause = ErrorCause::NonEmptyTableResult;
        }
        return std::move(report_);
      }
      if (o.steps >= options_.max_steps) {
        o.status = ProgramStatus::BudgetExhausted;
        return std::move(report_);
      }

      std::optional<MachineState> before;
      if (options_.check_theorems) before = machine_.state();
      Machine::Result r;
      try {
        r = machine_.advance(in_, tracing_ || options_.check_theorems);
      } catch (const InputExhausted&) {
        o.status = ProgramStatus::InputExhausted;
        return std::move(report_);
      } catch (const LimitExceeded& e) {
        o.status = ProgramStatus::LimitExceeded;
        o.detail = e.what();
        return std::move(report_);
      }
      if (before) check(*before, r);

      switch (r.kind) {
        case Machine::Result::Kind::Stepped:
          o.actions.push_back(r.action);
          record(TraceEntry::Kind::Step, r);
          ++o.steps;
          break;
        case Machine::Result::Kind::Fail:
          record(TraceEntry::Kind::Fail, r);
          o.status = ProgramStatus::ProgramError;
          o.cause = ErrorCause::ToplevelFailure;
          return std::move(report_);
        case Machine::Result::Kind::Error:
          record(TraceEntry::Kind::Error, r);
          o.status = ProgramStatus::ProgramError;
          o.cause = ErrorCause::MachineError;
          o.error_rule = r.rule;
          o.detail = options_.canonical ? canonical_text(machine_.state(), r.detail) : r.detail;
          return std::move(report_);
        case Machine::Result::Kind::Terminal:
          throw std::logic_error("stepper stopped on a non-terminal state");
      }
    }
  }

 private:
  void record(TraceEntry::Kind kind, Machine::Result& r) {
    if (!tracing_) return;
    TraceEntry e;
    e.step = report_.outcome.steps;
    e.kind = kind;
    e.rules = std::move(r.rules);
    e.action = r.action;
    e.head_count = machine_.heads().size();
    e.ptr_count = machine_.pointers().size();
    if (options_.canonical) {
      MachineState c = canonicalize(machine_.state());
      e.term = summarize(*c.term, options_.summary_width);
      e.state = to_string(c);
    } else {
      e.term = summarize(*machine_.term(), options_.summary_width);
    }
    report_.trace.push_back(std::move(e));
  }

  void violation(const std::string& what) {
    report_.violations.push_back("step " + std::to_string(report_.outcome.steps) + ": " + what);
  }

  void check(const MachineState& before, const Machine::Result& r) {
    ++report_.checked_steps;
    if (auto v = uniqueness_violation(before, r)) violation(*v);
    if (r.kind != Machine::Result::Kind::Stepped) return;

    MachineState after = machine_.state();
    if (auto v = monotonicity_violation(before, after)) violation(*v);

    // The same step again, from the materialized state, must agree.
    ScriptedInput replay;
    if (r.action.kind == Action::Kind::In) replay = ScriptedInput({r.action.value});
    auto again = step(before, replay);
    const auto* s = std::get_if<outcome::Stepped>(&again);
    if (!s) {
      violation("replaying the step did not step");
    } else if (!(s->action == r.action) || s->rules != r.rules ||
               !structurally_equal(canonicalize(s->next), canonicalize(after))) {
      violation("replaying the step gave a different result");
    }
  }

  Machine machine_;
  InputSource& in_;
  const RunOptions& options_;
  bool tracing_;
  RunReport report_;
};

}  // namespace

RunReport run(const TermPtr& program, InputSource& in, const RunOptions& options) {
  return Driver(program, in, options, false).go();
}

RunReport trace(const TermPtr& program, InputSource& in, const RunOptions& options) {
  return Driver(program, in, options, true).go();
}

std::vector<std::uint64_t> rule_counts(const RunReport& report) {
  std::vector<std::uint64_t> counts(kRuleCount, 0);
  for (const auto& e : report.trace) {
    for (Rule r : e.rules) ++counts[static_cast<std::size_t>(r)];
  }
  if (auto r = report.outcome.program_rule()) ++counts[static_cast<std::size_t>(*r)];
  return counts;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string action_list(const std::vector<Action>& actions) {
  std::string out = "[";
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += ", ";
    out += to_string(actions[i]);
  }
  return out + "]";
}

const char* kind_name(TraceEntry::Kind k) {
  switch (k) {
    case TraceEntry::Kind::Step: return "step";
    case TraceEntry::Kind::Fail: return "fail";
    case TraceEntry::Kind::Error: return "error";
  }
  return "?";
}

}  // namespace

std::string to_string(const ProgramOutcome& o) {
  std::string out = to_string(o.status);
  if (auto r = o.program_rule()) out += " (" + std::string(rule_name(*r)) + ")";
  if (o.cause) out += std::string(" cause=") + to_string(*o.cause);
  if (o.error_rule) out += " rule=" + std::string(rule_name(*o.error_rule));
  if (!o.detail.empty()) out += ": " + o.detail;
  out += " steps=" + std::to_string(o.steps);
  out += " actions=" + action_list(o.observable_actions());
  return out;
}

std::string to_string(const TraceEntry& e) {
  std::string out = std::to_string(e.step) + " " + kind_name(e.kind) + " " + e.rule_path();
  if (e.kind == TraceEntry::Kind::Step) out += " " + to_string(e.action);
  out += " hh=" + std::to_string(e.head_count) + " ph=" + std::to_string(e.ptr_count);
  out += " | " + e.term;
  return out;
}

nlohmann::json to_json(const ProgramOutcome& o) {
  nlohmann::json j;
  j["status"] = to_string(o.status);
  if (auto r = o.program_rule()) j["programRule"] = std::string(rule_name(*r));
  if (o.cause) j["cause"] = to_string(*o.cause);
  if (o.error_rule) j["errorRule"] = std::string(rule_name(*o.error_rule));
  if (!o.detail.empty()) j["detail"] = o.detail;
  j["steps"] = o.steps;
  auto actions = nlohmann::json::array();
  for (const auto& a : o.observable_actions()) actions.push_back(to_string(a));
  j["actions"] = std::move(actions);
  return j;
}

nlohmann::json to_json(const TraceEntry& e) {
  nlohmann::json j;
  j["step"] = e.step;
  j["kind"] = kind_name(e.kind);
  j["rule"] = e.rule_path();
  if (e.kind == TraceEntry::Kind::Step) j["action"] = to_string(e.action);
  j["termSummary"] = e.term;
  j["headCount"] = e.head_count;
  j["ptrCount"] = e.ptr_count;
  if (e.state) j["state"] = *e.state;
  return j;
}

std::string to_string(const MachineState& m) {
  std::string out = "HH{";
  bool first = true;
  for (const auto& [hl, h] : m.heads) {
    if (!first) out += "; ";
    first = false;
    out += label_string(hl) + "=" + to_string(h);
  }
  out += "} PH{";
  first = true;
  for (const auto& [pl, cell] : m.pointers) {
    if (!first) out += "; ";
    first = false;
    out += label_string(pl) + "=ptr(" + to_string(cell.env) + ", " +
           (cell.type ? print_flat(*cell.type) : "?") + ", " + label_string(cell.contents) + ")";
  }
  out += "} env" + to_string(m.env) + " " + to_string(m.allowed) + " | ";
  out += m.term ? print_flat(*m.term) : "?";
  return out;
}

}  // namespace aleph
