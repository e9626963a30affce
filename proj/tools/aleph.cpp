// aleph: run, trace or check a program file.
//
//   aleph run prog.aleph --input 1,2,3
//   aleph trace prog.aleph --rules-only
//   aleph check prog.aleph
//
// Exit status: 0 terminated, 1 program error, 2 step budget exhausted,
// 3 bad file, syntax, well-formedness or flags, 4 input ran out, 5 an
// implementation limit was hit (an array too long to build).

#include <unistd.h>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aleph/frontend.hpp"
#include "aleph/runner.hpp"

namespace {

using namespace aleph;

constexpr int kExitTerminated = 0;
constexpr int kExitProgramError = 1;
constexpr int kExitBudget = 2;
constexpr int kExitUsage = 3;
constexpr int kExitInput = 4;
constexpr int kExitLimit = 5;

struct Flags {
  std::string file;
  std::string inputs;
  std::string input_file;
  std::uint64_t max_steps = default_max_steps();
  std::string format = "text";
  bool rules_only = false;
};

struct UsageError {
  std::string message;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError{"cannot read '" + path + "'"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TermPtr load(const std::string& path) {
  ParseResult r = parse(slurp(path));
  if (r.ok()) return r.term;
  std::string msg;
  for (const auto& d : r.diagnostics) {
    if (!msg.empty()) msg += '\n';
    msg += path + ":" + d.to_string();
  }
  throw UsageError{msg};
}

std::unique_ptr<InputSource> inputs(const Flags& f) {
  if (f.inputs.empty() && f.input_file.empty()) {
    if (isatty(STDIN_FILENO)) return std::make_unique<StreamInput>(std::cin, &std::cerr);
    return std::make_unique<ScriptedInput>();
  }
  std::vector<Integer> values;
  for (const auto* text : {&f.inputs, &f.input_file}) {
    if (text->empty()) continue;
    std::string src = text == &f.input_file ? slurp(*text) : *text;
    auto parsed = parse_integer_list(src);
    if (!parsed) {
      throw UsageError{text == &f.input_file ? "'" + f.input_file + "' does not hold a list of integers"
                                             : "--input expects comma-separated integers"};
    }
    values.insert(values.end(), parsed->begin(), parsed->end());
  }
  return std::make_unique<ScriptedInput>(std::move(values));
}

int exit_code(const ProgramOutcome& o) {
  switch (o.status) {
    case ProgramStatus::Terminated: return kExitTerminated;
    case ProgramStatus::ProgramError: return kExitProgramError;
    case ProgramStatus::BudgetExhausted: return kExitBudget;
    case ProgramStatus::InputExhausted: return kExitInput;
    case ProgramStatus::LimitExceeded: return kExitLimit;
  }
  return kExitProgramError;
}

void print_outcome_text(const ProgramOutcome& o) {
  std::cout << "status: " << to_string(o.status) << '\n';
  if (auto r = o.program_rule()) std::cout << "rule: " << rule_name(*r) << '\n';
  if (o.cause) std::cout << "cause: " << to_string(*o.cause) << '\n';
  if (o.error_rule) std::cout << "error rule: " << rule_name(*o.error_rule) << '\n';
  if (!o.detail.empty()) std::cout << "detail: " << o.detail << '\n';
  std::cout << "steps: " << o.steps << '\n';
  std::cout << "actions: [";
  bool first = true;
  for (const auto& a : o.observable_actions()) {
    std::cout << (first ? "" : ", ") << to_string(a);
    first = false;
  }
  std::cout << "]\n";
}

int cmd_run(const Flags& f) {
  TermPtr program = load(f.file);
  auto in = inputs(f);
  RunOptions opts;
  opts.max_steps = f.max_steps;
  RunReport r = run(program, *in, opts);
  if (f.format == "structured") {
    std::cout << to_json(r.outcome).dump() << '\n';
  } else {
    print_outcome_text(r.outcome);
  }
  return exit_code(r.outcome);
}

int cmd_trace(const Flags& f) {
  TermPtr program = load(f.file);
  auto in = inputs(f);
  RunOptions opts;
  opts.max_steps = f.max_steps;
  RunReport r = trace(program, *in, opts);
  const auto& o = r.outcome;

  if (f.rules_only) {
    for (const auto& e : r.trace) std::cout << e.rule_path() << '\n';
    auto rule = o.program_rule();
    std::cout << (rule && o.status != ProgramStatus::BudgetExhausted ? rule_name(*rule) : to_string(o.status))
              << '\n';
  } else if (f.format == "structured") {
    for (const auto& e : r.trace) std::cout << to_json(e).dump() << '\n';
    std::cout << nlohmann::json{{"outcome", to_json(o)}}.dump() << '\n';
  } else {
    for (const auto& e : r.trace) std::cout << to_string(e) << '\n';
    print_outcome_text(o);
  }
  return exit_code(o);
}

int cmd_check(const Flags& f) {
  load(f.file);
  if (f.format == "structured") {
    std::cout << nlohmann::json{{"file", f.file}, {"ok", true}}.dump() << '\n';
  } else {
    std::cout << f.file << ": ok\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run, trace or check programs of the effectful verification calculus."};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* cmd, bool running) {
    cmd->add_option("file", f.file, "program file")->required();
    cmd->add_option("--format", f.format, "text or structured")
        ->check(CLI::IsMember({"text", "structured"}));
    if (!running) return;
    cmd->add_option("--input", f.inputs, "comma-separated integers for 'in'");
    cmd->add_option("--input-file", f.input_file, "file of integers for 'in'");
    cmd->add_option("--max-steps", f.max_steps, "step budget (default: ALEPH_MAX_STEPS or 1000000)");
  };

  auto* run = app.add_subcommand("run", "run a program and print its outcome");
  add_common(run, true);
  auto* trace = app.add_subcommand("trace", "print every step of a run");
  add_common(trace, true);
  trace->add_flag("--rules-only", f.rules_only, "one rule path per step, then the program rule");
  auto* check = app.add_subcommand("check", "parse and check well-formedness only");
  add_common(check, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(f);
    if (*trace) return cmd_trace(f);
    return cmd_check(f);
  } catch (const UsageError& e) {
    std::cerr << "aleph: " << e.message << '\n';
    return kExitUsage;
  }
}
