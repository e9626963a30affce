#include <doctest.h>

#include <cstdlib>
#include <random>

#include <nlohmann/json.hpp>

#include "aleph/frontend.hpp"
#include "aleph/runner.hpp"
#include "fixtures.hpp"
#include "generator.hpp"

using namespace aleph;

namespace {

const std::string kTests = ALEPH_TEST_DIR;

TermPtr program(std::string_view text) {
  ParseResult r = parse(text);
  REQUIRE_MESSAGE(r.ok(), text);
  return r.term;
}

RunReport run_text(std::string_view text, std::vector<Integer> inputs = {}, RunOptions opts = {}) {
  ScriptedInput in(std::move(inputs));
  return run(program(text), in, opts);
}

RunReport trace_text(std::string_view text, std::vector<Integer> inputs = {}, RunOptions opts = {}) {
  ScriptedInput in(std::move(inputs));
  return trace(program(text), in, opts);
}

std::vector<std::string> paths(const RunReport& r) {
  std::vector<std::string> out;
  for (const auto& e : r.trace) out.push_back(e.rule_path());
  return out;
}

bool has_leaf(const RunReport& r, Rule rule) {
  for (const auto& e : r.trace) {
    for (Rule x : e.rules) {
      if (x == rule) return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("run: outcomes") {
  SUBCASE("empty table") {
    auto r = run_text("(table)");
    CHECK(r.outcome.status == ProgramStatus::Terminated);
    CHECK(r.outcome.program_rule() == Rule::RP1);
    CHECK(r.outcome.actions == std::vector<Action>{Action::pure()});
    CHECK(r.outcome.observable_actions().empty());
  }
  SUBCASE("integer result") {
    auto r = run_text("5");
    CHECK(r.outcome.status == ProgramStatus::ProgramError);
    CHECK(r.outcome.cause == ErrorCause::NonEmptyTableResult);
    CHECK(r.outcome.program_rule() == Rule::RPE1);
  }
  SUBCASE("failure") {
    auto r = run_text("falses");
    CHECK(r.outcome.cause == ErrorCause::ToplevelFailure);
    CHECK(r.outcome.program_rule() == Rule::RPE2);
    CHECK(r.outcome.steps == 0);
  }
  SUBCASE("machine error") {
    auto r = run_text("(bop add 1 (table))");
    CHECK(r.outcome.cause == ErrorCause::MachineError);
    CHECK(r.outcome.error_rule == Rule::RGbopE);
    CHECK(r.outcome.program_rule() == Rule::RPE3);
    CHECK_FALSE(r.outcome.detail.empty());
  }
  SUBCASE("output then an empty table") {
    auto r = run_text("(let x (out 7) (table))");
    CHECK(r.outcome.status == ProgramStatus::Terminated);
    CHECK(r.outcome.observable_actions() == std::vector<Action>{Action::out(7)});
  }
  SUBCASE("self-applying loop") {
    RunOptions opts;
    opts.max_steps = 1000;
    auto r = run_text(aleph::testing::read_file(kTests + "/corpus/loop.aleph"), {}, opts);
    CHECK(r.outcome.status == ProgramStatus::BudgetExhausted);
    CHECK(r.outcome.steps == 1000);
    CHECK(r.outcome.program_rule() == Rule::RP2);
    CHECK(r.outcome.actions.size() == 1000);
  }
  SUBCASE("input runs out") {
    auto r = run_text("(let a in (let b in (table)))", {1});
    CHECK(r.outcome.status == ProgramStatus::InputExhausted);
    CHECK_FALSE(r.outcome.program_rule());
    CHECK(r.outcome.observable_actions() == std::vector<Action>{Action::in(1)});
  }
  SUBCASE("implementation limit") {
    auto r = run_text("(let a (arr 99999999999999999999 i i) (table))");
    CHECK(r.outcome.status == ProgramStatus::LimitExceeded);
    CHECK_FALSE(r.outcome.program_rule());
    CHECK(r.outcome.detail.find("exceeds the limit") != std::string::npos);
  }
}

TEST_CASE("trace: entries") {
  SUBCASE("integer literal") {
    auto r = trace_text("5");
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].step == 0);
    CHECK(r.trace[0].rule_path() == "RGi");
    CHECK(r.trace[0].action == Action::pure());
    CHECK(r.trace[0].head_count == 1);
    CHECK(r.trace[0].term == "#0");
  }
  SUBCASE("unify with ints") {
    auto r = trace_text("(unify 5 ints)");
    auto p = paths(r);
    auto unify = std::find(p.begin(), p.end(), "RGunify");
    REQUIRE(unify != p.end());
    CHECK(std::find(unify, p.end(), "RTints1") != p.end());
  }
  SUBCASE("failing condition") {
    auto r = trace_text("(if x falses (table) (table))");
    auto p = paths(r);
    CHECK(p.front() == "RGif");
    CHECK(has_leaf(r, Rule::RGif3));
    CHECK(r.outcome.status == ProgramStatus::Terminated);
  }
  SUBCASE("falses") {
    auto r = trace_text("falses");
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].kind == TraceEntry::Kind::Fail);
    CHECK(r.trace[0].rule_path() == "RGfalsesF");
  }
  SUBCASE("zero budget") {
    RunOptions opts;
    opts.max_steps = 0;
    auto r = trace_text("(table)", {}, opts);
    CHECK(r.trace.empty());
    CHECK(r.outcome.status == ProgramStatus::BudgetExhausted);
  }
  SUBCASE("error entry") {
    auto r = trace_text("(let x 1 (appe x 2))");
    REQUIRE_FALSE(r.trace.empty());
    CHECK(r.trace.back().kind == TraceEntry::Kind::Error);
    CHECK(r.trace.back().rules.back() == Rule::RGappEE1);
  }
}

TEST_CASE("goldens") {
  for (const char* name : {"let_x_5", "rollback", "cyclic", "falses"}) {
    CAPTURE(name);
    std::string base = kTests + "/golden/" + name;
    std::string text = aleph::testing::read_file(base + ".aleph");
    auto r = trace_text(text, aleph::testing::declared_inputs(text));
    std::string got;
    for (const auto& e : r.trace) got += e.rule_path() + "\n";
    got += std::string(rule_name(*r.outcome.program_rule())) + "\n";
    CHECK(got == aleph::testing::read_file(base + ".rules"));
  }
}

TEST_CASE("run and trace agree; traces are prefix-stable") {
  std::mt19937_64 rng(11);
  aleph::testing::GenOptions opts;
  opts.runnable = true;
  for (int i = 0; i < 150; ++i) {
    auto t = aleph::testing::random_term(rng, opts);
    auto inputs = aleph::testing::random_inputs(rng);
    RunOptions small, big;
    small.max_steps = 20;
    big.max_steps = 400;
    ScriptedInput a(inputs), b(inputs), c(inputs);
    auto r = run(t, a, big);
    auto tr = trace(t, b, big);
    auto shorter = trace(t, c, small);
    CHECK(to_json(r.outcome) == to_json(tr.outcome));
    CHECK(r.outcome.actions == tr.outcome.actions);
    REQUIRE(shorter.trace.size() <= tr.trace.size());
    for (std::size_t k = 0; k < shorter.trace.size(); ++k) {
      CHECK(to_json(shorter.trace[k]) == to_json(tr.trace[k]));
    }
    for (std::size_t k = 1; k < tr.trace.size(); ++k) {
      CHECK(tr.trace[k].step > tr.trace[k - 1].step);
      CHECK(tr.trace[k].head_count >= tr.trace[k - 1].head_count);
      CHECK(tr.trace[k].ptr_count >= tr.trace[k - 1].ptr_count);
    }
  }
}

TEST_CASE("inputs are consumed in order") {
  auto r = run_text("(let a in (let b in (let c (out (bop sub a b)) (table))))", {10, 3, 99});
  CHECK(r.outcome.observable_actions() ==
        std::vector<Action>{Action::in(10), Action::in(3), Action::out(7)});
}

TEST_CASE("theorem checks during a run") {
  RunOptions opts;
  opts.check_theorems = true;
  for (const auto& path : aleph::testing::list_programs(kTests + "/corpus")) {
    CAPTURE(path);
    std::string text = aleph::testing::read_file(path);
    opts.max_steps = 300;
    auto r = run_text(text, aleph::testing::declared_inputs(text), opts);
    CHECK(r.violations.empty());
    CHECK(r.checked_steps > 0);
  }
}

TEST_CASE("canonical traces do not depend on the label base") {
  std::string text = aleph::testing::read_file(kTests + "/golden/cyclic.aleph");
  RunOptions a, b;
  a.canonical = b.canonical = true;
  b.label_base = 500;
  auto ra = trace_text(text, {}, a);
  auto rb = trace_text(text, {}, b);
  REQUIRE(ra.trace.size() == rb.trace.size());
  for (std::size_t k = 0; k < ra.trace.size(); ++k) CHECK(to_json(ra.trace[k]) == to_json(rb.trace[k]));

  RunOptions raw;
  raw.label_base = 500;
  auto rc = trace_text(text, {}, raw);
  CHECK(rc.trace.back().term != ra.trace.back().term);
}

TEST_CASE("serialization") {
  auto r = trace_text("(let x in (out x))", {4});
  auto j = to_json(r.outcome);
  CHECK(j["status"] == "ProgramError");
  CHECK(j["programRule"] == "RPE1");
  CHECK(j["cause"] == "NonEmptyTableResult");
  CHECK(j["actions"] == nlohmann::json::array({"in 4", "out 4"}));
  CHECK(j["steps"] == r.outcome.steps);

  auto e = to_json(r.trace[0]);
  for (const char* k : {"step", "kind", "rule", "action", "termSummary", "headCount", "ptrCount"}) {
    CHECK(e.contains(k));
  }
  CHECK(e["rule"] == "RGctxt/RGin");
  CHECK(e["action"] == "in 4");

  auto line = to_string(r.trace[0]);
  CHECK(line.rfind("0 step RGctxt/RGin in 4 hh=0 ph=0 | (let x 4 (out x))", 0) == 0);
  CHECK(to_string(r.outcome).rfind("ProgramError (RPE1)", 0) == 0);
}

TEST_CASE("default step budget") {
  unsetenv("ALEPH_MAX_STEPS");
  CHECK(default_max_steps() == 1'000'000);
  setenv("ALEPH_MAX_STEPS", "250", 1);
  CHECK(default_max_steps() == 250);
  setenv("ALEPH_MAX_STEPS", "lots", 1);
  CHECK(default_max_steps() == 1'000'000);
  unsetenv("ALEPH_MAX_STEPS");
}

TEST_CASE("rule_counts") {
  auto r = trace_text("(let x 5 x)");
  auto counts = rule_counts(r);
  CHECK(counts[static_cast<std::size_t>(Rule::RGi)] == 1);
  CHECK(counts[static_cast<std::size_t>(Rule::RGlet)] == 1);
  CHECK(counts[static_cast<std::size_t>(Rule::RPE1)] == 1);
  CHECK(counts[static_cast<std::size_t>(Rule::RP1)] == 0);
}
