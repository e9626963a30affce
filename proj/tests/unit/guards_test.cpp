#include <doctest.h>

#include <random>

#include "aleph/frontend.hpp"
#include "aleph/guards.hpp"
#include "fixtures.hpp"
#include "generator.hpp"

using namespace aleph;

TEST_CASE("applicable_rule") {
  MachineState m = MachineState::initial(mk::label(HeadLabel{0}));
  extend_heap(m.heads, HeadLabel{0}, TableHead{});
  CHECK_FALSE(applicable_rule(m).has_value());
  CHECK(matching_rules(m).empty());

  CHECK(applicable_rule(MachineState::initial(mk::var("x"))) == Rule::RGvarE);

  m.term = mk::unify(mk::label(HeadLabel{0}), mk::ints());
  CHECK(applicable_rule(m) == Rule::RGunify);

  CHECK(applicable_rule(MachineState::initial(mk::falses())) == Rule::RGfalsesF);
  CHECK(applicable_rule(MachineState::initial(mk::integer(3))) == Rule::RGi);
  CHECK(applicable_rule(MachineState::initial(mk::output(mk::integer(3)))) == Rule::RGctxt);
}

TEST_CASE("every fixture reaches its rule through the stepper and the guards") {
  for (const auto& f : aleph::testing::unreachable_rule_fixtures()) {
    CAPTURE(f.name);
    ScriptedInput none;
    auto o = step(f.state, none);
    REQUIRE(std::holds_alternative<outcome::Error>(o));
    const auto& e = std::get<outcome::Error>(o);
    CHECK(e.rule == f.expected);
    CHECK(applicable_rule(f.state) == e.rules.front());

    Machine m(f.state);
    auto r = m.advance(none, true);
    CHECK_FALSE(uniqueness_violation(f.state, r).has_value());
  }
}

TEST_CASE("a wrong observation is reported") {
  auto m = MachineState::initial(mk::integer(5));
  Machine::Result r;
  r.kind = Machine::Result::Kind::Stepped;
  r.rule = Rule::RGvar;
  r.rules = {Rule::RGvar};
  CHECK(uniqueness_violation(m, r).has_value());

  r.kind = Machine::Result::Kind::Fail;
  r.rules = {Rule::RGfalsesF};
  CHECK(uniqueness_violation(m, r).has_value());
}

TEST_CASE("exactly one rule along random runs") {
  std::mt19937_64 rng(99);
  aleph::testing::GenOptions opts;
  opts.runnable = true;
  int states = 0;
  for (int i = 0; i < 100; ++i) {
    auto t = aleph::testing::random_term(rng, opts);
    ScriptedInput in(aleph::testing::random_inputs(rng));
    Machine m(MachineState::initial(t));
    for (int k = 0; k < 200; ++k) {
      auto before = m.state();
      Machine::Result r;
      if (m.terminal()) {
        r.kind = Machine::Result::Kind::Terminal;
      } else {
        try {
          r = m.advance(in, true);
        } catch (const InputExhausted&) {
          break;
        } catch (const LimitExceeded&) {
          break;
        }
      }
      ++states;
      auto v = uniqueness_violation(before, r);
      CHECK_MESSAGE(!v, print_flat(*t) << ": " << v.value_or(""));
      if (r.kind != Machine::Result::Kind::Stepped) break;
    }
  }
  CHECK(states > 1000);
}
