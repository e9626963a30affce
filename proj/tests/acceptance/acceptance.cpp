// Acceptance checks. One [PASS]/[FAIL] line per criterion; exit status is
// the number of failures.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aleph/effects.hpp"
#include "aleph/frontend.hpp"
#include "aleph/guards.hpp"
#include "aleph/runner.hpp"
#include "aleph/term_utils.hpp"
#include "fixtures.hpp"
#include "generator.hpp"

namespace {

using namespace aleph;
using aleph::testing::Fixture;

const std::string kTests = ALEPH_TEST_DIR;
constexpr std::uint64_t kCorpusBudget = 5000;

int failures = 0;

void report(int n, const std::string& what, bool ok, const std::string& detail) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << n << ". " << what << ": " << detail << std::endl;
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double s) {
  std::ostringstream ss;
  ss.precision(3);
  ss << std::fixed << s << " s";
  return ss.str();
}

struct Program {
  std::string name;
  TermPtr term;
  std::vector<Integer> inputs;
};

std::vector<Program> load_dir(const std::string& dir) {
  std::vector<Program> out;
  for (const auto& path : aleph::testing::list_programs(dir)) {
    std::string text = aleph::testing::read_file(path);
    ParseResult r = parse(text);
    if (!r.ok()) throw std::runtime_error(path + ": " + r.diagnostics.front().to_string());
    out.push_back({path.substr(path.rfind('/') + 1), r.term, aleph::testing::declared_inputs(text)});
  }
  return out;
}

Program load_one(const std::string& path) {
  std::string text = aleph::testing::read_file(path);
  ParseResult r = parse(text);
  if (!r.ok()) throw std::runtime_error(path + ": " + r.diagnostics.front().to_string());
  return {path, r.term, aleph::testing::declared_inputs(text)};
}

RunReport trace_program(const Program& p, RunOptions opts = {}) {
  ScriptedInput in(p.inputs);
  return trace(p.term, in, opts);
}

std::string join(const std::vector<std::string>& v, std::size_t max = 8) {
  std::string out;
  for (std::size_t i = 0; i < v.size() && i < max; ++i) out += (i ? ", " : "") + v[i];
  if (v.size() > max) out += ", ...";
  return out;
}

// ---------------------------------------------------------------------------
// 1. Rule coverage
// ---------------------------------------------------------------------------

void rule_coverage(const std::vector<Program>& corpus) {
  auto t0 = std::chrono::steady_clock::now();
  std::set<Rule> from_corpus;
  for (const auto& p : corpus) {
    RunOptions opts;
    opts.max_steps = kCorpusBudget;
    auto counts = rule_counts(trace_program(p, opts));
    for (Rule r : all_rules()) {
      if (counts[static_cast<std::size_t>(r)]) from_corpus.insert(r);
    }
  }

  // Rules no closed source program can reach, fired from hand-built states.
  std::set<Rule> from_fixtures;
  std::vector<std::string> bad_fixtures;
  for (const Fixture& f : aleph::testing::unreachable_rule_fixtures()) {
    ScriptedInput none;
    auto o = step(f.state, none);
    std::vector<Rule> rules;
    if (auto* e = std::get_if<outcome::Error>(&o)) rules = e->rules;
    if (auto* s = std::get_if<outcome::Stepped>(&o)) rules = s->rules;
    if (std::find(rules.begin(), rules.end(), f.expected) == rules.end()) bad_fixtures.push_back(f.name);
    from_fixtures.insert(rules.begin(), rules.end());
  }

  std::vector<std::string> missing, fixture_only;
  for (Rule r : all_rules()) {
    if (from_corpus.count(r)) continue;
    if (from_fixtures.count(r)) {
      fixture_only.emplace_back(rule_name(r));
    } else {
      missing.emplace_back(rule_name(r));
    }
  }
  double secs = seconds_since(t0);
  std::size_t covered = kRuleCount - missing.size();
  bool ok = missing.empty() && bad_fixtures.empty() && corpus.size() <= 60 && secs < 5.0;
  std::string detail = std::to_string(covered) + "/" + std::to_string(kRuleCount) + " rules (" +
                       std::to_string(from_corpus.size()) + " from " + std::to_string(corpus.size()) +
                       " corpus programs, " + std::to_string(fixture_only.size()) +
                       " unreachable from source and fired from machine states: " + join(fixture_only, 20) +
                       "), " + fmt(secs);
  if (!missing.empty()) detail += "; missing: " + join(missing, 40);
  if (!bad_fixtures.empty()) detail += "; fixtures not firing their rule: " + join(bad_fixtures);
  report(1, "rule coverage", ok, detail);
}

// ---------------------------------------------------------------------------
// 2 and 3. Monotonicity and unique applicable rule, step by step
// ---------------------------------------------------------------------------

struct StepStats {
  std::uint64_t steps = 0;   // observed transitions M1 -a-> M2
  std::uint64_t states = 0;  // states checked against the guards, terminal ones included
  std::uint64_t programs = 0;
  std::vector<std::string> monotonicity;
  std::vector<std::string> uniqueness;
  std::vector<std::string> io_in_condition;
};

bool same_type(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  return a && b && structurally_equal(*a, *b);
}

// The four clauses, checked directly on the heaps.
std::optional<std::string> monotone(const MachineState& m1, const MachineState& m2) {
  for (const auto& [hl, h] : m1.heads) {
    auto it = m2.heads.find(hl);
    if (it == m2.heads.end()) return "head " + label_string(hl) + " disappeared";
    if (!structurally_equal(h, it->second)) return "head " + label_string(hl) + " changed";
  }
  for (const auto& [pl, cell] : m1.pointers) {
    auto it = m2.pointers.find(pl);
    if (it == m2.pointers.end()) return "pointer " + label_string(pl) + " disappeared";
    if (!(cell.env == it->second.env)) return "environment of " + label_string(pl) + " changed";
    if (!same_type(cell.type, it->second.type)) return "type of " + label_string(pl) + " changed";
  }
  if (!(m1.env == m2.env)) return "environment changed";
  if (m1.allowed != m2.allowed) return "allowed effects changed";
  return std::nullopt;
}

void check_steps(const std::string& name, const TermPtr& program, const std::vector<Integer>& inputs,
                 std::uint64_t budget, StepStats& st) {
  Machine m(MachineState::initial(program));
  ScriptedInput in(inputs);
  ++st.programs;
  auto where = [&](std::uint64_t k) { return name + " step " + std::to_string(k); };
  for (std::uint64_t k = 0; k <= budget; ++k) {
    MachineState before = m.state();
    ++st.states;
    if (m.terminal()) {
      Machine::Result stop;
      stop.kind = Machine::Result::Kind::Terminal;
      if (auto v = uniqueness_violation(before, stop)) st.uniqueness.push_back(where(k) + ": " + *v);
      return;
    }
    if (k == budget) return;
    Machine::Result r;
    try {
      r = m.advance(in, true);
    } catch (const InputExhausted&) {
      return;
    } catch (const LimitExceeded&) {
      return;
    }
    if (auto v = uniqueness_violation(before, r)) st.uniqueness.push_back(where(k) + ": " + *v);
    if (r.kind != Machine::Result::Kind::Stepped) return;
    ++st.steps;
    MachineState after = m.state();
    auto mine = monotone(before, after);
    auto lib = monotonicity_violation(before, after);
    if (mine) st.monotonicity.push_back(where(k) + ": " + *mine);
    if (mine.has_value() != lib.has_value()) {
      st.monotonicity.push_back(where(k) + ": library check disagrees (" + lib.value_or("none") + ")");
    }
    bool io = r.action.kind == Action::Kind::In || r.action.kind == Action::Kind::Out;
    if (io && std::find(r.rules.begin(), r.rules.end(), Rule::RGif2) != r.rules.end()) {
      st.io_in_condition.push_back(where(k));
    }
  }
}

StepStats theorem_runs(const std::vector<Program>& corpus, const std::vector<Program>& goldens) {
  StepStats st;
  for (const auto& p : corpus) check_steps(p.name, p.term, p.inputs, kCorpusBudget / 5, st);
  for (const auto& p : goldens) check_steps(p.name, p.term, p.inputs, kCorpusBudget, st);
  for (const auto& f : aleph::testing::unreachable_rule_fixtures()) {
    // Fixtures are not programs; only the guard check applies.
    ScriptedInput none;
    Machine m(f.state);
    auto r = m.advance(none, true);
    ++st.states;
    if (auto v = uniqueness_violation(f.state, r)) st.uniqueness.push_back(f.name + ": " + *v);
  }
  std::mt19937_64 rng(20240611);
  aleph::testing::GenOptions runnable;
  runnable.runnable = true;
  runnable.max_depth = 5;
  for (int i = 0; i < 1500; ++i) {
    check_steps("runnable #" + std::to_string(i), aleph::testing::random_term(rng, runnable),
                aleph::testing::random_inputs(rng), 2000, st);
  }
  aleph::testing::GenOptions any;
  for (int i = 0; i < 1500; ++i) {
    check_steps("random #" + std::to_string(i), aleph::testing::random_term(rng, any),
                aleph::testing::random_inputs(rng), 2000, st);
  }
  return st;
}

// ---------------------------------------------------------------------------
// 4. Determinism of canonical traces
// ---------------------------------------------------------------------------

std::string canonical_trace(const Program& p, std::uint64_t label_base) {
  RunOptions opts;
  opts.max_steps = kCorpusBudget;
  opts.canonical = true;
  opts.label_base = label_base;
  auto r = trace_program(p, opts);
  std::string out;
  for (const auto& e : r.trace) out += to_json(e).dump() + "\n";
  return out + to_json(r.outcome).dump() + "\n";
}

void determinism(const std::vector<Program>& corpus) {
  std::vector<std::string> diffs;
  std::size_t bytes = 0;
  for (const auto& p : corpus) {
    std::string a = canonical_trace(p, 0);
    std::string b = canonical_trace(p, 0);
    std::string c = canonical_trace(p, 1000);
    bytes += a.size();
    if (a != b) diffs.push_back(p.name + " (repeat)");
    if (a != c) diffs.push_back(p.name + " (label offset)");
  }
  report(4, "program determinism", diffs.empty(),
         std::to_string(corpus.size()) + " programs traced three times (twice from label 0, once from 1000), " +
             std::to_string(bytes) + " bytes per pass, " + std::to_string(diffs.size()) + " diffs" +
             (diffs.empty() ? "" : ": " + join(diffs)));
}

// ---------------------------------------------------------------------------
// 5 and 6. Goldens
// ---------------------------------------------------------------------------

std::vector<std::string> golden_lines(const RunReport& r) {
  std::vector<std::string> out;
  for (const auto& e : r.trace) {
    std::string action = e.kind == TraceEntry::Kind::Step    ? to_string(e.action)
                         : e.kind == TraceEntry::Kind::Fail ? "F"
                                                            : "E";
    out.push_back(std::to_string(e.step) + " " + e.rule_path() + " " + action + " " +
                  std::to_string(e.head_count) + " " + std::to_string(e.ptr_count));
  }
  auto rule = r.outcome.program_rule();
  out.push_back(rule ? std::string(rule_name(*rule)) : std::string(to_string(r.outcome.status)));
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(aleph::testing::read_file(path));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string first_difference(const std::vector<std::string>& want, const std::vector<std::string>& got) {
  for (std::size_t i = 0; i < std::max(want.size(), got.size()); ++i) {
    std::string w = i < want.size() ? want[i] : "<end>";
    std::string g = i < got.size() ? got[i] : "<end>";
    if (w != g) return "line " + std::to_string(i + 1) + ": expected '" + w + "', got '" + g + "'";
  }
  return "";
}

void rollback() {
  Program p = load_one(kTests + "/golden/rollback.aleph");
  auto r = trace_program(p);
  auto want = read_lines(kTests + "/golden/rollback.golden");
  std::string diff = first_difference(want, golden_lines(r));

  // Look at the heap right after the failed condition.
  Machine m(MachineState::initial(p.term));
  ScriptedInput none;
  bool rolled_back = false, kept = false;
  for (int k = 0; k < 100; ++k) {
    auto res = m.advance(none, true);
    if (res.kind != Machine::Result::Kind::Stepped) break;
    if (std::find(res.rules.begin(), res.rules.end(), Rule::RGif3) == res.rules.end()) continue;
    // p was allocated first, q second.
    const PointerCell* cp = lookup(m.pointers(), PointerLabel{0});
    const Head* contents = cp ? lookup(m.heads(), cp->contents) : nullptr;
    const auto* i = contents ? std::get_if<IntHead>(contents) : nullptr;
    rolled_back = i && i->value == 1;
    kept = lookup(m.pointers(), PointerLabel{1}) != nullptr;
    break;
  }
  std::vector<std::string> obs;
  for (const auto& a : r.outcome.observable_actions()) obs.push_back(to_string(a));
  bool ok = diff.empty() && rolled_back && kept && r.outcome.status == ProgramStatus::Terminated;
  report(5, "rollback", ok,
         std::to_string(r.trace.size()) + " steps match the hand-derived golden" +
             (diff.empty() ? "" : " EXCEPT " + diff) + "; after the failed condition p holds " +
             (rolled_back ? "1 again" : "the wrong value") + " and the pointer made inside the branch is " +
             (kept ? "still in the heap" : "gone") + "; actions [" + join(obs) + "]");
}

void cyclic() {
  Program p = load_one(kTests + "/golden/cyclic.aleph");
  auto r = trace_program(p);
  auto want = read_lines(kTests + "/golden/cyclic.golden");
  std::string diff = first_difference(want, golden_lines(r));

  std::size_t descents = 0, max_heads = 0;
  for (const auto& e : r.trace) {
    for (Rule x : e.rules) descents += x == Rule::RThltab1;
    if (std::find(e.rules.begin(), e.rules.end(), Rule::RThltab1) != e.rules.end()) {
      max_heads = std::max(max_heads, e.head_count);
    }
  }
  // Each descent adds a new pair of head labels to the assumed equalities.
  std::size_t bound = max_heads * max_heads;
  bool ok = diff.empty() && r.outcome.status == ProgramStatus::Terminated && descents <= bound && descents == 2;
  report(6, "cycle-safe testing", ok,
         "terminated after " + std::to_string(r.outcome.steps) + " steps with " + std::to_string(descents) +
             " table descents (hand count 2, bound " + std::to_string(max_heads) + "^2 = " + std::to_string(bound) +
             ")" + (diff.empty() ? ", golden matches" : "; golden differs at " + diff));
}

// ---------------------------------------------------------------------------
// 7. Effects lattice
// ---------------------------------------------------------------------------

void effects_lattice() {
  auto t0 = std::chrono::steady_clock::now();
  const std::array<const char*, 5> names{"P", "N", "R", "W", "IO"};
  // Effects as plain sets of atom names, built from the printed form.
  auto as_set = [](Effect e) {
    std::set<std::string> s;
    if (e == Effect::all()) return std::set<std::string>{"P", "N", "R", "W", "IO"};
    std::string text = to_string(e);
    if (text == "T") return s;
    std::string atom;
    for (char c : text.substr(1)) {
      if (c == ',' || c == '}') {
        s.insert(atom);
        atom.clear();
      } else {
        atom += c;
      }
    }
    return s;
  };
  std::vector<Effect> all;
  std::vector<std::set<std::string>> sets;
  for (unsigned b = 0; b < 32; ++b) {
    all.push_back(Effect(static_cast<std::uint8_t>(b)));
    sets.push_back(as_set(all.back()));
  }
  std::size_t bad = 0, pairs = 0;
  std::string first;
  auto fail = [&](const std::string& what) {
    if (!bad++) first = what;
  };
  for (std::size_t i = 0; i < 32; ++i) {
    // Round trip through the printed form.
    if (parse_effect(to_string(all[i])) != all[i]) fail("parse(print) " + to_string(all[i]));
    std::size_t atoms = 0;
    for (auto n : names) atoms += sets[i].count(n);
    if (atoms != sets[i].size()) fail("unknown atom in " + to_string(all[i]));
    for (std::size_t j = 0; j < 32; ++j) {
      ++pairs;
      Effect a = all[i], b = all[j];
      const auto &sa = sets[i], &sb = sets[j];
      std::set<std::string> u, n;
      std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(u, u.end()));
      std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::inserter(n, n.end()));
      bool sub = std::includes(sb.begin(), sb.end(), sa.begin(), sa.end());
      std::string pair = to_string(a) + ", " + to_string(b);
      if (effect_leq(a, b) != sub) fail("leq " + pair);
      if (as_set(effect_join(a, b)) != u) fail("join " + pair);
      if (as_set(effect_meet(a, b)) != n) fail("meet " + pair);
      if (effect_seq(a, b) != effect_join(a, b)) fail("seq " + pair);
      if (effect_join(a, b) != effect_join(b, a) || effect_meet(a, b) != effect_meet(b, a)) fail("commutativity " + pair);
      if (effect_join(a, effect_meet(a, b)) != a || effect_meet(a, effect_join(a, b)) != a) fail("absorption " + pair);
      if (effect_leq(a, b) != (effect_join(a, b) == b) || effect_leq(a, b) != (effect_meet(a, b) == a)) {
        fail("order/join/meet consistency " + pair);
      }
      if (effect_leq(a, b) && effect_leq(b, a) && a != b) fail("antisymmetry " + pair);
      for (std::size_t k = 0; k < 32; ++k) {
        Effect c = all[k];
        if (effect_leq(a, b) && effect_leq(b, c) && !effect_leq(a, c)) fail("transitivity");
        if (effect_join(effect_join(a, b), c) != effect_join(a, effect_join(b, c))) fail("join associativity");
        if (effect_meet(effect_meet(a, b), c) != effect_meet(a, effect_meet(b, c))) fail("meet associativity");
        if (effect_leq(a, c) && effect_leq(b, c) && !effect_leq(effect_join(a, b), c)) fail("join not least");
        if (effect_leq(c, a) && effect_leq(c, b) && !effect_leq(c, effect_meet(a, b))) fail("meet not greatest");
      }
    }
    if (!effect_leq(Effect::none(), all[i]) || !effect_leq(all[i], Effect::all())) fail("bounds");
  }
  report(7, "effects lattice", bad == 0,
         std::to_string(pairs) + " pairs (and all triples) against a set-of-atoms model, " + std::to_string(bad) +
             " failures" + (first.empty() ? "" : ", first: " + first) + ", " + fmt(seconds_since(t0)));
}

// ---------------------------------------------------------------------------
// 8. Frontend round trip
// ---------------------------------------------------------------------------

void round_trip() {
  std::mt19937_64 rng(7);
  const int n = 2000;
  int bad = 0;
  std::string first;
  for (int i = 0; i < n; ++i) {
    aleph::testing::GenOptions opts;
    opts.max_depth = 2 + static_cast<int>(rng() % 5);
    TermPtr t = aleph::testing::random_term(rng, opts);
    if (!well_formed_source(*t).empty()) {
      ++bad;
      if (first.empty()) first = "generator produced an ill-formed term: " + print_flat(*t);
      continue;
    }
    std::size_t width = 20 + rng() % 100;
    for (const std::string& text : {print(*t, width), print_flat(*t)}) {
      ParseResult r = parse(text);
      if (!r.ok() || !alpha_equal(*t, *r.term)) {
        ++bad;
        if (first.empty()) {
          first = text + (r.ok() ? " (not alpha-equal)" : " (" + r.diagnostics.front().to_string() + ")");
        }
        break;
      }
    }
  }
  report(8, "frontend round trip", bad == 0,
         std::to_string(n) + " random well-formed terms, pretty and flat, " + std::to_string(bad) + " failures" +
             (first.empty() ? "" : ", first: " + first));
}

// ---------------------------------------------------------------------------
// 9. Effect gating
// ---------------------------------------------------------------------------

void effect_gating(const StepStats& st) {
  std::mt19937_64 rng(99);
  const int n = 1000;
  int io_actions = 0, wrong_outcome = 0, in_errors = 0, out_errors = 0;
  std::string first;
  for (int i = 0; i < n; ++i) {
    TermPtr t = aleph::testing::random_gated_io_program(rng);
    ScriptedInput in(aleph::testing::random_inputs(rng));
    auto r = trace(t, in);
    for (const auto& a : r.outcome.actions) {
      if (a.kind == Action::Kind::In || a.kind == Action::Kind::Out) {
        ++io_actions;
        if (first.empty()) first = print_flat(*t);
        break;
      }
    }
    auto er = r.outcome.error_rule;
    if (er == Rule::RGinE) {
      ++in_errors;
    } else if (er == Rule::RGoutE) {
      ++out_errors;
    } else {
      ++wrong_outcome;
      if (first.empty()) first = print_flat(*t) + " -> " + to_string(r.outcome);
    }
  }
  // Control: the same shapes without the gate must perform IO.
  int control_io = 0;
  const int controls = 200;
  for (int i = 0; i < controls; ++i) {
    TermPtr t = aleph::testing::random_ungated_io_program(rng);
    ScriptedInput in(aleph::testing::random_inputs(rng));
    auto r = run(t, in);
    for (const auto& a : r.outcome.actions) {
      if (a.kind == Action::Kind::In || a.kind == Action::Kind::Out) {
        ++control_io;
        break;
      }
    }
  }
  bool ok = io_actions == 0 && wrong_outcome == 0 && control_io == controls && st.io_in_condition.empty();
  report(9, "effect gating", ok,
         std::to_string(n) + " programs with IO in conditions or invariant domains: " + std::to_string(io_actions) +
             " performed IO, " + std::to_string(in_errors) + " RGinE, " + std::to_string(out_errors) + " RGoutE, " +
             std::to_string(wrong_outcome) + " other outcomes; " + std::to_string(control_io) + "/" +
             std::to_string(controls) + " ungated controls performed IO; " +
             std::to_string(st.io_in_condition.size()) + " IO steps inside conditions over the criterion 2 runs" +
             (first.empty() ? "" : "; first offender: " + first));
}

}  // namespace

int main() {
  try {
    auto corpus = load_dir(kTests + "/corpus");
    std::vector<Program> goldens = load_dir(kTests + "/golden");

    rule_coverage(corpus);

    auto t0 = std::chrono::steady_clock::now();
    StepStats st = theorem_runs(corpus, goldens);
    std::string runs = std::to_string(st.programs) + " programs (" + std::to_string(corpus.size()) +
                       " corpus, " + std::to_string(goldens.size()) + " golden, the rest random), ";
    report(2, "heap monotonicity", st.steps >= 10000 && st.monotonicity.empty(),
           runs + std::to_string(st.steps) + " steps, " + std::to_string(st.monotonicity.size()) + " violations" +
               (st.monotonicity.empty() ? "" : ": " + join(st.monotonicity, 3)) + ", " + fmt(seconds_since(t0)));
    report(3, "unique applicable rule", st.steps >= 10000 && st.uniqueness.empty(),
           std::to_string(st.states) + " states checked against the rule guards over the same runs plus " +
               std::to_string(aleph::testing::unreachable_rule_fixtures().size()) + " fixtures, " +
               std::to_string(st.uniqueness.size()) + " violations" +
               (st.uniqueness.empty() ? "" : ": " + join(st.uniqueness, 3)));

    determinism(corpus);
    rollback();
    cyclic();
    effects_lattice();
    round_trip();
    effect_gating(st);
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance harness: " << e.what() << std::endl;
    return 1;
  }
  return failures;
}
