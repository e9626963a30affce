#include "fixtures.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "aleph/frontend.hpp"

namespace aleph::testing {

namespace {

const HeadLabel k0{0};
const HeadLabel k1{1};

MachineState with_term(TermPtr t, HeadHeap hh = {}) {
  MachineState m = MachineState::initial(std::move(t));
  m.heads = std::move(hh);
  m.next_head = 2;
  return m;
}

HeadHeap one_int() { return {{k0, IntHead{5}}}; }

// chk #1 {} pattern (table) falses, with #1 not in the heap.
MachineState undefined_subject(TermPtr pattern) {
  return with_term(mk::chk(k1, {}, std::move(pattern), mk::table({}), mk::falses()), one_int());
}

}  // namespace

std::vector<Fixture> unreachable_rule_fixtures() {
  std::vector<Fixture> out;
  out.push_back({"open variable", Rule::RGvarE, MachineState::initial(mk::var("x"))});
  out.push_back({"open variable as a pattern", Rule::RTvarE,
                 with_term(mk::chk(k0, {}, mk::var("x"), mk::table({}), mk::falses()), one_int())});
  out.push_back({"tuple naming an unbound variable", Rule::RGletrecE1,
                 MachineState::initial(mk::letrec({{"a", TupleValue{{{0, "nowhere"}}}}}, mk::table({})))});
  out.push_back({"pointer value naming an unbound variable", Rule::RGletrecE1,
                 MachineState::initial(mk::letrec({{"p", PtrValue{mk::ints(), "nowhere"}}}, mk::table({})))});
  out.push_back({"appf of a table to an undefined label", Rule::RGappFE2,
                 with_term(mk::appf(mk::label(k0), mk::label(k1)), {{k0, TableHead{}}})});
  out.push_back({"appf of a closure over a ge function", Rule::RGappFE3,
                 with_term(mk::appf(mk::label(k0), mk::label(k1)),
                           {{k0, Closure{{}, Lambda{"x", mk::ints(), DomainKind::AtLeast, Effect::all(),
                                                    Effect::all(), mk::var("x")}}},
                            {k1, IntHead{1}}})});
  out.push_back({"undefined subject, integer pattern", Rule::RTiE, undefined_subject(mk::integer(5))});
  out.push_back({"undefined subject, ints", Rule::RTintsE, undefined_subject(mk::ints())});
  out.push_back({"undefined subject, table pattern", Rule::RTtabE, undefined_subject(mk::table({}))});
  out.push_back({"undefined subject, array pattern", Rule::RTarrE,
                 undefined_subject(mk::arr(mk::integer(1), "i", mk::ints()))});
  out.push_back({"undefined subject, tabs", Rule::RTtabsE, undefined_subject(mk::tabs())});
  out.push_back({"undefined subject, function pattern", Rule::RTfunE2,
                 undefined_subject(mk::lambda("x", mk::ints(), DomainKind::Contravariant, Effect::all(),
                                              Effect::all(), mk::var("x")))});
  out.push_back({"undefined subject, funs", Rule::RTfunsE, undefined_subject(mk::funs())});
  out.push_back({"undefined subject, ptrs", Rule::RTptrsE, undefined_subject(mk::ptrs())});
  out.push_back({"undefined pattern label", Rule::RThlE,
                 with_term(mk::chk(k0, {}, mk::label(k1), mk::table({}), mk::falses()), one_int())});
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Integer> declared_inputs(const std::string& text) {
  static const std::string kTag = "; input:";
  auto at = text.find(kTag);
  if (at == std::string::npos) return {};
  auto end = text.find('\n', at);
  auto list = parse_integer_list(text.substr(at + kTag.size(), end - at - kTag.size()));
  if (!list) throw std::runtime_error("bad input line: " + text.substr(at, end - at));
  return *list;
}

std::vector<std::string> list_programs(const std::string& dir) {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".aleph") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace aleph::testing
