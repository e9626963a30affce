#include <array>
#include <cstdint>
#include <iterator>

#include "aleph/frontend.hpp"
#include "aleph/machine.hpp"
#include "aleph/overloaded.hpp"
#include "sexpr.hpp"

namespace aleph {

namespace {

using namespace node;
using sexpr::Node;

// Nodes still allowed before build() elides the rest of a term; summaries
// of deep terms must not pay for the whole tree.
thread_local std::size_t budget = SIZE_MAX;

Node atom(std::string s) { return Node::make_atom(std::move(s)); }
Node list(std::vector<Node> items) { return Node::make_list(std::move(items)); }
template <std::size_t N>
Node list(Node (&&items)[N]) {
  return Node::make_list({std::make_move_iterator(items), std::make_move_iterator(items + N)});
}

Node fx(Effect e) { return atom(to_string(e)); }
Node num(const Integer& i) { return atom(i.str()); }
Node hl(HeadLabel l) { return atom(label_string(l)); }

Node build(const Term& t);
Node build(const TermPtr& t) { return t ? build(*t) : atom("<null>"); }

Node build_fun(const Fun& f) {
  return std::visit(overloaded{
                        [](const Lambda& l) {
                          return list({atom("fun"), atom(l.param), build(l.domain), atom(to_string(l.dk)),
                                       fx(l.dom_effects), fx(l.range_effects), build(l.body)});
                        },
                        [](const AllQuant& a) {
                          return list({atom("funall"), atom(a.type_var), build(a.type_domain),
                                       build(a.instantiation), atom(a.param), build(a.domain),
                                       fx(a.dom_effects), fx(a.range_effects), build(a.body)});
                        },
                    },
                    f);
}

Node build_value(const SourceValue& v) {
  return std::visit(overloaded{
                        [](const TupleValue& tv) {
                          std::vector<Node> items{atom("tuple")};
                          for (const auto& [i, x] : tv.entries) items.push_back(list({num(i), atom(x)}));
                          return list(std::move(items));
                        },
                        [](const FunValue& f) { return build_fun(f.fun); },
                        [](const PtrValue& p) { return list({atom("new"), build(p.type), atom(p.init)}); },
                    },
                    v);
}

Node build_env(const Environment& env) {
  std::vector<Node> items{atom("env")};
  for (const auto& [x, l] : env) items.push_back(list({atom(x), hl(l)}));
  return list(std::move(items));
}

Node build(const Term& t) {
  if (budget == 0) return atom("...");
  --budget;
  return std::visit(
      overloaded{
          [](const Variable& x) { return atom(x.name); },
          [](const Falses&) { return atom("falses"); },
          [](const Anys&) { return atom("anys"); },
          [](const IntLit& x) { return num(x.value); },
          [](const Ints&) { return atom("ints"); },
          [](const Unary& x) { return list({atom("uop"), atom(to_string(x.op)), build(x.operand)}); },
          [](const Binary& x) {
            return list({atom("bop"), atom(to_string(x.op)), build(x.lhs), build(x.rhs)});
          },
          [](const Compare& x) {
            return list({atom("cop"), atom(to_string(x.op)), build(x.lhs), build(x.rhs)});
          },
          [](const FixedTable& x) {
            std::vector<Node> items{atom("table")};
            for (const auto& e : x.entries) items.push_back(list({atom(e.var), num(e.index), build(e.term)}));
            return list(std::move(items));
          },
          [](const ArrayLambda& x) {
            return list({atom("arr"), build(x.length), atom(x.index_var), build(x.body)});
          },
          [](const Tabs&) { return atom("tabs"); },
          [](const FunTerm& x) { return build_fun(x.fun); },
          [](const Funs&) { return atom("funs"); },
          [](const Length& x) { return list({atom("len"), build(x.operand)}); },
          [](const AppErr& x) { return list({atom("appe"), build(x.fn), build(x.arg)}); },
          [](const AppFail& x) { return list({atom("appf"), build(x.fn), build(x.arg)}); },
          [](const From& x) { return list({atom("from"), build(x.operand)}); },
          [](const PtrNew& x) { return list({atom("new"), build(x.type), build(x.init)}); },
          [](const PtrRead& x) { return list({atom("read"), build(x.ptr)}); },
          [](const PtrWrite& x) { return list({atom("write"), build(x.ptr), build(x.value)}); },
          [](const PtrTo& x) { return list({atom("ptrto"), build(x.type)}); },
          [](const Ptrs&) { return atom("ptrs"); },
          [](const Input&) { return atom("in"); },
          [](const Output& x) { return list({atom("out"), build(x.operand)}); },
          [](const Unify& x) { return list({atom("unify"), build(x.lhs), build(x.rhs)}); },
          [](const Join& x) { return list({atom("join"), build(x.lhs), build(x.rhs)}); },
          [](const Let& x) { return list({atom("let"), atom(x.var), build(x.bound), build(x.body)}); },
          [](const Letrec& x) {
            std::vector<Node> bindings;
            for (const auto& [name, v] : x.bindings) bindings.push_back(list({atom(name), build_value(v)}));
            return list({atom("letrec"), list(std::move(bindings)), build(x.body)});
          },
          [](const If& x) {
            return list({atom("if"), atom(x.var), build(x.cond), build(x.then_branch), build(x.else_branch)});
          },
          [](const Stage& x) {
            return list({atom("stage"), fx(x.effects), atom(to_string(x.decidability)), build(x.lhs),
                         build(x.rhs)});
          },
          [](const FxThen& x) { return list({atom("fxthen"), fx(x.effects), build(x.body)}); },
          [](const IfM& x) {
            std::vector<Node> heap{atom("heap")};
            if (x.saved) {
              for (const auto& [pl, cell] : *x.saved) {
                heap.push_back(list({atom(label_string(pl)), hl(cell.contents)}));
              }
            }
            return list({atom("ifm"), atom(x.var), build(x.cond), build(x.then_branch), list(std::move(heap)),
                         build(x.else_branch)});
          },
          [](const LabelRef& x) { return hl(x.label); },
          [](const Frame& x) { return list({atom("frame"), build_env(x.env), build(x.body), fx(x.allowed)}); },
          [](const Chk& x) {
            std::vector<Node> ae{atom("ae")};
            for (const auto& [a, b] : x.ae) ae.push_back(list({hl(a), hl(b)}));
            return list({atom("chk"), hl(x.subject), list(std::move(ae)), build(x.pattern),
                         build(x.then_branch), build(x.else_branch)});
          },
      },
      t.node());
}

constexpr std::array<std::string_view, 37> kKeywords{
    "falses", "anys",  "ints",  "tabs",  "funs",  "ptrs",   "in",     "uop",  "bop",   "cop",
    "table",  "arr",   "fun",   "funall", "len",  "appe",   "appf",   "from", "new",   "read",
    "write",  "ptrto", "out",   "unify", "join",  "let",    "letrec", "if",   "stage", "fxthen",
    "tuple",  "frame", "ifm",   "chk",   "env",   "ae",     "heap"};

}  // namespace

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords) {
    if (k == word) return true;
  }
  return false;
}

std::string print(const Term& t, std::size_t width) {
  std::string out;
  sexpr::pretty(build(t), 0, width, out);
  return out;
}

std::string print_flat(const Term& t) {
  std::string out;
  sexpr::flat(build(t), out);
  return out;
}

std::string summarize(const Term& t, std::size_t max) {
  budget = max + 1;
  std::string s;
  try {
    sexpr::flat(build(t), s);
  } catch (...) {
    budget = SIZE_MAX;
    throw;
  }
  budget = SIZE_MAX;
  if (s.size() <= max) return s;
  if (max < 3) return s.substr(0, max);
  return s.substr(0, max - 3) + "...";
}

std::string to_string(const Environment& env) {
  std::string out = "[";
  bool first = true;
  for (const auto& [x, l] : env) {
    if (!first) out += ", ";
    first = false;
    out += x + "=" + label_string(l);
  }
  return out + "]";
}

std::string to_string(const Head& h) {
  return std::visit(overloaded{
                        [](const IntHead& i) { return i.value.str(); },
                        [](const TableHead& t) {
                          std::string out = "<";
                          for (std::size_t k = 0; k < t.entries.size(); ++k) {
                            if (k) out += ", ";
                            out += t.entries[k].first.str() + ":" + label_string(t.entries[k].second);
                          }
                          return out + ">";
                        },
                        [](const Closure& c) {
                          std::string out;
                          sexpr::flat(build_fun(c.fun), out);
                          return "clos(" + to_string(c.env) + ", " + out + ")";
                        },
                        [](const PtrHead& p) { return label_string(p.label); },
                    },
                    h);
}

}  // namespace aleph
