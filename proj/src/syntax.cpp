#include "aleph/syntax.hpp"

#include <algorithm>
#include <stdexcept>

#include "aleph/overloaded.hpp"

namespace aleph {

std::optional<HeadLabel> Environment::lookup(const VarName& x) const {
  for (auto it = bindings_.rbegin(); it != bindings_.rend(); ++it) {
    if (it->first == x) return it->second;
  }
  return std::nullopt;
}

std::optional<HeadLabel> TableHead::find(const Integer& index) const {
  for (const auto& [i, hl] : entries) {
    if (i == index) return hl;
  }
  return std::nullopt;
}

void extend_heap(HeadHeap& hh, HeadLabel hl, Head h) {
  if (!hh.emplace(hl, std::move(h)).second) {
    throw std::logic_error("head heap extension is not disjoint: #" + std::to_string(hl.id));
  }
}

void extend_heap(PointerHeap& ph, PointerLabel pl, PointerCell cell) {
  if (!ph.emplace(pl, std::move(cell)).second) {
    throw std::logic_error("pointer heap extension is not disjoint: @" + std::to_string(pl.id));
  }
}

const Head* lookup(const HeadHeap& hh, HeadLabel hl) {
  auto it = hh.find(hl);
  return it == hh.end() ? nullptr : &it->second;
}

const PointerCell* lookup(const PointerHeap& ph, PointerLabel pl) {
  auto it = ph.find(pl);
  return it == ph.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Term teardown
// ---------------------------------------------------------------------------

namespace {

void take(TermPtr& p, std::vector<TermPtr>& out) {
  if (p) out.push_back(std::move(p));
}

void take_fun(Fun& f, std::vector<TermPtr>& out) {
  std::visit(overloaded{
                 [&](Lambda& l) {
                   take(l.domain, out);
                   take(l.body, out);
                 },
                 [&](AllQuant& a) {
                   take(a.type_domain, out);
                   take(a.instantiation, out);
                   take(a.domain, out);
                   take(a.body, out);
                 },
             },
             f);
}

// Moves every directly owned child term into `out`.
void take_children(Term::Node& n, std::vector<TermPtr>& out) {
  using namespace node;
  std::visit(
      overloaded{
          [&](Unary& x) { take(x.operand, out); },
          [&](Binary& x) {
            take(x.lhs, out);
            take(x.rhs, out);
          },
          [&](Compare& x) {
            take(x.lhs, out);
            take(x.rhs, out);
          },
          [&](FixedTable& x) {
            for (auto& e : x.entries) take(e.term, out);
          },
          [&](ArrayLambda& x) {
            take(x.length, out);
            take(x.body, out);
          },
          [&](FunTerm& x) { take_fun(x.fun, out); },
          [&](Length& x) { take(x.operand, out); },
          [&](AppErr& x) {
            take(x.fn, out);
            take(x.arg, out);
          },
          [&](AppFail& x) {
            take(x.fn, out);
            take(x.arg, out);
          },
          [&](From& x) { take(x.operand, out); },
          [&](PtrNew& x) {
            take(x.type, out);
            take(x.init, out);
          },
          [&](PtrRead& x) { take(x.ptr, out); },
          [&](PtrWrite& x) {
            take(x.ptr, out);
            take(x.value, out);
          },
          [&](PtrTo& x) { take(x.type, out); },
          [&](Output& x) { take(x.operand, out); },
          [&](Unify& x) {
            take(x.lhs, out);
            take(x.rhs, out);
          },
          [&](Join& x) {
            take(x.lhs, out);
            take(x.rhs, out);
          },
          [&](Let& x) {
            take(x.bound, out);
            take(x.body, out);
          },
          [&](Letrec& x) {
            for (auto& [name, v] : x.bindings) {
              std::visit(overloaded{
                             [](TupleValue&) {},
                             [&](FunValue& f) { take_fun(f.fun, out); },
                             [&](PtrValue& p) { take(p.type, out); },
                         },
                         v);
            }
            take(x.body, out);
          },
          [&](If& x) {
            take(x.cond, out);
            take(x.then_branch, out);
            take(x.else_branch, out);
          },
          [&](Stage& x) {
            take(x.lhs, out);
            take(x.rhs, out);
          },
          [&](FxThen& x) { take(x.body, out); },
          [&](IfM& x) {
            take(x.cond, out);
            take(x.then_branch, out);
            take(x.else_branch, out);
          },
          [&](Frame& x) { take(x.body, out); },
          [&](Chk& x) {
            take(x.pattern, out);
            take(x.then_branch, out);
            take(x.else_branch, out);
          },
          [](auto&) {},
      },
      n);
}

}  // namespace

// Machine terms nest one frame per call, so a long run builds terms far
// deeper than the native stack allows to be destroyed recursively.
Term::~Term() {
  std::vector<TermPtr> pending;
  take_children(node_, pending);
  while (!pending.empty()) {
    TermPtr p = std::move(pending.back());
    pending.pop_back();
    if (p.use_count() == 1) {
      take_children(const_cast<Term&>(*p).node_, pending);
    }
  }
}

bool Term::is_machine_form() const {
  return is<node::IfM>() || is<node::LabelRef>() || is<node::Frame>() || is<node::Chk>();
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

namespace mk {
TermPtr var(VarName x) { return make_term(node::Variable{std::move(x)}); }
TermPtr falses() { return make_term(node::Falses{}); }
TermPtr anys() { return make_term(node::Anys{}); }
TermPtr integer(Integer i) { return make_term(node::IntLit{std::move(i)}); }
TermPtr ints() { return make_term(node::Ints{}); }
TermPtr uop(UnaryOp op, TermPtr t) { return make_term(node::Unary{op, std::move(t)}); }
TermPtr bop(BinaryOp op, TermPtr a, TermPtr b) {
  return make_term(node::Binary{op, std::move(a), std::move(b)});
}
TermPtr cop(CompareOp op, TermPtr a, TermPtr b) {
  return make_term(node::Compare{op, std::move(a), std::move(b)});
}
TermPtr table(std::vector<node::TableEntry> entries) {
  return make_term(node::FixedTable{std::move(entries)});
}
TermPtr arr(TermPtr length, VarName x, TermPtr body) {
  return make_term(node::ArrayLambda{std::move(length), std::move(x), std::move(body)});
}
TermPtr tabs() { return make_term(node::Tabs{}); }
TermPtr fun(Fun f) { return make_term(node::FunTerm{std::move(f)}); }
TermPtr lambda(VarName x, TermPtr domain, DomainKind dk, Effect dom, Effect range, TermPtr body) {
  return fun(Lambda{std::move(x), std::move(domain), dk, dom, range, std::move(body)});
}
TermPtr funs() { return make_term(node::Funs{}); }
TermPtr len(TermPtr t) { return make_term(node::Length{std::move(t)}); }
TermPtr appe(TermPtr f, TermPtr a) { return make_term(node::AppErr{std::move(f), std::move(a)}); }
TermPtr appf(TermPtr f, TermPtr a) { return make_term(node::AppFail{std::move(f), std::move(a)}); }
TermPtr from(TermPtr t) { return make_term(node::From{std::move(t)}); }
TermPtr ptr_new(TermPtr type, TermPtr init) {
  return make_term(node::PtrNew{std::move(type), std::move(init)});
}
TermPtr ptr_read(TermPtr p) { return make_term(node::PtrRead{std::move(p)}); }
TermPtr ptr_write(TermPtr p, TermPtr v) {
  return make_term(node::PtrWrite{std::move(p), std::move(v)});
}
TermPtr ptr_to(TermPtr t) { return make_term(node::PtrTo{std::move(t)}); }
TermPtr ptrs() { return make_term(node::Ptrs{}); }
TermPtr input() { return make_term(node::Input{}); }
TermPtr output(TermPtr t) { return make_term(node::Output{std::move(t)}); }
TermPtr unify(TermPtr a, TermPtr b) { return make_term(node::Unify{std::move(a), std::move(b)}); }
TermPtr join(TermPtr a, TermPtr b) { return make_term(node::Join{std::move(a), std::move(b)}); }
TermPtr let(VarName x, TermPtr bound, TermPtr body) {
  return make_term(node::Let{std::move(x), std::move(bound), std::move(body)});
}
TermPtr letrec(std::vector<std::pair<VarName, SourceValue>> bindings, TermPtr body) {
  return make_term(node::Letrec{std::move(bindings), std::move(body)});
}
TermPtr if_(VarName x, TermPtr c, TermPtr t, TermPtr e) {
  return make_term(node::If{std::move(x), std::move(c), std::move(t), std::move(e)});
}
TermPtr stage(Effect fx, Decidability d, TermPtr a, TermPtr b) {
  return make_term(node::Stage{fx, d, std::move(a), std::move(b)});
}
TermPtr fxthen(Effect fx, TermPtr t) { return make_term(node::FxThen{fx, std::move(t)}); }
TermPtr label(HeadLabel hl) { return make_term(node::LabelRef{hl}); }
TermPtr frame(Environment env, TermPtr body, Effect allowed) {
  return make_term(node::Frame{std::move(env), std::move(body), allowed});
}
TermPtr chk(HeadLabel subject, AssumedEqualities ae, TermPtr pattern, TermPtr then_branch,
            TermPtr else_branch) {
  return make_term(node::Chk{subject, std::move(ae), std::move(pattern), std::move(then_branch),
                             std::move(else_branch)});
}
}  // namespace mk

MachineState MachineState::initial(TermPtr t, std::uint64_t label_base) {
  MachineState m;
  m.term = std::move(t);
  m.allowed = Effect::all();
  m.next_head = label_base;
  m.next_pointer = label_base;
  return m;
}

// ---------------------------------------------------------------------------
// Structural equality
// ---------------------------------------------------------------------------

namespace {

bool eq(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return structurally_equal(*a, *b);
}

bool eq_value(const SourceValue& a, const SourceValue& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      overloaded{
          [&](const TupleValue& x) { return x.entries == std::get<TupleValue>(b).entries; },
          [&](const FunValue& x) { return structurally_equal(x.fun, std::get<FunValue>(b).fun); },
          [&](const PtrValue& x) {
            const auto& y = std::get<PtrValue>(b);
            return x.init == y.init && eq(x.type, y.type);
          },
      },
      a);
}

}  // namespace

bool structurally_equal(const Fun& a, const Fun& b) {
  if (a.index() != b.index()) return false;
  if (auto* l = std::get_if<Lambda>(&a)) {
    const auto& m = std::get<Lambda>(b);
    return l->param == m.param && l->dk == m.dk && l->dom_effects == m.dom_effects &&
           l->range_effects == m.range_effects && eq(l->domain, m.domain) && eq(l->body, m.body);
  }
  const auto& x = std::get<AllQuant>(a);
  const auto& y = std::get<AllQuant>(b);
  return x.type_var == y.type_var && x.param == y.param && x.dom_effects == y.dom_effects &&
         x.range_effects == y.range_effects && eq(x.type_domain, y.type_domain) &&
         eq(x.instantiation, y.instantiation) && eq(x.domain, y.domain) && eq(x.body, y.body);
}

bool structurally_equal(const Term& a, const Term& b) {
  if (&a == &b) return true;
  const auto& na = a.node();
  const auto& nb = b.node();
  if (na.index() != nb.index()) return false;
  using namespace node;
  return std::visit(
      overloaded{
          [&](const Variable& x) { return x.name == std::get<Variable>(nb).name; },
          [&](const IntLit& x) { return x.value == std::get<IntLit>(nb).value; },
          [&](const Unary& x) {
            const auto& y = std::get<Unary>(nb);
            return x.op == y.op && eq(x.operand, y.operand);
          },
          [&](const Binary& x) {
            const auto& y = std::get<Binary>(nb);
            return x.op == y.op && eq(x.lhs, y.lhs) && eq(x.rhs, y.rhs);
          },
          [&](const Compare& x) {
            const auto& y = std::get<Compare>(nb);
            return x.op == y.op && eq(x.lhs, y.lhs) && eq(x.rhs, y.rhs);
          },
          [&](const FixedTable& x) {
            const auto& y = std::get<FixedTable>(nb);
            if (x.entries.size() != y.entries.size()) return false;
            for (std::size_t i = 0; i < x.entries.size(); ++i) {
              const auto& e = x.entries[i];
              const auto& f = y.entries[i];
              if (e.var != f.var || e.index != f.index || !eq(e.term, f.term)) return false;
            }
            return true;
          },
          [&](const ArrayLambda& x) {
            const auto& y = std::get<ArrayLambda>(nb);
            return x.index_var == y.index_var && eq(x.length, y.length) && eq(x.body, y.body);
          },
          [&](const FunTerm& x) { return structurally_equal(x.fun, std::get<FunTerm>(nb).fun); },
          [&](const Length& x) { return eq(x.operand, std::get<Length>(nb).operand); },
          [&](const AppErr& x) {
            const auto& y = std::get<AppErr>(nb);
            return eq(x.fn, y.fn) && eq(x.arg, y.arg);
          },
          [&](const AppFail& x) {
            const auto& y = std::get<AppFail>(nb);
            return eq(x.fn, y.fn) && eq(x.arg, y.arg);
          },
          [&](const From& x) { return eq(x.operand, std::get<From>(nb).operand); },
          [&](const PtrNew& x) {
            const auto& y = std::get<PtrNew>(nb);
            return eq(x.type, y.type) && eq(x.init, y.init);
          },
          [&](const PtrRead& x) { return eq(x.ptr, std::get<PtrRead>(nb).ptr); },
          [&](const PtrWrite& x) {
            const auto& y = std::get<PtrWrite>(nb);
            return eq(x.ptr, y.ptr) && eq(x.value, y.value);
          },
          [&](const PtrTo& x) { return eq(x.type, std::get<PtrTo>(nb).type); },
          [&](const Output& x) { return eq(x.operand, std::get<Output>(nb).operand); },
          [&](const Unify& x) {
            const auto& y = std::get<Unify>(nb);
            return eq(x.lhs, y.lhs) && eq(x.rhs, y.rhs);
          },
          [&](const Join& x) {
            const auto& y = std::get<Join>(nb);
            return eq(x.lhs, y.lhs) && eq(x.rhs, y.rhs);
          },
          [&](const Let& x) {
            const auto& y = std::get<Let>(nb);
            return x.var == y.var && eq(x.bound, y.bound) && eq(x.body, y.body);
          },
          [&](const Letrec& x) {
            const auto& y = std::get<Letrec>(nb);
            if (x.bindings.size() != y.bindings.size()) return false;
            for (std::size_t i = 0; i < x.bindings.size(); ++i) {
              if (x.bindings[i].first != y.bindings[i].first) return false;
              if (!eq_value(x.bindings[i].second, y.bindings[i].second)) return false;
            }
            return eq(x.body, y.body);
          },
          [&](const If& x) {
            const auto& y = std::get<If>(nb);
            return x.var == y.var && eq(x.cond, y.cond) && eq(x.then_branch, y.then_branch) &&
                   eq(x.else_branch, y.else_branch);
          },
          [&](const Stage& x) {
            const auto& y = std::get<Stage>(nb);
            return x.effects == y.effects && x.decidability == y.decidability &&
                   eq(x.lhs, y.lhs) && eq(x.rhs, y.rhs);
          },
          [&](const FxThen& x) {
            const auto& y = std::get<FxThen>(nb);
            return x.effects == y.effects && eq(x.body, y.body);
          },
          [&](const IfM& x) {
            const auto& y = std::get<IfM>(nb);
            bool saved_eq = x.saved == y.saved ||
                            (x.saved && y.saved && structurally_equal(*x.saved, *y.saved));
            return x.var == y.var && saved_eq && eq(x.cond, y.cond) &&
                   eq(x.then_branch, y.then_branch) && eq(x.else_branch, y.else_branch);
          },
          [&](const LabelRef& x) { return x.label == std::get<LabelRef>(nb).label; },
          [&](const Frame& x) {
            const auto& y = std::get<Frame>(nb);
            return x.env == y.env && x.allowed == y.allowed && eq(x.body, y.body);
          },
          [&](const Chk& x) {
            const auto& y = std::get<Chk>(nb);
            return x.subject == y.subject && x.ae == y.ae && eq(x.pattern, y.pattern) &&
                   eq(x.then_branch, y.then_branch) && eq(x.else_branch, y.else_branch);
          },
          [](const auto&) { return true; },  // nullary forms
      },
      na);
}

bool structurally_equal(const Head& a, const Head& b) {
  if (a.index() != b.index()) return false;
  if (auto* c = std::get_if<Closure>(&a)) {
    const auto& d = std::get<Closure>(b);
    return c->env == d.env && structurally_equal(c->fun, d.fun);
  }
  if (auto* i = std::get_if<IntHead>(&a)) return *i == std::get<IntHead>(b);
  if (auto* t = std::get_if<TableHead>(&a)) return *t == std::get<TableHead>(b);
  return std::get<PtrHead>(a) == std::get<PtrHead>(b);
}

bool structurally_equal(const PointerCell& a, const PointerCell& b) {
  return a.env == b.env && a.contents == b.contents && eq(a.type, b.type);
}

bool structurally_equal(const HeadHeap& a, const HeadHeap& b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) {
           return x.first == y.first && structurally_equal(x.second, y.second);
         });
}

bool structurally_equal(const PointerHeap& a, const PointerHeap& b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) {
           return x.first == y.first && structurally_equal(x.second, y.second);
         });
}

bool structurally_equal(const MachineState& a, const MachineState& b) {
  return a.env == b.env && a.allowed == b.allowed && structurally_equal(a.heads, b.heads) &&
         structurally_equal(a.pointers, b.pointers) && eq(a.term, b.term);
}

// ---------------------------------------------------------------------------
// Operator spellings
// ---------------------------------------------------------------------------

const char* to_string(UnaryOp op) { return op == UnaryOp::Neg ? "neg" : "abs"; }

const char* to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "add";
    case BinaryOp::Sub: return "sub";
    case BinaryOp::Mul: return "mul";
    case BinaryOp::Div: return "div";
    case BinaryOp::Mod: return "mod";
  }
  return "?";
}

const char* to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return "lt";
    case CompareOp::Le: return "le";
    case CompareOp::Gt: return "gt";
    case CompareOp::Ge: return "ge";
    case CompareOp::Ne: return "ne";
  }
  return "?";
}

const char* to_string(DomainKind dk) {
  switch (dk) {
    case DomainKind::Contravariant: return "contra";
    case DomainKind::Invariant: return "inv";
    case DomainKind::AtLeast: return "ge";
    case DomainKind::AtMost: return "le";
  }
  return "?";
}

const char* to_string(Decidability d) {
  switch (d) {
    case Decidability::Inhabited: return "T";
    case Decidability::Uninhabited: return "F";
    case Decidability::Unknown: return "D";
  }
  return "?";
}

std::optional<UnaryOp> parse_unary_op(std::string_view s) {
  if (s == "neg") return UnaryOp::Neg;
  if (s == "abs") return UnaryOp::Abs;
  return std::nullopt;
}

std::optional<BinaryOp> parse_binary_op(std::string_view s) {
  for (auto op : {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Mod}) {
    if (s == to_string(op)) return op;
  }
  return std::nullopt;
}

std::optional<CompareOp> parse_compare_op(std::string_view s) {
  for (auto op : {CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge, CompareOp::Ne}) {
    if (s == to_string(op)) return op;
  }
  return std::nullopt;
}

std::optional<DomainKind> parse_domain_kind(std::string_view s) {
  for (auto dk : {DomainKind::Contravariant, DomainKind::Invariant, DomainKind::AtLeast,
                  DomainKind::AtMost}) {
    if (s == to_string(dk)) return dk;
  }
  return std::nullopt;
}

std::optional<Decidability> parse_decidability(std::string_view s) {
  for (auto d : {Decidability::Inhabited, Decidability::Uninhabited, Decidability::Unknown}) {
    if (s == to_string(d)) return d;
  }
  return std::nullopt;
}

}  // namespace aleph
