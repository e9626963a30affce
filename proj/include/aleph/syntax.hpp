#pragma once

// Term language, machine-extended syntax, heads, heaps and machine states.
//
// Terms are immutable and shared through `TermPtr`. Every machine rule
// builds new terms out of old subterms, so sharing is the normal case.

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "aleph/effects.hpp"

namespace aleph {

using Integer = boost::multiprecision::cpp_int;
using VarName = std::string;

struct HeadLabel {
  std::uint64_t id = 0;
  auto operator<=>(const HeadLabel&) const = default;
};

struct PointerLabel {
  std::uint64_t id = 0;
  auto operator<=>(const PointerLabel&) const = default;
};

enum class Decidability { Inhabited, Uninhabited, Unknown };  // T | F | D
enum class DomainKind { Contravariant, Invariant, AtLeast, AtMost };
enum class UnaryOp { Neg, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Mod };
enum class CompareOp { Lt, Le, Gt, Ge, Ne };

class Term;
using TermPtr = std::shared_ptr<const Term>;

// ---------------------------------------------------------------------------
// Functions and letrec values
// ---------------------------------------------------------------------------

/// fun param:domain dk dom_effects range_effects body
struct Lambda {
  VarName param;
  TermPtr domain;
  DomainKind dk = DomainKind::Contravariant;
  Effect dom_effects;
  Effect range_effects;
  TermPtr body;
};

/// All-quantified contravariant function. `type_var` binds in `domain` and
/// `body`; `param` binds in `instantiation` and `body`.
struct AllQuant {
  VarName type_var;
  TermPtr type_domain;
  TermPtr instantiation;
  VarName param;
  TermPtr domain;
  Effect dom_effects;
  Effect range_effects;
  TermPtr body;
};

using Fun = std::variant<Lambda, AllQuant>;

struct TupleValue {
  std::vector<std::pair<Integer, VarName>> entries;
};
struct FunValue {
  Fun fun;
};
struct PtrValue {
  TermPtr type;
  VarName init;
};
using SourceValue = std::variant<TupleValue, FunValue, PtrValue>;

// ---------------------------------------------------------------------------
// Environments, heads and heaps
// ---------------------------------------------------------------------------

/// Ordered variable bindings. Extension appends on the right and lookup
/// takes the rightmost binding, so later bindings shadow earlier ones.
class Environment {
 public:
  using Binding = std::pair<VarName, HeadLabel>;

  Environment() = default;
  Environment(std::initializer_list<Binding> bindings) : bindings_(bindings) {}

  std::optional<HeadLabel> lookup(const VarName& x) const;
  bool contains(const VarName& x) const { return lookup(x).has_value(); }

  void push(VarName x, HeadLabel hl) { bindings_.emplace_back(std::move(x), hl); }
  Environment extended(VarName x, HeadLabel hl) const {
    Environment e = *this;
    e.push(std::move(x), hl);
    return e;
  }

  std::size_t size() const { return bindings_.size(); }
  bool empty() const { return bindings_.empty(); }
  auto begin() const { return bindings_.begin(); }
  auto end() const { return bindings_.end(); }

  bool operator==(const Environment&) const = default;

 private:
  std::vector<Binding> bindings_;
};

struct IntHead {
  Integer value;
  bool operator==(const IntHead&) const = default;
};

/// Table entries in construction order; indices are pairwise distinct.
struct TableHead {
  std::vector<std::pair<Integer, HeadLabel>> entries;

  std::optional<HeadLabel> find(const Integer& index) const;
  bool operator==(const TableHead&) const = default;
};

struct Closure {
  Environment env;
  Fun fun;
};

struct PtrHead {
  PointerLabel label;
  bool operator==(const PtrHead&) const = default;
};

using Head = std::variant<IntHead, TableHead, Closure, PtrHead>;

struct PointerCell {
  Environment env;
  TermPtr type;
  HeadLabel contents;
};

using HeadHeap = std::map<HeadLabel, Head>;
using PointerHeap = std::map<PointerLabel, PointerCell>;
using AssumedEqualities = std::set<std::pair<HeadLabel, HeadLabel>>;

/// Disjoint extension; throws std::logic_error if `hl` is already bound.
void extend_heap(HeadHeap& hh, HeadLabel hl, Head h);
void extend_heap(PointerHeap& ph, PointerLabel pl, PointerCell cell);

const Head* lookup(const HeadHeap& hh, HeadLabel hl);
const PointerCell* lookup(const PointerHeap& ph, PointerLabel pl);

// ---------------------------------------------------------------------------
// Term nodes
// ---------------------------------------------------------------------------

namespace node {

struct Variable { VarName name; };
struct Falses {};
struct Anys {};
struct IntLit { Integer value; };
struct Ints {};
struct Unary { UnaryOp op; TermPtr operand; };
struct Binary { BinaryOp op; TermPtr lhs; TermPtr rhs; };
struct Compare { CompareOp op; TermPtr lhs; TermPtr rhs; };

struct TableEntry {
  VarName var;
  Integer index;
  TermPtr term;
};
/// Dependent fixed table: each entry variable binds in the later entries.
struct FixedTable { std::vector<TableEntry> entries; };
struct ArrayLambda { TermPtr length; VarName index_var; TermPtr body; };
struct Tabs {};
struct FunTerm { Fun fun; };
struct Funs {};
struct Length { TermPtr operand; };
struct AppErr { TermPtr fn; TermPtr arg; };
struct AppFail { TermPtr fn; TermPtr arg; };
struct From { TermPtr operand; };
struct PtrNew { TermPtr type; TermPtr init; };
struct PtrRead { TermPtr ptr; };
struct PtrWrite { TermPtr ptr; TermPtr value; };
struct PtrTo { TermPtr type; };
struct Ptrs {};
struct Input {};
struct Output { TermPtr operand; };
struct Unify { TermPtr lhs; TermPtr rhs; };
struct Join { TermPtr lhs; TermPtr rhs; };
struct Let { VarName var; TermPtr bound; TermPtr body; };
struct Letrec { std::vector<std::pair<VarName, SourceValue>> bindings; TermPtr body; };
struct If { VarName var; TermPtr cond; TermPtr then_branch; TermPtr else_branch; };
struct Stage { Effect effects; Decidability decidability; TermPtr lhs; TermPtr rhs; };
struct FxThen { Effect effects; TermPtr body; };

// Machine-only forms.

/// Conditional in progress: `saved` is the pointer heap at the time the
/// conditional started, restored if the condition fails.
struct IfM {
  VarName var;
  TermPtr cond;
  TermPtr then_branch;
  std::shared_ptr<const PointerHeap> saved;
  TermPtr else_branch;
};
struct LabelRef { HeadLabel label; };
struct Frame { Environment env; TermPtr body; Effect allowed; };
/// Test mode: is `subject` one of the values of `pattern`?
struct Chk {
  HeadLabel subject;
  AssumedEqualities ae;
  TermPtr pattern;
  TermPtr then_branch;
  TermPtr else_branch;
};

}  // namespace node

class Term {
 public:
  using Node = std::variant<
      node::Variable, node::Falses, node::Anys, node::IntLit, node::Ints, node::Unary,
      node::Binary, node::Compare, node::FixedTable, node::ArrayLambda, node::Tabs,
      node::FunTerm, node::Funs, node::Length, node::AppErr, node::AppFail, node::From,
      node::PtrNew, node::PtrRead, node::PtrWrite, node::PtrTo, node::Ptrs, node::Input,
      node::Output, node::Unify, node::Join, node::Let, node::Letrec, node::If, node::Stage,
      node::FxThen, node::IfM, node::LabelRef, node::Frame, node::Chk>;

  explicit Term(Node n) : node_(std::move(n)) {}
  Term(const Term&) = delete;
  Term& operator=(const Term&) = delete;
  ~Term();

  const Node& node() const { return node_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node_);
  }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(node_);
  }

  std::optional<HeadLabel> label() const {
    if (auto* l = as<node::LabelRef>()) return l->label;
    return std::nullopt;
  }

  /// True for the four forms that exist only at runtime.
  bool is_machine_form() const;

 private:
  Node node_;
};

template <class T>
TermPtr make_term(T n) {
  return std::make_shared<const Term>(Term::Node{std::move(n)});
}

/// Short constructors for building terms in code and tests.
namespace mk {
TermPtr var(VarName x);
TermPtr falses();
TermPtr anys();
TermPtr integer(Integer i);
TermPtr ints();
TermPtr uop(UnaryOp op, TermPtr t);
TermPtr bop(BinaryOp op, TermPtr a, TermPtr b);
TermPtr cop(CompareOp op, TermPtr a, TermPtr b);
TermPtr table(std::vector<node::TableEntry> entries);
TermPtr arr(TermPtr length, VarName x, TermPtr body);
TermPtr tabs();
TermPtr fun(Fun f);
TermPtr lambda(VarName x, TermPtr domain, DomainKind dk, Effect dom, Effect range, TermPtr body);
TermPtr funs();
TermPtr len(TermPtr t);
TermPtr appe(TermPtr f, TermPtr a);
TermPtr appf(TermPtr f, TermPtr a);
TermPtr from(TermPtr t);
TermPtr ptr_new(TermPtr type, TermPtr init);
TermPtr ptr_read(TermPtr p);
TermPtr ptr_write(TermPtr p, TermPtr v);
TermPtr ptr_to(TermPtr t);
TermPtr ptrs();
TermPtr input();
TermPtr output(TermPtr t);
TermPtr unify(TermPtr a, TermPtr b);
TermPtr join(TermPtr a, TermPtr b);
TermPtr let(VarName x, TermPtr bound, TermPtr body);
TermPtr letrec(std::vector<std::pair<VarName, SourceValue>> bindings, TermPtr body);
TermPtr if_(VarName x, TermPtr c, TermPtr t, TermPtr e);
TermPtr stage(Effect fx, Decidability d, TermPtr a, TermPtr b);
TermPtr fxthen(Effect fx, TermPtr t);
TermPtr label(HeadLabel hl);
TermPtr frame(Environment env, TermPtr body, Effect allowed);
TermPtr chk(HeadLabel subject, AssumedEqualities ae, TermPtr pattern, TermPtr then_branch,
            TermPtr else_branch);
}  // namespace mk

// ---------------------------------------------------------------------------
// Machine states
// ---------------------------------------------------------------------------

/// ⟨HH; PH; σ; χ; t⟩ plus the fresh-label counters of the run. Counters are
/// not part of the abstract state; canonicalize() resets them.
struct MachineState {
  HeadHeap heads;
  PointerHeap pointers;
  Environment env;
  Effect allowed = Effect::all();
  TermPtr term;
  std::uint64_t next_head = 0;
  std::uint64_t next_pointer = 0;

  /// ⟨ε; ε; ε; A; t⟩ with label counters starting at `label_base`.
  static MachineState initial(TermPtr t, std::uint64_t label_base = 0);

  bool is_terminal() const { return term && term->label().has_value(); }
};

// Structural equality, no alpha-renaming of anything. Used for comparing
// canonicalized states and heads.
bool structurally_equal(const Term& a, const Term& b);
bool structurally_equal(const Fun& a, const Fun& b);
bool structurally_equal(const Head& a, const Head& b);
bool structurally_equal(const PointerCell& a, const PointerCell& b);
bool structurally_equal(const HeadHeap& a, const HeadHeap& b);
bool structurally_equal(const PointerHeap& a, const PointerHeap& b);
bool structurally_equal(const MachineState& a, const MachineState& b);

const char* to_string(UnaryOp op);
const char* to_string(BinaryOp op);
const char* to_string(CompareOp op);
const char* to_string(DomainKind dk);
const char* to_string(Decidability d);

std::optional<UnaryOp> parse_unary_op(std::string_view s);
std::optional<BinaryOp> parse_binary_op(std::string_view s);
std::optional<CompareOp> parse_compare_op(std::string_view s);
std::optional<DomainKind> parse_domain_kind(std::string_view s);
std::optional<Decidability> parse_decidability(std::string_view s);

}  // namespace aleph
