#pragma once

// The abstract machine: one reduction step at a time.

#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aleph/rules.hpp"
#include "aleph/syntax.hpp"

namespace aleph {

// ---------------------------------------------------------------------------
// Actions and inputs
// ---------------------------------------------------------------------------

struct Action {
  enum class Kind : std::uint8_t { Pure, In, Out, New, Read, Write };

  Kind kind = Kind::Pure;
  Integer value;  // In and Out only

  static Action pure() { return {}; }
  static Action in(Integer i) { return {Kind::In, std::move(i)}; }
  static Action out(Integer i) { return {Kind::Out, std::move(i)}; }
  static Action make_new() { return {Kind::New, 0}; }
  static Action read() { return {Kind::Read, 0}; }
  static Action write() { return {Kind::Write, 0}; }

  bool is_pure() const { return kind == Kind::Pure; }
  bool is_io() const { return kind == Kind::In || kind == Kind::Out; }
  bool operator==(const Action&) const = default;
};

/// "T", "in 42", "out 7", "N", "R", "W".
std::string to_string(const Action& a);

class InputSource {
 public:
  virtual ~InputSource() = default;
  /// The next input integer, or nullopt when there is none.
  virtual std::optional<Integer> next() = 0;
};

class ScriptedInput final : public InputSource {
 public:
  ScriptedInput() = default;
  explicit ScriptedInput(std::vector<Integer> values) : values_(std::move(values)) {}

  std::optional<Integer> next() override;
  std::size_t consumed() const { return pos_; }

 private:
  std::vector<Integer> values_;
  std::size_t pos_ = 0;
};

/// Reads whitespace-separated integers from a stream, writing `prompt` (if
/// given) before each read.
class StreamInput final : public InputSource {
 public:
  explicit StreamInput(std::istream& in, std::ostream* prompt = nullptr)
      : in_(in), prompt_(prompt) {}
  std::optional<Integer> next() override;

 private:
  std::istream& in_;
  std::ostream* prompt_;
};

/// Raised when RGin fires and the input source has nothing left. This is a
/// fault in the experiment setup rather than a machine outcome.
struct InputExhausted : std::runtime_error {
  InputExhausted() : std::runtime_error("input exhausted") {}
};

/// Longest array RGarr will build. The rule itself has no bound; a longer
/// array would only exhaust memory.
inline constexpr std::uint64_t kMaxArrayLength = 1u << 20;

/// Raised when a step would need more than this implementation can give,
/// such as an array longer than kMaxArrayLength. Not a machine outcome.
struct LimitExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Auxiliary predicates
// ---------------------------------------------------------------------------

struct HeadClass {
  bool is_int = false;
  bool is_nat = false;
  bool is_tab = false;
  bool is_arr = false;
  bool is_fun = false;
  bool is_typ = false;
  bool is_app = false;
  bool is_ptr = false;
  std::vector<Integer> tab_indices;  // in table order, when is_tab

  /// Table whose index set is exactly `indices` (order-insensitive).
  bool is_tab_fields(const std::vector<Integer>& indices) const;
};

/// Pass nullptr for a label outside the head heap: every predicate is false.
HeadClass classify_head(const Head* h);
DomainKind dk_of(const Fun& f);

/// Index sets equal, ignoring order. Both tables have distinct indices.
bool same_index_set(const std::vector<Integer>& a, const std::vector<Integer>& b);

// ---------------------------------------------------------------------------
// Evaluation contexts
// ---------------------------------------------------------------------------

enum class Production : std::uint8_t {
  Uop,         // uop []
  BopLeft,     // bop [] t
  BopRight,    // bop hl []
  CopLeft,     // cop [] t
  CopRight,    // cop hl []
  ArrLength,   // arr [] x t
  Len,         // len []
  AppELeft,    // appE [] t
  AppERight,   // appE hl []
  AppFLeft,    // appF [] t
  AppFRight,   // appF hl []
  NewInit,     // new t []
  Read,        // read []
  WriteLeft,   // write [] t
  WriteRight,  // write hl []
  Out,         // out []
  UnifyLeft,   // unify [] t
  LetBound,    // let x [] t
};

const char* to_string(Production p);

/// A one-hole context: `term` with the subterm at `production`'s hole to be
/// replaced.
struct EvalContext {
  Production production;
  TermPtr term;

  std::size_t hole() const;
  TermPtr plug(TermPtr t) const;
};

/// Splits t = E[redex] when t matches an E production whose hole holds a
/// subterm that is not yet a head label. Left operands take precedence.
std::optional<std::pair<EvalContext, TermPtr>> decompose(const TermPtr& t);

/// Rebuilds `parent` with child number `index` replaced. Children are
/// numbered as in the term-utility path convention; tables number their
/// entries, frames and ifm number the body/condition 0.
TermPtr replace_child(const Term& parent, std::size_t index, TermPtr child);

// ---------------------------------------------------------------------------
// Letrec values and pointer heaps
// ---------------------------------------------------------------------------

struct ValueHead {
  Rule rule;  // RVtable, RVfun or RVptr
  Head head;
  PointerHeap heap;
};
struct Erroneous {
  Rule rule;  // RVtableE, RVfunE or RVptrE
  std::string detail;
};

/// `fresh` is used as the pointer label when v is a pointer value.
std::variant<ValueHead, Erroneous> eval_value(const PointerHeap& ph, const Environment& env,
                                              const SourceValue& v, PointerLabel fresh);

/// PH[PH']: current heap, with each pointer's cell replaced by the saved one
/// where the saved heap defines it. Throws std::logic_error unless
/// dom(saved) is a subset of dom(current).
PointerHeap restore_pointer_heap(const PointerHeap& current, const PointerHeap& saved);

// ---------------------------------------------------------------------------
// Stepping
// ---------------------------------------------------------------------------

namespace outcome {
struct Stepped {
  Action action;
  MachineState next;
  std::vector<Rule> rules;
};
struct Terminal {
  HeadLabel hl;
};
struct Fail {
  std::vector<Rule> rules;
};
struct Error {
  Rule rule;
  std::string detail;
  std::vector<Rule> rules;
};
}  // namespace outcome

using StepOutcome =
    std::variant<outcome::Stepped, outcome::Terminal, outcome::Fail, outcome::Error>;

/// One step from `m`. The `rules` vectors hold the derivation: congruence
/// rules from the outside in, then the rule applied at the redex, then any
/// letrec value rules.
StepOutcome step(const MachineState& m, InputSource& in);

/// Incremental stepper. Keeps the path from the root to the current redex
/// so that a step costs time proportional to the redex, not to the depth of
/// the whole term.
class Machine {
 public:
  struct Result {
    enum class Kind : std::uint8_t { Stepped, Terminal, Fail, Error };
    Kind kind = Kind::Stepped;
    Action action;
    Rule rule = Rule::RGi;  // rule at the redex (the failing or erroring rule for F/E)
    std::string detail;     // Error only
    std::vector<Rule> rules;  // full derivation, filled when requested
    HeadLabel terminal;       // Terminal only
  };

  explicit Machine(MachineState m);
  ~Machine();
  Machine(Machine&&) noexcept;
  Machine& operator=(Machine&&) noexcept;

  /// Takes one step. After Fail or Error the machine is unchanged.
  Result advance(InputSource& in, bool want_rules = false);

  /// True when the whole term is a head label.
  bool terminal() const;
  MachineState state() const;
  TermPtr term() const;
  const HeadHeap& heads() const;
  const PointerHeap& pointers() const;
  const Environment& env() const;
  Effect allowed() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// State utilities
// ---------------------------------------------------------------------------

/// Relabels head and pointer labels in order of first occurrence: the term,
/// then the environment, then whatever those reach through the heaps, then
/// unreachable entries in label order. Label counters are reset to the heap
/// sizes.
MachineState canonicalize(const MachineState& m);

/// `text` with the labels it mentions ("#3", "@0") renamed as canonicalize()
/// would rename them in `m`. Labels `m` does not know become "#?" / "@?".
std::string canonical_text(const MachineState& m, std::string_view text);

/// The first clause of the monotonicity theorem that the step before ->
/// after violates, or nullopt.
std::optional<std::string> monotonicity_violation(const MachineState& before,
                                                  const MachineState& after);

std::string label_string(HeadLabel hl);     // "#3"
std::string label_string(PointerLabel pl);  // "@0"

}  // namespace aleph
