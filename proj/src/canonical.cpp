#include <cctype>
#include <deque>
#include <string>
#include <unordered_map>

#include "aleph/machine.hpp"
#include "aleph/overloaded.hpp"

namespace aleph {

namespace {

using namespace node;

class Relabeler {
 public:
  explicit Relabeler(const MachineState& m) : m_(m) {}

  MachineState run() {
    number();
    return build();
  }

  /// `text` with every "#n" and "@n" of a known label replaced by its
  /// canonical name. Unknown labels become "#?" or "@?".
  std::string rename(std::string_view text) {
    number();
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
      char c = text[i];
      std::size_t j = i + 1;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if ((c != '#' && c != '@') || j == i + 1) {
        out += c;
        ++i;
        continue;
      }
      std::uint64_t id = std::stoull(std::string(text.substr(i + 1, j - i - 1)));
      const auto& table = c == '#' ? heads_ : ptrs_;
      auto it = table.find(id);
      out += c;
      out += it == table.end() ? "?" : std::to_string(it->second);
      i = j;
    }
    return out;
  }

 private:
  void number() {
    if (numbered_) return;
    numbered_ = true;
    visit_term(m_.term);
    visit_env(m_.env);
    drain();
    for (const auto& [hl, h] : m_.heads) {
      if (!heads_.contains(hl.id)) {
        see(hl);
        drain();
      }
    }
    for (const auto& [pl, cell] : m_.pointers) {
      if (!ptrs_.contains(pl.id)) {
        see(pl);
        drain();
      }
    }
  }

  MachineState build() {
    MachineState out;
    for (const auto& [hl, h] : m_.heads) out.heads.emplace(map(hl), map_head(h));
    for (const auto& [pl, cell] : m_.pointers) out.pointers.emplace(map(pl), map_cell(cell));
    out.env = map_env(m_.env);
    out.allowed = m_.allowed;
    out.term = map_term(m_.term);
    out.next_head = out.heads.size();
    out.next_pointer = out.pointers.size();
    return out;
  }

 private:
  // ---- discovery -----------------------------------------------------------

  void see(HeadLabel hl) {
    if (heads_.emplace(hl.id, heads_.size()).second) head_queue_.push_back(hl);
  }
  void see(PointerLabel pl) {
    if (ptrs_.emplace(pl.id, ptrs_.size()).second) ptr_queue_.push_back(pl);
  }

  void visit_env(const Environment& env) {
    for (const auto& [x, hl] : env) see(hl);
  }

  void visit_heap(const PointerHeap& ph) {
    for (const auto& [pl, cell] : ph) {
      see(pl);
      visit_env(cell.env);
      visit_term(cell.type);
      see(cell.contents);
    }
  }

  void visit_fun(const Fun& f) {
    std::visit(overloaded{
                   [&](const Lambda& l) {
                     visit_term(l.domain);
                     visit_term(l.body);
                   },
                   [&](const AllQuant& a) {
                     visit_term(a.type_domain);
                     visit_term(a.instantiation);
                     visit_term(a.domain);
                     visit_term(a.body);
                   },
               },
               f);
  }

  void visit_term(const TermPtr& t) {
    if (!t) return;
    std::visit(
        overloaded{
            [&](const Unary& x) { visit_term(x.operand); },
            [&](const Binary& x) {
              visit_term(x.lhs);
              visit_term(x.rhs);
            },
            [&](const Compare& x) {
              visit_term(x.lhs);
              visit_term(x.rhs);
            },
            [&](const FixedTable& x) {
              for (const auto& e : x.entries) visit_term(e.term);
            },
            [&](const ArrayLambda& x) {
              visit_term(x.length);
              visit_term(x.body);
            },
            [&](const FunTerm& x) { visit_fun(x.fun); },
            [&](const Length& x) { visit_term(x.operand); },
            [&](const AppErr& x) {
              visit_term(x.fn);
              visit_term(x.arg);
            },
            [&](const AppFail& x) {
              visit_term(x.fn);
              visit_term(x.arg);
            },
            [&](const From& x) { visit_term(x.operand); },
            [&](const PtrNew& x) {
              visit_term(x.type);
              visit_term(x.init);
            },
            [&](const PtrRead& x) { visit_term(x.ptr); },
            [&](const PtrWrite& x) {
              visit_term(x.ptr);
              visit_term(x.value);
            },
            [&](const PtrTo& x) { visit_term(x.type); },
            [&](const Output& x) { visit_term(x.operand); },
            [&](const Unify& x) {
              visit_term(x.lhs);
              visit_term(x.rhs);
            },
            [&](const Join& x) {
              visit_term(x.lhs);
              visit_term(x.rhs);
            },
            [&](const Let& x) {
              visit_term(x.bound);
              visit_term(x.body);
            },
            [&](const Letrec& x) {
              for (const auto& [name, v] : x.bindings) {
                if (auto* f = std::get_if<FunValue>(&v)) visit_fun(f->fun);
                if (auto* p = std::get_if<PtrValue>(&v)) visit_term(p->type);
              }
              visit_term(x.body);
            },
            [&](const If& x) {
              visit_term(x.cond);
              visit_term(x.then_branch);
              visit_term(x.else_branch);
            },
            [&](const Stage& x) {
              visit_term(x.lhs);
              visit_term(x.rhs);
            },
            [&](const FxThen& x) { visit_term(x.body); },
            [&](const IfM& x) {
              visit_term(x.cond);
              visit_term(x.then_branch);
              visit_term(x.else_branch);
              if (x.saved) visit_heap(*x.saved);
            },
            [&](const LabelRef& x) { see(x.label); },
            [&](const Frame& x) {
              visit_env(x.env);
              visit_term(x.body);
            },
            [&](const Chk& x) {
              see(x.subject);
              for (const auto& [a, b] : x.ae) {
                see(a);
                see(b);
              }
              visit_term(x.pattern);
              visit_term(x.then_branch);
              visit_term(x.else_branch);
            },
            [](const auto&) {},
        },
        t->node());
  }

  // Follows heads and cells in order of their new labels.
  void drain() {
    while (!head_queue_.empty() || !ptr_queue_.empty()) {
      if (!head_queue_.empty()) {
        HeadLabel hl = head_queue_.front();
        head_queue_.pop_front();
        const Head* h = lookup(m_.heads, hl);
        if (!h) continue;
        std::visit(overloaded{
                       [](const IntHead&) {},
                       [&](const TableHead& t) {
                         for (const auto& [i, l] : t.entries) see(l);
                       },
                       [&](const Closure& c) {
                         visit_env(c.env);
                         visit_fun(c.fun);
                       },
                       [&](const PtrHead& p) { see(p.label); },
                   },
                   *h);
        continue;
      }
      PointerLabel pl = ptr_queue_.front();
      ptr_queue_.pop_front();
      if (const PointerCell* cell = lookup(m_.pointers, pl)) {
        visit_env(cell->env);
        visit_term(cell->type);
        see(cell->contents);
      }
    }
  }

  // ---- rebuilding ----------------------------------------------------------

  HeadLabel map(HeadLabel hl) const { return HeadLabel{heads_.at(hl.id)}; }
  PointerLabel map(PointerLabel pl) const { return PointerLabel{ptrs_.at(pl.id)}; }

  Environment map_env(const Environment& env) const {
    Environment out;
    for (const auto& [x, hl] : env) out.push(x, map(hl));
    return out;
  }

  PointerCell map_cell(const PointerCell& c) const {
    return PointerCell{map_env(c.env), map_term(c.type), map(c.contents)};
  }

  PointerHeap map_heap(const PointerHeap& ph) const {
    PointerHeap out;
    for (const auto& [pl, cell] : ph) out.emplace(map(pl), map_cell(cell));
    return out;
  }

  Fun map_fun(const Fun& f) const {
    return std::visit(overloaded{
                          [&](const Lambda& l) -> Fun {
                            Lambda o = l;
                            o.domain = map_term(l.domain);
                            o.body = map_term(l.body);
                            return o;
                          },
                          [&](const AllQuant& a) -> Fun {
                            AllQuant o = a;
                            o.type_domain = map_term(a.type_domain);
                            o.instantiation = map_term(a.instantiation);
                            o.domain = map_term(a.domain);
                            o.body = map_term(a.body);
                            return o;
                          },
                      },
                      f);
  }

  Head map_head(const Head& h) const {
    return std::visit(overloaded{
                          [](const IntHead& i) -> Head { return i; },
                          [&](const TableHead& t) -> Head {
                            TableHead o;
                            for (const auto& [i, l] : t.entries) o.entries.emplace_back(i, map(l));
                            return o;
                          },
                          [&](const Closure& c) -> Head { return Closure{map_env(c.env), map_fun(c.fun)}; },
                          [&](const PtrHead& p) -> Head { return PtrHead{map(p.label)}; },
                      },
                      h);
  }

  TermPtr map_term(const TermPtr& t) const {
    if (!t) return t;
    auto m = [&](const TermPtr& s) { return map_term(s); };
    return std::visit(
        overloaded{
            [&](const Unary& x) { return make_term(Unary{x.op, m(x.operand)}); },
            [&](const Binary& x) { return make_term(Binary{x.op, m(x.lhs), m(x.rhs)}); },
            [&](const Compare& x) { return make_term(Compare{x.op, m(x.lhs), m(x.rhs)}); },
            [&](const FixedTable& x) {
              FixedTable o = x;
              for (auto& e : o.entries) e.term = m(e.term);
              return make_term(std::move(o));
            },
            [&](const ArrayLambda& x) { return make_term(ArrayLambda{m(x.length), x.index_var, m(x.body)}); },
            [&](const FunTerm& x) { return make_term(FunTerm{map_fun(x.fun)}); },
            [&](const Length& x) { return make_term(Length{m(x.operand)}); },
            [&](const AppErr& x) { return make_term(AppErr{m(x.fn), m(x.arg)}); },
            [&](const AppFail& x) { return make_term(AppFail{m(x.fn), m(x.arg)}); },
            [&](const From& x) { return make_term(From{m(x.operand)}); },
            [&](const PtrNew& x) { return make_term(PtrNew{m(x.type), m(x.init)}); },
            [&](const PtrRead& x) { return make_term(PtrRead{m(x.ptr)}); },
            [&](const PtrWrite& x) { return make_term(PtrWrite{m(x.ptr), m(x.value)}); },
            [&](const PtrTo& x) { return make_term(PtrTo{m(x.type)}); },
            [&](const Output& x) { return make_term(Output{m(x.operand)}); },
            [&](const Unify& x) { return make_term(Unify{m(x.lhs), m(x.rhs)}); },
            [&](const Join& x) { return make_term(Join{m(x.lhs), m(x.rhs)}); },
            [&](const Let& x) { return make_term(Let{x.var, m(x.bound), m(x.body)}); },
            [&](const Letrec& x) {
              Letrec o = x;
              for (auto& [name, v] : o.bindings) {
                if (auto* f = std::get_if<FunValue>(&v)) f->fun = map_fun(f->fun);
                if (auto* p = std::get_if<PtrValue>(&v)) p->type = m(p->type);
              }
              o.body = m(x.body);
              return make_term(std::move(o));
            },
            [&](const If& x) {
              return make_term(If{x.var, m(x.cond), m(x.then_branch), m(x.else_branch)});
            },
            [&](const Stage& x) { return make_term(Stage{x.effects, x.decidability, m(x.lhs), m(x.rhs)}); },
            [&](const FxThen& x) { return make_term(FxThen{x.effects, m(x.body)}); },
            [&](const IfM& x) {
              std::shared_ptr<const PointerHeap> saved;
              if (x.saved) saved = std::make_shared<const PointerHeap>(map_heap(*x.saved));
              return make_term(IfM{x.var, m(x.cond), m(x.then_branch), std::move(saved), m(x.else_branch)});
            },
            [&](const LabelRef& x) { return make_term(LabelRef{map(x.label)}); },
            [&](const Frame& x) { return make_term(Frame{map_env(x.env), m(x.body), x.allowed}); },
            [&](const Chk& x) {
              AssumedEqualities ae;
              for (const auto& [a, b] : x.ae) ae.insert({map(a), map(b)});
              return make_term(Chk{map(x.subject), std::move(ae), m(x.pattern), m(x.then_branch),
                                   m(x.else_branch)});
            },
            [&](const auto&) { return t; },
        },
        t->node());
  }

  const MachineState& m_;
  std::unordered_map<std::uint64_t, std::uint64_t> heads_;
  std::unordered_map<std::uint64_t, std::uint64_t> ptrs_;
  std::deque<HeadLabel> head_queue_;
  std::deque<PointerLabel> ptr_queue_;
  bool numbered_ = false;
};

}  // namespace

MachineState canonicalize(const MachineState& m) { return Relabeler(m).run(); }

std::string canonical_text(const MachineState& m, std::string_view text) {
  return Relabeler(m).rename(text);
}

std::optional<std::string> monotonicity_violation(const MachineState& before,
                                                  const MachineState& after) {
  for (const auto& [hl, h] : before.heads) {
    const Head* h2 = lookup(after.heads, hl);
    if (!h2) return "head " + label_string(hl) + " disappeared";
    if (!structurally_equal(h, *h2)) return "head " + label_string(hl) + " changed";
  }
  for (const auto& [pl, cell] : before.pointers) {
    const PointerCell* c2 = lookup(after.pointers, pl);
    if (!c2) return "pointer " + label_string(pl) + " disappeared";
    if (!(cell.env == c2->env)) return "pointer " + label_string(pl) + " changed environment";
    bool same_type = cell.type == c2->type ||
                     (cell.type && c2->type && structurally_equal(*cell.type, *c2->type));
    if (!same_type) return "pointer " + label_string(pl) + " changed type";
  }
  if (!(before.env == after.env)) return "environment changed";
  if (before.allowed != after.allowed) return "allowed effects changed";
  return std::nullopt;
}

}  // namespace aleph
