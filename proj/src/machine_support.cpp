#include <algorithm>
#include <istream>
#include <ostream>

#include "aleph/machine.hpp"
#include "aleph/overloaded.hpp"

namespace aleph {

std::string to_string(const Action& a) {
  switch (a.kind) {
    case Action::Kind::Pure: return "T";
    case Action::Kind::In: return "in " + a.value.str();
    case Action::Kind::Out: return "out " + a.value.str();
    case Action::Kind::New: return "N";
    case Action::Kind::Read: return "R";
    case Action::Kind::Write: return "W";
  }
  return "?";
}

std::optional<Integer> ScriptedInput::next() {
  if (pos_ >= values_.size()) return std::nullopt;
  return values_[pos_++];
}

std::optional<Integer> StreamInput::next() {
  if (prompt_) {
    *prompt_ << "input> " << std::flush;
  }
  std::string word;
  if (!(in_ >> word)) return std::nullopt;
  try {
    return Integer(word);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string label_string(HeadLabel hl) { return "#" + std::to_string(hl.id); }
std::string label_string(PointerLabel pl) { return "@" + std::to_string(pl.id); }

// ---------------------------------------------------------------------------

bool same_index_set(const std::vector<Integer>& a, const std::vector<Integer>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& i : a) {
    if (std::find(b.begin(), b.end(), i) == b.end()) return false;
  }
  return true;
}

bool HeadClass::is_tab_fields(const std::vector<Integer>& indices) const {
  return is_tab && same_index_set(tab_indices, indices);
}

HeadClass classify_head(const Head* h) {
  HeadClass c;
  if (!h) return c;
  std::visit(overloaded{
                 [&](const IntHead& i) {
                   c.is_int = true;
                   c.is_nat = i.value >= 0;
                 },
                 [&](const TableHead& t) {
                   c.is_tab = true;
                   c.is_app = true;
                   c.is_arr = true;
                   for (std::size_t k = 0; k < t.entries.size(); ++k) {
                     c.tab_indices.push_back(t.entries[k].first);
                     if (t.entries[k].first != Integer(k)) c.is_arr = false;
                   }
                 },
                 [&](const Closure& cl) {
                   c.is_fun = true;
                   c.is_app = true;
                   if (auto* l = std::get_if<Lambda>(&cl.fun)) {
                     const auto* body = l->body ? l->body->as<node::Variable>() : nullptr;
                     c.is_typ = l->dk == DomainKind::Invariant &&
                                l->range_effects == Effect::none() && body &&
                                body->name == l->param;
                   }
                 },
                 [&](const PtrHead&) { c.is_ptr = true; },
             },
             *h);
  return c;
}

DomainKind dk_of(const Fun& f) {
  if (auto* l = std::get_if<Lambda>(&f)) return l->dk;
  return DomainKind::Contravariant;
}

// ---------------------------------------------------------------------------
// Contexts
// ---------------------------------------------------------------------------

const char* to_string(Production p) {
  switch (p) {
    case Production::Uop: return "uop []";
    case Production::BopLeft: return "bop [] t";
    case Production::BopRight: return "bop hl []";
    case Production::CopLeft: return "cop [] t";
    case Production::CopRight: return "cop hl []";
    case Production::ArrLength: return "arr [] x t";
    case Production::Len: return "len []";
    case Production::AppELeft: return "appE [] t";
    case Production::AppERight: return "appE hl []";
    case Production::AppFLeft: return "appF [] t";
    case Production::AppFRight: return "appF hl []";
    case Production::NewInit: return "new t []";
    case Production::Read: return "read []";
    case Production::WriteLeft: return "write [] t";
    case Production::WriteRight: return "write hl []";
    case Production::Out: return "out []";
    case Production::UnifyLeft: return "unify [] t";
    case Production::LetBound: return "let x [] t";
  }
  return "?";
}

std::size_t EvalContext::hole() const {
  switch (production) {
    case Production::BopRight:
    case Production::CopRight:
    case Production::AppERight:
    case Production::AppFRight:
    case Production::NewInit:
    case Production::WriteRight:
      return 1;
    default:
      return 0;
  }
}

TermPtr EvalContext::plug(TermPtr t) const { return replace_child(*term, hole(), std::move(t)); }

namespace {

bool is_label(const TermPtr& t) { return t && t->is<node::LabelRef>(); }

}  // namespace

std::optional<std::pair<EvalContext, TermPtr>> decompose(const TermPtr& t) {
  using namespace node;
  auto one = [&](Production p, const TermPtr& sub)
      -> std::optional<std::pair<EvalContext, TermPtr>> {
    if (is_label(sub)) return std::nullopt;
    return std::make_pair(EvalContext{p, t}, sub);
  };
  auto two = [&](Production left, Production right, const TermPtr& a, const TermPtr& b)
      -> std::optional<std::pair<EvalContext, TermPtr>> {
    if (!is_label(a)) return std::make_pair(EvalContext{left, t}, a);
    if (!is_label(b)) return std::make_pair(EvalContext{right, t}, b);
    return std::nullopt;
  };
  return std::visit(
      overloaded{
          [&](const Unary& x) { return one(Production::Uop, x.operand); },
          [&](const Binary& x) { return two(Production::BopLeft, Production::BopRight, x.lhs, x.rhs); },
          [&](const Compare& x) { return two(Production::CopLeft, Production::CopRight, x.lhs, x.rhs); },
          [&](const ArrayLambda& x) { return one(Production::ArrLength, x.length); },
          [&](const Length& x) { return one(Production::Len, x.operand); },
          [&](const AppErr& x) { return two(Production::AppELeft, Production::AppERight, x.fn, x.arg); },
          [&](const AppFail& x) { return two(Production::AppFLeft, Production::AppFRight, x.fn, x.arg); },
          [&](const PtrNew& x) { return one(Production::NewInit, x.init); },
          [&](const PtrRead& x) { return one(Production::Read, x.ptr); },
          [&](const PtrWrite& x) {
            return two(Production::WriteLeft, Production::WriteRight, x.ptr, x.value);
          },
          [&](const Output& x) { return one(Production::Out, x.operand); },
          [&](const Unify& x) { return one(Production::UnifyLeft, x.lhs); },
          [&](const Let& x) { return one(Production::LetBound, x.bound); },
          [](const auto&) -> std::optional<std::pair<EvalContext, TermPtr>> { return std::nullopt; },
      },
      t->node());
}

TermPtr replace_child(const Term& parent, std::size_t index, TermPtr child) {
  using namespace node;
  auto bad = [&]() -> TermPtr { throw std::logic_error("replace_child: no such hole"); };
  return std::visit(
      overloaded{
          [&](const Unary& x) { return index == 0 ? mk::uop(x.op, child) : bad(); },
          [&](const Binary& x) {
            if (index == 0) return mk::bop(x.op, child, x.rhs);
            if (index == 1) return mk::bop(x.op, x.lhs, child);
            return bad();
          },
          [&](const Compare& x) {
            if (index == 0) return mk::cop(x.op, child, x.rhs);
            if (index == 1) return mk::cop(x.op, x.lhs, child);
            return bad();
          },
          [&](const FixedTable& x) {
            if (index >= x.entries.size()) return bad();
            auto entries = x.entries;
            entries[index].term = child;
            return mk::table(std::move(entries));
          },
          [&](const ArrayLambda& x) { return index == 0 ? mk::arr(child, x.index_var, x.body) : bad(); },
          [&](const Length& x) {
            (void)x;
            return index == 0 ? mk::len(child) : bad();
          },
          [&](const AppErr& x) {
            if (index == 0) return mk::appe(child, x.arg);
            if (index == 1) return mk::appe(x.fn, child);
            return bad();
          },
          [&](const AppFail& x) {
            if (index == 0) return mk::appf(child, x.arg);
            if (index == 1) return mk::appf(x.fn, child);
            return bad();
          },
          [&](const PtrNew& x) {
            if (index == 0) return mk::ptr_new(child, x.init);
            if (index == 1) return mk::ptr_new(x.type, child);
            return bad();
          },
          [&](const PtrRead&) { return index == 0 ? mk::ptr_read(child) : bad(); },
          [&](const PtrWrite& x) {
            if (index == 0) return mk::ptr_write(child, x.value);
            if (index == 1) return mk::ptr_write(x.ptr, child);
            return bad();
          },
          [&](const Output&) { return index == 0 ? mk::output(child) : bad(); },
          [&](const Unify& x) {
            if (index == 0) return mk::unify(child, x.rhs);
            if (index == 1) return mk::unify(x.lhs, child);
            return bad();
          },
          [&](const Let& x) {
            if (index == 0) return mk::let(x.var, child, x.body);
            if (index == 1) return mk::let(x.var, x.bound, child);
            return bad();
          },
          [&](const Frame& x) { return index == 0 ? mk::frame(x.env, child, x.allowed) : bad(); },
          [&](const IfM& x) {
            if (index != 0) return bad();
            return make_term(IfM{x.var, child, x.then_branch, x.saved, x.else_branch});
          },
          [&](const auto&) { return bad(); },
      },
      parent.node());
}

// ---------------------------------------------------------------------------
// Letrec values, pointer heaps
// ---------------------------------------------------------------------------

std::variant<ValueHead, Erroneous> eval_value(const PointerHeap& ph, const Environment& env,
                                              const SourceValue& v, PointerLabel fresh) {
  using Result = std::variant<ValueHead, Erroneous>;
  return std::visit(
      overloaded{
          [&](const TupleValue& tv) -> Result {
            TableHead head;
            for (const auto& [i, x] : tv.entries) {
              auto hl = env.lookup(x);
              if (!hl) return Erroneous{Rule::RVtableE, "unbound variable " + x};
              head.entries.emplace_back(i, *hl);
            }
            return ValueHead{Rule::RVtable, std::move(head), ph};
          },
          [&](const FunValue& f) -> Result {
            auto dk = dk_of(f.fun);
            if (dk != DomainKind::Contravariant && dk != DomainKind::Invariant) {
              return Erroneous{Rule::RVfunE, std::string("function with domain kind ") + to_string(dk)};
            }
            return ValueHead{Rule::RVfun, Closure{env, f.fun}, ph};
          },
          [&](const PtrValue& p) -> Result {
            auto hl = env.lookup(p.init);
            if (!hl) return Erroneous{Rule::RVptrE, "unbound variable " + p.init};
            PointerHeap out = ph;
            extend_heap(out, fresh, PointerCell{env, p.type, *hl});
            return ValueHead{Rule::RVptr, PtrHead{fresh}, std::move(out)};
          },
      },
      v);
}

PointerHeap restore_pointer_heap(const PointerHeap& current, const PointerHeap& saved) {
  PointerHeap out = current;
  for (const auto& [pl, cell] : saved) {
    auto it = out.find(pl);
    if (it == out.end()) {
      throw std::logic_error("restore_pointer_heap: saved pointer " + label_string(pl) +
                             " missing from the current heap");
    }
    it->second = cell;
  }
  return out;
}

}  // namespace aleph
