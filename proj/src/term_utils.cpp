#include "aleph/term_utils.hpp"

#include <algorithm>

#include "aleph/overloaded.hpp"

namespace aleph {

std::string Diagnostic::to_string() const {
  std::string out;
  if (line > 0) out += std::to_string(line) + ":" + std::to_string(column) + ": ";
  out += message;
  if (line == 0 && !path.empty()) {
    out += " (at path";
    for (auto i : path) out += " " + std::to_string(i);
    out += ")";
  }
  return out;
}

// ---------------------------------------------------------------------------
// free variables
// ---------------------------------------------------------------------------

namespace {

void add_all(std::set<VarName>& into, const std::set<VarName>& from) {
  into.insert(from.begin(), from.end());
}

std::set<VarName> fv(const TermPtr& t) { return t ? free_vars(*t) : std::set<VarName>{}; }

std::set<VarName> without(std::set<VarName> s, const VarName& x) {
  s.erase(x);
  return s;
}

std::set<VarName> value_vars(const SourceValue& v) {
  return std::visit(overloaded{
                        [](const TupleValue& tv) {
                          std::set<VarName> out;
                          for (const auto& [i, x] : tv.entries) out.insert(x);
                          return out;
                        },
                        [](const FunValue& f) { return free_vars(f.fun); },
                        [](const PtrValue& p) {
                          auto out = fv(p.type);
                          out.insert(p.init);
                          return out;
                        },
                    },
                    v);
}

}  // namespace

std::set<VarName> free_vars(const Fun& f) {
  return std::visit(overloaded{
                        [](const Lambda& l) {
                          auto out = fv(l.domain);
                          add_all(out, without(fv(l.body), l.param));
                          return out;
                        },
                        [](const AllQuant& a) {
                          auto out = fv(a.type_domain);
                          add_all(out, without(fv(a.instantiation), a.param));
                          add_all(out, without(fv(a.domain), a.type_var));
                          auto body = fv(a.body);
                          body.erase(a.type_var);
                          body.erase(a.param);
                          add_all(out, body);
                          return out;
                        },
                    },
                    f);
}

std::set<VarName> free_vars(const Term& t) {
  using namespace node;
  return std::visit(
      overloaded{
          [](const Variable& x) { return std::set<VarName>{x.name}; },
          [](const Unary& x) { return fv(x.operand); },
          [](const Binary& x) {
            auto s = fv(x.lhs);
            add_all(s, fv(x.rhs));
            return s;
          },
          [](const Compare& x) {
            auto s = fv(x.lhs);
            add_all(s, fv(x.rhs));
            return s;
          },
          [](const FixedTable& x) {
            // Walk right to left so each entry variable removes itself from
            // the entries after it.
            std::set<VarName> s;
            for (auto it = x.entries.rbegin(); it != x.entries.rend(); ++it) {
              s.erase(it->var);
              add_all(s, fv(it->term));
            }
            return s;
          },
          [](const ArrayLambda& x) {
            auto s = fv(x.length);
            add_all(s, without(fv(x.body), x.index_var));
            return s;
          },
          [](const FunTerm& x) { return free_vars(x.fun); },
          [](const Length& x) { return fv(x.operand); },
          [](const AppErr& x) {
            auto s = fv(x.fn);
            add_all(s, fv(x.arg));
            return s;
          },
          [](const AppFail& x) {
            auto s = fv(x.fn);
            add_all(s, fv(x.arg));
            return s;
          },
          [](const From& x) { return fv(x.operand); },
          [](const PtrNew& x) {
            auto s = fv(x.type);
            add_all(s, fv(x.init));
            return s;
          },
          [](const PtrRead& x) { return fv(x.ptr); },
          [](const PtrWrite& x) {
            auto s = fv(x.ptr);
            add_all(s, fv(x.value));
            return s;
          },
          [](const PtrTo& x) { return fv(x.type); },
          [](const Output& x) { return fv(x.operand); },
          [](const Unify& x) {
            auto s = fv(x.lhs);
            add_all(s, fv(x.rhs));
            return s;
          },
          [](const Join& x) {
            auto s = fv(x.lhs);
            add_all(s, fv(x.rhs));
            return s;
          },
          [](const Let& x) {
            auto s = fv(x.bound);
            add_all(s, without(fv(x.body), x.var));
            return s;
          },
          [](const Letrec& x) {
            auto s = fv(x.body);
            for (const auto& [name, v] : x.bindings) add_all(s, value_vars(v));
            for (const auto& [name, v] : x.bindings) s.erase(name);
            return s;
          },
          [](const If& x) {
            auto s = fv(x.cond);
            add_all(s, without(fv(x.then_branch), x.var));
            add_all(s, fv(x.else_branch));
            return s;
          },
          [](const Stage& x) {
            auto s = fv(x.lhs);
            add_all(s, fv(x.rhs));
            return s;
          },
          [](const FxThen& x) { return fv(x.body); },
          [](const IfM& x) {
            auto s = fv(x.cond);
            add_all(s, without(fv(x.then_branch), x.var));
            add_all(s, fv(x.else_branch));
            return s;
          },
          [](const Frame& x) {
            // The outer environment does not bind in a frame body; what the
            // frame's own environment leaves unbound is reported as free.
            auto s = fv(x.body);
            for (const auto& [name, hl] : x.env) s.erase(name);
            return s;
          },
          [](const Chk& x) {
            auto s = fv(x.pattern);
            add_all(s, fv(x.then_branch));
            add_all(s, fv(x.else_branch));
            return s;
          },
          [](const auto&) { return std::set<VarName>{}; },
      },
      t.node());
}

VarName fresh_var(const std::string& base, const std::set<VarName>& avoid) {
  VarName candidate = "%" + base;
  for (std::size_t n = 1; avoid.contains(candidate); ++n) {
    candidate = "%" + base + std::to_string(n);
  }
  return candidate;
}

// ---------------------------------------------------------------------------
// well-formedness
// ---------------------------------------------------------------------------

namespace {

class WellFormedWalker {
 public:
  explicit WellFormedWalker(CheckMode mode) : mode_(mode) {}

  std::vector<Diagnostic> take() { return std::move(diags_); }

  void walk(const TermPtr& t) {
    if (t) walk(*t);
  }

  void walk(const Term& t) {
    using namespace node;
    std::visit(
        overloaded{
            [&](const Variable& x) { use(x.name, &t); },
            [&](const Unary& x) { child(0, x.operand); },
            [&](const Binary& x) {
              child(0, x.lhs);
              child(1, x.rhs);
            },
            [&](const Compare& x) {
              child(0, x.lhs);
              child(1, x.rhs);
            },
            [&](const FixedTable& x) {
              std::vector<Integer> seen;
              for (const auto& e : x.entries) {
                if (std::find(seen.begin(), seen.end(), e.index) != seen.end()) {
                  report("duplicate table index " + e.index.str(), &t);
                }
                seen.push_back(e.index);
              }
              std::size_t pushed = 0;
              for (std::size_t i = 0; i < x.entries.size(); ++i) {
                child(i, x.entries[i].term);
                scope_.push_back(x.entries[i].var);
                ++pushed;
              }
              scope_.resize(scope_.size() - pushed);
            },
            [&](const ArrayLambda& x) {
              child(0, x.length);
              bound(1, x.index_var, x.body);
            },
            [&](const FunTerm& x) { walk_fun(x.fun, 0); },
            [&](const Length& x) { child(0, x.operand); },
            [&](const AppErr& x) {
              child(0, x.fn);
              child(1, x.arg);
            },
            [&](const AppFail& x) {
              child(0, x.fn);
              child(1, x.arg);
            },
            [&](const From& x) { child(0, x.operand); },
            [&](const PtrNew& x) {
              child(0, x.type);
              child(1, x.init);
            },
            [&](const PtrRead& x) { child(0, x.ptr); },
            [&](const PtrWrite& x) {
              child(0, x.ptr);
              child(1, x.value);
            },
            [&](const PtrTo& x) { child(0, x.type); },
            [&](const Output& x) { child(0, x.operand); },
            [&](const Unify& x) {
              child(0, x.lhs);
              child(1, x.rhs);
            },
            [&](const Join& x) {
              child(0, x.lhs);
              child(1, x.rhs);
            },
            [&](const Let& x) {
              child(0, x.bound);
              bound(1, x.var, x.body);
            },
            [&](const Letrec& x) {
              for (const auto& [name, v] : x.bindings) scope_.push_back(name);
              for (std::size_t i = 0; i < x.bindings.size(); ++i) {
                path_.push_back(i);
                walk_value(x.bindings[i].second);
                path_.pop_back();
              }
              child(x.bindings.size(), x.body);
              scope_.resize(scope_.size() - x.bindings.size());
            },
            [&](const If& x) {
              child(0, x.cond);
              bound(1, x.var, x.then_branch);
              child(2, x.else_branch);
            },
            [&](const Stage& x) {
              child(0, x.lhs);
              child(1, x.rhs);
            },
            [&](const FxThen& x) { child(0, x.body); },
            [&](const IfM&) { report("machine-only form ifm in source term", &t); },
            [&](const LabelRef&) { report("machine-only head label in source term", &t); },
            [&](const Frame&) { report("machine-only form frame in source term", &t); },
            [&](const Chk&) { report("machine-only form chk in source term", &t); },
            [](const auto&) {},
        },
        t.node());
  }

 private:
  void child(std::size_t i, const TermPtr& t) {
    path_.push_back(i);
    walk(t);
    path_.pop_back();
  }

  void bound(std::size_t i, const VarName& x, const TermPtr& t) {
    scope_.push_back(x);
    child(i, t);
    scope_.pop_back();
  }

  void walk_fun(const Fun& f, std::size_t) {
    std::visit(overloaded{
                   [&](const Lambda& l) {
                     child(0, l.domain);
                     bound(1, l.param, l.body);
                   },
                   [&](const AllQuant& a) {
                     child(0, a.type_domain);
                     bound(1, a.param, a.instantiation);
                     bound(2, a.type_var, a.domain);
                     scope_.push_back(a.type_var);
                     bound(3, a.param, a.body);
                     scope_.pop_back();
                   },
               },
               f);
  }

  void walk_value(const SourceValue& v) {
    std::visit(overloaded{
                   [&](const TupleValue& tv) {
                     std::vector<Integer> seen;
                     for (const auto& [i, x] : tv.entries) {
                       if (std::find(seen.begin(), seen.end(), i) != seen.end()) {
                         report("duplicate tuple index " + i.str(), &v);
                       }
                       seen.push_back(i);
                       use(x, &v);
                     }
                   },
                   [&](const FunValue& f) { walk_fun(f.fun, 0); },
                   [&](const PtrValue& p) {
                     child(0, p.type);
                     use(p.init, &v);
                   },
               },
               v);
  }

  void use(const VarName& x, const void* where) {
    if (mode_ != CheckMode::Program) return;
    if (std::find(scope_.begin(), scope_.end(), x) == scope_.end()) {
      report("unbound variable " + x, where);
    }
  }

  void report(std::string message, const void* where) {
    diags_.push_back(Diagnostic{std::move(message), path_, where});
  }

  CheckMode mode_;
  std::vector<VarName> scope_;
  std::vector<std::size_t> path_;
  std::vector<Diagnostic> diags_;
};

}  // namespace

std::vector<Diagnostic> well_formed_source(const Term& t, CheckMode mode) {
  WellFormedWalker w(mode);
  w.walk(t);
  return w.take();
}

// ---------------------------------------------------------------------------
// alpha equivalence
// ---------------------------------------------------------------------------

namespace {

class AlphaComparer {
 public:
  bool eq(const TermPtr& a, const TermPtr& b) {
    if (!a || !b) return a == b;
    return eq(*a, *b);
  }

  bool eq(const Term& a, const Term& b) {
    const auto& na = a.node();
    const auto& nb = b.node();
    if (na.index() != nb.index()) return false;
    using namespace node;
    return std::visit(
        overloaded{
            [&](const Variable& x) { return same_var(x.name, std::get<Variable>(nb).name); },
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
              std::size_t mark = scope_.size();
              bool ok = true;
              for (std::size_t i = 0; ok && i < x.entries.size(); ++i) {
                ok = x.entries[i].index == y.entries[i].index &&
                     eq(x.entries[i].term, y.entries[i].term);
                scope_.emplace_back(x.entries[i].var, y.entries[i].var);
              }
              scope_.resize(mark);
              return ok;
            },
            [&](const ArrayLambda& x) {
              const auto& y = std::get<ArrayLambda>(nb);
              return eq(x.length, y.length) && under(x.index_var, y.index_var, x.body, y.body);
            },
            [&](const FunTerm& x) { return eq_fun(x.fun, std::get<FunTerm>(nb).fun); },
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
              return eq(x.bound, y.bound) && under(x.var, y.var, x.body, y.body);
            },
            [&](const Letrec& x) {
              const auto& y = std::get<Letrec>(nb);
              if (x.bindings.size() != y.bindings.size()) return false;
              std::size_t mark = scope_.size();
              for (std::size_t i = 0; i < x.bindings.size(); ++i) {
                scope_.emplace_back(x.bindings[i].first, y.bindings[i].first);
              }
              bool ok = true;
              for (std::size_t i = 0; ok && i < x.bindings.size(); ++i) {
                ok = eq_value(x.bindings[i].second, y.bindings[i].second);
              }
              ok = ok && eq(x.body, y.body);
              scope_.resize(mark);
              return ok;
            },
            [&](const If& x) {
              const auto& y = std::get<If>(nb);
              return eq(x.cond, y.cond) && under(x.var, y.var, x.then_branch, y.then_branch) &&
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
              bool saved = x.saved == y.saved ||
                           (x.saved && y.saved && structurally_equal(*x.saved, *y.saved));
              return saved && eq(x.cond, y.cond) &&
                     under(x.var, y.var, x.then_branch, y.then_branch) &&
                     eq(x.else_branch, y.else_branch);
            },
            [&](const LabelRef& x) { return x.label == std::get<LabelRef>(nb).label; },
            [&](const Frame& x) {
              const auto& y = std::get<Frame>(nb);
              if (!(x.env == y.env) || x.allowed != y.allowed) return false;
              // The frame's environment replaces the outer scope entirely.
              std::vector<std::pair<VarName, VarName>> saved;
              saved.swap(scope_);
              for (const auto& [name, hl] : x.env) scope_.emplace_back(name, name);
              bool ok = eq(x.body, y.body);
              scope_.swap(saved);
              return ok;
            },
            [&](const Chk& x) {
              const auto& y = std::get<Chk>(nb);
              if (x.subject != y.subject || x.ae != y.ae || !eq(x.pattern, y.pattern)) return false;
              std::vector<std::pair<VarName, VarName>> saved;
              saved.swap(scope_);
              bool ok = eq(x.then_branch, y.then_branch) && eq(x.else_branch, y.else_branch);
              scope_.swap(saved);
              return ok;
            },
            [](const auto&) { return true; },
        },
        na);
  }

 private:
  bool same_var(const VarName& a, const VarName& b) const {
    // Rightmost binder on each side; both must be the same binder, or both
    // free with the same name.
    std::optional<std::size_t> ia, ib;
    for (std::size_t i = scope_.size(); i-- > 0;) {
      if (!ia && scope_[i].first == a) ia = i;
      if (!ib && scope_[i].second == b) ib = i;
      if (ia && ib) break;
    }
    if (!ia && !ib) return a == b;
    return ia == ib;
  }

  bool under(const VarName& xa, const VarName& xb, const TermPtr& a, const TermPtr& b) {
    scope_.emplace_back(xa, xb);
    bool ok = eq(a, b);
    scope_.pop_back();
    return ok;
  }

  bool eq_fun(const Fun& a, const Fun& b) {
    if (a.index() != b.index()) return false;
    if (auto* l = std::get_if<Lambda>(&a)) {
      const auto& m = std::get<Lambda>(b);
      return l->dk == m.dk && l->dom_effects == m.dom_effects &&
             l->range_effects == m.range_effects && eq(l->domain, m.domain) &&
             under(l->param, m.param, l->body, m.body);
    }
    const auto& x = std::get<AllQuant>(a);
    const auto& y = std::get<AllQuant>(b);
    if (x.dom_effects != y.dom_effects || x.range_effects != y.range_effects) return false;
    if (!eq(x.type_domain, y.type_domain)) return false;
    if (!under(x.param, y.param, x.instantiation, y.instantiation)) return false;
    if (!under(x.type_var, y.type_var, x.domain, y.domain)) return false;
    scope_.emplace_back(x.type_var, y.type_var);
    bool ok = under(x.param, y.param, x.body, y.body);
    scope_.pop_back();
    return ok;
  }

  bool eq_value(const SourceValue& a, const SourceValue& b) {
    if (a.index() != b.index()) return false;
    if (auto* t = std::get_if<TupleValue>(&a)) {
      const auto& u = std::get<TupleValue>(b);
      if (t->entries.size() != u.entries.size()) return false;
      for (std::size_t i = 0; i < t->entries.size(); ++i) {
        if (t->entries[i].first != u.entries[i].first) return false;
        if (!same_var(t->entries[i].second, u.entries[i].second)) return false;
      }
      return true;
    }
    if (auto* f = std::get_if<FunValue>(&a)) return eq_fun(f->fun, std::get<FunValue>(b).fun);
    const auto& p = std::get<PtrValue>(a);
    const auto& q = std::get<PtrValue>(b);
    return eq(p.type, q.type) && same_var(p.init, q.init);
  }

  std::vector<std::pair<VarName, VarName>> scope_;
};

}  // namespace

bool alpha_equal(const Term& a, const Term& b) {
  AlphaComparer c;
  return c.eq(a, b);
}

bool is_revert_to_generate(const Term& t) {
  using namespace node;
  return t.is<Unary>() || t.is<Binary>() || t.is<Length>() || t.is<AppErr>() ||
         t.is<AppFail>() || t.is<PtrNew>() || t.is<PtrRead>() || t.is<PtrWrite>() ||
         t.is<PtrTo>() || t.is<Input>() || t.is<Output>() || t.is<FxThen>();
}

}  // namespace aleph
