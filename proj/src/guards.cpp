#include "aleph/guards.hpp"

#include <algorithm>
#include <set>

#include "aleph/overloaded.hpp"

namespace aleph {

namespace {

using namespace node;

struct State {
  const HeadHeap& hh;
  const PointerHeap& ph;
  const Environment& env;
  Effect chi;

  const Head* at(HeadLabel hl) const {
    auto it = hh.find(hl);
    return it == hh.end() ? nullptr : &it->second;
  }
  bool defined(HeadLabel hl) const { return hh.contains(hl); }
  const Integer* int_at(HeadLabel hl) const {
    const Head* h = at(hl);
    const auto* i = h ? std::get_if<IntHead>(h) : nullptr;
    return i ? &i->value : nullptr;
  }
  const TableHead* tab_at(HeadLabel hl) const {
    const Head* h = at(hl);
    return h ? std::get_if<TableHead>(h) : nullptr;
  }
  const Closure* clos_at(HeadLabel hl) const {
    const Head* h = at(hl);
    return h ? std::get_if<Closure>(h) : nullptr;
  }
  const PtrHead* ptr_at(HeadLabel hl) const {
    const Head* h = at(hl);
    return h ? std::get_if<PtrHead>(h) : nullptr;
  }
  bool has(EffectAtom a) const { return effect_leq(Effect(a), chi); }
};

bool is_hl(const TermPtr& t) { return t->is<LabelRef>(); }
HeadLabel hl_of(const TermPtr& t) { return t->as<LabelRef>()->label; }

std::set<Integer> domain(const TableHead& t) {
  std::set<Integer> s;
  for (const auto& e : t.entries) s.insert(e.first);
  return s;
}

bool in_domain(const TableHead& t, const Integer* i) {
  if (!i) return false;
  return std::any_of(t.entries.begin(), t.entries.end(), [&](const auto& e) { return e.first == *i; });
}

bool is_array(const TableHead* t) {
  if (!t) return false;
  for (std::size_t k = 0; k < t->entries.size(); ++k) {
    if (t->entries[k].first != k) return false;
  }
  return true;
}

bool is_identity_type(const Closure* c) {
  if (!c) return false;
  const auto* l = std::get_if<Lambda>(&c->fun);
  if (!l || l->dk != DomainKind::Invariant || l->range_effects != Effect::none()) return false;
  const auto* v = l->body->as<Variable>();
  return v && v->name == l->param;
}

DomainKind kind_of(const Fun& f) {
  const auto* l = std::get_if<Lambda>(&f);
  return l ? l->dk : DomainKind::Contravariant;
}

bool generatable(DomainKind dk) { return dk == DomainKind::Contravariant || dk == DomainKind::Invariant; }

bool reverts_to_generate(const Term& t) {
  return t.is<Unary>() || t.is<Binary>() || t.is<Length>() || t.is<AppErr>() || t.is<AppFail>() ||
         t.is<PtrNew>() || t.is<PtrRead>() || t.is<PtrWrite>() || t.is<PtrTo>() || t.is<Input>() ||
         t.is<Output>() || t.is<FxThen>();
}

class Guards {
 public:
  std::vector<Rule> at(const State& s, const TermPtr& t) {
    std::vector<Rule> out;
    gen(s, t, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  // Adds the congruence rule matching each outcome class of the sub-state.
  void lift(const State& sub, const TermPtr& t, Rule step, Rule fail, Rule error,
            std::vector<Rule>& out) {
    for (Rule r : at(sub, t)) {
      switch (rule_class(r)) {
        case RuleClass::Step: out.push_back(step); break;
        case RuleClass::Fail: out.push_back(fail); break;
        case RuleClass::Error: out.push_back(error); break;
        default: break;
      }
    }
  }

  void ctxt(const State& s, const TermPtr& t, std::vector<Rule>& out) {
    lift(s, t, Rule::RGctxt, Rule::RGctxtF, Rule::RGctxtE, out);
  }

  // Returns true when one of the operands is still being evaluated.
  bool operands(const State& s, std::initializer_list<TermPtr> ops, std::vector<Rule>& out) {
    for (const auto& op : ops) {
      if (!is_hl(op)) {
        ctxt(s, op, out);
        return true;
      }
    }
    return false;
  }

  void letrec(const State& s, const Letrec& x, std::vector<Rule>& out) {
    Environment env = s.env;
    for (const auto& [name, v] : x.bindings) env.push(name, HeadLabel{0});
    bool erroneous = false;
    bool pointers = false;
    for (const auto& [name, v] : x.bindings) {
      std::visit(overloaded{
                     [&](const TupleValue& tv) {
                       for (const auto& [i, y] : tv.entries) {
                         if (!env.contains(y)) erroneous = true;
                       }
                     },
                     [&](const FunValue& f) {
                       if (!generatable(kind_of(f.fun))) erroneous = true;
                     },
                     [&](const PtrValue& p) {
                       pointers = true;
                       if (!env.contains(p.init)) erroneous = true;
                     },
                 },
                 v);
    }
    if (erroneous) out.push_back(Rule::RGletrecE1);
    if (pointers && !s.has(EffectAtom::New)) out.push_back(Rule::RGletrecE2);
    if (!erroneous && (!pointers || s.has(EffectAtom::New))) out.push_back(Rule::RGletrec);
  }

  void gen(const State& s, const TermPtr& t, std::vector<Rule>& out) {
    std::visit(
        overloaded{
            [&](const Variable& x) {
              out.push_back(s.env.contains(x.name) ? Rule::RGvar : Rule::RGvarE);
            },
            [&](const Falses&) { out.push_back(Rule::RGfalsesF); },
            [&](const Anys&) { out.push_back(Rule::RGanysE); },
            [&](const IntLit&) { out.push_back(Rule::RGi); },
            [&](const Ints&) { out.push_back(Rule::RGintsE); },
            [&](const Unary& x) {
              if (operands(s, {x.operand}, out)) return;
              out.push_back(s.int_at(hl_of(x.operand)) ? Rule::RGuop : Rule::RGuopE);
            },
            [&](const Binary& x) {
              if (operands(s, {x.lhs, x.rhs}, out)) return;
              const Integer* a = s.int_at(hl_of(x.lhs));
              const Integer* b = s.int_at(hl_of(x.rhs));
              bool partial = x.op == BinaryOp::Div || x.op == BinaryOp::Mod;
              if (a && b && !(partial && *b == 0)) out.push_back(Rule::RGbop);
              if (!(a && b) || (partial && *b == 0)) out.push_back(Rule::RGbopE);
            },
            [&](const Compare& x) {
              if (operands(s, {x.lhs, x.rhs}, out)) return;
              const Integer* a = s.int_at(hl_of(x.lhs));
              const Integer* b = s.int_at(hl_of(x.rhs));
              if (!(a && b)) {
                out.push_back(Rule::RGcopE);
                return;
              }
              bool holds = false;
              switch (x.op) {
                case CompareOp::Lt: holds = *a < *b; break;
                case CompareOp::Le: holds = *a <= *b; break;
                case CompareOp::Gt: holds = *a > *b; break;
                case CompareOp::Ge: holds = *a >= *b; break;
                case CompareOp::Ne: holds = *a != *b; break;
              }
              out.push_back(holds ? Rule::RGcop : Rule::RGcopF);
            },
            [&](const FixedTable& x) {
              Environment env = s.env;
              for (const auto& e : x.entries) {
                if (!is_hl(e.term)) {
                  State sub{s.hh, s.ph, env, s.chi};
                  lift(sub, e.term, Rule::RGtab2, Rule::RGtabF, Rule::RGtabE, out);
                  return;
                }
                env.push(e.var, hl_of(e.term));
              }
              out.push_back(Rule::RGtab1);
            },
            [&](const ArrayLambda& x) {
              if (operands(s, {x.length}, out)) return;
              const Integer* n = s.int_at(hl_of(x.length));
              out.push_back(n && *n >= 0 ? Rule::RGarr : Rule::RGarrE);
            },
            [&](const Tabs&) { out.push_back(Rule::RGtabsE); },
            [&](const FunTerm& x) { out.push_back(generatable(kind_of(x.fun)) ? Rule::RGfun : Rule::RGfunE); },
            [&](const Funs&) { out.push_back(Rule::RGfunsE); },
            [&](const Length& x) {
              if (operands(s, {x.operand}, out)) return;
              out.push_back(is_array(s.tab_at(hl_of(x.operand))) ? Rule::RGlen : Rule::RGlenE);
            },
            [&](const AppErr& x) {
              if (operands(s, {x.fn, x.arg}, out)) return;
              HeadLabel f = hl_of(x.fn), a = hl_of(x.arg);
              if (const TableHead* tab = s.tab_at(f)) {
                out.push_back(in_domain(*tab, s.int_at(a)) ? Rule::RGappE1 : Rule::RGappEE2);
              } else if (const Closure* c = s.clos_at(f)) {
                out.push_back(std::holds_alternative<Lambda>(c->fun) ? Rule::RGappE2 : Rule::RGappE3);
              } else {
                out.push_back(Rule::RGappEE1);
              }
            },
            [&](const AppFail& x) {
              if (operands(s, {x.fn, x.arg}, out)) return;
              HeadLabel f = hl_of(x.fn), a = hl_of(x.arg);
              if (const TableHead* tab = s.tab_at(f)) {
                if (in_domain(*tab, s.int_at(a))) out.push_back(Rule::RGappF1);
                else if (s.defined(a)) out.push_back(Rule::RGappFF);
                else out.push_back(Rule::RGappFE2);
              } else if (const Closure* c = s.clos_at(f)) {
                if (std::holds_alternative<AllQuant>(c->fun)) out.push_back(Rule::RGappF3);
                else if (kind_of(c->fun) == DomainKind::Contravariant) out.push_back(Rule::RGappF2);
                else if (kind_of(c->fun) == DomainKind::Invariant) out.push_back(Rule::RGappF4);
                else out.push_back(Rule::RGappFE3);
              } else {
                out.push_back(Rule::RGappFE1);
              }
            },
            [&](const From&) { out.push_back(Rule::RGfromE); },
            [&](const PtrNew& x) {
              if (operands(s, {x.init}, out)) return;
              out.push_back(s.has(EffectAtom::New) ? Rule::RGnew : Rule::RGnewE);
            },
            [&](const PtrRead& x) {
              if (operands(s, {x.ptr}, out)) return;
              const PtrHead* p = s.ptr_at(hl_of(x.ptr));
              bool ok = p && s.ph.contains(p->label) && s.has(EffectAtom::Read);
              out.push_back(ok ? Rule::RGread : Rule::RGreadE);
            },
            [&](const PtrWrite& x) {
              if (operands(s, {x.ptr, x.value}, out)) return;
              const PtrHead* p = s.ptr_at(hl_of(x.ptr));
              bool ok = p && s.ph.contains(p->label) && s.has(EffectAtom::Write);
              out.push_back(ok ? Rule::RGwrite : Rule::RGwriteE);
            },
            [&](const PtrTo&) { out.push_back(Rule::RGptrE); },
            [&](const Ptrs&) { out.push_back(Rule::RGptrsE); },
            [&](const Input&) { out.push_back(s.has(EffectAtom::IO) ? Rule::RGin : Rule::RGinE); },
            [&](const Output& x) {
              if (operands(s, {x.operand}, out)) return;
              bool ok = s.int_at(hl_of(x.operand)) && s.has(EffectAtom::IO);
              out.push_back(ok ? Rule::RGout : Rule::RGoutE);
            },
            [&](const Unify& x) {
              if (operands(s, {x.lhs}, out)) return;
              out.push_back(Rule::RGunify);
            },
            [&](const Join&) { out.push_back(Rule::RGjoinE); },
            [&](const Let& x) {
              if (operands(s, {x.bound}, out)) return;
              out.push_back(Rule::RGlet);
            },
            [&](const Letrec& x) { letrec(s, x, out); },
            [&](const If&) { out.push_back(Rule::RGif); },
            [&](const Stage&) { out.push_back(Rule::RGstage); },
            [&](const FxThen&) { out.push_back(Rule::RGfxE); },
            [&](const IfM& x) {
              if (is_hl(x.cond)) {
                out.push_back(Rule::RGif1);
                return;
              }
              State sub{s.hh, s.ph, s.env, effect_meet(s.chi, Effect::reversible())};
              lift(sub, x.cond, Rule::RGif2, Rule::RGif3, Rule::RGifE, out);
            },
            [&](const Frame& x) {
              if (is_hl(x.body)) {
                out.push_back(Rule::RGframe1);
                return;
              }
              State sub{s.hh, s.ph, x.env, x.allowed};
              lift(sub, x.body, Rule::RGframe2, Rule::RGframeF, Rule::RGframeE, out);
            },
            [&](const Chk& x) { test(s, x, out); },
            [&](const LabelRef&) {},
        },
        t->node());
  }

  // Three-way guards shared by the "all X" patterns: in the class, defined
  // but not in the class, undefined.
  void classify(const State& s, HeadLabel hl, bool member, Rule yes, Rule no, Rule undefined,
                std::vector<Rule>& out) {
    if (member) out.push_back(yes);
    if (s.defined(hl) && !member) out.push_back(no);
    if (!s.defined(hl)) out.push_back(undefined);
  }

  void test(const State& s, const Chk& k, std::vector<Rule>& out) {
    const Term& p = *k.pattern;
    HeadLabel hl = k.subject;
    if (reverts_to_generate(p)) {
      out.push_back(Rule::RTgen);
      return;
    }
    std::visit(
        overloaded{
            [&](const Variable& x) { out.push_back(s.env.contains(x.name) ? Rule::RTvar : Rule::RTvarE); },
            [&](const Falses&) { out.push_back(Rule::RTfalses); },
            [&](const Anys&) { out.push_back(Rule::RTanys); },
            [&](const IntLit& x) {
              const Integer* i = s.int_at(hl);
              classify(s, hl, i && *i == x.value, Rule::RTi1, Rule::RTi2, Rule::RTiE, out);
            },
            [&](const Ints&) {
              classify(s, hl, s.int_at(hl) != nullptr, Rule::RTints1, Rule::RTints2, Rule::RTintsE, out);
            },
            [&](const Compare&) { out.push_back(Rule::RTcop); },
            [&](const FixedTable& x) {
              std::set<Integer> want;
              for (const auto& e : x.entries) want.insert(e.index);
              const TableHead* tab = s.tab_at(hl);
              classify(s, hl, tab && domain(*tab) == want, Rule::RTtab1, Rule::RTtab2, Rule::RTtabE, out);
            },
            [&](const ArrayLambda&) {
              classify(s, hl, is_array(s.tab_at(hl)), Rule::RTarr1, Rule::RTarr2, Rule::RTarrE, out);
            },
            [&](const Tabs&) {
              classify(s, hl, s.tab_at(hl) != nullptr, Rule::RTtabs1, Rule::RTtabs2, Rule::RTtabsE, out);
            },
            [&](const FunTerm&) {
              if (s.defined(hl) && !s.clos_at(hl)) out.push_back(Rule::RTfun);
              if (s.clos_at(hl)) out.push_back(Rule::RTfunE1);
              if (!s.defined(hl)) out.push_back(Rule::RTfunE2);
            },
            [&](const Funs&) {
              classify(s, hl, s.clos_at(hl) != nullptr, Rule::RTfuns1, Rule::RTfuns2, Rule::RTfunsE, out);
            },
            [&](const From& x) {
              const auto* v = x.operand->as<Variable>();
              if (!v) {
                out.push_back(Rule::RTfrom1);
                return;
              }
              auto bound = s.env.lookup(v->name);
              out.push_back(bound && is_identity_type(s.clos_at(*bound)) ? Rule::RTfrom2 : Rule::RTfromE);
            },
            [&](const Ptrs&) {
              classify(s, hl, s.ptr_at(hl) != nullptr, Rule::RTptrs1, Rule::RTptrs2, Rule::RTptrsE, out);
            },
            [&](const Unify&) { out.push_back(Rule::RTunify); },
            [&](const Join&) { out.push_back(Rule::RTjoin); },
            [&](const Let&) { out.push_back(Rule::RTlet); },
            [&](const Letrec&) { out.push_back(Rule::RTletrec); },
            [&](const If&) { out.push_back(Rule::RTif); },
            [&](const Stage&) { out.push_back(Rule::RTstage); },
            [&](const LabelRef& x) { test_label(s, k, x.label, out); },
            [&](const auto&) {},
        },
        p.node());
  }

  void test_label(const State& s, const Chk& k, HeadLabel hl2, std::vector<Rule>& out) {
    HeadLabel hl1 = k.subject;
    if (k.ae.contains({hl1, hl2})) {
      out.push_back(Rule::RThl);
      return;
    }
    bool d2 = s.defined(hl2);
    if (const Integer* i = s.int_at(hl1)) {
      const Integer* j = s.int_at(hl2);
      if (j && *j == *i) out.push_back(Rule::RThli1);
      if (d2 && !(j && *j == *i)) out.push_back(Rule::RThli2);
    }
    if (const TableHead* t1 = s.tab_at(hl1)) {
      const TableHead* t2 = s.tab_at(hl2);
      bool same = t2 && domain(*t1) == domain(*t2);
      if (same) out.push_back(Rule::RThltab1);
      if (d2 && !same) out.push_back(Rule::RThltab2);
    }
    if (s.clos_at(hl1)) {
      if (d2 && !s.clos_at(hl2)) out.push_back(Rule::RThlfun);
      if (s.clos_at(hl2)) out.push_back(Rule::RThlfunE);
    }
    if (const PtrHead* p1 = s.ptr_at(hl1)) {
      const PtrHead* p2 = s.ptr_at(hl2);
      bool same = p2 && p2->label == p1->label;
      if (same) out.push_back(Rule::RThlpl1);
      if (d2 && !same) out.push_back(Rule::RThlpl2);
    }
    if (!s.defined(hl1) || !d2) out.push_back(Rule::RThlE);
  }
};

const char* class_name(RuleClass c) {
  switch (c) {
    case RuleClass::Step: return "step";
    case RuleClass::Fail: return "failure";
    case RuleClass::Error: return "error";
    default: return "other";
  }
}

std::string rule_list(const std::vector<Rule>& rules) {
  std::string s;
  for (Rule r : rules) {
    if (!s.empty()) s += ", ";
    s += rule_name(r);
  }
  return s.empty() ? "none" : s;
}

}  // namespace

std::vector<Rule> matching_rules(const MachineState& m) {
  State s{m.heads, m.pointers, m.env, m.allowed};
  return Guards().at(s, m.term);
}

std::optional<Rule> applicable_rule(const MachineState& m) {
  if (m.is_terminal()) return std::nullopt;
  auto rules = matching_rules(m);
  if (rules.empty()) throw std::logic_error("no rule applies");
  RuleClass cls = rule_class(rules.front());
  for (Rule r : rules) {
    if (rule_class(r) != cls) throw std::logic_error("rules from several outcome classes apply: " + rule_list(rules));
  }
  if (cls == RuleClass::Step && rules.size() > 1) {
    throw std::logic_error("several step rules apply: " + rule_list(rules));
  }
  return rules.front();
}

std::optional<std::string> uniqueness_violation(const MachineState& m,
                                                const Machine::Result& observed) {
  using Kind = Machine::Result::Kind;
  auto rules = matching_rules(m);
  if (m.is_terminal()) {
    if (!rules.empty()) return "terminal state matches " + rule_list(rules);
    if (observed.kind != Kind::Terminal) return "terminal state but the stepper did not stop";
    return std::nullopt;
  }
  if (rules.empty()) return "no rule applies";
  std::set<RuleClass> classes;
  for (Rule r : rules) classes.insert(rule_class(r));
  if (classes.size() != 1) return "rules from several outcome classes apply: " + rule_list(rules);
  RuleClass cls = *classes.begin();
  if (cls == RuleClass::Step && rules.size() != 1) return "several step rules apply: " + rule_list(rules);

  RuleClass seen = RuleClass::Program;
  switch (observed.kind) {
    case Kind::Stepped: seen = RuleClass::Step; break;
    case Kind::Fail: seen = RuleClass::Fail; break;
    case Kind::Error: seen = RuleClass::Error; break;
    case Kind::Terminal: return "stepper stopped but " + rule_list(rules) + " applies";
  }
  if (seen != cls) {
    return std::string("guards give ") + class_name(cls) + " (" + rule_list(rules) + ") but the stepper gave " +
           class_name(seen);
  }
  if (observed.rules.empty()) return "stepper reported no derivation";
  Rule root = observed.rules.front();
  if (std::find(rules.begin(), rules.end(), root) == rules.end()) {
    return "stepper fired " + std::string(rule_name(root)) + " but guards give " + rule_list(rules);
  }
  return std::nullopt;
}

}  // namespace aleph
