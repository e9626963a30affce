#include "aleph/machine.hpp"

#include <algorithm>

#include "aleph/overloaded.hpp"
#include "aleph/term_utils.hpp"

namespace aleph {

namespace {

using namespace node;

// ---------------------------------------------------------------------------
// Local rules: everything that fires at the redex itself
// ---------------------------------------------------------------------------

struct Local {
  RuleClass cls = RuleClass::Step;
  Rule rule = Rule::RGi;
  Action action;
  TermPtr next;
  std::string detail;
  std::vector<Rule> premises;
};

Local stepped(Rule r, TermPtr next, Action a = Action::pure()) {
  Local l;
  l.rule = r;
  l.next = std::move(next);
  l.action = std::move(a);
  return l;
}
Local failed(Rule r) {
  Local l;
  l.cls = RuleClass::Fail;
  l.rule = r;
  return l;
}
Local erred(Rule r, std::string detail) {
  Local l;
  l.cls = RuleClass::Error;
  l.rule = r;
  l.detail = std::move(detail);
  return l;
}

struct Ctx {
  HeadHeap& hh;
  PointerHeap& ph;
  const Environment& env;
  Effect allowed;
  std::uint64_t& next_head;
  std::uint64_t& next_pointer;
  InputSource& in;

  HeadLabel alloc(Head h) {
    HeadLabel hl{next_head++};
    extend_heap(hh, hl, std::move(h));
    return hl;
  }
  const Head* head(HeadLabel hl) const { return lookup(hh, hl); }
  const Integer* integer(HeadLabel hl) const {
    const Head* h = head(hl);
    if (!h) return nullptr;
    if (auto* i = std::get_if<IntHead>(h)) return &i->value;
    return nullptr;
  }
  const TableHead* table(HeadLabel hl) const {
    const Head* h = head(hl);
    return h ? std::get_if<TableHead>(h) : nullptr;
  }
  const Closure* closure(HeadLabel hl) const {
    const Head* h = head(hl);
    return h ? std::get_if<Closure>(h) : nullptr;
  }
  const PtrHead* pointer(HeadLabel hl) const {
    const Head* h = head(hl);
    return h ? std::get_if<PtrHead>(h) : nullptr;
  }
};

HeadLabel lab(const TermPtr& t) { return *t->label(); }

std::string not_a(HeadLabel hl, const char* what) {
  return label_string(hl) + " is not " + what;
}

bool allows(Effect chi, EffectAtom a) { return chi.contains(a); }

std::optional<Integer> apply_unary(UnaryOp op, const Integer& i) {
  switch (op) {
    case UnaryOp::Neg: return Integer(-i);
    case UnaryOp::Abs: return Integer(i < 0 ? Integer(-i) : i);
  }
  return std::nullopt;
}

std::optional<Integer> apply_binary(BinaryOp op, const Integer& a, const Integer& b) {
  switch (op) {
    case BinaryOp::Add: return Integer(a + b);
    case BinaryOp::Sub: return Integer(a - b);
    case BinaryOp::Mul: return Integer(a * b);
    case BinaryOp::Div:
      if (b == 0) return std::nullopt;
      return Integer(a / b);
    case BinaryOp::Mod:
      if (b == 0) return std::nullopt;
      return Integer(a % b);
  }
  return std::nullopt;
}

bool apply_compare(CompareOp op, const Integer& a, const Integer& b) {
  switch (op) {
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
    case CompareOp::Ne: return a != b;
  }
  return false;
}

std::optional<HeadLabel> table_entry(const TableHead& t, const Integer* index) {
  if (!index) return std::nullopt;
  return t.find(*index);
}

// Application shared by appE and appF for closures over contravariant
// lambdas and all-quantified functions.
TermPtr enter_lambda(const Closure& c, const Lambda& l, HeadLabel arg, Effect chi) {
  return mk::frame(c.env.extended(l.param, arg), l.body, effect_meet(chi, l.range_effects));
}

TermPtr enter_allquant(const Closure& c, const AllQuant& a, HeadLabel arg, Effect chi) {
  return mk::frame(c.env.extended(a.param, arg), mk::let(a.type_var, a.instantiation, a.body),
                   effect_meet(chi, a.range_effects));
}

Local generate_app_err(Ctx& c, const AppErr& x) {
  HeadLabel hl1 = lab(x.fn), hl2 = lab(x.arg);
  if (const auto* t = c.table(hl1)) {
    if (auto hl = table_entry(*t, c.integer(hl2))) return stepped(Rule::RGappE1, mk::label(*hl));
    return erred(Rule::RGappEE2, label_string(hl2) + " is not in the domain of table " +
                                     label_string(hl1));
  }
  if (const auto* cl = c.closure(hl1)) {
    if (auto* l = std::get_if<Lambda>(&cl->fun)) {
      return stepped(Rule::RGappE2, enter_lambda(*cl, *l, hl2, c.allowed));
    }
    return stepped(Rule::RGappE3, enter_allquant(*cl, std::get<AllQuant>(cl->fun), hl2, c.allowed));
  }
  return erred(Rule::RGappEE1, not_a(hl1, "a table or closure"));
}

Local generate_app_fail(Ctx& c, const AppFail& x) {
  HeadLabel hl1 = lab(x.fn), hl2 = lab(x.arg);
  if (const auto* t = c.table(hl1)) {
    if (!c.head(hl2)) return erred(Rule::RGappFE2, label_string(hl2) + " is undefined");
    if (auto hl = table_entry(*t, c.integer(hl2))) return stepped(Rule::RGappF1, mk::label(*hl));
    return failed(Rule::RGappFF);
  }
  if (const auto* cl = c.closure(hl1)) {
    if (auto* a = std::get_if<AllQuant>(&cl->fun)) {
      return stepped(Rule::RGappF3, enter_allquant(*cl, *a, hl2, c.allowed));
    }
    const auto& l = std::get<Lambda>(cl->fun);
    if (l.dk == DomainKind::Contravariant) {
      return stepped(Rule::RGappF2, enter_lambda(*cl, l, hl2, c.allowed));
    }
    if (l.dk == DomainKind::Invariant) {
      auto body = mk::frame(cl->env.extended(l.param, hl2), l.body,
                            effect_meet(c.allowed, l.range_effects));
      auto check = mk::chk(hl2, {}, l.domain, std::move(body), mk::falses());
      return stepped(Rule::RGappF4,
                     mk::frame(cl->env, std::move(check), effect_meet(c.allowed, l.dom_effects)));
    }
    return erred(Rule::RGappFE3, std::string("applying a function with domain kind ") +
                                     to_string(l.dk));
  }
  return erred(Rule::RGappFE1, not_a(hl1, "a table or closure"));
}

Local generate_letrec(Ctx& c, const Letrec& x) {
  // Labels are only committed if the step succeeds.
  Environment env = c.env;
  std::uint64_t next = c.next_head;
  std::vector<HeadLabel> labels;
  for (const auto& [name, v] : x.bindings) {
    labels.push_back(HeadLabel{next++});
    env.push(name, labels.back());
  }

  bool ptrs = false;
  for (const auto& [name, v] : x.bindings) {
    if (std::holds_alternative<PtrValue>(v)) ptrs = true;
  }

  std::vector<Rule> premises;
  PointerHeap ph = c.ph;
  std::uint64_t next_ptr = c.next_pointer;
  std::vector<Head> heads;
  for (const auto& [name, v] : x.bindings) {
    auto r = eval_value(ph, env, v, PointerLabel{next_ptr});
    if (auto* e = std::get_if<Erroneous>(&r)) {
      Local l = erred(Rule::RGletrecE1, "value of " + name + ": " + e->detail);
      l.premises.push_back(e->rule);
      return l;
    }
    auto& ok = std::get<ValueHead>(r);
    if (ok.rule == Rule::RVptr) ++next_ptr;
    premises.push_back(ok.rule);
    heads.push_back(std::move(ok.head));
    ph = std::move(ok.heap);
  }
  if (ptrs && !allows(c.allowed, EffectAtom::New)) {
    return erred(Rule::RGletrecE2, "pointer value without new effects allowed");
  }

  for (std::size_t i = 0; i < labels.size(); ++i) extend_heap(c.hh, labels[i], std::move(heads[i]));
  c.next_head = next;
  c.next_pointer = next_ptr;
  c.ph = std::move(ph);
  Local l = stepped(Rule::RGletrec, mk::frame(std::move(env), x.body, c.allowed),
                    ptrs ? Action::make_new() : Action::pure());
  l.premises = std::move(premises);
  return l;
}

Local test(Ctx& c, const Chk& k);

Local generate(Ctx& c, const Term& t) {
  return std::visit(
      overloaded{
          [&](const Variable& x) -> Local {
            if (auto hl = c.env.lookup(x.name)) return stepped(Rule::RGvar, mk::label(*hl));
            return erred(Rule::RGvarE, "unbound variable " + x.name);
          },
          [&](const Falses&) { return failed(Rule::RGfalsesF); },
          [&](const Anys&) { return erred(Rule::RGanysE, "anys in generate mode"); },
          [&](const IntLit& x) { return stepped(Rule::RGi, mk::label(c.alloc(IntHead{x.value}))); },
          [&](const Ints&) { return erred(Rule::RGintsE, "ints in generate mode"); },
          [&](const Unary& x) -> Local {
            HeadLabel hl = lab(x.operand);
            const Integer* i = c.integer(hl);
            if (!i) return erred(Rule::RGuopE, not_a(hl, "an integer"));
            return stepped(Rule::RGuop, mk::integer(*apply_unary(x.op, *i)));
          },
          [&](const Binary& x) -> Local {
            HeadLabel hl1 = lab(x.lhs), hl2 = lab(x.rhs);
            const Integer* a = c.integer(hl1);
            const Integer* b = c.integer(hl2);
            if (!a) return erred(Rule::RGbopE, not_a(hl1, "an integer"));
            if (!b) return erred(Rule::RGbopE, not_a(hl2, "an integer"));
            auto r = apply_binary(x.op, *a, *b);
            if (!r) return erred(Rule::RGbopE, "division by zero");
            return stepped(Rule::RGbop, mk::integer(std::move(*r)));
          },
          [&](const Compare& x) -> Local {
            HeadLabel hl1 = lab(x.lhs), hl2 = lab(x.rhs);
            const Integer* a = c.integer(hl1);
            const Integer* b = c.integer(hl2);
            if (!a) return erred(Rule::RGcopE, not_a(hl1, "an integer"));
            if (!b) return erred(Rule::RGcopE, not_a(hl2, "an integer"));
            if (apply_compare(x.op, *a, *b)) return stepped(Rule::RGcop, x.lhs);
            return failed(Rule::RGcopF);
          },
          [&](const FixedTable& x) -> Local {
            TableHead head;
            for (const auto& e : x.entries) head.entries.emplace_back(e.index, lab(e.term));
            return stepped(Rule::RGtab1, mk::label(c.alloc(std::move(head))));
          },
          [&](const ArrayLambda& x) -> Local {
            HeadLabel hl = lab(x.length);
            const Integer* n = c.integer(hl);
            if (!n || *n < 0) return erred(Rule::RGarrE, not_a(hl, "a natural number"));
            if (*n > kMaxArrayLength) {
              throw LimitExceeded("array of length " + n->str() + " exceeds the limit of " +
                                  std::to_string(kMaxArrayLength));
            }
            VarName y = fresh_var("y", free_vars(*x.body));
            std::vector<TableEntry> entries;
            for (Integer k = 0; k < *n; ++k) {
              entries.push_back(TableEntry{y, k, mk::let(x.index_var, mk::integer(k), x.body)});
            }
            return stepped(Rule::RGarr, mk::table(std::move(entries)));
          },
          [&](const Tabs&) { return erred(Rule::RGtabsE, "tabs in generate mode"); },
          [&](const FunTerm& x) -> Local {
            auto dk = dk_of(x.fun);
            if (dk != DomainKind::Contravariant && dk != DomainKind::Invariant) {
              return erred(Rule::RGfunE, std::string("function with domain kind ") + to_string(dk));
            }
            return stepped(Rule::RGfun, mk::label(c.alloc(Closure{c.env, x.fun})));
          },
          [&](const Funs&) { return erred(Rule::RGfunsE, "funs in generate mode"); },
          [&](const Length& x) -> Local {
            HeadLabel hl = lab(x.operand);
            auto cls = classify_head(c.head(hl));
            if (!cls.is_arr) return erred(Rule::RGlenE, not_a(hl, "an array"));
            return stepped(Rule::RGlen, mk::integer(Integer(cls.tab_indices.size())));
          },
          [&](const AppErr& x) { return generate_app_err(c, x); },
          [&](const AppFail& x) { return generate_app_fail(c, x); },
          [&](const From&) { return erred(Rule::RGfromE, "from in generate mode"); },
          [&](const PtrNew& x) -> Local {
            if (!allows(c.allowed, EffectAtom::New)) {
              return erred(Rule::RGnewE, "new effects not allowed");
            }
            PointerLabel pl{c.next_pointer++};
            extend_heap(c.ph, pl, PointerCell{c.env, x.type, lab(x.init)});
            return stepped(Rule::RGnew, mk::label(c.alloc(PtrHead{pl})), Action::make_new());
          },
          [&](const PtrRead& x) -> Local {
            HeadLabel hl = lab(x.ptr);
            const PtrHead* p = c.pointer(hl);
            if (!p) return erred(Rule::RGreadE, not_a(hl, "a pointer"));
            const PointerCell* cell = lookup(c.ph, p->label);
            if (!cell) return erred(Rule::RGreadE, label_string(p->label) + " is undefined");
            if (!allows(c.allowed, EffectAtom::Read)) {
              return erred(Rule::RGreadE, "read effects not allowed");
            }
            return stepped(Rule::RGread, mk::label(cell->contents), Action::read());
          },
          [&](const PtrWrite& x) -> Local {
            HeadLabel hl1 = lab(x.ptr), hl2 = lab(x.value);
            const PtrHead* p = c.pointer(hl1);
            if (!p) return erred(Rule::RGwriteE, not_a(hl1, "a pointer"));
            auto it = c.ph.find(p->label);
            if (it == c.ph.end()) {
              return erred(Rule::RGwriteE, label_string(p->label) + " is undefined");
            }
            if (!allows(c.allowed, EffectAtom::Write)) {
              return erred(Rule::RGwriteE, "write effects not allowed");
            }
            it->second.contents = hl2;
            return stepped(Rule::RGwrite, x.value, Action::write());
          },
          [&](const PtrTo&) { return erred(Rule::RGptrE, "ptrto is never executable"); },
          [&](const Ptrs&) { return erred(Rule::RGptrsE, "ptrs in generate mode"); },
          [&](const Input&) -> Local {
            if (!allows(c.allowed, EffectAtom::IO)) return erred(Rule::RGinE, "IO effects not allowed");
            auto i = c.in.next();
            if (!i) throw InputExhausted();
            return stepped(Rule::RGin, mk::integer(*i), Action::in(*i));
          },
          [&](const Output& x) -> Local {
            HeadLabel hl = lab(x.operand);
            const Integer* i = c.integer(hl);
            if (!i) return erred(Rule::RGoutE, not_a(hl, "an integer"));
            if (!allows(c.allowed, EffectAtom::IO)) return erred(Rule::RGoutE, "IO effects not allowed");
            return stepped(Rule::RGout, x.operand, Action::out(*i));
          },
          [&](const Unify& x) {
            HeadLabel hl = lab(x.lhs);
            return stepped(Rule::RGunify, mk::chk(hl, {}, x.rhs, x.lhs, mk::falses()));
          },
          [&](const Join&) { return erred(Rule::RGjoinE, "join in generate mode"); },
          [&](const Let& x) {
            return stepped(Rule::RGlet, mk::frame(c.env.extended(x.var, lab(x.bound)), x.body, c.allowed));
          },
          [&](const Letrec& x) { return generate_letrec(c, x); },
          [&](const If& x) {
            auto saved = std::make_shared<const PointerHeap>(c.ph);
            return stepped(Rule::RGif, make_term(IfM{x.var, x.cond, x.then_branch, std::move(saved),
                                                     x.else_branch}));
          },
          [&](const Stage& x) { return stepped(Rule::RGstage, x.rhs); },
          [&](const FxThen&) { return erred(Rule::RGfxE, "fxthen is never executable"); },
          [&](const IfM& x) {
            return stepped(Rule::RGif1,
                           mk::frame(c.env.extended(x.var, lab(x.cond)), x.then_branch, c.allowed));
          },
          [&](const Frame& x) { return stepped(Rule::RGframe1, x.body); },
          [&](const Chk& x) { return test(c, x); },
          [&](const LabelRef&) -> Local { throw std::logic_error("no rule for a head label"); },
      },
      t.node());
}

// ---------------------------------------------------------------------------
// Test mode
// ---------------------------------------------------------------------------

TermPtr rechk(const Chk& k, TermPtr pattern) {
  return mk::chk(k.subject, k.ae, std::move(pattern), k.then_branch, k.else_branch);
}

Local test_head_label(Ctx& c, const Chk& k, HeadLabel hl2) {
  HeadLabel hl1 = k.subject;
  if (k.ae.contains({hl1, hl2})) return stepped(Rule::RThl, k.then_branch);
  const Head* h1 = c.head(hl1);
  const Head* h2 = c.head(hl2);
  if (!h1 || !h2) {
    return erred(Rule::RThlE, label_string(!h1 ? hl1 : hl2) + " is undefined");
  }
  return std::visit(
      overloaded{
          [&](const IntHead& i) {
            const auto* j = std::get_if<IntHead>(h2);
            return stepped(j && j->value == i.value ? Rule::RThli1 : Rule::RThli2,
                           j && j->value == i.value ? k.then_branch : k.else_branch);
          },
          [&](const TableHead& t1) {
            const auto* t2 = std::get_if<TableHead>(h2);
            std::vector<Integer> idx1;
            for (const auto& [i, hl] : t1.entries) idx1.push_back(i);
            if (!t2) return stepped(Rule::RThltab2, k.else_branch);
            std::vector<Integer> idx2;
            for (const auto& [i, hl] : t2->entries) idx2.push_back(i);
            if (!same_index_set(idx1, idx2)) return stepped(Rule::RThltab2, k.else_branch);
            AssumedEqualities ae = k.ae;
            ae.insert({hl1, hl2});
            TermPtr out = k.then_branch;
            for (auto it = t1.entries.rbegin(); it != t1.entries.rend(); ++it) {
              out = mk::chk(it->second, ae, mk::label(*t2->find(it->first)), out, k.else_branch);
            }
            return stepped(Rule::RThltab1, out);
          },
          [&](const Closure&) -> Local {
            if (std::holds_alternative<Closure>(*h2)) {
              return erred(Rule::RThlfunE, "comparing closures " + label_string(hl1) + " and " +
                                               label_string(hl2));
            }
            return stepped(Rule::RThlfun, k.else_branch);
          },
          [&](const PtrHead& p) {
            const auto* q = std::get_if<PtrHead>(h2);
            bool same = q && q->label == p.label;
            return stepped(same ? Rule::RThlpl1 : Rule::RThlpl2, same ? k.then_branch : k.else_branch);
          },
      },
      *h1);
}

Local test_table(Ctx& c, const Chk& k, const FixedTable& pat) {
  const Head* h = c.head(k.subject);
  if (!h) return erred(Rule::RTtabE, label_string(k.subject) + " is undefined");
  std::vector<Integer> indices;
  for (const auto& e : pat.entries) indices.push_back(e.index);
  const auto* t = std::get_if<TableHead>(h);
  if (!t || !classify_head(h).is_tab_fields(indices)) return stepped(Rule::RTtab2, k.else_branch);

  const std::size_t n = pat.entries.size();
  std::vector<HeadLabel> labels;
  for (const auto& e : pat.entries) labels.push_back(*t->find(e.index));
  // Innermost first: level j tests entry j inside a frame binding x_1..x_{j-1}.
  TermPtr out = k.then_branch;
  for (std::size_t j = n; j-- > 0;) {
    TermPtr level = mk::chk(labels[j], k.ae, pat.entries[j].term, out, k.else_branch);
    if (j == 0) {
      out = level;
      break;
    }
    Environment env = c.env;
    for (std::size_t m = 0; m < j; ++m) env.push(pat.entries[m].var, labels[m]);
    out = mk::frame(std::move(env), level, c.allowed);
  }
  return stepped(Rule::RTtab1, out);
}

Local test_array(Ctx& c, const Chk& k, const ArrayLambda& pat) {
  const Head* h = c.head(k.subject);
  if (!h) return erred(Rule::RTarrE, label_string(k.subject) + " is undefined");
  auto cls = classify_head(h);
  if (!cls.is_arr) return stepped(Rule::RTarr2, k.else_branch);
  const auto& entries = std::get<TableHead>(*h).entries;
  HeadLabel len = c.alloc(IntHead{Integer(entries.size())});
  TermPtr body = k.then_branch;
  for (std::size_t j = entries.size(); j-- > 0;) {
    auto element = mk::let(pat.index_var, mk::integer(Integer(j)), pat.body);
    body = mk::frame(c.env, mk::chk(entries[j].second, k.ae, element, body, k.else_branch), c.allowed);
  }
  return stepped(Rule::RTarr1, mk::chk(len, k.ae, pat.length, body, k.else_branch));
}

Local test(Ctx& c, const Chk& k) {
  const Term& p = *k.pattern;
  if (is_revert_to_generate(p)) {
    return stepped(Rule::RTgen, mk::let("%g", k.pattern, rechk(k, mk::var("%g"))));
  }
  auto subject_class = [&]() { return classify_head(c.head(k.subject)); };
  bool defined = c.head(k.subject) != nullptr;
  auto undefined = [&](Rule r) { return erred(r, label_string(k.subject) + " is undefined"); };

  return std::visit(
      overloaded{
          [&](const Variable& x) -> Local {
            if (auto hl = c.env.lookup(x.name)) return stepped(Rule::RTvar, rechk(k, mk::label(*hl)));
            return erred(Rule::RTvarE, "unbound variable " + x.name);
          },
          [&](const Falses&) { return stepped(Rule::RTfalses, k.else_branch); },
          [&](const Anys&) { return stepped(Rule::RTanys, k.then_branch); },
          [&](const IntLit& x) -> Local {
            if (!defined) return undefined(Rule::RTiE);
            const Integer* i = c.integer(k.subject);
            if (i && *i == x.value) return stepped(Rule::RTi1, k.then_branch);
            return stepped(Rule::RTi2, k.else_branch);
          },
          [&](const Ints&) -> Local {
            if (!defined) return undefined(Rule::RTintsE);
            if (subject_class().is_int) return stepped(Rule::RTints1, k.then_branch);
            return stepped(Rule::RTints2, k.else_branch);
          },
          [&](const Compare& x) {
            auto rhs = mk::frame(c.env, x.rhs, c.allowed);
            auto cond = mk::cop(x.op, mk::label(k.subject), std::move(rhs));
            auto then = mk::if_("%c", std::move(cond), k.then_branch, k.else_branch);
            return stepped(Rule::RTcop, mk::chk(k.subject, k.ae, x.lhs, std::move(then), k.else_branch));
          },
          [&](const FixedTable& x) { return test_table(c, k, x); },
          [&](const ArrayLambda& x) { return test_array(c, k, x); },
          [&](const Tabs&) -> Local {
            if (!defined) return undefined(Rule::RTtabsE);
            if (subject_class().is_tab) return stepped(Rule::RTtabs1, k.then_branch);
            return stepped(Rule::RTtabs2, k.else_branch);
          },
          [&](const FunTerm&) -> Local {
            if (!defined) return undefined(Rule::RTfunE2);
            if (subject_class().is_fun) {
              return erred(Rule::RTfunE1, "testing closure " + label_string(k.subject) +
                                              " against a function");
            }
            return stepped(Rule::RTfun, k.else_branch);
          },
          [&](const Funs&) -> Local {
            if (!defined) return undefined(Rule::RTfunsE);
            if (subject_class().is_fun) return stepped(Rule::RTfuns1, k.then_branch);
            return stepped(Rule::RTfuns2, k.else_branch);
          },
          [&](const From& x) -> Local {
            const auto* v = x.operand->as<Variable>();
            if (!v) {
              return stepped(Rule::RTfrom1,
                             mk::let("%f", x.operand, rechk(k, mk::from(mk::var("%f")))));
            }
            auto hl = c.env.lookup(v->name);
            if (!hl) return erred(Rule::RTfromE, "unbound variable " + v->name);
            const Head* h = c.head(*hl);
            if (!classify_head(h).is_typ) {
              return erred(Rule::RTfromE, not_a(*hl, "an invariant identity function"));
            }
            const auto& cl = std::get<Closure>(*h);
            const auto& l = std::get<Lambda>(cl.fun);
            return stepped(Rule::RTfrom2, mk::frame(cl.env, rechk(k, l.domain),
                                                    effect_meet(c.allowed, l.dom_effects)));
          },
          [&](const Ptrs&) -> Local {
            if (!defined) return undefined(Rule::RTptrsE);
            if (subject_class().is_ptr) return stepped(Rule::RTptrs1, k.then_branch);
            return stepped(Rule::RTptrs2, k.else_branch);
          },
          [&](const Unify& x) {
            auto second = mk::frame(c.env, rechk(k, x.rhs), c.allowed);
            return stepped(Rule::RTunify, mk::chk(k.subject, k.ae, x.lhs, std::move(second), k.else_branch));
          },
          [&](const Join& x) {
            auto second = mk::frame(c.env, rechk(k, x.rhs), c.allowed);
            return stepped(Rule::RTjoin, mk::chk(k.subject, k.ae, x.lhs, k.then_branch, std::move(second)));
          },
          [&](const Let& x) { return stepped(Rule::RTlet, mk::let(x.var, x.bound, rechk(k, x.body))); },
          [&](const Letrec& x) { return stepped(Rule::RTletrec, mk::letrec(x.bindings, rechk(k, x.body))); },
          [&](const If& x) {
            return stepped(Rule::RTif, mk::if_(x.var, x.cond, rechk(k, x.then_branch),
                                               rechk(k, x.else_branch)));
          },
          [&](const Stage& x) { return stepped(Rule::RTstage, rechk(k, x.rhs)); },
          [&](const LabelRef& x) { return test_head_label(c, k, x.label); },
          [&](const auto&) -> Local {
            throw std::logic_error("chk pattern must be a head label or source syntax");
          },
      },
      p.node());
}

// ---------------------------------------------------------------------------
// Holes: where the engine descends to find the redex
// ---------------------------------------------------------------------------

enum class HoleKind : std::uint8_t { Ctxt, TabEntry, FrameBody, IfCond };

Rule step_rule(HoleKind k) {
  switch (k) {
    case HoleKind::Ctxt: return Rule::RGctxt;
    case HoleKind::TabEntry: return Rule::RGtab2;
    case HoleKind::FrameBody: return Rule::RGframe2;
    case HoleKind::IfCond: return Rule::RGif2;
  }
  return Rule::RGctxt;
}
Rule fail_rule(HoleKind k) {
  switch (k) {
    case HoleKind::Ctxt: return Rule::RGctxtF;
    case HoleKind::TabEntry: return Rule::RGtabF;
    case HoleKind::FrameBody: return Rule::RGframeF;
    case HoleKind::IfCond: return Rule::RGif3;
  }
  return Rule::RGctxtF;
}
Rule error_rule(HoleKind k) {
  switch (k) {
    case HoleKind::Ctxt: return Rule::RGctxtE;
    case HoleKind::TabEntry: return Rule::RGtabE;
    case HoleKind::FrameBody: return Rule::RGframeE;
    case HoleKind::IfCond: return Rule::RGifE;
  }
  return Rule::RGctxtE;
}

struct Hole {
  HoleKind kind;
  TermPtr parent;
  std::size_t index;
  std::shared_ptr<const Environment> owned_env;
  const Environment* env;  // environment inside the hole
  Effect allowed;          // allowed effects inside the hole
};

}  // namespace

// ---------------------------------------------------------------------------
// Machine
// ---------------------------------------------------------------------------

struct Machine::Impl {
  HeadHeap hh;
  PointerHeap ph;
  Environment env;
  Effect allowed;
  TermPtr focus;
  std::vector<Hole> stack;
  std::uint64_t next_head = 0;
  std::uint64_t next_pointer = 0;

  const Environment& cur_env() const { return stack.empty() ? env : *stack.back().env; }
  Effect cur_allowed() const { return stack.empty() ? allowed : stack.back().allowed; }

  std::optional<Hole> find_hole(const TermPtr& t) const {
    const Environment& e = cur_env();
    Effect chi = cur_allowed();
    auto ctxt = [&](std::size_t i) { return Hole{HoleKind::Ctxt, t, i, nullptr, &e, chi}; };
    if (auto* f = t->as<node::Frame>()) {
      if (f->body->label()) return std::nullopt;
      return Hole{HoleKind::FrameBody, t, 0, nullptr, &f->env, f->allowed};
    }
    if (auto* i = t->as<node::IfM>()) {
      if (i->cond->label()) return std::nullopt;
      return Hole{HoleKind::IfCond, t, 0, nullptr, &e, effect_meet(chi, Effect::reversible())};
    }
    if (auto* tab = t->as<node::FixedTable>()) {
      for (std::size_t j = 0; j < tab->entries.size(); ++j) {
        if (tab->entries[j].term->label()) continue;
        auto ext = std::make_shared<Environment>(e);
        for (std::size_t m = 0; m < j; ++m) ext->push(tab->entries[m].var, lab(tab->entries[m].term));
        const Environment* raw = ext.get();
        return Hole{HoleKind::TabEntry, t, j, std::move(ext), raw, chi};
      }
      return std::nullopt;
    }
    if (auto d = decompose(t)) return ctxt(d->first.hole());
    return std::nullopt;
  }

  TermPtr child_at(const TermPtr& parent, const Hole& h) const {
    if (auto* f = parent->as<node::Frame>()) return f->body;
    if (auto* i = parent->as<node::IfM>()) return i->cond;
    if (auto* tab = parent->as<node::FixedTable>()) return tab->entries[h.index].term;
    return decompose(parent)->second;
  }

  TermPtr materialize() const {
    TermPtr t = focus;
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) t = replace_child(*it->parent, it->index, t);
    return t;
  }

  Result advance(InputSource& in, bool want_rules) {
    if (focus->label() && !stack.empty()) {
      Hole h = std::move(stack.back());
      stack.pop_back();
      focus = replace_child(*h.parent, h.index, focus);
    }
    while (auto h = find_hole(focus)) {
      TermPtr child = child_at(focus, *h);
      stack.push_back(std::move(*h));
      focus = std::move(child);
    }

    Result r;
    if (auto hl = focus->label()) {
      r.kind = Result::Kind::Terminal;
      r.terminal = *hl;
      return r;
    }

    Ctx c{hh, ph, cur_env(), cur_allowed(), next_head, next_pointer, in};
    Local l = generate(c, *focus);
    r.rule = l.rule;

    switch (l.cls) {
      case RuleClass::Step:
        r.kind = Result::Kind::Stepped;
        r.action = std::move(l.action);
        focus = std::move(l.next);
        if (want_rules) {
          for (const auto& h : stack) r.rules.push_back(step_rule(h.kind));
          r.rules.push_back(l.rule);
          r.rules.insert(r.rules.end(), l.premises.begin(), l.premises.end());
        }
        return r;

      case RuleClass::Fail: {
        std::size_t j = stack.size();
        while (j > 0 && stack[j - 1].kind != HoleKind::IfCond) --j;
        if (j == 0) {
          r.kind = Result::Kind::Fail;
          if (want_rules) {
            for (const auto& h : stack) r.rules.push_back(fail_rule(h.kind));
            r.rules.push_back(l.rule);
          }
          return r;
        }
        // RGif3: the innermost enclosing condition catches the failure.
        const std::size_t at = j - 1;
        if (want_rules) {
          for (std::size_t m = 0; m < at; ++m) r.rules.push_back(step_rule(stack[m].kind));
          r.rules.push_back(Rule::RGif3);
          for (std::size_t m = at + 1; m < stack.size(); ++m) r.rules.push_back(fail_rule(stack[m].kind));
          r.rules.push_back(l.rule);
        }
        const auto* ifm = stack[at].parent->as<node::IfM>();
        if (ifm->saved) ph = restore_pointer_heap(ph, *ifm->saved);
        focus = ifm->else_branch;
        stack.resize(at);
        r.kind = Result::Kind::Stepped;
        r.action = Action::pure();
        return r;
      }

      default:
        r.kind = Result::Kind::Error;
        r.detail = std::move(l.detail);
        if (want_rules) {
          for (const auto& h : stack) r.rules.push_back(error_rule(h.kind));
          r.rules.push_back(l.rule);
          r.rules.insert(r.rules.end(), l.premises.begin(), l.premises.end());
        }
        return r;
    }
  }
};

Machine::Machine(MachineState m) : impl_(std::make_unique<Impl>()) {
  impl_->hh = std::move(m.heads);
  impl_->ph = std::move(m.pointers);
  impl_->env = std::move(m.env);
  impl_->allowed = m.allowed;
  impl_->focus = std::move(m.term);
  impl_->next_head = m.next_head;
  impl_->next_pointer = m.next_pointer;
}

Machine::~Machine() = default;
Machine::Machine(Machine&&) noexcept = default;
Machine& Machine::operator=(Machine&&) noexcept = default;

Machine::Result Machine::advance(InputSource& in, bool want_rules) {
  return impl_->advance(in, want_rules);
}

MachineState Machine::state() const {
  MachineState m;
  m.heads = impl_->hh;
  m.pointers = impl_->ph;
  m.env = impl_->env;
  m.allowed = impl_->allowed;
  m.term = impl_->materialize();
  m.next_head = impl_->next_head;
  m.next_pointer = impl_->next_pointer;
  return m;
}

bool Machine::terminal() const { return impl_->stack.empty() && impl_->focus->label(); }
TermPtr Machine::term() const { return impl_->materialize(); }
const HeadHeap& Machine::heads() const { return impl_->hh; }
const PointerHeap& Machine::pointers() const { return impl_->ph; }
const Environment& Machine::env() const { return impl_->env; }
Effect Machine::allowed() const { return impl_->allowed; }

StepOutcome step(const MachineState& m, InputSource& in) {
  Machine machine(m);
  auto r = machine.advance(in, true);
  switch (r.kind) {
    case Machine::Result::Kind::Stepped:
      return outcome::Stepped{std::move(r.action), machine.state(), std::move(r.rules)};
    case Machine::Result::Kind::Terminal:
      return outcome::Terminal{r.terminal};
    case Machine::Result::Kind::Fail:
      return outcome::Fail{std::move(r.rules)};
    case Machine::Result::Kind::Error:
      return outcome::Error{r.rule, std::move(r.detail), std::move(r.rules)};
  }
  throw std::logic_error("unreachable");
}

}  // namespace aleph
