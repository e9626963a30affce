#include <doctest.h>

#include <random>

#include "aleph/frontend.hpp"
#include "aleph/term_utils.hpp"
#include "generator.hpp"

using namespace aleph;

namespace {

TermPtr src(std::string_view text) {
  ParseResult r = parse(text, CheckMode::Term);
  REQUIRE_MESSAGE(r.term, text);
  return r.term;
}

TermPtr fun_id(const VarName& x) {
  return mk::lambda(x, mk::ints(), DomainKind::Contravariant, Effect::none(), Effect::none(), mk::var(x));
}

}  // namespace

TEST_CASE("well_formed_source") {
  SUBCASE("duplicate table index") {
    auto t = mk::table({{"x", 0, mk::integer(1)}, {"y", 0, mk::integer(2)}});
    auto d = well_formed_source(*t);
    REQUIRE(d.size() == 1);
    CHECK(d[0].message == "duplicate table index 0");
  }
  SUBCASE("closed term") { CHECK(well_formed_source(*src("(let x 5 x)")).empty()); }
  SUBCASE("bare variable") {
    auto d = well_formed_source(*mk::var("x"));
    REQUIRE(d.size() == 1);
    CHECK(d[0].message == "unbound variable x");
    CHECK(well_formed_source(*mk::var("x"), CheckMode::Term).empty());
  }
  SUBCASE("machine forms are rejected") {
    CHECK_FALSE(well_formed_source(*mk::label(HeadLabel{0})).empty());
  }
  SUBCASE("duplicate tuple index") {
    auto t = src("(letrec ((a (tuple (0 a) (0 a)))) (table))");
    CHECK(well_formed_source(*t).size() == 1);
  }
  SUBCASE("path to the offender") {
    auto t = src("(let x 5 (bop add x y))");
    auto d = well_formed_source(*t);
    REQUIRE(d.size() == 1);
    CHECK(d[0].path == std::vector<std::size_t>{1, 1});
  }
}

TEST_CASE("free_vars") {
  CHECK(free_vars(*mk::var("x")) == std::set<VarName>{"x"});
  CHECK(free_vars(*src("(let x 5 x)")).empty());
  auto t = mk::table({{"a", 0, mk::integer(1)}, {"b", 1, mk::var("a")}});
  CHECK(free_vars(*t).empty());
  CHECK(free_vars(*src("(table (a 0 b) (b 1 1))")) == std::set<VarName>{"b"});
  CHECK(free_vars(*src("(letrec ((f (fun x ints contra T T (appe f x)))) g)")) == std::set<VarName>{"g"});
  CHECK(free_vars(*src("(arr 3 i (bop add i j))")) == std::set<VarName>{"j"});
  CHECK(free_vars(*src("(if c d c e)")).size() == 2);
}

TEST_CASE("alpha_equal") {
  CHECK(alpha_equal(*fun_id("x"), *fun_id("y")));
  CHECK_FALSE(alpha_equal(*mk::var("x"), *mk::var("y")));
  CHECK_FALSE(alpha_equal(*src("(let x 5 x)"), *src("(let x 6 x)")));
  CHECK(alpha_equal(*src("(let x 5 x)"), *src("(let y 5 y)")));
  CHECK_FALSE(alpha_equal(*src("(let x 5 (let y 6 x))"), *src("(let x 5 (let y 6 y))")));
  CHECK(alpha_equal(*src("(table (a 0 1) (b 1 a))"), *src("(table (c 0 1) (d 1 c))")));
  CHECK(alpha_equal(*src("(letrec ((f (tuple (0 g))) (g (tuple (0 f)))) f)"),
                    *src("(letrec ((p (tuple (0 q))) (q (tuple (0 p)))) p)")));
}

TEST_CASE("alpha_equal is an equivalence on random terms") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    auto a = aleph::testing::random_term(rng);
    auto b = parse(print_flat(*a)).term;
    REQUIRE(b);
    auto c = parse(print(*b, 30)).term;
    REQUIRE(c);
    CHECK(alpha_equal(*a, *a));
    CHECK(alpha_equal(*a, *b) == alpha_equal(*b, *a));
    CHECK(alpha_equal(*a, *b));
    CHECK(alpha_equal(*b, *c));
    CHECK(alpha_equal(*a, *c));
  }
}

TEST_CASE("renaming bound and free variables") {
  auto bound = src("(let x 5 (bop add x z))");
  auto renamed = src("(let fresh 5 (bop add fresh z))");
  auto free_renamed = src("(let x 5 (bop add x w))");
  CHECK(alpha_equal(*bound, *renamed));
  CHECK_FALSE(alpha_equal(*bound, *free_renamed));
}

TEST_CASE("is_revert_to_generate") {
  CHECK(is_revert_to_generate(*src("(len x)")));
  CHECK_FALSE(is_revert_to_generate(*mk::ints()));
  CHECK(is_revert_to_generate(*src("(fxthen {P} x)")));
  CHECK(is_revert_to_generate(*mk::input()));
  CHECK_FALSE(is_revert_to_generate(*src("(unify x y)")));
}

TEST_CASE("environments shadow on the right") {
  Environment e{{"x", HeadLabel{1}}, {"y", HeadLabel{2}}};
  e.push("x", HeadLabel{3});
  CHECK(e.lookup("x")->id == 3);
  CHECK(e.lookup("y")->id == 2);
  CHECK_FALSE(e.lookup("z").has_value());
}

TEST_CASE("fresh_var avoids the given names") {
  auto v = fresh_var("y", {"y", "%y"});
  CHECK(v.front() == '%');
  CHECK(v != "%y");
}

TEST_CASE("heap extension is disjoint") {
  HeadHeap hh;
  extend_heap(hh, HeadLabel{0}, IntHead{5});
  CHECK_THROWS_AS(extend_heap(hh, HeadLabel{0}, IntHead{6}), std::logic_error);
}
