#include <doctest.h>

#include "aleph/effects.hpp"

using namespace aleph;

namespace {

constexpr Effect P = EffectAtom::Partial;
constexpr Effect N = EffectAtom::New;
constexpr Effect R = EffectAtom::Read;
constexpr Effect W = EffectAtom::Write;
constexpr Effect IO = EffectAtom::IO;

Effect set(std::initializer_list<Effect> atoms) {
  Effect e;
  for (Effect a : atoms) e = effect_join(e, a);
  return e;
}

}  // namespace

TEST_CASE("effect ordering") {
  CHECK(effect_leq(Effect::none(), P));
  CHECK_FALSE(effect_leq(P, N));
  CHECK_FALSE(effect_leq(N, P));
  CHECK(effect_leq(set({P, N, R, W}), Effect::all()));
  CHECK_FALSE(effect_leq(Effect::all(), Effect::reversible()));
}

TEST_CASE("join, meet and sequencing") {
  CHECK(effect_join(P, IO) == set({P, IO}));
  CHECK(effect_meet(Effect::all(), set({P, N, R, W})) == set({P, N, R, W}));
  CHECK(effect_meet(Effect::all(), Effect::reversible()) == Effect::reversible());
  CHECK(effect_seq(Effect::none(), W) == W);
  CHECK(effect_meet(IO, Effect::reversible()) == Effect::none());
}

TEST_CASE("constants") {
  CHECK(Effect::reversible() == set({P, N, R, W}));
  CHECK(Effect::all() == set({P, N, R, W, IO}));
  CHECK_FALSE(Effect::reversible().contains(EffectAtom::IO));
}

TEST_CASE("printing") {
  CHECK(to_string(Effect::none()) == "T");
  CHECK(to_string(Effect::all()) == "A");
  CHECK(to_string(set({P, IO})) == "{P,IO}");
  CHECK(to_string(set({W, N})) == "{N,W}");
}

TEST_CASE("parsing") {
  CHECK(parse_effect("T") == Effect::none());
  CHECK(parse_effect("A") == Effect::all());
  CHECK(parse_effect("{}") == Effect::none());
  CHECK(parse_effect("{IO,P}") == set({P, IO}));
  CHECK(parse_effect("{ P , R }") == set({P, R}));
  CHECK_FALSE(parse_effect("{X}").has_value());
  CHECK_FALSE(parse_effect("{P,,R}").has_value());
  CHECK_FALSE(parse_effect("P").has_value());
  CHECK_FALSE(parse_effect("{P").has_value());
  for (unsigned b = 0; b < 32; ++b) {
    Effect e{static_cast<std::uint8_t>(b)};
    CHECK(parse_effect(to_string(e)) == e);
  }
}
