#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace aleph {

enum class EffectAtom : std::uint8_t {
  Partial = 1u << 0,  // P
  New = 1u << 1,      // N
  Read = 1u << 2,     // R
  Write = 1u << 3,    // W
  IO = 1u << 4,       // IO
};

/// A point in the five-atom effects lattice, stored as a bit set.
///
/// Ordering is subset, join is union, meet is intersection and sequencing
/// is join. `none()` is the bottom element (written T) and `all()` the top
/// (written A).
class Effect {
 public:
  static constexpr std::uint8_t kMask = 0x1f;

  constexpr Effect() = default;
  constexpr explicit Effect(std::uint8_t bits) : bits_(bits & kMask) {}
  constexpr Effect(EffectAtom atom) : bits_(static_cast<std::uint8_t>(atom)) {}

  static constexpr Effect none() { return Effect{}; }
  static constexpr Effect all() { return Effect{kMask}; }
  /// The reversible effects {P,N,R,W}: what a condition may do, since the
  /// pointer heap can be rolled back.
  static constexpr Effect reversible() { return Effect{0x0f}; }

  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool contains(EffectAtom atom) const {
    return (bits_ & static_cast<std::uint8_t>(atom)) != 0;
  }

  constexpr bool operator==(const Effect&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

constexpr bool effect_leq(Effect a, Effect b) { return (a.bits() & ~b.bits()) == 0; }
constexpr Effect effect_join(Effect a, Effect b) {
  return Effect{static_cast<std::uint8_t>(a.bits() | b.bits())};
}
constexpr Effect effect_meet(Effect a, Effect b) {
  return Effect{static_cast<std::uint8_t>(a.bits() & b.bits())};
}
constexpr Effect effect_seq(Effect a, Effect b) { return effect_join(a, b); }

/// "T", "A", or "{P,N,R,W,IO}" with atoms in that fixed order.
std::string to_string(Effect e);

/// Accepts "T", "A", or a braced comma-separated subset of P, N, R, W, IO
/// (whitespace allowed inside the braces). Returns nullopt on anything else.
std::optional<Effect> parse_effect(std::string_view text);

}  // namespace aleph
