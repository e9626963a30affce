#include "aleph/effects.hpp"

#include <array>
#include <cctype>
#include <utility>

namespace aleph {

namespace {

constexpr std::array<std::pair<EffectAtom, std::string_view>, 5> kAtoms{{
    {EffectAtom::Partial, "P"},
    {EffectAtom::New, "N"},
    {EffectAtom::Read, "R"},
    {EffectAtom::Write, "W"},
    {EffectAtom::IO, "IO"},
}};

}  // namespace

std::string to_string(Effect e) {
  if (e == Effect::none()) return "T";
  if (e == Effect::all()) return "A";
  std::string out = "{";
  bool first = true;
  for (const auto& [atom, name] : kAtoms) {
    if (!e.contains(atom)) continue;
    if (!first) out += ',';
    out += name;
    first = false;
  }
  out += '}';
  return out;
}

std::optional<Effect> parse_effect(std::string_view text) {
  if (text == "T") return Effect::none();
  if (text == "A") return Effect::all();
  if (text.size() < 2 || text.front() != '{' || text.back() != '}') return std::nullopt;

  std::uint8_t bits = 0;
  std::string atom;
  auto flush = [&]() -> bool {
    if (atom.empty()) return false;
    for (const auto& [a, name] : kAtoms) {
      if (atom == name) {
        bits |= static_cast<std::uint8_t>(a);
        atom.clear();
        return true;
      }
    }
    return false;
  };

  std::string_view body = text.substr(1, text.size() - 2);
  bool any = false;
  for (char c : body) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == ',') {
      if (!flush()) return std::nullopt;
      continue;
    }
    atom += c;
    any = true;
  }
  if (!any) return Effect::none();  // "{}"
  if (!flush()) return std::nullopt;
  return Effect{bits};
}

}  // namespace aleph
