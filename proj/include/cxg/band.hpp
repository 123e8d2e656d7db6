#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cxg {

// Inclusive frequency range [lo, hi]; an absent hi is unbounded.
struct Band {
  std::uint64_t lo = 2;
  std::optional<std::uint64_t> hi;

  bool contains(std::uint64_t freq) const { return freq >= lo && (!hi || freq <= *hi); }
  // Band membership for corpus builds and pair sampling also requires
  // freq >= 2 (a single sentence cannot form a pair or a document).
  bool selects(std::uint64_t freq) const { return freq >= 2 && contains(freq); }

  std::string lo_text() const { return std::to_string(lo); }
  std::string hi_text() const { return hi ? std::to_string(*hi) : std::string("inf"); }
  std::string label() const { return lo_text() + ":" + hi_text(); }

  // Accepts "LO:HI", "LO:inf" and "LO:".
  static std::optional<Band> parse(std::string_view text);

  static Band lower() { return {2, 10000}; }
  static Band upper() { return {10001, std::nullopt}; }

  bool operator==(const Band&) const = default;
};

}  // namespace cxg
