#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cxg/ingest.hpp"
#include "cxg/types.hpp"

namespace cxg {

enum class SlotKind : std::uint8_t { Lex, Pos, Sem };

std::string_view slot_kind_prefix(SlotKind kind);

// One position of a construction: an exact word form, a POS tag, or a
// semantic cluster id.
struct SlotConstraint {
  SlotKind kind = SlotKind::Lex;
  std::string value;

  // True when the token carries the facet this slot constrains and it equals
  // the slot's value. LEX comparison is case-sensitive.
  bool accepts(const Token& token) const;

  auto operator<=>(const SlotConstraint&) const = default;
};

struct Construction {
  CxgId id = 0;
  std::vector<SlotConstraint> slots;
  std::string name;
};

// "PRON + didn't + VERB + how": LEX verbatim, POS as the tag, SEM as SEM<k>.
std::string render_name(std::span<const SlotConstraint> slots);
inline std::string render_name(const Construction& c) { return render_name(c.slots); }

// `lex:form pos:TAG sem:3` rendering used by the inventory file.
std::string render_slots(std::span<const SlotConstraint> slots);

// Parses `<id>\t<slot> <slot> ...`. Throws SpecError with the 1-based column
// of the offending field.
Construction parse_construction_spec(std::string_view line, const Tagset& tagset = {});

struct Inventory {
  std::vector<Construction> constructions;
  std::string source;

  std::size_t size() const { return constructions.size(); }
  bool uses(SlotKind kind) const;
};

// Blank lines and lines starting with '#' are skipped. Rejects duplicate ids
// and duplicate slot sequences.
Inventory load_inventory(std::istream& in, const Tagset& tagset = {});
Inventory load_inventory(const std::filesystem::path& path, const Tagset& tagset = {});

// Writes spec lines sorted by cxg_id.
void write_inventory(std::ostream& out, const Inventory& inventory);

// Checks the inventory invariants (length >= 2, unique ids, unique slot
// sequences, valid values) and throws on the first violation.
void validate_inventory(const Inventory& inventory, const Tagset& tagset = {});

}  // namespace cxg
