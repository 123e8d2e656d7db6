#include "cxg/inventory.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "cxg/error.hpp"
#include "cxg/text.hpp"

namespace cxg {

std::string_view slot_kind_prefix(SlotKind kind) {
  switch (kind) {
    case SlotKind::Lex: return "lex";
    case SlotKind::Pos: return "pos";
    case SlotKind::Sem: return "sem";
  }
  return "?";
}

bool SlotConstraint::accepts(const Token& token) const {
  switch (kind) {
    case SlotKind::Lex: return token.form == value;
    case SlotKind::Pos: return token.pos == value;
    case SlotKind::Sem: return token.sem && std::to_string(*token.sem) == value;
  }
  return false;
}

std::string render_name(std::span<const SlotConstraint> slots) {
  std::string out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i) out += " + ";
    if (slots[i].kind == SlotKind::Sem) out += "SEM";
    out += slots[i].value;
  }
  return out;
}

std::string render_slots(std::span<const SlotConstraint> slots) {
  std::string out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (i) out += ' ';
    out += slot_kind_prefix(slots[i].kind);
    out += ':';
    out += slots[i].value;
  }
  return out;
}

namespace {

SlotConstraint parse_slot(std::string_view field, std::size_t column, const Tagset& tagset) {
  const auto colon = field.find(':');
  if (colon == std::string_view::npos) {
    throw SpecError(column, "slot '" + std::string(field) + "' has no kind prefix");
  }
  const auto prefix = field.substr(0, colon);
  const auto value = field.substr(colon + 1);
  if (value.empty()) throw SpecError(column, "slot '" + std::string(field) + "' has no value");
  SlotConstraint slot;
  slot.value = std::string(value);
  if (prefix == "lex") {
    slot.kind = SlotKind::Lex;
  } else if (prefix == "pos") {
    slot.kind = SlotKind::Pos;
    if (!tagset.contains(value)) {
      throw SpecError(column, "unknown POS tag '" + std::string(value) + "'");
    }
  } else if (prefix == "sem") {
    slot.kind = SlotKind::Sem;
    auto id = parse_uint(value);
    if (!id || *id > 0xFFFFFFFFULL) {
      throw SpecError(column, "sem value '" + std::string(value) + "' is not a cluster id");
    }
    slot.value = std::to_string(*id);  // canonical form, no leading zeros
  } else {
    throw SpecError(column, "unknown slot prefix '" + std::string(prefix) + "'");
  }
  return slot;
}

}  // namespace

Construction parse_construction_spec(std::string_view line, const Tagset& tagset) {
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) throw SpecError(1, "expected <id><TAB><slots>");
  auto id = parse_uint(line.substr(0, tab));
  if (!id || *id > 0xFFFFFFFFULL) throw SpecError(1, "construction id must be an integer");

  Construction c;
  c.id = static_cast<CxgId>(*id);
  const auto body = line.substr(tab + 1);
  std::size_t i = 0;
  while (i < body.size()) {
    while (i < body.size() && body[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < body.size() && body[i] != ' ') ++i;
    if (i > start) {
      c.slots.push_back(parse_slot(body.substr(start, i - start), tab + 2 + start, tagset));
    }
  }
  if (c.slots.size() < 2) {
    throw SpecError(tab + 2, "construction needs at least 2 slots, found " +
                                 std::to_string(c.slots.size()));
  }
  c.name = render_name(c.slots);
  return c;
}

bool Inventory::uses(SlotKind kind) const {
  for (const auto& c : constructions) {
    for (const auto& s : c.slots) {
      if (s.kind == kind) return true;
    }
  }
  return false;
}

void validate_inventory(const Inventory& inventory, const Tagset& tagset) {
  std::unordered_map<CxgId, std::size_t> ids;
  std::map<std::vector<SlotConstraint>, CxgId> sequences;
  for (const auto& c : inventory.constructions) {
    if (c.slots.size() < 2) {
      throw Error("construction " + std::to_string(c.id) + " has fewer than 2 slots");
    }
    for (const auto& s : c.slots) {
      if (s.value.empty() || (s.kind == SlotKind::Pos && !tagset.contains(s.value)) ||
          (s.kind == SlotKind::Sem && !parse_uint(s.value))) {
        throw Error("construction " + std::to_string(c.id) + " has an invalid slot");
      }
    }
    if (!ids.emplace(c.id, 0).second) {
      throw DuplicateError("duplicate construction id " + std::to_string(c.id));
    }
    auto [it, inserted] = sequences.emplace(c.slots, c.id);
    if (!inserted) {
      throw DuplicateError("constructions " + std::to_string(it->second) + " and " +
                           std::to_string(c.id) + " have identical slots");
    }
  }
}

Inventory load_inventory(std::istream& in, const Tagset& tagset) {
  Inventory inv;
  std::unordered_map<CxgId, std::size_t> id_lines;
  std::map<std::vector<SlotConstraint>, CxgId> sequences;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    Construction c;
    try {
      c = parse_construction_spec(line, tagset);
    } catch (const SpecError& e) {
      throw ParseError(line_no, e.what());
    }
    if (auto [it, inserted] = id_lines.emplace(c.id, line_no); !inserted) {
      throw ParseError(line_no, "duplicate construction id " + std::to_string(c.id) +
                                    " (first on line " + std::to_string(it->second) + ")");
    }
    if (auto [it, inserted] = sequences.emplace(c.slots, c.id); !inserted) {
      throw DuplicateError("line " + std::to_string(line_no) + ": constructions " +
                           std::to_string(it->second) + " and " + std::to_string(c.id) +
                           " have identical slots '" + render_slots(c.slots) + "'");
    }
    inv.constructions.push_back(std::move(c));
  }
  return inv;
}

Inventory load_inventory(const std::filesystem::path& path, const Tagset& tagset) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  auto inv = load_inventory(in, tagset);
  inv.source = "loaded from " + path.string();
  return inv;
}

void write_inventory(std::ostream& out, const Inventory& inventory) {
  std::vector<const Construction*> sorted;
  for (const auto& c : inventory.constructions) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(),
            [](const Construction* a, const Construction* b) { return a->id < b->id; });
  for (const auto* c : sorted) out << c->id << '\t' << render_slots(c->slots) << '\n';
}

}  // namespace cxg
