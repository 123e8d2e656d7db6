#include "cxg/matcher.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "cxg/error.hpp"
#include "cxg/parallel.hpp"
#include "cxg/text.hpp"

namespace cxg {

std::optional<Band> Band::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto lo = parse_uint(trim(text.substr(0, colon)));
  auto hi_text = trim(text.substr(colon + 1));
  if (!lo) return std::nullopt;
  Band band{*lo, std::nullopt};
  if (!hi_text.empty() && hi_text != "inf") {
    auto hi = parse_uint(hi_text);
    if (!hi || *hi < *lo) return std::nullopt;
    band.hi = *hi;
  }
  return band;
}

// ---------------------------------------------------------------------------
// Index

MatchIndex::MatchIndex(const Inventory& inventory) {
  std::vector<const Construction*> sorted;
  sorted.reserve(inventory.constructions.size());
  for (const auto& c : inventory.constructions) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(),
            [](const Construction* a, const Construction* b) { return a->id < b->id; });

  std::unordered_map<std::uint64_t, std::size_t> slot_counts;
  for (const auto* c : sorted) {
    Compiled compiled{c->id, {}, 0};
    for (const auto& s : c->slots) {
      std::uint32_t value = 0;
      switch (s.kind) {
        case SlotKind::Lex:
          value = lex_codes_.try_emplace(s.value, std::uint32_t(lex_codes_.size())).first->second;
          break;
        case SlotKind::Pos:
          value = pos_codes_.try_emplace(s.value, std::uint32_t(pos_codes_.size())).first->second;
          break;
        case SlotKind::Sem: {
          auto v = parse_uint(s.value);
          if (!v || *v >= kNone) throw Error("invalid sem slot value '" + s.value + "'");
          value = static_cast<std::uint32_t>(*v);
          uses_sem_ = true;
          break;
        }
      }
      compiled.slots.push_back({s.kind, value});
      ++slot_counts[key(s.kind, value)];
    }
    constructions_.push_back(std::move(compiled));
    ids_.push_back(c->id);
  }
  for (std::uint32_t i = 0; i < constructions_.size(); ++i) {
    auto& c = constructions_[i];
    std::uint32_t best = 0;
    std::size_t best_count = slot_counts[key(c.slots[0].kind, c.slots[0].value)];
    for (std::uint32_t k = 1; k < c.slots.size(); ++k) {
      const std::size_t count = slot_counts[key(c.slots[k].kind, c.slots[k].value)];
      if (count < best_count) {
        best = k;
        best_count = count;
      }
    }
    c.anchor = best;
    index_[key(c.slots[best].kind, c.slots[best].value)].push_back({i, best});
  }
}

std::size_t MatchIndex::entry_count() const {
  std::size_t n = 0;
  for (const auto& [k, entries] : index_) n += entries.size();
  return n;
}

std::uint32_t MatchIndex::anchor_offset(CxgId id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) throw Error("unknown construction " + std::to_string(id));
  return constructions_[std::size_t(it - ids_.begin())].anchor;
}

std::uint32_t MatchIndex::code_of(const SlotConstraint& slot) const {
  switch (slot.kind) {
    case SlotKind::Lex: {
      auto it = lex_codes_.find(slot.value);
      return it == lex_codes_.end() ? kNone : it->second;
    }
    case SlotKind::Pos: {
      auto it = pos_codes_.find(slot.value);
      return it == pos_codes_.end() ? kNone : it->second;
    }
    case SlotKind::Sem: {
      auto v = parse_uint(slot.value);
      return v && *v < kNone ? static_cast<std::uint32_t>(*v) : kNone;
    }
  }
  return kNone;
}

std::vector<CxgId> MatchIndex::keyed_under(const SlotConstraint& facet) const {
  std::vector<CxgId> out;
  const auto code = code_of(facet);
  if (code == kNone) return out;
  auto it = index_.find(key(facet.kind, code));
  if (it == index_.end()) return out;
  for (const auto& e : it->second) out.push_back(constructions_[e.construction].id);
  std::sort(out.begin(), out.end());
  return out;
}

bool MatchIndex::accepts(const Slot& slot, const TokenCodes& token) {
  switch (slot.kind) {
    case SlotKind::Lex: return token.lex == slot.value;
    case SlotKind::Pos: return token.pos == slot.value;
    case SlotKind::Sem: return token.sem == slot.value;
  }
  return false;
}

std::uint32_t MatchIndex::min_end(const Compiled& c, std::span<const TokenCodes> tokens,
                                  std::uint32_t start, unsigned max_gap) const {
  const auto n = static_cast<std::uint32_t>(tokens.size());
  if (!accepts(c.slots[0], tokens[start])) return 0;
  // Forward reachability: the sorted positions where slot i can sit.
  std::vector<std::uint32_t> reach{start};
  std::vector<std::uint32_t> next;
  for (std::size_t i = 1; i < c.slots.size(); ++i) {
    next.clear();
    std::size_t r = 0;
    const std::uint64_t last = std::min<std::uint64_t>(n - 1, std::uint64_t(reach.back()) + 1 + max_gap);
    for (std::uint32_t q = reach.front() + 1; q <= last; ++q) {
      while (r < reach.size() && std::uint64_t(reach[r]) + 1 + max_gap < q) ++r;
      if (r == reach.size() || reach[r] >= q) continue;
      if (accepts(c.slots[i], tokens[q])) next.push_back(q);
    }
    if (next.empty()) return 0;
    std::swap(reach, next);
  }
  return reach.front() + 1;
}

std::vector<MatchSpan> MatchIndex::match(const AnnotatedSentence& sentence,
                                         unsigned max_gap) const {
  if (uses_sem_ && !sentence.sem_annotated) throw FacetMissingError(sentence.id, "sem");
  const std::size_t n = sentence.tokens.size();
  std::vector<TokenCodes> tokens(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& t = sentence.tokens[p];
    auto lex = lex_codes_.find(t.form);
    auto pos = pos_codes_.find(t.pos);
    tokens[p] = {lex == lex_codes_.end() ? kNone : lex->second,
                 pos == pos_codes_.end() ? kNone : pos->second, t.sem ? *t.sem : kNone};
  }

  // (construction, earliest possible start, latest possible start) for every
  // anchor hit.
  struct Hit {
    std::uint32_t construction;
    std::uint32_t lo, hi;
  };
  std::vector<Hit> hits;
  auto collect = [&](std::uint64_t k, std::uint32_t p) {
    auto it = index_.find(k);
    if (it == index_.end()) return;
    for (const auto& e : it->second) {
      if (e.offset > p) continue;
      const auto& c = constructions_[e.construction];
      if (c.slots.size() > n) continue;
      const std::uint32_t hi = p - e.offset;
      const std::uint64_t spread = std::uint64_t(e.offset) * max_gap;
      const std::uint32_t lo = spread >= hi ? 0 : hi - std::uint32_t(spread);
      hits.push_back({e.construction, lo, hi});
    }
  };
  for (std::uint32_t p = 0; p < n; ++p) {
    if (tokens[p].lex != kNone) collect(key(SlotKind::Lex, tokens[p].lex), p);
    if (tokens[p].pos != kNone) collect(key(SlotKind::Pos, tokens[p].pos), p);
    if (tokens[p].sem != kNone) collect(key(SlotKind::Sem, tokens[p].sem), p);
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.construction != b.construction ? a.construction < b.construction : a.lo < b.lo;
  });

  std::vector<MatchSpan> out;
  std::size_t i = 0;
  while (i < hits.size()) {
    const std::uint32_t ci = hits[i].construction;
    std::size_t j = i;
    while (j < hits.size() && hits[j].construction == ci) ++j;
    const auto& c = constructions_[ci];
    // Candidate starts are the union of the hit ranges, scanned leftmost
    // first; the first start with any alignment wins.
    std::uint32_t next_start = 0;
    for (std::size_t h = i; h < j; ++h) {
      std::uint32_t s = std::max(hits[h].lo, next_start);
      bool found = false;
      for (; s <= hits[h].hi; ++s) {
        if (const auto end = min_end(c, tokens, s, max_gap)) {
          out.push_back({c.id, s, end, end - s - std::uint32_t(c.slots.size())});
          found = true;
          break;
        }
      }
      if (found) break;
      next_start = std::max(next_start, hits[h].hi + 1);
    }
    i = j;
  }
  return out;
}

std::vector<MatchSpan> match_sentence(const MatchIndex& index, const AnnotatedSentence& sentence,
                                      unsigned max_gap) {
  return index.match(sentence, max_gap);
}

// ---------------------------------------------------------------------------
// Reference matcher

namespace {

// Smallest end reachable with slot `i` placed on token `p`, or 0.
std::size_t brute_end(const std::vector<SlotConstraint>& slots, const std::vector<Token>& tokens,
                      std::size_t i, std::size_t p, unsigned max_gap) {
  if (!slots[i].accepts(tokens[p])) return 0;
  if (i + 1 == slots.size()) return p + 1;
  std::size_t best = 0;
  for (std::size_t q = p + 1; q < tokens.size() && q <= p + 1 + max_gap; ++q) {
    const std::size_t end = brute_end(slots, tokens, i + 1, q, max_gap);
    if (end && (!best || end < best)) best = end;
  }
  return best;
}

}  // namespace

std::vector<MatchSpan> brute_force_match(const Inventory& inventory,
                                         const AnnotatedSentence& sentence, unsigned max_gap) {
  if (inventory.uses(SlotKind::Sem) && !sentence.sem_annotated) {
    throw FacetMissingError(sentence.id, "sem");
  }
  std::vector<MatchSpan> out;
  for (const auto& c : inventory.constructions) {
    for (std::size_t s = 0; s < sentence.tokens.size(); ++s) {
      if (const auto end = brute_end(c.slots, sentence.tokens, 0, s, max_gap)) {
        out.push_back({c.id, std::uint32_t(s), std::uint32_t(end),
                       std::uint32_t(end - s - c.slots.size())});
        break;
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const MatchSpan& a, const MatchSpan& b) { return a.cxg_id < b.cxg_id; });
  return out;
}

// ---------------------------------------------------------------------------
// Occurrence table

OccurrenceTable::OccurrenceTable(
    std::vector<std::pair<CxgId, std::vector<SentenceId>>> forward) {
  std::sort(forward.begin(), forward.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<SentenceId, CxgId>> pairs;
  for (auto& [id, sentences] : forward) {
    if (!ids_.empty() && ids_.back() == id) {
      throw DuplicateError("construction " + std::to_string(id) + " listed twice");
    }
    std::sort(sentences.begin(), sentences.end());
    sentences.erase(std::unique(sentences.begin(), sentences.end()), sentences.end());
    for (SentenceId s : sentences) pairs.emplace_back(s, id);
    ids_.push_back(id);
    forward_.push_back(std::move(sentences));
  }
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [s, c] : pairs) {
    if (sentence_ids_.empty() || sentence_ids_.back() != s) {
      sentence_ids_.push_back(s);
      reverse_.emplace_back();
    }
    reverse_.back().push_back(c);
  }
}

std::span<const SentenceId> OccurrenceTable::instances(CxgId id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return {};
  return forward_[std::size_t(it - ids_.begin())];
}

std::span<const CxgId> OccurrenceTable::constructions_of(SentenceId id) const {
  auto it = std::lower_bound(sentence_ids_.begin(), sentence_ids_.end(), id);
  if (it == sentence_ids_.end() || *it != id) return {};
  return reverse_[std::size_t(it - sentence_ids_.begin())];
}

bool OccurrenceTable::contains(CxgId cxg, SentenceId sentence) const {
  auto list = instances(cxg);
  return std::binary_search(list.begin(), list.end(), sentence);
}

bool OccurrenceTable::transpose_consistent() const {
  std::size_t forward_total = 0;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    for (SentenceId s : forward_[i]) {
      auto r = constructions_of(s);
      if (!std::binary_search(r.begin(), r.end(), ids_[i])) return false;
    }
    forward_total += forward_[i].size();
  }
  std::size_t reverse_total = 0;
  for (std::size_t i = 0; i < sentence_ids_.size(); ++i) {
    for (CxgId c : reverse_[i]) {
      if (!contains(c, sentence_ids_[i])) return false;
    }
    reverse_total += reverse_[i].size();
  }
  return forward_total == reverse_total;
}

bool OccurrenceTable::operator==(const OccurrenceTable& other) const {
  return ids_ == other.ids_ && forward_ == other.forward_;
}

CorpusMatch match_corpus(const MatchIndex& index, std::span<const AnnotatedSentence> corpus,
                         unsigned max_gap, unsigned jobs) {
  std::vector<std::vector<CxgId>> per_sentence(corpus.size());
  parallel_chunks(corpus.size(), jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& span : index.match(corpus[i], max_gap)) {
        per_sentence[i].push_back(span.cxg_id);
      }
    }
  });

  const auto& ids = index.ids();
  std::vector<std::pair<CxgId, std::vector<SentenceId>>> forward;
  forward.reserve(ids.size());
  for (CxgId id : ids) forward.emplace_back(id, std::vector<SentenceId>{});
  CorpusMatch result;
  result.sentence_count = corpus.size();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (per_sentence[i].empty()) {
      result.discarded.push_back(corpus[i].id);
      continue;
    }
    for (CxgId c : per_sentence[i]) {
      const auto slot = std::size_t(std::lower_bound(ids.begin(), ids.end(), c) - ids.begin());
      forward[slot].second.push_back(corpus[i].id);
    }
  }
  result.table = OccurrenceTable(std::move(forward));
  return result;
}

// ---------------------------------------------------------------------------
// Statistics and serialization

OccurrenceStats occurrence_stats(const OccurrenceTable& table,
                                 std::span<const std::uint64_t> band_edges) {
  if (band_edges.empty()) throw Error("at least one band edge is required");
  for (std::size_t i = 1; i < band_edges.size(); ++i) {
    if (band_edges[i] <= band_edges[i - 1]) throw Error("band edges must be strictly increasing");
  }
  OccurrenceStats stats;
  const std::size_t k = band_edges.size();
  if (k == 1) {
    stats.bands.push_back({Band{band_edges[0], std::nullopt}, 0});
  } else {
    stats.bands.push_back({Band{band_edges[0], band_edges[1]}, 0});
    for (std::size_t i = 1; i + 1 < k; ++i) {
      stats.bands.push_back({Band{band_edges[i] + 1, band_edges[i + 1]}, 0});
    }
    stats.bands.push_back({Band{band_edges[k - 1] + 1, std::nullopt}, 0});
  }
  for (CxgId id : table.constructions()) {
    const std::uint64_t f = table.frequency(id);
    ++stats.histogram[f];
    if (f < band_edges.front()) {
      ++stats.below_first_edge;
      continue;
    }
    for (auto& bc : stats.bands) {
      if (bc.band.contains(f)) {
        ++bc.constructions;
        break;
      }
    }
  }
  return stats;
}

void write_occurrence_table(std::ostream& out, const OccurrenceTable& table) {
  for (CxgId id : table.constructions()) {
    out << id << '\t';
    bool first = true;
    for (SentenceId s : table.instances(id)) {
      if (!first) out << ' ';
      out << s;
      first = false;
    }
    out << '\n';
  }
}

OccurrenceTable read_occurrence_table(std::istream& in) {
  std::vector<std::pair<CxgId, std::vector<SentenceId>>> forward;
  std::string line;
  std::size_t line_no = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cols = split(line, '\t');
    if (cols.size() != 2) throw ParseError(line_no, "expected cxg_id<TAB>sentence ids");
    auto id = parse_uint(cols[0]);
    if (!id || *id > 0xFFFFFFFFULL) throw ParseError(line_no, "invalid construction id");
    std::vector<SentenceId> sentences;
    for (auto field : split_whitespace(cols[1])) {
      auto s = parse_uint(field);
      if (!s || *s > 0xFFFFFFFFULL) throw ParseError(line_no, "invalid sentence id");
      sentences.push_back(static_cast<SentenceId>(*s));
    }
    forward.emplace_back(static_cast<CxgId>(*id), std::move(sentences));
  }
  return OccurrenceTable(std::move(forward));
}

void write_id_list(std::ostream& out, std::span<const SentenceId> ids) {
  for (SentenceId s : ids) out << s << '\n';
}

void write_band_stats(std::ostream& out, const OccurrenceStats& stats,
                      std::span<const std::uint64_t> band_edges) {
  if (!band_edges.empty() && band_edges.front() > 0) {
    out << 0 << '\t' << band_edges.front() - 1 << '\t' << stats.below_first_edge << '\n';
  }
  for (const auto& bc : stats.bands) {
    out << bc.band.lo_text() << '\t' << bc.band.hi_text() << '\t' << bc.constructions << '\n';
  }
}

void write_histogram(std::ostream& out, const OccurrenceStats& stats) {
  for (const auto& [freq, count] : stats.histogram) out << freq << '\t' << count << '\n';
}

}  // namespace cxg
