#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cxg/band.hpp"
#include "cxg/ingest.hpp"
#include "cxg/inventory.hpp"

namespace cxg {

struct MatchSpan {
  CxgId cxg_id = 0;
  std::uint32_t start = 0;  // first matched token
  std::uint32_t end = 0;    // one past the last matched token
  std::uint32_t gaps_used = 0;

  bool operator==(const MatchSpan&) const = default;
};

// Inverted index from each construction's rarest slot (by inventory-wide
// slot counts, ties to the leftmost slot) to (construction, slot offset).
// Immutable once built and safe to share between threads.
class MatchIndex {
 public:
  explicit MatchIndex(const Inventory& inventory);

  std::size_t construction_count() const { return constructions_.size(); }
  std::size_t entry_count() const;
  bool uses_sem() const { return uses_sem_; }

  // Slot offset each construction is keyed under, by cxg_id.
  std::uint32_t anchor_offset(CxgId id) const;
  // Constructions filed under the given facet value, as cxg_ids.
  std::vector<CxgId> keyed_under(const SlotConstraint& facet) const;

  std::vector<MatchSpan> match(const AnnotatedSentence& sentence, unsigned max_gap) const;

  const std::vector<CxgId>& ids() const { return ids_; }

 private:
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

  struct Slot {
    SlotKind kind;
    std::uint32_t value;
  };
  struct Compiled {
    CxgId id;
    std::vector<Slot> slots;
    std::uint32_t anchor;
  };
  struct Entry {
    std::uint32_t construction;  // index into constructions_
    std::uint32_t offset;
  };
  struct TokenCodes {
    std::uint32_t lex, pos, sem;
  };

  static std::uint64_t key(SlotKind kind, std::uint32_t value) {
    return (std::uint64_t(kind) << 32) | value;
  }
  std::uint32_t code_of(const SlotConstraint& slot) const;
  static bool accepts(const Slot& slot, const TokenCodes& token);
  // Minimal end over all alignments of `c` starting at `start`, or 0.
  std::uint32_t min_end(const Compiled& c, std::span<const TokenCodes> tokens,
                        std::uint32_t start, unsigned max_gap) const;

  std::vector<Compiled> constructions_;  // sorted by id
  std::vector<CxgId> ids_;
  std::unordered_map<std::string, std::uint32_t> lex_codes_;
  std::unordered_map<std::string, std::uint32_t> pos_codes_;
  std::unordered_map<std::uint64_t, std::vector<Entry>> index_;
  bool uses_sem_ = false;
};

inline MatchIndex build_index(const Inventory& inventory) { return MatchIndex(inventory); }

// All constructions the sentence instantiates, sorted by cxg_id, each with
// its leftmost and then shortest span. Throws FacetMissingError when the
// inventory uses SEM slots and the sentence has no cluster annotation.
std::vector<MatchSpan> match_sentence(const MatchIndex& index, const AnnotatedSentence& sentence,
                                      unsigned max_gap);

// Reference matcher: every construction at every start, by direct recursion
// over slots and gaps on the raw token strings.
std::vector<MatchSpan> brute_force_match(const Inventory& inventory,
                                         const AnnotatedSentence& sentence, unsigned max_gap);

// construction -> sentences and its exact transpose.
class OccurrenceTable {
 public:
  OccurrenceTable() = default;
  // Sentence lists are sorted and de-duplicated; constructions with no
  // sentences are kept with frequency 0.
  explicit OccurrenceTable(std::vector<std::pair<CxgId, std::vector<SentenceId>>> forward);

  const std::vector<CxgId>& constructions() const { return ids_; }
  std::span<const SentenceId> instances(CxgId id) const;
  std::size_t frequency(CxgId id) const { return instances(id).size(); }

  // Every sentence that instantiates at least one construction, sorted.
  const std::vector<SentenceId>& sentences() const { return sentence_ids_; }
  std::span<const CxgId> constructions_of(SentenceId id) const;
  bool contains(CxgId cxg, SentenceId sentence) const;

  bool transpose_consistent() const;
  bool operator==(const OccurrenceTable& other) const;

 private:
  std::vector<CxgId> ids_;
  std::vector<std::vector<SentenceId>> forward_;
  std::vector<SentenceId> sentence_ids_;
  std::vector<std::vector<CxgId>> reverse_;
};

struct CorpusMatch {
  OccurrenceTable table;
  std::vector<SentenceId> discarded;  // sentences matching nothing
  std::size_t sentence_count = 0;
};

// Matches every sentence; results are merged in sentence order so they do
// not depend on `jobs`.
CorpusMatch match_corpus(const MatchIndex& index, std::span<const AnnotatedSentence> corpus,
                         unsigned max_gap, unsigned jobs = 1);

struct BandCount {
  Band band;
  std::size_t constructions = 0;
};

struct OccurrenceStats {
  std::map<std::uint64_t, std::size_t> histogram;  // frequency -> constructions
  std::size_t below_first_edge = 0;                 // freq < edges.front()
  std::vector<BandCount> bands;
};

// Edges e0 < e1 < ... < ek give bands [e0, e1], [e1+1, e2], ...,
// [e(k-1)+1, ek], [ek+1, inf). A single edge gives [e0, inf).
OccurrenceStats occurrence_stats(const OccurrenceTable& table,
                                 std::span<const std::uint64_t> band_edges);

// cxg_id<TAB>space-separated sentence ids, sorted by cxg_id.
void write_occurrence_table(std::ostream& out, const OccurrenceTable& table);
OccurrenceTable read_occurrence_table(std::istream& in);
void write_id_list(std::ostream& out, std::span<const SentenceId> ids);
// band_lo<TAB>band_hi<TAB>construction_count, the below-range row first.
void write_band_stats(std::ostream& out, const OccurrenceStats& stats,
                      std::span<const std::uint64_t> band_edges);
void write_histogram(std::ostream& out, const OccurrenceStats& stats);

}  // namespace cxg
