#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cxg/band.hpp"
#include "cxg/ingest.hpp"
#include "cxg/matcher.hpp"

namespace cxg {

enum class PairLabel { Same, Different };
enum class Split { Train, Dev, Test };
enum class Strictness { Anchor, Disjoint };

std::string_view label_name(PairLabel label);
std::string_view split_name(Split split);
std::optional<PairLabel> parse_label(std::string_view text);
std::optional<Strictness> parse_strictness(std::string_view text);
std::string_view strictness_name(Strictness s);

// An unordered sentence pair stored in canonical order (a < b). For a
// `different` pair exactly one of the two sentences instantiates the anchor.
struct PairExample {
  SentenceId a = 0;
  SentenceId b = 0;
  PairLabel label = PairLabel::Same;
  CxgId anchor = 0;
  Band band;
  Split split = Split::Train;

  bool operator==(const PairExample&) const = default;
};

struct SplitQuota {
  std::uint32_t positive = 0;
  std::uint32_t negative = 0;
};

struct SamplerConfig {
  SplitQuota train{2, 2};
  SplitQuota dev{1, 1};
  SplitQuota test{1, 1};
  std::uint64_t seed = 0;
  Strictness strictness = Strictness::Anchor;
  std::vector<std::size_t> inoculation_sizes{100, 500, 1000, 5000};

  void validate() const;
  const SplitQuota& quota(Split s) const;
};

struct Shortfall {
  CxgId cxg_id = 0;
  Split split = Split::Train;
  std::uint32_t requested = 0;
  std::uint32_t delivered = 0;
};

struct PairSample {
  std::vector<PairExample> train, dev, test;
  std::vector<Shortfall> shortfalls;

  std::vector<PairExample>& of(Split s);
  const std::vector<PairExample>& of(Split s) const;
  std::vector<PairExample> all() const;
};

// Per construction in the band (cxg_id order), with randomness derived from
// (seed, cxg_id): positives are distinct pairs of its instances, negatives
// pair one instance with a sentence from elsewhere in the table that
// satisfies the strictness rule. No unordered pair is emitted twice.
PairSample sample_pairs(const OccurrenceTable& table, const Band& band,
                        const SamplerConfig& config);

// Nested, label-balanced (within one) subsets: every subset is a prefix of
// one seeded ordering that alternates labels.
std::vector<std::vector<PairExample>> make_inoculation_subsets(std::span<const PairExample> train,
                                                               std::span<const std::size_t> sizes,
                                                               std::uint64_t seed);

struct AuditReport {
  std::size_t pairs = 0;
  std::size_t label_violations = 0;
  std::size_t duplicates = 0;  // same pair twice within one split
  std::size_t leakage = 0;     // same pair in two different splits
  std::vector<std::string> details;

  bool clean() const { return label_violations == 0 && duplicates == 0 && leakage == 0; }
  void write(std::ostream& out) const;
};

AuditReport audit_pairs(std::span<const PairExample> pairs, const OccurrenceTable& table,
                        Strictness strictness);

// label<TAB>sentence_a_text<TAB>sentence_b_text<TAB>anchor_cxg<TAB>band_lo<TAB>band_hi,
// ordered by anchor, then canonical pair.
void write_pairs(std::ostream& out, std::span<const PairExample> pairs,
                 std::span<const AnnotatedSentence> corpus);

struct PairRecord {
  PairLabel label = PairLabel::Same;
  std::string text_a;
  std::string text_b;
  CxgId anchor = 0;
  Band band;

  bool operator==(const PairRecord&) const = default;
};

std::vector<PairRecord> read_pairs(std::istream& in);

// cxg_id<TAB>split<TAB>requested<TAB>delivered
void write_shortfalls(std::ostream& out, std::span<const Shortfall> shortfalls);

}  // namespace cxg
