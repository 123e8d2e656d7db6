#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cxg/ingest.hpp"
#include "cxg/inventory.hpp"

namespace cxg {

struct InductionParams {
  std::size_t max_len = 4;         // longest slot sequence considered
  std::size_t min_support = 5;     // sentences containing the window
  double min_assoc = 0.05;         // mean adjacent delta-P
  std::size_t max_inventory = 25000;

  void validate() const;
  std::string describe() const;
};

struct InducedCandidate {
  std::vector<SlotConstraint> slots;
  std::string name;
  double score = 0.0;
  std::vector<SentenceId> sentences;  // sorted match set (contiguous windows)
};

// Frequency-filtered, association-scored, subset-pruned candidates in final
// rank order (score desc, then longer, then name), truncated to
// params.max_inventory.
std::vector<InducedCandidate> induce_candidates(std::span<const AnnotatedSentence> corpus,
                                                const InductionParams& params);

// induce_candidates with ids assigned 0.. in rank order. An undersized corpus
// yields an empty inventory and a warning on stderr.
Inventory induce_inventory(std::span<const AnnotatedSentence> corpus,
                           const InductionParams& params);

}  // namespace cxg
