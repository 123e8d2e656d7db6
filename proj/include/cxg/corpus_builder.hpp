#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cxg/band.hpp"
#include "cxg/ingest.hpp"
#include "cxg/matcher.hpp"

namespace cxg {

enum class Provenance { Cxg, Article, Random };

std::string_view provenance_name(Provenance p);

struct CorpusDocument {
  std::uint32_t doc_id = 0;
  Provenance provenance = Provenance::Cxg;
  // cxg_id, article_id or random segment index depending on provenance.
  std::uint32_t source = 0;
  std::uint32_t copy_index = 0;  // article documents only
  std::vector<SentenceId> sentences;
};

struct BuildManifest {
  std::string variant;
  Band band;
  std::uint64_t total_occurrences = 0;
  std::uint64_t kept_sentences = 0;
  std::uint64_t copies = 0;
  std::uint64_t prefix_length = 0;
  std::optional<std::uint64_t> seed;
  std::size_t documents = 0;
  std::map<std::string, std::string> extra;  // e.g. config_hash

  void write(std::ostream& out) const;
};

struct CorpusBuild {
  std::vector<CorpusDocument> documents;
  BuildManifest manifest;

  std::uint64_t occurrences() const;
};

// Where a sentence sits in its source article.
struct SentenceLocation {
  SentenceId id = 0;
  ArticleId article_id = 0;
  std::uint32_t position = 0;
};

std::vector<SentenceLocation> locations_of(std::span<const AnnotatedSentence> corpus);

// One document per construction whose frequency the band selects, in cxg_id
// order, holding its sentences in id order. Throws EmptyCorpusError when the
// band selects nothing.
CorpusBuild build_cxg_corpus(const OccurrenceTable& table, const Band& band);

// Article documents over the sentences that instantiate a selected
// construction; every dropped sentence breaks its article. The document list
// is then repeated whole floor(T/N) times and followed by a document-aligned
// prefix of T mod N sentences, so the build holds exactly target_total
// occurrences. `corpus` must be in corpus order.
CorpusBuild build_base_clone(std::span<const SentenceLocation> corpus, const OccurrenceTable& table,
                             const Band& band, std::uint64_t target_total);

// Same occurrences as `base`, globally shuffled, re-cut into the same number
// of non-empty documents at uniformly drawn break points.
CorpusBuild build_random(const CorpusBuild& base, std::uint64_t seed);

// One sentence per line, a blank line between documents, no trailing blank
// line. Sentence text is the tokens joined by single spaces.
void write_pretraining_file(std::ostream& out, std::span<const CorpusDocument> documents,
                            std::span<const AnnotatedSentence> corpus);
void write_pretraining_file(const std::filesystem::path& path,
                            std::span<const CorpusDocument> documents,
                            std::span<const AnnotatedSentence> corpus);
std::vector<std::vector<std::string>> read_pretraining_file(std::istream& in);

struct MultiplicityDiff {
  SentenceId id = 0;
  std::uint64_t count_a = 0;
  std::uint64_t count_b = 0;
};

struct MultisetReport {
  std::uint64_t total_a = 0;
  std::uint64_t total_b = 0;
  std::vector<MultiplicityDiff> differences;  // sorted by id

  bool totals_equal() const { return total_a == total_b; }
  bool equal() const { return totals_equal() && differences.empty(); }
  void write(std::ostream& out, std::size_t max_listed = 20) const;
};

MultisetReport verify_multiset(std::span<const CorpusDocument> a,
                               std::span<const CorpusDocument> b);

// Sorted list of every sentence occurrence in the documents.
std::vector<SentenceId> sorted_occurrences(std::span<const CorpusDocument> documents);

}  // namespace cxg
