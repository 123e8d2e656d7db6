#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cxg/types.hpp"

namespace cxg {

// The set of POS tags slot constraints and the tagger may use. Defaults to
// the 17 universal dependencies tags.
class Tagset {
 public:
  Tagset();
  explicit Tagset(std::vector<std::string> tags);

  static const std::vector<std::string>& universal();

  bool contains(std::string_view tag) const;
  const std::vector<std::string>& tags() const { return tags_; }

 private:
  std::vector<std::string> tags_;
  std::unordered_set<std::string> lookup_;
};

struct Token {
  std::string form;
  std::string pos;
  std::optional<std::uint32_t> sem;

  bool operator==(const Token&) const = default;
};

struct AnnotatedSentence {
  SentenceId id = 0;
  ArticleId article_id = 0;
  std::uint32_t position = 0;  // index of the sentence within its article
  std::vector<Token> tokens;
  // Whether semantic-cluster assignment ran for this sentence. A token can
  // still lack a cluster when its word is not in the cluster map.
  bool sem_annotated = false;

  // Tokens joined by single spaces: the form written to every output file.
  std::string text() const;
};

struct SuffixRule {
  std::string suffix;
  std::string tag;
};

struct AnnotationResources {
  Tagset tagset;
  std::unordered_map<std::string, std::string> pos_lexicon;
  std::vector<SuffixRule> suffix_rules;  // longest suffix first
  std::unordered_map<std::string, std::uint32_t> cluster_map;
  std::uint32_t cluster_count = 0;  // ids are 0..cluster_count-1
  std::unordered_set<std::string> abbreviations;
  std::string default_tag = "NOUN";
  // Unknown capitalized words after the first token; unused when the tagset
  // lacks it.
  std::string proper_tag = "PROPN";

  struct Paths {
    std::optional<std::filesystem::path> lexicon;
    std::optional<std::filesystem::path> suffixes;
    std::optional<std::filesystem::path> clusters;
    std::optional<std::filesystem::path> abbreviations;
    std::optional<std::filesystem::path> tagset;
  };

  // Loads each present file; absent ones leave the member empty (the tagset
  // falls back to the universal one).
  static AnnotationResources load(const Paths& paths);
  // Loads lexicon.tsv, suffixes.tsv, clusters.tsv, abbreviations.txt and an
  // optional tagset.txt from one directory.
  static AnnotationResources load_directory(const std::filesystem::path& dir);

  // Validates tags against the tagset, sorts suffix rules longest-first and
  // checks that cluster ids are contiguous from 0. Called by the loaders.
  void finalize();
};

struct RawArticle {
  ArticleId id = 0;
  std::string text;
};

// Streams articles out of WikiText-formatted text. Top-level headings
// (`= Title =`) delimit articles; all heading lines are dropped from the
// content and articles with no content are skipped.
class WikiTextReader {
 public:
  explicit WikiTextReader(std::istream& in) : in_(in) {}
  std::optional<RawArticle> next();

 private:
  std::istream& in_;
  std::size_t offset_ = 0;
  ArticleId next_id_ = 0;
  bool done_ = false;
};

std::vector<RawArticle> parse_wikitext(std::istream& in);

// `= Title =` with single `=` delimiters.
bool is_top_level_heading(std::string_view line);
// Any `= ... =` heading line, including `= = Section = =`.
bool is_heading(std::string_view line);

std::vector<std::string> split_sentences(std::string_view article_text,
                                         const std::unordered_set<std::string>& abbreviations = {});

std::vector<std::string> tokenize(std::string_view sentence,
                                  const std::unordered_set<std::string>& abbreviations = {});

// Per token: lexicon (retrying with the first letter lowered), then the
// proper-noun rule, then the longest matching suffix, then default_tag.
std::vector<std::string> tag_pos(std::span<const std::string> tokens,
                                 const AnnotationResources& resources);

enum class IngestMode { Raw, PreSplit, PreAnnotated };

std::optional<IngestMode> parse_ingest_mode(std::string_view name);

// Streams AnnotatedSentences in corpus order. In raw and pre-split modes
// articles are annotated in batches across `jobs` threads and re-emitted in
// article order, so output never depends on `jobs`.
class CorpusReader {
 public:
  CorpusReader(std::istream& in, const AnnotationResources& resources, IngestMode mode,
               unsigned jobs = 1);
  ~CorpusReader();
  CorpusReader(const CorpusReader&) = delete;
  CorpusReader& operator=(const CorpusReader&) = delete;

  std::optional<AnnotatedSentence> next();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

std::vector<AnnotatedSentence> annotate_corpus(std::istream& in,
                                               const AnnotationResources& resources,
                                               IngestMode mode, unsigned jobs = 1);

// Annotates one already-split sentence; returns an empty token list for
// blank input.
std::vector<Token> annotate_sentence(std::string_view sentence,
                                     const AnnotationResources& resources);

// Pre-annotated TSV: sentence_id, article_id, index, form, pos, sem ('-' when
// absent). One token per row, blank line after each sentence.
void write_annotated_tsv(std::ostream& out, std::span<const AnnotatedSentence> sentences);
void write_annotated_sentence(std::ostream& out, const AnnotatedSentence& sentence);

std::vector<AnnotatedSentence> read_annotated_tsv(std::istream& in, const Tagset& tagset = {});

}  // namespace cxg
