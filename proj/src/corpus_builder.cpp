#include "cxg/corpus_builder.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "cxg/error.hpp"
#include "cxg/random.hpp"
#include "cxg/text.hpp"

namespace cxg {

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::Cxg: return "cxg";
    case Provenance::Article: return "article";
    case Provenance::Random: return "random";
  }
  return "?";
}

void BuildManifest::write(std::ostream& out) const {
  out << "variant = " << variant << '\n'
      << "band_lo = " << band.lo_text() << '\n'
      << "band_hi = " << band.hi_text() << '\n'
      << "total_occurrences = " << total_occurrences << '\n'
      << "kept_sentences = " << kept_sentences << '\n'
      << "copies = " << copies << '\n'
      << "prefix_length = " << prefix_length << '\n'
      << "seed = " << (seed ? std::to_string(*seed) : std::string("-")) << '\n'
      << "documents = " << documents << '\n';
  for (const auto& [k, v] : extra) out << k << " = " << v << '\n';
}

std::uint64_t CorpusBuild::occurrences() const {
  std::uint64_t n = 0;
  for (const auto& d : documents) n += d.sentences.size();
  return n;
}

std::vector<SentenceLocation> locations_of(std::span<const AnnotatedSentence> corpus) {
  std::vector<SentenceLocation> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back({s.id, s.article_id, s.position});
  return out;
}

namespace {

std::vector<CxgId> selected_constructions(const OccurrenceTable& table, const Band& band) {
  std::vector<CxgId> out;
  for (CxgId id : table.constructions()) {
    if (band.selects(table.frequency(id))) out.push_back(id);
  }
  if (out.empty()) {
    throw EmptyCorpusError("band " + band.label() + " selects no construction with frequency >= 2");
  }
  return out;
}

}  // namespace

CorpusBuild build_cxg_corpus(const OccurrenceTable& table, const Band& band) {
  CorpusBuild build;
  for (CxgId id : selected_constructions(table, band)) {
    auto inst = table.instances(id);
    CorpusDocument doc;
    doc.doc_id = static_cast<std::uint32_t>(build.documents.size());
    doc.provenance = Provenance::Cxg;
    doc.source = id;
    doc.sentences.assign(inst.begin(), inst.end());
    build.documents.push_back(std::move(doc));
  }
  build.manifest.variant = "cxg";
  build.manifest.band = band;
  build.manifest.total_occurrences = build.occurrences();
  std::unordered_set<SentenceId> distinct;
  for (const auto& d : build.documents) distinct.insert(d.sentences.begin(), d.sentences.end());
  build.manifest.kept_sentences = distinct.size();
  build.manifest.copies = 1;
  build.manifest.documents = build.documents.size();
  return build;
}

CorpusBuild build_base_clone(std::span<const SentenceLocation> corpus, const OccurrenceTable& table,
                             const Band& band, std::uint64_t target_total) {
  const auto selected = selected_constructions(table, band);
  auto keep = [&](SentenceId s) {
    for (CxgId c : table.constructions_of(s)) {
      if (std::binary_search(selected.begin(), selected.end(), c)) return true;
    }
    return false;
  };

  // Runs of kept sentences that are consecutive in their article.
  std::vector<std::vector<SentenceId>> runs;
  std::vector<ArticleId> run_articles;
  const SentenceLocation* prev = nullptr;
  bool open = false;
  std::uint64_t kept = 0;
  for (const auto& loc : corpus) {
    if (!keep(loc.id)) {
      open = false;
      prev = &loc;
      continue;
    }
    const bool continues = open && prev && prev->article_id == loc.article_id &&
                           prev->position + 1 == loc.position;
    if (!continues) {
      runs.emplace_back();
      run_articles.push_back(loc.article_id);
    }
    runs.back().push_back(loc.id);
    open = true;
    prev = &loc;
    ++kept;
  }
  if (kept == 0) throw EmptyCorpusError("no sentence instantiates a construction in band " +
                                        band.label());

  CorpusBuild build;
  const std::uint64_t copies = target_total / kept;
  std::uint64_t remainder = target_total % kept;
  auto emit = [&](std::size_t run, std::uint32_t copy, std::size_t length) {
    CorpusDocument doc;
    doc.doc_id = static_cast<std::uint32_t>(build.documents.size());
    doc.provenance = Provenance::Article;
    doc.source = run_articles[run];
    doc.copy_index = copy;
    doc.sentences.assign(runs[run].begin(), runs[run].begin() + std::ptrdiff_t(length));
    build.documents.push_back(std::move(doc));
  };
  for (std::uint64_t copy = 0; copy < copies; ++copy) {
    for (std::size_t r = 0; r < runs.size(); ++r) emit(r, std::uint32_t(copy), runs[r].size());
  }
  const std::uint64_t prefix = remainder;
  for (std::size_t r = 0; r < runs.size() && remainder > 0; ++r) {
    const std::size_t take = std::size_t(std::min<std::uint64_t>(remainder, runs[r].size()));
    emit(r, std::uint32_t(copies), take);
    remainder -= take;
  }

  build.manifest.variant = "base";
  build.manifest.band = band;
  build.manifest.total_occurrences = build.occurrences();
  build.manifest.kept_sentences = kept;
  build.manifest.copies = copies;
  build.manifest.prefix_length = prefix;
  build.manifest.documents = build.documents.size();
  return build;
}

CorpusBuild build_random(const CorpusBuild& base, std::uint64_t seed) {
  std::vector<SentenceId> occurrences;
  for (const auto& d : base.documents) {
    occurrences.insert(occurrences.end(), d.sentences.begin(), d.sentences.end());
  }
  Rng rng(seed, /*stream=*/0x72616e646f6dULL);
  rng.shuffle(std::span<SentenceId>(occurrences));

  // A uniform composition of T into k non-empty parts is a uniform choice of
  // k-1 distinct cut points in 1..T-1 (Floyd's sampling).
  const std::uint64_t total = occurrences.size();
  const std::uint64_t parts = std::min<std::uint64_t>(base.documents.size(), total);
  std::vector<std::uint64_t> cuts;
  if (parts > 1) {
    const std::uint64_t universe = total - 1;
    const std::uint64_t want = parts - 1;
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(want * 2);
    for (std::uint64_t j = universe - want + 1; j <= universe; ++j) {
      const std::uint64_t t = 1 + rng.below(j);
      chosen.insert(chosen.contains(t) ? j : t);
    }
    cuts.assign(chosen.begin(), chosen.end());
    std::sort(cuts.begin(), cuts.end());
  }
  cuts.push_back(total);

  CorpusBuild build;
  std::uint64_t begin = 0;
  for (std::uint64_t cut : cuts) {
    if (cut == 0) continue;
    CorpusDocument doc;
    doc.doc_id = static_cast<std::uint32_t>(build.documents.size());
    doc.provenance = Provenance::Random;
    doc.source = doc.doc_id;
    doc.sentences.assign(occurrences.begin() + std::ptrdiff_t(begin),
                         occurrences.begin() + std::ptrdiff_t(cut));
    build.documents.push_back(std::move(doc));
    begin = cut;
  }
  build.manifest = base.manifest;
  build.manifest.extra.clear();
  build.manifest.variant = "random";
  build.manifest.seed = seed;
  build.manifest.total_occurrences = build.occurrences();
  build.manifest.documents = build.documents.size();
  return build;
}

void write_pretraining_file(std::ostream& out, std::span<const CorpusDocument> documents,
                            std::span<const AnnotatedSentence> corpus) {
  auto text_of = [&](SentenceId id) -> std::string {
    auto it = std::lower_bound(corpus.begin(), corpus.end(), id,
                               [](const AnnotatedSentence& s, SentenceId v) { return s.id < v; });
    if (it == corpus.end() || it->id != id) {
      throw Error("document references unknown sentence " + std::to_string(id));
    }
    return it->text();
  };
  bool first = true;
  for (const auto& doc : documents) {
    if (doc.sentences.empty()) continue;
    if (!first) out << '\n';
    first = false;
    for (SentenceId id : doc.sentences) out << text_of(id) << '\n';
  }
}

void write_pretraining_file(const std::filesystem::path& path,
                            std::span<const CorpusDocument> documents,
                            std::span<const AnnotatedSentence> corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  write_pretraining_file(out, documents, corpus);
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

std::vector<std::vector<std::string>> read_pretraining_file(std::istream& in) {
  std::vector<std::vector<std::string>> docs;
  std::string line;
  bool open = false;
  while (read_line(in, line)) {
    if (line.empty()) {
      open = false;
      continue;
    }
    if (!open) docs.emplace_back();
    docs.back().push_back(line);
    open = true;
  }
  return docs;
}

std::vector<SentenceId> sorted_occurrences(std::span<const CorpusDocument> documents) {
  std::vector<SentenceId> out;
  for (const auto& d : documents) out.insert(out.end(), d.sentences.begin(), d.sentences.end());
  std::sort(out.begin(), out.end());
  return out;
}

MultisetReport verify_multiset(std::span<const CorpusDocument> a,
                               std::span<const CorpusDocument> b) {
  const auto sa = sorted_occurrences(a);
  const auto sb = sorted_occurrences(b);
  MultisetReport report;
  report.total_a = sa.size();
  report.total_b = sb.size();
  std::size_t i = 0, j = 0;
  while (i < sa.size() || j < sb.size()) {
    SentenceId id;
    if (j == sb.size() || (i < sa.size() && sa[i] < sb[j])) {
      id = sa[i];
    } else {
      id = sb[j];
    }
    std::uint64_t ca = 0, cb = 0;
    while (i < sa.size() && sa[i] == id) ++ca, ++i;
    while (j < sb.size() && sb[j] == id) ++cb, ++j;
    if (ca != cb) report.differences.push_back({id, ca, cb});
  }
  return report;
}

void MultisetReport::write(std::ostream& out, std::size_t max_listed) const {
  out << "total_a = " << total_a << '\n'
      << "total_b = " << total_b << '\n'
      << "differing_ids = " << differences.size() << '\n';
  for (std::size_t i = 0; i < differences.size() && i < max_listed; ++i) {
    const auto& d = differences[i];
    out << "sentence " << d.id << ": " << d.count_a << " vs " << d.count_b << '\n';
  }
}

}  // namespace cxg
