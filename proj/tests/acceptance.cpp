// One PASS/FAIL line per acceptance criterion. Tolerances are fixed below.
// An optional argument restricts the run to criteria whose name contains it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cxg/baseline.hpp"
#include "cxg/corpus_builder.hpp"
#include "cxg/ingest.hpp"
#include "cxg/inventory.hpp"
#include "cxg/matcher.hpp"
#include "cxg/pair_sampler.hpp"
#include "pipeline.hpp"
#include "synthetic.hpp"

using namespace cxg;
using namespace cxg::testing;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kOracleCases = 1000;
constexpr double kOracleSeconds = 60.0;
constexpr std::size_t kDeskSentences = 10000;
constexpr double kDeskBuildSeconds = 120.0;
constexpr std::uint64_t kLowerCount = 21216;
constexpr std::uint64_t kUpperCount = 465;
constexpr std::uint64_t kAllCount = 21681;
constexpr double kLearnableAccuracy = 0.90;
constexpr double kControlCenter = 0.50;
constexpr double kControlTolerance = 0.05;
constexpr int kControlSeeds = 5;
constexpr std::size_t kControlSentences = 20000;
constexpr std::size_t kControlTopFrequency = 3000;
constexpr std::size_t kBandCorpusSentences = 30000;
constexpr std::size_t kDeterminismSentences = 5000;
constexpr std::size_t kThroughputInventory = 20000;
constexpr double kSentencesPerSecond = 5000.0;
constexpr std::size_t kPipelineSentences = 100000;
constexpr double kPipelineSeconds = 300.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const Vocabulary& vocab() {
  static const Vocabulary v = Vocabulary::from_resources();
  return v;
}

const AnnotationResources& english() {
  static const AnnotationResources r = AnnotationResources::load_directory(resource_dir());
  return r;
}

DeskCorpus desk(std::size_t sentences, std::uint64_t seed = 1) {
  DeskOptions opt;
  opt.sentences = sentences;
  opt.seed = seed;
  return make_desk_corpus(vocab(), opt);
}

// Pairs as read back from disk: texts rather than ids.
std::vector<PairRecord> records(std::span<const PairExample> pairs,
                                std::span<const AnnotatedSentence> corpus) {
  std::ostringstream out;
  write_pairs(out, pairs, corpus);
  std::istringstream in(out.str());
  return read_pairs(in);
}

Outcome matcher_oracle() {
  Rng rng(20240601);
  const auto t0 = Clock::now();
  std::size_t agree = 0;
  std::size_t by_gap[3] = {0, 0, 0};
  for (std::size_t i = 0; i < kOracleCases; ++i) {
    const auto oc = random_oracle_case(rng);
    ++by_gap[oc.max_gap];
    const MatchIndex index(oc.inventory);
    agree += match_sentence(index, oc.sentence, oc.max_gap) ==
             brute_force_match(oc.inventory, oc.sentence, oc.max_gap);
  }
  const double secs = seconds_since(t0);
  return {agree == kOracleCases && secs < kOracleSeconds,
          std::to_string(agree) + "/" + std::to_string(kOracleCases) + " agree (gap 0/1/2: " +
              std::to_string(by_gap[0]) + "/" + std::to_string(by_gap[1]) + "/" +
              std::to_string(by_gap[2]) + ") in " + fmt(secs, 2) + " s"};
}

Outcome didnt_how_replay() {
  std::ifstream in(data_dir() / "didnt_how.txt");
  const auto corpus = annotate_corpus(in, english(), IngestMode::PreSplit);
  std::istringstream spec("0\tpos:PRON lex:didn't pos:VERB lex:how\n");
  const MatchIndex index(load_inventory(spec));
  // Sentences 2 and 6 have one token between the pronoun and didn't.
  const std::vector<bool> contiguous{true, false, true, true, true, false};
  bool ok = corpus.size() == contiguous.size();
  std::size_t gap1 = 0, gap0_right = 0;
  for (std::size_t i = 0; ok && i < corpus.size(); ++i) {
    gap1 += match_sentence(index, corpus[i], 1).size() == 1;
    gap0_right += (match_sentence(index, corpus[i], 0).size() == 1) == contiguous[i];
  }
  ok = ok && gap1 == 6 && gap0_right == 6;
  return {ok, std::to_string(corpus.size()) + " sentences, " + std::to_string(gap1) +
                  "/6 match at gap 1, " + std::to_string(gap0_right) +
                  "/6 as expected at gap 0 (4 contiguous)"};
}

Outcome desk_builds() {
  const auto t0 = Clock::now();
  const auto d = desk(kDeskSentences);
  const MatchIndex index(d.inventory);
  const auto match = match_corpus(index, d.corpus, 1);
  const Band band = Band::lower();
  const auto cxg = build_cxg_corpus(match.table, band);
  std::uint64_t freq_sum = 0;
  for (CxgId id : match.table.constructions()) {
    if (band.selects(match.table.frequency(id))) freq_sum += match.table.frequency(id);
  }
  const auto locations = locations_of(d.corpus);
  const auto base = build_base_clone(locations, match.table, band, cxg.occurrences());
  const auto random = build_random(base, 7);

  std::map<SentenceId, std::pair<ArticleId, std::uint32_t>> where;
  for (const auto& l : locations) where[l.id] = {l.article_id, l.position};
  std::size_t pairs = 0, adjacent = 0;
  for (const auto& doc : base.documents) {
    for (std::size_t i = 1; i < doc.sentences.size(); ++i) {
      const auto& p = where[doc.sentences[i - 1]];
      const auto& q = where[doc.sentences[i]];
      ++pairs;
      adjacent += p.first == q.first && p.second + 1 == q.second;
    }
  }
  const bool same_lists = sorted_occurrences(base.documents) == sorted_occurrences(random.documents);
  const double secs = seconds_since(t0);
  const bool ok = cxg.occurrences() == freq_sum && base.occurrences() == cxg.occurrences() &&
                  same_lists && pairs > 0 && adjacent == pairs && secs < kDeskBuildSeconds;
  return {ok, "cxg " + std::to_string(cxg.occurrences()) + " = sum freq " +
                  std::to_string(freq_sum) + ", base " + std::to_string(base.occurrences()) +
                  ", random/base lists " + (same_lists ? "identical" : "differ") +
                  ", adjacency " + std::to_string(adjacent) + "/" + std::to_string(pairs) +
                  ", " + fmt(secs, 1) + " s"};
}

Outcome band_arithmetic() {
  // Synthetic table: kLowerCount constructions in [2, 10000] and kUpperCount
  // above it, all drawing on one shared pool of sentence ids.
  std::vector<std::pair<CxgId, std::vector<SentenceId>>> forward;
  CxgId id = 0;
  for (std::uint64_t i = 0; i < kLowerCount; ++i, ++id) {
    const std::uint32_t f = i % 500 == 0 ? 10000 : 2 + std::uint32_t(i % 97);
    std::vector<SentenceId> inst(f);
    for (std::uint32_t k = 0; k < f; ++k) inst[k] = SentenceId((i * 7 + k) % 30000);
    forward.emplace_back(id, std::move(inst));
  }
  for (std::uint64_t i = 0; i < kUpperCount; ++i, ++id) {
    const std::uint32_t f = 10001 + std::uint32_t(i % 13);
    std::vector<SentenceId> inst(f);
    for (std::uint32_t k = 0; k < f; ++k) inst[k] = SentenceId((i * 11 + k) % 30000);
    forward.emplace_back(id, std::move(inst));
  }
  const OccurrenceTable table(std::move(forward));
  auto count = [&](const Band& b) {
    std::uint64_t n = 0;
    for (CxgId c : table.constructions()) n += b.selects(table.frequency(c));
    return n;
  };
  const auto lower = count(Band::lower());
  const auto upper = count(Band::upper());
  const auto all = count(Band{2, std::nullopt});

  // The same identity on a matched desk corpus.
  const auto d = desk(kDeskSentences);
  const auto match = match_corpus(MatchIndex(d.inventory), d.corpus, 1);
  auto count_desk = [&](const Band& b) {
    std::uint64_t n = 0;
    for (CxgId c : match.table.constructions()) n += b.selects(match.table.frequency(c));
    return n;
  };
  const auto dl = count_desk(Band::lower());
  const auto du = count_desk(Band::upper());
  const auto da = count_desk(Band{2, std::nullopt});

  const bool ok = lower == kLowerCount && upper == kUpperCount && all == kAllCount &&
                  lower + upper == all && dl + du == da;
  return {ok, "synthetic " + std::to_string(lower) + " + " + std::to_string(upper) + " = " +
                  std::to_string(all) + ", desk " + std::to_string(dl) + " + " +
                  std::to_string(du) + " = " + std::to_string(da)};
}

Outcome pair_audit() {
  const auto d = desk(kDeskSentences);
  const auto match = match_corpus(MatchIndex(d.inventory), d.corpus, 1);
  SamplerConfig config;
  config.seed = 5;
  const Band band = Band::lower();
  const auto sample = sample_pairs(match.table, band, config);
  const auto all = sample.all();
  const auto audit = audit_pairs(all, match.table, config.strictness);

  std::map<std::pair<CxgId, Split>, std::pair<std::uint32_t, std::uint32_t>> got;
  for (const auto& p : all) {
    auto& c = got[{p.anchor, p.split}];
    (p.label == PairLabel::Same ? c.first : c.second)++;
  }
  std::size_t eligible = 0, exact = 0;
  for (CxgId id : match.table.constructions()) {
    const auto f = match.table.frequency(id);
    if (f < 5 || !band.selects(f)) continue;
    ++eligible;
    bool all_exact = true;
    for (Split s : {Split::Train, Split::Dev, Split::Test}) {
      const auto& q = config.quota(s);
      const auto it = got.find({id, s});
      all_exact = all_exact && it != got.end() && it->second.first == q.positive &&
                  it->second.second == q.negative;
    }
    exact += all_exact;
  }

  std::size_t pos = 0;
  for (const auto& p : sample.train) pos += p.label == PairLabel::Same;
  const std::size_t neg = sample.train.size() - pos;
  const std::size_t balanced = 2 * std::min(pos, neg) + (pos != neg ? 1 : 0);
  std::vector<std::size_t> sizes;
  for (auto s : config.inoculation_sizes) {
    if (s <= balanced) sizes.push_back(s);
  }
  const auto subsets = make_inoculation_subsets(sample.train, sizes, config.seed);
  bool nested = true, balanced_ok = true;
  for (std::size_t k = 0; k < subsets.size(); ++k) {
    long b = 0;
    for (const auto& p : subsets[k]) b += p.label == PairLabel::Same ? 1 : -1;
    balanced_ok = balanced_ok && std::labs(b) <= 1 && subsets[k].size() == sizes[k];
    if (k > 0) {
      nested = nested && std::equal(subsets[k - 1].begin(), subsets[k - 1].end(),
                                    subsets[k].begin());
    }
  }
  const bool ok = audit.clean() && eligible > 0 && exact == eligible && nested && balanced_ok &&
                  !sizes.empty();
  return {ok, std::to_string(audit.pairs) + " pairs, " +
                  std::to_string(audit.label_violations) + " violations, " +
                  std::to_string(audit.duplicates) + " duplicates, " +
                  std::to_string(audit.leakage) + " leaked; exact quotas " +
                  std::to_string(exact) + "/" + std::to_string(eligible) + "; " +
                  std::to_string(subsets.size()) + " inoculation subsets (" +
                  std::to_string(config.inoculation_sizes.size() - sizes.size()) +
                  " sizes above the " + std::to_string(balanced) + " balanced pairs skipped) " +
                  (nested ? "nested" : "not nested") + ", " +
                  (balanced_ok ? "balanced" : "unbalanced")};
}

struct PairSets {
  std::vector<PairRecord> train, test;
};

// The largest label-balanced prefix of a seeded alternating order.
std::vector<PairExample> balanced(std::span<const PairExample> pairs, std::uint64_t seed) {
  std::size_t pos = 0;
  for (const auto& p : pairs) pos += p.label == PairLabel::Same;
  const std::vector<std::size_t> size{2 * std::min(pos, pairs.size() - pos)};
  return make_inoculation_subsets(pairs, size, seed).front();
}

PairSets anchored_pairs(bool balance, const DeskOptions& options) {
  auto d = make_desk_corpus(vocab(), options);
  d.inventory.constructions.resize(d.anchored_count);
  const auto match = match_corpus(MatchIndex(d.inventory), d.corpus, 1);
  SamplerConfig config;
  config.seed = 9;
  const auto sample = sample_pairs(match.table, Band::lower(), config);
  if (!balance) return {records(sample.train, d.corpus), records(sample.test, d.corpus)};
  return {records(balanced(sample.train, 1), d.corpus),
          records(balanced(sample.test, 2), d.corpus)};
}

Outcome baseline_learnable() {
  DeskOptions opt;
  opt.sentences = kDeskSentences;
  const auto sets = anchored_pairs(false, opt);
  Hyperparams hp;
  const auto model = train(sets.train, hp);
  const auto eval = evaluate(model, sets.test);
  return {eval.accuracy >= kLearnableAccuracy,
          "held-out accuracy " + fmt(eval.accuracy) + " on " + std::to_string(eval.pairs) +
              " pairs (train " + std::to_string(sets.train.size()) + ")"};
}

Outcome baseline_control() {
  // shuffle_control expects a balanced set, and chance is 0.5 only on a
  // balanced test set. A steeper frequency profile gives enough constructions
  // with test positives to hold sampling noise well inside the tolerance.
  DeskOptions opt;
  opt.sentences = kControlSentences;
  opt.top_frequency = kControlTopFrequency;
  const auto sets = anchored_pairs(true, opt);
  bool ok = true;
  std::string accs;
  double sum = 0.0;
  for (int seed = 1; seed <= kControlSeeds; ++seed) {
    Hyperparams hp;
    hp.seed = std::uint64_t(seed);
    const auto model = train(shuffle_control(sets.train, hp.seed), hp);
    const double acc = evaluate(model, sets.test).accuracy;
    ok = ok && std::abs(acc - kControlCenter) <= kControlTolerance;
    sum += acc;
    accs += (accs.empty() ? "" : " ") + fmt(acc);
  }
  return {ok, "shuffled-label accuracy per seed " + accs + ", mean " +
                  fmt(sum / kControlSeeds) + " (" + std::to_string(sets.train.size()) +
                  " balanced train, " + std::to_string(sets.test.size()) + " balanced test)"};
}

Outcome baseline_bands() {
  const auto d = desk(kBandCorpusSentences, 2);
  const auto match = match_corpus(MatchIndex(d.inventory), d.corpus, 1);
  const Band low{2, 50};
  const Band high = Band::upper();
  SamplerConfig config;
  config.seed = 13;
  const auto lo = sample_pairs(match.table, low, config);
  const auto hi = sample_pairs(match.table, high, config);
  auto train_set = records(lo.train, d.corpus);
  auto test_set = records(lo.test, d.corpus);
  const auto hi_train = records(hi.train, d.corpus);
  const auto hi_test = records(hi.test, d.corpus);
  train_set.insert(train_set.end(), hi_train.begin(), hi_train.end());
  test_set.insert(test_set.end(), hi_test.begin(), hi_test.end());
  const auto model = train(train_set, Hyperparams{});
  const auto eval = evaluate(model, test_set);
  const auto* a = eval.find(low);
  const auto* b = eval.find(high);
  if (!a || !b) return {false, "a band has no test pairs"};
  return {a->accuracy > b->accuracy,
          "acc(2-50) " + fmt(a->accuracy) + " on " + std::to_string(a->pairs) +
              " pairs vs acc(>10000) " + fmt(b->accuracy) + " on " + std::to_string(b->pairs) +
              " pairs"};
}

struct DeskFiles {
  fs::path dir, wikitext, inventory;
};

DeskFiles write_desk(const std::string& name, std::size_t sentences) {
  DeskFiles f;
  f.dir = scratch_dir(name);
  const auto d = desk(sentences, 3);
  f.wikitext = f.dir / "corpus.txt";
  f.inventory = f.dir / "inventory.tsv";
  std::ofstream(f.wikitext) << to_wikitext(d.corpus);
  std::ofstream inv(f.inventory);
  write_inventory(inv, d.inventory);
  return f;
}

Outcome determinism() {
  const auto f = write_desk("acceptance_determinism", kDeterminismSentences);
  PipelineOptions opt{f.wikitext, f.inventory, f.dir / "run1"};
  opt.epochs = "8";
  opt.dim = std::to_string(kDefaultFeatureDim);
  int codes = run_pipeline(opt);
  auto second = opt;
  second.work = f.dir / "run2";
  codes |= run_pipeline(second);
  auto parallel = opt;
  parallel.work = f.dir / "run8";
  parallel.jobs = 8;
  codes |= run_pipeline(parallel);
  if (codes != 0) return {false, "pipeline exited nonzero"};
  const auto a = snapshot(opt.work);
  const bool repeat = a == snapshot(second.work);
  const bool jobs = a == snapshot(parallel.work);
  std::uint64_t bytes = 0;
  for (const auto& [path, content] : a) bytes += content.size();
  fs::remove_all(f.dir);
  return {repeat && jobs, std::to_string(a.size()) + " files, " + std::to_string(bytes) +
                              " bytes; rerun " + (repeat ? "identical" : "differs") +
                              ", --jobs 1 vs 8 " + (jobs ? "identical" : "differs")};
}

Outcome throughput() {
  const auto d = desk(kDeskSentences);
  const auto inventory = random_inventory(vocab(), kThroughputInventory, 17);
  auto t0 = Clock::now();
  const MatchIndex index(inventory);
  const double index_secs = seconds_since(t0);
  t0 = Clock::now();
  const auto match = match_corpus(index, d.corpus, 1, 1);
  const double match_secs = seconds_since(t0);
  const double rate = double(d.corpus.size()) / match_secs;

  const auto f = write_desk("acceptance_pipeline", kPipelineSentences);
  PipelineOptions opt{f.wikitext, f.inventory, f.dir / "run"};
  opt.epochs = "8";
  opt.dim = std::to_string(kDefaultFeatureDim);
  t0 = Clock::now();
  const int code = run_pipeline(opt);
  const double pipeline_secs = seconds_since(t0);
  fs::remove_all(f.dir);
  const bool ok = rate >= kSentencesPerSecond && code == 0 && pipeline_secs < kPipelineSeconds;
  return {ok, fmt(rate, 0) + " sentences/s on one thread against " +
                  std::to_string(inventory.size()) + " constructions (index " +
                  fmt(index_secs, 2) + " s, " + std::to_string(match.table.sentences().size()) +
                  " sentences matched); " + std::to_string(kPipelineSentences) +
                  "-sentence pipeline " + fmt(pipeline_secs, 1) + " s, exit " +
                  std::to_string(code)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"matcher-oracle", matcher_oracle},
      {"didnt-how-replay", didnt_how_replay},
      {"desk-builds", desk_builds},
      {"band-arithmetic", band_arithmetic},
      {"pair-audit", pair_audit},
      {"baseline-learnable", baseline_learnable},
      {"baseline-control", baseline_control},
      {"baseline-bands", baseline_bands},
      {"determinism", determinism},
      {"throughput", throughput},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    if (!filter.empty() && name.find(filter) == std::string::npos) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
