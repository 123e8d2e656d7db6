#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cxg/band.hpp"
#include "cxg/baseline.hpp"
#include "cxg/corpus_builder.hpp"
#include "cxg/error.hpp"
#include "cxg/induction.hpp"
#include "cxg/ingest.hpp"
#include "cxg/inventory.hpp"
#include "cxg/matcher.hpp"
#include "cxg/pair_sampler.hpp"
#include "cxg/text.hpp"
#include "cxg/workspace.hpp"

namespace cxg {
namespace {

namespace fs = std::filesystem;

class InputError : public Error {
 public:
  using Error::Error;
};

struct ExitWith {
  int code;
  std::string message;
};

const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> d = {
      {"mode", "raw"},
      {"max_gap", "1"},
      {"band", "2:10000"},
      {"seed", "0"},
      {"strictness", "anchor"},
      {"edges", "2,50,100,1000,10000"},
      {"inoculation", "100,500,1000,5000"},
      {"dim", std::to_string(kDefaultFeatureDim)},
      {"learning_rate", "0.2"},
      {"epochs", "8"},
      {"l2", "0.00001"},
      {"max_len", "4"},
      {"min_support", "5"},
      {"min_assoc", "0.05"},
      {"max_inventory", "25000"},
  };
  return d;
}

// Keys each stage's outputs depend on, including everything upstream.
const std::vector<std::string_view>& stage_keys(std::string_view stage) {
  static const std::vector<std::string_view> annotate = {"mode"};
  static const std::vector<std::string_view> induce = {"mode", "max_len", "min_support",
                                                       "min_assoc", "max_inventory"};
  static const std::vector<std::string_view> match = {"mode", "max_gap"};
  static const std::vector<std::string_view> stats = {"mode", "max_gap", "edges"};
  static const std::vector<std::string_view> build = {"mode", "max_gap", "band", "seed"};
  static const std::vector<std::string_view> pairs = {"mode", "max_gap", "band", "seed",
                                                      "strictness", "inoculation"};
  static const std::vector<std::string_view> baseline = {
      "mode",        "max_gap", "band",          "seed",   "strictness", "inoculation",
      "dim",         "learning_rate", "epochs", "l2"};
  if (stage == "annotate") return annotate;
  if (stage == "induce") return induce;
  if (stage == "match") return match;
  if (stage == "stats") return stats;
  if (stage == "build") return build;
  if (stage == "pairs") return pairs;
  return baseline;
}

struct Options {
  std::string config_path;
  unsigned jobs = 1;
  // Flag overrides, applied over the config file.
  std::vector<std::pair<std::string, std::string>> overrides;

  std::string input, resources, out, annotated, inventory, table, variant = "all";
  std::string train, dev, test, tagset;
  bool control = false;
};

struct Context {
  Config config;
  bool check_inputs = false;
  unsigned jobs = 1;

  std::string hash(std::string_view stage) const { return config.hash(stage_keys(stage)); }

  void require_fresh(const fs::path& input, std::string_view stage) const {
    if (check_inputs) check_fresh(input, hash(stage));
  }

  std::string value(std::string_view key) const { return *config.get(key); }

  std::uint64_t uint_value(std::string_view key) const {
    auto v = parse_uint(value(key));
    if (!v) throw InputError("config key " + std::string(key) + " is not an unsigned integer: " +
                             value(key));
    return *v;
  }

  double double_value(std::string_view key) const {
    auto v = parse_double(value(key));
    if (!v) throw InputError("config key " + std::string(key) + " is not a number: " + value(key));
    return *v;
  }

  std::vector<std::uint64_t> list_value(std::string_view key) const {
    std::vector<std::uint64_t> out;
    const std::string text = value(key);
    for (auto part : split(text, ',')) {
      auto t = trim(part);
      if (t.empty()) continue;
      auto v = parse_uint(t);
      if (!v) throw InputError("config key " + std::string(key) + " has a bad entry: " +
                               std::string(t));
      out.push_back(*v);
    }
    return out;
  }

  Band band() const {
    auto b = Band::parse(value("band"));
    if (!b) throw InputError("bad band: " + value("band"));
    return *b;
  }
};

Context make_context(const Options& opt) {
  Context ctx;
  for (const auto& [k, v] : defaults()) ctx.config.set(k, v);
  if (!opt.config_path.empty()) {
    const auto file = Config::load(opt.config_path);
    for (const auto& [k, v] : file.values()) ctx.config.set(k, v);
    ctx.check_inputs = true;
  }
  for (const auto& [k, v] : opt.overrides) ctx.config.set(k, v);
  ctx.jobs = std::max(1u, opt.jobs);
  return ctx;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return in;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  body(out);
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

void write_derived(const Context& ctx, std::string_view stage, const fs::path& path,
                   const std::function<void(std::ostream&)>& body) {
  write_file(path, body);
  write_meta(path, stage, ctx.hash(stage));
}

Tagset load_tagset(const std::string& path) {
  if (path.empty()) return {};
  AnnotationResources::Paths paths;
  paths.tagset = path;
  return AnnotationResources::load(paths).tagset;
}

std::vector<AnnotatedSentence> load_annotated(const Context& ctx, const std::string& path,
                                              const Tagset& tagset) {
  ctx.require_fresh(path, "annotate");
  auto in = open_in(path);
  return read_annotated_tsv(in, tagset);
}

OccurrenceTable load_table(const Context& ctx, const std::string& path) {
  ctx.require_fresh(path, "match");
  auto in = open_in(path);
  return read_occurrence_table(in);
}

int cmd_annotate(const Context& ctx, const Options& opt) {
  auto mode = parse_ingest_mode(ctx.value("mode"));
  if (!mode) throw InputError("unknown mode: " + ctx.value("mode"));
  AnnotationResources resources;
  if (!opt.resources.empty()) {
    resources = AnnotationResources::load_directory(opt.resources);
  } else {
    resources.finalize();
  }
  auto in = open_in(opt.input);
  CorpusReader reader(in, resources, *mode, ctx.jobs);
  std::size_t sentences = 0;
  write_derived(ctx, "annotate", opt.out, [&](std::ostream& out) {
    while (auto s = reader.next()) {
      write_annotated_sentence(out, *s);
      ++sentences;
    }
  });
  std::cout << "annotated " << sentences << " sentences\n";
  return kExitOk;
}

int cmd_induce(const Context& ctx, const Options& opt) {
  const auto corpus = load_annotated(ctx, opt.annotated, load_tagset(opt.tagset));
  InductionParams params;
  params.max_len = ctx.uint_value("max_len");
  params.min_support = ctx.uint_value("min_support");
  params.min_assoc = ctx.double_value("min_assoc");
  params.max_inventory = ctx.uint_value("max_inventory");
  params.validate();
  const auto inventory = induce_inventory(corpus, params);
  write_derived(ctx, "induce", opt.out,
                [&](std::ostream& out) { write_inventory(out, inventory); });
  std::cout << "induced " << inventory.size() << " constructions\n";
  return kExitOk;
}

void write_stats(const Context& ctx, std::string_view stage, const fs::path& dir,
                 const OccurrenceTable& table) {
  const auto edges = ctx.list_value("edges");
  if (edges.empty()) throw InputError("edges must list at least one frequency");
  const auto stats = occurrence_stats(table, edges);
  write_derived(ctx, stage, dir / "stats.tsv",
                [&](std::ostream& out) { write_band_stats(out, stats, edges); });
  write_derived(ctx, stage, dir / "histogram.tsv",
                [&](std::ostream& out) { write_histogram(out, stats); });
}

int cmd_match(const Context& ctx, const Options& opt) {
  const Tagset tagset = load_tagset(opt.tagset);
  const auto corpus = load_annotated(ctx, opt.annotated, tagset);
  ctx.require_fresh(opt.inventory, "induce");
  const auto inventory = load_inventory(fs::path(opt.inventory), tagset);
  const MatchIndex index(inventory);
  const auto max_gap = unsigned(ctx.uint_value("max_gap"));
  const auto result = match_corpus(index, corpus, max_gap, ctx.jobs);
  const fs::path dir = opt.out;
  write_derived(ctx, "match", dir / "occurrences.tsv",
                [&](std::ostream& out) { write_occurrence_table(out, result.table); });
  write_derived(ctx, "match", dir / "discarded.txt",
                [&](std::ostream& out) { write_id_list(out, result.discarded); });
  write_stats(ctx, "stats", dir, result.table);
  std::cout << "matched " << result.sentence_count << " sentences, "
            << result.discarded.size() << " discarded\n";
  return kExitOk;
}

int cmd_stats(const Context& ctx, const Options& opt) {
  write_stats(ctx, "stats", opt.out, load_table(ctx, opt.table));
  return kExitOk;
}

int cmd_build(const Context& ctx, const Options& opt) {
  const auto& v = opt.variant;
  if (v != "cxg" && v != "base" && v != "random" && v != "all") {
    throw InputError("unknown variant: " + v);
  }
  const auto corpus = load_annotated(ctx, opt.annotated, load_tagset(opt.tagset));
  const auto table = load_table(ctx, opt.table);
  const Band band = ctx.band();
  const std::uint64_t seed = ctx.uint_value("seed");
  const fs::path dir = opt.out;
  const std::string hash = ctx.hash("build");

  auto emit = [&](CorpusBuild& build) {
    build.manifest.extra["config_hash"] = hash;
    const auto name = build.manifest.variant;
    write_derived(ctx, "build", dir / (name + ".txt"), [&](std::ostream& out) {
      write_pretraining_file(out, build.documents, corpus);
    });
    write_derived(ctx, "build", dir / (name + ".manifest"),
                  [&](std::ostream& out) { build.manifest.write(out); });
    std::cout << name << ": " << build.occurrences() << " occurrences in "
              << build.documents.size() << " documents\n";
  };

  auto cxg = build_cxg_corpus(table, band);
  if (v == "cxg" || v == "all") emit(cxg);
  if (v == "cxg") return kExitOk;

  auto base = build_base_clone(locations_of(corpus), table, band, cxg.occurrences());
  std::optional<CorpusBuild> random;
  if (v == "random" || v == "all") random = build_random(base, seed);
  if (v == "base" || v == "all") emit(base);
  if (random) emit(*random);
  if (v != "all") return kExitOk;

  const auto base_vs_random = verify_multiset(base.documents, random->documents);
  const bool ok = cxg.occurrences() == base.occurrences() && base_vs_random.equal();
  write_derived(ctx, "build", dir / "verify.txt", [&](std::ostream& out) {
    out << "cxg_total = " << cxg.occurrences() << '\n'
        << "base_total = " << base.occurrences() << '\n'
        << "random_total = " << random->occurrences() << '\n'
        << "status = " << (ok ? "ok" : "mismatch") << '\n';
    base_vs_random.write(out);
  });
  if (!ok) {
    throw ExitWith{kExitMultiset, "multiset verification failed; see " +
                                      (dir / "verify.txt").string()};
  }
  return kExitOk;
}

int cmd_pairs(const Context& ctx, const Options& opt) {
  const auto corpus = load_annotated(ctx, opt.annotated, load_tagset(opt.tagset));
  const auto table = load_table(ctx, opt.table);
  const Band band = ctx.band();
  SamplerConfig config;
  config.seed = ctx.uint_value("seed");
  auto strictness = parse_strictness(ctx.value("strictness"));
  if (!strictness) throw InputError("unknown strictness: " + ctx.value("strictness"));
  config.strictness = *strictness;
  config.inoculation_sizes.clear();
  for (auto s : ctx.list_value("inoculation")) config.inoculation_sizes.push_back(s);
  config.validate();

  const auto sample = sample_pairs(table, band, config);
  const fs::path dir = opt.out;
  for (Split s : {Split::Train, Split::Dev, Split::Test}) {
    write_derived(ctx, "pairs", dir / (std::string(split_name(s)) + ".tsv"),
                  [&](std::ostream& out) { write_pairs(out, sample.of(s), corpus); });
  }

  std::size_t pos = 0;
  for (const auto& p : sample.train) pos += p.label == PairLabel::Same;
  const std::size_t neg = sample.train.size() - pos;
  const std::size_t balanced = 2 * std::min(pos, neg) + (pos != neg ? 1 : 0);
  std::vector<std::size_t> sizes;
  for (auto s : config.inoculation_sizes) {
    if (s <= balanced) {
      sizes.push_back(s);
    } else {
      std::cerr << "warning: skipping inoculation size " << s << "; only " << balanced
                << " balanced training pairs\n";
    }
  }
  const auto subsets = make_inoculation_subsets(sample.train, sizes, config.seed);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    write_derived(ctx, "pairs", dir / ("inoculation_" + std::to_string(sizes[i]) + ".tsv"),
                  [&](std::ostream& out) { write_pairs(out, subsets[i], corpus); });
  }
  write_derived(ctx, "pairs", dir / "shortfall.tsv",
                [&](std::ostream& out) { write_shortfalls(out, sample.shortfalls); });

  const auto all = sample.all();
  const auto audit = audit_pairs(all, table, config.strictness);
  write_derived(ctx, "pairs", dir / "audit.txt", [&](std::ostream& out) { audit.write(out); });
  std::cout << "pairs: " << sample.train.size() << " train, " << sample.dev.size() << " dev, "
            << sample.test.size() << " test, " << sample.shortfalls.size() << " shortfalls\n";
  if (!audit.clean()) {
    throw ExitWith{kExitAudit, "pair audit failed; see " + (dir / "audit.txt").string()};
  }
  return kExitOk;
}

std::vector<PairRecord> load_pairs(const Context& ctx, const std::string& path) {
  ctx.require_fresh(path, "pairs");
  auto in = open_in(path);
  return read_pairs(in);
}

int cmd_baseline(const Context& ctx, const Options& opt) {
  Hyperparams hp;
  hp.dim = std::uint32_t(ctx.uint_value("dim"));
  hp.learning_rate = ctx.double_value("learning_rate");
  hp.epochs = std::uint32_t(ctx.uint_value("epochs"));
  hp.l2 = ctx.double_value("l2");
  hp.seed = ctx.uint_value("seed");
  if (hp.dim == 0) throw InputError("dim must be positive");

  auto train_pairs = load_pairs(ctx, opt.train);
  if (opt.control) train_pairs = shuffle_control(train_pairs, hp.seed);
  const auto test_pairs = load_pairs(ctx, opt.test);

  TrainingReport report;
  const auto model = train(train_pairs, hp, &report, ctx.jobs);
  const fs::path dir = opt.out;
  const auto test_eval = evaluate(model, test_pairs, ctx.jobs);
  write_derived(ctx, "baseline", dir / "metrics.tsv",
                [&](std::ostream& out) { write_metrics(out, test_eval); });
  if (!opt.dev.empty()) {
    const auto dev_eval = evaluate(model, load_pairs(ctx, opt.dev), ctx.jobs);
    write_derived(ctx, "baseline", dir / "dev_metrics.tsv",
                  [&](std::ostream& out) { write_metrics(out, dev_eval); });
  }
  model.save(dir / "model.bin");
  write_meta(dir / "model.bin", "baseline", ctx.hash("baseline"));
  write_derived(ctx, "baseline", dir / "training.txt", [&](std::ostream& out) {
    hp.write(out);
    out << "control = " << (opt.control ? "true" : "false") << '\n'
        << "train_pairs = " << train_pairs.size() << '\n';
    char buf[32];
    for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
      std::snprintf(buf, sizeof buf, "%.6f", report.epoch_loss[e]);
      out << "epoch_" << e + 1 << "_loss = " << buf << '\n';
    }
    std::snprintf(buf, sizeof buf, "%.6f", report.train_accuracy);
    out << "train_accuracy = " << buf << '\n';
  });
  std::cout << "test accuracy " << test_eval.accuracy << " over " << test_eval.pairs
            << " pairs\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Construction grammar corpus engine"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--config", opt.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--jobs", opt.jobs, "worker threads (does not affect outputs)");

  auto override_opt = [&](CLI::App* sub, const std::string& flag, const std::string& key,
                          const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&opt, key](const std::string& v) { opt.overrides.emplace_back(key, v); }, help);
  };

  auto* annotate = app.add_subcommand("annotate", "tokenize, tag and write annotated TSV");
  annotate->add_option("--input", opt.input, "raw WikiText, one-sentence-per-line or TSV")
      ->required();
  annotate->add_option("--resources", opt.resources, "annotation resource directory");
  override_opt(annotate, "--mode", "mode", "raw | pre-split | pre-annotated");
  annotate->add_option("--out", opt.out, "annotated TSV")->required();

  auto* induce = app.add_subcommand("induce", "induce a construction inventory");
  induce->add_option("--annotated", opt.annotated)->required();
  induce->add_option("--tagset", opt.tagset, "tag list, one per line");
  override_opt(induce, "--max-len", "max_len", "longest slot sequence");
  override_opt(induce, "--min-support", "min_support", "minimum supporting sentences");
  override_opt(induce, "--min-assoc", "min_assoc", "minimum mean delta-P");
  override_opt(induce, "--max-inventory", "max_inventory", "inventory size cap");
  induce->add_option("--out", opt.out, "inventory file")->required();

  auto* match = app.add_subcommand("match", "match an inventory against a corpus");
  match->add_option("--annotated", opt.annotated)->required();
  match->add_option("--inventory", opt.inventory)->required();
  match->add_option("--tagset", opt.tagset, "tag list, one per line");
  override_opt(match, "--max-gap", "max_gap", "tokens allowed between slots");
  override_opt(match, "--edges", "edges", "comma-separated band edges");
  match->add_option("--out", opt.out, "output directory")->required();

  auto* stats = app.add_subcommand("stats", "frequency histogram and band counts");
  stats->add_option("--table", opt.table)->required();
  override_opt(stats, "--edges", "edges", "comma-separated band edges");
  stats->add_option("--out", opt.out, "output directory")->required();

  auto* build = app.add_subcommand("build", "write pre-training corpora");
  build->add_option("--annotated", opt.annotated)->required();
  build->add_option("--table", opt.table)->required();
  build->add_option("--tagset", opt.tagset, "tag list, one per line");
  override_opt(build, "--band", "band", "LO:HI frequency band");
  override_opt(build, "--seed", "seed", "random corpus seed");
  build->add_option("--variant", opt.variant, "cxg | base | random | all");
  build->add_option("--out", opt.out, "output directory")->required();

  auto* pairs = app.add_subcommand("pairs", "sample same/different sentence pairs");
  pairs->add_option("--annotated", opt.annotated)->required();
  pairs->add_option("--table", opt.table)->required();
  pairs->add_option("--tagset", opt.tagset, "tag list, one per line");
  override_opt(pairs, "--band", "band", "LO:HI frequency band");
  override_opt(pairs, "--seed", "seed", "sampling seed");
  override_opt(pairs, "--strictness", "strictness", "anchor | disjoint");
  override_opt(pairs, "--inoculation", "inoculation", "comma-separated subset sizes");
  pairs->add_option("--out", opt.out, "output directory")->required();

  auto* baseline = app.add_subcommand("baseline", "train and evaluate the pair classifier");
  baseline->add_option("--train", opt.train)->required();
  baseline->add_option("--dev", opt.dev);
  baseline->add_option("--test", opt.test)->required();
  override_opt(baseline, "--dim", "dim", "hashed feature dimension");
  override_opt(baseline, "--lr", "learning_rate", "initial learning rate");
  override_opt(baseline, "--epochs", "epochs", "training epochs");
  override_opt(baseline, "--l2", "l2", "L2 penalty");
  override_opt(baseline, "--seed", "seed", "training seed");
  baseline->add_flag("--control", opt.control, "train on label-shuffled pairs");
  baseline->add_option("--out", opt.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    const Context ctx = make_context(opt);
    if (annotate->parsed()) return cmd_annotate(ctx, opt);
    if (induce->parsed()) return cmd_induce(ctx, opt);
    if (match->parsed()) return cmd_match(ctx, opt);
    if (stats->parsed()) return cmd_stats(ctx, opt);
    if (build->parsed()) return cmd_build(ctx, opt);
    if (pairs->parsed()) return cmd_pairs(ctx, opt);
    return cmd_baseline(ctx, opt);
  } catch (const ExitWith& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const StaleError& e) {
    std::cerr << "stale input: " << e.what() << '\n';
    return kExitStale;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace cxg
