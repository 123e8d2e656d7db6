#include "cxg/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "cxg/error.hpp"
#include "cxg/hash.hpp"
#include "cxg/parallel.hpp"
#include "cxg/random.hpp"
#include "cxg/text.hpp"

namespace cxg {

namespace {

constexpr std::size_t kMaxSharedBucket = 10;

void add_side(std::string_view marker, const std::vector<std::string_view>& tokens,
              std::vector<std::string>& out) {
  for (auto t : tokens) out.push_back(std::string(marker) + "|u|" + std::string(t));
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    out.push_back(std::string(marker) + "|b|" + std::string(tokens[i]) + " " +
                  std::string(tokens[i + 1]));
  }
}

std::vector<FeatureEntry> hash_block(const std::vector<std::string>& names, std::uint32_t dim) {
  std::vector<FeatureEntry> entries;
  entries.reserve(names.size());
  for (const auto& n : names) entries.push_back({feature_index(n, dim), 1.0f});
  std::sort(entries.begin(), entries.end(),
            [](const FeatureEntry& a, const FeatureEntry& b) { return a.index < b.index; });
  // Colliding features share one slot with summed weight.
  std::vector<FeatureEntry> merged;
  for (const auto& e : entries) {
    if (!merged.empty() && merged.back().index == e.index) {
      merged.back().value += e.value;
    } else {
      merged.push_back(e);
    }
  }
  return merged;
}

}  // namespace

FeatureNames pair_feature_names(std::string_view text_a, std::string_view text_b) {
  const auto ta = split_whitespace(text_a);
  const auto tb = split_whitespace(text_b);
  FeatureNames names;
  add_side("A", ta, names.side);
  add_side("B", tb, names.side);
  std::sort(names.side.begin(), names.side.end());
  names.side.erase(std::unique(names.side.begin(), names.side.end()), names.side.end());

  const std::set<std::string_view> sa(ta.begin(), ta.end());
  const std::set<std::string_view> sb(tb.begin(), tb.end());
  std::vector<std::string_view> shared;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(shared));
  for (auto t : shared) names.cross.push_back("X|u|" + std::string(t));
  std::set<std::string> bigrams_a, bigrams_b;
  for (std::size_t i = 0; i + 1 < ta.size(); ++i) {
    bigrams_a.insert(std::string(ta[i]) + " " + std::string(ta[i + 1]));
  }
  for (std::size_t i = 0; i + 1 < tb.size(); ++i) {
    bigrams_b.insert(std::string(tb[i]) + " " + std::string(tb[i + 1]));
  }
  for (const auto& bg : bigrams_a) {
    if (bigrams_b.contains(bg)) names.cross.push_back("X|b|" + bg);
  }
  if (!shared.empty()) {
    names.cross.push_back("X|n|" + std::to_string(std::min(shared.size(), kMaxSharedBucket)));
  }
  return names;
}

std::uint32_t feature_index(std::string_view name, std::uint32_t dim) {
  return static_cast<std::uint32_t>(fnv1a(name) % dim);
}

FeatureVector featurize_pair(std::string_view text_a, std::string_view text_b,
                             std::uint32_t dim) {
  if (dim == 0) throw Error("feature dimension must be positive");
  const auto names = pair_feature_names(text_a, text_b);
  return {hash_block(names.side, dim), hash_block(names.cross, dim)};
}

std::vector<FeatureVector> featurize_all(std::span<const PairRecord> pairs, std::uint32_t dim,
                                         unsigned jobs) {
  std::vector<FeatureVector> out(pairs.size());
  parallel_chunks(pairs.size(), jobs, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = featurize_pair(pairs[i].text_a, pairs[i].text_b, dim);
    }
  });
  return out;
}

void Hyperparams::write(std::ostream& out) const {
  out << "dim = " << dim << '\n'
      << "learning_rate = " << learning_rate << '\n'
      << "epochs = " << epochs << '\n'
      << "l2 = " << l2 << '\n'
      << "seed = " << seed << '\n';
}

// ---------------------------------------------------------------------------
// Model

LinearModel::LinearModel(const Hyperparams& hp) : hp_(hp), weights_(hp.dim, 0.0f) {
  if (hp.dim == 0) throw Error("feature dimension must be positive");
}

double LinearModel::margin(const FeatureVector& x) const {
  double z = bias_;
  for (const auto* block : {&x.side, &x.cross}) {
    for (const auto& e : *block) {
      if (e.index < weights_.size()) z += double(weights_[e.index]) * e.value;
    }
  }
  return z;
}

namespace {

constexpr char kMagic[4] = {'C', 'X', 'L', 'M'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw IoError(path, "truncated model file");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void LinearModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kModelVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(weights_.size()));
  out.write(reinterpret_cast<const char*>(weights_.data()),
            std::streamsize(weights_.size() * sizeof(float)));
  put<float>(out, bias_);
  if (!out) throw IoError(path.string(), "write failed");
}

LinearModel LinearModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError(path.string(), "not a model file");
  }
  if (get<std::uint32_t>(in, path.string()) != kModelVersion) {
    throw IoError(path.string(), "unsupported model version");
  }
  Hyperparams hp;
  hp.dim = get<std::uint32_t>(in, path.string());
  LinearModel model(hp);
  if (!in.read(reinterpret_cast<char*>(model.weights_.data()),
               std::streamsize(model.weights_.size() * sizeof(float)))) {
    throw IoError(path.string(), "truncated model file");
  }
  model.bias_ = get<float>(in, path.string());
  return model;
}

// ---------------------------------------------------------------------------
// Training

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_loss(double z, bool y) {
  // log(1 + exp(-y z)) computed stably.
  const double m = y ? -z : z;
  return m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
}

}  // namespace

LinearModel train_model(std::span<const FeatureVector> features,
                        std::span<const std::uint8_t> same, const Hyperparams& hp,
                        TrainingReport* report) {
  if (features.size() != same.size()) throw Error("feature/label count mismatch");
  if (features.size() < 2) throw Error("training needs at least 2 pairs");
  const auto positives = std::count(same.begin(), same.end(), std::uint8_t{1});
  if (positives == 0 || positives == std::ptrdiff_t(same.size())) {
    throw Error("training set must contain both labels");
  }
  LinearModel model(hp);
  auto w = model.weights();
  double bias = 0.0;
  std::vector<std::size_t> order(features.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  auto mean_loss = [&]() {
    double total = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      total += log_loss(model.margin(features[i]), same[i] != 0);
    }
    return total / double(features.size());
  };

  for (std::uint32_t epoch = 0; epoch < hp.epochs; ++epoch) {
    Rng rng(hp.seed, epoch);
    rng.shuffle(std::span(order));
    const double lr = hp.learning_rate / std::sqrt(1.0 + epoch);
    for (std::size_t i : order) {
      const auto& x = features[i];
      const double g = sigmoid(model.margin(x)) - (same[i] ? 1.0 : 0.0);
      for (const auto* block : {&x.side, &x.cross}) {
        for (const auto& e : *block) {
          float& wi = w[e.index];
          wi = static_cast<float>(wi - lr * (g * e.value + hp.l2 * wi));
        }
      }
      bias -= lr * g;
      model.set_bias(static_cast<float>(bias));
    }
    if (report) report->epoch_loss.push_back(mean_loss());
  }
  if (report) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < features.size(); ++i) {
      correct += model.predicts_same(features[i]) == (same[i] != 0);
    }
    report->train_accuracy = double(correct) / double(features.size());
  }
  return model;
}

LinearModel train(std::span<const PairRecord> pairs, const Hyperparams& hp,
                  TrainingReport* report, unsigned jobs) {
  const auto features = featurize_all(pairs, hp.dim, jobs);
  std::vector<std::uint8_t> labels;
  labels.reserve(pairs.size());
  for (const auto& p : pairs) labels.push_back(p.label == PairLabel::Same);
  return train_model(features, labels, hp, report);
}

// ---------------------------------------------------------------------------
// Evaluation

const BandAccuracy* Evaluation::find(const Band& band) const {
  for (const auto& b : per_band) {
    if (b.band == band) return &b;
  }
  return nullptr;
}

Evaluation evaluate(const LinearModel& model, std::span<const PairRecord> pairs, unsigned jobs) {
  if (pairs.empty()) throw Error("cannot evaluate on an empty pair set");
  const auto features = featurize_all(pairs, model.hyperparams().dim, jobs);
  auto band_key = [](const Band& b) {
    return std::make_pair(b.lo, b.hi ? *b.hi : std::uint64_t(-1));
  };
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<Band, std::pair<std::size_t, std::size_t>>>
      bands;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const bool ok = model.predicts_same(features[i]) == (pairs[i].label == PairLabel::Same);
    correct += ok;
    auto& entry = bands[band_key(pairs[i].band)];
    entry.first = pairs[i].band;
    ++entry.second.first;
    entry.second.second += ok;
  }
  Evaluation eval;
  eval.pairs = pairs.size();
  eval.accuracy = double(correct) / double(pairs.size());
  for (const auto& [key, entry] : bands) {
    eval.per_band.push_back(
        {entry.first, entry.second.first, double(entry.second.second) / double(entry.second.first)});
  }
  return eval;
}

std::vector<PairRecord> shuffle_control(std::span<const PairRecord> pairs, std::uint64_t seed) {
  std::vector<PairLabel> labels;
  labels.reserve(pairs.size());
  for (const auto& p : pairs) labels.push_back(p.label);
  Rng rng(seed, /*stream=*/0x6374726cULL);
  rng.shuffle(std::span(labels));
  std::vector<PairRecord> out(pairs.begin(), pairs.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].label = labels[i];
  return out;
}

void write_metrics(std::ostream& out, const Evaluation& eval) {
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (const auto& b : eval.per_band) {
    out << b.band.lo_text() << '\t' << b.band.hi_text() << '\t' << b.pairs << '\t'
        << fmt(b.accuracy) << '\n';
  }
  out << "all\tall\t" << eval.pairs << '\t' << fmt(eval.accuracy) << '\n';
}

}  // namespace cxg
