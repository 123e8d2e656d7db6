#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cxg/band.hpp"
#include "cxg/pair_sampler.hpp"

namespace cxg {

struct FeatureEntry {
  std::uint32_t index = 0;
  float value = 0.0f;

  bool operator==(const FeatureEntry&) const = default;
};

// Hashed pair features. `side` holds the A:/B:-marked unigrams and bigrams of
// each sentence; `cross` holds features of what the two sentences share and
// is symmetric under swapping them. Both blocks are sorted by index.
struct FeatureVector {
  std::vector<FeatureEntry> side;
  std::vector<FeatureEntry> cross;

  bool operator==(const FeatureVector&) const = default;
};

struct FeatureNames {
  std::vector<std::string> side;
  std::vector<std::string> cross;
};

inline constexpr std::uint32_t kDefaultFeatureDim = 1u << 20;

// The un-hashed feature strings featurize_pair hashes.
FeatureNames pair_feature_names(std::string_view text_a, std::string_view text_b);
std::uint32_t feature_index(std::string_view name, std::uint32_t dim);
FeatureVector featurize_pair(std::string_view text_a, std::string_view text_b,
                             std::uint32_t dim = kDefaultFeatureDim);

struct Hyperparams {
  std::uint32_t dim = kDefaultFeatureDim;
  double learning_rate = 0.2;
  std::uint32_t epochs = 8;
  double l2 = 1e-5;
  std::uint64_t seed = 0;

  void write(std::ostream& out) const;
  bool operator==(const Hyperparams&) const = default;
};

class LinearModel {
 public:
  LinearModel() = default;
  explicit LinearModel(const Hyperparams& hp);

  double margin(const FeatureVector& x) const;
  bool predicts_same(const FeatureVector& x) const { return margin(x) >= 0.0; }

  std::span<float> weights() { return weights_; }
  std::span<const float> weights() const { return weights_; }
  float bias() const { return bias_; }
  void set_bias(float b) { bias_ = b; }
  const Hyperparams& hyperparams() const { return hp_; }

  // "CXLM", u32 version, u32 dim, dim little-endian f32 weights, f32 bias.
  void save(const std::filesystem::path& path) const;
  static LinearModel load(const std::filesystem::path& path);

  // Weights and bias only; hyperparameters are not persisted.
  bool operator==(const LinearModel& o) const {
    return weights_ == o.weights_ && bias_ == o.bias_;
  }

 private:
  Hyperparams hp_{};
  std::vector<float> weights_;
  float bias_ = 0.0f;
};

struct TrainingReport {
  std::vector<double> epoch_loss;  // mean log loss over the training set
  double train_accuracy = 0.0;
};

// Logistic loss minimized by SGD; examples are visited in a fresh seeded
// order every epoch. Throws unless both labels are present.
LinearModel train_model(std::span<const FeatureVector> features, std::span<const std::uint8_t> same,
                        const Hyperparams& hp, TrainingReport* report = nullptr);
LinearModel train(std::span<const PairRecord> pairs, const Hyperparams& hp,
                  TrainingReport* report = nullptr, unsigned jobs = 1);

struct BandAccuracy {
  Band band;
  std::size_t pairs = 0;
  double accuracy = 0.0;
};

struct Evaluation {
  std::size_t pairs = 0;
  double accuracy = 0.0;
  std::vector<BandAccuracy> per_band;  // sorted by band

  const BandAccuracy* find(const Band& band) const;
};

Evaluation evaluate(const LinearModel& model, std::span<const PairRecord> pairs,
                    unsigned jobs = 1);

// Same pairs with the label column uniformly permuted.
std::vector<PairRecord> shuffle_control(std::span<const PairRecord> pairs, std::uint64_t seed);

// band_lo<TAB>band_hi<TAB>n_pairs<TAB>accuracy per band, then an `all` row.
void write_metrics(std::ostream& out, const Evaluation& eval);

std::vector<FeatureVector> featurize_all(std::span<const PairRecord> pairs, std::uint32_t dim,
                                         unsigned jobs = 1);

}  // namespace cxg
