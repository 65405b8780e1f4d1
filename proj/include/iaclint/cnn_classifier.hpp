#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "iaclint/cbow_embeddings.hpp"
#include "iaclint/dataset_builder.hpp"

namespace iaclint::cnn {

using dataset::Label;

/// Dense row-major matrix; a classifier input is max_length x d.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

struct PaddingSpec {
  int max_length = 1;
  double mean_len = 0;
  double std_len = 0;  // population standard deviation
  double truncated_fraction = 0;
};

/// max_length = ceil(mean + std) of the training sequence lengths.
PaddingSpec compute_padding(std::span<const std::size_t> lengths);
PaddingSpec compute_padding(const std::vector<std::vector<std::string>>& train_sequences);

/// Embeds name tokens, `<SEP>` and body tokens, then zero-pads or truncates
/// the tail to max_length rows.
Matrix prepare_input(const NormalizedExample& example, const embedding::EmbeddingModel& emb,
                     const PaddingSpec& pad);

enum class LossKind { kMeanAbsoluteError, kCrossEntropy };

struct Hyperparams {
  int conv1_filters = 10;
  int conv1_kernel = 5;
  double conv1_l2 = 0.01;
  int pool1 = 2;
  int conv2_filters = 10;
  int conv2_kernel = 5;
  double conv2_l2 = 0.01;
  int pool2 = 2;
  double dropout = 0.5;
  int dense_units = 64;
  LossKind loss = LossKind::kMeanAbsoluteError;
  double learning_rate = 1e-2;
  int batch_size = 32;
  int epochs = 200;

  void validate() const;
};

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;

  bool operator==(const Tensor&) const = default;
};

/// Trainable parameters. Conv kernels are [filters, kernel, channels].
struct Weights {
  Tensor conv1_w, conv1_b, conv2_w, conv2_b, dense_w, dense_b, out_w, out_b;

  std::array<Tensor*, 8> all();
  std::array<const Tensor*, 8> all() const;
  Weights zeros_like() const;
  bool all_finite() const;
  bool operator==(const Weights&) const = default;
};

/// conv1 -> ReLU -> maxpool -> conv2 -> ReLU -> maxpool -> flatten ->
/// dropout -> dense -> ReLU -> 2-way softmax (index 0 inconsistent, 1 consistent).
/// Convolutions use zero "same" padding; pooling keeps a partial last window.
class Network {
 public:
  Network(const Hyperparams& hp, std::size_t length, std::size_t channels);

  std::size_t length() const { return len0_; }
  std::size_t channels() const { return channels_; }
  std::size_t flat_size() const { return len2_ * hp_.conv2_filters; }

  Weights initialize(std::uint64_t seed) const;

  struct Cache {
    std::vector<double> z1, p1, z2, p2, flat, z3, a3;
    std::vector<std::uint32_t> arg1, arg2;
    std::array<double, 2> probs{};
  };

  /// Softmax probabilities. `dropout_mask` (flat_size entries, already scaled)
  /// is applied to the flattened features when non-empty.
  std::array<double, 2> forward(const Weights& w, const Matrix& x, std::span<const double> dropout_mask,
                                Cache* cache = nullptr) const;

  /// Accumulates parameter gradients into `grad` given dLoss/dlogits.
  void backward(const Weights& w, const Matrix& x, const Cache& cache, std::span<const double> dropout_mask,
                const std::array<double, 2>& dlogits, Weights& grad) const;

  const Hyperparams& hyperparams() const { return hp_; }

 private:
  Hyperparams hp_;
  std::size_t len0_, len1_, len2_, channels_;
};

/// Per-example loss between softmax output and the one-hot label and its
/// derivative with respect to the logits.
double example_loss(LossKind kind, const std::array<double, 2>& probs, Label label);
std::array<double, 2> loss_logit_gradient(LossKind kind, const std::array<double, 2>& probs, Label label);

/// Mean example loss over the batch plus L2 penalties on both conv kernels.
/// Fills `grad` (same layout as `w`) when non-null. `masks` holds one dropout
/// mask per example or is empty for no dropout.
double batch_loss(const Network& net, const Weights& w, std::span<const Matrix> inputs,
                  std::span<const Label> labels, std::span<const std::vector<double>> masks,
                  Weights* grad);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0;
  double train_accuracy = 0;  // measured with dropout off after the epoch
  double test_accuracy = 0;
};

struct Prediction {
  std::string task_id;
  double p_inconsistent = 0;
  double p_consistent = 0;
  Label predicted = Label::kConsistent;
  double threshold = 0.5;
};

struct TrainingSet {
  std::vector<Matrix> inputs;
  std::vector<Label> labels;
};

class CnnModel {
 public:
  std::string module_key;
  Hyperparams hyperparams;
  PaddingSpec padding;
  std::size_t channels = 0;
  std::uint64_t seed = 0;
  Weights weights;
  std::vector<EpochRecord> history;
  int best_epoch = -1;

  /// Dropout off; consistent iff p_consistent >= threshold (ties go to consistent).
  Prediction predict(const Matrix& input, std::string task_id = {}, double threshold = 0.5) const;

  std::string serialize_weights() const;
  std::string serialize_manifest() const;
  /// Writes weights.txt, manifest.txt and history.tsv into `dir`.
  void save(const std::filesystem::path& dir) const;
  static CnnModel load(const std::filesystem::path& dir);
  /// Content hash of the weight file.
  std::string version() const;
};

/// Mini-batch SGD; returns the snapshot with the best test accuracy (latest
/// on ties). Throws PreconditionError for single-class training data or
/// mismatched shapes, NumericError on a non-finite loss.
CnnModel train(const TrainingSet& train_set, const TrainingSet& test_set, const Hyperparams& hp,
               const PaddingSpec& padding, std::uint64_t seed, std::string module_key = {});

double accuracy(const CnnModel& model, const TrainingSet& set);

/// Max-pool over windows of `width` along rows of a length x channels block;
/// returns pooled values and argmax row per output cell.
void max_pool(std::span<const double> in, std::size_t length, std::size_t channels, std::size_t width,
              std::vector<double>& out, std::vector<std::uint32_t>& argmax);

}  // namespace iaclint::cnn
