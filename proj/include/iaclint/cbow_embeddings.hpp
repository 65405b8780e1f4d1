#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace iaclint::embedding {

struct EmbeddingConfig {
  int vector_size = 100;
  double learning_rate = 0.025;
  double min_learning_rate = 0.0001;  // reached linearly at the end of training
  int min_word_frequency = 1;
  int window = 6;  // w/2 tokens on each side of the center
  int epochs = 1000;
  int negative = 5;
  std::uint64_t seed = 1;

  void validate() const;
};

class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(std::string module_key, std::vector<std::string> tokens,
                 std::vector<std::uint64_t> counts, EmbeddingConfig config);

  const std::string& module_key() const { return module_key_; }
  const EmbeddingConfig& config() const { return config_; }
  int dim() const { return config_.vector_size; }
  std::size_t vocab_size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::optional<std::size_t> index_of(const std::string& token) const;

  std::span<double> input(std::size_t i) { return {input_.data() + i * dim(), static_cast<std::size_t>(dim())}; }
  std::span<const double> input(std::size_t i) const {
    return {input_.data() + i * dim(), static_cast<std::size_t>(dim())};
  }
  std::span<double> output(std::size_t i) { return {output_.data() + i * dim(), static_cast<std::size_t>(dim())}; }
  std::span<const double> output(std::size_t i) const {
    return {output_.data() + i * dim(), static_cast<std::size_t>(dim())};
  }

  std::vector<double>& input_matrix() { return input_; }
  std::vector<double>& output_matrix() { return output_; }
  const std::vector<double>& input_matrix() const { return input_; }
  const std::vector<double>& output_matrix() const { return output_; }

  bool all_finite() const;

  /// Text format: header lines, an `[input]` section and an `[output]`
  /// section with one `token v1 ... vd` line per vocabulary entry.
  std::string serialize() const;
  static EmbeddingModel deserialize(const std::string& text, const std::string& source_name);
  void save(const std::filesystem::path& path) const;
  static EmbeddingModel load(const std::filesystem::path& path);

 private:
  std::string module_key_;
  EmbeddingConfig config_;
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> input_;   // |V| x d, row-major
  std::vector<double> output_;  // |V| x d, row-major
};

/// One CBOW training example: averaged context predicts the center token
/// against sampled negatives.
struct CbowSample {
  std::vector<std::size_t> context;
  std::size_t center = 0;
  std::vector<std::size_t> negatives;
};

/// Sparse gradient of the negative-sampling loss, keyed by row index.
struct CbowGradient {
  std::vector<std::pair<std::size_t, std::vector<double>>> input_rows;
  std::vector<std::pair<std::size_t, std::vector<double>>> output_rows;
};

/// -log s(out[center].h) - sum_n log s(-out[n].h), h the mean context input vector.
double cbow_loss(const EmbeddingModel& model, const CbowSample& sample);
CbowGradient cbow_gradient(const EmbeddingModel& model, const CbowSample& sample);

/// Trains one model on `sequences`. Deterministic for a fixed seed.
/// Throws PreconditionError for an empty corpus or a single-token vocabulary.
EmbeddingModel train_cbow(const std::vector<std::vector<std::string>>& sequences,
                          const EmbeddingConfig& config, std::string module_key = {});

/// Input vector per token; unknown tokens map to the zero vector.
std::vector<std::vector<double>> embed_sequence(const EmbeddingModel& model,
                                                const std::vector<std::string>& tokens);

double cosine(std::span<const double> a, std::span<const double> b);
double sigmoid(double x);

}  // namespace iaclint::embedding
