#include "iaclint/cbow_embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "iaclint/error.hpp"
#include "iaclint/random.hpp"
#include "iaclint/text_io.hpp"

namespace iaclint::embedding {

void EmbeddingConfig::validate() const {
  if (vector_size <= 0) throw PreconditionError("vector_size must be positive");
  if (window < 2 || window % 2 != 0) throw PreconditionError("window must be even and >= 2");
  if (epochs < 1) throw PreconditionError("epochs must be >= 1");
  if (negative < 1) throw PreconditionError("negative must be >= 1");
  if (min_word_frequency < 1) throw PreconditionError("min_word_frequency must be >= 1");
  if (!(learning_rate > 0)) throw PreconditionError("learning_rate must be positive");
}

EmbeddingModel::EmbeddingModel(std::string module_key, std::vector<std::string> tokens,
                               std::vector<std::uint64_t> counts, EmbeddingConfig config)
    : module_key_(std::move(module_key)),
      config_(config),
      tokens_(std::move(tokens)),
      counts_(std::move(counts)),
      input_(tokens_.size() * config.vector_size, 0.0),
      output_(tokens_.size() * config.vector_size, 0.0) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], i);
}

std::optional<std::size_t> EmbeddingModel::index_of(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool EmbeddingModel::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(input_.begin(), input_.end(), finite) &&
         std::all_of(output_.begin(), output_.end(), finite);
}

std::string EmbeddingModel::serialize() const {
  std::string out = "iaclint-cbow 1\n";
  out += "module_key " + text::escape_token(module_key_) + "\n";
  out += "dim " + std::to_string(dim()) + "\n";
  out += "vocab " + std::to_string(vocab_size()) + "\n";
  out += "config learning_rate=" + text::format_double(config_.learning_rate) +
         " min_learning_rate=" + text::format_double(config_.min_learning_rate) +
         " min_word_frequency=" + std::to_string(config_.min_word_frequency) +
         " window=" + std::to_string(config_.window) + " epochs=" + std::to_string(config_.epochs) +
         " negative=" + std::to_string(config_.negative) + " seed=" + std::to_string(config_.seed) + "\n";
  auto section = [&](const char* title, const std::vector<double>& m) {
    out += std::string("[") + title + "]\n";
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      out += text::escape_token(tokens_[i]) + " " + std::to_string(counts_[i]);
      for (int k = 0; k < dim(); ++k) out += " " + text::format_double(m[i * dim() + k]);
      out += "\n";
    }
  };
  section("input", input_);
  section("output", output_);
  return out;
}

EmbeddingModel EmbeddingModel::deserialize(const std::string& data, const std::string& source) {
  const auto lines = text::split(data, '\n');
  std::size_t ln = 0;
  auto next = [&]() -> const std::string& {
    if (ln >= lines.size()) throw ParseError(source, static_cast<int>(ln), "unexpected end of file");
    return lines[ln++];
  };
  auto expect_key = [&](const std::string& key) {
    const auto& l = next();
    if (l.rfind(key + " ", 0) != 0) throw ParseError(source, static_cast<int>(ln), "expected '" + key + "'");
    return l.substr(key.size() + 1);
  };
  if (next() != "iaclint-cbow 1") throw ParseError(source, 1, "not an embedding model file");

  EmbeddingConfig cfg;
  const auto module_key = text::unescape_token(expect_key("module_key"));
  cfg.vector_size = std::stoi(expect_key("dim"));
  const auto vocab = static_cast<std::size_t>(std::stoull(expect_key("vocab")));
  for (const auto& kv : text::split(expect_key("config"), ' ')) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    const auto k = kv.substr(0, eq), v = kv.substr(eq + 1);
    if (k == "learning_rate") cfg.learning_rate = text::parse_double(v);
    else if (k == "min_learning_rate") cfg.min_learning_rate = text::parse_double(v);
    else if (k == "min_word_frequency") cfg.min_word_frequency = std::stoi(v);
    else if (k == "window") cfg.window = std::stoi(v);
    else if (k == "epochs") cfg.epochs = std::stoi(v);
    else if (k == "negative") cfg.negative = std::stoi(v);
    else if (k == "seed") cfg.seed = std::stoull(v);
  }

  std::vector<std::string> tokens(vocab);
  std::vector<std::uint64_t> counts(vocab);
  std::vector<double> in(vocab * cfg.vector_size), out(vocab * cfg.vector_size);
  auto read_section = [&](const char* title, std::vector<double>& m) {
    if (next() != std::string("[") + title + "]") {
      throw ParseError(source, static_cast<int>(ln), std::string("expected [") + title + "]");
    }
    for (std::size_t i = 0; i < vocab; ++i) {
      auto f = text::split(next(), ' ');
      if (f.size() != static_cast<std::size_t>(cfg.vector_size) + 2) {
        throw ParseError(source, static_cast<int>(ln), "wrong vector width");
      }
      tokens[i] = text::unescape_token(f[0]);
      counts[i] = std::stoull(f[1]);
      for (int k = 0; k < cfg.vector_size; ++k) m[i * cfg.vector_size + k] = text::parse_double(f[k + 2]);
    }
  };
  read_section("input", in);
  read_section("output", out);

  EmbeddingModel model(module_key, std::move(tokens), std::move(counts), cfg);
  model.input_ = std::move(in);
  model.output_ = std::move(out);
  return model;
}

void EmbeddingModel::save(const std::filesystem::path& path) const { text::write_file(path, serialize()); }

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
  return deserialize(text::read_file(path), path.string());
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> context_mean(const EmbeddingModel& m, const CbowSample& s) {
  std::vector<double> h(m.dim(), 0.0);
  for (auto c : s.context) {
    auto v = m.input(c);
    for (int k = 0; k < m.dim(); ++k) h[k] += v[k];
  }
  const double inv = 1.0 / static_cast<double>(s.context.size());
  for (auto& x : h) x *= inv;
  return h;
}

// log(sigmoid(x)) without overflow.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

void add_row(std::vector<std::pair<std::size_t, std::vector<double>>>& rows, std::size_t index,
             std::span<const double> v, double scale) {
  for (auto& [i, g] : rows) {
    if (i == index) {
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += scale * v[k];
      return;
    }
  }
  std::vector<double> g(v.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = scale * v[k];
  rows.emplace_back(index, std::move(g));
}

// Samples from the unigram^0.75 distribution by inverting its CDF.
class NoiseDistribution {
 public:
  explicit NoiseDistribution(const std::vector<std::uint64_t>& counts) {
    cdf_.reserve(counts.size());
    double acc = 0;
    for (auto c : counts) {
      acc += std::pow(static_cast<double>(c), 0.75);
      cdf_.push_back(acc);
    }
    for (auto& x : cdf_) x /= acc;
  }

  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::size_t>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

double cbow_loss(const EmbeddingModel& m, const CbowSample& s) {
  const auto h = context_mean(m, s);
  double loss = -log_sigmoid(dot(m.output(s.center), h));
  for (auto n : s.negatives) loss -= log_sigmoid(-dot(m.output(n), h));
  return loss;
}

CbowGradient cbow_gradient(const EmbeddingModel& m, const CbowSample& s) {
  CbowGradient g;
  const auto h = context_mean(m, s);
  std::vector<double> grad_h(m.dim(), 0.0);

  auto accumulate = [&](std::size_t row, double coeff) {
    // coeff = dL/d(score) for score = out[row] . h
    add_row(g.output_rows, row, h, coeff);
    auto o = m.output(row);
    for (int k = 0; k < m.dim(); ++k) grad_h[k] += coeff * o[k];
  };
  accumulate(s.center, sigmoid(dot(m.output(s.center), h)) - 1.0);
  for (auto n : s.negatives) accumulate(n, sigmoid(dot(m.output(n), h)));

  const double inv = 1.0 / static_cast<double>(s.context.size());
  for (auto c : s.context) add_row(g.input_rows, c, grad_h, inv);
  return g;
}

EmbeddingModel train_cbow(const std::vector<std::vector<std::string>>& sequences,
                          const EmbeddingConfig& config, std::string module_key) {
  config.validate();

  std::map<std::string, std::uint64_t> freq;
  std::size_t total_tokens = 0;
  bool has_pair = false;
  for (const auto& seq : sequences) {
    for (const auto& t : seq) ++freq[t];
    total_tokens += seq.size();
    has_pair = has_pair || seq.size() >= 2;
  }
  if (total_tokens == 0 || !has_pair) {
    throw PreconditionError("CBOW needs at least one sequence with two or more tokens");
  }

  // Frequency descending, ties broken lexicographically.
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (auto& [tok, n] : freq) {
    if (n >= static_cast<std::uint64_t>(config.min_word_frequency)) entries.emplace_back(tok, n);
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (entries.size() < 2) throw PreconditionError("CBOW needs a vocabulary of at least two tokens");

  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  for (auto& [tok, n] : entries) {
    tokens.push_back(tok);
    counts.push_back(n);
  }
  EmbeddingModel model(std::move(module_key), std::move(tokens), std::move(counts), config);

  Rng rng(config.seed);
  const int d = config.vector_size;
  for (auto& x : model.input_matrix()) x = (rng.uniform() - 0.5) / d;
  // Output vectors start at zero, as in word2vec.

  std::vector<std::vector<std::size_t>> encoded;
  encoded.reserve(sequences.size());
  for (const auto& seq : sequences) {
    std::vector<std::size_t> ids;
    for (const auto& t : seq) {
      if (auto i = model.index_of(t)) ids.push_back(*i);
    }
    encoded.push_back(std::move(ids));
  }

  const NoiseDistribution noise(model.counts());
  const int half = config.window / 2;
  const double total_steps = static_cast<double>(config.epochs) * static_cast<double>(total_tokens);
  double step = 0;

  CbowSample sample;
  std::vector<double> h(d), grad_h(d);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& ids : encoded) {
      const auto n = static_cast<std::ptrdiff_t>(ids.size());
      for (std::ptrdiff_t pos = 0; pos < n; ++pos, ++step) {
        const double lr = std::max(config.min_learning_rate,
                                   config.learning_rate - (config.learning_rate - config.min_learning_rate) *
                                                              (step / total_steps));
        sample.context.clear();
        for (auto j = std::max<std::ptrdiff_t>(0, pos - half); j <= std::min(n - 1, pos + half); ++j) {
          if (j != pos) sample.context.push_back(ids[j]);
        }
        if (sample.context.empty()) continue;
        sample.center = ids[pos];
        sample.negatives.clear();
        for (int k = 0; k < config.negative; ++k) {
          std::size_t neg = noise.sample(rng);
          for (int redraw = 0; neg == sample.center && redraw < 64; ++redraw) neg = noise.sample(rng);
          if (neg != sample.center) sample.negatives.push_back(neg);
        }

        // Inline form of cbow_gradient followed by an SGD step.
        std::fill(h.begin(), h.end(), 0.0);
        for (auto c : sample.context) {
          auto v = model.input(c);
          for (int k = 0; k < d; ++k) h[k] += v[k];
        }
        const double inv = 1.0 / static_cast<double>(sample.context.size());
        for (auto& x : h) x *= inv;
        std::fill(grad_h.begin(), grad_h.end(), 0.0);
        auto update_output = [&](std::size_t row, double target) {
          auto o = model.output(row);
          const double coeff = sigmoid(dot(o, h)) - target;
          for (int k = 0; k < d; ++k) {
            grad_h[k] += coeff * o[k];
            o[k] -= lr * coeff * h[k];
          }
        };
        update_output(sample.center, 1.0);
        for (auto neg : sample.negatives) update_output(neg, 0.0);
        for (auto c : sample.context) {
          auto v = model.input(c);
          for (int k = 0; k < d; ++k) v[k] -= lr * inv * grad_h[k];
        }
      }
    }
  }
  if (!model.all_finite()) throw NumericError("CBOW training produced non-finite vectors");
  return model;
}

std::vector<std::vector<double>> embed_sequence(const EmbeddingModel& model,
                                                const std::vector<std::string>& tokens) {
  std::vector<std::vector<double>> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (auto i = model.index_of(t)) {
      auto v = model.input(*i);
      out.emplace_back(v.begin(), v.end());
    } else {
      out.emplace_back(model.dim(), 0.0);
    }
  }
  return out;
}

}  // namespace iaclint::embedding
