#include "iaclint/cnn_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "iaclint/error.hpp"
#include "iaclint/log.hpp"
#include "iaclint/random.hpp"
#include "iaclint/text_io.hpp"

namespace iaclint::cnn {

PaddingSpec compute_padding(std::span<const std::size_t> lengths) {
  if (lengths.empty()) throw PreconditionError("padding needs a non-empty training set");
  const double n = static_cast<double>(lengths.size());
  double mean = 0;
  for (auto l : lengths) mean += static_cast<double>(l);
  mean /= n;
  double var = 0;
  for (auto l : lengths) var += (static_cast<double>(l) - mean) * (static_cast<double>(l) - mean);
  var /= n;

  PaddingSpec spec;
  spec.mean_len = mean;
  spec.std_len = std::sqrt(var);
  // Guard against mean+std landing a rounding error above an integer.
  spec.max_length = std::max(1, static_cast<int>(std::ceil(mean + spec.std_len - 1e-9)));
  const auto longer = std::count_if(lengths.begin(), lengths.end(), [&](std::size_t l) {
    return l > static_cast<std::size_t>(spec.max_length);
  });
  spec.truncated_fraction = static_cast<double>(longer) / n;
  return spec;
}

PaddingSpec compute_padding(const std::vector<std::vector<std::string>>& train_sequences) {
  std::vector<std::size_t> lengths;
  lengths.reserve(train_sequences.size());
  for (const auto& s : train_sequences) lengths.push_back(s.size());
  return compute_padding(lengths);
}

Matrix prepare_input(const NormalizedExample& example, const embedding::EmbeddingModel& emb,
                     const PaddingSpec& pad) {
  Matrix m(static_cast<std::size_t>(pad.max_length), static_cast<std::size_t>(emb.dim()));
  const auto seq = dataset::joint_sequence(example);
  const auto rows = std::min(seq.size(), m.rows);
  for (std::size_t r = 0; r < rows; ++r) {
    if (auto i = emb.index_of(seq[r])) {
      auto v = emb.input(*i);
      std::copy(v.begin(), v.end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
    }
  }
  return m;
}

void Hyperparams::validate() const {
  if (conv1_filters < 1 || conv2_filters < 1 || dense_units < 1) throw PreconditionError("layer sizes must be positive");
  if (conv1_kernel < 1 || conv2_kernel < 1 || conv1_kernel % 2 == 0 || conv2_kernel % 2 == 0) {
    throw PreconditionError("kernel widths must be odd and positive");
  }
  if (pool1 < 1 || pool2 < 1) throw PreconditionError("pool widths must be positive");
  if (dropout < 0 || dropout >= 1) throw PreconditionError("dropout must lie in [0,1)");
  if (batch_size < 1 || epochs < 1) throw PreconditionError("batch size and epochs must be positive");
  if (!(learning_rate > 0)) throw PreconditionError("learning rate must be positive");
}

std::array<Tensor*, 8> Weights::all() {
  return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &dense_w, &dense_b, &out_w, &out_b};
}

std::array<const Tensor*, 8> Weights::all() const {
  return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &dense_w, &dense_b, &out_w, &out_b};
}

Weights Weights::zeros_like() const {
  Weights z = *this;
  for (auto* t : z.all()) std::fill(t->values.begin(), t->values.end(), 0.0);
  return z;
}

bool Weights::all_finite() const {
  for (const auto* t : all()) {
    for (double v : t->values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

Tensor make_tensor(std::string name, std::vector<std::size_t> shape) {
  const auto n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  return {std::move(name), std::move(shape), std::vector<double>(n, 0.0)};
}

// Zero "same" padding 1-D convolution along rows.
// in: length x cin, w: [cout, k, cin], out: length x cout.
void conv_forward(const double* in, std::size_t length, std::size_t cin, const Tensor& w, const Tensor& b,
                  std::vector<double>& out) {
  const std::size_t cout = w.shape[0], k = w.shape[1];
  const auto pad = static_cast<std::ptrdiff_t>((k - 1) / 2);
  out.assign(length * cout, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t f = 0; f < cout; ++f) {
      double acc = b.values[f];
      for (std::size_t j = 0; j < k; ++j) {
        const auto src = static_cast<std::ptrdiff_t>(t + j) - pad;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(length)) continue;
        const double* x = in + static_cast<std::size_t>(src) * cin;
        const double* wk = w.values.data() + (f * k + j) * cin;
        for (std::size_t c = 0; c < cin; ++c) acc += wk[c] * x[c];
      }
      out[t * cout + f] = acc;
    }
  }
}

// dz: length x cout. Accumulates dw, db and (if din) the input gradient.
void conv_backward(const double* in, std::size_t length, std::size_t cin, const Tensor& w,
                   const std::vector<double>& dz, Tensor& dw, Tensor& db, std::vector<double>* din) {
  const std::size_t cout = w.shape[0], k = w.shape[1];
  const auto pad = static_cast<std::ptrdiff_t>((k - 1) / 2);
  if (din) din->assign(length * cin, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t f = 0; f < cout; ++f) {
      const double g = dz[t * cout + f];
      if (g == 0.0) continue;
      db.values[f] += g;
      for (std::size_t j = 0; j < k; ++j) {
        const auto src = static_cast<std::ptrdiff_t>(t + j) - pad;
        if (src < 0 || src >= static_cast<std::ptrdiff_t>(length)) continue;
        const double* x = in + static_cast<std::size_t>(src) * cin;
        double* dwk = dw.values.data() + (f * k + j) * cin;
        for (std::size_t c = 0; c < cin; ++c) dwk[c] += g * x[c];
        if (din) {
          const double* wk = w.values.data() + (f * k + j) * cin;
          double* dx = din->data() + static_cast<std::size_t>(src) * cin;
          for (std::size_t c = 0; c < cin; ++c) dx[c] += g * wk[c];
        }
      }
    }
  }
}

void relu_inplace(std::vector<double>& v) {
  for (auto& x : v) x = x > 0 ? x : 0.0;
}

std::array<double, 2> softmax(double a, double b) {
  const double m = std::max(a, b);
  const double ea = std::exp(a - m), eb = std::exp(b - m);
  return {ea / (ea + eb), eb / (ea + eb)};
}

void glorot(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.values) v = rng.uniform(-limit, limit);
}

}  // namespace

void max_pool(std::span<const double> in, std::size_t length, std::size_t channels, std::size_t width,
              std::vector<double>& out, std::vector<std::uint32_t>& argmax) {
  const std::size_t out_len = ceil_div(length, width);
  out.assign(out_len * channels, 0.0);
  argmax.assign(out_len * channels, 0);
  for (std::size_t u = 0; u < out_len; ++u) {
    const std::size_t begin = u * width, end = std::min(length, begin + width);
    for (std::size_t c = 0; c < channels; ++c) {
      std::size_t best = begin;
      for (std::size_t t = begin + 1; t < end; ++t) {
        if (in[t * channels + c] > in[best * channels + c]) best = t;
      }
      out[u * channels + c] = in[best * channels + c];
      argmax[u * channels + c] = static_cast<std::uint32_t>(best);
    }
  }
}

Network::Network(const Hyperparams& hp, std::size_t length, std::size_t channels)
    : hp_(hp), len0_(length), channels_(channels) {
  hp_.validate();
  if (length == 0 || channels == 0) throw PreconditionError("network input must be non-empty");
  len1_ = ceil_div(len0_, static_cast<std::size_t>(hp_.pool1));
  len2_ = ceil_div(len1_, static_cast<std::size_t>(hp_.pool2));
}

Weights Network::initialize(std::uint64_t seed) const {
  const std::size_t f1 = hp_.conv1_filters, k1 = hp_.conv1_kernel, f2 = hp_.conv2_filters,
                    k2 = hp_.conv2_kernel, h = hp_.dense_units;
  Weights w;
  w.conv1_w = make_tensor("conv1.weight", {f1, k1, channels_});
  w.conv1_b = make_tensor("conv1.bias", {f1});
  w.conv2_w = make_tensor("conv2.weight", {f2, k2, f1});
  w.conv2_b = make_tensor("conv2.bias", {f2});
  w.dense_w = make_tensor("dense.weight", {h, flat_size()});
  w.dense_b = make_tensor("dense.bias", {h});
  w.out_w = make_tensor("output.weight", {2, h});
  w.out_b = make_tensor("output.bias", {2});

  Rng rng(seed);
  glorot(w.conv1_w, k1 * channels_, k1 * f1, rng);
  glorot(w.conv2_w, k2 * f1, k2 * f2, rng);
  glorot(w.dense_w, flat_size(), h, rng);
  glorot(w.out_w, h, 2, rng);
  return w;
}

std::array<double, 2> Network::forward(const Weights& w, const Matrix& x, std::span<const double> mask,
                                       Cache* cache) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  const std::size_t f1 = hp_.conv1_filters, f2 = hp_.conv2_filters, h = hp_.dense_units;

  conv_forward(x.data.data(), len0_, channels_, w.conv1_w, w.conv1_b, c.z1);
  std::vector<double> a1 = c.z1;
  relu_inplace(a1);
  max_pool(a1, len0_, f1, hp_.pool1, c.p1, c.arg1);

  conv_forward(c.p1.data(), len1_, f1, w.conv2_w, w.conv2_b, c.z2);
  std::vector<double> a2 = c.z2;
  relu_inplace(a2);
  max_pool(a2, len1_, f2, hp_.pool2, c.p2, c.arg2);

  c.flat = c.p2;
  if (!mask.empty()) {
    for (std::size_t i = 0; i < c.flat.size(); ++i) c.flat[i] *= mask[i];
  }

  const std::size_t flat = c.flat.size();
  c.z3.assign(h, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    const double* row = w.dense_w.values.data() + j * flat;
    double acc = w.dense_b.values[j];
    for (std::size_t i = 0; i < flat; ++i) acc += row[i] * c.flat[i];
    c.z3[j] = acc;
  }
  c.a3 = c.z3;
  relu_inplace(c.a3);

  double logits[2];
  for (std::size_t o = 0; o < 2; ++o) {
    double acc = w.out_b.values[o];
    for (std::size_t j = 0; j < h; ++j) acc += w.out_w.values[o * h + j] * c.a3[j];
    logits[o] = acc;
  }
  c.probs = softmax(logits[0], logits[1]);
  return c.probs;
}

void Network::backward(const Weights& w, const Matrix& x, const Cache& c, std::span<const double> mask,
                       const std::array<double, 2>& dlogits, Weights& g) const {
  const std::size_t f1 = hp_.conv1_filters, f2 = hp_.conv2_filters, h = hp_.dense_units;
  const std::size_t flat = c.flat.size();

  std::vector<double> dz3(h, 0.0);
  for (std::size_t o = 0; o < 2; ++o) {
    g.out_b.values[o] += dlogits[o];
    for (std::size_t j = 0; j < h; ++j) {
      g.out_w.values[o * h + j] += dlogits[o] * c.a3[j];
      dz3[j] += w.out_w.values[o * h + j] * dlogits[o];
    }
  }
  for (std::size_t j = 0; j < h; ++j) {
    if (c.z3[j] <= 0) dz3[j] = 0;
  }

  std::vector<double> dflat(flat, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    if (dz3[j] == 0.0) continue;
    g.dense_b.values[j] += dz3[j];
    const double* row = w.dense_w.values.data() + j * flat;
    double* grow = g.dense_w.values.data() + j * flat;
    for (std::size_t i = 0; i < flat; ++i) {
      grow[i] += dz3[j] * c.flat[i];
      dflat[i] += row[i] * dz3[j];
    }
  }
  if (!mask.empty()) {
    for (std::size_t i = 0; i < flat; ++i) dflat[i] *= mask[i];
  }

  // Unpool into conv2 activations, then through its ReLU.
  std::vector<double> dz2(len1_ * f2, 0.0);
  for (std::size_t u = 0; u < len2_; ++u) {
    for (std::size_t f = 0; f < f2; ++f) {
      const auto t = c.arg2[u * f2 + f];
      dz2[t * f2 + f] += dflat[u * f2 + f];
    }
  }
  for (std::size_t i = 0; i < dz2.size(); ++i) {
    if (c.z2[i] <= 0) dz2[i] = 0;
  }

  std::vector<double> dp1;
  conv_backward(c.p1.data(), len1_, f1, w.conv2_w, dz2, g.conv2_w, g.conv2_b, &dp1);

  std::vector<double> dz1(len0_ * f1, 0.0);
  for (std::size_t u = 0; u < len1_; ++u) {
    for (std::size_t f = 0; f < f1; ++f) {
      const auto t = c.arg1[u * f1 + f];
      dz1[t * f1 + f] += dp1[u * f1 + f];
    }
  }
  for (std::size_t i = 0; i < dz1.size(); ++i) {
    if (c.z1[i] <= 0) dz1[i] = 0;
  }
  conv_backward(x.data.data(), len0_, channels_, w.conv1_w, dz1, g.conv1_w, g.conv1_b, nullptr);
}

double example_loss(LossKind kind, const std::array<double, 2>& p, Label label) {
  const std::size_t target = static_cast<std::size_t>(label);
  if (kind == LossKind::kCrossEntropy) return -std::log(std::max(p[target], 1e-300));
  // Mean over the two outputs of |p - onehot|.
  double l = 0;
  for (std::size_t o = 0; o < 2; ++o) l += std::abs(p[o] - (o == target ? 1.0 : 0.0));
  return l / 2.0;
}

std::array<double, 2> loss_logit_gradient(LossKind kind, const std::array<double, 2>& p, Label label) {
  const std::size_t target = static_cast<std::size_t>(label);
  if (kind == LossKind::kCrossEntropy) {
    return {p[0] - (target == 0 ? 1.0 : 0.0), p[1] - (target == 1 ? 1.0 : 0.0)};
  }
  std::array<double, 2> dp{};
  for (std::size_t o = 0; o < 2; ++o) {
    const double diff = p[o] - (o == target ? 1.0 : 0.0);
    dp[o] = (diff > 0 ? 1.0 : diff < 0 ? -1.0 : 0.0) / 2.0;
  }
  // Softmax Jacobian: dz_i = p_i (dp_i - sum_j p_j dp_j).
  const double s = p[0] * dp[0] + p[1] * dp[1];
  return {p[0] * (dp[0] - s), p[1] * (dp[1] - s)};
}

double batch_loss(const Network& net, const Weights& w, std::span<const Matrix> inputs,
                  std::span<const Label> labels, std::span<const std::vector<double>> masks, Weights* grad) {
  const auto& hp = net.hyperparams();
  const double inv = 1.0 / static_cast<double>(inputs.size());
  double loss = 0;
  Network::Cache cache;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::span<const double> mask;
    if (!masks.empty()) mask = masks[i];
    const auto p = net.forward(w, inputs[i], mask, grad ? &cache : nullptr);
    loss += inv * example_loss(hp.loss, p, labels[i]);
    if (grad) {
      auto dl = loss_logit_gradient(hp.loss, p, labels[i]);
      dl[0] *= inv;
      dl[1] *= inv;
      net.backward(w, inputs[i], cache, mask, dl, *grad);
    }
  }
  auto l2 = [&](const Tensor& t, double lambda, Tensor* g) {
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      loss += lambda * t.values[i] * t.values[i];
      if (g) g->values[i] += 2.0 * lambda * t.values[i];
    }
  };
  l2(w.conv1_w, hp.conv1_l2, grad ? &grad->conv1_w : nullptr);
  l2(w.conv2_w, hp.conv2_l2, grad ? &grad->conv2_w : nullptr);
  return loss;
}

Prediction CnnModel::predict(const Matrix& input, std::string task_id, double threshold) const {
  if (input.rows != static_cast<std::size_t>(padding.max_length) || input.cols != channels) {
    throw PreconditionError("input shape " + std::to_string(input.rows) + "x" + std::to_string(input.cols) +
                            " does not match model shape " + std::to_string(padding.max_length) + "x" +
                            std::to_string(channels));
  }
  const Network net(hyperparams, input.rows, input.cols);
  const auto p = net.forward(weights, input, {});
  Prediction pred;
  pred.task_id = std::move(task_id);
  pred.p_inconsistent = p[0];
  pred.p_consistent = p[1];
  pred.threshold = threshold;
  pred.predicted = p[1] >= threshold ? Label::kConsistent : Label::kInconsistent;
  return pred;
}

double accuracy(const CnnModel& model, const TrainingSet& set) {
  if (set.inputs.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < set.inputs.size(); ++i) {
    if (model.predict(set.inputs[i]).predicted == set.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.inputs.size());
}

CnnModel train(const TrainingSet& train_set, const TrainingSet& test_set, const Hyperparams& hp,
               const PaddingSpec& padding, std::uint64_t seed, std::string module_key) {
  hp.validate();
  if (train_set.inputs.empty() || train_set.inputs.size() != train_set.labels.size() ||
      test_set.inputs.size() != test_set.labels.size()) {
    throw PreconditionError("training data is empty or labels do not match inputs");
  }
  const auto n_consistent = std::count(train_set.labels.begin(), train_set.labels.end(), Label::kConsistent);
  if (n_consistent == 0 || n_consistent == static_cast<std::ptrdiff_t>(train_set.labels.size())) {
    throw PreconditionError("training data contains a single class");
  }
  const std::size_t rows = static_cast<std::size_t>(padding.max_length), cols = train_set.inputs[0].cols;
  auto check_shape = [&](const Matrix& m) {
    if (m.rows != rows || m.cols != cols) throw PreconditionError("input matrices differ in shape");
  };
  for (const auto& m : train_set.inputs) check_shape(m);
  for (const auto& m : test_set.inputs) check_shape(m);

  const Network net(hp, rows, cols);
  CnnModel model;
  model.module_key = std::move(module_key);
  model.hyperparams = hp;
  model.padding = padding;
  model.channels = cols;
  model.seed = seed;
  model.weights = net.initialize(seed);

  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const std::size_t n = train_set.inputs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  Weights best = model.weights;
  double best_test = -1;
  Weights grad = model.weights.zeros_like();
  std::vector<Matrix> batch_x;
  std::vector<Label> batch_y;
  std::vector<std::vector<double>> masks;
  const double keep = 1.0 - hp.dropout;

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += hp.batch_size) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(hp.batch_size));
      batch_x.clear();
      batch_y.clear();
      masks.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch_x.push_back(train_set.inputs[order[i]]);
        batch_y.push_back(train_set.labels[order[i]]);
        if (hp.dropout > 0) {
          std::vector<double> m(net.flat_size());
          for (auto& v : m) v = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
          masks.push_back(std::move(m));
        }
      }
      for (auto* t : grad.all()) std::fill(t->values.begin(), t->values.end(), 0.0);
      const double loss = batch_loss(net, model.weights, batch_x, batch_y, masks, &grad);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch) + " for module '" +
                           model.module_key + "'");
      }
      auto params = model.weights.all();
      auto grads = grad.all();
      for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = params[k]->values;
        const auto& g = grads[k]->values;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= hp.learning_rate * g[i];
      }
      epoch_loss += loss;
      ++batches;
    }
    if (!model.weights.all_finite()) {
      throw NumericError("non-finite weights after epoch " + std::to_string(epoch));
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(batches);
    rec.train_accuracy = accuracy(model, train_set);
    rec.test_accuracy = test_set.inputs.empty() ? rec.train_accuracy : accuracy(model, test_set);
    model.history.push_back(rec);
    if (rec.test_accuracy >= best_test) {
      best_test = rec.test_accuracy;
      best = model.weights;
      model.best_epoch = epoch;
    }
  }
  model.weights = std::move(best);
  return model;
}

namespace {

std::string loss_name(LossKind k) { return k == LossKind::kCrossEntropy ? "cross_entropy" : "mae"; }

}  // namespace

std::string CnnModel::serialize_weights() const {
  std::string out = "iaclint-cnn-weights 1\n";
  for (const auto* t : weights.all()) {
    out += "tensor " + t->name + " " + std::to_string(t->shape.size());
    for (auto s : t->shape) out += " " + std::to_string(s);
    out += "\n";
    for (std::size_t i = 0; i < t->values.size(); ++i) {
      if (i) out += ' ';
      out += text::format_double(t->values[i]);
    }
    out += "\n";
  }
  return out;
}

std::string CnnModel::serialize_manifest() const {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
  kv("format", "iaclint-cnn 1");
  kv("module_key", module_key);
  kv("seed", std::to_string(seed));
  kv("channels", std::to_string(channels));
  kv("conv1_filters", std::to_string(hyperparams.conv1_filters));
  kv("conv1_kernel", std::to_string(hyperparams.conv1_kernel));
  kv("conv1_l2", text::format_double(hyperparams.conv1_l2));
  kv("pool1", std::to_string(hyperparams.pool1));
  kv("conv2_filters", std::to_string(hyperparams.conv2_filters));
  kv("conv2_kernel", std::to_string(hyperparams.conv2_kernel));
  kv("conv2_l2", text::format_double(hyperparams.conv2_l2));
  kv("pool2", std::to_string(hyperparams.pool2));
  kv("dropout", text::format_double(hyperparams.dropout));
  kv("dense_units", std::to_string(hyperparams.dense_units));
  kv("loss", loss_name(hyperparams.loss));
  kv("learning_rate", text::format_double(hyperparams.learning_rate));
  kv("batch_size", std::to_string(hyperparams.batch_size));
  kv("epochs", std::to_string(hyperparams.epochs));
  kv("max_length", std::to_string(padding.max_length));
  kv("mean_len", text::format_double(padding.mean_len));
  kv("std_len", text::format_double(padding.std_len));
  kv("truncated_fraction", text::format_double(padding.truncated_fraction));
  kv("best_epoch", std::to_string(best_epoch));
  kv("version", version());
  return out;
}

std::string CnnModel::version() const { return text::hex64(text::fnv1a(serialize_weights())).substr(0, 12); }

void CnnModel::save(const std::filesystem::path& dir) const {
  text::write_file(dir / "weights.txt", serialize_weights());
  text::write_file(dir / "manifest.txt", serialize_manifest());
  std::string hist = "epoch\ttrain_loss\ttrain_accuracy\ttest_accuracy\n";
  for (const auto& r : history) {
    hist += std::to_string(r.epoch) + "\t" + text::format_double(r.train_loss) + "\t" +
            text::format_double(r.train_accuracy) + "\t" + text::format_double(r.test_accuracy) + "\n";
  }
  text::write_file(dir / "history.tsv", hist);
}

CnnModel CnnModel::load(const std::filesystem::path& dir) {
  CnnModel m;
  const auto manifest_path = (dir / "manifest.txt").string();
  std::map<std::string, std::string> kv;
  int ln = 0;
  for (const auto& line : text::split(text::read_file(dir / "manifest.txt"), '\n')) {
    ++ln;
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(manifest_path, ln, "expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& k) -> const std::string& {
    auto it = kv.find(k);
    if (it == kv.end()) throw ParseError(manifest_path, 0, "missing key '" + k + "'");
    return it->second;
  };
  if (get("format") != "iaclint-cnn 1") throw ParseError(manifest_path, 1, "unsupported model format");
  auto& hp = m.hyperparams;
  m.module_key = get("module_key");
  m.seed = std::stoull(get("seed"));
  m.channels = std::stoull(get("channels"));
  hp.conv1_filters = std::stoi(get("conv1_filters"));
  hp.conv1_kernel = std::stoi(get("conv1_kernel"));
  hp.conv1_l2 = text::parse_double(get("conv1_l2"));
  hp.pool1 = std::stoi(get("pool1"));
  hp.conv2_filters = std::stoi(get("conv2_filters"));
  hp.conv2_kernel = std::stoi(get("conv2_kernel"));
  hp.conv2_l2 = text::parse_double(get("conv2_l2"));
  hp.pool2 = std::stoi(get("pool2"));
  hp.dropout = text::parse_double(get("dropout"));
  hp.dense_units = std::stoi(get("dense_units"));
  hp.loss = get("loss") == "cross_entropy" ? LossKind::kCrossEntropy : LossKind::kMeanAbsoluteError;
  hp.learning_rate = text::parse_double(get("learning_rate"));
  hp.batch_size = std::stoi(get("batch_size"));
  hp.epochs = std::stoi(get("epochs"));
  m.padding.max_length = std::stoi(get("max_length"));
  m.padding.mean_len = text::parse_double(get("mean_len"));
  m.padding.std_len = text::parse_double(get("std_len"));
  m.padding.truncated_fraction = text::parse_double(get("truncated_fraction"));
  m.best_epoch = std::stoi(get("best_epoch"));

  const Network net(hp, static_cast<std::size_t>(m.padding.max_length), m.channels);
  m.weights = net.initialize(0);
  const auto weights_path = (dir / "weights.txt").string();
  const auto lines = text::split(text::read_file(dir / "weights.txt"), '\n');
  if (lines.empty() || lines[0] != "iaclint-cnn-weights 1") {
    throw ParseError(weights_path, 1, "not a weight file");
  }
  std::size_t li = 1;
  for (auto* t : m.weights.all()) {
    if (li + 1 >= lines.size()) throw ParseError(weights_path, static_cast<int>(li), "truncated weight file");
    auto header = text::split(lines[li], ' ');
    if (header.size() < 3 || header[0] != "tensor" || header[1] != t->name) {
      throw ParseError(weights_path, static_cast<int>(li + 1), "expected tensor " + t->name);
    }
    std::vector<std::size_t> shape;
    for (std::size_t i = 3; i < header.size(); ++i) shape.push_back(std::stoull(header[i]));
    if (shape != t->shape) throw ParseError(weights_path, static_cast<int>(li + 1), "shape mismatch for " + t->name);
    auto vals = text::split(lines[li + 1], ' ');
    if (vals.size() != t->values.size()) {
      throw ParseError(weights_path, static_cast<int>(li + 2), "value count mismatch for " + t->name);
    }
    for (std::size_t i = 0; i < vals.size(); ++i) t->values[i] = text::parse_double(vals[i]);
    li += 2;
  }

  const auto hist_path = dir / "history.tsv";
  if (std::filesystem::exists(hist_path)) {
    bool header = true;
    for (const auto& line : text::split(text::read_file(hist_path), '\n')) {
      if (header || line.empty()) {
        header = false;
        continue;
      }
      auto f = text::split(line, '\t');
      if (f.size() != 4) continue;
      m.history.push_back({std::stoi(f[0]), text::parse_double(f[1]), text::parse_double(f[2]),
                           text::parse_double(f[3])});
    }
  }
  return m;
}

}  // namespace iaclint::cnn
