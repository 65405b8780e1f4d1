#include "iaclint/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "iaclint/error.hpp"
#include "iaclint/text_io.hpp"

namespace iaclint::metrics {

namespace {

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  if (den == 0) {
    undefined = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
  ClassMetrics m;
  m.precision = ratio(tp, tp + fp, m.precision_undefined);
  m.recall = ratio(tp, tp + fn, m.recall_undefined);
  if (m.precision + m.recall == 0) {
    m.f1_undefined = true;
    m.f1 = 0;
  } else {
    m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw PreconditionError("predictions (" + std::to_string(a) + ") and truths (" + std::to_string(b) +
                            ") differ in length");
  }
}

}  // namespace

ConfusionCounts confusion(std::span<const Label> predicted, std::span<const Label> truths) {
  check_lengths(predicted.size(), truths.size());
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool pred_pos = predicted[i] == Label::kInconsistent;
    const bool true_pos = truths[i] == Label::kInconsistent;
    if (pred_pos && true_pos) ++c.tp;
    else if (pred_pos) ++c.fp;
    else if (true_pos) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double mcc(const ConfusionCounts& c, bool* undefined) {
  const double tp = c.tp, fp = c.fp, tn = c.tn, fn = c.fn;
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0) {
    if (undefined) *undefined = true;
    return 0.0;
  }
  if (undefined) *undefined = false;
  return (tp * tn - fp * fn) / std::sqrt(den);
}

MetricsReport compute_metrics(std::span<const cnn::Prediction> predictions, std::span<const Label> truths,
                              std::string module_key) {
  check_lengths(predictions.size(), truths.size());
  std::vector<Label> predicted;
  std::vector<double> scores;
  for (const auto& p : predictions) {
    predicted.push_back(p.predicted);
    scores.push_back(p.p_inconsistent);
  }
  MetricsReport r;
  r.module_key = std::move(module_key);
  r.counts = confusion(predicted, truths);
  const auto& c = r.counts;
  r.inconsistent = class_metrics(c.tp, c.fp, c.fn);
  // With "consistent" as the positive class, tn plays the role of tp.
  r.consistent = class_metrics(c.tn, c.fn, c.fp);
  bool undefined = false;
  r.accuracy = ratio(c.tp + c.tn, c.total(), undefined);
  r.mcc = mcc(c, &r.mcc_undefined);
  const bool both = c.tp + c.fn > 0 && c.tn + c.fp > 0;
  if (both) {
    r.auc = compute_auc(scores, truths);
  } else {
    r.auc_undefined = true;
  }
  return r;
}

double compute_auc(std::span<const double> scores, std::span<const Label> truths) {
  check_lengths(scores.size(), truths.size());
  const auto n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (truths[idx[k]] == Label::kInconsistent) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw PreconditionError("AUC needs both classes");
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1) / 2.0) / (np * nn);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Label> truths) {
  check_lengths(scores.size(), truths.size());
  const auto n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t pos = 0;
  for (auto t : truths) pos += t == Label::kInconsistent;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw PreconditionError("ROC needs both classes");

  std::vector<RocPoint> curve{{HUGE_VAL, 0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) {
      (truths[idx[j]] == Label::kInconsistent ? tp : fp) += 1;
      ++j;
    }
    curve.push_back({scores[idx[i]], static_cast<double>(fp) / neg, static_cast<double>(tp) / pos});
    i = j;
  }
  return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
  double area = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

namespace {

struct Row {
  const char* group;
  const char* metric;
  double (*get)(const MetricsReport&);
};

const std::vector<Row>& rows() {
  static const std::vector<Row> r = {
      {"Inconsistent", "Precision", [](const MetricsReport& m) { return m.inconsistent.precision; }},
      {"Inconsistent", "Recall", [](const MetricsReport& m) { return m.inconsistent.recall; }},
      {"Inconsistent", "F1 score", [](const MetricsReport& m) { return m.inconsistent.f1; }},
      {"Consistent", "Precision", [](const MetricsReport& m) { return m.consistent.precision; }},
      {"Consistent", "Recall", [](const MetricsReport& m) { return m.consistent.recall; }},
      {"Consistent", "F1 score", [](const MetricsReport& m) { return m.consistent.f1; }},
      {"", "Accuracy", [](const MetricsReport& m) { return m.accuracy; }},
      {"", "MCC", [](const MetricsReport& m) { return m.mcc; }},
      {"", "AUC", [](const MetricsReport& m) { return m.auc; }},
  };
  return r;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string pad_right(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t w) {
  if (s.size() < w) s.insert(0, w - s.size(), ' ');
  return s;
}

}  // namespace

std::string render_table(std::span<const MetricsReport> reports) {
  std::size_t label_w = std::string("Inconsistent Precision").size();
  std::vector<std::size_t> col_w;
  for (const auto& r : reports) col_w.push_back(std::max<std::size_t>(6, r.module_key.size()));

  std::string out = pad_right("Metric/Module", label_w);
  for (std::size_t i = 0; i < reports.size(); ++i) out += "  " + pad_left(reports[i].module_key, col_w[i]);
  out += "\n";
  for (const auto& row : rows()) {
    std::string label = row.group[0] ? std::string(row.group) + " " + row.metric : std::string(row.metric);
    out += pad_right(label, label_w);
    for (std::size_t i = 0; i < reports.size(); ++i) out += "  " + pad_left(fixed3(row.get(reports[i])), col_w[i]);
    out += "\n";
  }
  return out;
}

std::string render_tsv(std::span<const MetricsReport> reports) {
  std::string out = "group\tmetric";
  for (const auto& r : reports) out += "\t" + r.module_key;
  out += "\n";
  for (const auto& row : rows()) {
    out += std::string(row.group) + "\t" + row.metric;
    for (const auto& r : reports) out += "\t" + text::format_double(row.get(r));
    out += "\n";
  }
  return out;
}

std::string render_roc_tsv(std::span<const RocPoint> curve) {
  std::string out = "threshold\tfpr\ttpr\n";
  for (const auto& p : curve) {
    out += (std::isinf(p.threshold) ? std::string("inf") : text::format_double(p.threshold)) + "\t" +
           text::format_double(p.fpr) + "\t" + text::format_double(p.tpr) + "\n";
  }
  return out;
}

std::string format_report(const MetricsReport& r) {
  std::string out;
  auto line = [&](const std::string& k, double v, bool undefined = false) {
    out += k + "\t" + text::format_double(v) + (undefined ? "\tundefined" : "") + "\n";
  };
  line("inconsistent_precision", r.inconsistent.precision, r.inconsistent.precision_undefined);
  line("inconsistent_recall", r.inconsistent.recall, r.inconsistent.recall_undefined);
  line("inconsistent_f1", r.inconsistent.f1, r.inconsistent.f1_undefined);
  line("consistent_precision", r.consistent.precision, r.consistent.precision_undefined);
  line("consistent_recall", r.consistent.recall, r.consistent.recall_undefined);
  line("consistent_f1", r.consistent.f1, r.consistent.f1_undefined);
  line("accuracy", r.accuracy);
  line("mcc", r.mcc, r.mcc_undefined);
  line("auc", r.auc, r.auc_undefined);
  out += "tp\t" + std::to_string(r.counts.tp) + "\n";
  out += "fp\t" + std::to_string(r.counts.fp) + "\n";
  out += "tn\t" + std::to_string(r.counts.tn) + "\n";
  out += "fn\t" + std::to_string(r.counts.fn) + "\n";
  return out;
}

MetricsReport parse_report(const std::string& data, const std::string& module_key) {
  MetricsReport r;
  r.module_key = module_key;
  for (const auto& line : text::split(data, '\n')) {
    if (line.empty()) continue;
    auto f = text::split(line, '\t');
    if (f.size() < 2) throw Error("bad metrics line: " + line);
    const bool undef = f.size() > 2 && f[2] == "undefined";
    const auto& k = f[0];
    auto num = [&] { return text::parse_double(f[1]); };
    if (k == "inconsistent_precision") { r.inconsistent.precision = num(); r.inconsistent.precision_undefined = undef; }
    else if (k == "inconsistent_recall") { r.inconsistent.recall = num(); r.inconsistent.recall_undefined = undef; }
    else if (k == "inconsistent_f1") { r.inconsistent.f1 = num(); r.inconsistent.f1_undefined = undef; }
    else if (k == "consistent_precision") { r.consistent.precision = num(); r.consistent.precision_undefined = undef; }
    else if (k == "consistent_recall") { r.consistent.recall = num(); r.consistent.recall_undefined = undef; }
    else if (k == "consistent_f1") { r.consistent.f1 = num(); r.consistent.f1_undefined = undef; }
    else if (k == "accuracy") r.accuracy = num();
    else if (k == "mcc") { r.mcc = num(); r.mcc_undefined = undef; }
    else if (k == "auc") { r.auc = num(); r.auc_undefined = undef; }
    else if (k == "tp") r.counts.tp = std::stoull(f[1]);
    else if (k == "fp") r.counts.fp = std::stoull(f[1]);
    else if (k == "tn") r.counts.tn = std::stoull(f[1]);
    else if (k == "fn") r.counts.fn = std::stoull(f[1]);
  }
  return r;
}

}  // namespace iaclint::metrics
