#pragma once

#include <span>
#include <string>
#include <vector>

#include "iaclint/cnn_classifier.hpp"

namespace iaclint::metrics {

using dataset::Label;

/// Positive class is "inconsistent".
struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct ClassMetrics {
  double precision = 0, recall = 0, f1 = 0;
  bool precision_undefined = false, recall_undefined = false, f1_undefined = false;
};

struct MetricsReport {
  std::string module_key;
  ClassMetrics inconsistent;
  ClassMetrics consistent;
  double accuracy = 0;
  double mcc = 0;
  bool mcc_undefined = false;
  double auc = 0;
  bool auc_undefined = false;
  ConfusionCounts counts;
};

ConfusionCounts confusion(std::span<const Label> predicted, std::span<const Label> truths);

/// Precision/recall/F1 per class, accuracy, MCC and (from p_inconsistent) AUC.
/// Zero denominators yield 0 and set the matching `*_undefined` flag.
MetricsReport compute_metrics(std::span<const cnn::Prediction> predictions, std::span<const Label> truths,
                              std::string module_key = {});

double mcc(const ConfusionCounts& c, bool* undefined = nullptr);

/// Mann-Whitney AUC by average ranks; ties count one half.
/// Throws PreconditionError if either class is absent or lengths differ.
double compute_auc(std::span<const double> scores, std::span<const Label> truths);

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

/// ROC points from the strictest threshold down, tied scores merged into one step.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const Label> truths);
double trapezoid_area(std::span<const RocPoint> curve);

/// Rows: inconsistent P/R/F1, consistent P/R/F1, accuracy, MCC, AUC; one column per module.
std::string render_table(std::span<const MetricsReport> reports);
std::string render_tsv(std::span<const MetricsReport> reports);
std::string render_roc_tsv(std::span<const RocPoint> curve);

/// Single-module `metric <TAB> value` file and its reader.
std::string format_report(const MetricsReport& report);
MetricsReport parse_report(const std::string& text, const std::string& module_key);

}  // namespace iaclint::metrics
