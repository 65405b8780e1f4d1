#include "iaclint/eval_metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "iaclint/error.hpp"
#include "iaclint/random.hpp"

namespace iaclint::metrics {
namespace {

constexpr Label kI = Label::kInconsistent;
constexpr Label kC = Label::kConsistent;

cnn::Prediction pred(double p_inconsistent) {
  cnn::Prediction p;
  p.p_inconsistent = p_inconsistent;
  p.p_consistent = 1 - p_inconsistent;
  p.predicted = p.p_consistent >= 0.5 ? kC : kI;
  return p;
}

// Predictions reproducing the given confusion counts.
std::pair<std::vector<cnn::Prediction>, std::vector<Label>> from_counts(int tp, int fn, int tn, int fp) {
  std::vector<cnn::Prediction> p;
  std::vector<Label> t;
  for (int i = 0; i < tp; ++i) p.push_back(pred(0.9)), t.push_back(kI);
  for (int i = 0; i < fn; ++i) p.push_back(pred(0.2)), t.push_back(kI);
  for (int i = 0; i < tn; ++i) p.push_back(pred(0.1)), t.push_back(kC);
  for (int i = 0; i < fp; ++i) p.push_back(pred(0.8)), t.push_back(kC);
  return {p, t};
}

TEST(Metrics, PerfectPredictions) {
  const auto [p, t] = from_counts(5, 0, 5, 0);
  const auto r = compute_metrics(p, t);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.inconsistent.f1, 1.0);
  EXPECT_DOUBLE_EQ(r.consistent.f1, 1.0);
  EXPECT_DOUBLE_EQ(r.mcc, 1.0);
  EXPECT_DOUBLE_EQ(r.auc, 1.0);
}

TEST(Metrics, KnownConfusionMatrix) {
  const auto [p, t] = from_counts(81, 19, 89, 11);
  const auto r = compute_metrics(p, t, "file");
  EXPECT_EQ(r.counts, (ConfusionCounts{81, 11, 89, 19}));
  EXPECT_NEAR(r.inconsistent.precision, 81.0 / 92.0, 1e-12);
  EXPECT_NEAR(r.inconsistent.precision, 0.880, 5e-4);
  EXPECT_NEAR(r.inconsistent.recall, 0.81, 1e-12);
  EXPECT_NEAR(r.consistent.precision, 89.0 / 108.0, 1e-12);
  EXPECT_NEAR(r.consistent.recall, 0.89, 1e-12);
  EXPECT_NEAR(r.accuracy, 0.85, 1e-12);
  const double expected_mcc = (81.0 * 89 - 11.0 * 19) / std::sqrt(92.0 * 100 * 100 * 108);
  EXPECT_NEAR(r.mcc, expected_mcc, 1e-12);
}

TEST(Metrics, SingleClassPredictions) {
  std::vector<cnn::Prediction> p(4, pred(0.1));
  const std::vector<Label> t = {kI, kI, kC, kC};
  const auto r = compute_metrics(p, t);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(r.mcc, 0.0);
  EXPECT_TRUE(r.mcc_undefined);
  EXPECT_TRUE(r.inconsistent.precision_undefined);
  EXPECT_DOUBLE_EQ(r.inconsistent.precision, 0.0);
  EXPECT_FALSE(r.consistent.precision_undefined);
}

TEST(Metrics, LengthMismatch) {
  std::vector<cnn::Prediction> p(3, pred(0.1));
  const std::vector<Label> t = {kI, kC};
  EXPECT_THROW(compute_metrics(p, t), PreconditionError);
}

// Pairwise oracle: fraction of (positive, negative) pairs ranked correctly.
double brute_auc(const std::vector<double>& s, const std::vector<Label>& t) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (t[i] != kI || t[j] != kC) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

TEST(Auc, SmallExamples) {
  const std::vector<double> s = {0.9, 0.6, 0.7, 0.2};
  const std::vector<Label> t = {kI, kI, kC, kC};
  // pairs (.9,.7) (.9,.2) (.6,.2) ranked correctly, (.6,.7) not
  EXPECT_DOUBLE_EQ(compute_auc(s, t), 0.75);
  EXPECT_DOUBLE_EQ(compute_auc(s, t), brute_auc(s, t));
  EXPECT_DOUBLE_EQ(compute_auc(std::vector<double>{0.9, 0.8, 0.3, 0.1}, t), 1.0);
  EXPECT_DOUBLE_EQ(compute_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, t), 0.5);
  EXPECT_THROW(compute_auc(std::vector<double>{0.1, 0.2}, std::vector<Label>{kI, kI}), PreconditionError);
}

TEST(Auc, RankTrapezoidAndPairwiseAgree) {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    std::vector<double> s(n);
    std::vector<Label> t(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(10)) / 10.0;  // coarse scores force ties
      t[i] = rng.bernoulli(0.5) ? kI : kC;
    }
    t[0] = kI;
    t[1] = kC;
    const double oracle = brute_auc(s, t);
    EXPECT_NEAR(compute_auc(s, t), oracle, 1e-12);
    const auto curve = roc_curve(s, t);
    EXPECT_NEAR(trapezoid_area(curve), oracle, 1e-12);
    EXPECT_DOUBLE_EQ(curve.front().fpr, 0.0);
    EXPECT_DOUBLE_EQ(curve.back().tpr, 1.0);
  }
}

TEST(Metrics, RandomSetsMatchRecount) {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.below(80);
    std::vector<cnn::Prediction> p;
    std::vector<Label> t;
    for (std::size_t i = 0; i < n; ++i) {
      p.push_back(pred(rng.uniform()));
      t.push_back(rng.bernoulli(0.5) ? kI : kC);
    }
    const auto r = compute_metrics(p, t);
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool pi = p[i].predicted == kI, ti = t[i] == kI;
      tp += pi && ti;
      fp += pi && !ti;
      tn += !pi && !ti;
      fn += !pi && ti;
    }
    EXPECT_DOUBLE_EQ(r.accuracy, (tp + tn) / n);
    EXPECT_DOUBLE_EQ(r.inconsistent.precision, tp + fp > 0 ? tp / (tp + fp) : 0.0);
    EXPECT_DOUBLE_EQ(r.inconsistent.recall, tp + fn > 0 ? tp / (tp + fn) : 0.0);
    EXPECT_DOUBLE_EQ(r.consistent.precision, tn + fn > 0 ? tn / (tn + fn) : 0.0);
    EXPECT_DOUBLE_EQ(r.consistent.recall, tn + fp > 0 ? tn / (tn + fp) : 0.0);
    for (double v : {r.accuracy, r.inconsistent.precision, r.inconsistent.recall, r.inconsistent.f1,
                     r.consistent.precision, r.consistent.recall, r.consistent.f1}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_GE(r.mcc, -1.0);
    EXPECT_LE(r.mcc, 1.0);
    // swapping the class roles leaves |MCC| unchanged
    const ConfusionCounts swapped{r.counts.tn, r.counts.fn, r.counts.tp, r.counts.fp};
    EXPECT_NEAR(std::abs(mcc(swapped)), std::abs(r.mcc), 1e-12);
  }
}

TEST(Report, RoundTripAndTable) {
  const auto [p, t] = from_counts(81, 19, 89, 11);
  const auto r = compute_metrics(p, t, "file");
  const auto back = parse_report(format_report(r), "file");
  EXPECT_NEAR(back.accuracy, r.accuracy, 1e-12);
  EXPECT_NEAR(back.mcc, r.mcc, 1e-12);
  EXPECT_EQ(back.counts, r.counts);
  const std::vector<MetricsReport> rs = {r, r};
  const auto table = render_table(rs);
  EXPECT_NE(table.find("0.880"), std::string::npos);
  EXPECT_NE(table.find("0.850"), std::string::npos);
}

}  // namespace
}  // namespace iaclint::metrics
