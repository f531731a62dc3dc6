// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kc/corpus.hpp"

namespace kc::stats {

/// Rows are the true class, columns the predicted class.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  std::size_t total() const;
  std::size_t support(std::size_t true_class) const;
  std::size_t predicted(std::size_t predicted_class) const;
};

struct ClassScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  /// Class occurs in the truth or in the predictions.
  bool active = false;
  /// TP + FP == 0; precision reported as 0.
  bool precision_undefined = false;
  /// TP + FN == 0; recall reported as 0.
  bool recall_undefined = false;
};

struct FoldMetrics {
  std::size_t fold_idx = 0;
  double accuracy = 0.0;
  /// Unweighted mean of per-class F1 over active classes.
  double macro_f1 = 0.0;
  /// Support-weighted mean of per-class F1.
  double weighted_f1 = 0.0;
  std::array<ClassScore, kNumClasses> per_class{};

  nlohmann::json to_json() const;
  static FoldMetrics from_json(const nlohmann::json &j);
};

struct EvaluationResult {
  FoldMetrics metrics;
  ConfusionMatrix confusion;
};

EvaluationResult compute_metrics(std::span<const KCLabel> truth,
                                 std::span<const KCLabel> predicted, std::size_t fold_idx = 0);

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

/// Sample mean and n-1 standard deviation; sd is 0 when n == 1.
MeanSd mean_sd(std::span<const double> values);

struct CvSummary {
  std::size_t n_folds = 0;
  /// Only one fold: SD is 0 by convention, not an estimate.
  bool single_fold = false;
  MeanSd accuracy, macro_f1, weighted_f1;
  std::array<MeanSd, kNumClasses> precision{}, recall{}, f1{};

  nlohmann::json to_json() const;
  static CvSummary from_json(const nlohmann::json &j);
};

CvSummary aggregate_cv(std::span<const FoldMetrics> per_fold);

/// Three decimals with the leading zero dropped: 0.8364 -> ".836", -0.5 -> "-.500".
std::string format_score(double value);
/// "mean ± sd" using format_score.
std::string format_mean_sd(const MeanSd &value);

// Distribution functions (regularized incomplete beta and gamma based).

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);
/// Regularized upper incomplete gamma Q(a, x).
double incomplete_gamma_upper(double a, double x);
double student_t_cdf(double t, double df);
/// P(F > f) for F(d1, d2).
double f_sf(double f, double d1, double d2);
/// P(X > x) for chi-square with df degrees of freedom.
double chi2_sf(double x, double df);
double normal_cdf(double z);

// Hypothesis tests.

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Two-sided paired t-test on a - b. Throws DegenerateInputError when sd(a-b) == 0.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct WilcoxonResult {
  double w = 0.0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  /// Nonzero differences.
  std::size_t n = 0;
  double p = 1.0;
  bool exact = true;
};

inline constexpr std::size_t kWilcoxonExactMaxN = 20;

/**
 * Two-sided signed-rank test on a - b. Zero differences are dropped, tied
 * magnitudes get midranks. For n <= 20 the p-value is exact over all 2^n
 * sign assignments (counted by dynamic programming over doubled rank sums);
 * above that a normal approximation with tie and continuity correction.
 * Throws DegenerateInputError when every difference is zero.
 */
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

struct FriedmanResult {
  double chi2 = 0.0;
  double df = 0.0;
  double p = 1.0;
  /// Every row fully tied; reported as chi2 = 0, p = 1.
  bool all_tied = false;
};

/// score_table[row = fold][column = model].
FriedmanResult friedman_test(const std::vector<std::vector<double>> &score_table);

/// Holm step-down adjustment, returned in input order.
std::vector<double> holm_correction(std::span<const double> p_values);
std::vector<double> bonferroni_correction(std::span<const double> p_values);

/// mean(a - b) / sd(a - b). Throws DegenerateInputError when sd == 0.
double cohens_d_paired(std::span<const double> a, std::span<const double> b);

enum class LeveneCenter { Mean, Median };

struct LeveneResult {
  double w = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p = 1.0;
};

LeveneResult levene_test(const std::vector<std::vector<double>> &groups,
                         LeveneCenter center = LeveneCenter::Mean);

/// Percentile bootstrap interval of the mean.
std::pair<double, double> bootstrap_ci(std::span<const double> scores, std::size_t resamples,
                                       double level, std::uint64_t seed);

struct BlandAltmanResult {
  double bias = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
  /// Per fold: (mean of the pair, a - b).
  std::vector<std::pair<double, double>> points;
};

BlandAltmanResult bland_altman(std::span<const double> a, std::span<const double> b);

/// Pairwise comparison of two models' fold-level scores.
struct ComparisonReport {
  std::string model_a;
  std::string model_b;
  double delta_mean = 0.0;
  std::optional<double> t;
  std::optional<double> p_ttest;
  std::optional<double> w;
  std::optional<double> p_wilcoxon;
  /// Raw p of the primary test (Wilcoxon when selected, else t); 1 when degenerate.
  double p_primary = 1.0;
  /// p_primary after the family-wise correction.
  double p_adjusted = 1.0;
  std::optional<double> cohens_d;
  std::pair<double, double> ci95{0.0, 0.0};
  /// "identical", "significant" or "not significant".
  std::string verdict;
  std::vector<std::string> notes;

  bool significant() const { return verdict == "significant"; }
  /// Sets p_adjusted and recomputes the verdict from it.
  void set_adjusted(double p);
  nlohmann::json to_json() const;
};

struct PairTests {
  bool ttest = true;
  bool wilcoxon = true;
};

/**
 * Runs the selected tests, effect size and a bootstrap CI of the mean
 * difference. p_adjusted is set to the raw primary p; callers apply the
 * family-wise correction. Degenerate statistics are recorded as absent with
 * a note; a pair whose differences are all zero gets verdict "identical".
 */
ComparisonReport compare_pair(const std::string &name_a, std::span<const double> a,
                              const std::string &name_b, std::span<const double> b,
                              PairTests tests, std::size_t bootstrap_resamples,
                              std::uint64_t seed);

inline constexpr double kSignificanceLevel = 0.05;

} // namespace kc::stats
