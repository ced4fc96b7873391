#pragma once

// Statistical procedures: level-table statistics and their Monte Carlo
// nulls, two-sample KS, Wilcoxon signed-rank, chi-square homogeneity and OLS
// with cluster-robust standard errors.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "levelscope/rational.hpp"
#include "levelscope/tables.hpp"

namespace levelscope {

// ---- level-table statistics -------------------------------------------------

// Share of subjects on the diagonal.
Rational constant_level_freq(const JointLevelTable& table);

// Frequencies over all unordered subject pairs. With r the row level and g
// the column level: a pair switches when (r_i - r_j)(g_i - g_j) < 0 and does
// not switch when it is > 0; it moves in the same direction when
// sign(g_i - r_i) = sign(g_j - r_j) != 0 and in opposite directions when both
// signs are nonzero and differ.
struct PairStats {
  std::int64_t n = 0;
  std::int64_t pairs = 0;
  std::int64_t switch_pairs = 0;
  std::int64_t nonswitch_pairs = 0;
  std::int64_t same_dir_pairs = 0;
  std::int64_t opp_dir_pairs = 0;

  Rational switch_freq() const { return Rational(switch_pairs, pairs); }
  Rational nonswitch_freq() const { return Rational(nonswitch_pairs, pairs); }
  Rational same_dir_freq() const { return Rational(same_dir_pairs, pairs); }
  Rational opp_dir_freq() const { return Rational(opp_dir_pairs, pairs); }
  // Throw DomainError when the denominator is zero.
  Rational switch_ratio() const;
  Rational opposite_same_ratio() const;

  nlohmann::json to_json() const;
};

// Closed-form count algebra over the 25 cells; throws DomainError if n < 2.
PairStats pair_stats(const JointLevelTable& table);

enum class NullStatistic {
  constant_level,
  switch_freq,
  nonswitch_freq,
  switch_ratio,
  same_dir_freq,
  opp_dir_freq,
  opposite_same_ratio,
};
std::string to_string(NullStatistic statistic);
std::optional<NullStatistic> parse_null_statistic(std::string_view text);
// True when small values are the evidence against independence.
bool lower_tail(NullStatistic statistic);

double evaluate_statistic(NullStatistic statistic, const JointLevelTable& table);

struct NullSimConfig {
  // Both levels of each simulated subject are drawn from `marginal` unless
  // `col_marginal` is set, in which case the second level comes from it.
  std::array<std::int64_t, 5> marginal{};
  std::optional<std::array<std::int64_t, 5>> col_marginal;
  std::int64_t n_subjects = 0;  // 0 means the marginal's total
  NullStatistic statistic = NullStatistic::constant_level;
  std::size_t draws = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct NullSimResult {
  NullStatistic statistic = NullStatistic::constant_level;
  std::size_t draws = 0;
  std::uint64_t seed = 0;
  std::vector<double> samples;  // indexed by draw
  double mean = 0;
  double std_dev = 0;
  double std_error = 0;  // of the mean
  double interval_low = 0;   // order statistic floor(0.025 N)
  double interval_high = 0;  // order statistic ceil(0.975 N) - 1
  std::optional<double> observed;
  std::optional<double> p_one_sided;
  std::optional<double> p_two_sided;  // min(1, 2 * one-sided)

  nlohmann::json to_json(bool include_samples = false) const;
};

// Each draw uses its own random substream, so the samples are identical for
// any worker count.
NullSimResult simulate_null(const NullSimConfig& config,
                            const std::optional<JointLevelTable>& observed = std::nullopt);

// Exact expectations under independent draws from one marginal q:
// constant level = sum q^2; every pair frequency = (1 - sum q^2)^2 / 2.
Rational null_constant_level(const std::array<std::int64_t, 5>& marginal);
Rational null_pair_frequency(const std::array<std::int64_t, 5>& marginal);

// ---- classical tests -------------------------------------------------------

struct KsResult {
  double statistic = 0;  // D
  double p_value = 0;    // asymptotic
  std::optional<double> p_exact;  // when both samples have <= 30 points
  std::size_t n = 0;
  std::size_t m = 0;

  nlohmann::json to_json() const;
};

// Kolmogorov distribution tail P(K > lambda).
double kolmogorov_tail(double lambda);

KsResult ks_two_sample(const std::vector<double>& x, const std::vector<double>& y);

enum class ZeroMethod { wilcoxon, pratt };

struct WilcoxonResult {
  double w_plus = 0;   // sum of ranks of positive differences (after - before)
  double w_minus = 0;
  std::size_t n_used = 0;  // differences entering the ranking
  std::size_t n_zero = 0;
  double z = 0;
  double p_greater = 0;  // one-sided: after tends to exceed before
  double p_two_sided = 0;

  nlohmann::json to_json() const;
};

WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs,
                                    ZeroMethod zeros = ZeroMethod::wilcoxon);

struct ChiSquareResult {
  double statistic = 0;
  int df = 0;
  double p_value = 0;
  std::vector<std::size_t> dropped;  // categories empty in both samples

  nlohmann::json to_json() const;
};

ChiSquareResult chi_square_homogeneity(const std::vector<std::int64_t>& a,
                                       const std::vector<std::int64_t>& b);

// Standard normal upper tail and chi-square upper tail.
double normal_upper_tail(double z);
double chi_square_upper_tail(double x, int df);

struct OlsResult {
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<std::vector<double>> covariance;
  double r_squared = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t clusters = 0;

  nlohmann::json to_json(const std::vector<std::string>& names = {}) const;
};

// rows[i] is the regressor vector of observation i (include a constant
// column explicitly). Covariance is the cluster sandwich scaled by
// G/(G-1) * (N-1)/(N-K). Throws DomainError on rank deficiency or fewer
// than two clusters.
OlsResult ols_clustered(const std::vector<double>& y, const std::vector<std::vector<double>>& rows,
                        const std::vector<std::string>& clusters);

}  // namespace levelscope
