#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "levelscope/error.hpp"
#include "levelscope/stats.hpp"

namespace levelscope {

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double chi_square_upper_tail(double x, int df) {
  if (df <= 0) throw DomainError("chi-square needs positive degrees of freedom");
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

// ---- Kolmogorov-Smirnov ----------------------------------------------------

double kolmogorov_tail(double lambda) {
  if (lambda <= 0) return 1.0;
  constexpr double kPi = 3.14159265358979323846;
  if (lambda < 1.18) {
    // Theta-function form converges fast for small lambda.
    double cdf = 0;
    for (int k = 1; k <= 50; ++k) {
      const double t = (2 * k - 1) * kPi / lambda;
      cdf += std::exp(-t * t / 8.0);
    }
    cdf *= std::sqrt(2 * kPi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double tail = 0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    tail += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(tail, 0.0, 1.0);
}

nlohmann::json KsResult::to_json() const {
  nlohmann::json doc = {{"D", statistic}, {"p_value", p_value}, {"n", n}, {"m", m}};
  doc["p_exact"] = p_exact ? nlohmann::json(*p_exact) : nullptr;
  return doc;
}

namespace {

constexpr std::size_t kExactKsLimit = 30;

// Probability, over random relabelings of the pooled sample, that the CDF gap
// reaches `gap` (in units of 1/(n m)). The gap is only observed where the
// pooled value changes, so ties are respected.
double ks_exact_p(const std::vector<double>& pooled, std::size_t n, std::size_t m,
                  std::int64_t gap) {
  const std::size_t total = n + m;
  std::vector<std::vector<long double>> paths(n + 1, std::vector<long double>(m + 1, 0.0L));
  paths[0][0] = 1.0L;
  const auto blocked = [&](std::size_t i, std::size_t j) {
    const std::size_t k = i + j;
    if (k == 0) return false;
    const bool boundary = k == total || pooled[k - 1] != pooled[k];
    const auto diff = static_cast<std::int64_t>(i * m) - static_cast<std::int64_t>(j * n);
    return boundary && std::llabs(diff) >= gap;
  };
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      if (i == 0 && j == 0) continue;
      if (blocked(i, j)) continue;
      long double v = 0;
      if (i > 0) v += paths[i - 1][j];
      if (j > 0) v += paths[i][j - 1];
      paths[i][j] = v;
    }
  }
  long double all = 1.0L;  // C(n + m, n)
  for (std::size_t k = 1; k <= n; ++k) all = all * static_cast<long double>(m + k) / k;
  return std::clamp(static_cast<double>(1.0L - paths[n][m] / all), 0.0, 1.0);
}

}  // namespace

KsResult ks_two_sample(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() || y.empty()) throw DomainError("KS test needs two non-empty samples");
  auto xs = x;
  auto ys = y;
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const std::size_t n = xs.size();
  const std::size_t m = ys.size();

  std::int64_t gap = 0;  // max |i m - j n|
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    double v;
    if (j >= m || (i < n && xs[i] <= ys[j])) {
      v = xs[i];
    } else {
      v = ys[j];
    }
    while (i < n && xs[i] == v) ++i;
    while (j < m && ys[j] == v) ++j;
    gap = std::max<std::int64_t>(gap, std::llabs(static_cast<std::int64_t>(i * m) -
                                   static_cast<std::int64_t>(j * n)));
  }

  KsResult out;
  out.n = n;
  out.m = m;
  out.statistic = static_cast<double>(gap) / static_cast<double>(n * m);
  const double scale = std::sqrt(static_cast<double>(n * m) / static_cast<double>(n + m));
  out.p_value = gap == 0 ? 1.0 : kolmogorov_tail(scale * out.statistic);
  if (n <= kExactKsLimit && m <= kExactKsLimit) {
    if (gap == 0) {
      out.p_exact = 1.0;
    } else {
      std::vector<double> pooled = xs;
      pooled.insert(pooled.end(), ys.begin(), ys.end());
      std::sort(pooled.begin(), pooled.end());
      out.p_exact = ks_exact_p(pooled, n, m, gap);
    }
  }
  return out;
}

// ---- Wilcoxon signed-rank --------------------------------------------------

nlohmann::json WilcoxonResult::to_json() const {
  return {{"w_plus", w_plus},       {"w_minus", w_minus},         {"n_used", n_used},
          {"n_zero", n_zero},       {"z", z},                     {"p_greater", p_greater},
          {"p_two_sided", p_two_sided}};
}

namespace {

// Average ranks (1-based) of the values.
std::vector<double> average_ranks(const std::vector<double>& values,
                                  std::vector<std::size_t>* tie_sizes) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  std::vector<double> ranks(values.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && values[order[end]] == values[order[start]]) ++end;
    const double avg = (static_cast<double>(start + 1) + static_cast<double>(end)) / 2.0;
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = avg;
    if (tie_sizes) tie_sizes->push_back(end - start);
    start = end;
  }
  return ranks;
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs,
                                    ZeroMethod zeros) {
  std::vector<double> diffs;
  for (const auto& [before, after] : pairs) diffs.push_back(after - before);

  WilcoxonResult out;
  out.n_zero = static_cast<std::size_t>(std::count(diffs.begin(), diffs.end(), 0.0));
  if (out.n_zero == diffs.size()) {
    throw DomainError("Wilcoxon signed-rank test needs at least one nonzero difference");
  }

  std::vector<double> ranked;  // differences that take part in the ranking
  for (double d : diffs) {
    if (zeros == ZeroMethod::pratt || d != 0) ranked.push_back(d);
  }
  std::vector<double> magnitudes;
  for (double d : ranked) magnitudes.push_back(std::fabs(d));
  const auto ranks = average_ranks(magnitudes, nullptr);

  std::vector<double> nonzero_ranks;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (ranked[k] > 0) out.w_plus += ranks[k];
    if (ranked[k] < 0) out.w_minus += ranks[k];
    if (ranked[k] != 0) nonzero_ranks.push_back(ranks[k]);
  }

  const auto count = static_cast<double>(ranked.size());
  double mean = count * (count + 1) / 4.0;
  double var24 = count * (count + 1) * (2 * count + 1);
  if (zeros == ZeroMethod::pratt) {
    const auto z0 = static_cast<double>(out.n_zero);
    mean -= z0 * (z0 + 1) / 4.0;
    var24 -= z0 * (z0 + 1) * (2 * z0 + 1);
  }
  std::vector<std::size_t> ties;
  average_ranks(nonzero_ranks, &ties);
  for (auto t : ties) {
    const auto tt = static_cast<double>(t);
    var24 -= 0.5 * tt * (tt * tt - 1);
  }
  out.n_used = ranked.size();
  const double sd = std::sqrt(var24 / 24.0);
  out.z = sd > 0 ? (out.w_plus - mean) / sd : 0.0;
  out.p_greater = normal_upper_tail(out.z);
  out.p_two_sided = std::min(1.0, 2.0 * normal_upper_tail(std::fabs(out.z)));
  return out;
}

// ---- chi-square homogeneity ------------------------------------------------

nlohmann::json ChiSquareResult::to_json() const {
  return {{"statistic", statistic}, {"df", df}, {"p_value", p_value}, {"dropped", dropped}};
}

ChiSquareResult chi_square_homogeneity(const std::vector<std::int64_t>& a,
                                       const std::vector<std::int64_t>& b) {
  if (a.size() != b.size()) throw DomainError("chi-square samples need the same categories");
  ChiSquareResult out;
  std::vector<std::size_t> kept;
  double total_a = 0;
  double total_b = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] < 0 || b[k] < 0) throw DomainError("chi-square counts must be non-negative");
    if (a[k] + b[k] == 0) {
      out.dropped.push_back(k);
    } else {
      kept.push_back(k);
    }
    total_a += static_cast<double>(a[k]);
    total_b += static_cast<double>(b[k]);
  }
  if (kept.size() < 2) throw DomainError("chi-square needs at least two non-empty categories");
  if (total_a == 0 || total_b == 0) throw DomainError("chi-square needs two non-empty samples");
  const double grand = total_a + total_b;
  for (std::size_t k : kept) {
    const double col = static_cast<double>(a[k] + b[k]);
    const double ea = total_a * col / grand;
    const double eb = total_b * col / grand;
    out.statistic += (static_cast<double>(a[k]) - ea) * (static_cast<double>(a[k]) - ea) / ea;
    out.statistic += (static_cast<double>(b[k]) - eb) * (static_cast<double>(b[k]) - eb) / eb;
  }
  out.df = static_cast<int>(kept.size()) - 1;
  out.p_value = chi_square_upper_tail(out.statistic, out.df);
  return out;
}

// ---- OLS with clustered errors ---------------------------------------------

nlohmann::json OlsResult::to_json(const std::vector<std::string>& names) const {
  nlohmann::json coefs = nlohmann::json::array();
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    coefs.push_back({{"name", j < names.size() ? names[j] : "x" + std::to_string(j)},
                     {"estimate", coefficients[j]},
                     {"std_error", std_errors[j]}});
  }
  return {{"coefficients", coefs}, {"r_squared", r_squared}, {"n", n},
          {"k", k},                {"clusters", clusters}};
}

OlsResult ols_clustered(const std::vector<double>& y, const std::vector<std::vector<double>>& rows,
                        const std::vector<std::string>& clusters) {
  const std::size_t n = y.size();
  if (rows.size() != n || clusters.size() != n) {
    throw DomainError("OLS inputs must have one row and one cluster id per observation");
  }
  if (n == 0) throw DomainError("OLS needs observations");
  const std::size_t k = rows.front().size();
  if (k == 0) throw DomainError("OLS needs at least one regressor");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  Eigen::VectorXd yy(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != k) throw DomainError("OLS design rows differ in length");
    for (std::size_t j = 0; j < k; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    yy(static_cast<Eigen::Index>(i)) = y[i];
  }
  if (n <= k) throw DomainError("OLS needs more observations than regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (static_cast<std::size_t>(qr.rank()) < k) {
    throw DomainError("OLS design matrix is rank deficient");
  }

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[clusters[i]].push_back(i);
  if (groups.size() < 2) throw DomainError("clustered errors need at least two clusters");

  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::MatrixXd bread = xtx.inverse();
  const Eigen::VectorXd beta = xtx.ldlt().solve(x.transpose() * yy);
  const Eigen::VectorXd resid = yy - x * beta;

  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                               static_cast<Eigen::Index>(k));
  for (const auto& [id, members] : groups) {
    Eigen::VectorXd score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    for (std::size_t i : members) {
      score += x.row(static_cast<Eigen::Index>(i)).transpose() * resid(static_cast<Eigen::Index>(i));
    }
    meat += score * score.transpose();
  }
  const double g = static_cast<double>(groups.size());
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double factor = g / (g - 1.0) * (nn - 1.0) / (nn - kk);
  const Eigen::MatrixXd cov = factor * bread * meat * bread;

  OlsResult out;
  out.n = n;
  out.k = k;
  out.clusters = groups.size();
  out.coefficients.resize(k);
  out.std_errors.resize(k);
  out.covariance.assign(k, std::vector<double>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out.coefficients[j] = beta(jj);
    out.std_errors[j] = std::sqrt(std::max(0.0, cov(jj, jj)));
    for (std::size_t l = 0; l < k; ++l) out.covariance[j][l] = cov(jj, static_cast<Eigen::Index>(l));
  }
  const double mean_y = yy.mean();
  const double sst = (yy.array() - mean_y).square().sum();
  const double ssr = resid.squaredNorm();
  out.r_squared = sst > 0 ? 1.0 - ssr / sst : 1.0;
  return out;
}

}  // namespace levelscope
