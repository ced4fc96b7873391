#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "levelscope/error.hpp"
#include "levelscope/rng.hpp"
#include "levelscope/stats.hpp"

namespace levelscope {

Rational constant_level_freq(const JointLevelTable& table) {
  const auto n = table.n();
  if (n <= 0) throw DomainError("constant-level frequency of an empty table");
  return Rational(table.diagonal(), n);
}

Rational PairStats::switch_ratio() const {
  if (nonswitch_pairs == 0) throw DomainError("switch ratio undefined: no non-switch pairs");
  return Rational(switch_pairs, nonswitch_pairs);
}

Rational PairStats::opposite_same_ratio() const {
  if (same_dir_pairs == 0) throw DomainError("opposite/same ratio undefined: no same-direction pairs");
  return Rational(opp_dir_pairs, same_dir_pairs);
}

nlohmann::json PairStats::to_json() const {
  nlohmann::json doc = {{"n", n},
                        {"pairs", pairs},
                        {"switch_pairs", switch_pairs},
                        {"nonswitch_pairs", nonswitch_pairs},
                        {"same_dir_pairs", same_dir_pairs},
                        {"opp_dir_pairs", opp_dir_pairs},
                        {"switch_freq", to_double(switch_freq())},
                        {"nonswitch_freq", to_double(nonswitch_freq())},
                        {"same_dir_freq", to_double(same_dir_freq())},
                        {"opp_dir_freq", to_double(opp_dir_freq())}};
  doc["switch_ratio"] = nonswitch_pairs ? nlohmann::json(to_double(switch_ratio())) : nullptr;
  doc["opposite_same_ratio"] =
      same_dir_pairs ? nlohmann::json(to_double(opposite_same_ratio())) : nullptr;
  return doc;
}

PairStats pair_stats(const JointLevelTable& table) {
  PairStats out;
  out.n = table.n();
  if (out.n < 2) throw DomainError("pair statistics need at least two subjects");
  out.pairs = out.n * (out.n - 1) / 2;
  const auto& c = table.counts;
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t g = 0; g < 5; ++g) {
      if (c[r][g] == 0) continue;
      for (std::size_t r2 = r + 1; r2 < 5; ++r2) {
        for (std::size_t g2 = 0; g2 < 5; ++g2) {
          if (g2 > g) out.nonswitch_pairs += c[r][g] * c[r2][g2];
          if (g2 < g) out.switch_pairs += c[r][g] * c[r2][g2];
        }
      }
    }
  }
  std::int64_t up = 0;
  std::int64_t down = 0;
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t g = 0; g < 5; ++g) {
      if (g > r) up += c[r][g];
      if (g < r) down += c[r][g];
    }
  }
  out.same_dir_pairs = up * (up - 1) / 2 + down * (down - 1) / 2;
  out.opp_dir_pairs = up * down;
  return out;
}

std::string to_string(NullStatistic statistic) {
  switch (statistic) {
    case NullStatistic::constant_level: return "constant_level";
    case NullStatistic::switch_freq: return "switch_freq";
    case NullStatistic::nonswitch_freq: return "nonswitch_freq";
    case NullStatistic::switch_ratio: return "switch_ratio";
    case NullStatistic::same_dir_freq: return "same_dir_freq";
    case NullStatistic::opp_dir_freq: return "opp_dir_freq";
    case NullStatistic::opposite_same_ratio: return "opposite_same_ratio";
  }
  return "?";
}

std::optional<NullStatistic> parse_null_statistic(std::string_view text) {
  for (auto s : {NullStatistic::constant_level, NullStatistic::switch_freq,
                 NullStatistic::nonswitch_freq, NullStatistic::switch_ratio,
                 NullStatistic::same_dir_freq, NullStatistic::opp_dir_freq,
                 NullStatistic::opposite_same_ratio}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

bool lower_tail(NullStatistic statistic) {
  switch (statistic) {
    case NullStatistic::constant_level:
    case NullStatistic::nonswitch_freq:
    case NullStatistic::same_dir_freq:
      return false;
    default:
      return true;
  }
}

namespace {

// A ratio with an empty denominator is reported as +infinity.
double ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::numeric_limits<double>::infinity();
  return to_double(Rational(num, den));
}

}  // namespace

double evaluate_statistic(NullStatistic statistic, const JointLevelTable& table) {
  if (statistic == NullStatistic::constant_level) return to_double(constant_level_freq(table));
  const auto ps = pair_stats(table);
  switch (statistic) {
    case NullStatistic::switch_freq: return to_double(ps.switch_freq());
    case NullStatistic::nonswitch_freq: return to_double(ps.nonswitch_freq());
    case NullStatistic::switch_ratio: return ratio(ps.switch_pairs, ps.nonswitch_pairs);
    case NullStatistic::same_dir_freq: return to_double(ps.same_dir_freq());
    case NullStatistic::opp_dir_freq: return to_double(ps.opp_dir_freq());
    case NullStatistic::opposite_same_ratio: return ratio(ps.opp_dir_pairs, ps.same_dir_pairs);
    default: break;
  }
  return 0;
}

nlohmann::json NullSimResult::to_json(bool include_samples) const {
  nlohmann::json doc = {{"statistic", to_string(statistic)},
                        {"draws", draws},
                        {"seed", seed},
                        {"mean", mean},
                        {"std_dev", std_dev},
                        {"std_error", std_error},
                        {"interval", {interval_low, interval_high}},
                        {"tail", lower_tail(statistic) ? "lower" : "upper"}};
  doc["observed"] = observed ? nlohmann::json(*observed) : nullptr;
  doc["p_one_sided"] = p_one_sided ? nlohmann::json(*p_one_sided) : nullptr;
  doc["p_two_sided"] = p_two_sided ? nlohmann::json(*p_two_sided) : nullptr;
  if (include_samples) doc["samples"] = samples;
  return doc;
}

namespace {

std::int64_t total(const std::array<std::int64_t, 5>& marginal) {
  std::int64_t sum = 0;
  for (auto v : marginal) {
    if (v < 0) throw DomainError("marginal counts must be non-negative");
    sum += v;
  }
  return sum;
}

Level draw_level(Rng& rng, const std::array<std::int64_t, 5>& marginal, std::int64_t sum) {
  auto u = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(sum)));
  for (std::size_t k = 0; k < 5; ++k) {
    if (u < marginal[k]) return level_from_int(static_cast<int>(k));
    u -= marginal[k];
  }
  return Level::R4;  // unreachable
}

}  // namespace

NullSimResult simulate_null(const NullSimConfig& config,
                            const std::optional<JointLevelTable>& observed) {
  const auto row_total = total(config.marginal);
  const auto& col_marginal = config.col_marginal ? *config.col_marginal : config.marginal;
  const auto col_total = total(col_marginal);
  if (row_total == 0 || col_total == 0) throw DomainError("null marginal is empty");
  if (config.draws == 0) throw DomainError("null simulation needs at least one draw");
  const std::int64_t n = config.n_subjects ? config.n_subjects : row_total;
  if (n < 2 && config.statistic != NullStatistic::constant_level) {
    throw DomainError("pair statistics need at least two simulated subjects");
  }

  NullSimResult result;
  result.statistic = config.statistic;
  result.draws = config.draws;
  result.seed = config.seed;
  result.samples.assign(config.draws, 0.0);

  const auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t d = first; d < config.draws; d += stride) {
      Rng rng = substream(config.seed, streams::kNullSimulation, d);
      JointLevelTable table;
      for (std::int64_t i = 0; i < n; ++i) {
        const Level row = draw_level(rng, config.marginal, row_total);
        const Level col = draw_level(rng, col_marginal, col_total);
        table.add(row, col);
      }
      result.samples[d] = evaluate_statistic(config.statistic, table);
    }
  };
  const unsigned workers = std::max(1u, config.workers);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, w, workers);
    for (auto& t : threads) t.join();
  }

  // Reductions run sequentially in draw order so they are reproducible.
  const auto count = static_cast<double>(config.draws);
  double sum = 0;
  for (double s : result.samples) sum += s;
  result.mean = sum / count;
  double ss = 0;
  for (double s : result.samples) ss += (s - result.mean) * (s - result.mean);
  result.std_dev = config.draws > 1 ? std::sqrt(ss / (count - 1)) : 0.0;
  result.std_error = result.std_dev / std::sqrt(count);

  auto sorted = result.samples;
  std::sort(sorted.begin(), sorted.end());
  const auto lo = static_cast<std::size_t>(std::floor(0.025 * count));
  const auto hi_raw = static_cast<std::size_t>(std::ceil(0.975 * count));
  const auto hi = hi_raw == 0 ? 0 : hi_raw - 1;
  result.interval_low = sorted[std::min(lo, sorted.size() - 1)];
  result.interval_high = sorted[std::min(hi, sorted.size() - 1)];

  if (observed) {
    const double obs = evaluate_statistic(config.statistic, *observed);
    result.observed = obs;
    std::size_t extreme = 0;
    for (double s : result.samples) {
      if (lower_tail(config.statistic) ? s <= obs : s >= obs) ++extreme;
    }
    result.p_one_sided = static_cast<double>(extreme) / count;
    result.p_two_sided = std::min(1.0, 2.0 * *result.p_one_sided);
  }
  return result;
}

Rational null_constant_level(const std::array<std::int64_t, 5>& marginal) {
  const auto n = total(marginal);
  if (n == 0) throw DomainError("null marginal is empty");
  Rational sum(0);
  for (auto v : marginal) sum += Rational(v * v, n * n);
  return sum;
}

Rational null_pair_frequency(const std::array<std::int64_t, 5>& marginal) {
  const Rational differ = Rational(1) - null_constant_level(marginal);
  return differ * differ / 2;
}

}  // namespace levelscope
