#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance suite. Each one recomputes a library result by the most direct
// route available (explicit enumeration, plain normal equations) and shares
// no code with the implementation it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "levelscope/classifier.hpp"
#include "levelscope/ieds.hpp"
#include "levelscope/stats.hpp"

namespace levelscope::oracle {

// ---- guessing oracle: pure dominance on the explicit 100x100 table --------

// |s - (num/den) t| compared as integers: |s*den - num*t|.
inline std::int64_t scaled_distance(int s, int t, std::int64_t num, std::int64_t den) {
  const std::int64_t d = s * den - num * t;
  return d < 0 ? -d : d;
}

inline std::vector<std::set<int>> brute_force_guess_rounds(const Rational& p) {
  std::set<int> current;
  for (int s = 1; s <= 100; ++s) current.insert(s);
  std::vector<std::set<int>> rounds{current};
  while (true) {
    std::set<int> next;
    for (int s : current) {
      bool dominated = false;
      for (int alt : current) {
        if (alt == s) continue;
        bool better_everywhere = true;
        for (int t : current) {
          if (scaled_distance(alt, t, p.numerator(), p.denominator()) >=
              scaled_distance(s, t, p.numerator(), p.denominator())) {
            better_everywhere = false;
            break;
          }
        }
        if (better_everywhere) {
          dominated = true;
          break;
        }
      }
      if (!dominated) next.insert(s);
    }
    if (next == current) break;
    current = next;
    rounds.push_back(current);
  }
  return rounds;
}

// ---- ring oracle: dominance by a single action or a two-action mixture ----

inline bool pure_dominates(const PayoffMatrix& m, RingAction by, RingAction s, const ActionSet& cols) {
  return std::all_of(cols.begin(), cols.end(), [&](RingAction t) {
    return m[index_of(by)][index_of(t)] > m[index_of(s)][index_of(t)];
  });
}

// Is there lambda in [0,1] with lambda*u1 + (1-lambda)*u2 > u_s on every column?
inline bool mixture_dominates(const PayoffMatrix& m, RingAction o1, RingAction o2, RingAction s,
                       const ActionSet& cols) {
  std::vector<Rational> critical{Rational(0), Rational(1)};
  for (RingAction t : cols) {
    const int d1 = m[index_of(o1)][index_of(t)] - m[index_of(s)][index_of(t)];
    const int d2 = m[index_of(o2)][index_of(t)] - m[index_of(s)][index_of(t)];
    if (d1 != d2) {
      const Rational lambda(-d2, d1 - d2);
      if (lambda > 0 && lambda < 1) critical.push_back(lambda);
    }
  }
  std::sort(critical.begin(), critical.end());
  std::vector<Rational> candidates = critical;
  for (std::size_t i = 0; i + 1 < critical.size(); ++i) {
    candidates.push_back((critical[i] + critical[i + 1]) / 2);
  }
  for (const auto& lambda : candidates) {
    const bool ok = std::all_of(cols.begin(), cols.end(), [&](RingAction t) {
      const Rational d1(m[index_of(o1)][index_of(t)] - m[index_of(s)][index_of(t)]);
      const Rational d2(m[index_of(o2)][index_of(t)] - m[index_of(s)][index_of(t)]);
      return lambda * d1 + (Rational(1) - lambda) * d2 > 0;
    });
    if (ok) return true;
  }
  return false;
}

inline bool oracle_dominated(const PayoffMatrix& m, RingAction s, const ActionSet& own,
                      const ActionSet& cols) {
  std::vector<RingAction> others;
  for (RingAction o : own) {
    if (o != s) others.push_back(o);
  }
  for (RingAction o : others) {
    if (pure_dominates(m, o, s, cols)) return true;
  }
  if (others.size() == 2 && mixture_dominates(m, others[0], others[1], s, cols)) return true;
  return false;
}

inline std::vector<std::array<ActionSet, 4>> oracle_rounds(const RingGameMatrices& ms) {
  std::array<ActionSet, 4> current;
  for (auto& s : current) s = {RingAction::a, RingAction::b, RingAction::c};
  std::vector<std::array<ActionSet, 4>> rounds{current};
  while (true) {
    std::array<ActionSet, 4> next_round;
    for (Position p : kPositions) {
      for (RingAction s : current[index_of(p)]) {
        if (!oracle_dominated(ms[index_of(p)], s, current[index_of(p)],
                              current[index_of(next(p))])) {
          next_round[index_of(p)].push_back(s);
        }
      }
    }
    if (next_round == current) break;
    current = next_round;
    rounds.push_back(current);
  }
  return rounds;
}

inline RingGameMatrices random_game(std::mt19937_64& rng, int max_entry) {
  std::uniform_int_distribution<int> entry(0, max_entry);
  RingGameMatrices ms{};
  for (auto& m : ms) {
    for (auto& row : m) {
      for (auto& v : row) v = entry(rng);
    }
  }
  return ms;
}

// ---- classification: deepest elimination round every choice survives ------

inline RingChoiceProfile all_profile(std::size_t code) {
  RingChoiceProfile profile;
  for (std::size_t i = 0; i < 4; ++i) {
    profile.pairs[i].g1 = kRingActions[code % 3];
    code /= 3;
    profile.pairs[i].g2 = kRingActions[code % 3];
    code /= 3;
  }
  return profile;
}

inline bool member(const ActionSet& set, RingAction x) {
  return std::find(set.begin(), set.end(), x) != set.end();
}

inline int ring_level(const RingRationalizable& elim, const RingChoiceProfile& profile) {
  int level = 0;
  for (std::size_t k = 1; k <= 4; ++k) {
    bool survives = true;
    for (Position p : kPositions) {
      survives = survives && member(elim.g1.survivors(p, k), profile.at(p).g1) &&
                 member(elim.g2.survivors(p, k), profile.at(p).g2);
    }
    if (!survives) break;
    level = static_cast<int>(k);
  }
  return level;
}

// ---- pair statistics ------------------------------------------------------

inline int sign(int v) { return (v > 0) - (v < 0); }

// Materializes every subject and enumerates all pairs.
inline PairStats brute_force_pairs(const JointLevelTable& table) {
  std::vector<std::pair<int, int>> subjects;
  for (int r = 0; r < 5; ++r) {
    for (int g = 0; g < 5; ++g) {
      for (std::int64_t k = 0; k < table.counts[r][g]; ++k) subjects.emplace_back(r, g);
    }
  }
  PairStats out;
  out.n = static_cast<std::int64_t>(subjects.size());
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    for (std::size_t j = i + 1; j < subjects.size(); ++j) {
      const auto [ri, gi] = subjects[i];
      const auto [rj, gj] = subjects[j];
      ++out.pairs;
      const int prod = (ri - rj) * (gi - gj);
      if (prod < 0) ++out.switch_pairs;
      if (prod > 0) ++out.nonswitch_pairs;
      const int si = sign(gi - ri);
      const int sj = sign(gj - rj);
      if (si != 0 && si == sj) ++out.same_dir_pairs;
      if (si != 0 && sj != 0 && si != sj) ++out.opp_dir_pairs;
    }
  }
  return out;
}

// ---- OLS with clustered errors ---------------------------------------------

// Gaussian elimination with partial pivoting on plain vectors.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

inline std::vector<std::vector<double>> inverse(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    const auto col = solve(a, e);
    for (std::size_t i = 0; i < n; ++i) inv[i][j] = col[i];
  }
  return inv;
}

struct OracleOls {
  std::vector<double> beta;
  std::vector<double> se;
};

inline OracleOls oracle_ols(const std::vector<double>& y, const std::vector<std::vector<double>>& x,
                     const std::vector<std::string>& cluster) {
  const std::size_t n = y.size();
  const std::size_t k = x[0].size();
  std::vector<std::vector<double>> xtx(k, std::vector<double>(k, 0.0));
  std::vector<double> xty(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      xty[a] += x[i][a] * y[i];
      for (std::size_t b = 0; b < k; ++b) xtx[a][b] += x[i][a] * x[i][b];
    }
  }
  OracleOls out;
  out.beta = solve(xtx, xty);
  std::map<std::string, std::vector<double>> scores;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = 0;
    for (std::size_t a = 0; a < k; ++a) fit += x[i][a] * out.beta[a];
    auto& s = scores[cluster[i]];
    s.resize(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) s[a] += x[i][a] * (y[i] - fit);
  }
  std::vector<std::vector<double>> meat(k, std::vector<double>(k, 0.0));
  for (const auto& [id, s] : scores) {
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) meat[a][b] += s[a] * s[b];
    }
  }
  const auto bread = inverse(xtx);
  const double g = static_cast<double>(scores.size());
  const double factor = g / (g - 1) * (static_cast<double>(n) - 1) /
                        (static_cast<double>(n) - static_cast<double>(k));
  for (std::size_t a = 0; a < k; ++a) {
    double v = 0;
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = 0; q < k; ++q) v += bread[a][p] * meat[p][q] * bread[q][a];
    }
    out.se.push_back(std::sqrt(factor * v));
  }
  return out;
}

}  // namespace levelscope::oracle
