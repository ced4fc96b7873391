#include "levelscope/ieds.hpp"

#include <algorithm>

#include "levelscope/error.hpp"
#include "simplex_geometry.hpp"

namespace levelscope {

Level level_from_int(int value) {
  if (value < 0 || value > 4) throw DomainError("level must be 0..4, got " + std::to_string(value));
  return static_cast<Level>(value);
}

std::string to_string(Level level) { return "R" + std::to_string(to_int(level)); }

std::optional<Level> parse_level(std::string_view text) {
  if (text.size() == 2 && text[0] == 'R' && text[1] >= '0' && text[1] <= '4') {
    return static_cast<Level>(text[1] - '0');
  }
  return std::nullopt;
}

const ActionSet& RingElimination::survivors(Position position, std::size_t k) const {
  return rounds[std::min(k, rounds.size() - 1)][index_of(position)];
}

namespace {

bool contains(const ActionSet& set, RingAction action) {
  return std::find(set.begin(), set.end(), action) != set.end();
}

// True when `own` is a best response to some belief over `neighbor_set`,
// competing only against `own_set`. Equivalent to not being strictly
// dominated by any mixture over own_set.
bool is_best_response_somewhere(const PayoffMatrix& m, RingAction own, const ActionSet& own_set,
                                const ActionSet& neighbor_set) {
  auto poly = detail::full_simplex();
  for (RingAction j : kRingActions) {
    if (!contains(neighbor_set, j)) poly = detail::clip(poly, detail::excluded_form(index_of(j)));
  }
  for (RingAction other : own_set) {
    if (other == own) continue;
    poly = detail::clip(poly, detail::difference_form(m, own, other));
    if (poly.empty()) return false;
  }
  return !poly.empty();
}

bool is_purely_dominated(const PayoffMatrix& m, RingAction own, const ActionSet& own_set,
                         const ActionSet& neighbor_set) {
  for (RingAction other : own_set) {
    if (other == own) continue;
    bool dominates = true;
    for (RingAction t : neighbor_set) {
      if (m[index_of(other)][index_of(t)] <= m[index_of(own)][index_of(t)]) {
        dominates = false;
        break;
      }
    }
    if (dominates) return true;
  }
  return false;
}

}  // namespace

RingElimination eliminate_ring_game(const RingGameMatrices& matrices, GameId game,
                                    DominanceKind kind) {
  RingElimination result;
  result.game = game;
  std::array<ActionSet, 4> current;
  for (auto& set : current) set.assign(kRingActions.begin(), kRingActions.end());
  result.rounds.push_back(current);

  while (true) {
    std::array<ActionSet, 4> next_round;
    for (Position position : kPositions) {
      const auto& own_set = current[index_of(position)];
      const auto& neighbor_set = current[index_of(next(position))];
      const auto& m = matrices[index_of(position)];
      for (RingAction action : own_set) {
        const bool survives = kind == DominanceKind::mixed
                                  ? is_best_response_somewhere(m, action, own_set, neighbor_set)
                                  : !is_purely_dominated(m, action, own_set, neighbor_set);
        if (survives) next_round[index_of(position)].push_back(action);
      }
    }
    if (next_round == current) break;
    current = next_round;
    result.rounds.push_back(current);
  }
  return result;
}

RingRationalizable eliminate_ring(const RingSpec& spec, DominanceKind kind) {
  return {eliminate_ring_game(spec.matrices().g1, GameId::G1, kind),
          eliminate_ring_game(spec.matrices().g2, GameId::G2, kind)};
}

int GuessBounds::upper_after(std::size_t k) const { return upper[std::min(k, upper.size() - 1)]; }

std::pair<int, int> GuessBounds::interval(Level level) const {
  const auto k = static_cast<std::size_t>(to_int(level));
  if (level == Level::R4) return {kMinGuess, upper_after(4)};
  return {upper_after(k + 1) + 1, upper_after(k)};
}

Level GuessBounds::level_of(int guess) const {
  if (guess < kMinGuess || guess > kMaxGuess) {
    throw DomainError("guess must be in 1..100, got " + std::to_string(guess));
  }
  int level = 0;
  for (std::size_t k = 1; k <= 4; ++k) {
    if (guess <= upper_after(k)) level = static_cast<int>(k);
  }
  return level_from_int(level);
}

GuessBounds eliminate_guessing(const GuessingGame& game) {
  GuessBounds bounds;
  bounds.p = game.p();
  bounds.upper.push_back(kMaxGuess);
  while (true) {
    // Round half up: floor(U * p + 1/2), never below the smallest guess.
    const auto next_upper = static_cast<int>(std::max<std::int64_t>(
        kMinGuess, floor(game.p() * bounds.upper.back() + Rational(1, 2))));
    if (next_upper == bounds.upper.back()) break;
    bounds.upper.push_back(next_upper);
  }
  return bounds;
}

namespace {

void check_distribution(const std::vector<Rational>& probs) {
  Rational total(0);
  for (const auto& p : probs) {
    if (p < 0) throw DomainError("probabilities must be non-negative");
    total += p;
  }
  if (total != 1) throw DomainError("probabilities must sum to 1, got " + to_string(total));
}

}  // namespace

ActionSet best_response(const RingSpec& spec, GameId game, Position position,
                        const RingBelief& belief) {
  check_distribution({belief.begin(), belief.end()});
  const auto& m = spec.matrix(game, position);
  std::array<Rational, 3> expected;
  for (RingAction own : kRingActions) {
    Rational value(0);
    for (std::size_t j = 0; j < 3; ++j) value += belief[j] * m[index_of(own)][j];
    expected[index_of(own)] = value;
  }
  const auto best = *std::max_element(expected.begin(), expected.end());
  ActionSet result;
  for (RingAction own : kRingActions) {
    if (expected[index_of(own)] == best) result.push_back(own);
  }
  return result;
}

std::vector<int> best_response(const GuessingGame& game, const GuessBelief& belief) {
  std::vector<Rational> probs;
  for (const auto& [guess, prob] : belief) {
    if (guess < kMinGuess || guess > kMaxGuess) {
      throw DomainError("belief support must lie in 1..100");
    }
    probs.push_back(prob);
  }
  check_distribution(probs);
  // Maximizing expected payoff is minimizing expected |s - p t|.
  std::vector<Rational> loss(kMaxGuess + 1, Rational(0));
  Rational best(-1);
  for (int s = kMinGuess; s <= kMaxGuess; ++s) {
    Rational value(0);
    for (const auto& [t, prob] : belief) {
      if (prob != 0) value += prob * abs(Rational(s) - game.p() * t);
    }
    loss[static_cast<std::size_t>(s)] = value;
    if (best < 0 || value < best) best = value;
  }
  std::vector<int> result;
  for (int s = kMinGuess; s <= kMaxGuess; ++s) {
    if (loss[static_cast<std::size_t>(s)] == best) result.push_back(s);
  }
  return result;
}

Rational LinearForm::evaluate(const SimplexPoint& q) const {
  return Rational(coefficients[0]) * q[0] + Rational(coefficients[1]) * q[1] +
         Rational(coefficients[2]) * q[2];
}

ActionSet BrRegions::regions_containing(const SimplexPoint& q) const {
  ActionSet result;
  for (const auto& region : regions) {
    if (region.vertices.empty()) continue;
    const bool inside = std::all_of(region.inequalities.begin(), region.inequalities.end(),
                                    [&](const LinearForm& f) { return f.evaluate(q) >= 0; });
    if (inside) result.push_back(region.action);
  }
  return result;
}

BrRegions br_regions(const RingSpec& spec, GameId game, Position position) {
  BrRegions result;
  result.game = game;
  result.position = position;
  const auto& m = spec.matrix(game, position);
  for (RingAction own : kRingActions) {
    BrRegion region;
    region.action = own;
    auto poly = detail::full_simplex();
    for (RingAction other : kRingActions) {
      if (other == own) continue;
      const auto form = detail::difference_form(m, own, other);
      region.inequalities.push_back(form);
      poly = detail::clip(poly, form);
    }
    for (const auto& p : poly) region.vertices.push_back(detail::to_simplex(p));
    region.area = poly.size() >= 3 ? abs(detail::signed_area(poly)) : Rational(0);
    result.regions[index_of(own)] = std::move(region);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      result.boundaries.emplace_back(kRingActions[i], kRingActions[j],
                                     detail::difference_form(m, kRingActions[i], kRingActions[j]));
    }
  }
  return result;
}

nlohmann::json to_json(const RingRationalizable& result) {
  nlohmann::json doc = nlohmann::json::object();
  for (GameId game : kRingGames) {
    const auto& elim = result.game(game);
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& round : elim.rounds) {
      nlohmann::json entry = nlohmann::json::object();
      for (Position position : kPositions) {
        std::string actions;
        for (RingAction a : round[index_of(position)]) actions += to_char(a);
        entry[to_string(position)] = actions;
      }
      rounds.push_back(entry);
    }
    doc[to_string(game)] = {{"rounds", rounds}, {"fixed_point_round", elim.fixed_point_round()}};
  }
  return doc;
}

nlohmann::json to_json(const GuessBounds& bounds) {
  nlohmann::json intervals = nlohmann::json::object();
  for (Level level : kLevels) {
    const auto [lo, hi] = bounds.interval(level);
    intervals[to_string(level)] = {lo, hi};
  }
  return {{"p", to_string(bounds.p)}, {"upper", bounds.upper}, {"intervals", intervals}};
}

nlohmann::json to_json(const BrRegions& regions) {
  nlohmann::json doc;
  doc["game"] = to_string(regions.game);
  doc["position"] = to_string(regions.position);
  doc["regions"] = nlohmann::json::array();
  for (const auto& region : regions.regions) {
    nlohmann::json vertices = nlohmann::json::array();
    for (const auto& v : region.vertices) {
      vertices.push_back({to_string(v[0]), to_string(v[1]), to_string(v[2])});
    }
    nlohmann::json inequalities = nlohmann::json::array();
    for (const auto& f : region.inequalities) inequalities.push_back(f.coefficients);
    doc["regions"].push_back({{"action", std::string(1, to_char(region.action))},
                              {"inequalities", inequalities},
                              {"vertices", vertices},
                              {"area", to_string(region.area)}});
  }
  doc["boundaries"] = nlohmann::json::array();
  for (const auto& [i, j, form] : regions.boundaries) {
    doc["boundaries"].push_back({{"between", std::string{to_char(i), to_char(j)}},
                                 {"coefficients", form.coefficients}});
  }
  return doc;
}

}  // namespace levelscope
