#pragma once

// Iterated elimination of strictly dominated strategies, best responses and
// best-response regions.

#include <array>
#include <map>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "levelscope/game_core.hpp"

namespace levelscope {

enum class Level : std::uint8_t { R0 = 0, R1 = 1, R2 = 2, R3 = 3, R4 = 4 };

inline constexpr std::array<Level, 5> kLevels = {Level::R0, Level::R1, Level::R2, Level::R3,
                                                 Level::R4};
inline constexpr int to_int(Level level) { return static_cast<int>(level); }
Level level_from_int(int value);
std::string to_string(Level level);
std::optional<Level> parse_level(std::string_view text);

using ActionSet = std::vector<RingAction>;

enum class DominanceKind {
  mixed,  // dominated by some mixture of own survivors
  pure,   // dominated by a single surviving action
};

// Round-by-round survivors for one ring game. rounds[0] is the full action
// set; rounds.back() is the fixed point.
struct RingElimination {
  GameId game = GameId::G1;
  std::vector<std::array<ActionSet, 4>> rounds;

  // Survivors after k rounds; k past the fixed point returns the fixed point.
  const ActionSet& survivors(Position position, std::size_t k) const;
  std::size_t fixed_point_round() const { return rounds.size() - 1; }
};

struct RingRationalizable {
  RingElimination g1;
  RingElimination g2;

  const RingElimination& game(GameId id) const { return id == GameId::G1 ? g1 : g2; }
};

RingElimination eliminate_ring_game(const RingGameMatrices& matrices, GameId game,
                                    DominanceKind kind = DominanceKind::mixed);
RingRationalizable eliminate_ring(const RingSpec& spec,
                                  DominanceKind kind = DominanceKind::mixed);

// Survivor bounds for the guessing game: round-k survivors are [1, upper[k]].
struct GuessBounds {
  Rational p;
  std::vector<int> upper;  // upper[0] = 100, strictly decreasing to the fixed point

  int upper_after(std::size_t k) const;
  // Closed interval of guesses revealing exactly this level (R4 means "R4 or above").
  std::pair<int, int> interval(Level level) const;
  Level level_of(int guess) const;
};

GuessBounds eliminate_guessing(const GuessingGame& game);

// A belief over the neighbor's actions a, b, c.
using RingBelief = std::array<Rational, 3>;

ActionSet best_response(const RingSpec& spec, GameId game, Position position,
                        const RingBelief& belief);

// Belief over the opponent's guesses (guess -> probability).
using GuessBelief = std::map<int, Rational>;

std::vector<int> best_response(const GuessingGame& game, const GuessBelief& belief);

// Point of the neighbor simplex, coordinates (q_a, q_b, q_c).
using SimplexPoint = std::array<Rational, 3>;

// coefficients . q >= 0 (or == 0 for a boundary), q over (a, b, c).
struct LinearForm {
  std::array<std::int64_t, 3> coefficients{};

  Rational evaluate(const SimplexPoint& q) const;
};

struct BrRegion {
  RingAction action = RingAction::a;
  // The action is a best response exactly where every inequality holds.
  std::vector<LinearForm> inequalities;
  // Vertices of the (closed) region in counter-clockwise order; empty if the
  // action is never a best response.
  std::vector<SimplexPoint> vertices;
  // Area in the (q_a, q_b) chart; the whole simplex has area 1/2.
  Rational area;
};

struct BrRegions {
  GameId game = GameId::G1;
  Position position = Position::P1;
  std::array<BrRegion, 3> regions;
  // Indifference lines between pairs of own actions: (i, j, form) with
  // form = u_i - u_j.
  std::vector<std::tuple<RingAction, RingAction, LinearForm>> boundaries;

  // Actions whose closed region contains the point.
  ActionSet regions_containing(const SimplexPoint& q) const;
};

BrRegions br_regions(const RingSpec& spec, GameId game, Position position);

nlohmann::json to_json(const RingRationalizable& result);
nlohmann::json to_json(const GuessBounds& bounds);
nlohmann::json to_json(const BrRegions& regions);

}  // namespace levelscope
