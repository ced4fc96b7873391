#pragma once

// The two game families: four-player ring games (G1, G2) and two-person
// guessing games parameterized by an exact rational multiplier p.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "levelscope/rational.hpp"

namespace levelscope {

enum class RingAction : std::uint8_t { a = 0, b = 1, c = 2 };

inline constexpr std::array<RingAction, 3> kRingActions = {RingAction::a, RingAction::b,
                                                           RingAction::c};

char to_char(RingAction action);
std::optional<RingAction> parse_ring_action(std::string_view text);

inline constexpr std::size_t index_of(RingAction action) {
  return static_cast<std::size_t>(action);
}

enum class GameId : std::uint8_t { G1 = 0, G2 = 1 };

inline constexpr std::array<GameId, 2> kRingGames = {GameId::G1, GameId::G2};

std::string to_string(GameId game);
std::optional<GameId> parse_game_id(std::string_view text);

enum class Position : std::uint8_t { P1 = 1, P2 = 2, P3 = 3, P4 = 4 };

inline constexpr std::array<Position, 4> kPositions = {Position::P1, Position::P2, Position::P3,
                                                       Position::P4};

inline constexpr int to_int(Position position) { return static_cast<int>(position); }
inline constexpr std::size_t index_of(Position position) {
  return static_cast<std::size_t>(position) - 1;
}
// The position whose action enters this position's payoff (P4 pairs with P1).
inline constexpr Position next(Position position) {
  return position == Position::P4 ? Position::P1
                                  : static_cast<Position>(static_cast<int>(position) + 1);
}
std::string to_string(Position position);
std::optional<Position> parse_position(std::string_view text);
Position position_from_int(int value);

// rows: own action a,b,c; columns: neighbor action a,b,c. Entries in ESC.
using PayoffMatrix = std::array<std::array<int, 3>, 3>;
using RingGameMatrices = std::array<PayoffMatrix, 4>;

// Raw configuration for both ring games, as read from the matrix file.
struct RingMatrices {
  RingGameMatrices g1{};
  RingGameMatrices g2{};

  const RingGameMatrices& game(GameId id) const { return id == GameId::G1 ? g1 : g2; }
  RingGameMatrices& game(GameId id) { return id == GameId::G1 ? g1 : g2; }

  friend bool operator==(const RingMatrices&, const RingMatrices&) = default;
};

RingMatrices ring_matrices_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const RingMatrices& matrices);
RingMatrices load_ring_matrices(const std::string& path);

// Matrices bundled with the library (data/ring_matrices.json).
RingMatrices default_ring_matrices();

// A pair of ring games. Payoff lookups through ring_payoff() require the
// spec to have passed validate_ring_spec(); solvers read matrices directly
// so they also work on arbitrary (e.g. randomly generated) games.
class RingSpec {
 public:
  static RingSpec unchecked(RingMatrices matrices);
  // Throws ConfigError carrying the failed clauses.
  static RingSpec validated(RingMatrices matrices);
  static RingSpec default_validated();

  bool is_validated() const { return validated_; }
  const RingMatrices& matrices() const { return matrices_; }
  const PayoffMatrix& matrix(GameId game, Position position) const {
    return matrices_.game(game)[index_of(position)];
  }

 private:
  RingSpec(RingMatrices matrices, bool validated)
      : matrices_(std::move(matrices)), validated_(validated) {}

  RingMatrices matrices_;
  bool validated_ = false;
};

int ring_payoff(const RingSpec& spec, GameId game, Position position, RingAction own,
                RingAction neighbor);

// Max-min action. Throws SpecAmbiguityError when several actions attain it.
RingAction secure_action(const RingSpec& spec, GameId game, Position position);
RingAction secure_action(const PayoffMatrix& matrix);

struct ClauseResult {
  std::string id;
  std::string description;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ClauseResult> clauses;

  bool passed() const;
  std::vector<std::string> failed_clauses() const;
  std::string to_text() const;
  nlohmann::json to_json() const;
};

ValidationReport validate_ring_spec(const RingMatrices& matrices);

// Equilibrium chain that validated specs must reproduce.
inline constexpr std::array<RingAction, 4> kEquilibriumG1 = {RingAction::b, RingAction::c,
                                                             RingAction::c, RingAction::b};
inline constexpr std::array<RingAction, 4> kEquilibriumG2 = {RingAction::c, RingAction::a,
                                                             RingAction::b, RingAction::c};
inline constexpr RingAction equilibrium_action(GameId game, Position position) {
  return game == GameId::G1 ? kEquilibriumG1[index_of(position)]
                            : kEquilibriumG2[index_of(position)];
}

inline constexpr int kMinGuess = 1;
inline constexpr int kMaxGuess = 100;

class GuessingGame {
 public:
  // Throws DomainError unless 0 < p < 1.
  explicit GuessingGame(Rational p);

  const Rational& p() const { return p_; }

 private:
  Rational p_;
};

// The three multipliers in the order they are played.
inline const std::array<Rational, 3> kGuessMultipliers = {Rational(2, 3), Rational(1, 3),
                                                          Rational(1, 2)};

// 0.2 * (100 - |own - p * other|), exact. Throws DomainError for guesses
// outside 1..100.
Rational guess_payoff(const GuessingGame& game, int own, int other);

}  // namespace levelscope
