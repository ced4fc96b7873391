#pragma once

// Programmed opponents: the fully rational robot, level-k agents, replayed
// choices of earlier subjects, and a uniform-random baseline.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "levelscope/game_core.hpp"
#include "levelscope/ieds.hpp"
#include "levelscope/records.hpp"
#include "levelscope/rng.hpp"

namespace levelscope {

// Identifies one decision within a treatment: a ring game seat or one of the
// three guessing games (index into kGuessMultipliers).
struct RoundKey {
  enum class Family : std::uint8_t { ring, guessing };

  Family family = Family::ring;
  GameId game = GameId::G1;
  Position position = Position::P1;
  std::size_t guess_index = 0;

  static RoundKey ring(GameId game, Position position);
  static RoundKey guessing(std::size_t index);

  bool is_ring() const { return family == Family::ring; }
  // "G1-P3" or "guess-2/3".
  std::string to_string() const;

  friend bool operator==(const RoundKey&, const RoundKey&) = default;
};

// What a level-0 player does: randomize uniformly, or play a fixed action
// (ring) / guess (guessing).
struct Level0Rule {
  enum class Kind : std::uint8_t { uniform, fixed };

  Kind kind = Kind::uniform;
  std::optional<RingAction> action;
  std::optional<int> guess;

  static Level0Rule uniform() { return {}; }
  static Level0Rule fixed_action(RingAction action) { return {Kind::fixed, action, std::nullopt}; }
  static Level0Rule fixed_guess(int guess) { return {Kind::fixed, std::nullopt, guess}; }
};

// Earlier subjects' choices, indexed by the slot they were made in.
class HistoryPool {
 public:
  template <typename T>
  struct Entry {
    std::string subject_id;
    T choice;
  };

  void add_ring(GameId game, Position position, std::string subject_id, RingAction action);
  void add_guess(std::size_t guess_index, std::string subject_id, int guess);

  // Every recorded choice of the given treatment.
  static HistoryPool from_records(const std::vector<SubjectRecord>& records,
                                  Treatment source = Treatment::Robot);

  const std::vector<Entry<RingAction>>& ring(GameId game, Position position) const;
  const std::vector<Entry<int>>& guesses(std::size_t guess_index) const;

  // Throws ConfigError naming the first empty slot.
  void check_nonempty() const;

  std::string id;

 private:
  std::array<std::array<std::vector<Entry<RingAction>>, 4>, 2> ring_;
  std::array<std::vector<Entry<int>>, 3> guesses_;
};

// Whether the three source subjects of one ring round must be distinct.
enum class HistorySampling : std::uint8_t { within_round, with_replacement };
std::string to_string(HistorySampling sampling);
std::optional<HistorySampling> parse_history_sampling(std::string_view text);

enum class AgentKind : std::uint8_t { robot, level_k, history_replay, uniform_random };
std::string to_string(AgentKind kind);
std::optional<AgentKind> parse_agent_kind(std::string_view text);

struct AgentPolicy {
  AgentKind kind = AgentKind::robot;
  int k = 1;
  Level0Rule level0;
  std::shared_ptr<const HistoryPool> pool;
  HistorySampling sampling = HistorySampling::within_round;
  std::uint64_t seed = 0;

  static AgentPolicy robot();
  static AgentPolicy level_k(int k, Level0Rule level0, std::uint64_t seed);
  static AgentPolicy history(std::shared_ptr<const HistoryPool> pool, std::uint64_t seed,
                             HistorySampling sampling = HistorySampling::within_round);
  static AgentPolicy uniform(std::uint64_t seed);

  // Throws ConfigError: k < 1, missing or empty pool.
  void validate() const;
  nlohmann::json to_json() const;
};

// The opponents realized in one round. For a ring round, `ring_actions`
// lists the other three seats starting from the subject's neighbor.
struct OpponentDraw {
  std::size_t round = 0;
  RoundKey key;
  AgentKind kind = AgentKind::robot;
  std::vector<std::string> sources;  // history: one subject id per seat / guessing round
  std::vector<std::pair<Position, RingAction>> ring_actions;
  std::optional<int> guess;

  // Action of the seat whose choice enters the subject's payoff.
  RingAction neighbor_action() const;
  nlohmann::json to_json() const;

  friend bool operator==(const OpponentDraw&, const OpponentDraw&) = default;
};

// The unique action surviving iterated elimination. Throws Error if the
// survivor set is not a singleton.
RingAction robot_action(const RingSpec& spec, GameId game, Position position);
int robot_guess(const GuessingGame& game);

// Best response iterated k times from the level-0 rule; ties are broken
// uniformly over the argmax with `rng`.
RingAction levelk_action(const RingSpec& spec, GameId game, Position position, int k,
                         const Level0Rule& level0, Rng& rng);
int levelk_guess(const GuessingGame& game, int k, const Level0Rule& level0, Rng& rng);

// Samples replayed opponents for one round; deterministic given `seed` and
// `round`. Throws ConfigError if the pool cannot supply the draw.
OpponentDraw history_action(const HistoryPool& pool, const RoundKey& key, std::size_t round,
                            std::uint64_t seed,
                            HistorySampling sampling = HistorySampling::within_round);

// Opponents of one round under any policy.
OpponentDraw draw_opponents(const AgentPolicy& policy, const RingSpec& spec, const RoundKey& key,
                            std::size_t round);

}  // namespace levelscope
