#include "levelscope/agents.hpp"

#include <algorithm>
#include <mutex>

#include "levelscope/error.hpp"

namespace levelscope {

RoundKey RoundKey::ring(GameId game, Position position) {
  RoundKey key;
  key.family = Family::ring;
  key.game = game;
  key.position = position;
  return key;
}

RoundKey RoundKey::guessing(std::size_t index) {
  if (index >= kGuessMultipliers.size()) throw DomainError("guessing round index out of range");
  RoundKey key;
  key.family = Family::guessing;
  key.guess_index = index;
  return key;
}

std::string RoundKey::to_string() const {
  if (is_ring()) return levelscope::to_string(game) + "-" + levelscope::to_string(position);
  return "guess-" + levelscope::to_string(kGuessMultipliers[guess_index]);
}

void HistoryPool::add_ring(GameId game, Position position, std::string subject_id,
                           RingAction action) {
  ring_[static_cast<std::size_t>(game)][index_of(position)].push_back(
      {std::move(subject_id), action});
}

void HistoryPool::add_guess(std::size_t guess_index, std::string subject_id, int guess) {
  if (guess_index >= guesses_.size()) throw DomainError("guessing round index out of range");
  if (guess < kMinGuess || guess > kMaxGuess) throw DomainError("pool guess outside 1..100");
  guesses_[guess_index].push_back({std::move(subject_id), guess});
}

HistoryPool HistoryPool::from_records(const std::vector<SubjectRecord>& records,
                                      Treatment source) {
  HistoryPool pool;
  for (const auto& record : records) {
    const auto& choices = record.choices(source);
    if (!choices) continue;
    for (GameId game : kRingGames) {
      for (Position position : kPositions) {
        if (const auto& a = choices->ring_at(game, position)) {
          pool.add_ring(game, position, record.subject_id, *a);
        }
      }
    }
    for (std::size_t i = 0; i < 3; ++i) {
      if (const auto& g = choices->guess[i]) pool.add_guess(i, record.subject_id, *g);
    }
  }
  return pool;
}

const std::vector<HistoryPool::Entry<RingAction>>& HistoryPool::ring(GameId game,
                                                                     Position position) const {
  return ring_[static_cast<std::size_t>(game)][index_of(position)];
}

const std::vector<HistoryPool::Entry<int>>& HistoryPool::guesses(std::size_t guess_index) const {
  return guesses_.at(guess_index);
}

void HistoryPool::check_nonempty() const {
  for (GameId game : kRingGames) {
    for (Position position : kPositions) {
      if (ring(game, position).empty()) {
        throw ConfigError("history pool has no choices for " + RoundKey::ring(game, position).to_string());
      }
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (guesses_[i].empty()) {
      throw ConfigError("history pool has no choices for " + RoundKey::guessing(i).to_string());
    }
  }
}

std::string to_string(HistorySampling sampling) {
  return sampling == HistorySampling::within_round ? "within_round" : "with_replacement";
}

std::optional<HistorySampling> parse_history_sampling(std::string_view text) {
  if (text == "within_round") return HistorySampling::within_round;
  if (text == "with_replacement") return HistorySampling::with_replacement;
  return std::nullopt;
}

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::robot: return "robot";
    case AgentKind::level_k: return "level_k";
    case AgentKind::history_replay: return "history";
    case AgentKind::uniform_random: return "uniform";
  }
  return "?";
}

std::optional<AgentKind> parse_agent_kind(std::string_view text) {
  for (auto kind : {AgentKind::robot, AgentKind::level_k, AgentKind::history_replay,
                    AgentKind::uniform_random}) {
    if (text == to_string(kind)) return kind;
  }
  return std::nullopt;
}

AgentPolicy AgentPolicy::robot() { return {}; }

AgentPolicy AgentPolicy::level_k(int k, Level0Rule level0, std::uint64_t seed) {
  AgentPolicy p;
  p.kind = AgentKind::level_k;
  p.k = k;
  p.level0 = level0;
  p.seed = seed;
  return p;
}

AgentPolicy AgentPolicy::history(std::shared_ptr<const HistoryPool> pool, std::uint64_t seed,
                                 HistorySampling sampling) {
  AgentPolicy p;
  p.kind = AgentKind::history_replay;
  p.pool = std::move(pool);
  p.seed = seed;
  p.sampling = sampling;
  return p;
}

AgentPolicy AgentPolicy::uniform(std::uint64_t seed) {
  AgentPolicy p;
  p.kind = AgentKind::uniform_random;
  p.seed = seed;
  return p;
}

void AgentPolicy::validate() const {
  if (kind == AgentKind::level_k && k < 1) throw ConfigError("level-k agents need k >= 1");
  if (kind == AgentKind::history_replay) {
    if (!pool) throw ConfigError("history opponents need a pool");
    pool->check_nonempty();
  }
}

nlohmann::json AgentPolicy::to_json() const {
  nlohmann::json doc = {{"kind", to_string(kind)}, {"seed", seed}};
  if (kind == AgentKind::level_k) {
    doc["k"] = k;
    doc["level0"] = level0.kind == Level0Rule::Kind::uniform ? "uniform" : "fixed";
  }
  if (kind == AgentKind::history_replay) {
    doc["pool"] = pool ? pool->id : "";
    doc["sampling"] = to_string(sampling);
  }
  return doc;
}

RingAction OpponentDraw::neighbor_action() const {
  if (!key.is_ring() || ring_actions.empty()) throw DomainError("not a ring round draw");
  return ring_actions.front().second;
}

nlohmann::json OpponentDraw::to_json() const {
  nlohmann::json doc = {{"round", round}, {"key", key.to_string()}, {"kind", to_string(kind)}};
  if (!sources.empty()) doc["sources"] = sources;
  if (key.is_ring()) {
    auto& seats = doc["actions"] = nlohmann::json::object();
    for (const auto& [position, action] : ring_actions) {
      seats[to_string(position)] = std::string(1, to_char(action));
    }
  } else {
    doc["guess"] = guess ? nlohmann::json(*guess) : nullptr;
  }
  return doc;
}

namespace {

// Elimination results keyed by matrices; robots are queried once per round
// and each lookup would otherwise re-run the solver.
const RingElimination& cached_elimination(const RingSpec& spec, GameId game) {
  static std::mutex mutex;
  static std::vector<std::pair<RingGameMatrices, RingElimination>> cache;
  const auto& matrices = spec.matrices().game(game);
  std::lock_guard lock(mutex);
  for (const auto& [m, result] : cache) {
    if (m == matrices && result.game == game) return result;
  }
  if (cache.size() > 64) cache.erase(cache.begin());
  cache.emplace_back(matrices, eliminate_ring_game(matrices, game));
  return cache.back().second;
}

template <typename T>
T pick(const std::vector<T>& options, Rng& rng) {
  return options[uniform_index(rng, options.size())];
}

std::array<Position, 3> other_seats(Position own) {
  const Position n1 = next(own);
  const Position n2 = next(n1);
  return {n1, n2, next(n2)};
}

}  // namespace

RingAction robot_action(const RingSpec& spec, GameId game, Position position) {
  const auto& elim = cached_elimination(spec, game);
  const auto& survivors = elim.survivors(position, elim.fixed_point_round());
  if (survivors.size() != 1) {
    throw Error("robot needs a unique surviving action at " +
                RoundKey::ring(game, position).to_string());
  }
  return survivors.front();
}

int robot_guess(const GuessingGame& game) {
  const auto bounds = eliminate_guessing(game);
  if (bounds.upper.back() != kMinGuess) throw Error("guessing elimination did not reach 1");
  return kMinGuess;
}

RingAction levelk_action(const RingSpec& spec, GameId game, Position position, int k,
                         const Level0Rule& level0, Rng& rng) {
  if (k < 1) throw DomainError("level-k needs k >= 1");
  // The chain runs around the ring: level k at P depends on level k-1 at
  // next(P), down to the level-0 rule.
  std::vector<Position> seats(static_cast<std::size_t>(k));
  seats[0] = position;
  for (std::size_t i = 1; i < seats.size(); ++i) seats[i] = next(seats[i - 1]);

  RingBelief belief;
  if (level0.kind == Level0Rule::Kind::uniform) {
    belief = {Rational(1, 3), Rational(1, 3), Rational(1, 3)};
  } else {
    if (!level0.action) throw DomainError("fixed level-0 rule without an action");
    belief = {Rational(0), Rational(0), Rational(0)};
    belief[index_of(*level0.action)] = 1;
  }
  RingAction action = RingAction::a;
  for (std::size_t i = seats.size(); i-- > 0;) {
    action = pick(best_response(spec, game, seats[i], belief), rng);
    belief = {Rational(0), Rational(0), Rational(0)};
    belief[index_of(action)] = 1;
  }
  return action;
}

int levelk_guess(const GuessingGame& game, int k, const Level0Rule& level0, Rng& rng) {
  if (k < 1) throw DomainError("level-k needs k >= 1");
  GuessBelief belief;
  if (level0.kind == Level0Rule::Kind::uniform) {
    for (int g = kMinGuess; g <= kMaxGuess; ++g) belief[g] = Rational(1, kMaxGuess);
  } else {
    if (!level0.guess) throw DomainError("fixed level-0 rule without a guess");
    belief[*level0.guess] = 1;
  }
  int guess = kMinGuess;
  for (int step = 0; step < k; ++step) {
    guess = pick(best_response(game, belief), rng);
    belief = {{guess, Rational(1)}};
  }
  return guess;
}

OpponentDraw history_action(const HistoryPool& pool, const RoundKey& key, std::size_t round,
                            std::uint64_t seed, HistorySampling sampling) {
  Rng rng = substream(seed, streams::kHistoryDraw, round);
  OpponentDraw draw;
  draw.round = round;
  draw.key = key;
  draw.kind = AgentKind::history_replay;
  if (!key.is_ring()) {
    const auto& entries = pool.guesses(key.guess_index);
    if (entries.empty()) throw ConfigError("history pool is empty for " + key.to_string());
    const auto& e = pick(entries, rng);
    draw.sources.push_back(e.subject_id);
    draw.guess = e.choice;
    return draw;
  }
  for (Position seat : other_seats(key.position)) {
    const auto& entries = pool.ring(key.game, seat);
    std::vector<const HistoryPool::Entry<RingAction>*> eligible;
    for (const auto& e : entries) {
      if (sampling == HistorySampling::with_replacement ||
          std::find(draw.sources.begin(), draw.sources.end(), e.subject_id) == draw.sources.end()) {
        eligible.push_back(&e);
      }
    }
    if (eligible.empty()) {
      throw ConfigError("history pool cannot supply three distinct subjects for " +
                        key.to_string());
    }
    const auto* chosen = pick(eligible, rng);
    draw.sources.push_back(chosen->subject_id);
    draw.ring_actions.emplace_back(seat, chosen->choice);
  }
  return draw;
}

OpponentDraw draw_opponents(const AgentPolicy& policy, const RingSpec& spec, const RoundKey& key,
                            std::size_t round) {
  if (policy.kind == AgentKind::history_replay) {
    if (!policy.pool) throw ConfigError("history opponents need a pool");
    return history_action(*policy.pool, key, round, policy.seed, policy.sampling);
  }
  OpponentDraw draw;
  draw.round = round;
  draw.key = key;
  draw.kind = policy.kind;
  Rng rng = substream(policy.seed,
                      policy.kind == AgentKind::level_k ? streams::kLevelK : streams::kUniformAgent,
                      round);
  if (!key.is_ring()) {
    const GuessingGame game(kGuessMultipliers[key.guess_index]);
    switch (policy.kind) {
      case AgentKind::robot: draw.guess = robot_guess(game); break;
      case AgentKind::level_k: draw.guess = levelk_guess(game, policy.k, policy.level0, rng); break;
      default:
        draw.guess = kMinGuess + static_cast<int>(uniform_index(rng, kMaxGuess));
        break;
    }
    return draw;
  }
  for (Position seat : other_seats(key.position)) {
    RingAction action = RingAction::a;
    switch (policy.kind) {
      case AgentKind::robot: action = robot_action(spec, key.game, seat); break;
      case AgentKind::level_k:
        action = levelk_action(spec, key.game, seat, policy.k, policy.level0, rng);
        break;
      default: action = kRingActions[uniform_index(rng, 3)]; break;
    }
    draw.ring_actions.emplace_back(seat, action);
  }
  return draw;
}

}  // namespace levelscope
