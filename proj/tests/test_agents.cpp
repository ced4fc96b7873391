#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "levelscope/agents.hpp"
#include "levelscope/error.hpp"
#include "levelscope/stats.hpp"

using namespace levelscope;

namespace {

const RingSpec& spec() {
  static const RingSpec s = RingSpec::default_validated();
  return s;
}

bool contains(const ActionSet& set, RingAction a) {
  return std::find(set.begin(), set.end(), a) != set.end();
}

// Guesses minimizing the expected distance to p * t for the given opponent
// guesses, found by trying every guess with exact integer arithmetic.
std::vector<int> brute_force_best_guesses(const Rational& p, const std::vector<int>& opponents) {
  std::vector<int> best;
  Rational best_loss(0);
  for (int s = 1; s <= 100; ++s) {
    Rational loss(0);
    for (int t : opponents) loss += abs(Rational(s) - p * t);
    if (best.empty() || loss < best_loss) {
      best = {s};
      best_loss = loss;
    } else if (loss == best_loss) {
      best.push_back(s);
    }
  }
  return best;
}

std::shared_ptr<HistoryPool> pool_of(const std::vector<std::string>& ids,
                                     const std::vector<RingAction>& actions) {
  auto pool = std::make_shared<HistoryPool>();
  pool->id = "test";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (GameId g : kRingGames) {
      for (Position p : kPositions) pool->add_ring(g, p, ids[i], actions[i % actions.size()]);
    }
    for (std::size_t k = 0; k < 3; ++k) pool->add_guess(k, ids[i], 10 + static_cast<int>(i));
  }
  return pool;
}

}  // namespace

TEST_CASE("robot plays the elimination survivor") {
  for (GameId g : kRingGames) {
    const auto elim = eliminate_ring_game(spec().matrices().game(g), g);
    for (Position p : kPositions) {
      const RingAction a = robot_action(spec(), g, p);
      CHECK(a == equilibrium_action(g, p));
      for (std::size_t k = 0; k <= elim.fixed_point_round() + 2; ++k) {
        CHECK(contains(elim.survivors(p, k), a));
      }
    }
  }
  CHECK(robot_action(spec(), GameId::G1, Position::P4) == RingAction::b);
  CHECK(robot_action(spec(), GameId::G2, Position::P2) == RingAction::a);
  for (const auto& p : kGuessMultipliers) CHECK(robot_guess(GuessingGame(p)) == 1);
}

TEST_CASE("robot rejects games without a unique survivor") {
  RingMatrices flat;
  for (auto& m : flat.g1) m = PayoffMatrix{{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}};
  flat.g2 = flat.g1;
  CHECK_THROWS_AS(robot_action(RingSpec::unchecked(flat), GameId::G1, Position::P1), Error);
}

TEST_CASE("level-k guesses") {
  Rng rng(1);
  const GuessingGame half(Rational(1, 2));
  CHECK(levelk_guess(half, 1, Level0Rule::uniform(), rng) == 25);
  CHECK(levelk_guess(half, 1, Level0Rule::fixed_guess(100), rng) == 50);

  std::vector<int> all(100);
  for (int i = 0; i < 100; ++i) all[static_cast<std::size_t>(i)] = i + 1;
  for (const auto& p : kGuessMultipliers) {
    const auto oracle = brute_force_best_guesses(p, all);
    const int got = levelk_guess(GuessingGame(p), 1, Level0Rule::uniform(), rng);
    CHECK(std::find(oracle.begin(), oracle.end(), got) != oracle.end());
  }

  SUBCASE("weakly decreasing in k") {
    for (const auto& p : kGuessMultipliers) {
      for (const auto& rule : {Level0Rule::uniform(), Level0Rule::fixed_guess(100)}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
          int previous = 100;
          for (int k = 1; k <= 8; ++k) {
            Rng r(seed);
            const int g = levelk_guess(GuessingGame(p), k, rule, r);
            CHECK(g <= previous);
            previous = g;
          }
        }
      }
    }
  }

  SUBCASE("ties are broken across the whole argmax") {
    // 1/2 * 25 = 12.5: both 12 and 13 are best responses to a guess of 25.
    std::set<int> seen;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      Rng r(seed);
      seen.insert(levelk_guess(half, 1, Level0Rule::fixed_guess(25), r));
    }
    CHECK(seen == std::set<int>{12, 13});
  }
  CHECK_THROWS_AS(levelk_guess(half, 0, Level0Rule::uniform(), rng), DomainError);
}

TEST_CASE("level-k ring actions") {
  Rng rng(5);
  const auto elim = eliminate_ring_game(spec().matrices().g1, GameId::G1);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a1 = levelk_action(spec(), GameId::G1, Position::P3, 1, Level0Rule::uniform(), rng);
    CHECK(contains(elim.survivors(Position::P3, 1), a1));
  }
  CHECK(levelk_action(spec(), GameId::G1, Position::P3, 2, Level0Rule::uniform(), rng) ==
        RingAction::c);

  SUBCASE("level k survives k rounds of elimination") {
    for (GameId g : kRingGames) {
      const auto e = eliminate_ring_game(spec().matrices().game(g), g);
      for (Position p : kPositions) {
        for (int k = 1; k <= 6; ++k) {
          for (const auto& rule :
               {Level0Rule::uniform(), Level0Rule::fixed_action(RingAction::a),
                Level0Rule::fixed_action(RingAction::b), Level0Rule::fixed_action(RingAction::c)}) {
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
              Rng r(seed);
              const auto a = levelk_action(spec(), g, p, k, rule, r);
              CHECK(contains(e.survivors(p, static_cast<std::size_t>(k)), a));
            }
          }
        }
        // Deep enough reasoning reaches equilibrium from any starting rule.
        Rng r(0);
        CHECK(levelk_action(spec(), g, p, 4, Level0Rule::fixed_action(RingAction::a), r) ==
              equilibrium_action(g, p));
      }
    }
  }
}

TEST_CASE("history draws from a three-subject pool") {
  const auto pool = pool_of({"s1", "s2", "s3"}, {RingAction::a, RingAction::b, RingAction::c});
  std::set<std::vector<std::string>> orders;
  for (std::size_t round = 0; round < 40; ++round) {
    const auto d = history_action(*pool, RoundKey::ring(GameId::G1, Position::P2), round, 77);
    auto sorted = d.sources;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::string>{"s1", "s2", "s3"});
    CHECK(d.ring_actions.size() == 3);
    CHECK(d.ring_actions[0].first == Position::P3);
    CHECK(d.ring_actions[1].first == Position::P4);
    CHECK(d.ring_actions[2].first == Position::P1);
    orders.insert(d.sources);
  }
  CHECK(orders.size() > 1);  // the seed shuffles the assignment

  const auto g = history_action(*pool, RoundKey::guessing(1), 3, 77);
  CHECK(g.sources.size() == 1);
  CHECK(g.guess.has_value());

  const auto small = pool_of({"s1", "s2"}, {RingAction::a});
  CHECK_THROWS_AS(history_action(*small, RoundKey::ring(GameId::G1, Position::P1), 0, 1),
                  ConfigError);
  CHECK_NOTHROW(history_action(*small, RoundKey::ring(GameId::G1, Position::P1), 0, 1,
                               HistorySampling::with_replacement));
}

TEST_CASE("history draws are deterministic") {
  const auto pool = pool_of({"a", "b", "c", "d", "e", "f", "g"},
                            {RingAction::a, RingAction::c, RingAction::b, RingAction::b});
  for (std::size_t round = 0; round < 22; ++round) {
    const auto key = round % 2 ? RoundKey::guessing(round % 3) : RoundKey::ring(GameId::G2, Position::P4);
    CHECK(history_action(*pool, key, round, 9) == history_action(*pool, key, round, 9));
  }
  const auto policy = AgentPolicy::history(pool, 9);
  const auto key = RoundKey::ring(GameId::G1, Position::P1);
  CHECK(draw_opponents(policy, spec(), key, 4) == history_action(*pool, key, 4, 9));
}

TEST_CASE("history draws reproduce the pool frequencies") {
  // 40 subjects; the neighbor seat's action is a with share 1/2, b 3/10, c 1/5.
  auto pool = std::make_shared<HistoryPool>();
  for (int i = 0; i < 40; ++i) {
    const RingAction a = i < 20 ? RingAction::a : i < 32 ? RingAction::b : RingAction::c;
    for (GameId g : kRingGames) {
      for (Position p : kPositions) pool->add_ring(g, p, "s" + std::to_string(i), a);
    }
  }
  const std::array<double, 3> expected = {0.5, 0.3, 0.2};
  const int draws = 10000;
  std::array<int, 3> counts{};
  for (int round = 0; round < draws; ++round) {
    const auto d = history_action(*pool, RoundKey::ring(GameId::G1, Position::P2),
                                  static_cast<std::size_t>(round), 2024);
    counts[index_of(d.neighbor_action())] += 1;
  }
  double stat = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double share = counts[i] / static_cast<double>(draws);
    const double se = std::sqrt(expected[i] * (1 - expected[i]) / draws);
    CHECK(std::fabs(share - expected[i]) < 2 * se);
    const double e = expected[i] * draws;
    stat += (counts[i] - e) * (counts[i] - e) / e;
  }
  CHECK(chi_square_upper_tail(stat, 2) > 0.01);
}

TEST_CASE("uniform and robot policies") {
  const auto uniform = AgentPolicy::uniform(3);
  std::array<int, 3> counts{};
  for (std::size_t round = 0; round < 3000; ++round) {
    const auto d = draw_opponents(uniform, spec(), RoundKey::ring(GameId::G1, Position::P1), round);
    counts[index_of(d.neighbor_action())] += 1;
    const auto g = draw_opponents(uniform, spec(), RoundKey::guessing(0), round);
    CHECK(*g.guess >= 1);
    CHECK(*g.guess <= 100);
  }
  for (int c : counts) CHECK(std::abs(c - 1000) < 100);

  const auto robot = draw_opponents(AgentPolicy::robot(), spec(), RoundKey::ring(GameId::G2, Position::P3), 0);
  CHECK(robot.neighbor_action() == RingAction::c);  // P4 in G2
  CHECK(robot.sources.empty());
  CHECK(*draw_opponents(AgentPolicy::robot(), spec(), RoundKey::guessing(2), 0).guess == 1);

  const auto lk = AgentPolicy::level_k(3, Level0Rule::uniform(), 8);
  const auto d1 = draw_opponents(lk, spec(), RoundKey::ring(GameId::G1, Position::P1), 5);
  CHECK(d1 == draw_opponents(lk, spec(), RoundKey::ring(GameId::G1, Position::P1), 5));
}

TEST_CASE("policy validation") {
  CHECK_THROWS_AS(AgentPolicy::level_k(0, Level0Rule::uniform(), 1).validate(), ConfigError);
  CHECK_THROWS_AS(AgentPolicy::history(nullptr, 1).validate(), ConfigError);
  auto partial = std::make_shared<HistoryPool>();
  partial->add_ring(GameId::G1, Position::P1, "x", RingAction::a);
  CHECK_THROWS_AS(AgentPolicy::history(partial, 1).validate(), ConfigError);
  CHECK_NOTHROW(AgentPolicy::robot().validate());
  CHECK(parse_agent_kind("history") == AgentKind::history_replay);
  CHECK(RoundKey::guessing(0).to_string() == "guess-2/3");
  CHECK(RoundKey::ring(GameId::G2, Position::P4).to_string() == "G2-P4");
}
