#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "levelscope/error.hpp"
#include "levelscope/ieds.hpp"
#include "oracles.hpp"

using namespace levelscope;
using namespace levelscope::oracle;

namespace {

constexpr auto a = RingAction::a;
constexpr auto b = RingAction::b;
constexpr auto c = RingAction::c;

void check_guess_oracle(const Rational& p) {
  INFO("p = " << to_string(p));
  const auto bounds = eliminate_guessing(GuessingGame(p));
  const auto oracle = brute_force_guess_rounds(p);
  REQUIRE(oracle.size() == bounds.upper.size());
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    CHECK(*oracle[k].begin() == 1);
    CHECK(*oracle[k].rbegin() == bounds.upper[k]);
    CHECK(static_cast<int>(oracle[k].size()) == bounds.upper[k]);
  }
}

bool is_subset(const ActionSet& small, const ActionSet& big) {
  return std::all_of(small.begin(), small.end(), [&](RingAction x) {
    return std::find(big.begin(), big.end(), x) != big.end();
  });
}

}  // namespace

TEST_CASE("guessing intervals for the three multipliers") {
  const auto half = eliminate_guessing(GuessingGame(Rational(1, 2)));
  CHECK(half.interval(Level::R0) == std::pair{51, 100});
  CHECK(half.interval(Level::R1) == std::pair{26, 50});
  CHECK(half.interval(Level::R2) == std::pair{14, 25});
  CHECK(half.interval(Level::R3) == std::pair{8, 13});
  CHECK(half.interval(Level::R4) == std::pair{1, 7});

  const auto third = eliminate_guessing(GuessingGame(Rational(1, 3)));
  CHECK(third.interval(Level::R1) == std::pair{12, 33});
  CHECK(third.interval(Level::R2) == std::pair{5, 11});
  CHECK(third.interval(Level::R3) == std::pair{2, 4});
  CHECK(third.interval(Level::R4) == std::pair{1, 1});

  const auto two_thirds = eliminate_guessing(GuessingGame(Rational(2, 3)));
  CHECK(two_thirds.interval(Level::R0) == std::pair{68, 100});
  CHECK(two_thirds.interval(Level::R1) == std::pair{46, 67});
  CHECK(two_thirds.interval(Level::R2) == std::pair{31, 45});
  CHECK(two_thirds.interval(Level::R3) == std::pair{21, 30});
  CHECK(two_thirds.interval(Level::R4) == std::pair{1, 20});
}

TEST_CASE("p = 9/10 intervals follow the same pattern") {
  const auto bounds = eliminate_guessing(GuessingGame(Rational(9, 10)));
  CHECK(std::vector<int>(bounds.upper.begin(), bounds.upper.begin() + 5) ==
        std::vector<int>{100, 90, 81, 73, 66});
  CHECK(bounds.interval(Level::R0) == std::pair{91, 100});
  CHECK(bounds.interval(Level::R1) == std::pair{82, 90});
  CHECK(bounds.interval(Level::R2) == std::pair{74, 81});
  CHECK(bounds.interval(Level::R3) == std::pair{67, 73});
  CHECK(bounds.interval(Level::R4) == std::pair{1, 66});
  check_guess_oracle(Rational(9, 10));
}

TEST_CASE("round half up at exact halves") {
  // 13 * 1/2 = 6.5 rounds to 7, which is what separates R3 from R4 at p = 1/2.
  const auto bounds = eliminate_guessing(GuessingGame(Rational(1, 2)));
  CHECK(bounds.upper_after(3) == 13);
  CHECK(bounds.upper_after(4) == 7);
}

TEST_CASE("guess intervals partition 1..100 and level_of agrees") {
  for (const auto& p : kGuessMultipliers) {
    const auto bounds = eliminate_guessing(GuessingGame(p));
    int expected_lo = 1;
    for (auto it = kLevels.rbegin(); it != kLevels.rend(); ++it) {
      const auto [lo, hi] = bounds.interval(*it);
      CHECK(lo == expected_lo);
      for (int g = lo; g <= hi; ++g) CHECK(bounds.level_of(g) == *it);
      expected_lo = hi + 1;
    }
    CHECK(expected_lo == 101);
    CHECK_THROWS_AS(bounds.level_of(0), DomainError);
  }
}

TEST_CASE("closed form matches brute-force elimination") {
  for (const auto& p : kGuessMultipliers) check_guess_oracle(p);
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> den_dist(2, 40);
  for (int i = 0; i < 20; ++i) {
    const int den = den_dist(rng);
    std::uniform_int_distribution<int> num_dist(1, den - 1);
    check_guess_oracle(Rational(num_dist(rng), den));
  }
}

TEST_CASE("ring elimination on the default matrices") {
  const auto spec = RingSpec::default_validated();
  const auto result = eliminate_ring(spec);
  const auto& g1 = result.g1;
  const auto& g2 = result.g2;
  CHECK(g1.survivors(Position::P4, 1) == ActionSet{b});
  CHECK(g2.survivors(Position::P4, 1) == ActionSet{c});
  CHECK(g1.survivors(Position::P3, 2) == ActionSet{c});
  CHECK(g2.survivors(Position::P3, 2) == ActionSet{b});
  CHECK(g1.survivors(Position::P2, 3) == ActionSet{c});
  CHECK(g2.survivors(Position::P2, 3) == ActionSet{a});
  CHECK(g1.survivors(Position::P1, 4) == ActionSet{b});
  CHECK(g2.survivors(Position::P1, 4) == ActionSet{c});
  CHECK(g1.fixed_point_round() == 4);
  CHECK(g2.fixed_point_round() == 4);
  // Past the fixed point the survivors stay put.
  CHECK(g1.survivors(Position::P1, 99) == ActionSet{b});

  const auto pure = eliminate_ring(spec, DominanceKind::pure);
  CHECK(pure.g1.rounds == g1.rounds);
  CHECK(pure.g2.rounds == g2.rounds);
}

TEST_CASE("mixed dominance eliminates what pure dominance misses") {
  // Row c is beaten by the 50/50 mixture of a and b but by neither alone.
  RingGameMatrices ms{};
  ms[0] = {{{6, 0, 1}, {0, 6, 1}, {2, 2, 0}}};
  for (std::size_t i = 1; i < 4; ++i) ms[i] = {{{1, 1, 1}, {0, 0, 0}, {0, 0, 0}}};
  const auto mixed = eliminate_ring_game(ms, GameId::G1, DominanceKind::mixed);
  const auto pure = eliminate_ring_game(ms, GameId::G1, DominanceKind::pure);
  CHECK(mixed.rounds[1][0] == ActionSet{a, b});
  CHECK(pure.rounds[1][0] == ActionSet{a, b, c});
}

TEST_CASE("random games: nesting, termination, oracle equivalence") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto ms = random_game(rng, trial % 2 == 0 ? 20 : 4);
    const auto elim = eliminate_ring_game(ms, GameId::G1);
    REQUIRE(!elim.rounds.empty());
    CHECK(elim.rounds.front()[0] == ActionSet{a, b, c});
    for (std::size_t k = 0; k + 1 < elim.rounds.size(); ++k) {
      CHECK(elim.rounds[k] != elim.rounds[k + 1]);
      for (std::size_t i = 0; i < 4; ++i) {
        CHECK(is_subset(elim.rounds[k + 1][i], elim.rounds[k][i]));
        CHECK_FALSE(elim.rounds[k + 1][i].empty());
      }
    }
    CHECK(elim.rounds == oracle_rounds(ms));

    const auto pure = eliminate_ring_game(ms, GameId::G1, DominanceKind::pure);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(is_subset(elim.rounds.back()[i], pure.rounds.back()[i]));
    }
  }
}

TEST_CASE("ring best responses") {
  const auto spec = RingSpec::default_validated();
  CHECK(best_response(spec, GameId::G1, Position::P3, {Rational(0), Rational(1), Rational(0)}) ==
        ActionSet{c});
  CHECK(best_response(spec, GameId::G2, Position::P3, {Rational(0), Rational(0), Rational(1)}) ==
        ActionSet{b});
  CHECK_THROWS_AS(
      best_response(spec, GameId::G1, Position::P1, {Rational(1, 2), Rational(1, 3), Rational(0)}),
      DomainError);
  CHECK_THROWS_AS(
      best_response(spec, GameId::G1, Position::P1, {Rational(2), Rational(-1), Rational(0)}),
      DomainError);
}

TEST_CASE("guessing best responses") {
  const GuessingGame half(Rational(1, 2));
  CHECK(best_response(half, GuessBelief{{2, Rational(1)}}) == std::vector<int>{1});
  CHECK(best_response(half, GuessBelief{{100, Rational(1)}}) == std::vector<int>{50});

  GuessBelief uniform;
  for (int t = 1; t <= 100; ++t) uniform[t] = Rational(1, 100);
  CHECK(best_response(half, uniform) == std::vector<int>{25});

  // Floating-point oracle for the uniform belief.
  double best = 1e300;
  int arg = 0;
  for (int s = 1; s <= 100; ++s) {
    double loss = 0;
    for (int t = 1; t <= 100; ++t) loss += std::abs(s - 0.5 * t);
    if (loss < best - 1e-9) {
      best = loss;
      arg = s;
    }
  }
  CHECK(arg == 25);

  // Ties are reported, not broken: target 1.5 sits between 1 and 2.
  CHECK(best_response(GuessingGame(Rational(1, 2)), GuessBelief{{3, Rational(1)}}) ==
        std::vector<int>{1, 2});
}

TEST_CASE("best-response regions tile the simplex") {
  const auto check_regions = [](const RingSpec& spec, GameId game, Position pos,
                                std::mt19937_64& rng) {
    const auto regions = br_regions(spec, game, pos);
    Rational total(0);
    for (const auto& r : regions.regions) total += r.area;
    CHECK(total == Rational(1, 2));
    CHECK(regions.boundaries.size() == 3);

    // Pure vertices agree with best_response.
    for (std::size_t j = 0; j < 3; ++j) {
      RingBelief q{Rational(0), Rational(0), Rational(0)};
      q[j] = 1;
      CHECK(regions.regions_containing(q) == best_response(spec, game, pos, q));
    }
    // Random rational interior points agree as well.
    std::uniform_int_distribution<int> w(0, 30);
    for (int i = 0; i < 200; ++i) {
      const int x = w(rng), y = w(rng), z = w(rng) + 1;
      const int n = x + y + z;
      const RingBelief q{Rational(x, n), Rational(y, n), Rational(z, n)};
      CHECK(regions.regions_containing(q) == best_response(spec, game, pos, q));
    }
  };

  std::mt19937_64 rng(5);
  const auto spec = RingSpec::default_validated();
  for (GameId game : kRingGames) {
    for (Position pos : kPositions) check_regions(spec, game, pos, rng);
  }
  for (int trial = 0; trial < 100; ++trial) {
    RingMatrices m;
    m.g1 = random_game(rng, 10);
    m.g2 = m.g1;
    check_regions(RingSpec::unchecked(m), GameId::G1, kPositions[trial % 4], rng);
  }
}

TEST_CASE("dominated action has an empty region") {
  const auto spec = RingSpec::default_validated();
  const auto regions = br_regions(spec, GameId::G1, Position::P4);
  CHECK(regions.regions[index_of(a)].vertices.empty());
  CHECK(regions.regions[index_of(c)].vertices.empty());
  CHECK(regions.regions[index_of(b)].area == Rational(1, 2));
}

TEST_CASE("json views") {
  const auto spec = RingSpec::default_validated();
  const auto doc = to_json(eliminate_ring(spec));
  CHECK(doc["G1"]["fixed_point_round"] == 4);
  CHECK(doc["G1"]["rounds"][4]["P1"] == "b");
  CHECK(doc["G2"]["rounds"][0]["P1"] == "abc");
  const auto bounds = to_json(eliminate_guessing(GuessingGame(Rational(1, 2))));
  CHECK(bounds["intervals"]["R2"] == nlohmann::json::array({14, 25}));
  const auto regions = to_json(br_regions(spec, GameId::G1, Position::P1));
  CHECK(regions["regions"].size() == 3);
}

TEST_CASE("level parsing") {
  CHECK(parse_level("R3") == Level::R3);
  CHECK_FALSE(parse_level("R5").has_value());
  CHECK(to_string(Level::R0) == "R0");
  CHECK_THROWS_AS(level_from_int(7), DomainError);
}
