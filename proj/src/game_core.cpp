#include "levelscope/game_core.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "levelscope/assets.hpp"
#include "levelscope/error.hpp"
#include "levelscope/ieds.hpp"

namespace levelscope {

char to_char(RingAction action) { return static_cast<char>('a' + index_of(action)); }

std::optional<RingAction> parse_ring_action(std::string_view text) {
  if (text == "a") return RingAction::a;
  if (text == "b") return RingAction::b;
  if (text == "c") return RingAction::c;
  return std::nullopt;
}

std::string to_string(GameId game) { return game == GameId::G1 ? "G1" : "G2"; }

std::optional<GameId> parse_game_id(std::string_view text) {
  if (text == "G1") return GameId::G1;
  if (text == "G2") return GameId::G2;
  return std::nullopt;
}

std::string to_string(Position position) { return "P" + std::to_string(to_int(position)); }

std::optional<Position> parse_position(std::string_view text) {
  if (text.size() == 2 && text[0] == 'P' && text[1] >= '1' && text[1] <= '4') {
    return static_cast<Position>(text[1] - '0');
  }
  if (text.size() == 1 && text[0] >= '1' && text[0] <= '4') {
    return static_cast<Position>(text[0] - '0');
  }
  return std::nullopt;
}

Position position_from_int(int value) {
  if (value < 1 || value > 4) {
    throw DomainError("ring position must be 1..4, got " + std::to_string(value));
  }
  return static_cast<Position>(value);
}

namespace {

PayoffMatrix matrix_from_json(const nlohmann::json& grid, const std::string& where) {
  if (!grid.is_array() || grid.size() != 3) {
    throw ConfigError(where + ": expected a 3x3 integer grid");
  }
  PayoffMatrix matrix{};
  for (std::size_t row = 0; row < 3; ++row) {
    const auto& cells = grid[row];
    if (!cells.is_array() || cells.size() != 3) {
      throw ConfigError(where + ": row " + std::to_string(row) + " must have 3 entries");
    }
    for (std::size_t col = 0; col < 3; ++col) {
      if (!cells[col].is_number_integer() || cells[col].get<int>() < 0) {
        throw ConfigError(where + ": entry [" + std::to_string(row) + "][" +
                          std::to_string(col) + "] must be a non-negative integer");
      }
      matrix[row][col] = cells[col].get<int>();
    }
  }
  return matrix;
}

}  // namespace

RingMatrices ring_matrices_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("ring matrix file must be a JSON object");
  RingMatrices matrices;
  for (GameId game : kRingGames) {
    const auto key = to_string(game);
    if (!doc.contains(key)) throw ConfigError("ring matrix file is missing \"" + key + "\"");
    const auto& entry = doc.at(key);
    for (Position position : kPositions) {
      const auto pkey = to_string(position);
      if (!entry.is_object() || !entry.contains(pkey)) {
        throw ConfigError("ring matrix file is missing \"" + key + "." + pkey + "\"");
      }
      matrices.game(game)[index_of(position)] = matrix_from_json(entry.at(pkey), key + "." + pkey);
    }
  }
  return matrices;
}

nlohmann::json to_json(const RingMatrices& matrices) {
  nlohmann::json doc = nlohmann::json::object();
  for (GameId game : kRingGames) {
    nlohmann::json entry = nlohmann::json::object();
    for (Position position : kPositions) {
      entry[to_string(position)] = matrices.game(game)[index_of(position)];
    }
    doc[to_string(game)] = entry;
  }
  return doc;
}

RingMatrices load_ring_matrices(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open ring matrix file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("ring matrix file " + path + " is not valid JSON: " + e.what());
  }
  return ring_matrices_from_json(doc);
}

RingMatrices default_ring_matrices() {
  return ring_matrices_from_json(nlohmann::json::parse(embedded_asset("ring_matrices.json")));
}

RingSpec RingSpec::unchecked(RingMatrices matrices) { return RingSpec(std::move(matrices), false); }

RingSpec RingSpec::validated(RingMatrices matrices) {
  const auto report = validate_ring_spec(matrices);
  if (!report.passed()) {
    std::string failed;
    for (const auto& id : report.failed_clauses()) failed += (failed.empty() ? "" : ", ") + id;
    throw ConfigError("ring matrices fail validation clause(s) " + failed + "\n" +
                      report.to_text());
  }
  return RingSpec(std::move(matrices), true);
}

RingSpec RingSpec::default_validated() { return validated(default_ring_matrices()); }

int ring_payoff(const RingSpec& spec, GameId game, Position position, RingAction own,
                RingAction neighbor) {
  if (!spec.is_validated()) {
    throw ConfigError("ring_payoff requires a validated ring spec");
  }
  return spec.matrix(game, position)[index_of(own)][index_of(neighbor)];
}

RingAction secure_action(const PayoffMatrix& matrix) {
  std::array<int, 3> row_min{};
  for (std::size_t row = 0; row < 3; ++row) {
    row_min[row] = *std::min_element(matrix[row].begin(), matrix[row].end());
  }
  const int best = *std::max_element(row_min.begin(), row_min.end());
  if (std::count(row_min.begin(), row_min.end(), best) != 1) {
    throw SpecAmbiguityError("max-min action is not unique (row minima " +
                             std::to_string(row_min[0]) + "," + std::to_string(row_min[1]) +
                             "," + std::to_string(row_min[2]) + ")");
  }
  const auto row = static_cast<std::size_t>(
      std::find(row_min.begin(), row_min.end(), best) - row_min.begin());
  return kRingActions[row];
}

RingAction secure_action(const RingSpec& spec, GameId game, Position position) {
  return secure_action(spec.matrix(game, position));
}

bool ValidationReport::passed() const {
  return std::all_of(clauses.begin(), clauses.end(), [](const auto& c) { return c.passed; });
}

std::vector<std::string> ValidationReport::failed_clauses() const {
  std::vector<std::string> ids;
  for (const auto& clause : clauses) {
    if (!clause.passed) ids.push_back(clause.id);
  }
  return ids;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const auto& clause : clauses) {
    out << (clause.passed ? "PASS" : "FAIL") << "  (" << clause.id << ") " << clause.description;
    if (!clause.detail.empty()) out << " -- " << clause.detail;
    out << '\n';
  }
  out << (passed() ? "all clauses pass" : "validation FAILED") << '\n';
  return out.str();
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json doc;
  doc["passed"] = passed();
  doc["clauses"] = nlohmann::json::array();
  for (const auto& clause : clauses) {
    doc["clauses"].push_back({{"id", clause.id},
                              {"description", clause.description},
                              {"passed", clause.passed},
                              {"detail", clause.detail}});
  }
  return doc;
}

namespace {

std::string describe_set(const ActionSet& set) {
  std::string out = "{";
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i) out += ",";
    out += to_char(set[i]);
  }
  return out + "}";
}

std::string describe_profile(const RingElimination& elim) {
  std::string out = "(";
  for (Position position : kPositions) {
    if (position != Position::P1) out += ",";
    out += describe_set(elim.rounds.back()[index_of(position)]);
  }
  return out + ")";
}

std::optional<RingAction> dominant_action(const PayoffMatrix& m) {
  for (RingAction candidate : kRingActions) {
    bool dominates = true;
    for (RingAction other : kRingActions) {
      if (other == candidate) continue;
      for (std::size_t col = 0; col < 3; ++col) {
        if (m[index_of(candidate)][col] <= m[index_of(other)][col]) dominates = false;
      }
    }
    if (dominates) return candidate;
  }
  return std::nullopt;
}

bool is_row_permutation(const PayoffMatrix& x, const PayoffMatrix& y) {
  auto rx = std::vector<std::array<int, 3>>(x.begin(), x.end());
  auto ry = std::vector<std::array<int, 3>>(y.begin(), y.end());
  std::sort(rx.begin(), rx.end());
  std::sort(ry.begin(), ry.end());
  return rx == ry;
}

int raw_payoff(const RingMatrices& m, GameId game, Position position, RingAction own,
               RingAction neighbor) {
  return m.game(game)[index_of(position)][index_of(own)][index_of(neighbor)];
}

int profile_sum(const RingMatrices& m, GameId game, const std::array<RingAction, 4>& profile) {
  int total = 0;
  for (Position position : kPositions) {
    total += raw_payoff(m, game, position, profile[index_of(position)],
                        profile[index_of(next(position))]);
  }
  return total;
}

}  // namespace

ValidationReport validate_ring_spec(const RingMatrices& m) {
  ValidationReport report;

  {
    ClauseResult clause{"i", "P4 has a strictly dominant action: b in G1, c in G2", false, ""};
    const auto d1 = dominant_action(m.g1[3]);
    const auto d2 = dominant_action(m.g2[3]);
    clause.passed = d1 == RingAction::b && d2 == RingAction::c;
    clause.detail = std::string("G1: ") + (d1 ? std::string(1, to_char(*d1)) : "none") +
                    ", G2: " + (d2 ? std::string(1, to_char(*d2)) : "none");
    report.clauses.push_back(clause);
  }

  const auto spec = RingSpec::unchecked(m);
  const auto mixed = eliminate_ring(spec, DominanceKind::mixed);
  {
    ClauseResult clause{"ii",
                        "IEDS yields the unique equilibrium (b,c,c,b) in G1 and (c,a,b,c) in G2, "
                        "eliminating one position per round from P4 down to P1",
                        true, ""};
    for (GameId game : kRingGames) {
      const auto& elim = mixed.game(game);
      bool ok = elim.fixed_point_round() == 4;
      for (Position position : kPositions) {
        const auto& fixed = elim.rounds.back()[index_of(position)];
        ok = ok && fixed == ActionSet{equilibrium_action(game, position)};
        // Position P(5-k) becomes a singleton exactly in round k.
        const std::size_t round = 5 - static_cast<std::size_t>(to_int(position));
        ok = ok && elim.survivors(position, round - 1).size() == 3 &&
             elim.survivors(position, round).size() == 1;
      }
      clause.passed = clause.passed && ok;
      clause.detail += (clause.detail.empty() ? "" : "; ") + to_string(game) + " fixed point " +
                       describe_profile(elim) + " after " +
                       std::to_string(elim.fixed_point_round()) + " rounds";
    }
    report.clauses.push_back(clause);
  }

  {
    ClauseResult clause{"pure",
                        "pure-strategy dominance reproduces the mixed-dominance elimination "
                        "round by round",
                        false, ""};
    const auto pure = eliminate_ring(spec, DominanceKind::pure);
    clause.passed = pure.g1.rounds == mixed.g1.rounds && pure.g2.rounds == mixed.g2.rounds;
    report.clauses.push_back(clause);
  }

  {
    ClauseResult clause{"iii", "secure (max-min) actions are a, b, a at P1, P2, P3 in both games",
                        true, ""};
    const std::array<RingAction, 3> expected = {RingAction::a, RingAction::b, RingAction::a};
    for (GameId game : kRingGames) {
      for (std::size_t i = 0; i < 3; ++i) {
        const Position position = kPositions[i];
        try {
          const auto secure = secure_action(spec, game, position);
          if (secure != expected[i]) {
            clause.passed = false;
            clause.detail += to_string(game) + "-" + to_string(position) + " secure is " +
                             to_char(secure) + "; ";
          }
          if (secure == equilibrium_action(game, position)) {
            clause.passed = false;
            clause.detail += to_string(game) + "-" + to_string(position) +
                             " secure coincides with equilibrium; ";
          }
        } catch (const SpecAmbiguityError& e) {
          clause.passed = false;
          clause.detail += to_string(game) + "-" + to_string(position) + ": " + e.what() + "; ";
        }
      }
    }
    report.clauses.push_back(clause);
  }

  {
    ClauseResult clause{"iv",
                        "G1 profiles (b,c,c,b) and (a,b,a,a) each yield a total payoff of 66",
                        false, ""};
    const int eq = profile_sum(m, GameId::G1, kEquilibriumG1);
    const int other = profile_sum(m, GameId::G1, {RingAction::a, RingAction::b, RingAction::a,
                                                  RingAction::a});
    clause.passed = eq == 66 && other == 66;
    clause.detail = "sums " + std::to_string(eq) + " and " + std::to_string(other);
    report.clauses.push_back(clause);
  }

  {
    ClauseResult clause{"v", "minimum payoff of the G1 equilibrium action is 0 at P1, P2, P3",
                        true, ""};
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& row = m.g1[i][index_of(kEquilibriumG1[i])];
      const int low = *std::min_element(row.begin(), row.end());
      if (low != 0) {
        clause.passed = false;
        clause.detail += "P" + std::to_string(i + 1) + " min " + std::to_string(low) + "; ";
      }
    }
    report.clauses.push_back(clause);
  }

  {
    ClauseResult clause{"vi", "P1-P3 payoff matrices are identical in G1 and G2", true, ""};
    for (std::size_t i = 0; i < 3; ++i) {
      if (m.g1[i] != m.g2[i]) {
        clause.passed = false;
        clause.detail += "P" + std::to_string(i + 1) + " differs; ";
      }
    }
    report.clauses.push_back(clause);
  }

  {
    ClauseResult clause{"vii", "G2 P4 matrix is a non-trivial row permutation of G1 P4", false,
                        ""};
    clause.passed = m.g1[3] != m.g2[3] && is_row_permutation(m.g1[3], m.g2[3]);
    report.clauses.push_back(clause);
  }

  return report;
}

GuessingGame::GuessingGame(Rational p) : p_(p) {
  if (p <= 0 || p >= 1) {
    throw DomainError("guessing multiplier must satisfy 0 < p < 1, got " + to_string(p));
  }
}

Rational guess_payoff(const GuessingGame& game, int own, int other) {
  if (own < kMinGuess || own > kMaxGuess || other < kMinGuess || other > kMaxGuess) {
    throw DomainError("guesses must be integers in 1..100 (got " + std::to_string(own) + ", " +
                      std::to_string(other) + ")");
  }
  const Rational distance = abs(Rational(own) - game.p() * other);
  return Rational(1, 5) * (Rational(100) - distance);
}

}  // namespace levelscope
