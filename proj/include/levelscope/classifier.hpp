#pragma once

// Revealed-rationality classification: ring and guessing levels per
// treatment, the overall level, and the secure / non-secure / best-response
// split of ring types.

#include <set>
#include <vector>

#include "levelscope/ieds.hpp"
#include "levelscope/records.hpp"
#include "levelscope/tables.hpp"

namespace levelscope {

enum class RingSubtype : std::uint8_t { plain, S, NS, BR };
std::string to_string(RingSubtype subtype);

// Highest k such that P4..P(5-k) all play the equilibrium pair.
Level classify_ring(const RingChoiceProfile& profile);

// Per-game levels in play order (2/3, 1/3, 1/2).
std::array<Level, 3> guess_levels(const GuessChoiceProfile& profile);
// Minimum of the three per-game levels.
Level classify_guess(const GuessChoiceProfile& profile);

// Positions whose play the subtype inspects for a level in R1..R3:
// P1..P(4-k).
std::vector<Position> subtype_positions(Level level);

// Throws DomainError for R0 and R4.
RingSubtype classify_subtype(const RingChoiceProfile& profile, Level level,
                             const RingSpec& spec);

struct LevelProfile {
  Treatment treatment = Treatment::Robot;
  Level ring_level = Level::R0;
  Level guess_level = Level::R0;
  Level overall = Level::R0;
  RingSubtype ring_subtype = RingSubtype::plain;

  friend bool operator==(const LevelProfile&, const LevelProfile&) = default;
};

// Timed-out ring rounds break the equilibrium chain at their position and
// count as neither secure nor equilibrium play; a timed-out guess reveals R0
// for that game.
LevelProfile classify(const TreatmentChoices& choices, Treatment treatment,
                      const RingSpec& spec);

// "R2-S", "R4", ... With fold_br the BR subtype is reported as NS.
std::string ring_type_label(Level level, RingSubtype subtype, bool fold_br = true);
// R0, R1-S, R1-NS, R2-S, R2-NS, [R2-BR,] R3-S, R3-NS, [R3-BR,] R4.
std::vector<std::string> ring_type_labels(bool fold_br = true);

enum class LevelKind : std::uint8_t { ring, guess, overall };
std::string to_string(LevelKind kind);

struct SubjectLevels {
  std::string subject_id;
  std::string session_id;
  TreatmentOrder order = TreatmentOrder::RH;
  std::optional<LevelProfile> robot;
  std::optional<LevelProfile> history;

  const std::optional<LevelProfile>& in(Treatment t) const {
    return t == Treatment::Robot ? robot : history;
  }
};

struct Exclusion {
  std::string subject_id;
  std::string reason;
};

struct DatasetClassification {
  std::vector<SubjectLevels> subjects;  // input order, excluded subjects omitted
  std::vector<Exclusion> exclusions;

  std::array<std::int64_t, 5> marginal(Treatment treatment, LevelKind kind) const;
  // Ring level (rows) by guessing level (columns).
  JointLevelTable ring_by_guess(Treatment treatment) const;
  // Robot level (rows) by History level (columns); subjects with both only.
  JointLevelTable robot_by_history(LevelKind kind) const;
  // Counts per ring type, in ring_type_labels() order.
  LabeledTable ring_types(bool fold_br = true) const;
  // Ring type (rows) by guessing level (columns).
  LabeledTable ring_type_by_guess(Treatment treatment, bool fold_br = true) const;
  // Robot ring type (rows) by History ring type (columns).
  LabeledTable ring_type_robot_by_history(bool fold_br = true) const;

  nlohmann::json to_json() const;
  std::string subjects_csv() const;
};

// A record missing any required treatment goes to the exclusion report.
// Work is split across `workers` threads; the result does not depend on it.
DatasetClassification classify_dataset(
    const std::vector<SubjectRecord>& records, const RingSpec& spec,
    const std::set<Treatment>& required = {Treatment::Robot, Treatment::History},
    unsigned workers = 1);

}  // namespace levelscope
