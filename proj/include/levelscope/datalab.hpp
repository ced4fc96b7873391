#pragma once

// Datasets: the long-format subject CSV, the bundled appendix tables and
// their reconstruction, canonical choice synthesis and report rendering.

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "levelscope/agents.hpp"
#include "levelscope/classifier.hpp"
#include "levelscope/records.hpp"
#include "levelscope/tables.hpp"

namespace levelscope {

// ---- subject CSV -------------------------------------------------------------

// One row per decision. family is ring, guessing or covariate; game is G1/G2,
// the multiplier (2/3, 1/3, 1/2) or the covariate name; position is P1..P4
// for ring rows and empty otherwise; a timed-out round carries "timeout".
inline constexpr std::string_view kSubjectCsvHeader =
    "subject_id,session_id,order,treatment,family,game,position,action_or_guess";

struct RowRejection {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string column;
  std::string reason;
};

struct LoadResult {
  std::vector<SubjectRecord> records;  // first-appearance order
  std::vector<RowRejection> rejected;

  nlohmann::json report() const;
};

// Throws SchemaError when the header is wrong; bad rows are rejected
// individually and never coerced.
LoadResult parse_dataset(std::string_view csv);
LoadResult load_dataset(const std::string& path);
// Throws SchemaError for ids that cannot be written unquoted.
std::string format_dataset(const std::vector<SubjectRecord>& records);
void save_dataset(const std::string& path, const std::vector<SubjectRecord>& records);

// ---- bundled tables ------------------------------------------------------------

enum class TableId : std::uint8_t { A1, A3, A4, T3, A5, A6, A7, B1, B2, B3 };
inline constexpr std::array<TableId, 10> kTableIds = {TableId::A1, TableId::A3, TableId::A4,
                                                      TableId::T3, TableId::A5, TableId::A6,
                                                      TableId::A7, TableId::B1, TableId::B2,
                                                      TableId::B3};
std::string to_string(TableId id);
std::optional<TableId> parse_table_id(std::string_view text);

struct TableAsset {
  TableId id = TableId::T3;
  std::string caption;
  std::string granularity;
  std::string notes;
  LabeledTable table;
};

// Parses the embedded CSV. Multi-column row keys are joined with '/'.
TableAsset load_table(TableId id);

// "R2-S" -> (R2, S); "R4" -> (R4, plain). Throws DomainError.
std::pair<Level, RingSubtype> parse_ring_type(std::string_view label);

// One synthetic count unit: the row and column label of the cell it came from.
struct ReconstructedUnit {
  std::string id;
  std::string row;
  std::string col;
};

struct ReconstructedDataset {
  TableId id = TableId::T3;
  std::string provenance;
  std::string granularity;
  std::vector<std::string> supports;
  std::vector<std::string> does_not_support;
  LabeledTable source;
  std::vector<ReconstructedUnit> units;

  // Counts the units back into the source layout.
  LabeledTable aggregate() const;
  // The 5x5 level table (T3, A5, B1, B2). Throws DomainError otherwise.
  JointLevelTable joint() const;
  // Per-subject records for level-granular tables (everything but A1, A3,
  // A4); ring and guessing choices are synthesized canonically. Throws
  // DomainError for tables that do not pair levels per subject.
  std::vector<SubjectRecord> records(const RingSpec& spec, std::uint64_t seed = 0) const;

  nlohmann::json to_json(bool include_units = false) const;
};

ReconstructedDataset reconstruct(TableId id);
// Throws DomainError for unknown ids.
ReconstructedDataset reconstruct(std::string_view id);

// Table A.1 profile order: aa, bb, cc, ab, ac, ba, bc, ca, cb.
const std::array<RingPair, 9>& a1_profile_order();
// Count vector over a1_profile_order() for one treatment and position.
std::vector<std::int64_t> a1_profile_counts(const ReconstructedDataset& a1, Treatment treatment,
                                            Position position);
// Empirical frequency of actions a, b, c in one game at one position.
std::array<Rational, 3> a1_action_frequencies(const ReconstructedDataset& a1, Treatment treatment,
                                              GameId game, Position position);

// Number of subjects whose row level is at least their column level.
std::int64_t weakly_higher_count(const JointLevelTable& table);

// Range of the weakly-higher count on overall levels (minimum of ring and
// guessing level per treatment) over every way of pairing the units of a
// ring table with the units of a guessing table, both Robot by History.
struct CouplingBounds {
  std::int64_t min = 0;
  std::int64_t max = 0;
  std::int64_t independent_order = 0;  // pairing units in table order
};
CouplingBounds overall_weakly_higher_bounds(const JointLevelTable& ring, const JointLevelTable& guess);

// ---- synthesis -----------------------------------------------------------------

// Midpoint of the level's guess interval for one game; R4 plays 1.
int guess_midpoint(std::size_t guess_index, Level level);

// Canonical choices revealing the given ring level, subtype and guessing
// level. Positions beyond the revealed depth follow the subtype: S plays the
// secure pair, BR secure in G1 and equilibrium in G2, NS a uniform draw from
// the non-secure, non-BR pairs that still reveal the level; plain keeps the
// canonical row. Throws DomainError for inconsistent combinations.
class ChoiceSynthesizer {
 public:
  explicit ChoiceSynthesizer(const RingSpec& spec);

  RingChoiceProfile ring(Level level, RingSubtype subtype, Rng& rng) const;
  GuessChoiceProfile guesses(Level level) const;
  TreatmentChoices operator()(Level ring_level, RingSubtype subtype, Level guess_level,
                              Rng& rng) const;

 private:
  const RingSpec* spec_;
  std::array<std::vector<RingChoiceProfile>, 5> non_secure_;
};

TreatmentChoices synthesize_choices(Level ring_level, RingSubtype subtype, Level guess_level,
                                    const RingSpec& spec, Rng& rng);

// Replay pool built from reconstructed Robot data: ring choices from the
// Table A.1 Robot counts, guesses from Table 3 synthesized canonically.
std::shared_ptr<const HistoryPool> reconstructed_robot_pool(const RingSpec& spec);
inline constexpr std::string_view kReconstructedPoolId = "robot-reconstructed";

// ---- reference percentile --------------------------------------------------------

struct LevelPercentile {
  Treatment treatment = Treatment::Robot;
  Level level = Level::R0;
  std::int64_t n = 0;
  std::int64_t at = 0;
  std::int64_t below = 0;
  std::int64_t above = 0;
  Rational share_at;
  Rational share_at_or_below;
  double percentile = 0;  // mid-rank, in percent

  nlohmann::json to_json() const;
};

// Against the bundled Table A.3 overall distribution of the treatment.
LevelPercentile level_percentile(Level level, Treatment treatment);

// ---- reports ---------------------------------------------------------------------

struct ReportInputs {
  std::map<std::string, std::array<std::int64_t, 5>> level_distributions;
  std::map<std::string, JointLevelTable> transitions;
  std::map<std::string, std::vector<double>> guess_samples;
  std::map<std::string, LabeledTable> choice_frequencies;
  std::map<std::string, nlohmann::json> analyses;

  bool empty() const;
  // Throws SchemaError enumerating every unusable entry.
  static ReportInputs from_json(const nlohmann::json& doc);
};

struct ReportBundle {
  std::map<std::string, std::string> files;  // name -> content
  nlohmann::json manifest;

  void write(const std::string& directory) const;
};

// Deterministic: identical inputs give byte-identical files.
ReportBundle render_report(const ReportInputs& inputs);

}  // namespace levelscope
