#include "levelscope/classifier.hpp"

#include <algorithm>
#include <sstream>
#include <thread>

#include "levelscope/error.hpp"

namespace levelscope {

std::string to_string(RingSubtype subtype) {
  switch (subtype) {
    case RingSubtype::plain: return "plain";
    case RingSubtype::S: return "S";
    case RingSubtype::NS: return "NS";
    case RingSubtype::BR: return "BR";
  }
  return "?";
}

std::string to_string(LevelKind kind) {
  switch (kind) {
    case LevelKind::ring: return "ring";
    case LevelKind::guess: return "guess";
    case LevelKind::overall: return "overall";
  }
  return "?";
}

namespace {

using RingSlots = std::array<std::array<std::optional<RingAction>, 2>, 4>;

const std::optional<RingAction>& slot(const RingSlots& ring, GameId game, Position p) {
  return ring[index_of(p)][static_cast<std::size_t>(game)];
}

bool plays(const RingSlots& ring, Position p, RingAction g1, RingAction g2) {
  return slot(ring, GameId::G1, p) == g1 && slot(ring, GameId::G2, p) == g2;
}

Level ring_level(const RingSlots& ring) {
  int level = 0;
  for (int pos = 4; pos >= 1; --pos) {
    const Position p = position_from_int(pos);
    if (!plays(ring, p, equilibrium_action(GameId::G1, p), equilibrium_action(GameId::G2, p))) {
      break;
    }
    ++level;
  }
  return level_from_int(level);
}

RingSubtype subtype_of(const RingSlots& ring, Level level, const RingSpec& spec) {
  const auto positions = subtype_positions(level);
  const bool secure = std::all_of(positions.begin(), positions.end(), [&](Position p) {
    return plays(ring, p, secure_action(spec, GameId::G1, p), secure_action(spec, GameId::G2, p));
  });
  if (secure) return RingSubtype::S;
  if (level == Level::R2 || level == Level::R3) {
    const bool br = std::all_of(positions.begin(), positions.end(), [&](Position p) {
      return plays(ring, p, secure_action(spec, GameId::G1, p), equilibrium_action(GameId::G2, p));
    });
    if (br) return RingSubtype::BR;
  }
  return RingSubtype::NS;
}

RingSlots slots_of(const RingChoiceProfile& profile) {
  RingSlots ring;
  for (Position p : kPositions) ring[index_of(p)] = {profile.at(p).g1, profile.at(p).g2};
  return ring;
}

const std::array<GuessBounds, 3>& guess_bounds() {
  static const std::array<GuessBounds, 3> bounds = {
      eliminate_guessing(GuessingGame(kGuessMultipliers[0])),
      eliminate_guessing(GuessingGame(kGuessMultipliers[1])),
      eliminate_guessing(GuessingGame(kGuessMultipliers[2]))};
  return bounds;
}

}  // namespace

Level classify_ring(const RingChoiceProfile& profile) { return ring_level(slots_of(profile)); }

std::array<Level, 3> guess_levels(const GuessChoiceProfile& profile) {
  std::array<Level, 3> levels{};
  for (std::size_t i = 0; i < 3; ++i) levels[i] = guess_bounds()[i].level_of(profile.guesses[i]);
  return levels;
}

Level classify_guess(const GuessChoiceProfile& profile) {
  const auto levels = guess_levels(profile);
  return *std::min_element(levels.begin(), levels.end());
}

std::vector<Position> subtype_positions(Level level) {
  if (level == Level::R0 || level == Level::R4) {
    throw DomainError("ring subtypes exist only for R1..R3, got " + to_string(level));
  }
  std::vector<Position> positions;
  for (int pos = 1; pos <= 4 - to_int(level); ++pos) positions.push_back(position_from_int(pos));
  return positions;
}

RingSubtype classify_subtype(const RingChoiceProfile& profile, Level level,
                             const RingSpec& spec) {
  return subtype_of(slots_of(profile), level, spec);
}

LevelProfile classify(const TreatmentChoices& choices, Treatment treatment,
                      const RingSpec& spec) {
  LevelProfile out;
  out.treatment = treatment;
  out.ring_level = ring_level(choices.ring);
  out.guess_level = Level::R4;
  for (std::size_t i = 0; i < 3; ++i) {
    const Level level = choices.guess[i] ? guess_bounds()[i].level_of(*choices.guess[i]) : Level::R0;
    out.guess_level = std::min(out.guess_level, level);
  }
  out.overall = std::min(out.ring_level, out.guess_level);
  if (out.ring_level != Level::R0 && out.ring_level != Level::R4) {
    out.ring_subtype = subtype_of(choices.ring, out.ring_level, spec);
  }
  return out;
}

std::string ring_type_label(Level level, RingSubtype subtype, bool fold_br) {
  if (subtype == RingSubtype::plain) return to_string(level);
  if (fold_br && subtype == RingSubtype::BR) subtype = RingSubtype::NS;
  return to_string(level) + "-" + to_string(subtype);
}

std::vector<std::string> ring_type_labels(bool fold_br) {
  std::vector<std::string> labels{"R0"};
  for (Level level : {Level::R1, Level::R2, Level::R3}) {
    labels.push_back(to_string(level) + "-S");
    labels.push_back(to_string(level) + "-NS");
    if (!fold_br && level != Level::R1) labels.push_back(to_string(level) + "-BR");
  }
  labels.push_back("R4");
  return labels;
}

namespace {

Level pick(const LevelProfile& profile, LevelKind kind) {
  switch (kind) {
    case LevelKind::ring: return profile.ring_level;
    case LevelKind::guess: return profile.guess_level;
    case LevelKind::overall: return profile.overall;
  }
  return profile.overall;
}

std::size_t label_index(const std::vector<std::string>& labels, const std::string& label) {
  return static_cast<std::size_t>(std::find(labels.begin(), labels.end(), label) -
                                  labels.begin());
}

std::vector<std::string> level_labels() {
  std::vector<std::string> labels;
  for (Level level : kLevels) labels.push_back(to_string(level));
  return labels;
}

std::string type_of(const LevelProfile& p, bool fold_br) {
  return ring_type_label(p.ring_level, p.ring_subtype, fold_br);
}

}  // namespace

std::array<std::int64_t, 5> DatasetClassification::marginal(Treatment treatment,
                                                             LevelKind kind) const {
  std::array<std::int64_t, 5> out{};
  for (const auto& s : subjects) {
    if (const auto& p = s.in(treatment)) ++out[static_cast<std::size_t>(to_int(pick(*p, kind)))];
  }
  return out;
}

JointLevelTable DatasetClassification::ring_by_guess(Treatment treatment) const {
  JointLevelTable table;
  table.row_axis = to_string(treatment) + " ring";
  table.col_axis = to_string(treatment) + " guess";
  for (const auto& s : subjects) {
    if (const auto& p = s.in(treatment)) table.add(p->ring_level, p->guess_level);
  }
  return table;
}

JointLevelTable DatasetClassification::robot_by_history(LevelKind kind) const {
  JointLevelTable table;
  table.row_axis = "Robot " + to_string(kind);
  table.col_axis = "History " + to_string(kind);
  for (const auto& s : subjects) {
    if (s.robot && s.history) table.add(pick(*s.robot, kind), pick(*s.history, kind));
  }
  return table;
}

LabeledTable DatasetClassification::ring_types(bool fold_br) const {
  LabeledTable table;
  table.row_header = "type";
  table.row_labels = ring_type_labels(fold_br);
  table.col_labels = {"Robot", "History"};
  table.counts.assign(table.row_labels.size(), std::vector<std::int64_t>(2, 0));
  for (const auto& s : subjects) {
    for (Treatment t : kTreatments) {
      if (const auto& p = s.in(t)) {
        ++table.counts[label_index(table.row_labels, type_of(*p, fold_br))]
                      [static_cast<std::size_t>(t)];
      }
    }
  }
  return table;
}

LabeledTable DatasetClassification::ring_type_by_guess(Treatment treatment, bool fold_br) const {
  LabeledTable table;
  table.row_header = "ring\\guess";
  table.row_labels = ring_type_labels(fold_br);
  table.col_labels = level_labels();
  table.counts.assign(table.row_labels.size(), std::vector<std::int64_t>(5, 0));
  for (const auto& s : subjects) {
    if (const auto& p = s.in(treatment)) {
      ++table.counts[label_index(table.row_labels, type_of(*p, fold_br))]
                    [static_cast<std::size_t>(to_int(p->guess_level))];
    }
  }
  return table;
}

LabeledTable DatasetClassification::ring_type_robot_by_history(bool fold_br) const {
  LabeledTable table;
  table.row_header = "robot\\history";
  table.row_labels = ring_type_labels(fold_br);
  table.col_labels = table.row_labels;
  table.counts.assign(table.row_labels.size(),
                      std::vector<std::int64_t>(table.row_labels.size(), 0));
  for (const auto& s : subjects) {
    if (s.robot && s.history) {
      ++table.counts[label_index(table.row_labels, type_of(*s.robot, fold_br))]
                    [label_index(table.col_labels, type_of(*s.history, fold_br))];
    }
  }
  return table;
}

namespace {

nlohmann::json profile_json(const LevelProfile& p) {
  return {{"ring", to_string(p.ring_level)},
          {"guess", to_string(p.guess_level)},
          {"overall", to_string(p.overall)},
          {"ring_subtype", to_string(p.ring_subtype)},
          {"ring_type", ring_type_label(p.ring_level, p.ring_subtype, false)}};
}

}  // namespace

nlohmann::json DatasetClassification::to_json() const {
  nlohmann::json doc;
  doc["subjects"] = nlohmann::json::array();
  for (const auto& s : subjects) {
    nlohmann::json entry = {
        {"subject_id", s.subject_id}, {"session_id", s.session_id}, {"order", to_string(s.order)}};
    for (Treatment t : kTreatments) {
      if (const auto& p = s.in(t)) entry[to_string(t)] = profile_json(*p);
    }
    doc["subjects"].push_back(entry);
  }
  doc["exclusions"] = nlohmann::json::array();
  for (const auto& e : exclusions) {
    doc["exclusions"].push_back({{"subject_id", e.subject_id}, {"reason", e.reason}});
  }
  nlohmann::json marginals;
  for (Treatment t : kTreatments) {
    for (LevelKind kind : {LevelKind::overall, LevelKind::ring, LevelKind::guess}) {
      marginals[to_string(t)][to_string(kind)] = marginal(t, kind);
    }
  }
  doc["marginals"] = marginals;
  doc["ring_by_guess"] = {{"Robot", ring_by_guess(Treatment::Robot).to_json()},
                          {"History", ring_by_guess(Treatment::History).to_json()}};
  doc["robot_by_history"] = {{"ring", robot_by_history(LevelKind::ring).to_json()},
                             {"guess", robot_by_history(LevelKind::guess).to_json()}};
  doc["ring_types"] = ring_types(true).to_json();
  doc["ring_types_with_br"] = ring_types(false).to_json();
  return doc;
}

std::string DatasetClassification::subjects_csv() const {
  std::ostringstream out;
  out << "subject_id,session_id,order,treatment,ring,guess,overall,ring_subtype\n";
  for (const auto& s : subjects) {
    for (Treatment t : kTreatments) {
      if (const auto& p = s.in(t)) {
        out << s.subject_id << ',' << s.session_id << ',' << to_string(s.order) << ','
            << to_string(t) << ',' << to_string(p->ring_level) << ','
            << to_string(p->guess_level) << ',' << to_string(p->overall) << ','
            << to_string(p->ring_subtype) << '\n';
      }
    }
  }
  return out.str();
}

DatasetClassification classify_dataset(const std::vector<SubjectRecord>& records,
                                       const RingSpec& spec, const std::set<Treatment>& required,
                                       unsigned workers) {
  // Each slot is filled by exactly one worker; the merge below runs in input order.
  std::vector<std::optional<SubjectLevels>> results(records.size());
  std::vector<std::string> reasons(records.size());

  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& record = records[i];
      std::string missing;
      for (Treatment t : required) {
        if (!record.choices(t)) missing += (missing.empty() ? "" : ", ") + to_string(t);
      }
      if (!missing.empty()) {
        reasons[i] = "missing treatment: " + missing;
        continue;
      }
      SubjectLevels levels{record.subject_id, record.session_id, record.order, {}, {}};
      if (record.robot) levels.robot = classify(*record.robot, Treatment::Robot, spec);
      if (record.history) levels.history = classify(*record.history, Treatment::History, spec);
      results[i] = std::move(levels);
    }
  };

  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(records.size())));
  if (workers <= 1) {
    work(0, records.size());
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (records.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(records.size(), w * chunk);
      const std::size_t end = std::min(records.size(), begin + chunk);
      threads.emplace_back(work, begin, end);
    }
    for (auto& t : threads) t.join();
  }

  DatasetClassification out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (results[i]) {
      out.subjects.push_back(std::move(*results[i]));
    } else {
      out.exclusions.push_back({records[i].subject_id, reasons[i]});
    }
  }
  return out;
}

}  // namespace levelscope
