#include <algorithm>
#include <charconv>
#include <limits>
#include <map>
#include <mutex>

#include "levelscope/assets.hpp"
#include "levelscope/datalab.hpp"
#include "levelscope/error.hpp"

namespace levelscope {

std::string to_string(TableId id) {
  switch (id) {
    case TableId::A1: return "A1";
    case TableId::A3: return "A3";
    case TableId::A4: return "A4";
    case TableId::T3: return "T3";
    case TableId::A5: return "A5";
    case TableId::A6: return "A6";
    case TableId::A7: return "A7";
    case TableId::B1: return "B1";
    case TableId::B2: return "B2";
    case TableId::B3: return "B3";
  }
  return "?";
}

std::optional<TableId> parse_table_id(std::string_view text) {
  for (TableId id : kTableIds) {
    if (text == to_string(id)) return id;
  }
  return std::nullopt;
}

namespace {

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                         : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

std::optional<std::int64_t> parse_count(const std::string& text) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || v < 0) {
    return std::nullopt;
  }
  return v;
}

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

TableAsset load_table(TableId id) {
  const auto text = embedded_asset("tables/" + to_string(id) + ".csv");
  TableAsset asset;
  asset.id = id;
  std::vector<std::vector<std::string>> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) continue;
      const auto key = trim(line.substr(1, colon - 1));
      const auto value = trim(line.substr(colon + 1));
      if (key == "table") {
        asset.caption = value;
      } else if (key == "granularity") {
        const auto semi = value.find(';');
        asset.granularity = trim(std::string_view(value).substr(0, semi));
        if (semi != std::string::npos) asset.notes = trim(std::string_view(value).substr(semi + 1));
      }
      continue;
    }
    rows.push_back(split_fields(trim(line)));
  }
  if (rows.size() < 2) throw SchemaError("table " + to_string(id) + " has no data");
  const auto& header = rows.front();
  std::size_t keys = 0;
  while (keys < header.size() && !parse_count(rows[1][keys])) ++keys;
  if (keys == 0 || keys == header.size()) throw SchemaError("table " + to_string(id) + ": no key columns");

  auto& t = asset.table;
  for (std::size_t k = 0; k < keys; ++k) t.row_header += (k ? "/" : "") + header[k];
  t.col_labels.assign(header.begin() + static_cast<long>(keys), header.end());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw SchemaError("table " + to_string(id) + ": row " + std::to_string(r) + " has wrong width");
    }
    std::string label;
    for (std::size_t k = 0; k < keys; ++k) label += (k ? "/" : "") + row[k];
    std::vector<std::int64_t> counts;
    for (std::size_t c = keys; c < row.size(); ++c) {
      const auto v = parse_count(row[c]);
      if (!v) throw SchemaError("table " + to_string(id) + ": bad count '" + row[c] + "'");
      counts.push_back(*v);
    }
    t.row_labels.push_back(label);
    t.counts.push_back(std::move(counts));
  }
  return asset;
}

std::pair<Level, RingSubtype> parse_ring_type(std::string_view label) {
  const auto dash = label.find('-');
  const auto level = parse_level(label.substr(0, dash));
  if (!level) throw DomainError("unknown ring type " + std::string(label));
  if (dash == std::string_view::npos) return {*level, RingSubtype::plain};
  const auto suffix = label.substr(dash + 1);
  RingSubtype subtype;
  if (suffix == "S") subtype = RingSubtype::S;
  else if (suffix == "NS") subtype = RingSubtype::NS;
  else if (suffix == "BR") subtype = RingSubtype::BR;
  else throw DomainError("unknown ring type " + std::string(label));
  if (*level == Level::R0 || *level == Level::R4) {
    throw DomainError("ring type " + std::string(label) + " has no subtypes");
  }
  return {*level, subtype};
}

LabeledTable ReconstructedDataset::aggregate() const {
  LabeledTable out;
  out.row_header = source.row_header;
  out.row_labels = source.row_labels;
  out.col_labels = source.col_labels;
  out.counts.assign(out.row_labels.size(), std::vector<std::int64_t>(out.col_labels.size(), 0));
  std::map<std::string, std::size_t> rows;
  std::map<std::string, std::size_t> cols;
  for (std::size_t i = 0; i < out.row_labels.size(); ++i) rows[out.row_labels[i]] = i;
  for (std::size_t j = 0; j < out.col_labels.size(); ++j) cols[out.col_labels[j]] = j;
  for (const auto& u : units) out.counts.at(rows.at(u.row)).at(cols.at(u.col)) += 1;
  return out;
}

namespace {

bool is_level_joint(TableId id) {
  return id == TableId::T3 || id == TableId::A5 || id == TableId::B1 || id == TableId::B2;
}

Level level_label(const std::string& text) {
  const auto level = parse_level(text);
  if (!level) throw DomainError("not a level label: " + text);
  return *level;
}

}  // namespace

JointLevelTable ReconstructedDataset::joint() const {
  if (!is_level_joint(id)) {
    throw DomainError("table " + to_string(id) + " is not a 5x5 level table");
  }
  JointLevelTable table;
  const auto slash = source.row_header.find('\\');
  table.row_axis = source.row_header.substr(0, slash);
  table.col_axis = slash == std::string::npos ? "col" : source.row_header.substr(slash + 1);
  for (const auto& u : units) table.add(level_label(u.row), level_label(u.col));
  return table;
}

std::vector<SubjectRecord> ReconstructedDataset::records(const RingSpec& spec,
                                                         std::uint64_t seed) const {
  if (id == TableId::A1 || id == TableId::A3 || id == TableId::A4) {
    throw DomainError("table " + to_string(id) + " does not pair levels per subject");
  }
  const ChoiceSynthesizer synth(spec);
  std::vector<SubjectRecord> out;
  out.reserve(units.size());
  std::uint64_t index = 0;
  for (const auto& u : units) {
    Rng rng = substream(seed, streams::kSynthesis, index++);
    SubjectRecord r;
    r.subject_id = u.id;
    r.session_id = "reconstructed-" + to_string(id);
    r.order = TreatmentOrder::RH;
    const auto type = [](const std::string& label) { return parse_ring_type(label); };
    switch (id) {
      case TableId::T3:
        r.robot = synth(level_label(u.row), RingSubtype::plain, level_label(u.col), rng);
        break;
      case TableId::A5:
        r.history = synth(level_label(u.row), RingSubtype::plain, level_label(u.col), rng);
        break;
      case TableId::A6:
      case TableId::A7: {
        const auto [level, subtype] = type(u.row);
        (id == TableId::A6 ? r.robot : r.history) = synth(level, subtype, level_label(u.col), rng);
        break;
      }
      case TableId::B1:
        r.robot = synth(level_label(u.row), RingSubtype::plain, Level::R4, rng);
        r.history = synth(level_label(u.col), RingSubtype::plain, Level::R4, rng);
        break;
      case TableId::B2:
        r.robot = synth(Level::R4, RingSubtype::plain, level_label(u.row), rng);
        r.history = synth(Level::R4, RingSubtype::plain, level_label(u.col), rng);
        break;
      case TableId::B3: {
        const auto [rl, rs] = type(u.row);
        const auto [hl, hs] = type(u.col);
        r.robot = synth(rl, rs, Level::R4, rng);
        r.history = synth(hl, hs, Level::R4, rng);
        break;
      }
      default: break;
    }
    out.push_back(std::move(r));
  }
  return out;
}

nlohmann::json ReconstructedDataset::to_json(bool include_units) const {
  nlohmann::json doc = {{"table", to_string(id)},
                        {"provenance", provenance},
                        {"granularity", granularity},
                        {"supports", supports},
                        {"does_not_support", does_not_support},
                        {"n_units", units.size()},
                        {"source", source.to_json()}};
  if (is_level_joint(id)) doc["joint"] = joint().to_json();
  if (include_units) {
    auto& list = doc["units"] = nlohmann::json::array();
    for (const auto& u : units) list.push_back({{"id", u.id}, {"row", u.row}, {"col", u.col}});
  }
  return doc;
}

ReconstructedDataset reconstruct(TableId id) {
  const auto asset = load_table(id);
  ReconstructedDataset ds;
  ds.id = id;
  ds.provenance = "Table " + asset.caption;
  ds.granularity = asset.granularity;
  ds.source = asset.table;
  const auto& g = ds.granularity;
  if (g == "position_marginals") {
    ds.supports = {"chi_square", "empirical_best_response"};
    ds.does_not_support = {"classification", "level_statistics", "cross_treatment_pairing"};
  } else if (g == "level_marginals" || g == "level_marginals_secure") {
    ds.supports = {"level_distributions", "percentile"};
    ds.does_not_support = {"per_subject_pairing", "pair_statistics", "cross_treatment_pairing"};
  } else if (g == "joint_levels" || g == "joint_levels_secure") {
    ds.supports = {"constant_level", "pair_statistics", "null_simulation", "classification_roundtrip"};
    ds.does_not_support = {"cross_treatment_pairing", "action_level_analysis"};
  } else if (g == "cross_treatment_joint" || g == "cross_treatment_joint_secure") {
    ds.supports = {"wilcoxon", "weakly_higher_share", "ks", "classification_roundtrip"};
    ds.does_not_support = {"within_treatment_joint_levels", "action_level_analysis"};
  } else {
    throw SchemaError("table " + to_string(id) + ": unknown granularity " + g);
  }
  const auto& t = ds.source;
  std::size_t serial = 0;
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    for (std::size_t c = 0; c < t.col_labels.size(); ++c) {
      for (std::int64_t k = 0; k < t.counts[r][c]; ++k) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04zu", ++serial);
        ds.units.push_back({to_string(id) + "-" + buf, t.row_labels[r], t.col_labels[c]});
      }
    }
  }
  return ds;
}

ReconstructedDataset reconstruct(std::string_view id) {
  const auto parsed = parse_table_id(id);
  if (!parsed) throw DomainError("unknown table id " + std::string(id));
  return reconstruct(*parsed);
}

const std::array<RingPair, 9>& a1_profile_order() {
  using A = RingAction;
  static const std::array<RingPair, 9> order = {{{A::a, A::a}, {A::b, A::b}, {A::c, A::c},
                                                 {A::a, A::b}, {A::a, A::c}, {A::b, A::a},
                                                 {A::b, A::c}, {A::c, A::a}, {A::c, A::b}}};
  return order;
}

std::vector<std::int64_t> a1_profile_counts(const ReconstructedDataset& a1, Treatment treatment,
                                            Position position) {
  if (a1.id != TableId::A1) throw DomainError("expected the Table A.1 reconstruction");
  const auto table = a1.aggregate();
  std::vector<std::int64_t> out;
  for (const auto& pair : a1_profile_order()) {
    const std::string label =
        to_string(treatment) + "/" + std::string{to_char(pair.g1), to_char(pair.g2)};
    out.push_back(table.at(label, to_string(position)));
  }
  return out;
}

std::array<Rational, 3> a1_action_frequencies(const ReconstructedDataset& a1, Treatment treatment,
                                              GameId game, Position position) {
  const auto counts = a1_profile_counts(a1, treatment, position);
  std::array<std::int64_t, 3> by_action{};
  std::int64_t n = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    by_action[index_of(a1_profile_order()[i].in(game))] += counts[i];
    n += counts[i];
  }
  if (n == 0) throw DomainError("no observations at " + to_string(position));
  return {Rational(by_action[0], n), Rational(by_action[1], n), Rational(by_action[2], n)};
}

std::int64_t weakly_higher_count(const JointLevelTable& table) {
  std::int64_t count = 0;
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c <= r; ++c) count += table.counts[r][c];
  }
  return count;
}

namespace {

// Min-cost flow from 25 ring cells to 25 guessing cells with unit costs in
// {-1, 0, 1}; successive shortest paths with Bellman-Ford.
std::int64_t transport_cost(const JointLevelTable& ring, const JointLevelTable& guess,
                            const std::array<std::array<int, 25>, 25>& cost) {
  constexpr int kSource = 50;
  constexpr int kSink = 51;
  constexpr int kNodes = 52;
  struct Edge {
    int to;
    std::int64_t cap;
    int cost;
    std::size_t rev;
  };
  std::vector<std::vector<Edge>> graph(kNodes);
  const auto add = [&](int u, int v, std::int64_t cap, int c) {
    graph[static_cast<std::size_t>(u)].push_back({v, cap, c, graph[static_cast<std::size_t>(v)].size()});
    graph[static_cast<std::size_t>(v)].push_back({u, 0, -c, graph[static_cast<std::size_t>(u)].size() - 1});
  };
  for (int i = 0; i < 25; ++i) {
    add(kSource, i, ring.counts[static_cast<std::size_t>(i / 5)][static_cast<std::size_t>(i % 5)], 0);
    add(25 + i, kSink, guess.counts[static_cast<std::size_t>(i / 5)][static_cast<std::size_t>(i % 5)], 0);
    for (int j = 0; j < 25; ++j) {
      add(i, 25 + j, std::numeric_limits<std::int64_t>::max() / 4,
          cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    }
  }
  std::int64_t total = 0;
  while (true) {
    std::vector<std::int64_t> dist(kNodes, std::numeric_limits<std::int64_t>::max());
    std::vector<std::pair<int, std::size_t>> parent(kNodes, {-1, 0});
    dist[kSource] = 0;
    for (int iter = 0; iter < kNodes; ++iter) {
      bool changed = false;
      for (int u = 0; u < kNodes; ++u) {
        if (dist[static_cast<std::size_t>(u)] == std::numeric_limits<std::int64_t>::max()) continue;
        for (std::size_t e = 0; e < graph[static_cast<std::size_t>(u)].size(); ++e) {
          const auto& edge = graph[static_cast<std::size_t>(u)][e];
          const auto nd = dist[static_cast<std::size_t>(u)] + edge.cost;
          if (edge.cap > 0 && nd < dist[static_cast<std::size_t>(edge.to)]) {
            dist[static_cast<std::size_t>(edge.to)] = nd;
            parent[static_cast<std::size_t>(edge.to)] = {u, e};
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[kSink] == std::numeric_limits<std::int64_t>::max()) break;
    std::int64_t push = std::numeric_limits<std::int64_t>::max();
    for (int v = kSink; v != kSource;) {
      const auto [u, e] = parent[static_cast<std::size_t>(v)];
      push = std::min(push, graph[static_cast<std::size_t>(u)][e].cap);
      v = u;
    }
    for (int v = kSink; v != kSource;) {
      const auto [u, e] = parent[static_cast<std::size_t>(v)];
      auto& edge = graph[static_cast<std::size_t>(u)][e];
      edge.cap -= push;
      graph[static_cast<std::size_t>(v)][edge.rev].cap += push;
      v = u;
    }
    total += push * dist[kSink];
  }
  return total;
}

int weakly_higher_overall(int ring_cell, int guess_cell) {
  const int robot = std::min(ring_cell / 5, guess_cell / 5);
  const int history = std::min(ring_cell % 5, guess_cell % 5);
  return robot >= history ? 1 : 0;
}

}  // namespace

CouplingBounds overall_weakly_higher_bounds(const JointLevelTable& ring,
                                            const JointLevelTable& guess) {
  if (ring.n() != guess.n()) throw DomainError("ring and guessing tables differ in size");
  std::array<std::array<int, 25>, 25> cost{};
  for (int i = 0; i < 25; ++i) {
    for (int j = 0; j < 25; ++j) {
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = weakly_higher_overall(i, j);
    }
  }
  CouplingBounds bounds;
  bounds.min = transport_cost(ring, guess, cost);
  for (auto& row : cost) {
    for (auto& c : row) c = -c;
  }
  bounds.max = -transport_cost(ring, guess, cost);

  // Units of each table in row-major order, paired by position.
  const auto expand = [](const JointLevelTable& t) {
    std::vector<int> cells;
    for (int i = 0; i < 25; ++i) {
      for (std::int64_t k = 0; k < t.counts[static_cast<std::size_t>(i / 5)][static_cast<std::size_t>(i % 5)]; ++k) {
        cells.push_back(i);
      }
    }
    return cells;
  };
  const auto a = expand(ring);
  const auto b = expand(guess);
  for (std::size_t i = 0; i < a.size(); ++i) bounds.independent_order += weakly_higher_overall(a[i], b[i]);
  return bounds;
}

int guess_midpoint(std::size_t guess_index, Level level) {
  static const std::array<GuessBounds, 3> bounds = [] {
    std::array<GuessBounds, 3> out;
    for (std::size_t i = 0; i < 3; ++i) out[i] = eliminate_guessing(GuessingGame(kGuessMultipliers[i]));
    return out;
  }();
  if (level == Level::R4) return kMinGuess;
  const auto [lo, hi] = bounds.at(guess_index).interval(level);
  return (lo + hi) / 2;
}

namespace {

// Canonical rows revealing each ring level.
const std::array<RingChoiceProfile, 5>& canonical_rows() {
  static const std::array<RingChoiceProfile, 5> rows = {
      RingChoiceProfile::parse("bc,ca,cb,ac"), RingChoiceProfile::parse("aa,bb,aa,bc"),
      RingChoiceProfile::parse("bc,bb,cb,bc"), RingChoiceProfile::parse("aa,ca,cb,bc"),
      RingChoiceProfile::parse("bc,ca,cb,bc")};
  return rows;
}

std::size_t free_positions(Level level) { return static_cast<std::size_t>(4 - to_int(level)); }

RingChoiceProfile equilibrium_profile() { return canonical_rows()[4]; }

}  // namespace

ChoiceSynthesizer::ChoiceSynthesizer(const RingSpec& spec) : spec_(&spec) {
  for (Level level : {Level::R1, Level::R2, Level::R3}) {
    const std::size_t free = free_positions(level);
    std::size_t combos = 1;
    for (std::size_t i = 0; i < free; ++i) combos *= 9;
    for (std::size_t code = 0; code < combos; ++code) {
      RingChoiceProfile profile = equilibrium_profile();
      std::size_t rest = code;
      for (std::size_t p = 0; p < free; ++p, rest /= 9) {
        profile.pairs[p] = {kRingActions[rest % 9 / 3], kRingActions[rest % 3]};
      }
      if (classify_ring(profile) == level &&
          classify_subtype(profile, level, spec) == RingSubtype::NS) {
        non_secure_[static_cast<std::size_t>(to_int(level))].push_back(profile);
      }
    }
  }
}

RingChoiceProfile ChoiceSynthesizer::ring(Level level, RingSubtype subtype, Rng& rng) const {
  const bool has_subtypes = level != Level::R0 && level != Level::R4;
  if (!has_subtypes && subtype != RingSubtype::plain) {
    throw DomainError(to_string(level) + " has no ring subtypes");
  }
  if (subtype == RingSubtype::BR && level == Level::R1) {
    throw DomainError("the best-response subtype applies to R2 and R3 only");
  }
  if (subtype == RingSubtype::plain) return canonical_rows()[static_cast<std::size_t>(to_int(level))];
  if (subtype == RingSubtype::NS) {
    const auto& options = non_secure_[static_cast<std::size_t>(to_int(level))];
    if (options.empty()) throw DomainError("no non-secure profile reveals " + to_string(level));
    return options[uniform_index(rng, options.size())];
  }
  RingChoiceProfile profile = equilibrium_profile();
  for (std::size_t p = 0; p < free_positions(level); ++p) {
    const Position position = kPositions[p];
    const RingAction g1 = secure_action(*spec_, GameId::G1, position);
    const RingAction g2 = subtype == RingSubtype::S ? secure_action(*spec_, GameId::G2, position)
                                                    : equilibrium_action(GameId::G2, position);
    profile.pairs[p] = {g1, g2};
  }
  if (classify_ring(profile) != level || classify_subtype(profile, level, *spec_) != subtype) {
    throw DomainError("matrices cannot realize " + ring_type_label(level, subtype, false));
  }
  return profile;
}

GuessChoiceProfile ChoiceSynthesizer::guesses(Level level) const {
  return {{guess_midpoint(0, level), guess_midpoint(1, level), guess_midpoint(2, level)}};
}

TreatmentChoices ChoiceSynthesizer::operator()(Level ring_level, RingSubtype subtype,
                                               Level guess_level, Rng& rng) const {
  return TreatmentChoices::from(ring(ring_level, subtype, rng), guesses(guess_level));
}

TreatmentChoices synthesize_choices(Level ring_level, RingSubtype subtype, Level guess_level,
                                    const RingSpec& spec, Rng& rng) {
  return ChoiceSynthesizer(spec)(ring_level, subtype, guess_level, rng);
}

std::shared_ptr<const HistoryPool> reconstructed_robot_pool(const RingSpec& spec) {
  auto pool = std::make_shared<HistoryPool>();
  pool->id = std::string(kReconstructedPoolId);
  for (const auto& u : reconstruct(TableId::A1).units) {
    if (u.row.rfind("Robot/", 0) != 0) continue;
    const auto profile = u.row.substr(6);
    const auto position = parse_position(u.col);
    const auto g1 = parse_ring_action(profile.substr(0, 1));
    const auto g2 = parse_ring_action(profile.substr(1, 1));
    pool->add_ring(GameId::G1, *position, u.id, *g1);
    pool->add_ring(GameId::G2, *position, u.id, *g2);
  }
  for (const auto& r : reconstruct(TableId::T3).records(spec)) {
    for (std::size_t i = 0; i < 3; ++i) pool->add_guess(i, r.subject_id, *r.robot->guess[i]);
  }
  return pool;
}

nlohmann::json LevelPercentile::to_json() const {
  return {{"treatment", to_string(treatment)},
          {"level", to_string(level)},
          {"n", n},
          {"at", at},
          {"below", below},
          {"above", above},
          {"share_at", to_double(share_at)},
          {"share_at_exact", to_string(share_at)},
          {"share_at_or_below", to_double(share_at_or_below)},
          {"percentile", percentile},
          {"reference", "Table A.3 overall distribution"}};
}

LevelPercentile level_percentile(Level level, Treatment treatment) {
  static const LabeledTable a3 = load_table(TableId::A3).table;
  const auto column = a3.column(to_string(treatment) + "_overall");
  LevelPercentile out;
  out.treatment = treatment;
  out.level = level;
  const auto k = static_cast<std::size_t>(to_int(level));
  for (std::size_t i = 0; i < column.size(); ++i) {
    out.n += column[i];
    if (i < k) out.below += column[i];
    if (i > k) out.above += column[i];
  }
  out.at = column[k];
  out.share_at = Rational(out.at, out.n);
  out.share_at_or_below = Rational(out.below + out.at, out.n);
  out.percentile = 100.0 * (static_cast<double>(out.below) + 0.5 * static_cast<double>(out.at)) /
                   static_cast<double>(out.n);
  return out;
}

}  // namespace levelscope
