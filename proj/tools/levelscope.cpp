// levelscope command-line interface.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "levelscope/datalab.hpp"
#include "levelscope/error.hpp"
#include "levelscope/service.hpp"
#include "levelscope/stats.hpp"

using namespace levelscope;
using nlohmann::json;

namespace {

constexpr const char* kSeedEnv = "LEVELSCOPE_SEED";

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

void print(const json& doc) { std::cout << doc.dump(2) << '\n'; }

std::vector<std::string> split(const std::string& text, const std::string& separators) {
  std::vector<std::string> out;
  std::string token;
  for (char c : text) {
    if (separators.find(c) != std::string::npos) {
      if (!token.empty()) out.push_back(token);
      token.clear();
    } else {
      token += c;
    }
  }
  if (!token.empty()) out.push_back(token);
  return out;
}

std::optional<double> to_number(const std::string& token) {
  try {
    std::size_t used = 0;
    const double value = std::stod(token, &used);
    if (used == token.size()) return value;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

RingSpec spec_from(const std::string& matrices_path) {
  if (matrices_path.empty()) return RingSpec::default_validated();
  return RingSpec::validated(load_ring_matrices(matrices_path));
}

// ---- stats inputs ------------------------------------------------------------------

// A JSON array, or numbers separated by commas, whitespace or newlines. A
// non-numeric first line is taken as a header.
std::vector<double> read_numbers(const std::string& path) {
  const std::string text = read_file(path);
  const auto doc = json::parse(text, nullptr, false);
  if (!doc.is_discarded() && doc.is_array()) return doc.get<std::vector<double>>();
  std::vector<double> values;
  std::istringstream lines(text);
  std::string line;
  for (std::size_t n = 1; std::getline(lines, line); ++n) {
    for (const auto& token : split(line, ", \t\r")) {
      const auto value = to_number(token);
      if (value) {
        values.push_back(*value);
      } else if (n != 1) {
        throw ConfigError(path + ":" + std::to_string(n) + ": not a number: " + token);
      }
    }
  }
  return values;
}

// Rows of numbers with an optional header line.
std::vector<std::vector<double>> read_rows(const std::string& path, std::vector<std::string>* header) {
  const std::string text = read_file(path);
  const auto doc = json::parse(text, nullptr, false);
  if (!doc.is_discarded() && doc.is_array()) return doc.get<std::vector<std::vector<double>>>();
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  for (std::size_t n = 1; std::getline(lines, line); ++n) {
    const auto tokens = split(line, ",\r");
    if (tokens.empty()) continue;
    std::vector<double> row;
    bool numeric = true;
    for (const auto& t : tokens) {
      const auto v = to_number(t);
      numeric = numeric && v.has_value();
      row.push_back(v.value_or(0));
    }
    if (!numeric) {
      if (n == 1 && header) {
        *header = tokens;
        continue;
      }
      throw ConfigError(path + ":" + std::to_string(n) + ": non-numeric row");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// A bundled joint table id (T3, A5, B1, B2), a JSON file or a 5x5 CSV.
JointLevelTable read_joint(const std::string& source) {
  if (const auto id = parse_table_id(source)) return reconstruct(*id).joint();
  const std::string text = read_file(source);
  const auto doc = json::parse(text, nullptr, false);
  if (!doc.is_discarded()) return JointLevelTable::from_json(doc);
  JointLevelTable table;
  std::size_t row = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    auto tokens = split(line, ",\r");
    if (tokens.empty()) continue;
    if (!to_number(tokens.back())) continue;  // header
    if (tokens.size() == 6) tokens.erase(tokens.begin());  // row label
    if (tokens.size() != 5 || row == 5) throw ConfigError(source + ": expected a 5x5 count table");
    for (std::size_t c = 0; c < 5; ++c) table.counts[row][c] = std::stoll(tokens[c]);
    ++row;
  }
  if (row != 5) throw ConfigError(source + ": expected a 5x5 count table");
  return table;
}

// "44,149,34,14,52" or a bundled column such as "A3:Robot_overall".
std::array<std::int64_t, 5> read_marginal(const std::string& text) {
  std::array<std::int64_t, 5> out{};
  if (const auto colon = text.find(':'); colon != std::string::npos) {
    const auto id = parse_table_id(text.substr(0, colon));
    if (!id) throw ConfigError("unknown table " + text.substr(0, colon));
    const auto column = load_table(*id).table.column(text.substr(colon + 1));
    if (column.size() != 5) throw ConfigError(text + " is not a level distribution");
    std::copy(column.begin(), column.end(), out.begin());
    return out;
  }
  const auto tokens = split(text, ", ");
  if (tokens.size() != 5) throw ConfigError("marginal needs five counts R0..R4");
  for (std::size_t i = 0; i < 5; ++i) out[i] = std::stoll(tokens[i]);
  return out;
}

std::vector<std::int64_t> read_counts(const std::string& text) {
  std::vector<std::int64_t> out;
  for (const auto& t : split(text, ", ")) out.push_back(std::stoll(t));
  return out;
}

// ---- ieds text -----------------------------------------------------------------------

std::string actions_text(const ActionSet& set) {
  std::string s;
  for (RingAction a : set) s += to_char(a);
  return s;
}

void print_ring_rounds(const RingRationalizable& result) {
  for (GameId g : kRingGames) {
    const auto& e = result.game(g);
    std::cout << to_string(g) << '\n' << std::left << std::setw(7) << "round";
    for (Position p : kPositions) std::cout << std::setw(6) << to_string(p);
    std::cout << '\n';
    for (std::size_t k = 0; k < e.rounds.size(); ++k) {
      std::cout << std::setw(7) << k;
      for (Position p : kPositions) std::cout << std::setw(6) << actions_text(e.survivors(p, k));
      std::cout << '\n';
    }
    std::cout << '\n';
  }
}

void print_guess_rounds(const GuessBounds& bounds) {
  std::cout << "p = " << to_string(bounds.p) << '\n' << std::left << std::setw(7) << "round"
            << "survivors\n";
  for (std::size_t k = 0; k < bounds.upper.size(); ++k) {
    std::cout << std::setw(7) << k << "1-" << bounds.upper[k] << '\n';
  }
  std::cout << '\n' << std::setw(7) << "level" << "guesses\n";
  for (Level level : kLevels) {
    const auto [lo, hi] = bounds.interval(level);
    std::cout << std::setw(7) << to_string(level) << lo << '-' << hi << '\n';
  }
}

// ---- simulate ------------------------------------------------------------------------

struct SimulatedType {
  Level ring = Level::R4;
  RingSubtype subtype = RingSubtype::plain;
  Level guess = Level::R4;
};

SimulatedType type_from(const std::string& ring_type, const std::string& guess) {
  const auto [ring, subtype] = parse_ring_type(ring_type);
  const auto g = parse_level(guess);
  if (!g) throw ConfigError("unknown level " + guess);
  return {ring, subtype, *g};
}

// A (ring, guess) level pair drawn from a reconstructed joint table; the
// ring subtype is plain for R0/R4 and secure otherwise.
SimulatedType type_from_table(const ReconstructedDataset& table, Rng& rng) {
  const auto& unit = table.units[uniform_index(rng, table.units.size())];
  const Level ring = *parse_level(unit.row);
  const bool plain = ring == Level::R0 || ring == Level::R4;
  return {ring, plain ? RingSubtype::plain : RingSubtype::S, *parse_level(unit.col)};
}

std::atomic<HttpServer*> g_server{nullptr};

void stop_server(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rationality-level analysis for ring and guessing game experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "levelscope 1.0.0");

  // validate-games
  std::string matrices_path;
  std::string format = "text";
  auto* validate = app.add_subcommand("validate-games", "Check a ring matrix file against every validator clause");
  validate->add_option("--matrices", matrices_path, "Ring matrix JSON")->required()->check(CLI::ExistingFile);
  validate->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  // ieds
  std::string ieds_game = "ring";
  std::string ieds_p = "2/3";
  std::string ieds_dominance = "mixed";
  auto* ieds = app.add_subcommand("ieds", "Iterated elimination of dominated strategies, round by round");
  ieds->add_option("--game", ieds_game)->required()->check(CLI::IsMember({"ring", "guess"}));
  ieds->add_option("--p", ieds_p, "Guessing multiplier, e.g. 2/3");
  ieds->add_option("--matrices", matrices_path)->check(CLI::ExistingFile);
  ieds->add_option("--dominance", ieds_dominance)->check(CLI::IsMember({"mixed", "pure"}));
  ieds->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  // classify
  std::string data_path;
  unsigned workers = 1;
  std::vector<std::string> required_treatments = {"Robot", "History"};
  auto* classify_cmd = app.add_subcommand("classify", "Assign rationality levels to a subject dataset");
  classify_cmd->add_option("--data", data_path, "Subject CSV")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--matrices", matrices_path)->check(CLI::ExistingFile);
  classify_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "csv", "text"}));
  classify_cmd->add_option("--workers", workers)->check(CLI::Range(1u, 256u));
  classify_cmd->add_option("--require", required_treatments, "Treatments a subject must have")
      ->delimiter(',');

  // simulate
  std::string config_path;
  std::size_t subjects = 10;
  std::uint64_t seed = 0;
  std::string robot_type = "R4", robot_guess = "R4", history_type = "R4", history_guess = "R4";
  std::string from_tables;
  std::string csv_out, transcripts_out;
  auto* simulate = app.add_subcommand("simulate", "Play synthetic subjects through the session protocol");
  simulate->add_option("--config", config_path, "Session config JSON")->check(CLI::ExistingFile);
  simulate->add_option("--subjects", subjects)->check(CLI::Range(std::size_t{1}, std::size_t{1000000}));
  simulate->add_option("--seed", seed)->envname(kSeedEnv);
  simulate->add_option("--robot-type", robot_type, "Ring type in the Robot Treatment, e.g. R2-S");
  simulate->add_option("--robot-guess", robot_guess);
  simulate->add_option("--history-type", history_type);
  simulate->add_option("--history-guess", history_guess);
  simulate->add_option("--from-tables", from_tables,
                       "Draw Robot and History level pairs from two joint tables, e.g. T3,A5");
  simulate->add_option("--csv", csv_out, "Write the subject CSV here");
  simulate->add_option("--transcripts", transcripts_out, "Write JSONL transcripts here");

  // stats
  auto* stats = app.add_subcommand("stats", "Statistical tests and level-table statistics");
  stats->require_subcommand(1);
  std::string table_source;
  auto* constant = stats->add_subcommand("constant-level", "Share of subjects on the diagonal");
  constant->add_option("--table", table_source, "T3, A5, B1, B2 or a JSON/CSV 5x5 file")->required();
  auto* pairs_cmd = stats->add_subcommand("pair-stats", "Switch and direction frequencies over subject pairs");
  pairs_cmd->add_option("--table", table_source)->required();

  std::string marginal_text, col_marginal_text, statistic_name = "constant_level", observed_source;
  std::size_t draws = 10000;
  std::int64_t n_subjects = 0;
  bool include_samples = false;
  auto* null_sim = stats->add_subcommand("null-sim", "Monte Carlo null distribution under independence");
  null_sim->add_option("--marginal", marginal_text, "Five counts or a bundled column like A3:Robot_overall")
      ->required();
  null_sim->add_option("--col-marginal", col_marginal_text);
  null_sim->add_option("--statistic", statistic_name);
  null_sim->add_option("--draws", draws)->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
  null_sim->add_option("--subjects", n_subjects);
  null_sim->add_option("--seed", seed)->required()->envname(kSeedEnv);
  null_sim->add_option("--workers", workers)->check(CLI::Range(1u, 256u));
  null_sim->add_option("--observed", observed_source, "Observed table for the p-value");
  null_sim->add_flag("--samples", include_samples, "Include every draw in the output");

  std::string x_path, y_path;
  auto* ks = stats->add_subcommand("ks", "Two-sample Kolmogorov-Smirnov test");
  ks->add_option("--x", x_path)->required()->check(CLI::ExistingFile);
  ks->add_option("--y", y_path)->required()->check(CLI::ExistingFile);

  std::string pairs_path, zero_method = "wilcoxon";
  auto* wilcoxon = stats->add_subcommand("wilcoxon", "Wilcoxon signed-rank test on before,after pairs");
  wilcoxon->add_option("--pairs", pairs_path)->required()->check(CLI::ExistingFile);
  wilcoxon->add_option("--zero-method", zero_method)->check(CLI::IsMember({"wilcoxon", "pratt"}));

  std::string counts_a, counts_b, chisq_position;
  auto* chisq = stats->add_subcommand("chisq", "Chi-square homogeneity of two count vectors");
  chisq->add_option("--a", counts_a, "Comma-separated counts");
  chisq->add_option("--b", counts_b);
  chisq->add_option("--a1-position", chisq_position, "Compare Robot and History profiles of Table A.1 at P1..P4");

  std::string y_column, cluster_column;
  std::vector<std::string> x_columns;
  bool no_constant = false;
  auto* ols = stats->add_subcommand("ols", "OLS with cluster-robust standard errors");
  ols->add_option("--data", data_path, "Numeric CSV with a header; the cluster column may be text")
      ->required()
      ->check(CLI::ExistingFile);
  ols->add_option("--y", y_column)->required();
  ols->add_option("--x", x_columns)->required()->delimiter(',');
  ols->add_option("--cluster", cluster_column)->required();
  ols->add_flag("--no-constant", no_constant);

  // reconstruct
  std::string table_name;
  bool with_units = false;
  std::string records_out;
  auto* reconstruct_cmd = app.add_subcommand("reconstruct", "Rebuild synthetic data from a bundled appendix table");
  reconstruct_cmd->add_option("--table", table_name, "A1 A3 A4 T3 A5 A6 A7 B1 B2 B3, or all")->required();
  reconstruct_cmd->add_flag("--units", with_units, "List every count unit");
  reconstruct_cmd->add_option("--records", records_out, "Write synthesized subject CSV here");
  reconstruct_cmd->add_option("--seed", seed)->envname(kSeedEnv);
  reconstruct_cmd->add_option("--matrices", matrices_path)->check(CLI::ExistingFile);

  // report
  std::string inputs_path, out_dir;
  auto* report = app.add_subcommand("report", "Render tables and SVG plots from analysis JSON");
  report->add_option("--inputs", inputs_path)->required()->check(CLI::ExistingFile);
  report->add_option("--out", out_dir)->required();

  // serve
  HttpOptions http;
  std::string pool_path, journal_path;
  auto* serve = app.add_subcommand("serve", "Run the session service");
  serve->add_option("--host", http.host)->envname("LEVELSCOPE_HOST");
  serve->add_option("--port", http.port)->envname("LEVELSCOPE_PORT")->check(CLI::Range(0, 65535));
  serve->add_option("--matrices", matrices_path)->envname("LEVELSCOPE_MATRICES")->check(CLI::ExistingFile);
  serve->add_option("--pool", pool_path, "Subject CSV replayed by History opponents")
      ->envname("LEVELSCOPE_POOL")
      ->check(CLI::ExistingFile);
  serve->add_option("--journal", journal_path)->envname("LEVELSCOPE_JOURNAL");
  serve->add_option("--cors-origin", http.cors_origin)->envname("LEVELSCOPE_CORS_ORIGIN");
  serve->add_option("--static-dir", http.static_dir)->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      const auto report_v = validate_ring_spec(load_ring_matrices(matrices_path));
      if (format == "json") {
        print(report_v.to_json());
      } else {
        std::cout << report_v.to_text();
      }
      return report_v.passed() ? 0 : 1;
    }

    if (*ieds) {
      if (ieds_game == "guess") {
        const auto bounds = eliminate_guessing(GuessingGame(parse_rational(ieds_p)));
        if (format == "json") {
          print(to_json(bounds));
        } else {
          print_guess_rounds(bounds);
        }
        return 0;
      }
      const auto matrices = matrices_path.empty() ? default_ring_matrices() : load_ring_matrices(matrices_path);
      const auto validation = validate_ring_spec(matrices);
      if (!validation.passed()) std::cerr << "warning: matrices fail the validator; solving anyway\n";
      const auto result = eliminate_ring(RingSpec::unchecked(matrices),
                                         ieds_dominance == "pure" ? DominanceKind::pure : DominanceKind::mixed);
      if (format == "json") {
        print(to_json(result));
      } else {
        print_ring_rounds(result);
      }
      return 0;
    }

    if (*classify_cmd) {
      const auto spec = spec_from(matrices_path);
      const auto loaded = load_dataset(data_path);
      if (!loaded.rejected.empty()) std::cerr << loaded.report().dump(2) << '\n';
      std::set<Treatment> required;
      for (const auto& t : required_treatments) {
        const auto parsed = parse_treatment(t);
        if (!parsed) throw ConfigError("--require: unknown treatment " + t);
        required.insert(*parsed);
      }
      const auto result = classify_dataset(loaded.records, spec, required, workers);
      if (format == "csv") {
        std::cout << result.subjects_csv();
      } else {
        auto doc = result.to_json();
        doc["rejected_rows"] = loaded.report()["rejected"];
        print(doc);
      }
      return 0;
    }

    if (*simulate) {
      json config_doc = {{"order", "RH"},
                         {"matrices", "default"},
                         {"opponents", {{"kind", "history"}, {"pool", std::string(kReconstructedPoolId)}}}};
      if (!config_path.empty()) config_doc = json::parse(read_file(config_path));
      const auto reconstructed = reconstructed_robot_pool(RingSpec::default_validated());
      const PoolResolver pools = [&](const std::string& id) -> std::shared_ptr<const HistoryPool> {
        if (id == kReconstructedPoolId) return reconstructed;
        if (std::filesystem::exists(id)) {
          auto pool = std::make_shared<HistoryPool>(HistoryPool::from_records(load_dataset(id).records));
          pool->id = id;
          return pool;
        }
        return nullptr;
      };
      const auto base = session_config_from_json(config_doc, pools);
      const ChoiceSynthesizer synth(*base.spec);

      std::optional<ReconstructedDataset> robot_table, history_table;
      if (!from_tables.empty()) {
        const auto ids = split(from_tables, ",");
        if (ids.size() != 2) throw ConfigError("--from-tables needs two table ids");
        robot_table = reconstruct(ids[0]);
        history_table = reconstruct(ids[1]);
      }
      std::vector<SubjectRecord> records;
      std::string transcripts;
      std::array<std::array<std::int64_t, 5>, 2> overall{};
      Rational paid(0);
      for (std::size_t i = 0; i < subjects; ++i) {
        Rng rng = substream(seed, streams::kSynthesis, i);
        auto config = base;
        config.history_opponents.seed = rng();
        config.label_seed = rng();
        config.payment_seed = rng();
        const auto robot = robot_table ? type_from_table(*robot_table, rng) : type_from(robot_type, robot_guess);
        const auto history =
            history_table ? type_from_table(*history_table, rng) : type_from(history_type, history_guess);
        const auto script = script_for(config.order, synth(robot.ring, robot.subtype, robot.guess, rng),
                                       synth(history.ring, history.subtype, history.guess, rng));
        const auto run = run_scripted(config, script);
        const std::string id = "sim" + std::to_string(i + 1);
        records.push_back(run.state.to_record(id, "simulated"));
        if (!transcripts_out.empty()) transcripts += transcript_jsonl(run.state, &run.opponents, &run.payment);
        overall[0][static_cast<std::size_t>(to_int(run.robot.overall))] += 1;
        overall[1][static_cast<std::size_t>(to_int(run.history.overall))] += 1;
        paid += run.payment.total_ntd;
      }
      if (!csv_out.empty()) save_dataset(csv_out, records);
      if (!transcripts_out.empty()) write_file(transcripts_out, transcripts);
      auto config_summary = base.to_json();
      config_summary.erase("matrices");
      print({{"subjects", subjects},
             {"seed", seed},
             {"config", config_summary},
             {"overall_levels", {{"Robot", overall[0]}, {"History", overall[1]}}},
             {"mean_payment_ntd", to_double(paid) / static_cast<double>(subjects)}});
      return 0;
    }

    if (*stats) {
      if (*constant) {
        const auto table = read_joint(table_source);
        const auto freq = constant_level_freq(table);
        print({{"n", table.n()},
               {"diagonal", table.diagonal()},
               {"constant_level", to_string(freq)},
               {"constant_level_value", to_double(freq)}});
      } else if (*pairs_cmd) {
        print(pair_stats(read_joint(table_source)).to_json());
      } else if (*null_sim) {
        NullSimConfig config;
        config.marginal = read_marginal(marginal_text);
        if (!col_marginal_text.empty()) config.col_marginal = read_marginal(col_marginal_text);
        const auto statistic = parse_null_statistic(statistic_name);
        if (!statistic) throw ConfigError("--statistic: unknown statistic " + statistic_name);
        config.statistic = *statistic;
        config.draws = draws;
        config.n_subjects = n_subjects;
        config.seed = seed;
        config.workers = workers;
        std::optional<JointLevelTable> observed;
        if (!observed_source.empty()) observed = read_joint(observed_source);
        auto doc = simulate_null(config, observed).to_json(include_samples);
        if (!config.col_marginal) {
          doc["analytic_constant_level"] = to_string(null_constant_level(config.marginal));
          doc["analytic_pair_frequency"] = to_string(null_pair_frequency(config.marginal));
        }
        print(doc);
      } else if (*ks) {
        print(ks_two_sample(read_numbers(x_path), read_numbers(y_path)).to_json());
      } else if (*wilcoxon) {
        std::vector<std::pair<double, double>> pairs;
        std::vector<std::string> header;
        for (const auto& row : read_rows(pairs_path, &header)) {
          if (row.size() != 2) throw ConfigError(pairs_path + ": each row needs before,after");
          pairs.emplace_back(row[0], row[1]);
        }
        print(wilcoxon_signed_rank(pairs, zero_method == "pratt" ? ZeroMethod::pratt : ZeroMethod::wilcoxon)
                  .to_json());
      } else if (*chisq) {
        std::vector<std::int64_t> a, b;
        if (!chisq_position.empty()) {
          const auto position = parse_position(chisq_position);
          if (!position) throw ConfigError("--a1-position: expected P1..P4");
          const auto a1 = reconstruct(TableId::A1);
          const auto robot = a1_profile_counts(a1, Treatment::Robot, *position);
          const auto history = a1_profile_counts(a1, Treatment::History, *position);
          a.assign(robot.begin(), robot.end());
          b.assign(history.begin(), history.end());
        } else {
          if (counts_a.empty() || counts_b.empty()) throw ConfigError("chisq needs --a and --b or --a1-position");
          a = read_counts(counts_a);
          b = read_counts(counts_b);
        }
        print(chi_square_homogeneity(a, b).to_json());
      } else if (*ols) {
        // Header names select the columns; the cluster column is kept as text.
        const auto lines = split(read_file(data_path), "\n");
        if (lines.empty()) throw ConfigError(data_path + ": empty");
        const auto header = split(lines[0], ",\r");
        const auto column = [&](const std::string& name) {
          const auto it = std::find(header.begin(), header.end(), name);
          if (it == header.end()) throw ConfigError(data_path + ": no column " + name);
          return static_cast<std::size_t>(it - header.begin());
        };
        const std::size_t yc = column(y_column), cc = column(cluster_column);
        std::vector<std::size_t> xc;
        for (const auto& x : x_columns) xc.push_back(column(x));
        std::vector<double> y;
        std::vector<std::vector<double>> rows;
        std::vector<std::string> clusters;
        for (std::size_t n = 1; n < lines.size(); ++n) {
          const auto cells = split(lines[n], ",\r");
          if (cells.empty()) continue;
          if (cells.size() != header.size()) {
            throw ConfigError(data_path + ":" + std::to_string(n + 1) + ": wrong column count");
          }
          const auto number = [&](std::size_t c) {
            const auto v = to_number(cells[c]);
            if (!v) throw ConfigError(data_path + ":" + std::to_string(n + 1) + ": not a number in " + header[c]);
            return *v;
          };
          y.push_back(number(yc));
          std::vector<double> row;
          if (!no_constant) row.push_back(1.0);
          for (std::size_t c : xc) row.push_back(number(c));
          rows.push_back(std::move(row));
          clusters.push_back(cells[cc]);
        }
        std::vector<std::string> names;
        if (!no_constant) names.push_back("const");
        names.insert(names.end(), x_columns.begin(), x_columns.end());
        print(ols_clustered(y, rows, clusters).to_json(names));
      }
      return 0;
    }

    if (*reconstruct_cmd) {
      if (table_name == "all") {
        json all = json::array();
        for (TableId id : kTableIds) all.push_back(reconstruct(id).to_json(false));
        print(all);
        return 0;
      }
      const auto dataset = reconstruct(std::string_view(table_name));
      if (!records_out.empty()) save_dataset(records_out, dataset.records(spec_from(matrices_path), seed));
      print(dataset.to_json(with_units));
      return 0;
    }

    if (*report) {
      const auto inputs = ReportInputs::from_json(json::parse(read_file(inputs_path)));
      const auto bundle = render_report(inputs);
      bundle.write(out_dir);
      print(bundle.manifest);
      return 0;
    }

    if (*serve) {
      auto options = ServiceOptions::defaults();
      if (!matrices_path.empty()) {
        auto matrices = load_ring_matrices(matrices_path);
        RingSpec::validated(matrices);  // refuse to serve unvalidated games
        options.matrices = std::move(matrices);
      }
      if (!pool_path.empty()) {
        const auto loaded = load_dataset(pool_path);
        if (!loaded.rejected.empty()) std::cerr << loaded.report().dump(2) << '\n';
        auto pool = std::make_shared<HistoryPool>(HistoryPool::from_records(loaded.records));
        pool->id = std::filesystem::path(pool_path).stem().string();
        pool->check_nonempty();
        options.default_pool = pool->id;
        options.pools[pool->id] = std::move(pool);
      }
      options.journal_path = journal_path;
      SessionService service(std::move(options));
      if (service.recovered() > 0) std::cerr << "recovered " << service.recovered() << " sessions\n";
      HttpServer server(service, http);
      const int port = server.bind();
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      std::cout << "listening on http://" << http.host << ':' << port << "/v1" << std::endl;
      server.listen();
      g_server = nullptr;
      return 0;
    }
  } catch (const levelscope::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: invalid JSON: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
