#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <regex>

#include "levelscope/datalab.hpp"
#include "levelscope/error.hpp"

using namespace levelscope;

namespace {

const RingSpec& spec() {
  static const RingSpec s = RingSpec::default_validated();
  return s;
}

SubjectRecord random_record(Rng& rng, int i) {
  SubjectRecord r;
  r.subject_id = "subj" + std::to_string(i);
  r.session_id = "sess" + std::to_string(i % 5);
  r.order = uniform_index(rng, 2) ? TreatmentOrder::HR : TreatmentOrder::RH;
  for (Treatment t : kTreatments) {
    if (uniform_index(rng, 5) == 0) continue;
    TreatmentChoices c;
    for (GameId g : kRingGames) {
      for (Position p : kPositions) {
        if (uniform_index(rng, 10) != 0) c.ring_at(g, p) = kRingActions[uniform_index(rng, 3)];
      }
    }
    for (auto& g : c.guess) {
      if (uniform_index(rng, 10) != 0) g = 1 + static_cast<int>(uniform_index(rng, 100));
    }
    r.choices(t) = c;
  }
  // A subject with no rows at all has no representation in long format.
  if (!r.robot && !r.history) r.robot = TreatmentChoices{};
  if (uniform_index(rng, 2)) r.covariates.crt_score = static_cast<int>(uniform_index(rng, 4));
  if (uniform_index(rng, 2)) r.covariates.memory_score = static_cast<int>(uniform_index(rng, 12));
  if (uniform_index(rng, 2)) r.covariates.farsighted = uniform_index(rng, 2) == 1;
  return r;
}

std::string header() { return std::string(kSubjectCsvHeader) + "\n"; }

}  // namespace

TEST_CASE("dataset CSV round trip") {
  Rng rng(12);
  std::vector<SubjectRecord> records;
  for (int i = 0; i < 200; ++i) records.push_back(random_record(rng, i));
  const auto csv = format_dataset(records);
  const auto loaded = parse_dataset(csv);
  CHECK(loaded.rejected.empty());
  CHECK(loaded.records == records);
  CHECK(format_dataset(loaded.records) == csv);

  const auto path = (std::filesystem::temp_directory_path() / "levelscope_roundtrip.csv").string();
  save_dataset(path, records);
  CHECK(load_dataset(path).records == records);
  std::filesystem::remove(path);
}

TEST_CASE("synthetic 293-subject file") {
  const auto records = reconstruct(TableId::T3).records(spec());
  CHECK(records.size() == 293);
  const auto loaded = parse_dataset(format_dataset(records));
  CHECK(loaded.records.size() == 293);
  CHECK(loaded.records == records);
}

TEST_CASE("malformed rows are rejected with diagnostics") {
  const std::string csv = header() +
                          "s1,x,RH,Robot,guessing,2/3,,0\n"          // guess out of range
                          "s1,x,RH,Robot,guessing,1/3,,33\n"         // fine
                          "s1,x,RH,Robot,ring,G3,P1,a\n"             // bad game
                          "s1,x,RH,Robot,ring,G1,P1,d\n"             // bad action
                          "s1,x,RH,Robot,ring,G1,P1,b\n"             // fine
                          "s1,x,RH,Robot,ring,G1,P1,c\n"             // duplicate slot
                          "s1,y,RH,Robot,ring,G1,P2,c\n"             // session changes
                          "s1,x,HR,Robot,ring,G1,P3,c\n"             // order changes
                          "s2,x,RH,Robot,ring,G1,P1\n"               // short row
                          "s2,x,RH,Robot,covariate,crt_score,,4\n"   // covariate row with treatment
                          "s2,x,RH,,covariate,crt_score,,4\n"        // out of range
                          "s2,x,RH,,covariate,memory_score,,11\n"    // fine
                          "s2,x,RH,Robit,ring,G1,P1,a\n"             // bad treatment
                          "s2,x,RH,History,guessing,1/2,,timeout\n"; // fine
  const auto result = parse_dataset(csv);
  REQUIRE(result.rejected.size() == 10);
  CHECK(result.rejected[0].line == 2);
  CHECK(result.rejected[0].column == "action_or_guess");
  CHECK(result.rejected[0].reason.find("guess 0") != std::string::npos);
  CHECK(result.rejected[1].column == "game");
  CHECK(result.rejected[2].column == "action_or_guess");
  CHECK(result.rejected[3].reason.find("duplicate") != std::string::npos);
  CHECK(result.rejected[4].column == "session_id");
  CHECK(result.rejected[5].column == "order");
  CHECK(result.rejected[6].column == "*");
  CHECK(result.rejected[9].column == "treatment");
  REQUIRE(result.records.size() == 2);
  const auto& s1 = result.records[0];
  CHECK(s1.robot->guess[1] == 33);
  CHECK_FALSE(s1.robot->guess[0].has_value());
  CHECK(s1.robot->ring_at(GameId::G1, Position::P1) == RingAction::b);
  const auto& s2 = result.records[1];
  CHECK(s2.covariates.memory_score == 11);
  CHECK_FALSE(s2.covariates.crt_score.has_value());
  CHECK(s2.history.has_value());
  CHECK_FALSE(s2.robot.has_value());
  CHECK(result.report()["rejected"].size() == 10);

  CHECK_THROWS_AS(parse_dataset("subject,session\n"), SchemaError);
  CHECK_THROWS_AS(parse_dataset(""), SchemaError);
  SubjectRecord bad;
  bad.subject_id = "a,b";
  CHECK_THROWS_AS(format_dataset({bad}), SchemaError);
}

TEST_CASE("every reconstruction re-aggregates to its source") {
  for (TableId id : kTableIds) {
    CAPTURE(to_string(id));
    const auto ds = reconstruct(id);
    CHECK(ds.aggregate() == ds.source);
    CHECK(static_cast<std::int64_t>(ds.units.size()) == ds.source.total());
    CHECK_FALSE(ds.supports.empty());
    CHECK(ds.provenance.find("Table") == 0);
  }
  CHECK_THROWS_AS(reconstruct(std::string_view("A2")), DomainError);
}

TEST_CASE("reconstructed tables") {
  const auto t3 = reconstruct(TableId::T3);
  CHECK(t3.units.size() == 293);
  const auto joint = t3.joint();
  CHECK(joint.diagonal() == 112);
  CHECK(joint.at(Level::R4, Level::R4) == 52);
  CHECK(joint.row_axis == "ring");
  CHECK(joint.col_axis == "guess");
  CHECK(reconstruct(TableId::A5).joint().diagonal() == 121);
  CHECK(reconstruct(TableId::A5).joint().at(Level::R4, Level::R4) == 20);
  CHECK_THROWS_AS(reconstruct(TableId::A6).joint(), DomainError);
  CHECK_THROWS_AS(reconstruct(TableId::A1).records(spec()), DomainError);

  const auto a1 = reconstruct(TableId::A1);
  for (Treatment t : kTreatments) {
    for (Position p : kPositions) {
      const auto counts = a1_profile_counts(a1, t, p);
      CHECK(std::accumulate(counts.begin(), counts.end(), std::int64_t{0}) == 293);
    }
  }
  CHECK(a1_profile_counts(a1, Treatment::Robot, Position::P4)[6] == 291);  // (b,c)
  const auto f = a1_action_frequencies(a1, Treatment::Robot, GameId::G1, Position::P4);
  CHECK(f[1] == Rational(291, 293));
}

TEST_CASE("weakly-higher counts") {
  for (TableId id : {TableId::B1, TableId::B2}) {
    const auto ds = reconstruct(id);
    std::int64_t direct = 0;
    for (const auto& u : ds.units) direct += *parse_level(u.row) >= *parse_level(u.col);
    CHECK(weakly_higher_count(ds.joint()) == direct);
  }
}

TEST_CASE("coupling bounds match exhaustive pairing on small tables") {
  Rng rng(99);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 2 + uniform_index(rng, 5);
    std::vector<int> a(n), b(n);
    JointLevelTable ta, tb;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<int>(uniform_index(rng, 25));
      b[i] = static_cast<int>(uniform_index(rng, 25));
      ta.add(level_from_int(a[i] / 5), level_from_int(a[i] % 5));
      tb.add(level_from_int(b[i] / 5), level_from_int(b[i] % 5));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::int64_t lo = 1 << 20, hi = -1;
    do {
      std::int64_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const int robot = std::min(a[i] / 5, b[perm[i]] / 5);
        const int history = std::min(a[i] % 5, b[perm[i]] % 5);
        count += robot >= history;
      }
      lo = std::min(lo, count);
      hi = std::max(hi, count);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const auto bounds = overall_weakly_higher_bounds(ta, tb);
    CHECK(bounds.min == lo);
    CHECK(bounds.max == hi);
    CHECK(bounds.independent_order >= lo);
    CHECK(bounds.independent_order <= hi);
  }
}

TEST_CASE("synthesis round-trips through the classifier") {
  const ChoiceSynthesizer synth(spec());
  Rng rng(4);
  CHECK(synth.ring(Level::R2, RingSubtype::S, rng).to_string() == "aa,bb,cb,bc");
  CHECK(synth.ring(Level::R4, RingSubtype::plain, rng).to_string() == "bc,ca,cb,bc");
  CHECK_THROWS_AS(synth.ring(Level::R4, RingSubtype::S, rng), DomainError);
  CHECK_THROWS_AS(synth.ring(Level::R0, RingSubtype::NS, rng), DomainError);
  CHECK_THROWS_AS(synth.ring(Level::R1, RingSubtype::BR, rng), DomainError);

  for (Level ring : kLevels) {
    std::vector<RingSubtype> subtypes = {RingSubtype::plain};
    if (ring != Level::R0 && ring != Level::R4) subtypes = {RingSubtype::S, RingSubtype::NS};
    if (ring == Level::R2 || ring == Level::R3) subtypes.push_back(RingSubtype::BR);
    for (RingSubtype subtype : subtypes) {
      for (Level guess : kLevels) {
        for (int rep = 0; rep < 20; ++rep) {
          const auto choices = synth(ring, subtype, guess, rng);
          const auto p = classify(choices, Treatment::Robot, spec());
          CHECK(p.ring_level == ring);
          CHECK(p.ring_subtype == subtype);
          CHECK(p.guess_level == guess);
          CHECK(p.overall == std::min(ring, guess));
        }
      }
    }
  }
}

TEST_CASE("any guess inside an interval classifies like the midpoint") {
  for (std::size_t i = 0; i < 3; ++i) {
    const auto bounds = eliminate_guessing(GuessingGame(kGuessMultipliers[i]));
    for (Level level : kLevels) {
      const auto [lo, hi] = bounds.interval(level);
      const int mid = guess_midpoint(i, level);
      CHECK(mid >= lo);
      CHECK(mid <= hi);
      for (int g = lo; g <= hi; ++g) CHECK(bounds.level_of(g) == bounds.level_of(mid));
    }
  }
  CHECK(guess_midpoint(2, Level::R4) == 1);
}

TEST_CASE("10,000 synthesized subjects classify back exactly") {
  const ChoiceSynthesizer synth(spec());
  Rng rng(31337);
  std::vector<SubjectRecord> records;
  std::vector<std::pair<Level, RingSubtype>> truth;
  const auto labels = ring_type_labels(false);
  for (int i = 0; i < 10000; ++i) {
    const auto [ring, subtype] = parse_ring_type(labels[uniform_index(rng, labels.size())]);
    const Level guess = level_from_int(static_cast<int>(uniform_index(rng, 5)));
    SubjectRecord r;
    r.subject_id = std::to_string(i);
    r.robot = synth(ring, subtype, guess, rng);
    records.push_back(r);
    truth.emplace_back(ring, subtype);
  }
  const auto result = classify_dataset(records, spec(), {Treatment::Robot}, 4);
  REQUIRE(result.subjects.size() == 10000);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& p = *result.subjects[i].robot;
    errors += p.ring_level != truth[i].first || p.ring_subtype != truth[i].second;
  }
  CHECK(errors == 0);
}

TEST_CASE("reconstructed records re-classify to their source tables") {
  const auto classify_table = [](TableId id, std::set<Treatment> required) {
    return classify_dataset(reconstruct(id).records(spec(), 17), spec(), required);
  };
  CHECK(classify_table(TableId::T3, {Treatment::Robot}).ring_by_guess(Treatment::Robot).counts ==
        reconstruct(TableId::T3).joint().counts);
  CHECK(classify_table(TableId::A5, {Treatment::History}).ring_by_guess(Treatment::History).counts ==
        reconstruct(TableId::A5).joint().counts);
  CHECK(classify_table(TableId::B1, {Treatment::Robot, Treatment::History})
            .robot_by_history(LevelKind::ring)
            .counts == reconstruct(TableId::B1).joint().counts);
  CHECK(classify_table(TableId::B2, {Treatment::Robot, Treatment::History})
            .robot_by_history(LevelKind::guess)
            .counts == reconstruct(TableId::B2).joint().counts);
  CHECK(classify_table(TableId::A6, {Treatment::Robot}).ring_type_by_guess(Treatment::Robot).counts ==
        reconstruct(TableId::A6).source.counts);
  CHECK(classify_table(TableId::A7, {Treatment::History}).ring_type_by_guess(Treatment::History).counts ==
        reconstruct(TableId::A7).source.counts);
  CHECK(classify_table(TableId::B3, {Treatment::Robot, Treatment::History})
            .ring_type_robot_by_history()
            .counts == reconstruct(TableId::B3).source.counts);
}

TEST_CASE("reconstructed replay pool") {
  const auto pool = reconstructed_robot_pool(spec());
  CHECK(pool->id == kReconstructedPoolId);
  CHECK_NOTHROW(pool->check_nonempty());
  CHECK(pool->ring(GameId::G1, Position::P4).size() == 293);
  std::int64_t b = 0;
  for (const auto& e : pool->ring(GameId::G1, Position::P4)) b += e.choice == RingAction::b;
  CHECK(b == 291 + 0);
  CHECK(pool->guesses(0).size() == 293);
}

TEST_CASE("level percentile against the reference distribution") {
  const auto top = level_percentile(Level::R4, Treatment::Robot);
  CHECK(top.share_at == Rational(52, 293));
  CHECK(top.above == 0);
  CHECK(top.n == 293);
  CHECK(std::round(to_double(top.share_at) * 10000) == 1775);
  const auto low = level_percentile(Level::R0, Treatment::History);
  CHECK(low.below == 0);
  CHECK(low.at == 44);
  CHECK(low.percentile == doctest::Approx(100.0 * 22 / 293));
}

TEST_CASE("report rendering") {
  ReportInputs inputs;
  inputs.level_distributions["Robot"] = {44, 149, 34, 14, 52};
  inputs.transitions["T3"] = reconstruct(TableId::T3).joint();
  inputs.guess_samples["p=2/3"] = {10, 20, 20, 33, 50, 67, 90};
  inputs.choice_frequencies["A1"] = reconstruct(TableId::A1).source;
  inputs.analyses["summary"] = {{"n", 293}};
  const auto bundle = render_report(inputs);

  const auto& svg = bundle.files.at("levels_Robot.svg");
  const std::regex bar(R"re(data-label="(R\d)" data-count="(\d+)" data-share="([0-9.]+)")re");
  std::vector<double> shares;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), bar); it != std::sregex_iterator(); ++it) {
    shares.push_back(std::stod((*it)[3]));
  }
  const std::array<double, 5> expected = {44, 149, 34, 14, 52};
  REQUIRE(shares.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(shares[i] == doctest::Approx(expected[i] / 293).epsilon(1e-6));
  CHECK(bundle.files.count("transition_T3.svg") == 1);
  CHECK(bundle.files.count("transition_T3.csv") == 1);
  CHECK(bundle.files.count("guess_cdf.svg") == 1);
  CHECK(bundle.files.count("choices_A1.svg") == 1);
  CHECK(bundle.files.count("analysis_summary.json") == 1);
  CHECK(bundle.manifest["files"].size() == bundle.files.size());

  const auto again = render_report(inputs);
  CHECK(again.files == bundle.files);
  CHECK(again.manifest == bundle.manifest);

  const auto empty = render_report(ReportInputs{});
  CHECK(empty.files.empty());
  CHECK(empty.manifest["files"].empty());

  const auto dir = std::filesystem::temp_directory_path() / "levelscope_report_test";
  std::filesystem::remove_all(dir);
  empty.write(dir.string());
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("report inputs from JSON") {
  const nlohmann::json doc = {{"level_distributions", {{"Robot", {44, 149, 34, 14, 52}}}},
                              {"transitions", {{"T3", reconstruct(TableId::T3).joint().to_json()}}}};
  const auto in = ReportInputs::from_json(doc);
  CHECK(in.level_distributions.at("Robot")[4] == 52);
  CHECK(in.transitions.at("T3").diagonal() == 112);
  CHECK(ReportInputs::from_json(nlohmann::json::object()).empty());

  const nlohmann::json bad = {{"level_distributions", {{"x", {1, 2}}, {"y", {1, 2, 3, 4, -5}}}},
                              {"transitions", {{"z", "nope"}}},
                              {"plots", 1}};
  try {
    ReportInputs::from_json(bad);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    const std::string message = e.what();
    CHECK(message.find("level_distributions.x") != std::string::npos);
    CHECK(message.find("level_distributions.y") != std::string::npos);
    CHECK(message.find("transitions.z") != std::string::npos);
    CHECK(message.find("plots") != std::string::npos);
  }
}
