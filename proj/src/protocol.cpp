#include "levelscope/protocol.hpp"

#include <charconv>

#include "levelscope/assets.hpp"
#include "levelscope/error.hpp"

namespace levelscope {

void SessionConfig::validate() const {
  if (!spec) throw ConfigError("session config has no ring matrices");
  if (!spec->is_validated()) throw ConfigError("session ring matrices are not validated");
  if (time_limit_s <= 0) throw ConfigError("time limit must be positive");
  if (ntd_per_esc <= 0 || show_up_ntd < 0) throw ConfigError("invalid exchange settings");
  robot_opponents.validate();
  history_opponents.validate();
}

nlohmann::json SessionConfig::to_json() const {
  nlohmann::json doc = {{"order", to_string(order)},
                        {"robot_opponents", robot_opponents.to_json()},
                        {"history_opponents", history_opponents.to_json()},
                        {"label_seed", label_seed},
                        {"payment_seed", payment_seed},
                        {"time_limit_s", time_limit_s},
                        {"ntd_per_esc", ntd_per_esc},
                        {"show_up_ntd", show_up_ntd}};
  if (spec) doc["matrices"] = levelscope::to_json(spec->matrices());
  return doc;
}

namespace {

template <typename T>
T field_or(const nlohmann::json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config.") + key + ": wrong type");
  }
}

}  // namespace

SessionConfig session_config_from_json(const nlohmann::json& doc, const PoolResolver& pools) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  SessionConfig config;

  const auto order = parse_treatment_order(field_or<std::string>(doc, "order", "RH"));
  if (!order) throw ConfigError("config.order: expected RH or HR");
  config.order = *order;

  if (!doc.contains("matrices")) throw ConfigError("config.matrices: missing");
  const auto& m = doc.at("matrices");
  RingMatrices matrices;
  if (m.is_string() && m.get<std::string>() == "default") {
    matrices = default_ring_matrices();
  } else if (m.is_object()) {
    matrices = ring_matrices_from_json(m);
  } else {
    throw ConfigError("config.matrices: expected \"default\" or a matrix object");
  }
  const auto report = validate_ring_spec(matrices);
  if (!report.passed()) {
    std::string clauses;
    for (const auto& c : report.failed_clauses()) clauses += (clauses.empty() ? "" : ", ") + c;
    throw ConfigError("config.matrices: failed validator clauses " + clauses);
  }
  config.spec = std::make_shared<const RingSpec>(RingSpec::validated(std::move(matrices)));

  const auto opp = doc.value("opponents", nlohmann::json::object());
  const auto kind = parse_agent_kind(field_or<std::string>(opp, "kind", "history"));
  if (!kind) throw ConfigError("config.opponents.kind: unknown agent kind");
  const auto seed = field_or<std::uint64_t>(opp, "seed", 0);
  switch (*kind) {
    case AgentKind::robot: config.history_opponents = AgentPolicy::robot(); break;
    case AgentKind::uniform_random: config.history_opponents = AgentPolicy::uniform(seed); break;
    case AgentKind::level_k:
      config.history_opponents =
          AgentPolicy::level_k(field_or<int>(opp, "k", 1), Level0Rule::uniform(), seed);
      break;
    case AgentKind::history_replay: {
      const auto pool_id = field_or<std::string>(opp, "pool", "");
      if (pool_id.empty()) throw ConfigError("config.opponents.pool: missing");
      auto pool = pools ? pools(pool_id) : nullptr;
      if (!pool) throw ConfigError("config.opponents.pool: unknown pool " + pool_id);
      const auto sampling =
          parse_history_sampling(field_or<std::string>(opp, "sampling", "within_round"));
      if (!sampling) throw ConfigError("config.opponents.sampling: unknown scheme");
      config.history_opponents = AgentPolicy::history(std::move(pool), seed, *sampling);
      break;
    }
  }
  config.label_seed = field_or<std::uint64_t>(doc, "label_seed", seed);
  config.payment_seed = field_or<std::uint64_t>(doc, "payment_seed", 0);
  config.time_limit_s = field_or<int>(doc, "time_limit_s", 180);
  config.validate();
  return config;
}

const std::vector<RoundSlot>& round_plan(TreatmentOrder order) {
  static const auto build = [](TreatmentOrder o) {
    std::vector<RoundSlot> plan;
    for (Treatment t : treatment_sequence(o)) {
      for (GameId game : kRingGames) {
        for (Position position : kPositions) {
          plan.push_back({plan.size(), t, RoundKey::ring(game, position)});
        }
      }
      for (std::size_t i = 0; i < kGuessMultipliers.size(); ++i) {
        plan.push_back({plan.size(), t, RoundKey::guessing(i)});
      }
    }
    return plan;
  };
  static const std::vector<RoundSlot> rh = build(TreatmentOrder::RH);
  static const std::vector<RoundSlot> hr = build(TreatmentOrder::HR);
  return order == TreatmentOrder::RH ? rh : hr;
}

std::optional<Choice> parse_choice(std::string_view text) {
  if (text.size() == 1) {
    if (auto a = parse_ring_action(text)) return Choice{*a};
  }
  int value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec == std::errc() && ptr == end && !text.empty()) return Choice{value};
  return std::nullopt;
}

std::string to_string(const Choice& choice) {
  if (const auto* a = std::get_if<RingAction>(&choice)) return std::string(1, to_char(*a));
  return std::to_string(std::get<int>(choice));
}

bool is_legal(const RoundKey& key, const Choice& choice) {
  if (key.is_ring()) return std::holds_alternative<RingAction>(choice);
  const auto* g = std::get_if<int>(&choice);
  return g && *g >= kMinGuess && *g <= kMaxGuess;
}

nlohmann::json TranscriptEntry::to_json() const {
  nlohmann::json doc = {{"round", round},
                        {"treatment", to_string(treatment)},
                        {"key", key.to_string()},
                        {"prompt", prompt},
                        {"latency_ms", latency_ms},
                        {"timed_out", timed_out}};
  if (!choice) {
    doc["choice"] = nullptr;
  } else if (const auto* a = std::get_if<RingAction>(&*choice)) {
    doc["choice"] = std::string(1, to_char(*a));
  } else {
    doc["choice"] = std::get<int>(*choice);
  }
  return doc;
}

const InstructionText& InstructionText::bundled() {
  static const InstructionText text = [] {
    const auto doc = nlohmann::json::parse(embedded_asset("instructions_en.json"));
    return InstructionText{doc.at("robot"), doc.at("history"), doc.at("ring_prompt"),
                           doc.at("guess_prompt")};
  }();
  return text;
}

namespace {

std::string substitute(std::string text, const std::string& key, const std::string& value) {
  const std::string token = "{" + key + "}";
  for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos)) {
    text.replace(pos, token.size(), value);
    pos += value.size();
  }
  return text;
}

std::string prompt_for(const RoundKey& key) {
  const auto& text = InstructionText::bundled();
  if (key.is_ring()) {
    return substitute(substitute(text.ring_prompt, "game", to_string(key.game)), "position",
                      to_string(key.position));
  }
  return substitute(text.guess_prompt, "p", to_string(kGuessMultipliers[key.guess_index]));
}

}  // namespace

SessionState SessionState::start(const SessionConfig& config) {
  SessionState state;
  state.order_ = config.order;
  Rng rng = substream(config.label_seed, streams::kMemberLabel);
  state.member_label_ = static_cast<char>('A' + uniform_index(rng, 4));
  return state;
}

const RoundSlot& SessionState::current() const {
  if (terminal()) throw ProtocolError("session is complete");
  return round_plan(order_)[transcript_.size()];
}

void SessionState::advance(const std::optional<Choice>& choice, std::int64_t latency_ms) {
  const RoundSlot& slot = current();
  if (choice && !is_legal(slot.key, *choice)) {
    throw DomainError("illegal choice " + to_string(*choice) + " in round " + slot.key.to_string());
  }
  TranscriptEntry entry;
  entry.round = slot.index;
  entry.treatment = slot.treatment;
  entry.key = slot.key;
  entry.prompt = prompt_for(slot.key);
  entry.choice = choice;
  entry.latency_ms = latency_ms;
  entry.timed_out = !choice.has_value();
  transcript_.push_back(std::move(entry));
}

SessionState advance(SessionState state, const std::optional<Choice>& choice,
                     std::int64_t latency_ms) {
  state.advance(choice, latency_ms);
  return state;
}

TreatmentChoices SessionState::choices(Treatment treatment) const {
  TreatmentChoices out;
  for (const auto& entry : transcript_) {
    if (entry.treatment != treatment || !entry.choice) continue;
    if (entry.key.is_ring()) {
      out.ring_at(entry.key.game, entry.key.position) = std::get<RingAction>(*entry.choice);
    } else {
      out.guess[entry.key.guess_index] = std::get<int>(*entry.choice);
    }
  }
  return out;
}

SubjectRecord SessionState::to_record(std::string subject_id, std::string session_id) const {
  SubjectRecord record;
  record.subject_id = std::move(subject_id);
  record.session_id = std::move(session_id);
  record.order = order_;
  record.robot = choices(Treatment::Robot);
  record.history = choices(Treatment::History);
  return record;
}

nlohmann::json RoundView::to_json() const {
  nlohmann::json doc = {{"round", slot.index},
                        {"rounds_total", kSessionRounds},
                        {"treatment", to_string(slot.treatment)},
                        {"family", slot.key.is_ring() ? "ring" : "guessing"},
                        {"key", slot.key.to_string()},
                        {"prompt", prompt},
                        {"instruction", instruction},
                        {"member_label", std::string(1, member_label)},
                        {"remaining_s", remaining_s}};
  if (slot.key.is_ring()) {
    doc["game"] = to_string(slot.key.game);
    doc["position"] = to_string(slot.key.position);
    doc["actions"] = {"a", "b", "c"};
    auto& list = doc["matrices"] = nlohmann::json::array();
    for (const auto& [position, matrix] : matrices) {
      list.push_back({{"position", to_string(position)}, {"payoffs", matrix}});
    }
  } else {
    doc["p"] = to_string(*p);
    doc["min_guess"] = kMinGuess;
    doc["max_guess"] = kMaxGuess;
  }
  return doc;
}

RoundView round_view(const SessionConfig& config, const SessionState& state) {
  const RoundSlot& slot = state.current();
  const auto& text = InstructionText::bundled();
  RoundView view;
  view.slot = slot;
  view.prompt = prompt_for(slot.key);
  view.member_label = state.member_label();
  view.instruction = slot.treatment == Treatment::Robot
                         ? text.robot
                         : substitute(text.history, "label", std::string(1, state.member_label()));
  view.remaining_s = config.time_limit_s;
  if (slot.key.is_ring()) {
    Position seat = slot.key.position;
    for (int i = 0; i < 4; ++i, seat = next(seat)) {
      view.matrices.emplace_back(seat, config.spec->matrix(slot.key.game, seat));
    }
  } else {
    view.p = kGuessMultipliers[slot.key.guess_index];
  }
  return view;
}

std::vector<OpponentDraw> draw_session_opponents(const SessionConfig& config) {
  if (!config.spec) throw ConfigError("session config has no ring matrices");
  std::vector<OpponentDraw> draws;
  for (const auto& slot : round_plan(config.order)) {
    draws.push_back(
        draw_opponents(config.opponents(slot.treatment), *config.spec, slot.key, slot.index));
  }
  return draws;
}

nlohmann::json PaymentRecord::to_json() const {
  return {{"ring_round", ring_round},
          {"guess_round", guess_round},
          {"ring_esc", to_string(ring_esc)},
          {"guess_esc", to_string(guess_esc)},
          {"total_esc", to_string(total_esc)},
          {"total_ntd", to_string(total_ntd)},
          {"total_ntd_value", to_double(total_ntd)}};
}

namespace {

Rational round_esc(const SessionConfig& config, const TranscriptEntry& entry,
                   const OpponentDraw& draw) {
  if (!entry.choice) return Rational(0);
  if (draw.round != entry.round || !(draw.key == entry.key)) {
    throw ProtocolError("opponent log does not match round " + std::to_string(entry.round));
  }
  if (entry.key.is_ring()) {
    return ring_payoff(*config.spec, entry.key.game, entry.key.position,
                       std::get<RingAction>(*entry.choice), draw.neighbor_action());
  }
  if (!draw.guess) throw ProtocolError("opponent log has no guess for round " + std::to_string(entry.round));
  return guess_payoff(GuessingGame(kGuessMultipliers[entry.key.guess_index]),
                      std::get<int>(*entry.choice), *draw.guess);
}

}  // namespace

PaymentRecord settle(const SessionConfig& config, const SessionState& state,
                     const std::vector<OpponentDraw>& opponents, std::uint64_t payment_seed) {
  if (!state.terminal()) throw ProtocolError("cannot settle an unfinished session");
  if (opponents.size() != kSessionRounds) throw ProtocolError("opponent log must cover 22 rounds");
  std::vector<std::size_t> ring_rounds;
  std::vector<std::size_t> guess_rounds;
  for (const auto& entry : state.transcript()) {
    (entry.key.is_ring() ? ring_rounds : guess_rounds).push_back(entry.round);
  }
  Rng rng = substream(payment_seed, streams::kPayment);
  PaymentRecord record;
  record.ring_round = ring_rounds[uniform_index(rng, ring_rounds.size())];
  record.guess_round = guess_rounds[uniform_index(rng, guess_rounds.size())];
  const auto& t = state.transcript();
  record.ring_esc = round_esc(config, t[record.ring_round], opponents[record.ring_round]);
  record.guess_esc = round_esc(config, t[record.guess_round], opponents[record.guess_round]);
  record.total_esc = record.ring_esc + record.guess_esc;
  record.total_ntd = Rational(config.show_up_ntd) + record.total_esc * config.ntd_per_esc;
  return record;
}

std::string transcript_jsonl(const SessionState& state, const std::vector<OpponentDraw>* opponents,
                             const PaymentRecord* payment) {
  std::string out;
  const auto line = [&](nlohmann::json doc) { out += doc.dump() + "\n"; };
  line({{"event", "session"},
        {"order", to_string(state.order())},
        {"member_label", std::string(1, state.member_label())},
        {"rounds", kSessionRounds}});
  for (const auto& entry : state.transcript()) {
    auto doc = entry.to_json();
    doc["event"] = "round";
    line(std::move(doc));
  }
  if (opponents) {
    for (const auto& draw : *opponents) {
      auto doc = draw.to_json();
      doc["event"] = "opponents";
      line(std::move(doc));
    }
  }
  if (payment) {
    auto doc = payment->to_json();
    doc["event"] = "payment";
    line(std::move(doc));
  }
  return out;
}

ScriptedRun run_scripted(const SessionConfig& config,
                         const std::vector<std::optional<Choice>>& script) {
  if (script.size() != kSessionRounds) {
    throw DomainError("a scripted session needs 22 choices, got " + std::to_string(script.size()));
  }
  config.validate();
  ScriptedRun run{SessionState::start(config), {}, {}, {}, {}};
  for (const auto& choice : script) run.state.advance(choice);
  run.robot = classify(run.state.choices(Treatment::Robot), Treatment::Robot, *config.spec);
  run.history = classify(run.state.choices(Treatment::History), Treatment::History, *config.spec);
  run.opponents = draw_session_opponents(config);
  run.payment = settle(config, run.state, run.opponents, config.payment_seed);
  return run;
}

std::vector<std::optional<Choice>> script_for(TreatmentOrder order, const TreatmentChoices& robot,
                                              const TreatmentChoices& history) {
  std::vector<std::optional<Choice>> script;
  for (const auto& slot : round_plan(order)) {
    const auto& source = slot.treatment == Treatment::Robot ? robot : history;
    if (slot.key.is_ring()) {
      const auto& a = source.ring_at(slot.key.game, slot.key.position);
      script.push_back(a ? std::optional<Choice>(*a) : std::nullopt);
    } else {
      const auto& g = source.guess[slot.key.guess_index];
      script.push_back(g ? std::optional<Choice>(*g) : std::nullopt);
    }
  }
  return script;
}

}  // namespace levelscope
