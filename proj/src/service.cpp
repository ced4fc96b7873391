#include "levelscope/service.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <random>

#include "levelscope/datalab.hpp"
#include "levelscope/error.hpp"

namespace levelscope {

std::int64_t wall_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string random_session_id() {
  static std::mutex mutex;
  static std::random_device device;
  std::uint64_t halves[2];
  {
    std::lock_guard lock(mutex);
    for (auto& h : halves) h = (static_cast<std::uint64_t>(device()) << 32) ^ device();
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id;
  for (std::uint64_t h : halves) {
    for (int shift = 60; shift >= 0; shift -= 4) id += kHex[(h >> shift) & 0xF];
  }
  return id;
}

// ---- stores ----------------------------------------------------------------------

bool MemoryStore::insert(std::shared_ptr<Session> session) {
  std::lock_guard lock(mutex_);
  const std::string id = session->id;
  return sessions_.emplace(id, std::move(session)).second;
}

std::shared_ptr<Session> MemoryStore::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::size_t MemoryStore::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

JournalStore::JournalStore(std::string path) : path_(std::move(path)) {
  std::ofstream probe(path_, std::ios::app);
  if (!probe) throw ConfigError("cannot open journal " + path_);
}

void JournalStore::append(const nlohmann::json& event) {
  std::lock_guard lock(file_mutex_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error("journal write failed: " + path_);
}

std::vector<nlohmann::json> JournalStore::read(const std::string& path) {
  std::vector<nlohmann::json> events;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto event = nlohmann::json::parse(line, nullptr, false);
    if (event.is_discarded()) break;  // torn write at the tail
    events.push_back(std::move(event));
  }
  return events;
}

// ---- service ---------------------------------------------------------------------

namespace {

// Raised by the pool resolver so a missing pool maps to 503, not 400.
class PoolUnavailable : public Error {
 public:
  using Error::Error;
};

ServiceResponse error_response(int status, const std::string& message,
                               nlohmann::json extra = nlohmann::json::object()) {
  extra["error"] = message;
  return {status, std::move(extra)};
}

std::string result_path(const std::string& id) { return "/v1/sessions/" + id + "/result"; }

nlohmann::json choice_json(const std::optional<Choice>& choice) {
  if (!choice) return nullptr;
  if (const auto* a = std::get_if<RingAction>(&*choice)) return std::string(1, to_char(*a));
  return std::get<int>(*choice);
}

std::optional<Choice> choice_from_json(const nlohmann::json& value) {
  if (value.is_string()) return parse_choice(value.get<std::string>());
  if (value.is_number_integer()) return Choice{value.get<int>()};
  return std::nullopt;
}

nlohmann::json profile_json(const LevelProfile& p) {
  return {{"ring_level", to_string(p.ring_level)},
          {"ring_subtype", to_string(p.ring_subtype)},
          {"ring_type", ring_type_label(p.ring_level, p.ring_subtype, false)},
          {"guess_level", to_string(p.guess_level)},
          {"overall", to_string(p.overall)}};
}

}  // namespace

ServiceOptions ServiceOptions::defaults() {
  ServiceOptions options;
  const auto spec = RingSpec::default_validated();
  options.pools.emplace(std::string(kReconstructedPoolId), reconstructed_robot_pool(spec));
  options.default_pool = std::string(kReconstructedPoolId);
  return options;
}

SessionService::SessionService(ServiceOptions options) : options_(std::move(options)) {
  if (!options_.clock) options_.clock = wall_clock_ms;
  if (options_.journal_path.empty()) {
    store_ = std::make_unique<MemoryStore>();
  } else {
    const auto events = JournalStore::read(options_.journal_path);
    store_ = std::make_unique<JournalStore>(options_.journal_path);
    for (const auto& event : events) replay_event(event);
  }
}

SessionConfig SessionService::parse_config(nlohmann::json& doc) const {
  if (options_.matrices && doc.contains("matrices") && doc["matrices"] == "default") {
    doc["matrices"] = to_json(*options_.matrices);
  }
  auto& opponents = doc["opponents"];
  if (opponents.is_null()) opponents = nlohmann::json::object();
  if (opponents.is_object() && opponents.value("kind", "history") == "history" &&
      !opponents.contains("pool") && !options_.default_pool.empty()) {
    opponents["pool"] = options_.default_pool;
  }
  const PoolResolver resolver = [this](const std::string& id) {
    const auto it = options_.pools.find(id);
    if (it == options_.pools.end() || !it->second) throw PoolUnavailable("history pool unavailable: " + id);
    return it->second;
  };
  return session_config_from_json(doc, resolver);
}

ServiceResponse SessionService::create(const nlohmann::json& config) {
  if (!config.is_object()) return error_response(400, "config must be a JSON object");
  auto session = std::make_shared<Session>();
  session->config_doc = config;
  try {
    session->config = parse_config(session->config_doc);
  } catch (const PoolUnavailable& e) {
    return error_response(503, e.what());
  } catch (const ConfigError& e) {
    return error_response(400, e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, std::string("config: ") + e.what());
  }
  session->state = SessionState::start(session->config);
  session->created_ms = now();
  session->round_started_ms = session->created_ms;
  do {
    session->id = random_session_id();
  } while (!store_->insert(session));

  std::lock_guard lock(session->mutex);
  store_->append({{"event", "create"},
                  {"id", session->id},
                  {"at_ms", session->created_ms},
                  {"config", session->config_doc}});
  auto view = round_view(session->config, session->state).to_json();
  return {201,
          {{"id", session->id},
           {"created_at_ms", session->created_ms},
           {"config", session->config.to_json()},
           {"round", std::move(view)}}};
}

void SessionService::expire(Session& session, std::int64_t now) {
  const std::int64_t limit = static_cast<std::int64_t>(session.config.time_limit_s) * 1000;
  // The next round starts the moment the previous one runs out, so a long
  // absence times out every round it spans.
  while (!session.state.terminal() && now - session.round_started_ms >= limit) {
    const std::size_t round = session.state.current().index;
    const std::int64_t at = session.round_started_ms + limit;
    session.state.advance(std::nullopt, limit);
    session.round_started_ms = at;
    store_->append({{"event", "advance"},
                    {"id", session.id},
                    {"round", round},
                    {"choice", nullptr},
                    {"latency_ms", limit},
                    {"at_ms", at}});
  }
}

ServiceResponse SessionService::round(const std::string& id) {
  const auto session = store_->find(id);
  if (!session) return error_response(404, "no such session");
  std::lock_guard lock(session->mutex);
  const std::int64_t t = now();
  expire(*session, t);
  if (session->state.terminal()) {
    return error_response(410, "session finished", {{"result", result_path(id)}});
  }
  auto view = round_view(session->config, session->state);
  const auto elapsed = t - session->round_started_ms;
  view.remaining_s = session->config.time_limit_s - static_cast<double>(elapsed) / 1000.0;
  return {200, view.to_json()};
}

ServiceResponse SessionService::choice(const std::string& id, const nlohmann::json& body) {
  const auto session = store_->find(id);
  if (!session) return error_response(404, "no such session");
  if (!body.is_object() || !body.contains("round") || !body["round"].is_number_integer() ||
      body["round"].get<std::int64_t>() < 0) {
    return error_response(400, "body.round: expected the round index");
  }
  if (!body.contains("choice")) return error_response(400, "body.choice: missing");
  const auto submitted = body["round"].get<std::size_t>();

  std::lock_guard lock(session->mutex);
  const std::int64_t t = now();
  expire(*session, t);
  const auto& state = session->state;
  if (state.terminal()) {
    return error_response(409, "stale round: session finished", {{"result", result_path(id)}});
  }
  const std::size_t current = state.current().index;
  if (submitted != current) {
    nlohmann::json extra = {{"current_round", current}};
    if (submitted < state.transcript().size()) {
      extra["timed_out"] = state.transcript()[submitted].timed_out;
    }
    return error_response(409, "stale round", std::move(extra));
  }
  const auto choice = choice_from_json(body["choice"]);
  if (!choice || !is_legal(state.current().key, *choice)) {
    return error_response(400, "illegal choice for " + state.current().key.to_string());
  }
  const std::int64_t latency = t - session->round_started_ms;
  session->state.advance(*choice, latency);
  session->round_started_ms = t;
  store_->append({{"event", "advance"},
                  {"id", id},
                  {"round", current},
                  {"choice", choice_json(choice)},
                  {"latency_ms", latency},
                  {"at_ms", t}});

  nlohmann::json ack = {{"accepted", true}, {"round", current}};
  if (session->state.terminal()) {
    ack["terminal"] = true;
    ack["result"] = result_path(id);
  } else {
    ack["terminal"] = false;
    ack["next"] = round_view(session->config, session->state).to_json();
  }
  return {200, std::move(ack)};
}

ServiceResponse SessionService::result(const std::string& id) {
  const auto session = store_->find(id);
  if (!session) return error_response(404, "no such session");
  std::lock_guard lock(session->mutex);
  expire(*session, now());
  const auto& state = session->state;
  if (!state.terminal()) {
    return error_response(425, "session not finished",
                          {{"current_round", state.current().index}});
  }
  const auto& config = session->config;
  const auto opponents = draw_session_opponents(config);
  const auto payment = settle(config, state, opponents, config.payment_seed);

  nlohmann::json body = {{"id", id}, {"order", to_string(state.order())}};
  auto& profiles = body["profiles"];
  auto& percentiles = body["percentiles"];
  for (Treatment t : kTreatments) {
    const auto profile = classify(state.choices(t), t, *config.spec);
    profiles[to_string(t)] = profile_json(profile);
    percentiles[to_string(t)] = level_percentile(profile.overall, t).to_json();
  }
  body["payment"] = payment.to_json();
  auto& transcript = body["transcript"] = nlohmann::json::array();
  for (const auto& entry : state.transcript()) transcript.push_back(entry.to_json());
  auto& draws = body["opponents"] = nlohmann::json::array();
  for (const auto& d : opponents) draws.push_back(d.to_json());
  return {200, std::move(body)};
}

ServiceResponse SessionService::health() const {
  return {200, {{"status", "ok"}, {"sessions", store_->size()}}};
}

void SessionService::replay_event(const nlohmann::json& event) {
  const auto kind = event.value("event", "");
  const auto id = event.value("id", "");
  try {
    if (kind == "create") {
      auto session = std::make_shared<Session>();
      session->id = id;
      session->config_doc = event.at("config");
      session->config = parse_config(session->config_doc);
      session->state = SessionState::start(session->config);
      session->created_ms = event.at("at_ms").get<std::int64_t>();
      session->round_started_ms = session->created_ms;
      if (store_->insert(session)) ++recovered_;
    } else if (kind == "advance") {
      const auto session = store_->find(id);
      if (!session || session->state.terminal()) return;
      if (session->state.current().index != event.at("round").get<std::size_t>()) return;
      session->state.advance(choice_from_json(event.at("choice")),
                             event.at("latency_ms").get<std::int64_t>());
      session->round_started_ms = event.at("at_ms").get<std::int64_t>();
    }
  } catch (const std::exception& e) {
    std::cerr << "journal: skipping " << kind << " event for " << id << ": " << e.what() << '\n';
  }
}

}  // namespace levelscope
