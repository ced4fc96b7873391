#pragma once

// The experiment session state machine: 22 rounds in a fixed order, explicit
// timeouts, payment draws and transcripts.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "levelscope/agents.hpp"
#include "levelscope/classifier.hpp"

namespace levelscope {

inline constexpr std::size_t kRoundsPerTreatment = 11;
inline constexpr std::size_t kSessionRounds = 2 * kRoundsPerTreatment;

struct SessionConfig {
  TreatmentOrder order = TreatmentOrder::RH;
  std::shared_ptr<const RingSpec> spec;
  AgentPolicy robot_opponents = AgentPolicy::robot();
  AgentPolicy history_opponents;  // opponents in the History Treatment
  std::uint64_t label_seed = 0;
  std::uint64_t payment_seed = 0;
  int time_limit_s = 180;
  int ntd_per_esc = 4;
  int show_up_ntd = 200;

  // Throws ConfigError.
  void validate() const;
  const AgentPolicy& opponents(Treatment treatment) const {
    return treatment == Treatment::Robot ? robot_opponents : history_opponents;
  }
  nlohmann::json to_json() const;
};

using PoolResolver = std::function<std::shared_ptr<const HistoryPool>(const std::string& id)>;

// Reads {"order", "matrices", "opponents": {"kind", "pool", "seed", "sampling"?, "k"?},
// "payment_seed", "label_seed", "time_limit_s"}. "matrices" is required:
// "default" for the bundled set or an inline object; every spec is
// validated. The opponents block configures the History Treatment. Throws
// ConfigError.
SessionConfig session_config_from_json(const nlohmann::json& doc, const PoolResolver& pools);

struct RoundSlot {
  std::size_t index = 0;
  Treatment treatment = Treatment::Robot;
  RoundKey key;
};

// Ring rounds P1..P4 in G1 then G2, then the guessing rounds, per treatment.
const std::vector<RoundSlot>& round_plan(TreatmentOrder order);

using Choice = std::variant<RingAction, int>;
// "a"/"b"/"c" or a decimal integer.
std::optional<Choice> parse_choice(std::string_view text);
std::string to_string(const Choice& choice);
// Whether the choice is legal in the round (an action in a ring round, an
// integer 1..100 in a guessing round).
bool is_legal(const RoundKey& key, const Choice& choice);

struct TranscriptEntry {
  std::size_t round = 0;
  Treatment treatment = Treatment::Robot;
  RoundKey key;
  std::string prompt;
  std::optional<Choice> choice;  // empty when timed out
  std::int64_t latency_ms = 0;
  bool timed_out = false;

  nlohmann::json to_json() const;
};

class SessionState {
 public:
  static SessionState start(const SessionConfig& config);

  TreatmentOrder order() const { return order_; }
  char member_label() const { return member_label_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  bool terminal() const { return transcript_.size() == kSessionRounds; }
  // Throws ProtocolError when terminal.
  const RoundSlot& current() const;

  // Records a choice (or a timeout when empty) for the current round.
  // Illegal choices throw DomainError and leave the state unchanged; any
  // advance after the last round throws ProtocolError.
  void advance(const std::optional<Choice>& choice, std::int64_t latency_ms = 0);

  TreatmentChoices choices(Treatment treatment) const;
  SubjectRecord to_record(std::string subject_id, std::string session_id) const;

 private:
  TreatmentOrder order_ = TreatmentOrder::RH;
  char member_label_ = 'A';
  std::vector<TranscriptEntry> transcript_;
};

// Functional form of SessionState::advance.
SessionState advance(SessionState state, const std::optional<Choice>& choice,
                     std::int64_t latency_ms = 0);

// What the subject sees in a round. Never carries opponent realizations.
struct RoundView {
  RoundSlot slot;
  std::string prompt;
  std::string instruction;
  char member_label = 'A';
  // Ring rounds: own matrix first, then the neighbor's, then onward round
  // the ring.
  std::vector<std::pair<Position, PayoffMatrix>> matrices;
  std::optional<Rational> p;
  double remaining_s = 0;

  nlohmann::json to_json() const;
};

RoundView round_view(const SessionConfig& config, const SessionState& state);

// Localized display text (bundled English by default).
struct InstructionText {
  std::string robot;
  std::string history;
  std::string ring_prompt;
  std::string guess_prompt;

  static const InstructionText& bundled();
};

// Opponents for all 22 rounds, indexed by round.
std::vector<OpponentDraw> draw_session_opponents(const SessionConfig& config);

struct PaymentRecord {
  std::size_t ring_round = 0;
  std::size_t guess_round = 0;
  Rational ring_esc;
  Rational guess_esc;
  Rational total_esc;
  Rational total_ntd;

  nlohmann::json to_json() const;
  friend bool operator==(const PaymentRecord&, const PaymentRecord&) = default;
};

// One ring round and one guessing round are drawn for payment with the
// payment seed. Timed-out rounds pay 0. Throws ProtocolError unless terminal.
PaymentRecord settle(const SessionConfig& config, const SessionState& state,
                     const std::vector<OpponentDraw>& opponents, std::uint64_t payment_seed);

// One event per line: a header, every round, and (if given) the settlement.
std::string transcript_jsonl(const SessionState& state,
                             const std::vector<OpponentDraw>* opponents = nullptr,
                             const PaymentRecord* payment = nullptr);

struct ScriptedRun {
  SessionState state;
  LevelProfile robot;
  LevelProfile history;
  std::vector<OpponentDraw> opponents;
  PaymentRecord payment;

  const LevelProfile& profile(Treatment t) const { return t == Treatment::Robot ? robot : history; }
};

// Plays a 22-entry script (empty entries time out) in round_plan order.
// Throws DomainError on a length mismatch.
ScriptedRun run_scripted(const SessionConfig& config, const std::vector<std::optional<Choice>>& script);

// The 22-entry script that reproduces the given choices in plan order.
std::vector<std::optional<Choice>> script_for(TreatmentOrder order, const TreatmentChoices& robot,
                                              const TreatmentChoices& history);

}  // namespace levelscope
