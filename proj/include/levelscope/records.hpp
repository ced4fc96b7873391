#pragma once

// Per-subject choice data shared by the classifier, the protocol engine and
// the dataset tools.

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "levelscope/game_core.hpp"

namespace levelscope {

enum class Treatment : std::uint8_t { Robot = 0, History = 1 };
inline constexpr std::array<Treatment, 2> kTreatments = {Treatment::Robot, Treatment::History};
std::string to_string(Treatment treatment);
std::optional<Treatment> parse_treatment(std::string_view text);

// RH plays the Robot Treatment first.
enum class TreatmentOrder : std::uint8_t { RH = 0, HR = 1 };
std::string to_string(TreatmentOrder order);
std::optional<TreatmentOrder> parse_treatment_order(std::string_view text);
std::array<Treatment, 2> treatment_sequence(TreatmentOrder order);

// One position's choices in the two ring games.
struct RingPair {
  RingAction g1 = RingAction::a;
  RingAction g2 = RingAction::a;

  RingAction in(GameId game) const { return game == GameId::G1 ? g1 : g2; }
  friend bool operator==(const RingPair&, const RingPair&) = default;
};

struct RingChoiceProfile {
  std::array<RingPair, 4> pairs{};

  const RingPair& at(Position position) const { return pairs[index_of(position)]; }
  RingPair& at(Position position) { return pairs[index_of(position)]; }

  // "bc,ca,cb,bc" lists (G1,G2) pairs for P1..P4.
  static RingChoiceProfile parse(std::string_view text);
  std::string to_string() const;

  friend bool operator==(const RingChoiceProfile&, const RingChoiceProfile&) = default;
};

// Guesses in play order: p = 2/3, 1/3, 1/2.
struct GuessChoiceProfile {
  std::array<int, 3> guesses{};

  friend bool operator==(const GuessChoiceProfile&, const GuessChoiceProfile&) = default;
};

// Everything one subject chose in one treatment. An empty slot is a round
// that timed out (or was never recorded).
struct TreatmentChoices {
  std::array<std::array<std::optional<RingAction>, 2>, 4> ring{};  // [position][game]
  std::array<std::optional<int>, 3> guess{};

  static TreatmentChoices from(const RingChoiceProfile& ring, const GuessChoiceProfile& guess);

  std::optional<RingAction>& ring_at(GameId game, Position position) {
    return ring[index_of(position)][static_cast<std::size_t>(game)];
  }
  const std::optional<RingAction>& ring_at(GameId game, Position position) const {
    return ring[index_of(position)][static_cast<std::size_t>(game)];
  }
  bool complete() const;
  std::optional<RingChoiceProfile> ring_profile() const;
  std::optional<GuessChoiceProfile> guess_profile() const;

  friend bool operator==(const TreatmentChoices&, const TreatmentChoices&) = default;
};

struct Covariates {
  std::optional<int> crt_score;     // 0..3
  std::optional<int> memory_score;  // 0..11
  std::optional<bool> farsighted;

  friend bool operator==(const Covariates&, const Covariates&) = default;
};

struct SubjectRecord {
  std::string subject_id;
  std::string session_id;
  TreatmentOrder order = TreatmentOrder::RH;
  std::optional<TreatmentChoices> robot;
  std::optional<TreatmentChoices> history;
  Covariates covariates;

  const std::optional<TreatmentChoices>& choices(Treatment t) const {
    return t == Treatment::Robot ? robot : history;
  }
  std::optional<TreatmentChoices>& choices(Treatment t) {
    return t == Treatment::Robot ? robot : history;
  }

  friend bool operator==(const SubjectRecord&, const SubjectRecord&) = default;
};

}  // namespace levelscope
