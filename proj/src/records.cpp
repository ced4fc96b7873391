#include "levelscope/records.hpp"

#include "levelscope/error.hpp"

namespace levelscope {

std::string to_string(Treatment treatment) {
  return treatment == Treatment::Robot ? "Robot" : "History";
}

std::optional<Treatment> parse_treatment(std::string_view text) {
  if (text == "Robot" || text == "robot") return Treatment::Robot;
  if (text == "History" || text == "history") return Treatment::History;
  return std::nullopt;
}

std::string to_string(TreatmentOrder order) { return order == TreatmentOrder::RH ? "RH" : "HR"; }

std::optional<TreatmentOrder> parse_treatment_order(std::string_view text) {
  if (text == "RH") return TreatmentOrder::RH;
  if (text == "HR") return TreatmentOrder::HR;
  return std::nullopt;
}

std::array<Treatment, 2> treatment_sequence(TreatmentOrder order) {
  if (order == TreatmentOrder::RH) return {Treatment::Robot, Treatment::History};
  return {Treatment::History, Treatment::Robot};
}

RingChoiceProfile RingChoiceProfile::parse(std::string_view text) {
  RingChoiceProfile profile;
  std::size_t position = 0;
  std::size_t i = 0;
  while (i <= text.size()) {
    const auto comma = text.find(',', i);
    const auto token = text.substr(i, comma == std::string_view::npos ? text.npos : comma - i);
    if (position >= 4 || token.size() != 2) {
      throw DomainError("ring profile must be four comma-separated action pairs: '" +
                        std::string(text) + "'");
    }
    const auto g1 = parse_ring_action(token.substr(0, 1));
    const auto g2 = parse_ring_action(token.substr(1, 1));
    if (!g1 || !g2) throw DomainError("bad ring action pair '" + std::string(token) + "'");
    profile.pairs[position++] = {*g1, *g2};
    if (comma == std::string_view::npos) break;
    i = comma + 1;
  }
  if (position != 4) {
    throw DomainError("ring profile must list four positions: '" + std::string(text) + "'");
  }
  return profile;
}

std::string RingChoiceProfile::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < 4; ++i) {
    if (i) out += ',';
    out += to_char(pairs[i].g1);
    out += to_char(pairs[i].g2);
  }
  return out;
}

TreatmentChoices TreatmentChoices::from(const RingChoiceProfile& ring,
                                        const GuessChoiceProfile& guess) {
  TreatmentChoices choices;
  for (Position p : kPositions) {
    choices.ring_at(GameId::G1, p) = ring.at(p).g1;
    choices.ring_at(GameId::G2, p) = ring.at(p).g2;
  }
  for (std::size_t i = 0; i < 3; ++i) choices.guess[i] = guess.guesses[i];
  return choices;
}

bool TreatmentChoices::complete() const { return ring_profile() && guess_profile(); }

std::optional<RingChoiceProfile> TreatmentChoices::ring_profile() const {
  RingChoiceProfile profile;
  for (Position p : kPositions) {
    const auto& g1 = ring_at(GameId::G1, p);
    const auto& g2 = ring_at(GameId::G2, p);
    if (!g1 || !g2) return std::nullopt;
    profile.at(p) = {*g1, *g2};
  }
  return profile;
}

std::optional<GuessChoiceProfile> TreatmentChoices::guess_profile() const {
  GuessChoiceProfile profile;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!guess[i]) return std::nullopt;
    profile.guesses[i] = *guess[i];
  }
  return profile;
}

}  // namespace levelscope
