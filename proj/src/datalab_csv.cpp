#include <charconv>
#include <functional>
#include <fstream>
#include <map>
#include <sstream>

#include "levelscope/datalab.hpp"
#include "levelscope/error.hpp"

namespace levelscope {

nlohmann::json LoadResult::report() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rejected) {
    rows.push_back({{"line", r.line}, {"column", r.column}, {"reason", r.reason}});
  }
  return {{"records", records.size()}, {"rejected", rows}};
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::optional<int> parse_int(std::string_view text) {
  int value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<std::size_t> guess_index_of(std::string_view text) {
  for (std::size_t i = 0; i < kGuessMultipliers.size(); ++i) {
    if (text == to_string(kGuessMultipliers[i])) return i;
  }
  return std::nullopt;
}

struct RowError {
  std::string column;
  std::string reason;
};

struct SubjectSlots {
  SubjectRecord record;
  // Slots already filled, to reject duplicates.
  std::map<std::string, bool> seen;
};

}  // namespace

LoadResult parse_dataset(std::string_view csv) {
  LoadResult result;
  std::vector<SubjectSlots> subjects;
  std::map<std::string, std::size_t> index;

  std::size_t line_no = 0;
  std::size_t start = 0;
  bool header_seen = false;
  while (start <= csv.size()) {
    auto end = csv.find('\n', start);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line != kSubjectCsvHeader) {
        throw SchemaError("line 1: expected header '" + std::string(kSubjectCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) {
      if (end == csv.size()) break;
      continue;
    }

    const auto f = split(line);
    const auto reject = [&](RowError e) {
      result.rejected.push_back({line_no, std::move(e.column), std::move(e.reason)});
    };
    if (f.size() != 8) {
      reject({"*", "expected 8 columns, got " + std::to_string(f.size())});
      continue;
    }
    const std::string subject_id(f[0]);
    const std::string session_id(f[1]);
    if (subject_id.empty()) {
      reject({"subject_id", "empty"});
      continue;
    }
    const auto order = parse_treatment_order(f[2]);
    if (!order) {
      reject({"order", "expected RH or HR, got '" + std::string(f[2]) + "'"});
      continue;
    }

    // Validate the decision itself before touching any record.
    std::string slot;
    std::optional<RowError> error;
    std::function<void(SubjectRecord&)> apply;
    const std::string_view family = f[4];
    const std::string_view value = f[7];
    if (family == "ring" || family == "guessing") {
      const auto treatment = parse_treatment(f[3]);
      if (!treatment) {
        reject({"treatment", "expected Robot or History, got '" + std::string(f[3]) + "'"});
        continue;
      }
      const bool timeout = value == "timeout";
      if (family == "ring") {
        const auto game = parse_game_id(f[5]);
        const auto position = parse_position(f[6]);
        const auto action = value.size() == 1 ? parse_ring_action(value) : std::nullopt;
        if (!game) error = RowError{"game", "expected G1 or G2, got '" + std::string(f[5]) + "'"};
        else if (!position) error = RowError{"position", "expected P1..P4, got '" + std::string(f[6]) + "'"};
        else if (!timeout && !action) error = RowError{"action_or_guess", "expected a, b, c or timeout, got '" + std::string(value) + "'"};
        if (!error) {
          slot = to_string(*treatment) + "/" + std::string(f[5]) + "/" + std::string(f[6]);
          apply = [=](SubjectRecord& r) {
            auto& choices = r.choices(*treatment);
            if (!choices) choices = TreatmentChoices{};
            if (action) choices->ring_at(*game, *position) = *action;
          };
        }
      } else {
        const auto gi = guess_index_of(f[5]);
        const auto guess = parse_int(value);
        if (!gi) error = RowError{"game", "expected 2/3, 1/3 or 1/2, got '" + std::string(f[5]) + "'"};
        else if (!f[6].empty()) error = RowError{"position", "must be empty for guessing rows"};
        else if (!timeout && !guess) error = RowError{"action_or_guess", "expected an integer guess or timeout, got '" + std::string(value) + "'"};
        else if (!timeout && (*guess < kMinGuess || *guess > kMaxGuess)) error = RowError{"action_or_guess", "guess " + std::string(value) + " outside 1..100"};
        if (!error) {
          slot = to_string(*treatment) + "/" + std::string(f[5]);
          apply = [=](SubjectRecord& r) {
            auto& choices = r.choices(*treatment);
            if (!choices) choices = TreatmentChoices{};
            if (!timeout) choices->guess[*gi] = *guess;
          };
        }
      }
    } else if (family == "covariate") {
      const auto v = parse_int(value);
      const std::string name(f[5]);
      int hi = -1;
      if (name == "crt_score") hi = 3;
      else if (name == "memory_score") hi = 11;
      else if (name == "farsighted") hi = 1;
      if (hi < 0) error = RowError{"game", "unknown covariate '" + name + "'"};
      else if (!f[3].empty() || !f[6].empty()) error = RowError{"treatment", "covariate rows leave treatment and position empty"};
      else if (!v || *v < 0 || *v > hi) error = RowError{"action_or_guess", name + " must be an integer in 0.." + std::to_string(hi)};
      if (!error) {
        slot = "covariate/" + name;
        apply = [=](SubjectRecord& r) {
          if (name == "crt_score") r.covariates.crt_score = *v;
          else if (name == "memory_score") r.covariates.memory_score = *v;
          else r.covariates.farsighted = *v == 1;
        };
      }
    } else {
      error = RowError{"family", "expected ring, guessing or covariate, got '" + std::string(family) + "'"};
    }
    if (error) {
      reject(*error);
      continue;
    }

    auto it = index.find(subject_id);
    if (it != index.end()) {
      auto& s = subjects[it->second];
      if (s.record.session_id != session_id) {
        reject({"session_id", "subject " + subject_id + " already seen in session " + s.record.session_id});
        continue;
      }
      if (s.record.order != *order) {
        reject({"order", "subject " + subject_id + " already seen with order " + to_string(s.record.order)});
        continue;
      }
      if (s.seen.count(slot)) {
        reject({"*", "duplicate entry for " + slot});
        continue;
      }
    } else {
      SubjectSlots s;
      s.record.subject_id = subject_id;
      s.record.session_id = session_id;
      s.record.order = *order;
      it = index.emplace(subject_id, subjects.size()).first;
      subjects.push_back(std::move(s));
    }
    auto& s = subjects[it->second];
    s.seen[slot] = true;
    apply(s.record);
  }
  if (!header_seen) throw SchemaError("line 1: missing header");
  for (auto& s : subjects) result.records.push_back(std::move(s.record));
  return result;
}

LoadResult load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open dataset " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset(buffer.str());
}

std::string format_dataset(const std::vector<SubjectRecord>& records) {
  std::string out(kSubjectCsvHeader);
  out += '\n';
  const auto check = [](const std::string& id) {
    if (id.find_first_of(",\"\r\n") != std::string::npos) {
      throw SchemaError("identifier cannot be written unquoted: " + id);
    }
  };
  for (const auto& r : records) {
    check(r.subject_id);
    check(r.session_id);
    const std::string prefix = r.subject_id + "," + r.session_id + "," + to_string(r.order) + ",";
    for (Treatment t : treatment_sequence(r.order)) {
      const auto& choices = r.choices(t);
      if (!choices) continue;
      const std::string tp = prefix + to_string(t) + ",";
      for (GameId game : kRingGames) {
        for (Position position : kPositions) {
          const auto& a = choices->ring_at(game, position);
          out += tp + "ring," + to_string(game) + "," + to_string(position) + "," +
                 (a ? std::string(1, to_char(*a)) : "timeout") + "\n";
        }
      }
      for (std::size_t i = 0; i < 3; ++i) {
        const auto& g = choices->guess[i];
        out += tp + "guessing," + to_string(kGuessMultipliers[i]) + ",," +
               (g ? std::to_string(*g) : "timeout") + "\n";
      }
    }
    const auto& c = r.covariates;
    if (c.crt_score) out += prefix + ",covariate,crt_score,," + std::to_string(*c.crt_score) + "\n";
    if (c.memory_score) out += prefix + ",covariate,memory_score,," + std::to_string(*c.memory_score) + "\n";
    if (c.farsighted) out += prefix + ",covariate,farsighted,," + std::string(*c.farsighted ? "1" : "0") + "\n";
  }
  return out;
}

void save_dataset(const std::string& path, const std::vector<SubjectRecord>& records) {
  const auto text = format_dataset(records);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot write dataset " + path);
  out << text;
}

}  // namespace levelscope
