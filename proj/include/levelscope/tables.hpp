#pragma once

// Count tables: the 5x5 joint level table used by the statistics and a
// general labeled table for the secure-subtype layouts and bundled assets.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "levelscope/ieds.hpp"

namespace levelscope {

// counts[row level][column level].
struct JointLevelTable {
  std::array<std::array<std::int64_t, 5>, 5> counts{};
  std::string row_axis = "row";
  std::string col_axis = "col";

  void add(Level row, Level col, std::int64_t count = 1);
  std::int64_t at(Level row, Level col) const;
  std::int64_t n() const;
  std::int64_t diagonal() const;
  std::array<std::int64_t, 5> row_marginal() const;
  std::array<std::int64_t, 5> col_marginal() const;

  nlohmann::json to_json() const;
  // Accepts {"counts": 5x5, "row_axis", "col_axis"} or a bare 5x5 array.
  static JointLevelTable from_json(const nlohmann::json& doc);

  friend bool operator==(const JointLevelTable&, const JointLevelTable&) = default;
};

struct LabeledTable {
  std::string row_header;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<std::int64_t>> counts;  // [row][col]

  std::int64_t total() const;
  std::int64_t at(const std::string& row, const std::string& col) const;
  std::vector<std::int64_t> column(const std::string& col) const;

  nlohmann::json to_json() const;
  std::string to_csv() const;

  friend bool operator==(const LabeledTable&, const LabeledTable&) = default;
};

}  // namespace levelscope
