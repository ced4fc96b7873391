#include "levelscope/tables.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "levelscope/error.hpp"

namespace levelscope {

void JointLevelTable::add(Level row, Level col, std::int64_t count) {
  counts[static_cast<std::size_t>(to_int(row))][static_cast<std::size_t>(to_int(col))] += count;
}

std::int64_t JointLevelTable::at(Level row, Level col) const {
  return counts[static_cast<std::size_t>(to_int(row))][static_cast<std::size_t>(to_int(col))];
}

std::int64_t JointLevelTable::n() const {
  std::int64_t total = 0;
  for (const auto& row : counts) total += std::accumulate(row.begin(), row.end(), std::int64_t{0});
  return total;
}

std::int64_t JointLevelTable::diagonal() const {
  std::int64_t total = 0;
  for (std::size_t i = 0; i < 5; ++i) total += counts[i][i];
  return total;
}

std::array<std::int64_t, 5> JointLevelTable::row_marginal() const {
  std::array<std::int64_t, 5> out{};
  for (std::size_t i = 0; i < 5; ++i) {
    out[i] = std::accumulate(counts[i].begin(), counts[i].end(), std::int64_t{0});
  }
  return out;
}

std::array<std::int64_t, 5> JointLevelTable::col_marginal() const {
  std::array<std::int64_t, 5> out{};
  for (const auto& row : counts) {
    for (std::size_t j = 0; j < 5; ++j) out[j] += row[j];
  }
  return out;
}

nlohmann::json JointLevelTable::to_json() const {
  return {{"row_axis", row_axis}, {"col_axis", col_axis}, {"counts", counts}, {"n", n()}};
}

JointLevelTable JointLevelTable::from_json(const nlohmann::json& doc) {
  JointLevelTable table;
  const nlohmann::json* grid = &doc;
  if (doc.is_object()) {
    if (!doc.contains("counts")) throw SchemaError("joint table JSON needs a \"counts\" field");
    grid = &doc.at("counts");
    table.row_axis = doc.value("row_axis", table.row_axis);
    table.col_axis = doc.value("col_axis", table.col_axis);
  }
  if (!grid->is_array() || grid->size() != 5) throw SchemaError("joint table must be 5x5");
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& row = (*grid)[i];
    if (!row.is_array() || row.size() != 5) throw SchemaError("joint table must be 5x5");
    for (std::size_t j = 0; j < 5; ++j) {
      if (!row[j].is_number_integer() || row[j].get<std::int64_t>() < 0) {
        throw SchemaError("joint table counts must be non-negative integers");
      }
      table.counts[i][j] = row[j].get<std::int64_t>();
    }
  }
  return table;
}

std::int64_t LabeledTable::total() const {
  std::int64_t sum = 0;
  for (const auto& row : counts) sum += std::accumulate(row.begin(), row.end(), std::int64_t{0});
  return sum;
}

std::int64_t LabeledTable::at(const std::string& row, const std::string& col) const {
  const auto r = std::find(row_labels.begin(), row_labels.end(), row);
  const auto c = std::find(col_labels.begin(), col_labels.end(), col);
  if (r == row_labels.end() || c == col_labels.end()) {
    throw DomainError("no cell (" + row + ", " + col + ")");
  }
  return counts[static_cast<std::size_t>(r - row_labels.begin())]
               [static_cast<std::size_t>(c - col_labels.begin())];
}

std::vector<std::int64_t> LabeledTable::column(const std::string& col) const {
  std::vector<std::int64_t> out;
  for (const auto& row : row_labels) out.push_back(at(row, col));
  return out;
}

nlohmann::json LabeledTable::to_json() const {
  return {{"row_header", row_header},
          {"row_labels", row_labels},
          {"col_labels", col_labels},
          {"counts", counts}};
}

std::string LabeledTable::to_csv() const {
  std::ostringstream out;
  out << row_header;
  for (const auto& c : col_labels) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < row_labels.size(); ++i) {
    out << row_labels[i];
    for (auto v : counts[i]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

}  // namespace levelscope
