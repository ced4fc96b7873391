#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "levelscope/datalab.hpp"
#include "levelscope/error.hpp"

namespace levelscope {

bool ReportInputs::empty() const {
  return level_distributions.empty() && transitions.empty() && guess_samples.empty() &&
         choice_frequencies.empty() && analyses.empty();
}

namespace {

LabeledTable labeled_table_from_json(const nlohmann::json& doc) {
  LabeledTable t;
  t.row_header = doc.value("row_header", "row");
  t.row_labels = doc.at("row_labels").get<std::vector<std::string>>();
  t.col_labels = doc.at("col_labels").get<std::vector<std::string>>();
  t.counts = doc.at("counts").get<std::vector<std::vector<std::int64_t>>>();
  if (t.counts.size() != t.row_labels.size()) throw std::invalid_argument("row count mismatch");
  for (const auto& row : t.counts) {
    if (row.size() != t.col_labels.size()) throw std::invalid_argument("column count mismatch");
    for (auto v : row) {
      if (v < 0) throw std::invalid_argument("negative count");
    }
  }
  return t;
}

}  // namespace

ReportInputs ReportInputs::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("report inputs must be a JSON object");
  ReportInputs in;
  std::vector<std::string> problems;
  const auto each = [&](const char* section, auto&& read) {
    if (!doc.contains(section)) return;
    const auto& entries = doc.at(section);
    if (!entries.is_object()) {
      problems.push_back(std::string(section) + ": expected an object");
      return;
    }
    for (const auto& [name, value] : entries.items()) {
      try {
        read(name, value);
      } catch (const std::exception& e) {
        problems.push_back(std::string(section) + "." + name + ": " + e.what());
      }
    }
  };
  each("level_distributions", [&](const std::string& name, const nlohmann::json& v) {
    const auto counts = v.get<std::vector<std::int64_t>>();
    if (counts.size() != 5) throw std::invalid_argument("expected 5 counts");
    std::array<std::int64_t, 5> a{};
    for (std::size_t i = 0; i < 5; ++i) {
      if (counts[i] < 0) throw std::invalid_argument("negative count");
      a[i] = counts[i];
    }
    in.level_distributions[name] = a;
  });
  each("transitions", [&](const std::string& name, const nlohmann::json& v) {
    in.transitions[name] = JointLevelTable::from_json(v);
  });
  each("guess_samples", [&](const std::string& name, const nlohmann::json& v) {
    auto samples = v.get<std::vector<double>>();
    if (samples.empty()) throw std::invalid_argument("empty sample");
    in.guess_samples[name] = std::move(samples);
  });
  each("choice_frequencies", [&](const std::string& name, const nlohmann::json& v) {
    in.choice_frequencies[name] = labeled_table_from_json(v);
  });
  each("analyses", [&](const std::string& name, const nlohmann::json& v) { in.analyses[name] = v; });
  for (const auto& [key, value] : doc.items()) {
    static const std::vector<std::string> known = {"level_distributions", "transitions",
                                                   "guess_samples", "choice_frequencies",
                                                   "analyses"};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      problems.push_back(key + ": unknown section");
    }
  }
  if (!problems.empty()) {
    std::string message = "unusable report inputs:";
    for (const auto& p : problems) message += "\n  " + p;
    throw SchemaError(message);
  }
  return in;
}

namespace {

constexpr int kWidth = 520;
constexpr int kHeight = 340;
constexpr int kLeft = 60;
constexpr int kRight = 20;
constexpr int kTop = 40;
constexpr int kBottom = 50;
constexpr int kPlotW = kWidth - kLeft - kRight;
constexpr int kPlotH = kHeight - kTop - kBottom;

const char* const kPalette[] = {"#3b6ea8", "#d07c2e", "#4f9a55", "#a8444d", "#7a5fa3",
                                "#8c6a3f", "#c26fae", "#6b6b6b", "#a3a33a", "#3aa3a3"};

std::string num(double v, int precision = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string file_stem(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out.empty() ? "unnamed" : out;
}

std::string svg_open(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " + std::to_string(kWidth) +
         " " + std::to_string(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n" +
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + "<text x=\"" +
         std::to_string(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(title) + "</text>\n";
}

std::string y_axis(double max_value, const std::string& label) {
  std::string s = "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(kTop) +
                  "\" x2=\"" + std::to_string(kLeft) + "\" y2=\"" + std::to_string(kTop + kPlotH) +
                  "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = max_value * i / 4.0;
    const double y = kTop + kPlotH - kPlotH * i / 4.0;
    s += "<text x=\"" + std::to_string(kLeft - 6) + "\" y=\"" + num(y + 4) +
         "\" text-anchor=\"end\">" + num(v, 2) + "</text>\n";
  }
  s += "<text x=\"14\" y=\"" + std::to_string(kTop + kPlotH / 2) +
       "\" transform=\"rotate(-90 14 " + std::to_string(kTop + kPlotH / 2) +
       ")\" text-anchor=\"middle\">" + escape(label) + "</text>\n";
  return s;
}

std::string baseline() {
  return "<line x1=\"" + std::to_string(kLeft) + "\" y1=\"" + std::to_string(kTop + kPlotH) +
         "\" x2=\"" + std::to_string(kLeft + kPlotW) + "\" y2=\"" + std::to_string(kTop + kPlotH) +
         "\" stroke=\"black\"/>\n";
}

// Bars are drawn against a fixed 0..1 share axis.
std::string level_bars_svg(const std::string& name, const std::array<std::int64_t, 5>& counts) {
  std::int64_t n = 0;
  for (auto c : counts) n += c;
  std::string s = svg_open("Level distribution: " + name) + y_axis(1.0, "share") + baseline();
  const double slot = kPlotW / 5.0;
  for (std::size_t i = 0; i < 5; ++i) {
    const double share = n ? static_cast<double>(counts[i]) / static_cast<double>(n) : 0.0;
    const double h = share * kPlotH;
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    const std::string label = to_string(level_from_int(static_cast<int>(i)));
    s += "<rect x=\"" + num(x) + "\" y=\"" + num(kTop + kPlotH - h) + "\" width=\"" +
         num(slot * 0.7) + "\" height=\"" + num(h) + "\" fill=\"" + kPalette[0] +
         "\" data-label=\"" + label + "\" data-count=\"" + std::to_string(counts[i]) +
         "\" data-share=\"" + num(share, 6) + "\"/>\n";
    s += "<text x=\"" + num(x + slot * 0.35) + "\" y=\"" + std::to_string(kTop + kPlotH + 18) +
         "\" text-anchor=\"middle\">" + label + "</text>\n";
    s += "<text x=\"" + num(x + slot * 0.35) + "\" y=\"" + num(kTop + kPlotH - h - 4) +
         "\" text-anchor=\"middle\" font-size=\"10\">" + std::to_string(counts[i]) + "</text>\n";
  }
  return s + "</svg>\n";
}

std::string heatmap_svg(const std::string& name, const JointLevelTable& t) {
  std::int64_t max = 0;
  for (const auto& row : t.counts) {
    for (auto v : row) max = std::max(max, v);
  }
  std::string s = svg_open("Transitions: " + name);
  const double cell = std::min(kPlotW, kPlotH) / 5.0;
  const double x0 = kLeft + (kPlotW - cell * 5) / 2;
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 5; ++c) {
      const auto v = t.counts[r][c];
      const double intensity = max ? static_cast<double>(v) / static_cast<double>(max) : 0.0;
      const double x = x0 + cell * static_cast<double>(c);
      const double y = kTop + cell * static_cast<double>(r);
      s += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) +
           "\" height=\"" + num(cell) + "\" fill=\"" + kPalette[0] + "\" fill-opacity=\"" +
           num(0.08 + 0.92 * intensity, 3) + "\" stroke=\"white\" data-row=\"" +
           to_string(level_from_int(static_cast<int>(r))) + "\" data-col=\"" +
           to_string(level_from_int(static_cast<int>(c))) + "\" data-count=\"" +
           std::to_string(v) + "\"/>\n";
      s += "<text x=\"" + num(x + cell / 2) + "\" y=\"" + num(y + cell / 2 + 4) +
           "\" text-anchor=\"middle\">" + std::to_string(v) + "</text>\n";
    }
    const std::string label = to_string(level_from_int(static_cast<int>(r)));
    s += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(kTop + cell * (static_cast<double>(r) + 0.5) + 4) +
         "\" text-anchor=\"end\">" + label + "</text>\n";
    s += "<text x=\"" + num(x0 + cell * (static_cast<double>(r) + 0.5)) + "\" y=\"" +
         num(kTop + cell * 5 + 16) + "\" text-anchor=\"middle\">" + label + "</text>\n";
  }
  s += "<text x=\"" + num(x0 + cell * 2.5) + "\" y=\"" + num(kTop + cell * 5 + 34) +
       "\" text-anchor=\"middle\">" + escape(t.col_axis) + "</text>\n";
  s += "<text x=\"14\" y=\"" + num(kTop + cell * 2.5) + "\" transform=\"rotate(-90 14 " +
       num(kTop + cell * 2.5) + ")\" text-anchor=\"middle\">" + escape(t.row_axis) + "</text>\n";
  return s + "</svg>\n";
}

std::string cdf_svg(const std::map<std::string, std::vector<double>>& series) {
  std::string s = svg_open("Empirical CDF of guesses") + y_axis(1.0, "cumulative share") + baseline();
  for (int g = 0; g <= 100; g += 20) {
    const double x = kLeft + kPlotW * g / 100.0;
    s += "<text x=\"" + num(x) + "\" y=\"" + std::to_string(kTop + kPlotH + 18) +
         "\" text-anchor=\"middle\">" + std::to_string(g) + "</text>\n";
  }
  std::size_t color = 0;
  for (const auto& [name, raw] : series) {
    auto samples = raw;
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    const auto px = [](double v) { return kLeft + kPlotW * std::clamp(v, 0.0, 100.0) / 100.0; };
    const auto py = [](double f) { return kTop + kPlotH - kPlotH * f; };
    std::string points = num(px(0)) + "," + num(py(0));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
      // Step: horizontal to the value, then up to the new cumulative share.
      const auto below = static_cast<double>(std::lower_bound(samples.begin(), samples.end(), samples[i]) - samples.begin());
      points += " " + num(px(samples[i])) + "," + num(py(below / n));
      points += " " + num(px(samples[i])) + "," + num(py(static_cast<double>(i + 1) / n));
    }
    points += " " + num(px(100)) + "," + num(py(1));
    const char* colour = kPalette[color % std::size(kPalette)];
    s += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" +
         points + "\" data-series=\"" + escape(name) + "\" data-n=\"" + std::to_string(samples.size()) + "\"/>\n";
    s += "<text x=\"" + std::to_string(kLeft + kPlotW - 4) + "\" y=\"" +
         std::to_string(kTop + 14 + 14 * static_cast<int>(color)) + "\" text-anchor=\"end\" fill=\"" +
         colour + "\">" + escape(name) + "</text>\n";
    ++color;
  }
  return s + "</svg>\n";
}

// One group per column, bars are each row's share of the column total.
std::string grouped_bars_svg(const std::string& name, const LabeledTable& t) {
  std::string s = svg_open("Choice frequencies: " + name) + y_axis(1.0, "share") + baseline();
  const double group = kPlotW / static_cast<double>(std::max<std::size_t>(1, t.col_labels.size()));
  const double bar = group * 0.8 / static_cast<double>(std::max<std::size_t>(1, t.row_labels.size()));
  for (std::size_t c = 0; c < t.col_labels.size(); ++c) {
    std::int64_t total = 0;
    for (const auto& row : t.counts) total += row[c];
    for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
      const double share = total ? static_cast<double>(t.counts[r][c]) / static_cast<double>(total) : 0.0;
      const double h = share * kPlotH;
      const double x = kLeft + group * static_cast<double>(c) + group * 0.1 + bar * static_cast<double>(r);
      s += "<rect x=\"" + num(x) + "\" y=\"" + num(kTop + kPlotH - h) + "\" width=\"" + num(bar) +
           "\" height=\"" + num(h) + "\" fill=\"" + kPalette[r % std::size(kPalette)] +
           "\" data-row=\"" + escape(t.row_labels[r]) + "\" data-col=\"" + escape(t.col_labels[c]) +
           "\" data-count=\"" + std::to_string(t.counts[r][c]) + "\" data-share=\"" + num(share, 6) +
           "\"/>\n";
    }
    s += "<text x=\"" + num(kLeft + group * (static_cast<double>(c) + 0.5)) + "\" y=\"" +
         std::to_string(kTop + kPlotH + 18) + "\" text-anchor=\"middle\">" + escape(t.col_labels[c]) +
         "</text>\n";
  }
  return s + "</svg>\n";
}

std::string joint_csv(const JointLevelTable& t) {
  std::string s = t.row_axis + "\\" + t.col_axis + ",R0,R1,R2,R3,R4\n";
  for (std::size_t r = 0; r < 5; ++r) {
    s += to_string(level_from_int(static_cast<int>(r)));
    for (auto v : t.counts[r]) s += "," + std::to_string(v);
    s += "\n";
  }
  return s;
}

}  // namespace

ReportBundle render_report(const ReportInputs& inputs) {
  ReportBundle bundle;
  nlohmann::json files = nlohmann::json::array();
  const auto add = [&](const std::string& name, const std::string& kind, std::string content) {
    files.push_back({{"name", name}, {"kind", kind}, {"bytes", content.size()}});
    bundle.files[name] = std::move(content);
  };

  if (!inputs.level_distributions.empty()) {
    std::string csv = "distribution,R0,R1,R2,R3,R4,n\n";
    for (const auto& [name, counts] : inputs.level_distributions) {
      std::int64_t n = 0;
      csv += name;
      for (auto c : counts) {
        csv += "," + std::to_string(c);
        n += c;
      }
      csv += "," + std::to_string(n) + "\n";
      add("levels_" + file_stem(name) + ".svg", "level_distribution_plot", level_bars_svg(name, counts));
    }
    add("levels.csv", "level_distribution_table", csv);
  }
  for (const auto& [name, table] : inputs.transitions) {
    add("transition_" + file_stem(name) + ".svg", "transition_heatmap", heatmap_svg(name, table));
    add("transition_" + file_stem(name) + ".csv", "transition_table", joint_csv(table));
  }
  if (!inputs.guess_samples.empty()) {
    add("guess_cdf.svg", "guess_cdf_plot", cdf_svg(inputs.guess_samples));
  }
  for (const auto& [name, table] : inputs.choice_frequencies) {
    add("choices_" + file_stem(name) + ".svg", "choice_frequency_plot", grouped_bars_svg(name, table));
    add("choices_" + file_stem(name) + ".csv", "choice_frequency_table", table.to_csv());
  }
  for (const auto& [name, doc] : inputs.analyses) {
    add("analysis_" + file_stem(name) + ".json", "analysis", doc.dump(2) + "\n");
  }

  bundle.manifest = {{"generator", "levelscope report"},
                     {"files", files},
                     {"inputs",
                      {{"level_distributions", inputs.level_distributions.size()},
                       {"transitions", inputs.transitions.size()},
                       {"guess_samples", inputs.guess_samples.size()},
                       {"choice_frequencies", inputs.choice_frequencies.size()},
                       {"analyses", inputs.analyses.size()}}}};
  return bundle;
}

void ReportBundle::write(const std::string& directory) const {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream out(fs::path(directory) / name, std::ios::binary);
    if (!out) throw SchemaError("cannot write " + (fs::path(directory) / name).string());
    out << content;
  };
  for (const auto& [name, content] : files) put(name, content);
  put("manifest.json", manifest.dump(2) + "\n");
}

}  // namespace levelscope
