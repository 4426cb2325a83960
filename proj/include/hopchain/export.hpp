#pragma once

// CSV and JSON exports for curves, fits, bands, and pair matrices. Numbers
// use the shortest round-trip representation so outputs are reproducible.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hopchain/analysis.hpp"
#include "hopchain/errors.hpp"

namespace hopchain {

inline std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buf, end);
}

// Quotes a CSV field when needed.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_curves_csv(std::ostream& out, std::span<const AccuracyCurve> curves) {
  out << "label,t,value\n";
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      out << csv_field(curve.label) << ',' << p.t << ',' << format_number(p.value) << '\n';
    }
  }
}

inline void write_sizes_csv(std::ostream& out, std::span<const SizeCurve> curves) {
  out << "label,t,words\n";
  for (const auto& curve : curves) {
    for (const auto& p : curve.points) {
      out << csv_field(curve.label) << ',' << p.t << ',' << format_number(p.value) << '\n';
    }
  }
}

// Mean curve, band limits, and the fitted law per point.
inline void write_band_csv(std::ostream& out, const CurveBand& band, const AelFit& fit) {
  out << "t,mean,lower,upper,ael\n";
  for (const auto& p : band.mean.points) {
    out << p.t << ',' << format_number(p.value) << ','
        << format_number(p.value - band.half_width) << ','
        << format_number(p.value + band.half_width) << ','
        << format_number(ael(p.t, fit.alpha)) << '\n';
  }
}

// Row-major; first row and first column carry language codes. Undefined
// cells (including the diagonal) are empty.
inline void write_matrix_csv(std::ostream& out, const PairMatrix& matrix, bool counts = false) {
  out << "source\\target";
  for (const auto& code : matrix.languages) out << ',' << csv_field(code);
  out << '\n';
  for (const auto& row : matrix.languages) {
    out << csv_field(row);
    for (const auto& col : matrix.languages) {
      out << ',';
      if (auto cell = matrix.cell(row, col)) {
        out << (counts ? std::to_string(cell->samples) : format_number(cell->mean));
      }
    }
    out << '\n';
  }
}

inline nlohmann::ordered_json to_json(const AelFit& fit) {
  nlohmann::ordered_json j;
  j["alpha"] = fit.alpha;
  j["rmse"] = fit.rmse;
  j["n"] = fit.n;
  return j;
}

inline nlohmann::ordered_json to_json(const AccuracyCurve& curve) {
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const auto& p : curve.points) pts.push_back({p.t, p.value});
  return {{"label", curve.label}, {"points", std::move(pts)}};
}

inline nlohmann::ordered_json to_json(const SizeCurve& curve) {
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (const auto& p : curve.points) pts.push_back({p.t, p.value});
  return {{"label", curve.label}, {"points", std::move(pts)}};
}

inline nlohmann::ordered_json to_json(const PairMatrix& matrix) {
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& [pair, cell] : matrix.cells) {
    nlohmann::ordered_json c;
    c["source"] = pair.source;
    c["target"] = pair.target;
    c["mean"] = cell.mean;
    c["samples"] = cell.samples;
    cells.push_back(std::move(c));
  }
  nlohmann::ordered_json j;
  j["languages"] = matrix.languages;
  j["cells"] = std::move(cells);
  const auto mean = matrix.aggregate_mean();
  j["aggregate_mean"] = mean ? nlohmann::ordered_json(*mean) : nlohmann::ordered_json();
  return j;
}

// Reads one curve from a CSV whose header names a "t" column and a "value"
// (or, for band files, "mean") column.
inline AccuracyCurve read_curve_csv(std::istream& in, std::string label = "curve") {
  std::string line;
  if (!std::getline(in, line)) throw IntegrityError("curve CSV is empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string field;
    for (char c : s) {
      if (c == ',') {
        out.push_back(field);
        field.clear();
      } else if (c != '\r') {
        field += c;
      }
    }
    out.push_back(field);
    return out;
  };
  const auto header = split(line);
  const auto t_col = std::find(header.begin(), header.end(), "t") - header.begin();
  auto v_col = std::find(header.begin(), header.end(), "value") - header.begin();
  if (v_col == static_cast<long>(header.size())) {
    v_col = std::find(header.begin(), header.end(), "mean") - header.begin();
  }
  if (t_col == static_cast<long>(header.size()) || v_col == static_cast<long>(header.size())) {
    throw IntegrityError("curve CSV needs a 't' column and a 'value' or 'mean' column");
  }
  AccuracyCurve curve;
  curve.label = std::move(label);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split(line);
    try {
      if (fields.size() != header.size()) throw std::invalid_argument("field count");
      const int t = std::stoi(fields[static_cast<std::size_t>(t_col)]);
      const double v = std::stod(fields[static_cast<std::size_t>(v_col)]);
      if (!curve.points.empty() && t <= curve.points.back().t) {
        throw std::invalid_argument("t not strictly increasing");
      }
      curve.points.push_back({t, v});
    } catch (const std::exception& e) {
      throw IntegrityError("curve CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return curve;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.flush();
  if (!out) throw StoreError("cannot write " + path.string());
}

}  // namespace hopchain
