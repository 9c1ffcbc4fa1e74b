// SPDX-License-Identifier: Apache-2.0
#ifndef IRSLAB_IO_HPP
#define IRSLAB_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "irslab/channel.hpp"
#include "irslab/common.hpp"
#include "irslab/evaluation.hpp"
#include "irslab/measurement.hpp"

namespace irslab {

/// Shortest-guaranteed-round-trip formatting for data files.
inline std::string format_full(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

/// Compact fixed formatting for CSV output.
inline std::string format_compact(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

/// Write-temp-then-rename so readers never observe partial files.
inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string comment_block(const std::string& text) {
  std::string out;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) out += "# " + line + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Measurement set: `meta N mu sigma2 mode L` then one row per measurement
// (record index, N phase indices in 0..2^mu-1, RSRP in watts).
// ---------------------------------------------------------------------------

inline std::string serialize_measurement_set(const MeasurementSet& set,
                                             const std::string& provenance = {}) {
  std::string out;
  if (!provenance.empty()) out += comment_block(provenance);
  out += "meta " + std::to_string(set.element_count) + " " + std::to_string(set.mu) + " " +
         format_full(set.sigma2) + " " + to_string(set.mode) + " " +
         std::to_string(set.size()) + "\n";
  for (std::size_t l = 0; l < set.records.size(); ++l) {
    out += std::to_string(l);
    for (int idx : set.records[l].reflection.indices()) out += " " + std::to_string(idx);
    out += " " + format_full(set.records[l].rsrp) + "\n";
  }
  return out;
}

inline void save_measurement_set(const std::filesystem::path& path, const MeasurementSet& set,
                                 const std::string& provenance = {}) {
  atomic_write_text(path, serialize_measurement_set(set, provenance));
}

inline MeasurementSet load_measurement_set(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  MeasurementSet set;
  bool have_meta = false;
  std::size_t expected = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    const auto fail = [&](const std::string& why) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    if (!have_meta) {
      std::string tag, mode;
      if (!(row >> tag) || tag != "meta") fail("expected 'meta N mu sigma2 mode L' header");
      if (!(row >> set.element_count >> set.mu >> set.sigma2 >> mode >> expected))
        fail("malformed meta line");
      set.mode = measurement_mode_from_string(mode);
      have_meta = true;
      continue;
    }
    std::size_t record_index = 0;
    if (!(row >> record_index)) fail("expected record index");
    std::vector<int> indices(static_cast<std::size_t>(set.element_count));
    for (auto& idx : indices)
      if (!(row >> idx)) fail("expected " + std::to_string(set.element_count) + " phase indices");
    double rsrp = 0.0;
    if (!(row >> rsrp)) fail("expected RSRP value");
    if (rsrp < 0.0) fail("RSRP must be nonnegative");
    try {
      set.records.push_back({ReflectionVector(std::move(indices), set.mu), rsrp});
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  if (!have_meta) throw ParseError(path.string() + ": missing meta header");
  if (set.records.size() != expected)
    throw ParseError(path.string() + ": expected " + std::to_string(expected) + " records, got " +
                     std::to_string(set.records.size()));
  return set;
}

// ---------------------------------------------------------------------------
// Dense complex matrix dump: `meta rows cols`, optional `attr key value`
// lines, then one `row col re im` line per entry.
// ---------------------------------------------------------------------------

inline std::string serialize_matrix(const CMatrix& matrix,
                                    const std::map<std::string, std::string>& attrs = {},
                                    const std::string& provenance = {}) {
  std::string out;
  if (!provenance.empty()) out += comment_block(provenance);
  out += "meta " + std::to_string(matrix.rows()) + " " + std::to_string(matrix.cols()) + "\n";
  for (const auto& [key, value] : attrs) out += "attr " + key + " " + value + "\n";
  for (Eigen::Index r = 0; r < matrix.rows(); ++r)
    for (Eigen::Index c = 0; c < matrix.cols(); ++c)
      out += std::to_string(r) + " " + std::to_string(c) + " " +
             format_full(matrix(r, c).real()) + " " + format_full(matrix(r, c).imag()) + "\n";
  return out;
}

inline void save_matrix(const std::filesystem::path& path, const CMatrix& matrix,
                        const std::map<std::string, std::string>& attrs = {},
                        const std::string& provenance = {}) {
  atomic_write_text(path, serialize_matrix(matrix, attrs, provenance));
}

inline CMatrix load_matrix(const std::filesystem::path& path,
                           std::map<std::string, std::string>* attrs_out = nullptr) {
  std::istringstream in(read_text(path));
  CMatrix matrix;
  bool have_meta = false;
  std::string line;
  int line_no = 0;
  Eigen::Index filled = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    const auto fail = [&](const std::string& why) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    std::string first;
    row >> first;
    if (!have_meta) {
      Eigen::Index rows = 0, cols = 0;
      if (first != "meta" || !(row >> rows >> cols) || rows < 1 || cols < 1)
        fail("expected 'meta rows cols' header");
      matrix = CMatrix::Zero(rows, cols);
      have_meta = true;
      continue;
    }
    if (first == "attr") {
      std::string key, value;
      if (!(row >> key >> value)) fail("malformed attr line");
      if (attrs_out) (*attrs_out)[key] = value;
      continue;
    }
    Eigen::Index r = 0, c = 0;
    double re = 0.0, im = 0.0;
    try {
      r = std::stoll(first);
    } catch (...) {
      fail("expected row index");
    }
    if (!(row >> c >> re >> im)) fail("malformed entry line");
    if (r < 0 || r >= matrix.rows() || c < 0 || c >= matrix.cols()) fail("entry out of bounds");
    matrix(r, c) = Complex(re, im);
    ++filled;
  }
  if (!have_meta) throw ParseError(path.string() + ": missing meta header");
  if (filled != matrix.size())
    throw ParseError(path.string() + ": expected " + std::to_string(matrix.size()) +
                     " entries, got " + std::to_string(filled));
  return matrix;
}

// ---------------------------------------------------------------------------
// Channel realization dump: columnar (tap index, element index, re, im) with
// element 0 = direct channel, elements 1..N = cascaded channels.
// ---------------------------------------------------------------------------

inline std::string serialize_channel(const ChannelRealization& realization,
                                     const std::string& provenance = {}) {
  std::string out;
  if (!provenance.empty()) out += comment_block(provenance);
  const int kr = realization.element_count() > 0
                     ? static_cast<int>(realization.cascaded_taps[0].size())
                     : 0;
  out += "meta " + std::to_string(realization.direct_taps.size()) + " " + std::to_string(kr) +
         " " + std::to_string(realization.element_count()) + "\n";
  for (Eigen::Index k = 0; k < realization.direct_taps.size(); ++k)
    out += std::to_string(k) + " 0 " + format_full(realization.direct_taps(k).real()) + " " +
           format_full(realization.direct_taps(k).imag()) + "\n";
  for (int n = 0; n < realization.element_count(); ++n) {
    const CVector& taps = realization.cascaded_taps[static_cast<std::size_t>(n)];
    for (Eigen::Index k = 0; k < taps.size(); ++k)
      out += std::to_string(k) + " " + std::to_string(n + 1) + " " +
             format_full(taps(k).real()) + " " + format_full(taps(k).imag()) + "\n";
  }
  return out;
}

inline void save_channel(const std::filesystem::path& path, const ChannelRealization& realization,
                         const std::string& provenance = {}) {
  atomic_write_text(path, serialize_channel(realization, provenance));
}

// ---------------------------------------------------------------------------
// Sweep CSV: axis value, method, mean, standard error, count.
// ---------------------------------------------------------------------------

inline std::string serialize_sweep_csv(const SweepResult& result,
                                       const std::string& provenance = {}) {
  std::string out;
  if (!provenance.empty()) out += comment_block(provenance);
  out += "axis,method,mean,std_err,count\n";
  for (const auto& cell : result.cells)
    out += format_compact(cell.axis_value) + "," + cell.method + "," + format_compact(cell.mean) +
           "," + format_compact(cell.std_err) + "," + std::to_string(cell.count) + "\n";
  return out;
}

inline void save_sweep_csv(const std::filesystem::path& path, const SweepResult& result,
                           const std::string& provenance = {}) {
  atomic_write_text(path, serialize_sweep_csv(result, provenance));
}

}  // namespace irslab

#endif  // IRSLAB_IO_HPP
