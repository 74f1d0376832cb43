#pragma once

#include <Eigen/Core>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "blockcanon/block_matrix.hpp"
#include "blockcanon/errors.hpp"
#include "blockcanon/panel.hpp"

// File formats: dense matrices as headerless CSV (row-major, '.' decimal) or
// as the "BCAN1" binary (magic, u64 rows, u64 cols, little-endian f64
// row-major); block matrices as JSON {"sizes", "d", "b"}; returns panels and
// group maps as CSV. Numbers are written with shortest round-trip formatting,
// so write/read is value-exact and byte-deterministic.

namespace blockcanon::io {

namespace detail {

inline double parse_double(std::string_view token, const std::string& context) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw InputError(context + ": cannot parse number '" + std::string(token) + "'");
  return value;
}

inline std::string format_double(double value) {
  std::array<char, 32> buf;
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

inline std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dense CSV.

inline Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  auto in = detail::open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const auto tokens = detail::split(line, ',');
    std::vector<double> row;
    row.reserve(tokens.size());
    for (const auto tok : tokens) row.push_back(detail::parse_double(tok, path));
    if (!rows.empty() && row.size() != rows.front().size())
      throw InputError(path + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path + ": empty matrix");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
  return m;
}

inline void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  auto out = detail::open_out(path);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ',';
      out << detail::format_double(m(r, c));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// BCAN1 binary.

inline constexpr char kBinaryMagic[5] = {'B', 'C', 'A', 'N', '1'};

namespace detail {

inline void put_u64(std::ofstream& out, std::uint64_t v) {
  std::array<unsigned char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b.data()), 8);
}

inline std::uint64_t get_u64(std::ifstream& in, const std::string& path) {
  std::array<unsigned char, 8> b;
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw InputError(path + ": truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ofstream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

inline double get_f64(std::ifstream& in, const std::string& path) {
  const std::uint64_t bits = get_u64(in, path);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

}  // namespace detail

inline void write_binary_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  auto out = detail::open_out(path, std::ios::binary);
  out.write(kBinaryMagic, 5);
  detail::put_u64(out, static_cast<std::uint64_t>(m.rows()));
  detail::put_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) detail::put_f64(out, m(r, c));
}

inline Eigen::MatrixXd read_binary_matrix(const std::string& path) {
  auto in = detail::open_in(path, std::ios::binary);
  char magic[5];
  if (!in.read(magic, 5) || std::memcmp(magic, kBinaryMagic, 5) != 0)
    throw InputError(path + ": not a BCAN1 file");
  const auto rows = detail::get_u64(in, path);
  const auto cols = detail::get_u64(in, path);
  if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20))
    throw InputError(path + ": implausible dimensions");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = detail::get_f64(in, path);
  return m;
}

// ---------------------------------------------------------------------------
// BlockMatrix JSON: {"sizes":[...], "d":[...], "b":[[...]]}.

inline nlohmann::json to_json(const BlockMatrix& bm) {
  nlohmann::json j;
  j["sizes"] = bm.partition.sizes();
  j["d"] = std::vector<double>(bm.diag.begin(), bm.diag.end());
  std::vector<std::vector<double>> b(bm.block.rows());
  for (Eigen::Index i = 0; i < bm.block.rows(); ++i)
    b[i] = std::vector<double>(bm.block.row(i).begin(), bm.block.row(i).end());
  j["b"] = std::move(b);
  return j;
}

inline BlockMatrix block_matrix_from_json(const nlohmann::json& j) {
  try {
    const auto sizes = j.at("sizes").get<std::vector<int>>();
    const auto d = j.at("d").get<std::vector<double>>();
    const auto b = j.at("b").get<std::vector<std::vector<double>>>();
    BlockPartition part(sizes);
    const int nblocks = part.block_count();
    if (static_cast<int>(d.size()) != nblocks || static_cast<int>(b.size()) != nblocks)
      throw InputError("block json: 'd' and 'b' must have one entry per block");
    Eigen::VectorXd diag(nblocks);
    Eigen::MatrixXd block(nblocks, nblocks);
    for (int i = 0; i < nblocks; ++i) {
      diag(i) = d[i];
      if (static_cast<int>(b[i].size()) != nblocks)
        throw InputError("block json: 'b' must be K x K");
      for (int k = 0; k < nblocks; ++k) block(i, k) = b[i][k];
    }
    return BlockMatrix(part, std::move(diag), std::move(block));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("block json: ") + e.what());
  }
}

inline void write_block_json(const std::string& path, const BlockMatrix& bm) {
  auto out = detail::open_out(path);
  out << to_json(bm).dump(2) << '\n';
}

inline BlockMatrix read_block_json(const std::string& path) {
  auto in = detail::open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
  return block_matrix_from_json(j);
}

// ---------------------------------------------------------------------------
// Returns panel CSV: header "date,<id>,<id>,...", one row per day.

inline ReturnsPanel read_returns_csv(const std::string& path) {
  auto in = detail::open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty panel file");
  line = detail::strip_cr(line);
  const auto header = detail::split(line, ',');
  if (header.size() < 2) throw InputError(path + ": panel needs a date column and assets");
  ReturnsPanel panel;
  panel.asset_ids.reserve(header.size() - 1);
  for (std::size_t i = 1; i < header.size(); ++i)
    panel.asset_ids.emplace_back(header[i]);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const auto tokens = detail::split(line, ',');
    if (tokens.size() != header.size())
      throw InputError(path + ": row " + std::to_string(rows.size() + 2) +
                       " has wrong field count");
    panel.dates.emplace_back(tokens[0]);
    std::vector<double> row;
    row.reserve(tokens.size() - 1);
    for (std::size_t i = 1; i < tokens.size(); ++i)
      row.push_back(detail::parse_double(tokens[i], path));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path + ": no observations");
  panel.x.resize(rows.size(), panel.asset_ids.size());
  for (Eigen::Index r = 0; r < panel.x.rows(); ++r)
    for (Eigen::Index c = 0; c < panel.x.cols(); ++c) panel.x(r, c) = rows[r][c];
  return panel;
}

inline void write_returns_csv(const std::string& path, const ReturnsPanel& panel) {
  auto out = detail::open_out(path);
  out << "date";
  for (const auto& id : panel.asset_ids) out << ',' << id;
  out << '\n';
  for (Eigen::Index r = 0; r < panel.x.rows(); ++r) {
    out << panel.dates[r];
    for (Eigen::Index c = 0; c < panel.x.cols(); ++c)
      out << ',' << detail::format_double(panel.x(r, c));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Group map CSV: "asset_id,label" rows; an optional literal header line
// "asset_id,label" is skipped.

inline GroupMap read_groupmap_csv(const std::string& path) {
  auto in = detail::open_in(path);
  GroupMap groups;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    if (first && line == "asset_id,label") {
      first = false;
      continue;
    }
    first = false;
    const auto tokens = detail::split(line, ',');
    if (tokens.size() != 2) throw InputError(path + ": group map rows must be 'asset_id,label'");
    groups.labels[std::string(tokens[0])] = std::string(tokens[1]);
  }
  if (groups.labels.empty()) throw InputError(path + ": empty group map");
  return groups;
}

inline void write_groupmap_csv(const std::string& path, const GroupMap& groups) {
  auto out = detail::open_out(path);
  out << "asset_id,label\n";
  for (const auto& [id, label] : groups.labels) out << id << ',' << label << '\n';
}

}  // namespace blockcanon::io
