#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "fcix/errors.hpp"

namespace fcix::io {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(trim(field));
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ParseError("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse '" + s + "' as a number (" + context + ")");
  }
}

/// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
}

/// FNV-1a 64-bit content hash, hex encoded. Used for artifact checksums.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// A labeled value series read from delimited text (header row, first
/// column labels, second column values).
struct LabeledSeries {
  std::vector<std::string> labels;
  std::vector<double> values;
};

inline LabeledSeries read_series(std::istream& in, char delim = ',') {
  LabeledSeries out;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty series stream");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, delim);
    if (fields.size() < 2) throw ParseError("series row needs >= 2 columns: " + line);
    out.labels.push_back(fields[0]);
    out.values.push_back(parse_double(fields[1], "series value"));
  }
  return out;
}

inline LabeledSeries read_series_file(const std::string& path, char delim = ',') {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open series file: " + path);
  return read_series(in, delim);
}

inline std::string write_matrix(const Eigen::MatrixXd& m, char delim = ',') {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << delim;
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  return out.str();
}

inline Eigen::MatrixXd read_matrix(std::istream& in, char delim = ',') {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, delim);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, "matrix entry"));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("ragged matrix rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty matrix stream");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace fcix::io
