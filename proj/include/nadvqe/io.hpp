#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nadvqe/error.hpp"

namespace nadvqe {

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// 64-bit FNV-1a; used to fingerprint configs in provenance headers.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Whitespace-separated numeric table with '#' comment header.
struct Table {
  std::string kind;
  std::vector<std::string> header;  ///< comment lines without the leading "# "
  std::vector<std::vector<double>> rows;
};

inline void write_table(const std::filesystem::path& path, const Table& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << "# nadvqe " << t.kind << " v1\n";
  for (const auto& h : t.header) out << "# " << h << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? " " : "") << format_real(row[k]);
    out << "\n";
  }
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

inline Table read_table(const std::filesystem::path& path, const std::string& expected_kind) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  Table t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.size() > 2 ? line.substr(2) : "";
      if (lineno == 1) {
        std::istringstream ss(body);
        std::string tool, kind;
        ss >> tool >> kind;
        if (tool != "nadvqe" || kind != expected_kind)
          throw Error(ErrorKind::format, path.string() + ": expected a " + expected_kind + " table");
        t.kind = kind;
      } else {
        t.header.push_back(body);
      }
      continue;
    }
    if (t.kind.empty()) throw Error(ErrorKind::format, path.string() + ": missing table header");
    std::vector<double> row;
    const char* p = line.c_str();
    while (true) {
      while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
      if (!*p) break;
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p)
        throw Error(ErrorKind::parse, path.string() + ": line " + std::to_string(lineno) + ": bad number");
      row.push_back(v);
      p = end;
    }
    t.rows.push_back(std::move(row));
  }
  if (t.kind.empty()) throw Error(ErrorKind::format, path.string() + ": empty table");
  return t;
}

inline std::string header_value(const Table& t, const std::string& key) {
  const std::string prefix = key + ":";
  for (const auto& h : t.header)
    if (h.rfind(prefix, 0) == 0) {
      auto v = h.substr(prefix.size());
      while (!v.empty() && v.front() == ' ') v.erase(v.begin());
      return v;
    }
  return {};
}

}  // namespace nadvqe
