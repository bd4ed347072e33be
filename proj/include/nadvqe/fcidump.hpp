#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "nadvqe/error.hpp"

namespace nadvqe {

/// Coarse-grid geometry label: symmetric OH stretch (bohr) and HOH angle (rad).
struct GeometryTag {
  double r = 0.0;
  double theta = 0.0;
};

inline std::string describe(const GeometryTag& g) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(r=%.6f, theta=%.6f)", g.r, g.theta);
  return buf;
}

/// Active-space integrals at one geometry. h2 is in chemists' notation (pq|rs)
/// and is stored densely with all eight permutations filled.
class ActiveSpaceIntegrals {
 public:
  ActiveSpaceIntegrals() = default;
  ActiveSpaceIntegrals(std::size_t n_orbitals, std::size_t n_electrons)
      : n_orbitals_(n_orbitals),
        n_electrons_(n_electrons),
        h1_(n_orbitals * n_orbitals, 0.0),
        h2_(n_orbitals * n_orbitals * n_orbitals * n_orbitals, 0.0) {}

  std::size_t n_orbitals() const noexcept { return n_orbitals_; }
  std::size_t n_electrons() const noexcept { return n_electrons_; }

  double core_energy = 0.0;
  int ms2 = 0;
  GeometryTag geometry;

  double h1(std::size_t p, std::size_t q) const { return h1_[p * n_orbitals_ + q]; }
  double h2(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const {
    return h2_[index4(p, q, r, s)];
  }

  void set_h1(std::size_t p, std::size_t q, double v) {
    h1_[p * n_orbitals_ + q] = v;
    h1_[q * n_orbitals_ + p] = v;
  }

  /// Writes all eight permutationally equivalent slots.
  void set_h2(std::size_t p, std::size_t q, std::size_t r, std::size_t s, double v) {
    for (auto [a, b, c, d] : {std::array{p, q, r, s}, std::array{q, p, r, s},
                              std::array{p, q, s, r}, std::array{q, p, s, r},
                              std::array{r, s, p, q}, std::array{s, r, p, q},
                              std::array{r, s, q, p}, std::array{s, r, q, p}}) {
      h2_[index4(a, b, c, d)] = v;
    }
  }

  /// Largest violation of h1 symmetry and of the 8-fold h2 symmetry.
  double symmetry_residual() const {
    double worst = 0.0;
    const std::size_t n = n_orbitals_;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q) worst = std::max(worst, std::abs(h1(p, q) - h1(q, p)));
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < n; ++q)
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t s = 0; s < n; ++s) {
            const double v = h2(p, q, r, s);
            worst = std::max({worst, std::abs(v - h2(q, p, r, s)), std::abs(v - h2(p, q, s, r)),
                              std::abs(v - h2(r, s, p, q))});
          }
    return worst;
  }

 private:
  std::size_t index4(std::size_t p, std::size_t q, std::size_t r, std::size_t s) const {
    return ((p * n_orbitals_ + q) * n_orbitals_ + r) * n_orbitals_ + s;
  }

  std::size_t n_orbitals_ = 0;
  std::size_t n_electrons_ = 0;
  std::vector<double> h1_;
  std::vector<double> h2_;
};

namespace detail {

inline std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

inline bool parse_long(const std::string& tok, long& out) {
  if (tok.empty()) return false;
  char* end = nullptr;
  out = std::strtol(tok.c_str(), &end, 10);
  return end != tok.c_str() && *end == '\0';
}

inline bool parse_real(std::string tok, double& out) {
  if (tok.empty()) return false;
  for (char& c : tok)
    if (c == 'D' || c == 'd') c = 'E';
  char* end = nullptr;
  out = std::strtod(tok.c_str(), &end);
  return end != tok.c_str() && *end == '\0';
}

}  // namespace detail

/// Parses FCIDUMP text: a `&FCI ... &END` (or `/`) namelist header followed by
/// `value i j k l` records. Indices are 1-based in the file.
inline ActiveSpaceIntegrals parse_fcidump(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::string header;
  bool started = false;
  bool finished = false;
  std::size_t header_start = 0;

  while (!finished && std::getline(in, line)) {
    ++line_no;
    std::string u = detail::upper(line);
    if (!started) {
      auto pos = u.find("&FCI");
      if (pos == std::string::npos) {
        if (u.find_first_not_of(" \t\r") == std::string::npos) continue;
        throw Error(ErrorKind::parse,
                    "line " + std::to_string(line_no) + ": expected '&FCI' namelist header");
      }
      started = true;
      header_start = line_no;
      u = u.substr(pos + 4);
    }
    auto end_pos = u.find("&END");
    if (end_pos == std::string::npos) end_pos = u.find('/');
    if (end_pos != std::string::npos) {
      header += ' ' + u.substr(0, end_pos);
      finished = true;
    } else {
      header += ' ' + u;
    }
  }
  if (!started) throw Error(ErrorKind::parse, "empty input, no FCIDUMP header");
  if (!finished)
    throw Error(ErrorKind::parse, "line " + std::to_string(header_start) +
                                      ": unterminated namelist header (missing &END)");

  // "KEY = a, b," -> tokens; bare values after a key belong to it (ORBSYM lists).
  std::string norm;
  for (std::size_t i = 0; i < header.size(); ++i) {
    char c = header[i];
    if (c == ',' || c == '\t' || c == '\r') c = ' ';
    norm += c;
  }
  std::string compact;
  for (char c : norm) {
    if (c == ' ' && !compact.empty() && compact.back() == '=') continue;
    if (c == '=')
      while (!compact.empty() && compact.back() == ' ') compact.pop_back();
    compact += c;
  }

  long norb = -1, nelec = -1, ms2 = 0;
  std::istringstream hs(compact);
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    long v = 0;
    if (key == "NORB" || key == "NELEC" || key == "MS2") {
      if (!detail::parse_long(val, v))
        throw Error(ErrorKind::parse, "line " + std::to_string(header_start) + ": bad value '" +
                                          val + "' for " + key);
      if (key == "NORB") norb = v;
      if (key == "NELEC") nelec = v;
      if (key == "MS2") ms2 = v;
    }
  }
  if (norb <= 0)
    throw Error(ErrorKind::parse,
                "line " + std::to_string(header_start) + ": header lacks a positive NORB");
  if (nelec < 0 || nelec > 2 * norb)
    throw Error(ErrorKind::parse,
                "line " + std::to_string(header_start) + ": header lacks a valid NELEC");

  ActiveSpaceIntegrals ints(static_cast<std::size_t>(norb), static_cast<std::size_t>(nelec));
  ints.ms2 = static_cast<int>(ms2);

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> toks;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    if (toks.size() != 5)
      throw Error(ErrorKind::parse, "line " + std::to_string(line_no) +
                                        ": expected 'value i j k l', got " +
                                        std::to_string(toks.size()) + " fields");
    double value = 0.0;
    if (!detail::parse_real(toks[0], value))
      throw Error(ErrorKind::parse,
                  "line " + std::to_string(line_no) + ": bad integral value '" + toks[0] + "'");
    long idx[4];
    for (int t = 0; t < 4; ++t) {
      if (!detail::parse_long(toks[t + 1], idx[t]))
        throw Error(ErrorKind::parse,
                    "line " + std::to_string(line_no) + ": bad index '" + toks[t + 1] + "'");
      if (idx[t] < 0 || idx[t] > norb)
        throw Error(ErrorKind::range, "line " + std::to_string(line_no) + ": index " +
                                          std::to_string(idx[t]) + " outside [1, " +
                                          std::to_string(norb) + "]");
    }
    const auto [i, j, k, l] = std::array{idx[0], idx[1], idx[2], idx[3]};
    if (i == 0 && j == 0 && k == 0 && l == 0) {
      ints.core_energy = value;
    } else if (i > 0 && j > 0 && k == 0 && l == 0) {
      ints.set_h1(i - 1, j - 1, value);
    } else if (i > 0 && j > 0 && k > 0 && l > 0) {
      ints.set_h2(i - 1, j - 1, k - 1, l - 1, value);
    } else if (i > 0 && j == 0 && k == 0 && l == 0) {
      // orbital energy record; carries no Hamiltonian information
    } else {
      throw Error(ErrorKind::range,
                  "line " + std::to_string(line_no) + ": index pattern is not a FCIDUMP record");
    }
  }
  return ints;
}

inline ActiveSpaceIntegrals parse_fcidump_text(const std::string& text) {
  std::istringstream in(text);
  return parse_fcidump(in);
}

inline ActiveSpaceIntegrals load_fcidump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open FCIDUMP file '" + path + "'");
  try {
    return parse_fcidump(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

/// Writes unique integrals only (i>=j, k>=l, ij>=kl); zeros are omitted.
inline void write_fcidump(std::ostream& out, const ActiveSpaceIntegrals& ints) {
  const std::size_t n = ints.n_orbitals();
  out << " &FCI NORB=" << n << ",NELEC=" << ints.n_electrons() << ",MS2=" << ints.ms2 << ",\n";
  out << "  ORBSYM=";
  for (std::size_t i = 0; i < n; ++i) out << "1,";
  out << "\n  ISYM=1,\n &END\n";
  char buf[128];
  auto pair = [](std::size_t a, std::size_t b) { return a * (a + 1) / 2 + b; };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l <= k; ++l) {
          if (pair(i, j) < pair(k, l)) continue;
          const double v = ints.h2(i, j, k, l);
          if (v == 0.0) continue;
          std::snprintf(buf, sizeof buf, "% .16e %4zu %4zu %4zu %4zu\n", v, i + 1, j + 1, k + 1,
                        l + 1);
          out << buf;
        }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = ints.h1(i, j);
      if (v == 0.0) continue;
      std::snprintf(buf, sizeof buf, "% .16e %4zu %4zu    0    0\n", v, i + 1, j + 1);
      out << buf;
    }
  std::snprintf(buf, sizeof buf, "% .16e    0    0    0    0\n", ints.core_energy);
  out << buf;
}

}  // namespace nadvqe
