#pragma once

#include <algorithm>
#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nadvqe/error.hpp"

namespace nadvqe {

using cplx = std::complex<double>;

/// Pauli string in symplectic form: qubit q carries X if bit q of x is set,
/// Z if bit q of z is set, Y if both. The operator is i^{|x&z|} X^x Z^z, so the
/// Y letters are genuine Pauli-Y matrices.
struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  static PauliString single(std::size_t qubit, char letter) {
    const std::uint64_t bit = std::uint64_t{1} << qubit;
    switch (letter) {
      case 'I': return {};
      case 'X': return {bit, 0};
      case 'Y': return {bit, bit};
      case 'Z': return {0, bit};
      default: throw Error(ErrorKind::format, std::string("unknown Pauli letter '") + letter + "'");
    }
  }

  /// `label` lists qubits from n-1 down to 0, e.g. "IZX" = X_0 Z_1.
  static PauliString from_label(const std::string& label) {
    PauliString p;
    const std::size_t n = label.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = single(n - 1 - i, label[i]);
      p.x |= s.x;
      p.z |= s.z;
    }
    return p;
  }

  char letter(std::size_t qubit) const {
    const bool bx = (x >> qubit) & 1u, bz = (z >> qubit) & 1u;
    return bx ? (bz ? 'Y' : 'X') : (bz ? 'Z' : 'I');
  }

  std::string label(std::size_t n_qubits) const {
    std::string s;
    for (std::size_t q = n_qubits; q-- > 0;) s += letter(q);
    return s;
  }

  std::size_t support_width() const {
    const std::uint64_t any = x | z;
    return any == 0 ? 0 : 64 - static_cast<std::size_t>(std::countl_zero(any));
  }

  bool is_identity() const { return x == 0 && z == 0; }

  friend auto operator<=>(const PauliString&, const PauliString&) = default;
};

/// Product a*b = phase * c.
inline std::pair<cplx, PauliString> multiply(const PauliString& a, const PauliString& b) {
  const PauliString c{a.x ^ b.x, a.z ^ b.z};
  int ipow = std::popcount(a.x & a.z) + std::popcount(b.x & b.z) - std::popcount(c.x & c.z);
  ipow += 2 * (std::popcount(a.z & b.x) & 1);
  ipow = ((ipow % 4) + 4) % 4;
  static const cplx powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return {powers[ipow], c};
}

struct PauliTerm {
  cplx coefficient;
  PauliString string;
};

/// Weighted sum of Pauli strings on a fixed qubit count. Mutating operations
/// leave the sum canonical: sorted by string, merged, |c| < drop_tol removed.
class PauliSum {
 public:
  static constexpr double drop_tol = 1e-12;

  PauliSum() = default;
  explicit PauliSum(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits > 64) throw Error(ErrorKind::capacity, "PauliSum supports at most 64 qubits");
  }

  static PauliSum identity(std::size_t n_qubits, cplx c = 1.0) {
    PauliSum s(n_qubits);
    s.add(c, PauliString{});
    return s;
  }

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }

  /// Adds without canonicalizing; call canonicalize() afterwards.
  void add_raw(cplx c, const PauliString& s) {
    if (s.support_width() > n_qubits_)
      throw Error(ErrorKind::range, "Pauli string acts beyond qubit " + std::to_string(n_qubits_));
    terms_.push_back({c, s});
  }

  void add(cplx c, const PauliString& s) {
    add_raw(c, s);
    canonicalize();
  }

  void canonicalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const PauliTerm& a, const PauliTerm& b) { return a.string < b.string; });
    std::vector<PauliTerm> merged;
    merged.reserve(terms_.size());
    for (const auto& t : terms_) {
      if (!merged.empty() && merged.back().string == t.string)
        merged.back().coefficient += t.coefficient;
      else
        merged.push_back(t);
    }
    std::erase_if(merged, [](const PauliTerm& t) { return std::abs(t.coefficient) < drop_tol; });
    terms_ = std::move(merged);
  }

  cplx coefficient(const PauliString& s) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), s,
                               [](const PauliTerm& t, const PauliString& k) { return t.string < k; });
    return (it != terms_.end() && it->string == s) ? it->coefficient : cplx{0.0};
  }

  double max_imag() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.coefficient.imag()));
    return m;
  }

  PauliSum& operator+=(const PauliSum& o) {
    require_same(o);
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    canonicalize();
    return *this;
  }

  PauliSum& operator-=(const PauliSum& o) {
    require_same(o);
    for (const auto& t : o.terms_) terms_.push_back({-t.coefficient, t.string});
    canonicalize();
    return *this;
  }

  PauliSum& operator*=(cplx c) {
    for (auto& t : terms_) t.coefficient *= c;
    canonicalize();
    return *this;
  }

  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator-(PauliSum a, const PauliSum& b) { return a -= b; }
  friend PauliSum operator*(PauliSum a, cplx c) { return a *= c; }
  friend PauliSum operator*(cplx c, PauliSum a) { return a *= c; }

  friend PauliSum operator*(const PauliSum& a, const PauliSum& b) {
    a.require_same(b);
    PauliSum out(a.n_qubits_);
    out.terms_.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& ta : a.terms_)
      for (const auto& tb : b.terms_) {
        auto [phase, s] = multiply(ta.string, tb.string);
        out.terms_.push_back({phase * ta.coefficient * tb.coefficient, s});
      }
    out.canonicalize();
    return out;
  }

  std::string to_string() const {
    std::string s;
    char buf[96];
    for (const auto& t : terms_) {
      std::snprintf(buf, sizeof buf, "(%+.12g%+.12gi) ", t.coefficient.real(), t.coefficient.imag());
      s += buf;
      s += t.string.label(n_qubits_);
      s += '\n';
    }
    return s;
  }

 private:
  void require_same(const PauliSum& o) const {
    if (o.n_qubits_ != n_qubits_)
      throw Error(ErrorKind::dimension, "PauliSum qubit counts differ (" +
                                            std::to_string(n_qubits_) + " vs " +
                                            std::to_string(o.n_qubits_) + ")");
  }

  std::size_t n_qubits_ = 0;
  std::vector<PauliTerm> terms_;
};

/// Amplitude and target index of P acting on basis state |b>.
inline std::pair<cplx, std::uint64_t> apply_to_basis(const PauliString& p, std::uint64_t b) {
  static const cplx powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const int ipow = std::popcount(p.x & p.z) + 2 * (std::popcount(b & p.z) & 1);
  return {powers[ipow % 4], b ^ p.x};
}

inline constexpr std::size_t max_dense_qubits = 14;

/// Dense 2^n x 2^n matrix; qubit 0 is the least-significant bit of the index.
inline Eigen::MatrixXcd pauli_sum_to_matrix(const PauliSum& op) {
  const std::size_t n = op.n_qubits();
  if (n > max_dense_qubits)
    throw Error(ErrorKind::capacity, "dense matrix requested for " + std::to_string(n) +
                                         " qubits (limit " + std::to_string(max_dense_qubits) + ")");
  const std::uint64_t dim = std::uint64_t{1} << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  for (const auto& t : op.terms())
    for (std::uint64_t b = 0; b < dim; ++b) {
      auto [amp, out] = apply_to_basis(t.string, b);
      m(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(b)) += t.coefficient * amp;
    }
  return m;
}

}  // namespace nadvqe
