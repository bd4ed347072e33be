#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nadvqe/pauli.hpp"

namespace nadvqe {

/// Dense state over 2^n basis states; qubit 0 is the least-significant index bit.
class Statevector {
 public:
  Statevector() = default;
  explicit Statevector(std::size_t n_qubits)
      : n_qubits_(n_qubits), amps_(std::size_t{1} << n_qubits, cplx{0.0}) {
    if (n_qubits > 30) throw Error(ErrorKind::capacity, "statevector limited to 30 qubits");
  }

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t dim() const noexcept { return amps_.size(); }

  cplx& operator[](std::size_t i) { return amps_[i]; }
  const cplx& operator[](std::size_t i) const { return amps_[i]; }
  std::span<cplx> amplitudes() noexcept { return amps_; }
  std::span<const cplx> amplitudes() const noexcept { return amps_; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }

  /// Probability mass outside the Hamming-weight-k subspace.
  double leakage_outside_weight(std::size_t k) const {
    double s = 0.0;
    for (std::size_t b = 0; b < amps_.size(); ++b)
      if (static_cast<std::size_t>(std::popcount(b)) != k) s += std::norm(amps_[b]);
    return s;
  }

  double max_imag() const {
    double m = 0.0;
    for (const auto& a : amps_) m = std::max(m, std::abs(a.imag()));
    return m;
  }

  Statevector& operator*=(double s) {
    for (auto& a : amps_) a *= s;
    return *this;
  }

 private:
  std::size_t n_qubits_ = 0;
  std::vector<cplx> amps_;
};

/// Basis index of a bitstring whose leftmost character is qubit n-1.
inline std::uint64_t bitstring_index(const std::string& bits) {
  std::uint64_t idx = 0;
  const std::size_t n = bits.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char c = bits[i];
    if (c != '0' && c != '1')
      throw Error(ErrorKind::format, "non-binary character '" + std::string(1, c) +
                                         "' in bitstring '" + bits + "'");
    if (c == '1') idx |= std::uint64_t{1} << (n - 1 - i);
  }
  return idx;
}

inline Statevector basis_state(const std::string& bits) {
  if (bits.empty()) throw Error(ErrorKind::format, "empty bitstring");
  Statevector s(bits.size());
  s[bitstring_index(bits)] = 1.0;
  return s;
}

inline std::size_t hamming_weight(const std::string& bits) {
  return static_cast<std::size_t>(std::popcount(bitstring_index(bits)));
}

inline void require_same_dim(const Statevector& a, std::size_t n_qubits, const char* where) {
  if (a.n_qubits() != n_qubits)
    throw Error(ErrorKind::dimension, std::string(where) + ": state has " +
                                          std::to_string(a.n_qubits()) + " qubits, operator " +
                                          std::to_string(n_qubits));
}

/// <bra| op |ket>, exact.
inline cplx transition_amplitude(const Statevector& bra, const PauliSum& op, const Statevector& ket) {
  require_same_dim(bra, op.n_qubits(), "transition_amplitude");
  require_same_dim(ket, op.n_qubits(), "transition_amplitude");
  cplx total = 0.0;
  const std::uint64_t dim = ket.dim();
  for (const auto& t : op.terms()) {
    cplx acc = 0.0;
    for (std::uint64_t b = 0; b < dim; ++b) {
      if (ket[b] == cplx{0.0}) continue;
      auto [amp, out] = apply_to_basis(t.string, b);
      acc += std::conj(bra[out]) * amp * ket[b];
    }
    total += t.coefficient * acc;
  }
  return total;
}

inline double expectation(const Statevector& state, const PauliSum& op) {
  return transition_amplitude(state, op, state).real();
}

inline cplx inner_product(const Statevector& a, const Statevector& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::dimension, "inner_product: dimension mismatch");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

/// Qubit pair for one particle-number-conserving rotation block.
struct Block {
  std::size_t first = 0;
  std::size_t second = 0;
};

enum class AnsatzLayout {
  same_spin,        ///< (0,2)(1,3)(4,6).. then (2,4)(3,5).. : keeps alternating-spin Sz
  nearest_neighbor  ///< (0,1)(2,3).. then (1,2)(3,4)..
};

/// Layered circuit of real Givens blocks, one angle per block. The block on
/// (a, b) rotates |..0_b..1_a..> -> cos(phi/2)|1_a 0_b> + sin(phi/2)|0_a 1_b>
/// and leaves |00>, |11> untouched, so phi = pi moves the excitation from a to b.
struct AnsatzCircuit {
  std::size_t n_qubits = 0;
  std::size_t depth = 0;
  std::vector<Block> layout;

  std::size_t n_parameters() const noexcept { return layout.size(); }

  static AnsatzCircuit brick_wall(std::size_t n_qubits, std::size_t depth,
                                  AnsatzLayout kind = AnsatzLayout::same_spin) {
    AnsatzCircuit c{n_qubits, depth, {}};
    std::vector<Block> even_layer, odd_layer;
    if (kind == AnsatzLayout::nearest_neighbor) {
      for (std::size_t q = 0; q + 1 < n_qubits; q += 2) even_layer.push_back({q, q + 1});
      for (std::size_t q = 1; q + 1 < n_qubits; q += 2) odd_layer.push_back({q, q + 1});
    } else {
      // Same-spin partners sit two qubits apart; pair orbitals (0,1)(2,3).. then (1,2)..
      for (std::size_t p = 0; 2 * p + 2 < n_qubits; p += 2)
        for (std::size_t s = 0; s < 2 && 2 * p + 2 + s < n_qubits; ++s)
          even_layer.push_back({2 * p + s, 2 * p + 2 + s});
      for (std::size_t p = 1; 2 * p + 2 < n_qubits; p += 2)
        for (std::size_t s = 0; s < 2 && 2 * p + 2 + s < n_qubits; ++s)
          odd_layer.push_back({2 * p + s, 2 * p + 2 + s});
    }
    for (std::size_t d = 0; d < depth; ++d) {
      c.layout.insert(c.layout.end(), even_layer.begin(), even_layer.end());
      c.layout.insert(c.layout.end(), odd_layer.begin(), odd_layer.end());
    }
    return c;
  }
};

inline void apply_block(Statevector& s, const Block& blk, double phi) {
  const std::uint64_t a = std::uint64_t{1} << blk.first;
  const std::uint64_t b = std::uint64_t{1} << blk.second;
  const double c = std::cos(0.5 * phi), sn = std::sin(0.5 * phi);
  for (std::uint64_t idx = 0; idx < s.dim(); ++idx) {
    if ((idx & a) && !(idx & b)) {
      const std::uint64_t partner = (idx & ~a) | b;
      const cplx v01 = s[idx], v10 = s[partner];
      s[idx] = c * v01 - sn * v10;
      s[partner] = sn * v01 + c * v10;
    }
  }
}

inline Statevector apply_ansatz(const AnsatzCircuit& circuit, std::span<const double> params,
                                Statevector state) {
  if (params.size() != circuit.n_parameters())
    throw Error(ErrorKind::arity, "ansatz expects " + std::to_string(circuit.n_parameters()) +
                                      " parameters, got " + std::to_string(params.size()));
  require_same_dim(state, circuit.n_qubits, "apply_ansatz");
  for (std::size_t k = 0; k < circuit.layout.size(); ++k) apply_block(state, circuit.layout[k], params[k]);
  return state;
}

}  // namespace nadvqe
