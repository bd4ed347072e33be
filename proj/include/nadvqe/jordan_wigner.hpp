#pragma once

#include <cstddef>
#include <cstdint>

#include "nadvqe/fermion.hpp"
#include "nadvqe/pauli.hpp"

namespace nadvqe {

/// a_j = Z_0..Z_{j-1} (X_j + iY_j)/2, a+_j = Z_0..Z_{j-1} (X_j - iY_j)/2.
inline PauliSum jordan_wigner_ladder(const Ladder& l, std::size_t n_qubits) {
  if (l.mode >= n_qubits)
    throw Error(ErrorKind::range, "fermion mode " + std::to_string(l.mode) +
                                     " beyond declared qubit count " + std::to_string(n_qubits));
  const std::uint64_t tail = (std::uint64_t{1} << l.mode) - 1;
  const std::uint64_t bit = std::uint64_t{1} << l.mode;
  PauliSum out(n_qubits);
  out.add_raw(0.5, PauliString{bit, tail});
  out.add_raw(l.dagger ? cplx{0.0, -0.5} : cplx{0.0, 0.5}, PauliString{bit, tail | bit});
  out.canonicalize();
  return out;
}

inline PauliSum jordan_wigner(const FermionOperator& op, std::size_t n_qubits) {
  if (op.max_mode() > n_qubits)
    throw Error(ErrorKind::range, "operator acts on mode " + std::to_string(op.max_mode() - 1) +
                                      " but only " + std::to_string(n_qubits) + " qubits declared");
  PauliSum total(n_qubits);
  for (const auto& term : op.terms()) {
    PauliSum product = PauliSum::identity(n_qubits, term.coefficient);
    for (const auto& l : term.ops) product = product * jordan_wigner_ladder(l, n_qubits);
    for (const auto& t : product.terms()) total.add_raw(t.coefficient, t.string);
  }
  total.canonicalize();
  return total;
}

/// Qubit Hamiltonian straight from integrals: 2 * n_orbitals qubits.
inline PauliSum qubit_hamiltonian(const ActiveSpaceIntegrals& ints) {
  return jordan_wigner(build_fermionic_hamiltonian(ints), 2 * ints.n_orbitals());
}

/// Total number operator sum_q (I - Z_q)/2.
inline PauliSum number_operator(std::size_t n_qubits) {
  PauliSum n(n_qubits);
  n.add_raw(0.5 * static_cast<double>(n_qubits), PauliString{});
  for (std::size_t q = 0; q < n_qubits; ++q) n.add_raw(-0.5, PauliString::single(q, 'Z'));
  n.canonicalize();
  return n;
}

}  // namespace nadvqe
