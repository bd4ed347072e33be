#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nadvqe/bfgs.hpp"
#include "nadvqe/fcidump.hpp"
#include "nadvqe/qsim.hpp"

namespace nadvqe {

struct SsvqeConfig {
  /// Strictly decreasing positive weights, one per reference state.
  std::vector<double> weights{9.0, 4.0, 1.0};
  std::vector<std::string> initial_bitstrings{"101111", "111011", "111110"};
  std::size_t depth = 5;
  AnsatzLayout layout = AnsatzLayout::same_spin;
  double gradient_step = 1e-4;
  BfgsOptions optimizer{};
  std::optional<std::vector<double>> warm_start;
  /// Amplitude of the seeded random cold-start parameters.
  double cold_start_spread = 0.1;
  std::size_t restarts = 3;
  double restart_threshold = 5e-3;
  std::uint64_t seed = 7;

  std::size_t n_qubits() const {
    return initial_bitstrings.empty() ? 0 : initial_bitstrings.front().size();
  }

  AnsatzCircuit circuit() const { return AnsatzCircuit::brick_wall(n_qubits(), depth, layout); }

  void validate() const {
    if (weights.size() != initial_bitstrings.size() || weights.empty())
      throw Error(ErrorKind::schema, "ssvqe: need one weight per initial bitstring");
    for (std::size_t k = 0; k < weights.size(); ++k) {
      if (!(weights[k] > 0.0)) throw Error(ErrorKind::schema, "ssvqe: weights must be positive");
      if (k > 0 && !(weights[k - 1] > weights[k]))
        throw Error(ErrorKind::schema, "ssvqe: weights must be strictly decreasing");
    }
    const std::size_t n = n_qubits();
    std::vector<std::uint64_t> seen;
    for (const auto& b : initial_bitstrings) {
      if (b.size() != n)
        throw Error(ErrorKind::schema, "ssvqe: bitstring '" + b + "' has wrong length");
      const auto idx = bitstring_index(b);
      if (std::find(seen.begin(), seen.end(), idx) != seen.end())
        throw Error(ErrorKind::schema, "ssvqe: duplicate initial bitstring '" + b + "'");
      seen.push_back(idx);
    }
    if (!(gradient_step > 0.0)) throw Error(ErrorKind::schema, "ssvqe: gradient step must be > 0");
  }
};

/// Rotated reference states U(phi)|b_k>, in initial-bitstring order.
inline std::vector<Statevector> rotated_states(const AnsatzCircuit& circuit,
                                               std::span<const double> params,
                                               const std::vector<std::string>& bitstrings) {
  std::vector<Statevector> out;
  out.reserve(bitstrings.size());
  for (const auto& b : bitstrings) out.push_back(apply_ansatz(circuit, params, basis_state(b)));
  return out;
}

inline std::vector<double> state_energies(const AnsatzCircuit& circuit, std::span<const double> params,
                                          const PauliSum& h, const std::vector<std::string>& bitstrings) {
  std::vector<double> e;
  for (const auto& s : rotated_states(circuit, params, bitstrings)) e.push_back(expectation(s, h));
  return e;
}

/// sum_k w_k <b_k| U^+ H U |b_k>.
inline double ssvqe_objective(std::span<const double> params, const PauliSum& h,
                              const AnsatzCircuit& circuit, const SsvqeConfig& cfg) {
  const auto e = state_energies(circuit, params, h, cfg.initial_bitstrings);
  double total = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) total += cfg.weights[k] * e[k];
  return total;
}

inline double ssvqe_objective(std::span<const double> params, const PauliSum& h, const SsvqeConfig& cfg) {
  return ssvqe_objective(params, h, cfg.circuit(), cfg);
}

struct GeometryResult {
  GeometryTag geometry;
  /// Ascending energies E0 <= E1 <= E2.
  std::vector<double> energies;
  std::vector<double> parameters;
  double objective = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  /// permutation[k] = index of the initial bitstring whose rotated state is the k-th lowest.
  std::vector<std::size_t> permutation;
  std::size_t starts = 1;
};

struct EigenstateSet {
  std::vector<Statevector> states;  ///< energy-sorted, aligned with GeometryResult::energies
  std::vector<double> energies;
  std::vector<double> parameters;
};

/// Applies the recorded permutation so that states come out energy-sorted.
inline EigenstateSet eigenstates_from_parameters(const SsvqeConfig& cfg, const GeometryResult& r) {
  const auto circuit = cfg.circuit();
  auto raw = rotated_states(circuit, r.parameters, cfg.initial_bitstrings);
  EigenstateSet set;
  set.parameters = r.parameters;
  set.energies = r.energies;
  for (std::size_t k = 0; k < raw.size(); ++k) set.states.push_back(raw[r.permutation[k]]);
  return set;
}

namespace detail {

/// The identity coefficient only adds a constant; dropping it keeps the
/// objective small enough for the line search to resolve tiny decreases.
inline BfgsResult ssvqe_single_start(const PauliSum& h, const AnsatzCircuit& circuit,
                                     const SsvqeConfig& cfg, std::vector<double> start) {
  const double offset = h.coefficient(PauliString{}).real();
  const PauliSum shifted = h - PauliSum::identity(h.n_qubits(), offset);
  double wsum = 0.0;
  for (double w : cfg.weights) wsum += w;
  Objective f = [&](std::span<const double> p) { return ssvqe_objective(p, shifted, circuit, cfg); };
  Gradient g = [&](std::span<const double> p, std::span<double> out) {
    central_difference_gradient(f, p, cfg.gradient_step, out);
  };
  auto r = minimize_bfgs(f, g, std::move(start), cfg.optimizer);
  r.value += wsum * offset;
  return r;
}

inline std::vector<double> random_parameters(std::size_t n, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<double> p(n);
  for (auto& v : p) v = u(rng);
  return p;
}

}  // namespace detail

inline GeometryResult finalize_result(const PauliSum& h, const AnsatzCircuit& circuit,
                                      const SsvqeConfig& cfg, const BfgsResult& opt) {
  GeometryResult r;
  r.parameters = opt.x;
  r.objective = opt.value;
  r.converged = opt.converged;
  r.iterations = opt.iterations;
  r.gradient_norm = opt.gradient_norm;
  const auto raw = state_energies(circuit, r.parameters, h, cfg.initial_bitstrings);
  r.permutation.resize(raw.size());
  std::iota(r.permutation.begin(), r.permutation.end(), std::size_t{0});
  std::stable_sort(r.permutation.begin(), r.permutation.end(),
                   [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
  for (std::size_t k : r.permutation) r.energies.push_back(raw[k]);
  return r;
}

struct OptimizeOutput {
  GeometryResult result;
  EigenstateSet states;
};

/// One SSVQE solve. `reference` (if given) holds neighbour-estimated energies;
/// exceeding any of them by restart_threshold triggers seeded random restarts.
inline OptimizeOutput optimize(const PauliSum& h, const SsvqeConfig& cfg,
                               const std::optional<std::vector<double>>& reference = std::nullopt,
                               std::uint64_t point_seed = 0) {
  cfg.validate();
  if (h.n_qubits() != cfg.n_qubits())
    throw Error(ErrorKind::dimension, "Hamiltonian has " + std::to_string(h.n_qubits()) +
                                          " qubits, bitstrings " + std::to_string(cfg.n_qubits()));
  const auto circuit = cfg.circuit();
  const std::size_t np = circuit.n_parameters();
  std::vector<double> start;
  if (cfg.warm_start) {
    if (cfg.warm_start->size() != np)
      throw Error(ErrorKind::arity, "warm start has " + std::to_string(cfg.warm_start->size()) +
                                        " parameters, ansatz " + std::to_string(np));
    start = *cfg.warm_start;
  } else {
    start = detail::random_parameters(np, cfg.cold_start_spread, cfg.seed ^ (point_seed * 0x9E3779B97F4A7C15ull));
  }

  auto best_opt = detail::ssvqe_single_start(h, circuit, cfg, start);
  GeometryResult best = finalize_result(h, circuit, cfg, best_opt);

  auto suspicious = [&](const GeometryResult& r) {
    if (!reference) return false;
    for (std::size_t k = 0; k < r.energies.size() && k < reference->size(); ++k)
      if (r.energies[k] > (*reference)[k] + cfg.restart_threshold) return true;
    return false;
  };

  if (suspicious(best) || !best.converged) {
    for (std::size_t k = 0; k < cfg.restarts; ++k) {
      auto p = detail::random_parameters(np, 3.14159265358979, cfg.seed + 1000003ull * (point_seed + 1) + k);
      auto o = detail::ssvqe_single_start(h, circuit, cfg, p);
      ++best.starts;
      if (o.value < best.objective - 1e-12 || (!best.converged && o.converged)) {
        const std::size_t starts = best.starts;
        best = finalize_result(h, circuit, cfg, o);
        best.starts = starts;
      }
    }
  }
  OptimizeOutput out{best, eigenstates_from_parameters(cfg, best)};
  return out;
}

}  // namespace nadvqe
