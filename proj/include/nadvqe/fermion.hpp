#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "nadvqe/fcidump.hpp"

namespace nadvqe {

/// Spin-orbital index for spatial orbital p: spin-up on even qubits, down on odd.
inline constexpr std::size_t spin_orbital(std::size_t p, int spin) {
  return 2 * p + static_cast<std::size_t>(spin);
}

struct Ladder {
  std::size_t mode = 0;
  bool dagger = false;

  friend auto operator<=>(const Ladder&, const Ladder&) = default;
};

/// coefficient * product of ladder operators, leftmost applied last.
struct FermionTerm {
  double coefficient = 0.0;
  std::vector<Ladder> ops;
};

class FermionOperator {
 public:
  FermionOperator() = default;

  const std::vector<FermionTerm>& terms() const noexcept { return terms_; }

  void add(double coefficient, std::vector<Ladder> ops) {
    if (coefficient == 0.0) return;
    terms_.push_back({coefficient, std::move(ops)});
  }

  std::size_t max_mode() const {
    std::size_t m = 0;
    bool any = false;
    for (const auto& t : terms_)
      for (const auto& l : t.ops) {
        m = any ? std::max(m, l.mode) : l.mode;
        any = true;
      }
    return any ? m + 1 : 0;
  }

  FermionOperator adjoint() const {
    FermionOperator out;
    for (const auto& t : terms_) {
      std::vector<Ladder> ops(t.ops.rbegin(), t.ops.rend());
      for (auto& l : ops) l.dagger = !l.dagger;
      out.add(t.coefficient, std::move(ops));
    }
    return out;
  }

  /// Term-string comparison of the operator with its adjoint; this is exact for
  /// operators generated from symmetric integrals, not a full normal-ordering test.
  bool is_hermitian(double tol = 1e-12) const {
    auto collect = [](const FermionOperator& op) {
      std::map<std::vector<Ladder>, double> m;
      for (const auto& t : op.terms_) m[t.ops] += t.coefficient;
      return m;
    };
    auto a = collect(*this);
    auto b = collect(adjoint());
    for (const auto& [k, v] : a) {
      auto it = b.find(k);
      const double w = it == b.end() ? 0.0 : it->second;
      if (std::abs(v - w) > tol) return false;
    }
    for (const auto& [k, v] : b)
      if (!a.count(k) && std::abs(v) > tol) return false;
    return true;
  }

 private:
  std::vector<FermionTerm> terms_;
};

/// H = E_core + sum h1[p][q] a+_{p s} a_{q s}
///       + 1/2 sum (pq|rs) a+_{p s} a+_{r t} a_{s t} a_{q s}
inline FermionOperator build_fermionic_hamiltonian(const ActiveSpaceIntegrals& ints) {
  FermionOperator h;
  const std::size_t n = ints.n_orbitals();
  h.add(ints.core_energy, {});
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      const double v = ints.h1(p, q);
      if (v == 0.0) continue;
      for (int s = 0; s < 2; ++s)
        h.add(v, {{spin_orbital(p, s), true}, {spin_orbital(q, s), false}});
    }
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < n; ++s) {
          const double v = ints.h2(p, q, r, s);
          if (v == 0.0) continue;
          for (int s1 = 0; s1 < 2; ++s1)
            for (int s2 = 0; s2 < 2; ++s2) {
              const std::size_t a = spin_orbital(p, s1), b = spin_orbital(r, s2);
              const std::size_t c = spin_orbital(s, s2), d = spin_orbital(q, s1);
              if (a == b || c == d) continue;
              h.add(0.5 * v, {{a, true}, {b, true}, {c, false}, {d, false}});
            }
        }
  return h;
}

}  // namespace nadvqe
