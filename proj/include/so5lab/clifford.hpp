#pragma once

#include <array>
#include <cstdlib>
#include <string>
#include <utility>

#include "so5lab/operator.hpp"
#include "so5lab/report.hpp"

namespace so5lab {

using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;

inline constexpr int SO5_DIM = 5;
inline constexpr int NUM_PAIRS = 10;

/// Position of the ordered pair (a, b), 1 <= a < b <= 5, in the ten-element pair basis.
/// Order: (1,2) (1,3) (1,4) (1,5) (2,3) (2,4) (2,5) (3,4) (3,5) (4,5).
constexpr int pair_index(int a, int b) {
  if (a > b) std::swap(a, b);
  int idx = 0;
  for (int r = 1; r < a; ++r) idx += SO5_DIM - r;
  return idx + (b - a - 1);
}

constexpr std::pair<int, int> pair_of(int index) {
  for (int a = 1; a <= SO5_DIM; ++a) {
    for (int b = a + 1; b <= SO5_DIM; ++b) {
      if (pair_index(a, b) == index) return {a, b};
    }
  }
  return {0, 0};
}

inline std::string pair_label(int a, int b) { return std::to_string(a) + std::to_string(b); }

namespace pauli {
inline Mat2 id() { return Mat2::Identity(); }
inline Mat2 x() {
  Mat2 m;
  m << 0, 1, 1, 0;
  return m;
}
inline Mat2 y() {
  Mat2 m;
  m << cplx{0, 0}, cplx{0, -1}, cplx{0, 1}, cplx{0, 0};
  return m;
}
inline Mat2 z() {
  Mat2 m;
  m << 1, 0, 0, -1;
  return m;
}
inline Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return m;
}
}  // namespace pauli

/// Antisymmetric table indexed by pairs (a, b); stores a < b, reversed pairs flip sign,
/// a == b yields zero.
template <class M>
class PairTable {
 public:
  PairTable() = default;
  explicit PairTable(std::array<M, NUM_PAIRS> items) : items_(std::move(items)) {}

  [[nodiscard]] M at(int a, int b) const {
    if (a == b) return zero_like(items_[0]);
    const M& m = items_[static_cast<std::size_t>(pair_index(a, b))];
    return a < b ? m : M(cplx{-1.0} * m);
  }
  [[nodiscard]] const M& stored(int index) const { return items_[static_cast<std::size_t>(index)]; }
  M& stored(int index) { return items_[static_cast<std::size_t>(index)]; }
  [[nodiscard]] const std::array<M, NUM_PAIRS>& items() const { return items_; }

 private:
  std::array<M, NUM_PAIRS> items_{};
};

/// The 4x4 Dirac matrices Γ^a and the generators Γ^{ab} = -i Γ^a Γ^b.
///
/// Γ^1 = σ2⊗σ2, Γ^2 = 1⊗σ1, Γ^3 = σ3⊗σ2, Γ^4 = 1⊗σ3, Γ^5 = σ1⊗σ2, where the first
/// factor acts on the (c, d†) block index and the second on spin. This is the
/// representation in which -(1/2)ψ†Γ^{ab}ψ reproduces the spin/charge/π current
/// table entry by entry; Γ^1Γ^2Γ^3Γ^4Γ^5 = -1.
struct GammaRep {
  std::array<Mat4, SO5_DIM> gammas;
  PairTable<Mat4> generators;

  /// Γ^a for a in 1..5.
  [[nodiscard]] const Mat4& gamma(int a) const { return gammas.at(static_cast<std::size_t>(a - 1)); }
  /// Γ^{ab} with Γ^{ba} = -Γ^{ab}, Γ^{aa} = 0.
  [[nodiscard]] Mat4 generator(int a, int b) const { return generators.at(a, b); }
};

inline GammaRep gamma_rep() {
  using namespace pauli;
  GammaRep rep;
  rep.gammas = {kron(y(), y()), kron(id(), x()), kron(z(), y()), kron(id(), z()), kron(x(), y())};
  std::array<Mat4, NUM_PAIRS> gens;
  for (int k = 0; k < NUM_PAIRS; ++k) {
    auto [a, b] = pair_of(k);
    gens[static_cast<std::size_t>(k)] = -I_UNIT * rep.gamma(a) * rep.gamma(b);
  }
  rep.generators = PairTable<Mat4>(gens);
  return rep;
}

/// Max-norm of {Γ^a, Γ^b} - 2δ_ab over all 15 unordered pairs.
inline ViolationReport check_clifford(const GammaRep& rep) {
  ViolationReport r{"clifford-anticommutator"};
  for (int a = 1; a <= SO5_DIM; ++a) {
    for (int b = a; b <= SO5_DIM; ++b) {
      Mat4 ac = rep.gamma(a) * rep.gamma(b) + rep.gamma(b) * rep.gamma(a);
      if (a == b) ac -= 2.0 * Mat4::Identity();
      r.record("{G" + std::to_string(a) + ",G" + std::to_string(b) + "}", max_norm(ac));
    }
  }
  return r;
}

/// SO(5) structure constants in the pair basis: [I_λ, I_μ] = i Σ_ν f[λ][μ][ν] I_ν.
///
/// Only the integer part f is stored; the complex constants are c = i f.
struct StructureConstants {
  std::array<std::array<std::array<int, NUM_PAIRS>, NUM_PAIRS>, NUM_PAIRS> f{};

  [[nodiscard]] int integer(int l, int m, int n) const {
    return f[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)][static_cast<std::size_t>(n)];
  }
  [[nodiscard]] cplx c(int l, int m, int n) const { return I_UNIT * static_cast<double>(integer(l, m, n)); }
};

inline StructureConstants so5_structure_constants() {
  StructureConstants sc;
  auto delta = [](int x, int y) { return x == y ? 1 : 0; };
  // add coefficient `coef` times I_{pq} (antisymmetric) to the bracket [λ, μ]
  auto add = [&](int l, int m, int coef, int p, int q) {
    if (coef == 0 || p == q) return;
    const int sign = p < q ? 1 : -1;
    sc.f[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)][static_cast<std::size_t>(pair_index(p, q))] +=
        sign * coef;
  };
  for (int l = 0; l < NUM_PAIRS; ++l) {
    auto [a, b] = pair_of(l);
    for (int m = 0; m < NUM_PAIRS; ++m) {
      auto [c, d] = pair_of(m);
      add(l, m, delta(b, c), a, d);
      add(l, m, delta(a, d), b, c);
      add(l, m, -delta(a, c), b, d);
      add(l, m, -delta(b, d), a, c);
    }
  }
  return sc;
}

/// Largest |Σ_ν (f_{λμν} f_{νσ·} + cyclic)| over all index triples; exact integer arithmetic.
inline long jacobi_violation(const StructureConstants& sc) {
  long worst = 0;
  for (int x = 0; x < NUM_PAIRS; ++x)
    for (int y = 0; y < NUM_PAIRS; ++y)
      for (int z = 0; z < NUM_PAIRS; ++z)
        for (int out = 0; out < NUM_PAIRS; ++out) {
          long s = 0;
          for (int n = 0; n < NUM_PAIRS; ++n) {
            s += static_cast<long>(sc.integer(y, z, n)) * sc.integer(x, n, out) +
                 static_cast<long>(sc.integer(z, x, n)) * sc.integer(y, n, out) +
                 static_cast<long>(sc.integer(x, y, n)) * sc.integer(z, n, out);
          }
          worst = std::max(worst, std::labs(s));
        }
  return worst;
}

/// Checks [I_ab, I_cd] = i(δ_bc I_ad + δ_ad I_bc - δ_ac I_bd - δ_bd I_ac) for all pairs.
///
/// Works for any matrix type (4x4 gamma generators, Fock-space currents). The
/// breakdown holds one entry per ordered pair-of-pairs.
template <AlgebraMatrix M>
ViolationReport check_so5_closure(const PairTable<M>& gens) {
  const Eigen::Index dim = dimension_of(gens.stored(0));
  for (int k = 1; k < NUM_PAIRS; ++k) {
    if (dimension_of(gens.stored(k)) != dim) throw DimensionMismatch("so5 closure: generators differ in dimension");
  }
  ViolationReport r{"so5-closure"};
  auto delta = [](int x, int y) { return x == y ? 1.0 : 0.0; };
  for (int l = 0; l < NUM_PAIRS; ++l) {
    auto [a, b] = pair_of(l);
    for (int m = 0; m < NUM_PAIRS; ++m) {
      auto [c, d] = pair_of(m);
      M rhs = zero_like(gens.stored(0));
      if (delta(b, c) != 0) rhs = M(rhs + gens.at(a, d));
      if (delta(a, d) != 0) rhs = M(rhs + gens.at(b, c));
      if (delta(a, c) != 0) rhs = M(rhs - gens.at(b, d));
      if (delta(b, d) != 0) rhs = M(rhs - gens.at(a, c));
      M resid = M(commutator(gens.stored(l), gens.stored(m)) - M(I_UNIT * rhs));
      r.record("[I" + pair_label(a, b) + ",I" + pair_label(c, d) + "]", max_norm(resid));
    }
  }
  return r;
}

/// The ten matrices -(1/2)Γ^{ab}, which close under the SO(5) bracket.
inline PairTable<Mat4> spinor_generators(const GammaRep& rep) {
  std::array<Mat4, NUM_PAIRS> g;
  for (int k = 0; k < NUM_PAIRS; ++k) g[static_cast<std::size_t>(k)] = -0.5 * rep.generators.stored(k);
  return PairTable<Mat4>(g);
}

}  // namespace so5lab
