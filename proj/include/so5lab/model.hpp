#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "so5lab/stringmap.hpp"

namespace so5lab {

/// Velocity v, coupling g, per-flavor weights C_i and symmetric pair couplings C_ij.
struct CouplingConfig {
  double v = 1.0;
  double g = 0.0;
  std::array<double, NUM_FLAVORS> C{1.0, 1.0, 1.0, 1.0};
  std::array<std::array<double, NUM_FLAVORS>, NUM_FLAVORS> Cij{};

  /// C_i for flavor 1..4.
  [[nodiscard]] double c(int flavor) const { return C[static_cast<std::size_t>(flavor - 1)]; }
  [[nodiscard]] double cij(int i, int j) const {
    return Cij[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
  }
  void set_pair(int i, int j, double value) {
    Cij[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] = value;
    Cij[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(i - 1)] = value;
  }

  /// Throws InvalidConfig on a non-positive velocity, an asymmetric C_ij or a
  /// nonzero diagonal.
  void validate() const {
    if (!(v > 0.0)) throw InvalidConfig("velocity v must be positive, got " + std::to_string(v));
    for (int i = 1; i <= NUM_FLAVORS; ++i) {
      if (cij(i, i) != 0.0) throw InvalidConfig("C_" + std::to_string(i) + std::to_string(i) + " must be zero");
      for (int j = i + 1; j <= NUM_FLAVORS; ++j)
        if (cij(i, j) != cij(j, i))
          throw InvalidConfig("C_ij must be symmetric: C_" + std::to_string(i) + std::to_string(j) +
                              " != C_" + std::to_string(j) + std::to_string(i));
    }
  }

  /// First pair (i, j) with C_i == C_j but C_ij != 0, if any. Such a pair blocks
  /// the string-transform diagonalization.
  [[nodiscard]] std::optional<std::pair<int, int>> degenerate_pair() const {
    for (int i = 1; i <= NUM_FLAVORS; ++i)
      for (int j = i + 1; j <= NUM_FLAVORS; ++j)
        if (c(i) == c(j) && cij(i, j) != 0.0) return std::pair{i, j};
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Hopping machinery shared by the interacting and the transformed Hamiltonian.

/// Adds Σ coef · ψ_i†(dest) ψ_i(src) over the hops produced by `hops(s, emit)`.
/// `emit(flavor, src, dest, amplitude_of_intermediate)` where the amplitude is a
/// callable of the intermediate bitstring (after the annihilation).
template <FockBasis B>
class HopAccumulator {
 public:
  explicit HopAccumulator(const B& basis) : basis_(basis) {}

  /// Applies coef · ψ_f†(dest) ψ_f(src) to basis column `col`.
  template <class Phase>
  void hop(std::size_t col, int flavor, int src, int dest, cplx coef, Phase&& phase_of_intermediate) {
    const Bits s = basis_.state(col);
    auto a = annihilate(s, mode_index(flavor, src));
    if (!a) return;
    auto c = create(a->state, mode_index(flavor, dest));
    if (!c) return;
    auto row = basis_.index_of(c->state);
    if (!row) throw DimensionMismatch("hop leaves the basis; basis is not closed under hopping");
    const cplx value = coef * static_cast<double>(a->sign * c->sign) * phase_of_intermediate(a->state);
    trips_.emplace_back(static_cast<Eigen::Index>(*row), static_cast<Eigen::Index>(col), value);
  }

  void diagonal(std::size_t col, cplx value) {
    if (value != cplx{}) trips_.emplace_back(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(col), value);
  }

  OperatorMatrix finish() {
    const auto dim = static_cast<Eigen::Index>(basis_.size());
    SparseMat m(dim, dim);
    m.setFromTriplets(trips_.begin(), trips_.end());
    return OperatorMatrix(m.pruned(0.0), basis_.tag());
  }

 private:
  const B& basis_;
  std::vector<Eigen::Triplet<cplx>> trips_;
};

inline int wrap_site(int x, int L) { return ((x % L) + L) % L; }

/// Interaction energy g Σ_x Σ_{i,j} C_ij n_i(x) n_j(x) of a basis state.
inline double interaction_energy(Bits s, int L, const CouplingConfig& cfg) {
  double e = 0.0;
  for (int x = 0; x < L; ++x)
    for (int i = 1; i <= NUM_FLAVORS; ++i) {
      if (!occupied(s, mode_index(i, x))) continue;
      for (int j = 1; j <= NUM_FLAVORS; ++j)
        if (j != i && occupied(s, mode_index(j, x))) e += cfg.cij(i, j);
    }
  return cfg.g * e;
}

/// Lattice H = Σ_x [ iv Σ_i C_i ψ_i†(x)(ψ_i(x+1) - ψ_i(x-1))/2 + g Σ_{ij} C_ij n_i(x) n_j(x) ]
/// with periodic wraparound. Works on the full space or on one sector.
template <FockBasis B>
OperatorMatrix build_interacting_hamiltonian(const B& basis, const CouplingConfig& cfg) {
  cfg.validate();
  const int L = basis.L();
  HopAccumulator<B> acc(basis);
  auto unit = [](Bits) { return cplx{1.0}; };
  for (std::size_t col = 0; col < basis.size(); ++col) {
    for (int i = 1; i <= NUM_FLAVORS; ++i) {
      const cplx half = I_UNIT * cfg.v * cfg.c(i) * 0.5;
      if (half == cplx{}) continue;
      for (int x = 0; x < L; ++x) {
        acc.hop(col, i, wrap_site(x + 1, L), x, half, unit);
        acc.hop(col, i, wrap_site(x - 1, L), x, -half, unit);
      }
    }
    acc.diagonal(col, interaction_energy(basis.state(col), L, cfg));
  }
  return acc.finish();
}

/// Boundary treatment of the transformed Hamiltonian.
///
/// `field_periodic` multiplies the lattice fields Φ(x±1 mod L) literally, so the
/// wrap bond carries the string difference between the two chain ends.
/// `particle_periodic` gives the wrap bond the same local phase as every bulk
/// bond, i.e. the hopping model is translation invariant on the ring; this is
/// the model whose spectrum the Bethe momenta reproduce.
enum class Boundary { particle_periodic, field_periodic };

inline const char* to_string(Boundary b) {
  return b == Boundary::particle_periodic ? "particle-periodic" : "field-periodic";
}

struct FreeHamiltonianOptions {
  StringConvention convention = StringConvention::midpoint;
  Boundary boundary = Boundary::particle_periodic;
};

/// Phase picked up by flavor `i` hopping rightwards across the bond (b, b+1):
/// Σ_k θ_ik [φ_k(b+1) - φ_k(b)] on the intermediate state, with the bond taken
/// as adjacent even when it is the wrap bond.
inline double bond_phase(Bits s1, const ThetaMatrix& theta, int i, int b, int b_next, StringConvention c) {
  double a = 0.0;
  for (int k = 1; k <= NUM_FLAVORS; ++k) {
    const double t = theta(i, k);
    if (t == 0.0) continue;
    const double nb = occupied(s1, mode_index(k, b)) ? 1.0 : 0.0;
    const double nn = occupied(s1, mode_index(k, b_next)) ? 1.0 : 0.0;
    a += t * (c == StringConvention::midpoint ? 0.5 * (nb + nn) : nb);
  }
  return a;
}

/// H' = Σ_x iv Σ_i C_i Φ_i†(x)(Φ_i(x+1) - Φ_i(x-1))/2, expanded into bare hops with
/// density-dependent phases. Conserves each flavor count.
template <FockBasis B>
OperatorMatrix build_free_hamiltonian(const B& basis, const ThetaMatrix& theta, const CouplingConfig& cfg,
                                      FreeHamiltonianOptions opt = {}) {
  cfg.validate();
  const int L = basis.L();
  HopAccumulator<B> acc(basis);
  for (std::size_t col = 0; col < basis.size(); ++col) {
    for (int i = 1; i <= NUM_FLAVORS; ++i) {
      const cplx half = I_UNIT * cfg.v * cfg.c(i) * 0.5;
      if (half == cplx{}) continue;
      for (int x = 0; x < L; ++x) {
        const int right = wrap_site(x + 1, L);
        const int left = wrap_site(x - 1, L);
        if (opt.boundary == Boundary::field_periodic) {
          // Φ†(dest)Φ(src): e^{+iA(dest)} e^{-iA(src)} on the intermediate state
          auto literal = [&](int src) {
            return [&, src](Bits s1) {
              return std::exp(I_UNIT * (string_angle(s1, theta, i, x, opt.convention) -
                                        string_angle(s1, theta, i, src, opt.convention)));
            };
          };
          acc.hop(col, i, right, x, half, literal(right));
          acc.hop(col, i, left, x, -half, literal(left));
        } else {
          // from x+1 leftwards across bond (x, x+1); from x-1 rightwards across (x-1, x)
          acc.hop(col, i, right, x, half, [&](Bits s1) {
            return std::exp(-I_UNIT * bond_phase(s1, theta, i, x, right, opt.convention));
          });
          acc.hop(col, i, left, x, -half, [&](Bits s1) {
            return std::exp(I_UNIT * bond_phase(s1, theta, i, left, x, opt.convention));
          });
        }
      }
    }
  }
  return acc.finish();
}

/// Per-flavor lattice derivative (ψ(x+1) - ψ(x-1))/2 with periodic wraparound,
/// given the operators indexed [site][flavor-1].
inline OperatorMatrix lattice_derivative(const std::vector<std::array<OperatorMatrix, NUM_FLAVORS>>& ops, int flavor,
                                         int x) {
  const int L = static_cast<int>(ops.size());
  const auto f = static_cast<std::size_t>(flavor - 1);
  return 0.5 * (ops[static_cast<std::size_t>(wrap_site(x + 1, L))][f] -
                ops[static_cast<std::size_t>(wrap_site(x - 1, L))][f]);
}

/// max over (i, x) of max-norm([ψ_i(x), H] - ivC_i ∂ψ_i(x) - factor·g Σ_j C_ij n_j(x) ψ_i(x)).
/// The physical value of `interaction_factor` is 2; other values are negative controls.
inline double heisenberg_residual(const FockSpace& space, const CouplingConfig& cfg, double interaction_factor = 2.0) {
  const OperatorMatrix H = build_interacting_hamiltonian(space, cfg);
  const int L = space.L();
  std::vector<std::array<OperatorMatrix, NUM_FLAVORS>> psi(static_cast<std::size_t>(L));
  for (int x = 0; x < L; ++x)
    for (int f = 1; f <= NUM_FLAVORS; ++f) psi[x][f - 1] = mode_operator(space, f, x, ModeKind::annihilate);
  double worst = 0.0;
  for (int x = 0; x < L; ++x)
    for (int i = 1; i <= NUM_FLAVORS; ++i) {
      const OperatorMatrix& p = psi[x][i - 1];
      OperatorMatrix target = (I_UNIT * cfg.v * cfg.c(i)) * lattice_derivative(psi, i, x);
      const OperatorMatrix density = diagonal_operator(space, [&](Bits s) {
        double d = 0.0;
        for (int j = 1; j <= NUM_FLAVORS; ++j)
          if (occupied(s, mode_index(j, x))) d += cfg.cij(i, j);
        return cplx{interaction_factor * cfg.g * d};
      });
      target += density * p;
      worst = std::max(worst, (commutator(p, H) - target).max_norm());
    }
  return worst;
}

/// Σ_{ij} C_ij / (C_i - C_j) scaled by 2g/v; throws on a degenerate pair.
inline ThetaMatrix theta_from_couplings(const CouplingConfig& cfg) {
  cfg.validate();
  if (auto bad = cfg.degenerate_pair()) {
    throw InvalidConfig("C_" + std::to_string(bad->first) + " == C_" + std::to_string(bad->second) +
                        " while C_" + std::to_string(bad->first) + std::to_string(bad->second) +
                        " != 0; the string transform cannot remove this interaction");
  }
  ThetaMatrix::Raw raw{};
  for (int i = 1; i <= NUM_FLAVORS; ++i)
    for (int j = 1; j <= NUM_FLAVORS; ++j) {
      if (i == j || cfg.cij(i, j) == 0.0) continue;
      raw[i - 1][j - 1] = (2.0 * cfg.g / cfg.v) * cfg.cij(i, j) / (cfg.c(i) - cfg.c(j));
    }
  return ThetaMatrix::from(raw);
}

/// max over (i, x) of max-norm([Φ_i(x), H] - ivC_i ∂Φ_i(x)) for the interacting H:
/// zero would mean Φ evolves freely.
inline double free_field_residual_at(const FockSpace& space, const CouplingConfig& cfg, const ThetaMatrix& theta,
                                     const OperatorMatrix& H, StringConvention c = StringConvention::exclusive) {
  const auto phi = deformed_operators(space, theta, c);
  double worst = 0.0;
  for (int x = 0; x < space.L(); ++x)
    for (int i = 1; i <= NUM_FLAVORS; ++i) {
      const OperatorMatrix lhs = commutator(phi[x][i - 1], H);
      const OperatorMatrix rhs = (I_UNIT * cfg.v * cfg.c(i)) * lattice_derivative(phi, i, x);
      worst = std::max(worst, (lhs - rhs).max_norm());
    }
  return worst;
}

struct FreeFieldReport {
  ThetaMatrix continuum_theta;
  double continuum_residual = 0.0;
  ThetaMatrix best_theta;
  double minimized_residual = 0.0;
  int evaluations = 0;
};

/// Free-field residual at the continuum angles, and minimized over the six pair
/// angles by cyclic golden-section search (`sweeps` passes over the pairs).
inline FreeFieldReport free_field_residual(const FockSpace& space, const CouplingConfig& cfg, int sweeps = 2,
                                           StringConvention c = StringConvention::exclusive) {
  FreeFieldReport rep;
  rep.continuum_theta = theta_from_couplings(cfg);
  const OperatorMatrix H = build_interacting_hamiltonian(space, cfg);
  rep.continuum_residual = free_field_residual_at(space, cfg, rep.continuum_theta, H, c);

  std::array<double, 6> u{};
  {
    int k = 0;
    for (int i = 1; i <= NUM_FLAVORS; ++i)
      for (int j = i + 1; j <= NUM_FLAVORS; ++j) u[static_cast<std::size_t>(k++)] = rep.continuum_theta(i, j);
  }
  auto eval = [&](const std::array<double, 6>& w) {
    ++rep.evaluations;
    return free_field_residual_at(space, cfg, ThetaMatrix::from_upper(w), H, c);
  };
  double best = rep.continuum_residual;
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t p = 0; p < u.size(); ++p) {
      double lo = -PI;
      double hi = PI;
      auto at = [&](double t) {
        auto w = u;
        w[p] = t;
        return eval(w);
      };
      double a = hi - golden * (hi - lo);
      double b = lo + golden * (hi - lo);
      double fa = at(a);
      double fb = at(b);
      for (int it = 0; it < 24; ++it) {
        if (fa < fb) {
          hi = b;
          b = a;
          fb = fa;
          a = hi - golden * (hi - lo);
          fa = at(a);
        } else {
          lo = a;
          a = b;
          fa = fb;
          b = lo + golden * (hi - lo);
          fb = at(b);
        }
      }
      const double t = fa < fb ? a : b;
      const double ft = std::min(fa, fb);
      if (ft < best) {
        best = ft;
        u[p] = t;
      }
    }
  }
  rep.best_theta = ThetaMatrix::from_upper(u);
  rep.minimized_residual = best;
  return rep;
}

/// Largest |H - H†| entry.
inline double hermiticity_defect(const OperatorMatrix& H) { return (H - H.adjoint()).max_norm(); }

/// All eigenvalues in ascending order, by dense diagonalization. Throws NotHermitian
/// when |H - H†| exceeds `tol`.
inline std::vector<double> spectrum(const OperatorMatrix& H, double tol = 1e-12) {
  if (H.rows() != H.cols()) throw DimensionMismatch("spectrum: matrix is not square");
  const double defect = hermiticity_defect(H);
  if (defect > tol) throw NotHermitian("spectrum: |H - H^dagger| = " + std::to_string(defect));
  if (H.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<DenseMat> es(H.dense(), Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace so5lab
