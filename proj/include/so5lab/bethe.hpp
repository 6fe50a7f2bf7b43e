#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include <json.hpp>

#include "so5lab/model.hpp"

namespace so5lab {

// ---------------------------------------------------------------------------
// Admissibility of statistics angles for the deformed current realization.

struct AdmissibilityConstraint {
  int i, j, m, n;
  double deviation;  // distance of θ_im - θ_jm - θ_in + θ_jn from the nearest multiple of 2π
  bool pass;
};

struct AdmissibilityReport {
  std::vector<AdmissibilityConstraint> constraints;
  double max_deviation = 0.0;
  bool pass = true;
  /// First failing constraint as "i,j,m,n", empty on success.
  std::string worst_label;
};

/// Evaluates θ_im - θ_jm ≡ θ_in - θ_jn (mod 2π) for all i, j, m, n in 1..4.
inline AdmissibilityReport admissibility_check(const ThetaMatrix& theta, double tol = 1e-9) {
  AdmissibilityReport r;
  r.constraints.reserve(256);
  for (int i = 1; i <= NUM_FLAVORS; ++i)
    for (int j = 1; j <= NUM_FLAVORS; ++j)
      for (int m = 1; m <= NUM_FLAVORS; ++m)
        for (int n = 1; n <= NUM_FLAVORS; ++n) {
          const double d = distance_to_2pi_multiple(theta(i, m) - theta(j, m) - theta(i, n) + theta(j, n));
          const bool ok = d <= tol;
          r.constraints.push_back({i, j, m, n, d, ok});
          if (d > r.max_deviation) {
            r.max_deviation = d;
            if (!ok) r.worst_label = std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(m) + "," +
                                     std::to_string(n);
          }
          r.pass = r.pass && ok;
        }
  return r;
}

struct CouplingAdmissibility {
  /// Angle-level check on theta_from_couplings(cfg).
  AdmissibilityReport angles;
  /// Largest |r_im - r_jm - r_in + r_jn| with r_ij = C_ij/(C_i - C_j) (zero when C_ij = 0),
  /// taken without reduction. Scaled by 2g/v and reduced mod 2π it is the angle-level deviation.
  double ratio_max_deviation = 0.0;
};

inline double coupling_ratio(const CouplingConfig& cfg, int i, int j) {
  if (i == j || cfg.cij(i, j) == 0.0) return 0.0;
  return cfg.cij(i, j) / (cfg.c(i) - cfg.c(j));
}

inline CouplingAdmissibility admissibility_check(const CouplingConfig& cfg, double tol = 1e-9) {
  CouplingAdmissibility r;
  r.angles = admissibility_check(theta_from_couplings(cfg), tol);
  for (int i = 1; i <= NUM_FLAVORS; ++i)
    for (int j = 1; j <= NUM_FLAVORS; ++j)
      for (int m = 1; m <= NUM_FLAVORS; ++m)
        for (int n = 1; n <= NUM_FLAVORS; ++n)
          r.ratio_max_deviation =
              std::max(r.ratio_max_deviation, std::abs(coupling_ratio(cfg, i, m) - coupling_ratio(cfg, j, m) -
                                                       coupling_ratio(cfg, i, n) + coupling_ratio(cfg, j, n)));
  return r;
}

/// Rank of an integer matrix by fraction-free elimination (exact for the small
/// entries used here).
inline int exact_rank(std::vector<std::vector<std::int64_t>> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows[0].size();
  int rank = 0;
  std::size_t r0 = 0;
  for (std::size_t c = 0; c < cols && r0 < rows.size(); ++c) {
    std::size_t piv = r0;
    while (piv < rows.size() && rows[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[r0]);
    for (std::size_t r = r0 + 1; r < rows.size(); ++r) {
      if (rows[r][c] == 0) continue;
      const std::int64_t a = rows[r0][c];
      const std::int64_t b = rows[r][c];
      std::int64_t g = 0;
      for (std::size_t k = 0; k < cols; ++k) {
        rows[r][k] = a * rows[r][k] - b * rows[r0][k];
        g = std::gcd(g, rows[r][k]);
      }
      if (g > 1)
        for (auto& v : rows[r]) v /= g;
    }
    ++r0;
    ++rank;
  }
  return rank;
}

struct GaugeFreedom {
  int variables;       // 16 entries θ_ij
  int rank;            // rank of the full constraint system
  int nullity;         // free parameters
  int pair_rank;       // rank of the mixed-difference rows over the six upper angles
};

/// Linear constraint system over the 16 entries θ_ij: diagonal rows θ_ii = 0,
/// antisymmetry rows θ_ij + θ_ji = 0 and, when `with_mixed_differences`, the rows
/// θ_im - θ_jm - θ_in + θ_jn = 0. Periodicity is dropped (tangent level).
inline GaugeFreedom gauge_freedom(bool with_mixed_differences = true) {
  auto var = [](int i, int j) { return static_cast<std::size_t>(NUM_FLAVORS * (i - 1) + (j - 1)); };
  std::vector<std::vector<std::int64_t>> rows;
  for (int i = 1; i <= NUM_FLAVORS; ++i) {
    std::vector<std::int64_t> r(16, 0);
    r[var(i, i)] = 1;
    rows.push_back(r);
  }
  for (int i = 1; i <= NUM_FLAVORS; ++i)
    for (int j = i + 1; j <= NUM_FLAVORS; ++j) {
      std::vector<std::int64_t> r(16, 0);
      r[var(i, j)] = 1;
      r[var(j, i)] = 1;
      rows.push_back(r);
    }
  // same rows expressed over the six upper angles (θ_ji = -θ_ij, θ_ii = 0)
  std::vector<std::vector<std::int64_t>> pair_rows;
  auto upper = [](int i, int j) {
    int k = 0;
    for (int a = 1; a <= NUM_FLAVORS; ++a)
      for (int b = a + 1; b <= NUM_FLAVORS; ++b, ++k)
        if (a == i && b == j) return k;
    return -1;
  };
  auto add_pair = [&](std::vector<std::int64_t>& r, int i, int j, int coef) {
    if (i == j) return;
    if (i < j)
      r[static_cast<std::size_t>(upper(i, j))] += coef;
    else
      r[static_cast<std::size_t>(upper(j, i))] -= coef;
  };
  if (with_mixed_differences) {
    for (int i = 1; i <= NUM_FLAVORS; ++i)
      for (int j = 1; j <= NUM_FLAVORS; ++j)
        for (int m = 1; m <= NUM_FLAVORS; ++m)
          for (int n = 1; n <= NUM_FLAVORS; ++n) {
            std::vector<std::int64_t> r(16, 0);
            r[var(i, m)] += 1;
            r[var(j, m)] -= 1;
            r[var(i, n)] -= 1;
            r[var(j, n)] += 1;
            rows.push_back(r);
            std::vector<std::int64_t> p(6, 0);
            add_pair(p, i, m, 1);
            add_pair(p, j, m, -1);
            add_pair(p, i, n, -1);
            add_pair(p, j, n, 1);
            pair_rows.push_back(p);
          }
  }
  GaugeFreedom g;
  g.variables = 16;
  g.rank = exact_rank(rows);
  g.nullity = g.variables - g.rank;
  g.pair_rank = exact_rank(pair_rows);
  return g;
}

/// Number of free angles left by the diagonal, antisymmetry and mixed-difference conditions.
inline int gauge_freedom_dimension() { return gauge_freedom(true).nullity; }

// ---------------------------------------------------------------------------
// Bethe states.

struct BetheState {
  double L = 0;
  Occupation occupations;
  std::vector<int> quantum_numbers;
  std::vector<double> momenta;
  std::vector<int> flavor_of;  // particle j (0-based) -> flavor 1..4, flavor-major order
  double continuum_energy = 0.0;
  double lattice_energy = 0.0;

  [[nodiscard]] int particle_count() const { return static_cast<int>(momenta.size()); }
};

inline std::vector<int> flavor_sequence(const Occupation& occ) {
  std::vector<int> f;
  for (int p = 1; p <= NUM_FLAVORS; ++p)
    for (int k = 0; k < occ[p - 1]; ++k) f.push_back(p);
  return f;
}

/// Momentum shift Σ_{q≠p} n_q θ_pq felt by a particle of flavor p.
inline double twist(const Occupation& occ, const ThetaMatrix& theta, int p) {
  double s = 0.0;
  for (int q = 1; q <= NUM_FLAVORS; ++q)
    if (q != p) s += occ[q - 1] * theta(p, q);
  return s;
}

/// k_j L = -Σ_{q≠p} n_q θ_pq + 2π l_j, solved in closed form. The continuum energy is
/// -v Σ_j C_p k_j; the lattice energy uses the symmetric-difference dispersion -v C_p sin k_j.
inline BetheState solve_bethe(double L, const Occupation& occ, const std::vector<int>& quantum_numbers,
                              const ThetaMatrix& theta, const CouplingConfig& cfg = {}) {
  if (!(L > 0)) throw InvalidConfig("length must be positive");
  const auto flavors = flavor_sequence(occ);
  if (flavors.size() != quantum_numbers.size())
    throw InvalidConfig("need one quantum number per particle: " + std::to_string(flavors.size()) + " particles, " +
                        std::to_string(quantum_numbers.size()) + " quantum numbers");
  BetheState st;
  st.L = L;
  st.occupations = occ;
  st.quantum_numbers = quantum_numbers;
  st.flavor_of = flavors;
  for (std::size_t j = 0; j < flavors.size(); ++j) {
    const int p = flavors[j];
    const double k = (-twist(occ, theta, p) + 2.0 * PI * quantum_numbers[j]) / L;
    st.momenta.push_back(k);
    st.continuum_energy += -cfg.v * cfg.c(p) * k;
    st.lattice_energy += -cfg.v * cfg.c(p) * std::sin(k);
  }
  return st;
}

inline void to_json(nlohmann::ordered_json& j, const BetheState& s) {
  j = nlohmann::ordered_json{{"L", s.L},
                             {"occupations", s.occupations.n},
                             {"quantum_numbers", s.quantum_numbers},
                             {"momenta", s.momenta},
                             {"flavor_of", s.flavor_of},
                             {"continuum_energy", s.continuum_energy},
                             {"lattice_energy", s.lattice_energy}};
}

/// -i ln((1 - i tan(θ/2)) / (1 + i tan(θ/2))) on the principal branch; equals -θ for θ in (-π, π).
inline double pbc_phase_shift(double theta) {
  const double t = std::tan(theta / 2.0);
  const cplx ratio = (1.0 - I_UNIT * t) / (1.0 + I_UNIT * t);
  return (-I_UNIT * std::log(ratio)).real();
}

/// Largest |e^{i k_j L} - Π_q ((1 - i tan(θ_pq/2)) / (1 + i tan(θ_pq/2)))^{n_q}| over particles.
inline double quantization_residual(const BetheState& st, const ThetaMatrix& theta) {
  double worst = 0.0;
  for (std::size_t j = 0; j < st.momenta.size(); ++j) {
    const int p = st.flavor_of[j];
    cplx prod = 1.0;
    for (int q = 1; q <= NUM_FLAVORS; ++q) {
      if (q == p) continue;
      const double t = std::tan(theta(p, q) / 2.0);
      prod *= std::pow((1.0 - I_UNIT * t) / (1.0 + I_UNIT * t), st.occupations[q - 1]);
    }
    worst = std::max(worst, std::abs(std::exp(I_UNIT * st.momenta[j] * st.L) - prod));
  }
  return worst;
}

inline void check_positions(const BetheState& st, const std::vector<double>& x) {
  if (x.size() != st.momenta.size())
    throw InvalidConfig("need one position per particle: " + std::to_string(st.momenta.size()) + " particles, " +
                        std::to_string(x.size()) + " positions");
}

/// Product-form amplitude exp(iΣ k_j x_j) Π_{p<q} Π [1 - i tan(θ_pq/2) ε(x_jp - x_jq)].
/// Throws AmbiguousSign for coincident positions of different flavors.
inline cplx bethe_amplitude(const BetheState& st, const std::vector<double>& x, const ThetaMatrix& theta) {
  check_positions(st, x);
  cplx amp = 1.0;
  double phase = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) phase += st.momenta[j] * x[j];
  amp = std::exp(I_UNIT * phase);
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = 0; b < x.size(); ++b) {
      const int p = st.flavor_of[a];
      const int q = st.flavor_of[b];
      if (p >= q) continue;
      if (x[a] == x[b])
        throw AmbiguousSign("particles of flavors " + std::to_string(p) + " and " + std::to_string(q) +
                            " coincide at x = " + std::to_string(x[a]));
      const double e = x[a] > x[b] ? 1.0 : -1.0;
      amp *= 1.0 - I_UNIT * std::tan(theta(p, q) / 2.0) * e;
    }
  return amp;
}

/// Amplitude of the bare-operator expansion of the deformed state:
/// exp(iΣ k_j x_j) Π_{j<j'} exp(iθ_{p_j p_j'} step(x_j - x_j')), with step(0) fixed by the
/// string convention. Defined at coincident points.
inline cplx string_phase_amplitude(const BetheState& st, const std::vector<int>& x, const ThetaMatrix& theta,
                                   StringConvention c) {
  double phase = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) phase += st.momenta[j] * x[j];
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = a + 1; b < x.size(); ++b) {
      const double t = theta(st.flavor_of[a], st.flavor_of[b]);
      if (t != 0.0) phase += t * step(x[a] - x[b], c);
    }
  return std::exp(I_UNIT * phase);
}

/// Φ_p†(x) applied to a basis state: e^{+iΣ_k θ_pk φ_k(x)} on the state, then ψ_p†(x).
inline std::optional<std::pair<cplx, Bits>> apply_deformed_creation(Bits s, const ThetaMatrix& theta, int flavor,
                                                                    int site, StringConvention c) {
  const double angle = string_angle(s, theta, flavor, site, c);
  auto act = create(s, mode_index(flavor, site));
  if (!act) return std::nullopt;
  return std::pair{static_cast<double>(act->sign) * std::exp(I_UNIT * angle), act->state};
}

enum class StateBasis { deformed, bare };

/// Σ_x φ(x) Φ†_{p_1}(x_1)···Φ†_{p_M}(x_M)|0⟩ (deformed, plane-wave φ) or
/// Σ_x φ̂(x) ψ†_{p_1}(x_1)···ψ†_{p_M}(x_M)|0⟩ (bare, string-phase φ̂), normalized.
/// Operators act right to left, so particle M is created first.
template <FockBasis B>
StateVector build_fock_state(const B& basis, const BetheState& st, const ThetaMatrix& theta, StateBasis kind,
                             StringConvention c = StringConvention::midpoint) {
  const int L = basis.L();
  if (static_cast<double>(L) != st.L) throw InvalidConfig("state length does not match the basis");
  for (int f = 0; f < NUM_FLAVORS; ++f)
    if (st.occupations[f] > L) throw InvalidConfig("sector overflow: occupation " + st.occupations.to_string() +
                                                   " does not fit on L=" + std::to_string(L) + " sites");
  const int M = st.particle_count();
  StateVector v = StateVector::Zero(static_cast<Eigen::Index>(basis.size()));
  std::vector<int> x(static_cast<std::size_t>(M), 0);
  const ThetaMatrix zero = ThetaMatrix::zero();
  const ThetaMatrix& op_theta = kind == StateBasis::deformed ? theta : zero;
  while (true) {
    // apply creators right to left
    cplx amp = kind == StateBasis::deformed ? string_phase_amplitude(st, x, zero, c)
                                            : string_phase_amplitude(st, x, theta, c);
    Bits s = 0;
    bool alive = true;
    for (int j = M - 1; j >= 0 && alive; --j) {
      auto r = apply_deformed_creation(s, op_theta, st.flavor_of[static_cast<std::size_t>(j)],
                                       x[static_cast<std::size_t>(j)], c);
      if (!r) {
        alive = false;
        break;
      }
      amp *= r->first;
      s = r->second;
    }
    if (alive) {
      auto idx = basis.index_of(s);
      if (!idx) throw InvalidConfig("sector overflow: state outside the basis");
      v[static_cast<Eigen::Index>(*idx)] += amp;
    }
    // next configuration
    int pos = M - 1;
    while (pos >= 0 && ++x[static_cast<std::size_t>(pos)] == L) x[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
  const double n = v.norm();
  if (n > 0) v /= n;
  return v;
}

/// All quantum-number assignments with strictly increasing l in 0..L-1 within each flavor.
inline std::vector<std::vector<int>> enumerate_quantum_numbers(int L, const Occupation& occ) {
  std::vector<std::vector<int>> out{{}};
  for (int p = 1; p <= NUM_FLAVORS; ++p) {
    const int n = occ[p - 1];
    std::vector<std::vector<int>> combos;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int start) -> void {
      if (static_cast<int>(cur.size()) == n) {
        combos.push_back(cur);
        return;
      }
      for (int l = start; l < L; ++l) {
        cur.push_back(l);
        self(self, l + 1);
        cur.pop_back();
      }
    };
    rec(rec, 0);
    std::vector<std::vector<int>> next;
    for (const auto& head : out)
      for (const auto& tail : combos) {
        auto v = head;
        v.insert(v.end(), tail.begin(), tail.end());
        next.push_back(std::move(v));
      }
    out = std::move(next);
  }
  return out;
}

/// Sorted lattice energies of every Bethe state in the sector.
inline std::vector<double> bethe_spectrum(int L, const Occupation& occ, const ThetaMatrix& theta,
                                          const CouplingConfig& cfg) {
  std::vector<double> e;
  for (const auto& l : enumerate_quantum_numbers(L, occ)) e.push_back(solve_bethe(L, occ, l, theta, cfg).lattice_energy);
  std::sort(e.begin(), e.end());
  return e;
}

}  // namespace so5lab
