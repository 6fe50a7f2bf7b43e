#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "so5lab/fock.hpp"

namespace so5lab {

inline constexpr double PI = std::numbers::pi;

/// Reduces an angle to (-π, π].
inline double reduce_angle(double a) {
  double r = std::remainder(a, 2.0 * PI);  // [-π, π]
  if (r <= -PI) r += 2.0 * PI;
  return r;
}

/// Distance from `a` to the nearest multiple of 2π.
inline double distance_to_2pi_multiple(double a) { return std::abs(std::remainder(a, 2.0 * PI)); }

/// Statistics angles θ_ij between the four flavors (1-based access).
///
/// A validated matrix stores the upper triangle reduced to (-π, π] and the lower
/// triangle as its exact negative, so θ_ij + θ_ji == 0 holds in floating point.
/// Note that this puts θ_ji in [-π, π) when θ_ij = π.
class ThetaMatrix {
 public:
  using Raw = std::array<std::array<double, NUM_FLAVORS>, NUM_FLAVORS>;

  ThetaMatrix() = default;

  /// Validates the diagonal and antisymmetry conditions (mod 2π, tolerance `tol`).
  static ThetaMatrix from(const Raw& raw, double tol = 1e-12) {
    for (int i = 0; i < NUM_FLAVORS; ++i) {
      if (distance_to_2pi_multiple(raw[i][i]) > tol) {
        throw InvalidTheta("diagonal condition violated: theta_" + std::to_string(i + 1) + std::to_string(i + 1) +
                           " = " + std::to_string(raw[i][i]) + " is not a multiple of 2*pi");
      }
      for (int j = i + 1; j < NUM_FLAVORS; ++j) {
        if (distance_to_2pi_multiple(raw[i][j] + raw[j][i]) > tol) {
          throw InvalidTheta("antisymmetry condition violated: theta_" + std::to_string(i + 1) +
                             std::to_string(j + 1) + " + theta_" + std::to_string(j + 1) + std::to_string(i + 1) +
                             " = " + std::to_string(raw[i][j] + raw[j][i]) + " is not a multiple of 2*pi");
        }
      }
    }
    ThetaMatrix t;
    for (int i = 0; i < NUM_FLAVORS; ++i) {
      for (int j = i + 1; j < NUM_FLAVORS; ++j) {
        t.m_[i][j] = reduce_angle(raw[i][j]);
        t.m_[j][i] = -t.m_[i][j];
      }
    }
    return t;
  }

  static ThetaMatrix zero() { return ThetaMatrix{}; }

  /// Builds from the six upper-triangle angles θ12, θ13, θ14, θ23, θ24, θ34.
  static ThetaMatrix from_upper(const std::array<double, 6>& u) {
    Raw raw{};
    int k = 0;
    for (int i = 0; i < NUM_FLAVORS; ++i)
      for (int j = i + 1; j < NUM_FLAVORS; ++j) {
        raw[i][j] = u[static_cast<std::size_t>(k++)];
        raw[j][i] = -raw[i][j];
      }
    return from(raw);
  }

  /// θ_ij = a_i - a_j.
  static ThetaMatrix from_differences(const std::array<double, NUM_FLAVORS>& a) {
    Raw raw{};
    for (int i = 0; i < NUM_FLAVORS; ++i)
      for (int j = 0; j < NUM_FLAVORS; ++j) raw[i][j] = a[i] - a[j];
    return from(raw);
  }

  /// Stores `raw` verbatim with no validation. Test fixtures only.
  static ThetaMatrix unchecked(const Raw& raw) {
    ThetaMatrix t;
    t.m_ = raw;
    return t;
  }

  /// θ_ij for flavors i, j in 1..4.
  [[nodiscard]] double operator()(int i, int j) const { return m_[i - 1][j - 1]; }
  [[nodiscard]] const Raw& raw() const { return m_; }
  [[nodiscard]] bool is_zero() const {
    for (const auto& row : m_)
      for (double v : row)
        if (v != 0.0) return false;
    return true;
  }

  friend bool operator==(const ThetaMatrix&, const ThetaMatrix&) = default;

 private:
  Raw m_{};
};

inline void to_json(nlohmann::json& j, const ThetaMatrix& t) { j = t.raw(); }
inline void from_json(const nlohmann::json& j, ThetaMatrix& t) {
  if (!j.is_array() || j.size() != NUM_FLAVORS) throw InvalidTheta("theta must be a 4x4 array");
  ThetaMatrix::Raw raw{};
  for (std::size_t i = 0; i < NUM_FLAVORS; ++i) {
    if (!j[i].is_array() || j[i].size() != NUM_FLAVORS) throw InvalidTheta("theta must be a 4x4 array");
    for (std::size_t k = 0; k < NUM_FLAVORS; ++k) raw[i][k] = j[i][k].get<double>();
  }
  t = ThetaMatrix::from(raw);
}
inline void to_json(nlohmann::ordered_json& j, const ThetaMatrix& t) { j = t.raw(); }

/// How the continuum string ∫_{-∞}^x n(y) dy is put on the lattice.
///
/// `exclusive` counts sites strictly left of x. `midpoint` adds half of the
/// occupation at x itself, i.e. the step function takes the value 1/2 at the
/// origin; this is the convention under which the transformed Hamiltonian is
/// exactly solved by the Bethe momenta (see model.hpp).
enum class StringConvention { exclusive, midpoint };

inline const char* to_string(StringConvention c) { return c == StringConvention::exclusive ? "exclusive" : "midpoint"; }

/// Lattice step function: 0 for x < 0, 1 for x > 0, and 0 or 1/2 at the origin.
inline double step(int x, StringConvention c) {
  if (x > 0) return 1.0;
  if (x < 0) return 0.0;
  return c == StringConvention::midpoint ? 0.5 : 0.0;
}

/// Sign function with ε(0) = 0.
constexpr int eps(int x) { return (x > 0) - (x < 0); }

/// φ_k(x) evaluated on a basis state.
inline double string_value(Bits s, int flavor, int site, StringConvention c) {
  double v = count_left(s, flavor, site);
  if (c == StringConvention::midpoint && occupied(s, mode_index(flavor, site))) v += 0.5;
  return v;
}

/// Σ_k θ_ik φ_k(x) on a basis state.
inline double string_angle(Bits s, const ThetaMatrix& theta, int flavor, int site, StringConvention c) {
  double a = 0.0;
  for (int k = 1; k <= NUM_FLAVORS; ++k) {
    const double t = theta(flavor, k);
    if (t != 0.0) a += t * string_value(s, k, site, c);
  }
  return a;
}

/// φ_flavor(site) as a diagonal operator.
inline OperatorMatrix counting_string(const FockSpace& space, int flavor, int site,
                                      StringConvention c = StringConvention::exclusive) {
  check_mode(space.L(), flavor, site);
  return diagonal_operator(space, [&](Bits s) { return cplx{string_value(s, flavor, site, c)}; });
}

/// Φ_i(x) = exp[-i Σ_k θ_ik φ_k(x)] ψ_i(x). The exponential is diagonal, so it is
/// evaluated on the state ψ_i(x) produces.
inline OperatorMatrix deformed_operator(const FockSpace& space, const ThetaMatrix& theta, int flavor, int site,
                                        StringConvention c = StringConvention::exclusive) {
  check_mode(space.L(), flavor, site);
  const int m = mode_index(flavor, site);
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::size_t i = 0; i < space.size(); ++i) {
    auto act = annihilate(space.state(i), m);
    if (!act) continue;
    const double angle = string_angle(act->state, theta, flavor, site, c);
    trips.emplace_back(static_cast<Eigen::Index>(act->state), static_cast<Eigen::Index>(i),
                       static_cast<double>(act->sign) * std::exp(-I_UNIT * angle));
  }
  SparseMat mat(space.dimension(), space.dimension());
  mat.setFromTriplets(trips.begin(), trips.end());
  return OperatorMatrix(std::move(mat));
}

/// All Φ_i(x), indexed [site][flavor-1].
inline std::vector<std::array<OperatorMatrix, NUM_FLAVORS>> deformed_operators(
    const FockSpace& space, const ThetaMatrix& theta, StringConvention c = StringConvention::exclusive) {
  std::vector<std::array<OperatorMatrix, NUM_FLAVORS>> out(static_cast<std::size_t>(space.L()));
  for (int x = 0; x < space.L(); ++x)
    for (int f = 1; f <= NUM_FLAVORS; ++f) out[x][f - 1] = deformed_operator(space, theta, f, x, c);
  return out;
}

/// Residuals of the twisted exchange relations
///   Φ_i(x)Φ_j(y) + e^{iθ_ij} Φ_j(y)Φ_i(x),
///   Φ_i†(x)Φ_j†(y) + e^{iθ_ij} Φ_j†(y)Φ_i†(x),
///   Φ_i(x)Φ_j†(y) + e^{-iθ_ij} Φ_j†(y)Φ_i(x) - δ_ij δ_xy.
/// Breakdown entries: the three relations over x != y (all flavor pairs) and
/// over x == y (i != j only). `max_violation` covers x != y only; the
/// coincident-point values depend on the string convention and are reported
/// separately in the breakdown.
struct ZfReport {
  ViolationReport separated{"exchange x!=y"};
  ViolationReport coincident{"exchange x==y, i!=j"};
};

inline ZfReport check_zf(const FockSpace& space, const ThetaMatrix& theta,
                         StringConvention c = StringConvention::exclusive) {
  const auto phi = deformed_operators(space, theta, c);
  std::vector<std::array<OperatorMatrix, NUM_FLAVORS>> phid(phi.size());
  for (std::size_t x = 0; x < phi.size(); ++x)
    for (int f = 0; f < NUM_FLAVORS; ++f) phid[x][f] = phi[x][f].adjoint();
  const OperatorMatrix id = OperatorMatrix::identity(space.dimension());

  double sep[3] = {0, 0, 0};
  double coin[3] = {0, 0, 0};
  const int L = space.L();
  for (int x = 0; x < L; ++x)
    for (int y = 0; y < L; ++y)
      for (int i = 1; i <= NUM_FLAVORS; ++i)
        for (int j = 1; j <= NUM_FLAVORS; ++j) {
          if (x == y && i == j) continue;
          const cplx q = std::exp(I_UNIT * theta(i, j));
          const auto& a = phi[x][i - 1];
          const auto& b = phi[y][j - 1];
          const auto& ad = phid[x][i - 1];
          const auto& bd = phid[y][j - 1];
          const double r7 = (a * b + q * (b * a)).max_norm();
          const double r8 = (ad * bd + q * (bd * ad)).max_norm();
          const double r9 = (a * bd + std::conj(q) * (bd * a)).max_norm();
          double* slot = x == y ? coin : sep;
          slot[0] = std::max(slot[0], r7);
          slot[1] = std::max(slot[1], r8);
          slot[2] = std::max(slot[2], r9);
        }
  // i == j, x == y: plain canonical relations
  double diag_car = 0.0;
  for (int x = 0; x < L; ++x)
    for (int i = 0; i < NUM_FLAVORS; ++i) {
      diag_car = std::max(diag_car, (phi[x][i] * phi[x][i]).max_norm());
      diag_car = std::max(diag_car, (anticommutator(phi[x][i], phid[x][i]) - id).max_norm());
    }
  ZfReport r;
  r.separated.record("PhiPhi", sep[0]);
  r.separated.record("PhidPhid", sep[1]);
  r.separated.record("PhiPhid", sep[2]);
  r.separated.record("same mode", diag_car);
  r.coincident.record("PhiPhi", coin[0]);
  r.coincident.record("PhidPhid", coin[1]);
  r.coincident.record("PhiPhid", coin[2]);
  return r;
}

/// Applies the exchange rule twice, Φ_iΦ_j -> -e^{iθ_ij}Φ_jΦ_i -> e^{iθ_ij}e^{iθ_ji}Φ_iΦ_j,
/// and returns the largest max-norm gap between the result and the starting product
/// over all flavor pairs i != j and sites x != y. Zero iff θ_ij + θ_ji ≡ 0 (mod 2π).
inline double double_exchange_residual(const FockSpace& space, const ThetaMatrix& theta,
                                       StringConvention c = StringConvention::exclusive) {
  const auto phi = deformed_operators(space, theta, c);
  double worst = 0.0;
  for (int x = 0; x < space.L(); ++x)
    for (int y = 0; y < space.L(); ++y) {
      if (x == y) continue;
      for (int i = 1; i <= NUM_FLAVORS; ++i)
        for (int j = 1; j <= NUM_FLAVORS; ++j) {
          if (i == j) continue;
          const OperatorMatrix prod = phi[x][i - 1] * phi[y][j - 1];
          const cplx back = std::exp(I_UNIT * (theta(i, j) + theta(j, i)));
          worst = std::max(worst, (prod - back * prod).max_norm());
        }
    }
  return worst;
}

}  // namespace so5lab
