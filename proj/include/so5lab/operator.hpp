#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "so5lab/errors.hpp"

namespace so5lab {

using cplx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<cplx>;
using DenseMat = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr cplx I_UNIT{0.0, 1.0};
inline constexpr int NUM_FLAVORS = 4;

/// Flavor occupation numbers (n_1, n_2, n_3, n_4).
struct Occupation {
  std::array<int, NUM_FLAVORS> n{};

  [[nodiscard]] int total() const { return n[0] + n[1] + n[2] + n[3]; }
  int operator[](int flavor_zero_based) const { return n[static_cast<std::size_t>(flavor_zero_based)]; }
  friend auto operator<=>(const Occupation&, const Occupation&) = default;

  [[nodiscard]] std::string to_string() const {
    return "(" + std::to_string(n[0]) + "," + std::to_string(n[1]) + "," + std::to_string(n[2]) + "," +
           std::to_string(n[3]) + ")";
  }
};

/// A complex operator on a Fock space or on one fixed-occupation sector.
///
/// Storage is always sparse; the many-body operators built here have O(1)
/// nonzeros per column, so even the 4096-dimensional L=3 space stays cheap.
/// `sector` is set when rows and columns both index the same sector basis.
class OperatorMatrix {
 public:
  OperatorMatrix() = default;
  explicit OperatorMatrix(SparseMat m, std::optional<Occupation> sector = std::nullopt)
      : mat_(std::move(m)), sector_(sector) {
    mat_.makeCompressed();
  }

  static OperatorMatrix zero(Eigen::Index dim, std::optional<Occupation> sector = std::nullopt) {
    return OperatorMatrix(SparseMat(dim, dim), sector);
  }
  static OperatorMatrix identity(Eigen::Index dim, std::optional<Occupation> sector = std::nullopt) {
    SparseMat m(dim, dim);
    m.setIdentity();
    return OperatorMatrix(std::move(m), sector);
  }
  static OperatorMatrix diagonal(const Eigen::VectorXcd& d, std::optional<Occupation> sector = std::nullopt) {
    SparseMat m(d.size(), d.size());
    m.reserve(Eigen::VectorXi::Constant(d.size(), 1));
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (d[i] != cplx{}) m.insert(i, i) = d[i];
    }
    return OperatorMatrix(std::move(m), sector);
  }

  [[nodiscard]] Eigen::Index rows() const { return mat_.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return mat_.cols(); }
  [[nodiscard]] Eigen::Index dimension() const { return mat_.rows(); }
  [[nodiscard]] const SparseMat& sparse() const { return mat_; }
  [[nodiscard]] const std::optional<Occupation>& sector() const { return sector_; }
  [[nodiscard]] DenseMat dense() const { return DenseMat(mat_); }

  [[nodiscard]] cplx coeff(Eigen::Index r, Eigen::Index c) const { return mat_.coeff(r, c); }

  [[nodiscard]] OperatorMatrix adjoint() const { return OperatorMatrix(SparseMat(mat_.adjoint()), sector_); }

  /// Largest entry modulus; zero for an empty matrix.
  [[nodiscard]] double max_norm() const {
    double m = 0.0;
    for (Eigen::Index k = 0; k < mat_.outerSize(); ++k) {
      for (SparseMat::InnerIterator it(mat_, k); it; ++it) m = std::max(m, std::abs(it.value()));
    }
    return m;
  }
  [[nodiscard]] double frobenius_norm() const { return mat_.norm(); }
  [[nodiscard]] cplx trace() const {
    cplx t{};
    for (Eigen::Index k = 0; k < mat_.outerSize(); ++k) t += mat_.coeff(k, k);
    return t;
  }

  OperatorMatrix& operator+=(const OperatorMatrix& o) {
    check_same_shape(o);
    mat_ += o.mat_;
    return *this;
  }
  OperatorMatrix& operator-=(const OperatorMatrix& o) {
    check_same_shape(o);
    mat_ -= o.mat_;
    return *this;
  }
  OperatorMatrix& operator*=(cplx s) {
    mat_ *= s;
    return *this;
  }

  friend OperatorMatrix operator+(OperatorMatrix a, const OperatorMatrix& b) { return a += b; }
  friend OperatorMatrix operator-(OperatorMatrix a, const OperatorMatrix& b) { return a -= b; }
  friend OperatorMatrix operator-(OperatorMatrix a) { return a *= -1.0; }
  friend OperatorMatrix operator*(cplx s, OperatorMatrix a) { return a *= s; }
  friend OperatorMatrix operator*(OperatorMatrix a, cplx s) { return a *= s; }
  friend OperatorMatrix operator*(double s, OperatorMatrix a) { return a *= cplx{s}; }
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("operator product: inner dimensions differ");
    SparseMat p = (a.mat_ * b.mat_).pruned(0.0);
    return OperatorMatrix(std::move(p), a.sector_ == b.sector_ ? a.sector_ : std::nullopt);
  }

 private:
  void check_same_shape(const OperatorMatrix& o) const {
    if (rows() != o.rows() || cols() != o.cols()) throw DimensionMismatch("operator sum: shapes differ");
  }

  SparseMat mat_;
  std::optional<Occupation> sector_;
};

// Uniform helpers so that algebra checkers work on small dense matrices and
// many-body sparse operators alike.

inline double max_norm(const OperatorMatrix& m) { return m.max_norm(); }
template <class Derived>
double max_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}
inline double frobenius_norm(const OperatorMatrix& m) { return m.frobenius_norm(); }
template <class Derived>
double frobenius_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.norm();
}
inline Eigen::Index dimension_of(const OperatorMatrix& m) { return m.rows(); }
template <class Derived>
Eigen::Index dimension_of(const Eigen::MatrixBase<Derived>& m) {
  return m.rows();
}

/// Matrix types usable by the generic algebra checkers.
template <class M>
concept AlgebraMatrix = requires(const M& a, const M& b, cplx s) {
  { a* b } -> std::convertible_to<M>;
  { a + b } -> std::convertible_to<M>;
  { a - b } -> std::convertible_to<M>;
  { s* a } -> std::convertible_to<M>;
  { max_norm(a) } -> std::convertible_to<double>;
  { dimension_of(a) } -> std::convertible_to<Eigen::Index>;
};

template <class M>
M commutator(const M& a, const M& b) {
  return M(a * b - b * a);
}

template <class M>
M anticommutator(const M& a, const M& b) {
  return M(a * b + b * a);
}

template <class M>
M zero_like(const M& m) {
  if constexpr (std::same_as<M, OperatorMatrix>) {
    return OperatorMatrix::zero(m.rows(), m.sector());
  } else {
    return M::Zero(m.rows(), m.cols());
  }
}

/// Rows of `op` restricted to `rows` and columns restricted to `cols` (basis indices).
inline OperatorMatrix restrict_to(const OperatorMatrix& op, const std::vector<std::size_t>& rows,
                                  const std::vector<std::size_t>& cols,
                                  std::optional<Occupation> tag = std::nullopt) {
  std::vector<Eigen::Index> row_map(static_cast<std::size_t>(op.rows()), -1);
  for (std::size_t r = 0; r < rows.size(); ++r) row_map[rows[r]] = static_cast<Eigen::Index>(r);
  std::vector<Eigen::Triplet<cplx>> trips;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (SparseMat::InnerIterator it(op.sparse(), static_cast<Eigen::Index>(cols[c])); it; ++it) {
      const Eigen::Index r = row_map[static_cast<std::size_t>(it.row())];
      if (r >= 0) trips.emplace_back(r, static_cast<Eigen::Index>(c), it.value());
    }
  }
  SparseMat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  m.setFromTriplets(trips.begin(), trips.end());
  return OperatorMatrix(std::move(m), tag);
}

/// Largest modulus of entries mapping `cols` outside `rows` (leakage out of a subspace).
inline double leakage(const OperatorMatrix& op, const std::vector<std::size_t>& subspace) {
  std::vector<char> inside(static_cast<std::size_t>(op.rows()), 0);
  for (auto s : subspace) inside[s] = 1;
  double m = 0.0;
  for (auto c : subspace) {
    for (SparseMat::InnerIterator it(op.sparse(), static_cast<Eigen::Index>(c)); it; ++it) {
      if (!inside[static_cast<std::size_t>(it.row())]) m = std::max(m, std::abs(it.value()));
    }
  }
  return m;
}

}  // namespace so5lab
