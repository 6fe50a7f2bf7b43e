#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "so5lab/bethe.hpp"
#include "so5lab/clifford.hpp"
#include "so5lab/parallel.hpp"
#include "so5lab/stringmap.hpp"

namespace so5lab {

/// Annihilators indexed [site][flavor-1].
using FieldOps = std::vector<std::array<OperatorMatrix, NUM_FLAVORS>>;

inline FieldOps bare_fields(const FockSpace& space) {
  FieldOps out(static_cast<std::size_t>(space.L()));
  for (int x = 0; x < space.L(); ++x)
    for (int f = 1; f <= NUM_FLAVORS; ++f) out[x][f - 1] = mode_operator(space, f, x, ModeKind::annihilate);
  return out;
}

/// {x1, x2, x3}: the sum of all six ordered products.
template <AlgebraMatrix M>
M symmetric_triple(const M& x1, const M& x2, const M& x3) {
  if (dimension_of(x1) != dimension_of(x2) || dimension_of(x2) != dimension_of(x3))
    throw DimensionMismatch("symmetric triple: operands differ in dimension");
  return M(x1 * x2 * x3 + x1 * x3 * x2 + x2 * x1 * x3 + x2 * x3 * x1 + x3 * x1 * x2 + x3 * x2 * x1);
}

/// Level-0 and level-1 generators of the current realization.
///
/// `level1` is T + U·J0; T and J0 are kept so that fixtures can recombine them.
struct YangianGenerators {
  PairTable<OperatorMatrix> level0;
  PairTable<OperatorMatrix> level1;
  PairTable<OperatorMatrix> T;
  PairTable<OperatorMatrix> J0;
  std::vector<PairTable<OperatorMatrix>> local;  // I_ab(x)
  cplx U{};
  double h = 0.0;

  [[nodiscard]] OperatorMatrix I(int a, int b) const { return level0.at(a, b); }
  [[nodiscard]] OperatorMatrix J(int a, int b) const { return level1.at(a, b); }
};

namespace detail {

// Σ_ij M_ij a_i†(x) a_j(y) from precomputed hop bilinears hop[i][j] = a_i†(x) a_j(y).
inline OperatorMatrix contract(const std::array<std::array<OperatorMatrix, NUM_FLAVORS>, NUM_FLAVORS>& hop,
                               const Mat4& M) {
  OperatorMatrix out = OperatorMatrix::zero(hop[0][0].dimension());
  for (int i = 0; i < NUM_FLAVORS; ++i)
    for (int j = 0; j < NUM_FLAVORS; ++j)
      if (M(i, j) != cplx{}) out += M(i, j) * hop[i][j];
  return out;
}

inline std::array<std::array<OperatorMatrix, NUM_FLAVORS>, NUM_FLAVORS> hop_bilinears(const FieldOps& ann,
                                                                                         const FieldOps& cre, int x,
                                                                                         int y) {
  std::array<std::array<OperatorMatrix, NUM_FLAVORS>, NUM_FLAVORS> out;
  for (int i = 0; i < NUM_FLAVORS; ++i)
    for (int j = 0; j < NUM_FLAVORS; ++j) out[i][j] = cre[x][i] * ann[y][j];
  return out;
}

}  // namespace detail

/// J = t_weight·T + U·J0 from the stored pieces.
inline YangianGenerators recombine(YangianGenerators gen, double t_weight, cplx U) {
  std::array<OperatorMatrix, NUM_PAIRS> j1;
  for (int k = 0; k < NUM_PAIRS; ++k) j1[k] = t_weight * gen.T.stored(k) + U * gen.J0.stored(k);
  gen.level1 = PairTable<OperatorMatrix>(j1);
  gen.U = U;
  return gen;
}

/// Builds I_ab(x) = -(1/2)Ψ†(x)Γ^{ab}Ψ(x), I_ab = Σ_x I_ab(x),
/// T_ab = Σ_x Ψ†(x)Γ^{ab}(Ψ(x+1) - Ψ(x-1))/2 (periodic),
/// J0_ab = Σ_{x,y} ε(x-y) Σ_c I_ac(x) I_cb(y) (open-chain labels) and
/// J_ab = T_ab + U J0_ab with U = sign·(i/2)h.
/// Ψ is ψ when `theta` is empty and Φ (with string convention `c`) otherwise.
inline YangianGenerators build_currents(const FockSpace& space, const std::optional<ThetaMatrix>& theta,
                                        const GammaRep& rep, double h, int sign,
                                        StringConvention c = StringConvention::exclusive) {
  if (sign != 1 && sign != -1) throw InvalidConfig("U sign must be +1 or -1");
  const int L = space.L();
  const FieldOps ann = theta ? deformed_operators(space, *theta, c) : bare_fields(space);
  FieldOps cre(ann.size());
  for (std::size_t x = 0; x < ann.size(); ++x)
    for (int f = 0; f < NUM_FLAVORS; ++f) cre[x][f] = ann[x][f].adjoint();

  YangianGenerators gen;
  gen.h = h;
  gen.U = static_cast<double>(sign) * 0.5 * h * I_UNIT;
  const OperatorMatrix zero = OperatorMatrix::zero(space.dimension());

  std::array<OperatorMatrix, NUM_PAIRS> total;
  std::array<OperatorMatrix, NUM_PAIRS> tangent;
  total.fill(zero);
  tangent.fill(zero);
  for (int x = 0; x < L; ++x) {
    const auto onsite = detail::hop_bilinears(ann, cre, x, x);
    const auto right = detail::hop_bilinears(ann, cre, x, wrap_site(x + 1, L));
    const auto left = detail::hop_bilinears(ann, cre, x, wrap_site(x - 1, L));
    std::array<OperatorMatrix, NUM_PAIRS> loc;
    for (int k = 0; k < NUM_PAIRS; ++k) {
      const Mat4& G = rep.generators.stored(k);
      loc[k] = -0.5 * detail::contract(onsite, G);
      total[k] += loc[k];
      tangent[k] += 0.5 * (detail::contract(right, G) - detail::contract(left, G));
    }
    gen.local.emplace_back(loc);
  }
  gen.level0 = PairTable<OperatorMatrix>(total);
  gen.T = PairTable<OperatorMatrix>(tangent);

  std::array<OperatorMatrix, NUM_PAIRS> bilocal;
  for (int k = 0; k < NUM_PAIRS; ++k) {
    auto [a, b] = pair_of(k);
    OperatorMatrix acc = zero;
    for (int x = 0; x < L; ++x)
      for (int y = 0; y < L; ++y) {
        if (x == y) continue;
        for (int cc = 1; cc <= SO5_DIM; ++cc) {
          if (cc == a || cc == b) continue;
          acc += static_cast<double>(eps(x - y)) * (gen.local[x].at(a, cc) * gen.local[y].at(cc, b));
        }
      }
    bilocal[k] = acc;
  }
  gen.J0 = PairTable<OperatorMatrix>(bilocal);
  const cplx U = gen.U;
  return recombine(std::move(gen), 1.0, U);
}

/// Residual of [I_ab, X_cd] = i(δ_bc X_ad + δ_ad X_bc - δ_ac X_bd - δ_bd X_ac) over all
/// 100 pair combinations (max-norm).
inline ViolationReport check_covariance(const PairTable<OperatorMatrix>& level0, const PairTable<OperatorMatrix>& x,
                                        std::string name, bool parallel = false) {
  std::array<double, NUM_PAIRS * NUM_PAIRS> vals{};
  for_each_index(
      vals.size(),
      [&](std::size_t idx) {
        const int l = static_cast<int>(idx) / NUM_PAIRS;
        const int m = static_cast<int>(idx) % NUM_PAIRS;
        auto [a, b] = pair_of(l);
        auto [c, d] = pair_of(m);
        OperatorMatrix resid = commutator(level0.stored(l), x.stored(m));
        if (b == c) resid -= I_UNIT * x.at(a, d);
        if (a == d) resid -= I_UNIT * x.at(b, c);
        if (a == c) resid += I_UNIT * x.at(b, d);
        if (b == d) resid += I_UNIT * x.at(a, c);
        vals[idx] = resid.max_norm();
      },
      parallel);
  ViolationReport r{std::move(name)};
  for (std::size_t idx = 0; idx < vals.size(); ++idx) {
    auto [a, b] = pair_of(static_cast<int>(idx) / NUM_PAIRS);
    auto [c, d] = pair_of(static_cast<int>(idx) % NUM_PAIRS);
    r.record("[I" + pair_label(a, b) + ",J" + pair_label(c, d) + "]", vals[idx]);
  }
  return r;
}

inline ViolationReport check_adjoint_relation(const YangianGenerators& gen, bool parallel = false) {
  return check_covariance(gen.level0, gen.level1, "adjoint-covariance", parallel);
}

/// Covariance of the two level-1 pieces separately.
struct AdjointDecomposition {
  double tangent = 0.0;
  double bilocal = 0.0;
};

inline AdjointDecomposition adjoint_decomposition(const YangianGenerators& gen, bool parallel = false) {
  return {check_covariance(gen.level0, gen.T, "tangent", parallel).max_violation,
          check_covariance(gen.level0, gen.J0, "bilocal", parallel).max_violation};
}

/// Right side of the single independent cubic relation for the Cartan pair J23, J15.
inline OperatorMatrix serre_right_side(const PairTable<OperatorMatrix>& I, double h) {
  const OperatorMatrix s = symmetric_triple(I.at(1, 3), I.at(4, 2), I.at(4, 5)) +
                           symmetric_triple(I.at(1, 2), I.at(4, 5), I.at(3, 4)) -
                           symmetric_triple(I.at(1, 4), I.at(4, 2), I.at(3, 5)) -
                           symmetric_triple(I.at(1, 4), I.at(3, 4), I.at(2, 5));
  return (I_UNIT * h * h / 24.0) * s;
}

/// [J23, J15] against the cubic right side, Frobenius norms.
///
/// max_violation is |lhs - rhs| / |rhs|, or the raw |lhs| when the right side
/// vanishes. The breakdown also carries the split of the left side into
/// [T,T], the T-J0 cross terms and U²[J0,J0] - rhs; these entries do not enter
/// max_violation.
inline ViolationReport check_serre_relation(const YangianGenerators& gen) {
  const OperatorMatrix lhs = commutator(gen.J(2, 3), gen.J(1, 5));
  const OperatorMatrix rhs = serre_right_side(gen.level0, gen.h);
  const double rn = rhs.frobenius_norm();
  const double diff = (lhs - rhs).frobenius_norm();
  ViolationReport r{"serre"};
  r.max_violation = rn > 0.0 ? diff / rn : diff;
  r.breakdown.emplace_back("relative", rn > 0.0 ? diff / rn : diff);
  r.breakdown.emplace_back("absolute", diff);
  r.breakdown.emplace_back("lhs-norm", lhs.frobenius_norm());
  r.breakdown.emplace_back("rhs-norm", rn);
  const OperatorMatrix t23 = gen.T.at(2, 3), t15 = gen.T.at(1, 5);
  const OperatorMatrix b23 = gen.J0.at(2, 3), b15 = gen.J0.at(1, 5);
  r.breakdown.emplace_back("tangent-tangent", commutator(t23, t15).frobenius_norm());
  r.breakdown.emplace_back("cross", (gen.U * (commutator(t23, b15) + commutator(b23, t15))).frobenius_norm());
  r.breakdown.emplace_back("bilocal-minus-rhs", (gen.U * gen.U * commutator(b23, b15) - rhs).frobenius_norm());
  return r;
}

/// Level-0 generators rescaled by `s`, level-1 untouched. Negative-control fixture.
inline YangianGenerators scale_level0(YangianGenerators gen, double s) {
  for (int k = 0; k < NUM_PAIRS; ++k) gen.level0.stored(k) = s * gen.level0.stored(k);
  return gen;
}

// ---------------------------------------------------------------------------
// Generic Drinfeld relations in the pair basis, with c = i f.

/// Operators block-diagonal in the total particle number, stored as dense blocks.
class NumberBlocks {
 public:
  explicit NumberBlocks(const FockSpace& space) {
    parts_.resize(static_cast<std::size_t>(space.num_modes() + 1));
    for (std::size_t i = 0; i < space.size(); ++i)
      parts_[static_cast<std::size_t>(std::popcount(space.state(i)))].push_back(i);
  }

  using Op = std::vector<DenseMat>;

  [[nodiscard]] Op split(const OperatorMatrix& m) const {
    Op out;
    for (const auto& p : parts_) {
      if (leakage(m, p) != 0.0) throw DimensionMismatch("operator does not conserve the total particle number");
      out.push_back(restrict_to(m, p, p).dense());
    }
    return out;
  }

  static Op mul(const Op& a, const Op& b) {
    Op out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
    return out;
  }
  static Op comm(const Op& a, const Op& b) {
    Op out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k] - b[k] * a[k];
    return out;
  }
  static void axpy(Op& y, cplx s, const Op& x) {
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += s * x[k];
  }
  static Op zero_like(const Op& a) {
    Op out(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = DenseMat::Zero(a[k].rows(), a[k].cols());
    return out;
  }
  static double norm(const Op& a) {
    double s = 0.0;
    for (const auto& b : a) s += b.squaredNorm();
    return std::sqrt(s);
  }
  static Op sub(Op a, const Op& b) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] -= b[k];
    return a;
  }
  static Op add(Op a, const Op& b) {
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
    return a;
  }

 private:
  std::vector<std::vector<std::size_t>> parts_;
};

/// a_{λμναβγ} = (1/4!) c_λασ c_μβτ c_νγρ c_στρ. With c = i f the product of four
/// c's is real, so the tensor is stored as doubles, index ((((λ·10+μ)·10+ν)·10+α)·10+β)·10+γ.
inline std::vector<double> drinfeld_a_tensor(const StructureConstants& sc) {
  constexpr int N = NUM_PAIRS;
  std::vector<double> a(static_cast<std::size_t>(N * N * N * N * N * N), 0.0);
  // K[μ][β][ν][γ][σ] = Σ_τρ f_μβτ f_νγρ f_στρ
  std::vector<double> K(static_cast<std::size_t>(N * N * N * N * N), 0.0);
  for (int mu = 0; mu < N; ++mu)
    for (int be = 0; be < N; ++be)
      for (int tau = 0; tau < N; ++tau) {
        const int f1 = sc.integer(mu, be, tau);
        if (f1 == 0) continue;
        for (int nu = 0; nu < N; ++nu)
          for (int ga = 0; ga < N; ++ga)
            for (int rho = 0; rho < N; ++rho) {
              const int f2 = sc.integer(nu, ga, rho);
              if (f2 == 0) continue;
              for (int si = 0; si < N; ++si) {
                const int f3 = sc.integer(si, tau, rho);
                if (f3 != 0) K[static_cast<std::size_t>((((mu * N + be) * N + nu) * N + ga) * N + si)] += f1 * f2 * f3;
              }
            }
      }
  for (int la = 0; la < N; ++la)
    for (int al = 0; al < N; ++al)
      for (int si = 0; si < N; ++si) {
        const int f0 = sc.integer(la, al, si);
        if (f0 == 0) continue;
        for (int mu = 0; mu < N; ++mu)
          for (int nu = 0; nu < N; ++nu)
            for (int be = 0; be < N; ++be)
              for (int ga = 0; ga < N; ++ga) {
                const double k = K[static_cast<std::size_t>((((mu * N + be) * N + nu) * N + ga) * N + si)];
                if (k != 0.0)
                  a[static_cast<std::size_t>(((((la * N + mu) * N + nu) * N + al) * N + be) * N + ga)] +=
                      f0 * k / 24.0;
              }
      }
  return a;
}

enum class DrinfeldMode { sample, exhaustive };

struct DrinfeldReport {
  ViolationReport cubic{"drinfeld-cubic"};
  ViolationReport quartic{"drinfeld-quartic"};
  /// Quartic relation with {I_α,I_β,I_γ} in place of {I_α,I_β,J_γ}; kept as a diagnostic.
  ViolationReport quartic_all_level0{"drinfeld-quartic-all-level0"};
  std::size_t cubic_checked = 0;
  std::size_t quartic_checked = 0;
};

/// Checks
///   [J_λ,[J_μ,I_ν]] - [I_λ,[J_μ,J_ν]] = h² a_{λμναβγ}{I_α,I_β,I_γ}
///   [[J_λ,J_μ],[I_σ,J_τ]] + [[J_σ,J_τ],[I_λ,J_μ]]
///       = h² (a_{λμναβγ}c_στν + a_{στναβγ}c_λμν){I_α,I_β,J_γ}
/// in the pair basis. The quartic right side carries one level-1 generator; with
/// {I_α,I_β,I_γ} instead the two sides are orthogonal, which is reported in
/// `quartic_all_level0`. Violations are Frobenius norms relative to max(|rhs|, 1).
/// `exhaustive` visits all 10³ and 10⁴ index tuples; `sample` draws `samples`
/// of each from `seed`. Operators are handled as dense blocks of fixed total
/// particle number, so this is practical at L = 2 only.
inline DrinfeldReport check_drinfeld_relations(const YangianGenerators& gen, const FockSpace& space,
                                               DrinfeldMode mode, std::size_t samples = 20,
                                               std::uint64_t seed = 0, bool parallel = false) {
  using B = NumberBlocks;
  constexpr int N = NUM_PAIRS;
  const B blocks(space);
  const auto sc = so5_structure_constants();
  const auto a = drinfeld_a_tensor(sc);
  const double h2 = gen.h * gen.h;

  std::vector<B::Op> I(N), J(N);
  for (int k = 0; k < N; ++k) {
    I[k] = blocks.split(gen.level0.stored(k));
    J[k] = blocks.split(gen.level1.stored(k));
  }
  // symmetric triples on multisets α <= β <= γ
  std::vector<std::array<int, 3>> multisets;
  for (int x = 0; x < N; ++x)
    for (int y = x; y < N; ++y)
      for (int z = y; z < N; ++z) multisets.push_back({x, y, z});
  std::vector<B::Op> sym(multisets.size());
  for_each_index(
      multisets.size(),
      [&](std::size_t m) {
        const auto& [x, y, z] = multisets[m];
        const std::array<const B::Op*, 3> ops{&I[x], &I[y], &I[z]};
        B::Op acc = B::zero_like(I[0]);
        std::array<int, 3> perm{0, 1, 2};
        do {
          B::axpy(acc, 1.0, B::mul(B::mul(*ops[perm[0]], *ops[perm[1]]), *ops[perm[2]]));
        } while (std::next_permutation(perm.begin(), perm.end()));
        sym[m] = std::move(acc);
      },
      parallel);

  // {I_α,I_β,J_γ} for α <= β
  std::vector<std::array<int, 3>> mixed;
  for (int x = 0; x < N; ++x)
    for (int y = x; y < N; ++y)
      for (int z = 0; z < N; ++z) mixed.push_back({x, y, z});
  std::vector<B::Op> sym_mixed(mixed.size());
  for_each_index(
      mixed.size(),
      [&](std::size_t m) {
        const auto& [x, y, z] = mixed[m];
        const std::array<const B::Op*, 3> ops{&I[x], &I[y], &J[z]};
        B::Op acc = B::zero_like(I[0]);
        std::array<int, 3> perm{0, 1, 2};
        do {
          B::axpy(acc, 1.0, B::mul(B::mul(*ops[perm[0]], *ops[perm[1]]), *ops[perm[2]]));
        } while (std::next_permutation(perm.begin(), perm.end()));
        sym_mixed[m] = std::move(acc);
      },
      parallel);

  auto a_at = [&](int la, int mu, int nu, int al, int be, int ga) {
    return a[static_cast<std::size_t>(((((la * N + mu) * N + nu) * N + al) * N + be) * N + ga)];
  };
  // Σ_{αβγ} coef(α,β,γ) {I_α,I_β,I_γ}, grouping the orderings of each multiset.
  auto contract = [&](auto&& coef) {
    B::Op acc = B::zero_like(I[0]);
    for (std::size_t m = 0; m < multisets.size(); ++m) {
      auto idx = multisets[m];
      cplx w{};
      do {
        w += coef(idx[0], idx[1], idx[2]);
      } while (std::next_permutation(idx.begin(), idx.end()));
      if (std::abs(w) > 0.0) B::axpy(acc, w, sym[m]);
    }
    return acc;
  };
  auto contract_mixed = [&](auto&& coef) {
    B::Op acc = B::zero_like(I[0]);
    for (std::size_t m = 0; m < mixed.size(); ++m) {
      const auto [x, y, z] = mixed[m];
      cplx w = coef(x, y, z);
      if (x != y) w += coef(y, x, z);
      if (std::abs(w) > 0.0) B::axpy(acc, w, sym_mixed[m]);
    }
    return acc;
  };

  std::vector<std::array<int, 3>> triples;
  std::vector<std::array<int, 4>> quads;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, N - 1);
  if (mode == DrinfeldMode::exhaustive) {
    for (int x = 0; x < N; ++x)
      for (int y = 0; y < N; ++y)
        for (int z = 0; z < N; ++z) triples.push_back({x, y, z});
    for (int x = 0; x < N; ++x)
      for (int y = 0; y < N; ++y)
        for (int z = 0; z < N; ++z)
          for (int w = 0; w < N; ++w) quads.push_back({x, y, z, w});
  } else {
    for (std::size_t s = 0; s < samples; ++s) triples.push_back({pick(rng), pick(rng), pick(rng)});
    for (std::size_t s = 0; s < samples; ++s) quads.push_back({pick(rng), pick(rng), pick(rng), pick(rng)});
  }

  std::vector<B::Op> JI(N * N), JJ(N * N), IJ(N * N);
  for_each_index(
      static_cast<std::size_t>(N * N),
      [&](std::size_t k) {
        const int x = static_cast<int>(k) / N, y = static_cast<int>(k) % N;
        JI[k] = B::comm(J[x], I[y]);
        JJ[k] = B::comm(J[x], J[y]);
        IJ[k] = B::comm(I[x], J[y]);
      },
      parallel);

  std::vector<double> cubic(triples.size());
  for_each_index(
      triples.size(),
      [&](std::size_t t) {
        const auto [la, mu, nu] = triples[t];
        const B::Op lhs = B::sub(B::comm(J[la], JI[mu * N + nu]), B::comm(I[la], JJ[mu * N + nu]));
        const B::Op rhs = contract([&](int al, int be, int ga) { return cplx{h2 * a_at(la, mu, nu, al, be, ga)}; });
        cubic[t] = B::norm(B::sub(lhs, rhs)) / std::max(B::norm(rhs), 1.0);
      },
      parallel);

  std::vector<double> quartic(quads.size());
  std::vector<double> quartic_level0(quads.size());
  for_each_index(
      quads.size(),
      [&](std::size_t q) {
        const auto [la, mu, si, ta] = quads[q];
        const B::Op lhs =
            B::add(B::comm(JJ[la * N + mu], IJ[si * N + ta]), B::comm(JJ[si * N + ta], IJ[la * N + mu]));
        auto coef = [&](int al, int be, int ga) {
          cplx w{};
          for (int nu = 0; nu < N; ++nu)
            w += a_at(la, mu, nu, al, be, ga) * sc.c(si, ta, nu) + a_at(si, ta, nu, al, be, ga) * sc.c(la, mu, nu);
          return h2 * w;
        };
        const B::Op rhs = contract_mixed(coef);
        quartic[q] = B::norm(B::sub(lhs, rhs)) / std::max(B::norm(rhs), 1.0);
        const B::Op rhs0 = contract(coef);
        quartic_level0[q] = B::norm(B::sub(lhs, rhs0)) / std::max(B::norm(rhs0), 1.0);
      },
      parallel);

  DrinfeldReport r;
  r.cubic_checked = triples.size();
  r.quartic_checked = quads.size();
  const bool detail = mode == DrinfeldMode::sample;
  for (std::size_t t = 0; t < triples.size(); ++t) {
    if (detail) {
      const auto [x, y, z] = triples[t];
      r.cubic.record(std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(z), cubic[t]);
    } else {
      r.cubic.absorb(cubic[t]);
    }
  }
  for (std::size_t q = 0; q < quads.size(); ++q) {
    if (detail) {
      const auto [x, y, z, w] = quads[q];
      const std::string label =
          std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(z) + "," + std::to_string(w);
      r.quartic.record(label, quartic[q]);
      r.quartic_all_level0.record(label, quartic_level0[q]);
    } else {
      r.quartic.absorb(quartic[q]);
      r.quartic_all_level0.absorb(quartic_level0[q]);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Gauge scan

struct GaugeScanRow {
  ThetaMatrix theta;
  bool admissible = false;
  double admissibility_deviation = 0.0;
  double closure = 0.0;
  double adjoint = 0.0;
  double serre = 0.0;
  /// Largest |violation - baseline| over the three checks.
  double excess = 0.0;
};

struct GaugeScan {
  GaugeScanRow baseline;
  std::vector<GaugeScanRow> rows;
};

inline GaugeScanRow gauge_scan_row(const FockSpace& space, const GammaRep& rep, double h, const ThetaMatrix& theta,
                                   int sign) {
  const auto gen = build_currents(space, theta, rep, h, sign);
  const auto adm = admissibility_check(theta);
  GaugeScanRow row;
  row.theta = theta;
  row.admissible = adm.pass;
  row.admissibility_deviation = adm.max_deviation;
  row.closure = check_so5_closure(gen.level0).max_violation;
  row.adjoint = check_adjoint_relation(gen).max_violation;
  row.serre = check_serre_relation(gen).max_violation;
  return row;
}

/// Builds the deformed currents for every sample and compares their closure,
/// covariance and cubic-relation violations with the θ = 0 baseline.
inline GaugeScan gauge_invariance_scan(const FockSpace& space, const GammaRep& rep, double h,
                                       const std::vector<ThetaMatrix>& samples, int sign = 1,
                                       bool parallel = false) {
  GaugeScan scan;
  scan.baseline = gauge_scan_row(space, rep, h, ThetaMatrix::zero(), sign);
  scan.rows.resize(samples.size());
  for_each_index(
      samples.size(), [&](std::size_t k) { scan.rows[k] = gauge_scan_row(space, rep, h, samples[k], sign); },
      parallel);
  for (auto& row : scan.rows) {
    row.excess = std::max({std::abs(row.closure - scan.baseline.closure), std::abs(row.adjoint - scan.baseline.adjoint),
                           std::abs(row.serre - scan.baseline.serre)});
  }
  return scan;
}

/// θ_ij = a_i - a_j with a_i uniform in (-π, π].
inline ThetaMatrix random_admissible_theta(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-PI, PI);
  std::array<double, NUM_FLAVORS> a{};
  for (auto& x : a) x = u(rng);
  return ThetaMatrix::from_differences(a);
}

/// Uniform random upper angles, redrawn until the admissibility deviation is at
/// least `min_deviation`.
inline ThetaMatrix random_inadmissible_theta(std::mt19937_64& rng, double min_deviation = 0.5) {
  std::uniform_real_distribution<double> u(-PI, PI);
  while (true) {
    std::array<double, 6> up{};
    for (auto& x : up) x = u(rng);
    auto t = ThetaMatrix::from_upper(up);
    if (admissibility_check(t).max_deviation >= min_deviation) return t;
  }
}

}  // namespace so5lab
