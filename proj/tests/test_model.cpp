#include <gtest/gtest.h>

#include <random>

#include "so5lab/model.hpp"

using namespace so5lab;

namespace {

CouplingConfig sample_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  CouplingConfig cfg;
  cfg.v = pos(rng);
  cfg.g = u(rng);
  for (auto& c : cfg.C) c = pos(rng);
  for (int i = 1; i <= 4; ++i)
    for (int j = i + 1; j <= 4; ++j) cfg.set_pair(i, j, u(rng));
  return cfg;
}

// H' assembled from the Φ matrices themselves, the literal operator product.
OperatorMatrix literal_free_hamiltonian(const FockSpace& fs, const ThetaMatrix& th, const CouplingConfig& cfg,
                                        StringConvention c) {
  const auto phi = deformed_operators(fs, th, c);
  OperatorMatrix H = OperatorMatrix::zero(fs.dimension());
  for (int x = 0; x < fs.L(); ++x)
    for (int i = 1; i <= 4; ++i)
      H += (I_UNIT * cfg.v * cfg.c(i)) * (phi[x][i - 1].adjoint() * lattice_derivative(phi, i, x));
  return H;
}

std::vector<OperatorMatrix> flavor_numbers(const FockSpace& fs) {
  std::vector<OperatorMatrix> n;
  for (int f = 1; f <= 4; ++f)
    n.push_back(diagonal_operator(fs, [&](Bits s) { return cplx{static_cast<double>(occupation_of(s, fs.L())[f - 1])}; }));
  return n;
}

}  // namespace

TEST(CouplingConfig, Validation) {
  CouplingConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.Cij[0][1] = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg.Cij[1][0] = 1.0;
  EXPECT_NO_THROW(cfg.validate());
  cfg.Cij[2][2] = 0.5;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg.Cij[2][2] = 0.0;
  cfg.v = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg.v = 1.0;
  ASSERT_TRUE(cfg.degenerate_pair().has_value());
  EXPECT_EQ(*cfg.degenerate_pair(), std::make_pair(1, 2));
}

TEST(InteractingHamiltonian, FreeSingleParticleDispersion) {
  for (int L : {3, 4, 5, 6}) {
    CouplingConfig cfg;
    cfg.v = 1.3;
    cfg.C = {1.0, 0.7, 1.9, 0.4};
    for (int f = 1; f <= 4; ++f) {
      Occupation occ;
      occ.n[static_cast<std::size_t>(f - 1)] = 1;
      const auto ev = spectrum(build_interacting_hamiltonian(SectorBasis(L, occ), cfg));
      std::vector<double> ref;
      for (int m = 0; m < L; ++m) ref.push_back(cfg.v * cfg.c(f) * std::sin(2 * PI * m / L));
      std::sort(ref.begin(), ref.end());
      ASSERT_EQ(ev.size(), ref.size());
      for (std::size_t k = 0; k < ev.size(); ++k) EXPECT_NEAR(ev[k], ref[k], 1e-12);
    }
  }
}

TEST(InteractingHamiltonian, ZeroCouplingsGiveZero) {
  CouplingConfig cfg;
  cfg.C = {0, 0, 0, 0};
  EXPECT_EQ(build_interacting_hamiltonian(build_space(2), cfg).max_norm(), 0.0);
}

TEST(InteractingHamiltonian, HermitianAndConservesFlavors) {
  std::mt19937_64 rng(8);
  const auto fs = build_space(3);
  const auto cfg = sample_config(rng);
  const auto H = build_interacting_hamiltonian(fs, cfg);
  EXPECT_EQ(hermiticity_defect(H), 0.0);
  for (const auto& n : flavor_numbers(fs)) EXPECT_EQ(commutator(n, H).max_norm(), 0.0);
}

TEST(InteractingHamiltonian, SectorRestrictionMatchesDirectSectorBuild) {
  std::mt19937_64 rng(9);
  const auto fs = build_space(3);
  const auto cfg = sample_config(rng);
  const auto H = build_interacting_hamiltonian(fs, cfg);
  for (const auto& occ : {Occupation{{1, 1, 0, 0}}, Occupation{{2, 0, 1, 1}}, Occupation{{1, 2, 3, 0}}}) {
    const auto& idx = fs.sector(occ);
    EXPECT_EQ(leakage(H, idx), 0.0);
    const auto direct = build_interacting_hamiltonian(SectorBasis(3, occ), cfg);
    EXPECT_LE((restrict_to(H, idx, idx, occ) - direct).max_norm(), 1e-15);
    EXPECT_EQ(direct.sector(), occ);
  }
}

TEST(FreeHamiltonian, ZeroThetaEqualsFreeInteracting) {
  std::mt19937_64 rng(10);
  const auto fs = build_space(3);
  auto cfg = sample_config(rng);
  const auto Hp = build_free_hamiltonian(fs, ThetaMatrix::zero(), cfg);
  cfg.g = 0.0;
  EXPECT_LE((Hp - build_interacting_hamiltonian(fs, cfg)).max_norm(), 1e-15);
}

TEST(FreeHamiltonian, FieldPeriodicEqualsLiteralPhiProduct) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-PI, PI);
  for (int L : {2, 3}) {
    const auto fs = build_space(L);
    const auto cfg = sample_config(rng);
    const auto th = ThetaMatrix::from_upper({u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)});
    for (auto conv : {StringConvention::exclusive, StringConvention::midpoint}) {
      const auto built = build_free_hamiltonian(fs, th, cfg, {conv, Boundary::field_periodic});
      EXPECT_LE((built - literal_free_hamiltonian(fs, th, cfg, conv)).max_norm(), 1e-14);
    }
  }
}

TEST(FreeHamiltonian, BoundaryVariantsDifferOnlyOnWrapBond) {
  std::mt19937_64 rng(13);
  const auto fs = build_space(3);
  const auto cfg = sample_config(rng);
  const auto th = ThetaMatrix::from_upper({0.7, -1.1, 0.3, 2.0, -0.4, 1.4});
  const auto a = build_free_hamiltonian(fs, th, cfg, {StringConvention::midpoint, Boundary::particle_periodic});
  const auto b = build_free_hamiltonian(fs, th, cfg, {StringConvention::midpoint, Boundary::field_periodic});
  const SparseMat d = (a - b).sparse();
  bool any = false;
  for (Eigen::Index k = 0; k < d.outerSize(); ++k)
    for (SparseMat::InnerIterator it(d, k); it; ++it) {
      if (std::abs(it.value()) < 1e-14) continue;
      any = true;
      // the hopping particle moves between site 0 and site L-1
      const Bits moved = static_cast<Bits>(it.row()) ^ static_cast<Bits>(it.col());
      EXPECT_NE(moved & Bits{0xF}, 0U);
      EXPECT_NE(moved & (Bits{0xF} << 8), 0U);
    }
  EXPECT_TRUE(any);
}

TEST(FreeHamiltonian, HermitianConservingUnitModulusHops) {
  std::mt19937_64 rng(14);
  const auto fs = build_space(3);
  CouplingConfig cfg = sample_config(rng);
  cfg.C = {0.9, 0.0, 0.0, 0.0};
  const auto th = ThetaMatrix::from_upper({1.0, 2.0, -0.5, 0.3, 0.2, 0.1});
  for (auto b : {Boundary::particle_periodic, Boundary::field_periodic}) {
    const auto H = build_free_hamiltonian(fs, th, cfg, {StringConvention::midpoint, b});
    EXPECT_LE(hermiticity_defect(H), 1e-15);
    for (const auto& n : flavor_numbers(fs)) EXPECT_LE(commutator(n, H).max_norm(), 1e-14);
    const SparseMat& m = H.sparse();
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
      for (SparseMat::InnerIterator it(m, k); it; ++it)
        if (it.row() != it.col()) {
          EXPECT_NEAR(std::abs(it.value()), cfg.v * 0.9 / 2, 1e-14);
        }
  }
}

TEST(FreeHamiltonian, OneParticleSpectrumIndependentOfTheta) {
  CouplingConfig cfg;
  cfg.C = {1.0, 1.5, 0.5, 2.0};
  const auto th = ThetaMatrix::from_upper({1.0, 2.0, -0.5, 0.3, 0.2, 0.1});
  for (int f = 1; f <= 4; ++f) {
    Occupation occ;
    occ.n[static_cast<std::size_t>(f - 1)] = 1;
    SectorBasis sb(5, occ);
    const auto a = spectrum(build_free_hamiltonian(sb, th, cfg));
    const auto b = spectrum(build_free_hamiltonian(sb, ThetaMatrix::zero(), cfg));
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(Heisenberg, ResidualVanishes) {
  std::mt19937_64 rng(15);
  for (int L : {1, 2, 3}) {
    const auto fs = build_space(L);
    const auto cfg = sample_config(rng);
    EXPECT_LE(heisenberg_residual(fs, cfg), 1e-13) << "L=" << L;
    auto free_cfg = cfg;
    free_cfg.g = 0.0;
    EXPECT_LE(heisenberg_residual(fs, free_cfg), 1e-13);
  }
}

TEST(Heisenberg, WrongInteractionFactorFails) {
  std::mt19937_64 rng(16);
  const auto fs = build_space(2);
  auto cfg = sample_config(rng);
  cfg.g = 0.8;
  EXPECT_GE(heisenberg_residual(fs, cfg, 1.0), cfg.g * 0.5);
}

TEST(FreeField, ZeroCouplingIsFree) {
  std::mt19937_64 rng(17);
  auto cfg = sample_config(rng);
  cfg.g = 0.0;
  const auto r = free_field_residual(build_space(2), cfg, 0);
  EXPECT_TRUE(r.continuum_theta.is_zero());
  EXPECT_LE(r.continuum_residual, 1e-14);
}

// At L = 2 the symmetric difference cancels around the ring, so only the interaction
// acts and the residual is 2g · max over flavor subsets S of |Σ_{k∈S} C_ik|.
TEST(FreeField, TwoSiteClosedForm) {
  std::mt19937_64 rng(18);
  const auto cfg = sample_config(rng);
  const auto fs = build_space(2);
  const double measured = free_field_residual_at(fs, cfg, theta_from_couplings(cfg), build_interacting_hamiltonian(fs, cfg));
  double expect = 0.0;
  for (int i = 1; i <= 4; ++i)
    for (int mask = 0; mask < 16; ++mask) {
      double s = 0.0;
      for (int k = 1; k <= 4; ++k)
        if (k != i && (mask >> (k - 1)) & 1) s += cfg.cij(i, k);
      expect = std::max(expect, 2.0 * std::abs(cfg.g) * std::abs(s));
    }
  EXPECT_NEAR(measured, expect, 1e-12);
}

TEST(FreeField, DegeneratePairRejected) {
  CouplingConfig cfg;
  cfg.g = 1.0;
  cfg.set_pair(2, 3, 0.5);
  try {
    free_field_residual(build_space(1), cfg, 0);
    FAIL();
  } catch (const InvalidConfig& e) {
    EXPECT_NE(std::string(e.what()).find("C_23"), std::string::npos);
  }
}

TEST(Spectrum, Basics) {
  EXPECT_EQ(spectrum(OperatorMatrix::zero(5)), std::vector<double>(5, 0.0));
  CouplingConfig cfg;
  const auto ev = spectrum(build_interacting_hamiltonian(SectorBasis(4, Occupation{{1, 0, 0, 0}}), cfg));
  const std::vector<double> ref{-1, 0, 0, 1};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(ev[k], ref[k], 1e-14);
}

TEST(Spectrum, SumEqualsTrace) {
  std::mt19937_64 rng(19);
  const auto cfg = sample_config(rng);
  const auto H = build_interacting_hamiltonian(SectorBasis(4, Occupation{{2, 1, 1, 0}}), cfg);
  const auto ev = spectrum(H);
  double sum = 0.0;
  for (double e : ev) sum += e;
  EXPECT_NEAR(sum, H.trace().real(), 1e-10);
  EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));
}

TEST(Spectrum, RejectsNonHermitian) {
  SparseMat m(2, 2);
  m.insert(0, 1) = 1.0;
  EXPECT_THROW(spectrum(OperatorMatrix(m)), NotHermitian);
}
