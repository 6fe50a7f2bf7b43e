#include <gtest/gtest.h>

#include <random>

#include "so5lab/bethe.hpp"

using namespace so5lab;

namespace {

ThetaMatrix random_admissible(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-PI, PI);
  return ThetaMatrix::from_differences({u(rng), u(rng), u(rng), u(rng)});
}

ThetaMatrix random_theta(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-PI, PI);
  return ThetaMatrix::from_upper({u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)});
}

CouplingConfig distinct_config() {
  CouplingConfig cfg;
  cfg.v = 1.0;
  cfg.C = {1.0, 1.7, 0.6, 1.3};
  return cfg;
}

// Deformed state from the Φ† matrices themselves (full space), the oracle for
// the bitstring construction.
StateVector deformed_state_by_matrices(const FockSpace& fs, const BetheState& st, const ThetaMatrix& th,
                                       StringConvention c) {
  const auto phi = deformed_operators(fs, th, c);
  StateVector vac = StateVector::Zero(fs.dimension());
  vac[0] = 1.0;
  StateVector acc = StateVector::Zero(fs.dimension());
  const int M = st.particle_count();
  std::vector<int> x(static_cast<std::size_t>(M), 0);
  while (true) {
    StateVector v = vac;
    double phase = 0.0;
    for (int j = M - 1; j >= 0; --j) {
      v = phi[x[j]][st.flavor_of[j] - 1].adjoint().sparse() * v;
      phase += st.momenta[j] * x[j];
    }
    acc += std::exp(I_UNIT * phase) * v;
    int pos = M - 1;
    while (pos >= 0 && ++x[pos] == fs.L()) x[pos--] = 0;
    if (pos < 0) break;
  }
  return acc / acc.norm();
}

}  // namespace

TEST(ThetaFromCouplings, Examples) {
  CouplingConfig cfg;
  cfg.g = 1.0;
  cfg.v = 2.0;
  cfg.C = {1.0, 2.0, 3.0, 4.0};
  cfg.set_pair(1, 2, 1.0);
  const auto th = theta_from_couplings(cfg);
  EXPECT_DOUBLE_EQ(th(1, 2), -1.0);
  EXPECT_EQ(th(1, 2) + th(2, 1), 0.0);
  cfg.g = 0.0;
  EXPECT_TRUE(theta_from_couplings(cfg).is_zero());
}

TEST(ThetaFromCouplings, DegeneratePairThrows) {
  CouplingConfig cfg;
  cfg.g = 1.0;
  cfg.C = {1.0, 1.0, 2.0, 3.0};
  cfg.set_pair(1, 2, 0.3);
  EXPECT_THROW(theta_from_couplings(cfg), InvalidConfig);
  cfg.set_pair(1, 2, 0.0);
  cfg.set_pair(1, 3, 0.3);
  EXPECT_NO_THROW(theta_from_couplings(cfg));
}

TEST(Admissibility, ZeroAndDifferenceFormPass) {
  const auto z = admissibility_check(ThetaMatrix::zero());
  EXPECT_TRUE(z.pass);
  EXPECT_EQ(z.max_deviation, 0.0);
  EXPECT_EQ(z.constraints.size(), 256U);
  std::mt19937_64 rng(1);
  for (int s = 0; s < 20; ++s) EXPECT_TRUE(admissibility_check(random_admissible(rng)).pass);
}

TEST(Admissibility, PerturbationDetected) {
  // θ12 = 1, θ34 = 2, remaining angles fixed by the constraints through a_i - a_j
  const std::array<double, 4> a{1.0, 0.0, 2.0, 0.0};
  const auto good = ThetaMatrix::from_differences(a);
  EXPECT_DOUBLE_EQ(good(1, 2), 1.0);
  EXPECT_DOUBLE_EQ(good(3, 4), 2.0);
  EXPECT_TRUE(admissibility_check(good).pass);
  auto raw = good.raw();
  raw[0][2] += 0.5;
  raw[2][0] -= 0.5;
  const auto bad = admissibility_check(ThetaMatrix::from(raw));
  EXPECT_FALSE(bad.pass);
  EXPECT_NEAR(bad.max_deviation, 0.5, 1e-12);
  EXPECT_FALSE(bad.worst_label.empty());
}

TEST(Admissibility, CouplingLevelAgreesWithAngleLevel) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int s = 0; s < 20; ++s) {
    CouplingConfig cfg = distinct_config();
    cfg.g = u(rng);
    for (int i = 1; i <= 4; ++i)
      for (int j = i + 1; j <= 4; ++j) cfg.set_pair(i, j, u(rng));
    const auto r = admissibility_check(cfg);
    EXPECT_EQ(r.angles.pass, admissibility_check(theta_from_couplings(cfg)).pass);
  }
  // couplings with C_ij = (b_i - b_j)(C_i - C_j) give ratio differences that vanish
  CouplingConfig cfg = distinct_config();
  cfg.g = 0.7;
  const std::array<double, 4> b{0.3, -0.2, 0.5, 0.1};
  for (int i = 1; i <= 4; ++i)
    for (int j = i + 1; j <= 4; ++j) cfg.set_pair(i, j, (b[i - 1] - b[j - 1]) * (cfg.c(i) - cfg.c(j)));
  const auto r = admissibility_check(cfg);
  EXPECT_LE(r.ratio_max_deviation, 1e-14);
  EXPECT_TRUE(r.angles.pass);
}

TEST(GaugeFreedom, Dimensions) {
  EXPECT_EQ(gauge_freedom_dimension(), 3);
  EXPECT_EQ(gauge_freedom(false).nullity, 6);
  EXPECT_EQ(gauge_freedom(true).pair_rank, 3);
}

TEST(ExactRank, SmallCases) {
  EXPECT_EQ(exact_rank({{1, 2}, {2, 4}}), 1);
  EXPECT_EQ(exact_rank({{0, 0}, {0, 0}}), 0);
  EXPECT_EQ(exact_rank({{1, 0, 1}, {0, 1, 1}, {1, 1, 2}, {3, -1, 2}}), 2);
}

TEST(SolveBethe, Examples) {
  CouplingConfig cfg;
  cfg.v = 1.5;
  cfg.C = {2.0, 1.0, 1.0, 1.0};
  const auto s1 = solve_bethe(8, Occupation{{1, 0, 0, 0}}, {1}, ThetaMatrix::from_upper({0.3, 1, 2, 0, 0, 0}), cfg);
  EXPECT_DOUBLE_EQ(s1.momenta[0], PI / 4);
  EXPECT_DOUBLE_EQ(s1.continuum_energy, -1.5 * 2.0 * PI / 4);
  EXPECT_DOUBLE_EQ(s1.lattice_energy, -1.5 * 2.0 * std::sin(PI / 4));

  const auto s2 = solve_bethe(4, Occupation{{1, 1, 0, 0}}, {0, 0}, ThetaMatrix::from_upper({PI / 2, 0, 0, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(s2.momenta[0], -PI / 8);
  EXPECT_DOUBLE_EQ(s2.momenta[1], PI / 8);
  EXPECT_EQ(s2.flavor_of, (std::vector<int>{1, 2}));
  EXPECT_THROW(solve_bethe(4, Occupation{{1, 1, 0, 0}}, {0}, ThetaMatrix::zero()), InvalidConfig);
}

TEST(SolveBethe, LogIdentityAndQuantization) {
  EXPECT_NEAR(pbc_phase_shift(PI / 2), -PI / 2, 1e-15);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int s = 0; s < 20; ++s) {
    const double t = u(rng);
    EXPECT_NEAR(pbc_phase_shift(t), -t, 1e-13);
  }
  const auto th = random_theta(rng);
  for (const auto& l : enumerate_quantum_numbers(5, Occupation{{1, 2, 0, 1}}))
    EXPECT_LE(quantization_residual(solve_bethe(5, Occupation{{1, 2, 0, 1}}, l, th), th), 1e-13);
}

TEST(BetheAmplitude, Examples) {
  const auto th = ThetaMatrix::from_upper({PI / 2, 0, 0, 0, 0, 0});
  BetheState st = solve_bethe(4, Occupation{{1, 1, 0, 0}}, {0, 0}, th);
  st.momenta = {0.0, 0.0};
  const cplx a = bethe_amplitude(st, {0.0, 1.0}, th);
  EXPECT_NEAR(std::abs(a - cplx(1.0, 1.0)), 0.0, 1e-15);
  const cplx b = bethe_amplitude(st, {1.0, 0.0}, th);
  EXPECT_NEAR(std::abs(b - cplx(1.0, -1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a), std::abs(b), 1e-15);
  EXPECT_THROW(bethe_amplitude(st, {2.0, 2.0}, th), AmbiguousSign);

  const auto plain = solve_bethe(6, Occupation{{1, 1, 0, 0}}, {1, 2}, ThetaMatrix::zero());
  const cplx c = bethe_amplitude(plain, {0.5, 3.0}, ThetaMatrix::zero());
  EXPECT_NEAR(std::abs(c - std::exp(I_UNIT * (plain.momenta[0] * 0.5 + plain.momenta[1] * 3.0))), 0.0, 1e-15);
}

TEST(BetheAmplitude, SameFlavorCoincidenceIsAllowed) {
  const auto th = ThetaMatrix::from_upper({0.4, 0, 0, 0, 0, 0});
  const auto st = solve_bethe(5, Occupation{{2, 0, 0, 0}}, {0, 1}, th);
  EXPECT_NO_THROW(bethe_amplitude(st, {1.0, 1.0}, th));
}

TEST(BetheAmplitude, ProductFormIsStringPhaseUpToConjugatedAngle) {
  // Away from coincident points the product form equals the string-phase form with
  // θ → -θ, up to an x-independent constant.
  std::mt19937_64 rng(4);
  const auto th = random_theta(rng);
  const auto st = solve_bethe(7, Occupation{{1, 1, 1, 0}}, {0, 2, 5}, th);
  ThetaMatrix::Raw neg{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) neg[i][j] = -th.raw()[i][j];
  const auto thn = ThetaMatrix::unchecked(neg);
  std::optional<cplx> ratio;
  for (int a = 0; a < 7; ++a)
    for (int b = 0; b < 7; ++b)
      for (int c = 0; c < 7; ++c) {
        if (a == b || b == c || a == c) continue;
        const cplx r = bethe_amplitude(st, {double(a), double(b), double(c)}, th) /
                       string_phase_amplitude(st, {a, b, c}, thn, StringConvention::exclusive);
        if (!ratio) ratio = r;
        EXPECT_NEAR(std::abs(r - *ratio), 0.0, 1e-12);
      }
}

TEST(FockState, DeformedBitConstructionMatchesMatrices) {
  std::mt19937_64 rng(5);
  const auto fs = build_space(3);
  const auto th = random_theta(rng);
  for (auto conv : {StringConvention::exclusive, StringConvention::midpoint}) {
    const auto st = solve_bethe(3, Occupation{{1, 0, 1, 1}}, {0, 2, 1}, th);
    const StateVector a = build_fock_state(fs, st, th, StateBasis::deformed, conv);
    const StateVector b = deformed_state_by_matrices(fs, st, th, conv);
    EXPECT_LE((a - b).norm(), 1e-13);
  }
}

TEST(FockState, DeformedAndBareAgree) {
  std::mt19937_64 rng(6);
  const auto fs = build_space(3);
  for (int s = 0; s < 5; ++s) {
    const auto th = random_admissible(rng);
    for (const auto& occ : {Occupation{{1, 1, 0, 0}}, Occupation{{0, 1, 0, 1}}, Occupation{{2, 0, 0, 0}}})
      for (auto conv : {StringConvention::exclusive, StringConvention::midpoint})
        for (const auto& l : enumerate_quantum_numbers(3, occ)) {
          const auto st = solve_bethe(3, occ, l, th);
          const StateVector d = build_fock_state(fs, st, th, StateBasis::deformed, conv);
          const StateVector b = build_fock_state(fs, st, th, StateBasis::bare, conv);
          EXPECT_GE(std::abs(d.dot(b)), 1.0 - 1e-12);
        }
  }
}

TEST(FockState, ZeroThetaConstructionsCoincide) {
  const auto fs = build_space(2);
  const auto st = solve_bethe(2, Occupation{{1, 1, 0, 0}}, {0, 1}, ThetaMatrix::zero());
  const StateVector d = build_fock_state(fs, st, ThetaMatrix::zero(), StateBasis::deformed);
  const StateVector b = build_fock_state(fs, st, ThetaMatrix::zero(), StateBasis::bare);
  EXPECT_LE((d - b).norm(), 0.0);
}

TEST(FockState, SectorBasisMatchesFullSpace) {
  std::mt19937_64 rng(7);
  const auto th = random_theta(rng);
  const Occupation occ{{1, 1, 1, 0}};
  const auto st = solve_bethe(3, occ, {1, 0, 2}, th);
  const auto fs = build_space(3);
  SectorBasis sb(3, occ);
  const StateVector full = build_fock_state(fs, st, th, StateBasis::deformed);
  const StateVector sect = build_fock_state(sb, st, th, StateBasis::deformed);
  for (std::size_t k = 0; k < sb.size(); ++k)
    EXPECT_LE(std::abs(full[static_cast<Eigen::Index>(sb.state(k))] - sect[static_cast<Eigen::Index>(k)]), 1e-14);
  EXPECT_THROW(build_fock_state(SectorBasis(3, Occupation{{1, 1, 0, 0}}), st, th, StateBasis::deformed),
               InvalidConfig);
}

TEST(FockState, SingleParticleEigenvector) {
  const auto cfg = distinct_config();
  for (int f = 1; f <= 4; ++f) {
    Occupation occ;
    occ.n[static_cast<std::size_t>(f - 1)] = 1;
    SectorBasis sb(6, occ);
    const auto H = build_free_hamiltonian(sb, ThetaMatrix::zero(), cfg);
    for (int l = 0; l < 6; ++l) {
      const auto st = solve_bethe(6, occ, {l}, ThetaMatrix::zero(), cfg);
      const StateVector v = build_fock_state(sb, st, ThetaMatrix::zero(), StateBasis::deformed);
      EXPECT_LE((H.sparse() * v - st.lattice_energy * v).norm(), 1e-12);
      EXPECT_NEAR(st.lattice_energy, -cfg.v * cfg.c(f) * std::sin(2 * PI * l / 6), 1e-14);
    }
  }
}

TEST(BetheVsExactDiagonalization, TwoParticleL6) {
  const auto cfg = distinct_config();
  const auto th = ThetaMatrix::from_upper({PI / 3, 0, 0, 0, 0, 0});
  const Occupation occ{{1, 1, 0, 0}};
  const auto ed = spectrum(build_free_hamiltonian(SectorBasis(6, occ), th, cfg));
  const auto be = bethe_spectrum(6, occ, th, cfg);
  ASSERT_EQ(ed.size(), be.size());
  for (std::size_t k = 0; k < ed.size(); ++k) EXPECT_NEAR(ed[k], be[k], 1e-10);
}

TEST(BetheVsExactDiagonalization, ThreeParticleSectors) {
  std::mt19937_64 rng(8);
  const auto cfg = distinct_config();
  for (int L : {4, 5}) {
    const auto th = random_theta(rng);
    for (const auto& occ : {Occupation{{1, 1, 1, 0}}, Occupation{{2, 0, 1, 0}}, Occupation{{0, 1, 1, 1}}}) {
      const auto ed = spectrum(build_free_hamiltonian(SectorBasis(L, occ), th, cfg));
      const auto be = bethe_spectrum(L, occ, th, cfg);
      ASSERT_EQ(ed.size(), be.size());
      for (std::size_t k = 0; k < ed.size(); ++k) EXPECT_NEAR(ed[k], be[k], 1e-10) << "L=" << L;
    }
  }
}

TEST(BetheVsExactDiagonalization, FieldPeriodicWrapGivesUntwistedSpectrum) {
  const auto cfg = distinct_config();
  const auto th = ThetaMatrix::from_upper({1.1, -0.4, 0, 0.8, 0, 0});
  const Occupation occ{{1, 1, 1, 0}};
  const auto ed = spectrum(
      build_free_hamiltonian(SectorBasis(5, occ), th, cfg, {StringConvention::midpoint, Boundary::field_periodic}));
  const auto untwisted = bethe_spectrum(5, occ, ThetaMatrix::zero(), cfg);
  for (std::size_t k = 0; k < ed.size(); ++k) EXPECT_NEAR(ed[k], untwisted[k], 1e-10);
}

TEST(BetheVsExactDiagonalization, ExclusiveStringDoesNotMatch) {
  const auto cfg = distinct_config();
  const auto th = ThetaMatrix::from_upper({1.1, -0.4, 0, 0.8, 0, 0});
  const Occupation occ{{1, 1, 0, 0}};
  const auto ed =
      spectrum(build_free_hamiltonian(SectorBasis(5, occ), th, cfg, {StringConvention::exclusive, Boundary::particle_periodic}));
  const auto be = bethe_spectrum(5, occ, th, cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < ed.size(); ++k) worst = std::max(worst, std::abs(ed[k] - be[k]));
  EXPECT_GT(worst, 1e-3);
}

TEST(BetheStates, AreEigenvectorsOfTransformedHamiltonian) {
  std::mt19937_64 rng(9);
  const auto cfg = distinct_config();
  for (int L : {4, 6}) {
    const auto th = random_theta(rng);
    for (const auto& occ : {Occupation{{1, 1, 0, 0}}, Occupation{{1, 0, 1, 1}}, Occupation{{2, 1, 0, 0}}}) {
      SectorBasis sb(L, occ);
      const auto H = build_free_hamiltonian(sb, th, cfg);
      for (const auto& l : enumerate_quantum_numbers(L, occ)) {
        const auto st = solve_bethe(L, occ, l, th, cfg);
        const StateVector v = build_fock_state(sb, st, th, StateBasis::deformed);
        if (v.norm() == 0) continue;
        EXPECT_LE((H.sparse() * v - st.lattice_energy * v).norm(), 1e-10) << "L=" << L << " " << occ.to_string();
      }
    }
  }
}

TEST(BetheStates, SpanTwoParticleSector) {
  std::mt19937_64 rng(10);
  for (int L : {3, 4, 5, 6}) {
    const auto th = random_theta(rng);
    const Occupation occ{{1, 1, 0, 0}};
    SectorBasis sb(L, occ);
    const auto qn = enumerate_quantum_numbers(L, occ);
    ASSERT_EQ(qn.size(), sb.size());
    DenseMat vs(static_cast<Eigen::Index>(sb.size()), static_cast<Eigen::Index>(qn.size()));
    for (std::size_t c = 0; c < qn.size(); ++c)
      vs.col(static_cast<Eigen::Index>(c)) = build_fock_state(sb, solve_bethe(L, occ, qn[c], th), th, StateBasis::deformed);
    const DenseMat gram = vs.adjoint() * vs;
    Eigen::SelfAdjointEigenSolver<DenseMat> es(gram);
    int rank = 0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) rank += es.eigenvalues()[k] > 1e-10 ? 1 : 0;
    EXPECT_EQ(rank, static_cast<int>(sb.size())) << "L=" << L;
  }
}

TEST(QuantumNumbers, CountEqualsSectorDimension) {
  for (int L : {4, 6, 8})
    for (const auto& occ : {Occupation{{1, 1, 1, 0}}, Occupation{{3, 0, 0, 0}}, Occupation{{2, 0, 0, 1}}})
      EXPECT_EQ(enumerate_quantum_numbers(L, occ).size(), SectorBasis(L, occ).size());
}
