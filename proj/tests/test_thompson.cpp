#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include "tlab/thompson.hpp"

using namespace tlab;
using Catch::Approx;

namespace {

std::pair<HermitianMatrix, HermitianMatrix> commuting_pair(Eigen::Index n,
                                                           std::uint64_t seed,
                                                           double scale) {
  UnitaryMatrix q = random_unitary(n, seed);
  Rng rng(Rng::derive(seed, 1));
  CMat d1 = CMat::Zero(n, n), d2 = CMat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    d1(j, j) = scale * (2.0 * rng.unit() - 1.0);
    d2(j, j) = scale * (2.0 * rng.unit() - 1.0);
  }
  return {HermitianMatrix(q.mat() * d1 * q.mat().adjoint()),
          HermitianMatrix(q.mat() * d2 * q.mat().adjoint())};
}

// Second exponential route for cross-checks.
double objective_ss(const HermitianMatrix& x, const HermitianMatrix& y,
                    const UnitaryMatrix& u, const UnitaryMatrix& v) {
  const Complex i(0.0, 1.0);
  const CMat t = (i * x.mat()).exp() * (i * y.mat()).exp();
  const CMat z = u.mat() * x.mat() * u.mat().adjoint() +
                 v.mat() * y.mat() * v.mat().adjoint();
  return (t - (i * z).exp()).squaredNorm();
}

CMat random_skew(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  CMat g(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) g(r, c) = rng.cgaussian();
  return 0.5 * (g - g.adjoint());
}

}  // namespace

TEST_CASE("objective vanishes in the commuting and Y=0 cases") {
  auto [x, y] = commuting_pair(3, 5, 1.0);
  REQUIRE(objective(x, y, UnitaryMatrix::identity(3),
                    UnitaryMatrix::identity(3)) < 1e-20);

  const HermitianMatrix x2 = random_hermitian(3, 8, 1.5);
  REQUIRE(objective(x2, HermitianMatrix::zero(3), UnitaryMatrix::identity(3),
                    random_unitary(3, 9)) < 1e-24);
}

TEST_CASE("objective matches an independent exponential route") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const HermitianMatrix x = random_hermitian(2, 100 + seed, 1.0);
    const HermitianMatrix y = random_hermitian(2, 200 + seed, 1.0);
    const UnitaryMatrix u = UnitaryMatrix::identity(2);
    const double f = objective(x, y, u, u);
    REQUIRE(f > 0.0);
    REQUIRE(f == Approx(objective_ss(x, y, u, u)).margin(1e-10));
  }
}

TEST_CASE("objective rejects mismatched dimensions") {
  REQUIRE_THROWS_AS(objective(HermitianMatrix::zero(2),
                              HermitianMatrix::zero(3),
                              UnitaryMatrix::identity(2),
                              UnitaryMatrix::identity(2)),
                    DimensionMismatch);
}

TEST_CASE("gradient is stationary at a commuting minimizer") {
  auto [x, y] = commuting_pair(3, 17, 1.0);
  const auto [gu, gv] = gradient(x, y, UnitaryMatrix::identity(3),
                                 UnitaryMatrix::identity(3));
  REQUIRE(gu.norm() < 1e-10);
  REQUIRE(gv.norm() < 1e-10);
}

TEST_CASE("gradient in V vanishes identically when Y = 0") {
  const HermitianMatrix x = random_hermitian(3, 21, 1.2);
  const auto [gu, gv] = gradient(x, HermitianMatrix::zero(3),
                                 random_unitary(3, 22), random_unitary(3, 23));
  REQUIRE(gv.norm() == 0.0);
  (void)gu;
}

TEST_CASE("gradient matches finite differences") {
  const HermitianMatrix x = random_hermitian(3, 31, 1.0);
  const HermitianMatrix y = random_hermitian(3, 32, 1.0);
  const UnitaryMatrix u = random_unitary(3, 33);
  const UnitaryMatrix v = random_unitary(3, 34);
  const auto [gu, gv] = gradient(x, y, u, v);
  REQUIRE((gu + gu.adjoint()).norm() < 1e-12);  // tangents are skew
  REQUIRE((gv + gv.adjoint()).norm() < 1e-12);

  const double t = 1e-5;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const CMat a = random_skew(3, 400 + 2 * k);
    const CMat b = random_skew(3, 401 + 2 * k);
    const double analytic = (gu.adjoint() * a).trace().real() +
                            (gv.adjoint() * b).trace().real();
    const UnitaryMatrix u_p(CMat((t * a).exp()) * u.mat());
    const UnitaryMatrix v_p(CMat((t * b).exp()) * v.mat());
    const UnitaryMatrix u_m(CMat((-t * a).exp()) * u.mat());
    const UnitaryMatrix v_m(CMat((-t * b).exp()) * v.mat());
    const double fd =
        (objective(x, y, u_p, v_p) - objective(x, y, u_m, v_m)) / (2.0 * t);
    REQUIRE(fd == Approx(analytic).epsilon(1e-4).margin(1e-9));
  }
}

TEST_CASE("branch_targets in the principal regime") {
  auto [x, y] = commuting_pair(3, 41, 0.45);  // ||X + Y|| < pi
  const auto targets = branch_targets(x, y, 4);
  REQUIRE_FALSE(targets.empty());
  const Spectrum expected = spectrum_of(HermitianMatrix(x.mat() + y.mat()));
  for (std::size_t j = 0; j < expected.size(); ++j)
    REQUIRE(targets[0].spectrum[j] == Approx(expected[j]).margin(1e-9));
  REQUIRE(targets[0].shift == std::vector<int>(3, 0));
  REQUIRE(targets[0].distance == Approx(0.0).margin(1e-12));
}

TEST_CASE("branch_targets on zero input") {
  const auto targets =
      branch_targets(HermitianMatrix::zero(2), HermitianMatrix::zero(2), 8);
  REQUIRE(targets.size() == 1);
  REQUIRE(targets[0].spectrum[0] == Approx(0.0).margin(1e-14));
  REQUIRE(targets[0].spectrum[1] == Approx(0.0).margin(1e-14));
}

TEST_CASE("branch_targets finds the shifted scalar branch") {
  CMat three(1, 1);
  three(0, 0) = 3.0;
  const HermitianMatrix x(three);
  const auto targets = branch_targets(x, x, 4);
  REQUIRE(targets.size() == 1);
  REQUIRE(targets[0].spectrum[0] == Approx(6.0).margin(1e-9));
  REQUIRE(targets[0].shift == std::vector<int>{1});
  REQUIRE_THROWS_AS(branch_targets(x, x, 0), InvalidArgument);
}

TEST_CASE("solve is immediate on commuting and Y=0 instances") {
  auto [x, y] = commuting_pair(3, 51, 0.8);
  SolveOptions opts;
  opts.seed = 1;
  const SolveReport r = solve(x, y, opts);
  REQUIRE(r.success);
  REQUIRE(r.residual <= 1e-10);
  REQUIRE(r.iterations == 0);
  REQUIRE(r.restarts_used == 1);

  const SolveReport r2 =
      solve(random_hermitian(3, 52, 1.0), HermitianMatrix::zero(3), opts);
  REQUIRE(r2.success);
  REQUIRE(r2.residual <= 1e-10);
}

TEST_CASE("solve reaches tight residuals on seeded random pairs") {
  SolveOptions opts;
  opts.seed = 7;
  opts.residual_target = 1e-16;  // Frobenius defect 1e-8
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const HermitianMatrix x = random_hermitian(2, 600 + seed, 1.0);
    const HermitianMatrix y = random_hermitian(2, 700 + seed, 1.0);
    const SolveReport r = solve(x, y, opts);
    INFO("seed=" << seed << " residual=" << r.residual
                 << " restarts=" << r.restarts_used);
    REQUIRE(r.success);
    REQUIRE(r.residual <= 1e-8);
    REQUIRE(r.horn_certificate.has_value());
    REQUIRE(r.horn_certificate->feasible);
    // The reported exponent is exactly the sum of the reported conjugates.
    const CMat z_rebuilt =
        r.U.mat() * x.mat() * r.U.mat().adjoint() +
        r.V.mat() * y.mat() * r.V.mat().adjoint();
    REQUIRE((r.Z.mat() - z_rebuilt).norm() < 1e-13);
    // Orbit search: spectra of the conjugated factors are preserved.
    const Spectrum sx = spectrum_of(x);
    const Spectrum sxc =
        spectrum_of(HermitianMatrix(r.U.mat() * x.mat() * r.U.mat().adjoint()));
    for (std::size_t j = 0; j < sx.size(); ++j)
      REQUIRE(sx[j] == Approx(sxc[j]).margin(1e-10));
    REQUIRE((r.U.mat().adjoint() * r.U.mat() - CMat::Identity(2, 2)).norm() <
            1e-9);
  }
}

TEST_CASE("solve output is schedule independent") {
  const HermitianMatrix x = random_hermitian(3, 81, 1.0);
  const HermitianMatrix y = random_hermitian(3, 82, 1.0);
  SolveOptions opts;
  opts.seed = 3;
  opts.restarts = 6;
  const SolveReport a = solve(x, y, opts, 1);
  const SolveReport b = solve(x, y, opts, 3);
  const SolveReport c = solve(x, y, opts, 1);
  REQUIRE((a.U.mat() - b.U.mat()).norm() == 0.0);
  REQUIRE((a.V.mat() - b.V.mat()).norm() == 0.0);
  REQUIRE(a.residual == b.residual);
  REQUIRE(a.iterations == b.iterations);
  REQUIRE(a.restarts_used == b.restarts_used);
  REQUIRE((a.U.mat() - c.U.mat()).norm() == 0.0);
}

TEST_CASE("verify accepts solutions and flags corrupted ones") {
  const HermitianMatrix x = random_hermitian(2, 91, 1.0);
  const HermitianMatrix y = random_hermitian(2, 92, 1.0);
  SolveOptions opts;
  opts.seed = 11;
  opts.residual_target = 1e-16;
  const SolveReport r = solve(x, y, opts);
  REQUIRE(r.success);

  const VerifyResult good = verify(x, y, r.U, r.V, 1e-8);
  REQUIRE(good.ok);
  REQUIRE(good.residual == Approx(r.residual).margin(1e-12));
  REQUIRE(good.certificate.has_value());
  REQUIRE(good.certificate->feasible);

  CMat u_bad = r.U.mat();
  u_bad.col(0) *= std::polar(1.0, 0.3);
  const VerifyResult bad = verify(x, y, UnitaryMatrix(u_bad), r.V, 1e-8);
  REQUIRE_FALSE(bad.ok);
  REQUIRE(bad.residual > 1e-8);

  REQUIRE(verify(x, y, UnitaryMatrix::identity(2), UnitaryMatrix::identity(2),
                 1e-8)
              .certificate->feasible);
}

TEST_CASE("dilate embeds spectra and solves trivially on zero") {
  const HermitianMatrix x = random_hermitian(2, 95, 2.0);
  const Spectrum sx = spectrum_of(x);
  const Spectrum sd = spectrum_of(dilate(x));
  std::vector<double> expected = sx.values();
  expected.push_back(0.0);
  expected.push_back(0.0);
  const Spectrum exp_sorted = Spectrum::sorted(std::move(expected));
  for (std::size_t j = 0; j < sd.size(); ++j)
    REQUIRE(sd[j] == Approx(exp_sorted[j]).margin(1e-14));

  SolveOptions opts;
  const SolveReport r =
      dilate_and_solve(HermitianMatrix::zero(2), HermitianMatrix::zero(2), opts);
  REQUIRE(r.success);
  REQUIRE(r.dilated);
  REQUIRE(r.Z.dim() == 4);
  REQUIRE(r.residual <= 1e-10);
}

TEST_CASE("dilation rescues a budget-stalled instance") {
  // Pinned instance: under this tight budget the flat solve stalls above
  // 1e-8 while the doubled-space variant converges.
  const HermitianMatrix x = random_hermitian(2, 9199, 3.1);
  const HermitianMatrix y = random_hermitian(2, 9699, 3.1);
  SolveOptions opts;
  opts.restarts = 2;
  opts.max_iters = 400;
  opts.residual_target = 1e-16;
  const SolveReport plain = solve(x, y, opts);
  REQUIRE_FALSE(plain.success);
  REQUIRE(plain.residual > 1e-8);
  const SolveReport dil = dilate_and_solve(x, y, opts);
  REQUIRE(dil.success);
  REQUIRE(dil.residual <= 1e-8);
  REQUIRE(dil.dilated);
}

TEST_CASE("options are validated") {
  SolveOptions opts;
  opts.restarts = 0;
  REQUIRE_THROWS_AS(solve(HermitianMatrix::zero(2), HermitianMatrix::zero(2),
                          opts),
                    InvalidArgument);
  SolveOptions opts2;
  opts2.residual_target = 0.0;
  REQUIRE_THROWS_AS(opts2.validate(), InvalidArgument);
}
