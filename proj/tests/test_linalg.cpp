#include <catch2/catch_amalgamated.hpp>

#include <unsupported/Eigen/MatrixFunctions>

#include "tlab/linalg.hpp"

using namespace tlab;
using Catch::Approx;

namespace {

// Commuting pair with a shared random eigenbasis.
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

// Independent exponential route for cross-checks: Pade scaling-and-squaring.
CMat exp_ss(const HermitianMatrix& h) {
  const Complex i(0.0, 1.0);
  CMat m = i * h.mat();
  return m.exp();
}

}  // namespace

TEST_CASE("hermitian_eig on diagonal input") {
  CMat m = CMat::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 2.0;
  const EigResult e = hermitian_eig(HermitianMatrix(m));
  REQUIRE(e.values[0] == Approx(2.0).margin(1e-14));
  REQUIRE(e.values[1] == Approx(1.0).margin(1e-14));
  // Q is the swap permutation.
  REQUIRE(std::abs(e.vectors.mat()(0, 1) - 1.0) < 1e-13);
  REQUIRE(std::abs(e.vectors.mat()(1, 0) - 1.0) < 1e-13);
  REQUIRE(std::abs(e.vectors.mat()(0, 0)) < 1e-13);
  REQUIRE(std::abs(e.vectors.mat()(1, 1)) < 1e-13);
}

TEST_CASE("hermitian_eig identity tie-break gives Q = I") {
  const EigResult e = hermitian_eig(HermitianMatrix(CMat::Identity(3, 3)));
  for (int j = 0; j < 3; ++j) REQUIRE(e.values[j] == Approx(1.0).margin(1e-14));
  REQUIRE((e.vectors.mat() - CMat::Identity(3, 3)).norm() < 1e-13);
}

TEST_CASE("hermitian_eig reconstructs random input") {
  const HermitianMatrix h = random_hermitian(4, 42, 2.0);
  const EigResult e = hermitian_eig(h);
  CMat d = CMat::Zero(4, 4);
  for (int j = 0; j < 4; ++j) d(j, j) = e.values[j];
  const CMat rec = e.vectors.mat() * d * e.vectors.mat().adjoint();
  REQUIRE((rec - h.mat()).norm() < 1e-10);
}

TEST_CASE("hermitian_eig is deterministic") {
  const HermitianMatrix h = random_hermitian(5, 7, 1.0);
  const EigResult a = hermitian_eig(h);
  const EigResult b = hermitian_eig(h);
  REQUIRE((a.vectors.mat() - b.vectors.mat()).norm() == 0.0);
}

TEST_CASE("unitary_exp basics") {
  REQUIRE((unitary_exp(HermitianMatrix::zero(3)).mat() - CMat::Identity(3, 3))
              .norm() < 1e-14);
  CMat one(1, 1);
  one(0, 0) = kPi / 2.0;
  const CMat w = unitary_exp(HermitianMatrix(one)).mat();
  REQUIRE(std::abs(w(0, 0) - Complex(0.0, 1.0)) < 1e-14);
}

TEST_CASE("unitary_exp determinant identity") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const HermitianMatrix h = random_hermitian(3, seed, 1.0);
    const Complex det = unitary_exp(h).mat().determinant();
    const Complex expected = std::polar(1.0, h.trace_real());
    REQUIRE(std::abs(det - expected) < 1e-10);
  }
}

TEST_CASE("principal_log_unitary basics") {
  REQUIRE(principal_log_unitary(UnitaryMatrix::identity(3)).mat().norm() <
          1e-12);
  // W = -I maps to diag(pi, pi) under the (-pi, pi] convention.
  const HermitianMatrix z =
      principal_log_unitary(UnitaryMatrix(-CMat::Identity(2, 2)));
  REQUIRE(std::abs(z.mat()(0, 0) - Complex(kPi, 0.0)) < 1e-12);
  REQUIRE(std::abs(z.mat()(1, 1) - Complex(kPi, 0.0)) < 1e-12);
  REQUIRE(std::abs(z.mat()(0, 1)) < 1e-12);
}

TEST_CASE("principal_log_unitary flags branch-sensitive eigenvalues") {
  PrincipalLogInfo info;
  principal_log_unitary(UnitaryMatrix(-CMat::Identity(2, 2)), &info);
  REQUIRE(info.branch_sensitive.size() == 2);
  info.branch_sensitive.clear();
  principal_log_unitary(UnitaryMatrix::identity(2), &info);
  REQUIRE(info.branch_sensitive.empty());
}

TEST_CASE("principal log of commuting product is X + Y") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    auto [x, y] = commuting_pair(3, seed, 0.45);  // ||X + Y|| < pi
    const CMat w = unitary_exp(x).mat() * unitary_exp(y).mat();
    const HermitianMatrix z = principal_log_unitary(UnitaryMatrix(w));
    REQUIRE((z.mat() - (x.mat() + y.mat())).norm() < 1e-9);
  }
}

TEST_CASE("log-exp roundtrip inside the principal branch") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 4);
    const HermitianMatrix h = random_hermitian(n, 1000 + seed, kPi - 1e-3);
    const HermitianMatrix back = principal_log_unitary(unitary_exp(h));
    REQUIRE((back.mat() - h.mat()).norm() < 1e-9);
  }
}

TEST_CASE("exponential homomorphism on commuting inputs") {
  for (std::uint64_t seed : {21u, 22u}) {
    auto [h, k] = commuting_pair(4, seed, 1.0);
    const CMat lhs = unitary_exp(h).mat() * unitary_exp(k).mat();
    const CMat rhs = unitary_exp(HermitianMatrix(h.mat() + k.mat())).mat();
    REQUIRE((lhs - rhs).norm() < 1e-9);
  }
}

TEST_CASE("frechet_exp at H = 0 is iE, and E = 0 gives zero") {
  const HermitianMatrix e = random_hermitian(3, 5, 1.0);
  const CMat d = frechet_exp(HermitianMatrix::zero(3), e);
  REQUIRE((d - Complex(0.0, 1.0) * e.mat()).norm() < 1e-12);
  const CMat d0 = frechet_exp(e, HermitianMatrix::zero(3));
  REQUIRE(d0.norm() < 1e-12);
}

TEST_CASE("frechet_exp matches central differences") {
  const double t = 1e-5;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 4);  // n <= 5
    const HermitianMatrix h = random_hermitian(n, 2000 + seed, 1.0);
    const HermitianMatrix e = random_hermitian(n, 3000 + seed, 1.0);
    const CMat analytic = frechet_exp(h, e);
    const CMat plus = exp_ss(HermitianMatrix(h.mat() + t * e.mat()));
    const CMat minus = exp_ss(HermitianMatrix(h.mat() - t * e.mat()));
    const CMat fd = (plus - minus) / (2.0 * t);
    REQUIRE((analytic - fd).norm() / analytic.norm() < 1e-6);
  }
}

TEST_CASE("conjugate basics and spectrum preservation") {
  const HermitianMatrix h = random_hermitian(3, 9, 1.0);
  REQUIRE((conjugate(UnitaryMatrix::identity(3), h).mat() - h.mat()).norm() <
          1e-14);

  CMat perm = CMat::Zero(2, 2);
  perm(0, 1) = 1.0;
  perm(1, 0) = 1.0;
  CMat d12 = CMat::Zero(2, 2);
  d12(0, 0) = 1.0;
  d12(1, 1) = 2.0;
  const CMat conj =
      conjugate(UnitaryMatrix(perm), HermitianMatrix(d12)).mat();
  REQUIRE(std::abs(conj(0, 0) - 2.0) < 1e-14);
  REQUIRE(std::abs(conj(1, 1) - 1.0) < 1e-14);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 4);
    const HermitianMatrix a = random_hermitian(n, 4000 + seed, 2.0);
    const UnitaryMatrix u = random_unitary(n, 5000 + seed);
    const Spectrum sa = spectrum_of(a);
    const Spectrum sc = spectrum_of(conjugate(u, a));
    for (std::size_t j = 0; j < sa.size(); ++j)
      REQUIRE(sa[j] == Approx(sc[j]).margin(1e-10));
  }
}

TEST_CASE("random generation contracts") {
  // 1x1 Hermitian with bound 1 is a real scalar in [-1, 1].
  const HermitianMatrix s = random_hermitian(1, 77, 1.0);
  REQUIRE(std::abs(s.mat()(0, 0).imag()) < 1e-15);
  REQUIRE(std::abs(s.mat()(0, 0).real()) <= 1.0 + 1e-12);

  // Same seed twice gives the identical matrix.
  REQUIRE((random_hermitian(4, 3, 1.0).mat() - random_hermitian(4, 3, 1.0).mat())
              .norm() == 0.0);
  REQUIRE((random_unitary(4, 3).mat() - random_unitary(4, 3).mat()).norm() ==
          0.0);

  // Norm bound respected.
  const HermitianMatrix h = random_hermitian(4, 7, kPi);
  REQUIRE(operator_norm(h.mat()) <= kPi + 1e-12);

  // Unitarity of the Haar sample.
  const UnitaryMatrix u = random_unitary(5, 11);
  REQUIRE((u.mat().adjoint() * u.mat() - CMat::Identity(5, 5)).norm() < 1e-12);

  REQUIRE_THROWS_AS(random_hermitian(0, 1, 1.0), InvalidArgument);
}

TEST_CASE("hermitian constructor symmetrizes and records correction") {
  CMat m(2, 2);
  m << Complex(1.0, 0.0), Complex(0.5, 0.1), Complex(0.2, 0.3),
      Complex(2.0, 0.0);
  const HermitianMatrix h(m);
  REQUIRE((h.mat() - h.mat().adjoint()).norm() < 1e-15);
  REQUIRE(h.hermitization_correction() > 0.0);
  REQUIRE(HermitianMatrix(h.mat()).hermitization_correction() < 1e-15);
}

TEST_CASE("unitary constructor re-orthonormalizes drifted input") {
  CMat m = CMat::Identity(3, 3) * Complex(1.0 + 1e-4, 0.0);
  const UnitaryMatrix u(m);
  REQUIRE(u.drift() > 1e-10);
  REQUIRE((u.mat().adjoint() * u.mat() - CMat::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("spectrum rejects unsorted input") {
  REQUIRE_THROWS_AS(Spectrum(std::vector<double>{1.0, 2.0}), InvalidArgument);
  REQUIRE(Spectrum::sorted({1.0, 2.0})[0] == 2.0);
}
