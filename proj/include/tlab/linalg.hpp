#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tlab/matrix.hpp"
#include "tlab/rng.hpp"

namespace tlab {

inline constexpr double kPi = 3.14159265358979323846;

struct EigResult {
  Spectrum values;        // non-increasing
  UnitaryMatrix vectors;  // columns are eigenvectors, H = Q diag Q*
};

namespace detail {

// Deterministic eigenvector normalization: scale each column so its first
// component of magnitude > eps is real positive; then, within groups of
// exactly equal eigenvalues, order columns lexicographically descending on
// (re, im) pairs. Identity input yields Q = I under this rule.
inline void canonicalize_eigvecs(RVec& vals, CMat& vecs) {
  const Eigen::Index n = vecs.rows();
  const double eps = 1e-12;
  for (Eigen::Index c = 0; c < vecs.cols(); ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const Complex z = vecs(r, c);
      if (std::abs(z) > eps) {
        vecs.col(c) *= std::conj(z) / std::abs(z);
        break;
      }
    }
  }
  auto col_less_desc = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const Complex za = vecs(r, a), zb = vecs(r, b);
      if (za.real() != zb.real()) return za.real() > zb.real();
      if (za.imag() != zb.imag()) return za.imag() > zb.imag();
    }
    return false;
  };
  Eigen::Index lo = 0;
  while (lo < vecs.cols()) {
    Eigen::Index hi = lo + 1;
    while (hi < vecs.cols() && vals[hi] == vals[lo]) ++hi;
    if (hi - lo > 1) {
      std::vector<Eigen::Index> order(hi - lo);
      std::iota(order.begin(), order.end(), lo);
      std::sort(order.begin(), order.end(), col_less_desc);
      CMat block(n, hi - lo);
      for (Eigen::Index j = 0; j < hi - lo; ++j)
        block.col(j) = vecs.col(order[j]);
      vecs.middleCols(lo, hi - lo) = block;
    }
    lo = hi;
  }
}

}  // namespace detail

/// Eigendecomposition of a Hermitian matrix with non-increasing eigenvalues
/// and a deterministic eigenvector convention (phase and degenerate-block
/// order fixed), so repeated runs reproduce reports bit for bit.
inline EigResult hermitian_eig(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h.mat());
  if (es.info() != Eigen::Success)
    throw EigFailure("hermitian_eig: eigen-iteration did not converge",
                     std::numeric_limits<double>::quiet_NaN());
  // Eigen sorts ascending; flip to non-increasing.
  const Eigen::Index n = h.dim();
  RVec vals(n);
  CMat vecs(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    vals[j] = es.eigenvalues()[n - 1 - j];
    vecs.col(j) = es.eigenvectors().col(n - 1 - j);
  }
  detail::canonicalize_eigvecs(vals, vecs);
  return {Spectrum(vals), UnitaryMatrix(std::move(vecs))};
}

inline Spectrum spectrum_of(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(h.mat(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw EigFailure("spectrum_of: eigen-iteration did not converge",
                     std::numeric_limits<double>::quiet_NaN());
  const Eigen::Index n = h.dim();
  RVec vals(n);
  for (Eigen::Index j = 0; j < n; ++j) vals[j] = es.eigenvalues()[n - 1 - j];
  return Spectrum(vals);
}

/// e^{iH} through the eigendecomposition of H; exactly unitary up to the
/// orthonormality of the computed eigenvectors.
inline UnitaryMatrix unitary_exp(const HermitianMatrix& h) {
  const EigResult eig = hermitian_eig(h);
  const Eigen::Index n = h.dim();
  CMat d = CMat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    d(j, j) = std::polar(1.0, eig.values[j]);
  return UnitaryMatrix(eig.vectors.mat() * d * eig.vectors.mat().adjoint());
}

struct PrincipalLogInfo {
  /// Indices (in Schur order) of eigenvalues within 1e-12 of -1, where the
  /// branch choice is numerically unstable.
  std::vector<Eigen::Index> branch_sensitive;
};

/// Principal logarithm of a unitary: the Hermitian Z with e^{iZ} = W and
/// spectrum in (-pi, pi]. Eigenphase -1 maps to +pi. Computed via the
/// complex Schur form, which is diagonal for normal input.
inline HermitianMatrix principal_log_unitary(const UnitaryMatrix& w,
                                             PrincipalLogInfo* info = nullptr,
                                             const Tolerances& tol = default_tol()) {
  const Eigen::Index n = w.dim();
  Eigen::ComplexSchur<CMat> schur(w.mat());
  if (schur.info() != Eigen::Success)
    throw EigFailure("principal_log_unitary: Schur iteration did not converge",
                     std::numeric_limits<double>::quiet_NaN());
  CMat d = CMat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex lam = schur.matrixT()(j, j);
    double theta = std::atan2(lam.imag(), lam.real());
    if (theta <= -kPi) theta = kPi;  // branch convention (-pi, pi]
    d(j, j) = theta;
    if (info && std::abs(lam + Complex(1.0, 0.0)) <= tol.branch_sensitive)
      info->branch_sensitive.push_back(j);
  }
  const CMat& q = schur.matrixU();
  return HermitianMatrix(q * d * q.adjoint());
}

/// Frechet derivative of M -> e^M at M in direction D, via the doubled-space
/// block trick: exp([[M, D], [0, M]]) carries it in the off-diagonal block.
/// Uses the general scaling-and-squaring exponential, since the block matrix
/// is not normal.
inline CMat dexp_block(const CMat& m, const CMat& d) {
  if (m.rows() != d.rows() || m.cols() != d.cols())
    throw DimensionMismatch("dexp_block: dimension mismatch");
  const Eigen::Index n = m.rows();
  CMat block = CMat::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = m;
  block.topRightCorner(n, n) = d;
  block.bottomRightCorner(n, n) = m;
  const CMat e = block.exp();
  return e.topRightCorner(n, n);
}

/// Directional derivative d/dt e^{i(H + tE)} at t = 0.
inline CMat frechet_exp(const HermitianMatrix& h, const HermitianMatrix& e) {
  if (h.dim() != e.dim())
    throw DimensionMismatch("frechet_exp: dimension mismatch");
  const Complex i(0.0, 1.0);
  return dexp_block(i * h.mat(), i * e.mat());
}

inline HermitianMatrix conjugate(const UnitaryMatrix& u,
                                 const HermitianMatrix& h) {
  if (u.dim() != h.dim())
    throw DimensionMismatch("conjugate: dimension mismatch");
  return HermitianMatrix(u.mat() * h.mat() * u.mat().adjoint());
}

/// Seeded Hermitian matrix scaled so the operator norm stays <= norm_bound.
inline HermitianMatrix random_hermitian(Eigen::Index n, std::uint64_t seed,
                                        double norm_bound) {
  if (n < 1) throw InvalidArgument("random_hermitian: n must be >= 1");
  Rng rng(seed);
  CMat g(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) g(r, c) = rng.cgaussian();
  HermitianMatrix h(0.5 * (g + g.adjoint()));
  const double nrm = spectrum_of(h).max_abs();
  if (nrm > norm_bound && nrm > 0.0)
    return HermitianMatrix(h.mat() * (norm_bound / nrm));
  return h;
}

/// Seeded Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// triangular factor's diagonal made real positive.
inline UnitaryMatrix random_unitary(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("random_unitary: n must be >= 1");
  Rng rng(seed);
  CMat g(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) g(r, c) = rng.cgaussian();
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ();
  const CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex dj = r(j, j);
    const double a = std::abs(dj);
    q.col(j) *= (a > 0.0) ? dj / a : Complex(1.0, 0.0);
  }
  return UnitaryMatrix(std::move(q));
}

}  // namespace tlab
