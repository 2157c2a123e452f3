#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tlab/linalg.hpp"
#include "tlab/matrix.hpp"
#include "tlab/thompson.hpp"
#include "tlab/tolerances.hpp"

namespace tlab {

/// One rung of the truncation ladder. u_k and v_k act on the joint
/// subspace (d_k coordinates); their ambient identity extensions produce
/// err_thompson against the full product e^{ix}e^{iy}.
struct TruncationLevel {
  int k = 0;
  Eigen::Index d_k = 0;
  HermitianMatrix x_k, y_k;
  CMat basis;  // ambient_dim x d_k, orthonormal columns spanning S_k
  CMat u_k, v_k;
  double err_trunc = 0.0;     // ||e^{ix_k}e^{iy_k} - e^{ix}e^{iy}||_F
  double err_thompson = 0.0;  // ambient defect of the extended solution
  double residual = 0.0;      // solver residual on the subspace
  long iterations = 0;
  bool solver_success = false;
};

/// Spectral truncation: keep the k eigenvalue/eigenvector pairs of
/// largest modulus. Equal moduli prefer the positive eigenvalue, then the
/// eigensolver's deterministic order.
inline HermitianMatrix truncate(const HermitianMatrix& x, int k) {
  const Eigen::Index n = x.dim();
  if (k < 1 || k > n)
    throw InvalidArgument("truncate: rank " + std::to_string(k) +
                          " out of range for dimension " + std::to_string(n));
  const EigResult e = hermitian_eig(x);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     const double ma = std::abs(e.values[static_cast<std::size_t>(a)]);
                     const double mb = std::abs(e.values[static_cast<std::size_t>(b)]);
                     if (ma != mb) return ma > mb;
                     return e.values[static_cast<std::size_t>(a)] >
                            e.values[static_cast<std::size_t>(b)];
                   });
  CMat out = CMat::Zero(n, n);
  for (int j = 0; j < k; ++j) {
    const Eigen::Index idx = order[static_cast<std::size_t>(j)];
    const double lam = e.values[static_cast<std::size_t>(idx)];
    if (lam == 0.0) continue;
    const auto q = e.vectors.mat().col(idx);
    out += lam * (q * q.adjoint());
  }
  return HermitianMatrix(out);
}

/// Orthonormal basis of R(x_k) + R(y_k) by rank-revealing
/// orthogonalization; singular directions at or below the drop tolerance
/// are discarded.
inline CMat joint_subspace(const HermitianMatrix& x_k,
                           const HermitianMatrix& y_k,
                           const Tolerances& tol = default_tol()) {
  if (x_k.dim() != y_k.dim())
    throw DimensionMismatch("joint_subspace: ambient dimensions differ");
  const Eigen::Index n = x_k.dim();
  CMat stacked(n, 2 * n);
  stacked.leftCols(n) = x_k.mat();
  stacked.rightCols(n) = y_k.mat();
  Eigen::BDCSVD<CMat> svd(stacked, Eigen::ComputeThinU);
  Eigen::Index d = 0;
  for (Eigen::Index j = 0; j < svd.singularValues().size(); ++j)
    if (svd.singularValues()(j) > tol.subspace_drop) ++d;
  return svd.matrixU().leftCols(d);
}

/// u on the subspace extended by the identity on its complement:
/// B u B* + (I - B B*).
inline CMat extend_identity(const CMat& basis, const CMat& u) {
  const Eigen::Index n = basis.rows();
  return basis * u * basis.adjoint() +
         (CMat::Identity(n, n) - basis * basis.adjoint());
}

namespace detail {

// Nearest unitary to m (polar factor); falls back to the identity for
// effectively singular input.
inline CMat polar_unitary(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues().size() == 0 ||
      svd.singularValues()(svd.singularValues().size() - 1) < 1e-8)
    return CMat::Identity(m.rows(), m.cols());
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace detail

/// Truncation ladder: per rank k, truncate both inputs, compress to the
/// joint subspace, solve there, extend by the identity, and measure both
/// the truncation-only and the full reconstruction errors. Levels warm
/// start from the previous solution unless `independent` is set; failures
/// are recorded and the ladder continues.
inline std::vector<TruncationLevel> triad_sequence(
    const HermitianMatrix& x, const HermitianMatrix& y,
    const std::vector<int>& ranks, const SolveOptions& opts = SolveOptions{},
    bool independent = false, int threads = 1) {
  if (x.dim() != y.dim())
    throw DimensionMismatch("triad_sequence: ambient dimensions differ");
  if (ranks.empty()) throw InvalidArgument("triad_sequence: no ranks given");
  for (std::size_t j = 1; j < ranks.size(); ++j)
    if (ranks[j] <= ranks[j - 1])
      throw InvalidArgument("triad_sequence: ranks must be increasing");

  const Eigen::Index n = x.dim();
  const CMat t_full = unitary_exp(x).mat() * unitary_exp(y).mat();

  std::vector<TruncationLevel> levels;
  levels.reserve(ranks.size());
  CMat prev_u_ambient, prev_v_ambient;

  for (int k : ranks) {
    TruncationLevel lvl{k, 0, truncate(x, k), truncate(y, k)};
    lvl.basis = joint_subspace(lvl.x_k, lvl.y_k);
    lvl.d_k = lvl.basis.cols();
    lvl.err_trunc =
        (unitary_exp(lvl.x_k).mat() * unitary_exp(lvl.y_k).mat() - t_full)
            .norm();

    CMat u_ambient, v_ambient;
    if (lvl.d_k == 0) {
      lvl.u_k = CMat::Zero(0, 0);
      lvl.v_k = CMat::Zero(0, 0);
      u_ambient = CMat::Identity(n, n);
      v_ambient = CMat::Identity(n, n);
      lvl.solver_success = true;
    } else {
      const HermitianMatrix x_s(lvl.basis.adjoint() * lvl.x_k.mat() * lvl.basis);
      const HermitianMatrix y_s(lvl.basis.adjoint() * lvl.y_k.mat() * lvl.basis);
      std::vector<std::pair<CMat, CMat>> warm;
      if (!independent && prev_u_ambient.size() > 0)
        warm.emplace_back(
            detail::polar_unitary(lvl.basis.adjoint() * prev_u_ambient *
                                  lvl.basis),
            detail::polar_unitary(lvl.basis.adjoint() * prev_v_ambient *
                                  lvl.basis));
      const SolveReport report = solve(x_s, y_s, opts, threads, warm);
      lvl.u_k = report.U.mat();
      lvl.v_k = report.V.mat();
      lvl.residual = report.residual;
      lvl.iterations = report.iterations;
      lvl.solver_success = report.success;
      u_ambient = extend_identity(lvl.basis, lvl.u_k);
      v_ambient = extend_identity(lvl.basis, lvl.v_k);
    }

    const HermitianMatrix z_ambient(
        u_ambient * x.mat() * u_ambient.adjoint() +
        v_ambient * y.mat() * v_ambient.adjoint());
    lvl.err_thompson = (unitary_exp(z_ambient).mat() - t_full).norm();
    prev_u_ambient = u_ambient;
    prev_v_ambient = v_ambient;
    levels.push_back(std::move(lvl));
  }
  return levels;
}

}  // namespace tlab
