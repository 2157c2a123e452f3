#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "tlab/errors.hpp"
#include "tlab/tolerances.hpp"

namespace tlab {

using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using Complex = std::complex<double>;

inline double frobenius_norm(const CMat& m) { return m.norm(); }

/// Largest singular value, computed as sqrt of the top eigenvalue of M*M.
inline double operator_norm(const CMat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMat> es(m.adjoint() * m,
                                         Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  return top > 0.0 ? std::sqrt(top) : 0.0;
}

/// Dense Hermitian matrix. Construction symmetrizes through (M + M*)/2 and
/// records the Frobenius norm of the discarded skew part, so callers can
/// detect when they fed something that was not Hermitian to begin with.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(CMat m) {
    if (m.rows() != m.cols())
      throw DimensionMismatch("HermitianMatrix: input must be square");
    CMat sym = 0.5 * (m + m.adjoint());
    correction_ = (m - sym).norm();
    m_ = std::move(sym);
  }

  static HermitianMatrix zero(Eigen::Index n) {
    return HermitianMatrix(CMat::Zero(n, n));
  }

  const CMat& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

  /// Frobenius norm of the skew part removed at construction.
  double hermitization_correction() const { return correction_; }

  double trace_real() const { return m_.trace().real(); }

 private:
  CMat m_;
  double correction_ = 0.0;
};

/// Dense unitary matrix. If the unitarity drift ||U*U - I||_F of the input
/// exceeds the tolerance, the matrix is replaced by its nearest unitary
/// (polar factor via SVD); the original drift is kept for inspection.
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(CMat m, const Tolerances& tol = default_tol()) {
    if (m.rows() != m.cols())
      throw DimensionMismatch("UnitaryMatrix: input must be square");
    const Eigen::Index n = m.rows();
    drift_ = (m.adjoint() * m - CMat::Identity(n, n)).norm();
    if (drift_ > tol.unitarity && n > 0) {
      Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
      m = svd.matrixU() * svd.matrixV().adjoint();
    }
    m_ = std::move(m);
  }

  static UnitaryMatrix identity(Eigen::Index n) {
    return UnitaryMatrix(CMat::Identity(n, n));
  }

  const CMat& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

  /// Unitarity drift of the raw input, before any re-orthonormalization.
  double drift() const { return drift_; }

 private:
  CMat m_;
  double drift_ = 0.0;
};

/// Eigenvalue list sorted non-increasing; multiplicities by repetition.
class Spectrum {
 public:
  /// Requires non-increasing input; unsorted data is an error, not a reorder.
  explicit Spectrum(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t j = 1; j < values_.size(); ++j)
      if (values_[j - 1] < values_[j])
        throw InvalidArgument("Spectrum: values must be non-increasing");
  }

  Spectrum(std::initializer_list<double> values)
      : Spectrum(std::vector<double>(values)) {}

  template <typename Derived>
  explicit Spectrum(const Eigen::MatrixBase<Derived>& v)
      : Spectrum([&] {
          std::vector<double> out(static_cast<std::size_t>(v.size()));
          for (Eigen::Index j = 0; j < v.size(); ++j)
            out[static_cast<std::size_t>(j)] = v(j);
          return out;
        }()) {}

  /// Sorts a raw value list non-increasing, then constructs.
  static Spectrum sorted(std::vector<double> values) {
    std::sort(values.begin(), values.end(), std::greater<double>());
    return Spectrum(std::move(values));
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }
  const std::vector<double>& values() const { return values_; }

  double sum() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
  }

  double max_abs() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
  }

 private:
  std::vector<double> values_;
};

}  // namespace tlab
