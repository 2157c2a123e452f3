#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "tlab/horn.hpp"
#include "tlab/linalg.hpp"
#include "tlab/matrix.hpp"
#include "tlab/rng.hpp"

namespace tlab {

struct SolveOptions {
  int restarts = 20;
  int max_iters = 2000;
  double shrink = 0.5;
  double initial_step = 0.1;
  // Success threshold on the squared-Frobenius defect of the identity.
  double residual_target = 1e-10;
  double armijo_c = 1e-4;
  double grad_tol = 1e-12;
  std::uint64_t seed = 0;
  bool use_branch_targets = false;
  int m_max = 1;
  int branch_limit = 8;

  void validate() const {
    if (restarts < 1 || max_iters < 1 || branch_limit < 1 || m_max < 0)
      throw InvalidArgument("SolveOptions: counts must be positive");
    if (!(residual_target > 0.0))
      throw InvalidArgument("SolveOptions: residual_target must be positive");
    if (!(shrink > 0.0 && shrink < 1.0) || !(initial_step > 0.0))
      throw InvalidArgument("SolveOptions: invalid step rule");
  }
};

struct BranchTarget {
  Spectrum spectrum;
  std::vector<int> shift;  // aligned with the principal spectrum's order
  double distance = 0.0;   // euclidean distance from the principal spectrum
};

struct SolveReport {
  UnitaryMatrix U, V;
  HermitianMatrix Z;
  double residual = 0.0;  // Frobenius norm of e^{iX}e^{iY} - e^{iZ}
  double residual_operator = 0.0;
  long iterations = 0;    // spent by the reported restart
  int restarts_used = 0;
  bool success = false;
  bool dilated = false;
  std::optional<std::vector<int>> branch_shift;
  std::optional<HornCertificate> horn_certificate;
};

namespace detail {

inline void require_same_dim(const HermitianMatrix& x,
                             const HermitianMatrix& y) {
  if (x.dim() != y.dim())
    throw DimensionMismatch("thompson: X and Y dimensions differ");
}

struct Eval {
  CMat Z, Q, E;
  RVec lam;       // ascending, as the eigensolver produces it
  double f = 0.0; // squared-Frobenius defect against the target product
};

inline void evaluate(const CMat& x, const CMat& y, const CMat& t,
                     const CMat& u, const CMat& v, Eval& e) {
  e.Z = u * x * u.adjoint() + v * y * v.adjoint();
  e.Z = 0.5 * (e.Z + e.Z.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(e.Z);
  if (es.info() != Eigen::Success)
    throw EigFailure("thompson: eigensolver failed on the exponent",
                     std::numeric_limits<double>::quiet_NaN());
  e.lam = es.eigenvalues();
  e.Q = es.eigenvectors();
  const Eigen::Index n = e.lam.size();
  Eigen::VectorXcd phases(n);
  for (Eigen::Index j = 0; j < n; ++j)
    phases(j) = std::polar(1.0, e.lam(j));
  e.E = e.Q * phases.asDiagonal() * e.Q.adjoint();
  e.f = (t - e.E).squaredNorm();
}

// Hermitian dual G of the squared defect with respect to Z, so that
// d f = Re tr(G* dZ). Uses the divided differences of e^{i.} on the
// eigenvalues of Z, which are uniformly accurate for clustered spectra.
inline CMat defect_dual(const CMat& t, const Eval& e) {
  const Eigen::Index n = e.lam.size();
  const CMat w = e.Q.adjoint() * (t - e.E) * e.Q;
  CMat c(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double mean = 0.5 * (e.lam(j) + e.lam(k));
      const double half = 0.5 * (e.lam(j) - e.lam(k));
      const double sinc =
          std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
      const Complex psi = std::polar(sinc, mean);
      c(j, k) = w(j, k) * std::conj(psi);
    }
  }
  CMat g = Complex(0.0, 2.0) * (e.Q * c * e.Q.adjoint());
  return 0.5 * (g + g.adjoint());
}

// Hermitian dual of sum_j (lam_j - target_j)^2 with both lists ascending.
inline CMat spectral_dual(const Eval& e, const RVec& target_asc) {
  RVec d = 2.0 * (e.lam - target_asc);
  return e.Q * d.asDiagonal() * e.Q.adjoint();
}

inline double spectral_value(const Eval& e, const RVec& target_asc) {
  return (e.lam - target_asc).squaredNorm();
}

// Tangent directions produced by conjugating the dual into each factor.
inline CMat orbit_gradient(const CMat& g, const CMat& conjugated) {
  return g * conjugated - conjugated * g;  // skew-Hermitian commutator
}

// Eigen-factorized skew direction: exp(-s A) = Qa e^{-i s mu} Qa*.
struct SkewDirection {
  CMat Qa;
  RVec mu;
  bool zero = false;
};

inline SkewDirection factor_skew(const CMat& a) {
  SkewDirection d;
  if (a.norm() == 0.0) {
    d.zero = true;
    return d;
  }
  const CMat h = Complex(0.0, -1.0) * a;
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()));
  d.Qa = es.eigenvectors();
  d.mu = es.eigenvalues();
  return d;
}

inline CMat retract(const SkewDirection& d, double s, const CMat& u) {
  if (d.zero) return u;
  const Eigen::Index n = d.mu.size();
  Eigen::VectorXcd phases(n);
  for (Eigen::Index j = 0; j < n; ++j)
    phases(j) = std::polar(1.0, -s * d.mu(j));
  return d.Qa * phases.asDiagonal() * d.Qa.adjoint() * u;
}

struct RestartOutcome {
  CMat U, V;
  double f = std::numeric_limits<double>::infinity();
  long iters = 0;
  int target_index = -1;
  bool success = false;
};

inline RestartOutcome run_restart(
    const CMat& x, const CMat& y, const CMat& t, int index,
    const SolveOptions& opts, const std::vector<BranchTarget>& targets,
    const std::vector<std::pair<CMat, CMat>>& warm) {
  const Eigen::Index n = x.rows();
  RestartOutcome out;
  const std::size_t idx = static_cast<std::size_t>(index);
  if (idx < warm.size()) {
    out.U = warm[idx].first;
    out.V = warm[idx].second;
  } else if (idx == warm.size()) {
    out.U = CMat::Identity(n, n);
    out.V = CMat::Identity(n, n);
  } else {
    out.U = random_unitary(n, Rng::derive(opts.seed, 2 * idx)).mat();
    out.V = random_unitary(n, Rng::derive(opts.seed, 2 * idx + 1)).mat();
  }

  RVec target_asc;
  if (opts.use_branch_targets && !targets.empty()) {
    out.target_index = index % static_cast<int>(targets.size());
    const auto& vals =
        targets[static_cast<std::size_t>(out.target_index)].spectrum.values();
    target_asc.resize(n);
    for (Eigen::Index j = 0; j < n; ++j)
      target_asc(j) = vals[static_cast<std::size_t>(n - 1 - j)];
  }

  Eval cur;
  evaluate(x, y, t, out.U, out.V, cur);

  bool penalty_mode = out.target_index >= 0;
  const long penalty_budget =
      penalty_mode ? std::max(50L, static_cast<long>(opts.max_iters) / 4) : 0;

  // Nonmonotone descent: Barzilai-Borwein trial steps safeguarded by a
  // backtracking Armijo test against the worst of the recent accepted
  // values. The best defect seen is kept so a nonmonotone excursion can
  // never degrade the returned point.
  double step = opts.initial_step;
  std::array<double, 10> recent{};
  std::size_t recent_n = 0, recent_pos = 0;
  CMat gu_prev, gv_prev;
  double s_prev = 0.0, gprev2 = 0.0;
  bool have_prev = false;
  const auto reset_phase = [&] {
    step = opts.initial_step;
    recent_n = recent_pos = 0;
    have_prev = false;
  };
  double best_f = cur.f;
  CMat best_u = out.U, best_v = out.V;

  while (out.iters < opts.max_iters) {
    if (penalty_mode &&
        (spectral_value(cur, target_asc) <= 1e-14 ||
         out.iters >= penalty_budget)) {
      penalty_mode = false;
      reset_phase();
    }
    if (!penalty_mode && best_f <= opts.residual_target) break;

    const double value =
        penalty_mode ? spectral_value(cur, target_asc) : cur.f;
    const CMat g =
        penalty_mode ? spectral_dual(cur, target_asc) : defect_dual(t, cur);
    const CMat grad_u = orbit_gradient(g, out.U * x * out.U.adjoint());
    const CMat grad_v = orbit_gradient(g, out.V * y * out.V.adjoint());
    const double g2 = grad_u.squaredNorm() + grad_v.squaredNorm();
    if (std::sqrt(g2) <= opts.grad_tol) {
      if (penalty_mode) {  // spectral phase stationary; move on
        penalty_mode = false;
        reset_phase();
        continue;
      }
      break;
    }

    double reference = value;
    for (std::size_t j = 0; j < recent_n; ++j)
      reference = std::max(reference, recent[j]);

    double s = step;
    if (have_prev) {
      const double den =
          -(gu_prev.conjugate().cwiseProduct(grad_u - gu_prev)).sum().real() -
          (gv_prev.conjugate().cwiseProduct(grad_v - gv_prev)).sum().real();
      const double bb = s_prev * gprev2 / den;
      if (std::isfinite(bb) && bb > 0.0)
        s = std::clamp(bb, 1e-12, 1e3);
    }

    const SkewDirection du = factor_skew(grad_u);
    const SkewDirection dv = factor_skew(grad_v);
    bool accepted = false;
    Eval next;
    for (int bt = 0; bt < 45; ++bt) {
      const CMat u_next = retract(du, s, out.U);
      const CMat v_next = retract(dv, s, out.V);
      evaluate(x, y, t, u_next, v_next, next);
      const double next_value =
          penalty_mode ? spectral_value(next, target_asc) : next.f;
      if (next_value <= reference - opts.armijo_c * s * g2) {
        out.U = u_next;
        out.V = v_next;
        cur = next;
        recent[recent_pos] = next_value;
        recent_pos = (recent_pos + 1) % recent.size();
        recent_n = std::min(recent_n + 1, recent.size());
        gu_prev = grad_u;
        gv_prev = grad_v;
        gprev2 = g2;
        s_prev = s;
        have_prev = true;
        accepted = true;
        break;
      }
      s *= opts.shrink;
    }
    ++out.iters;
    if (!accepted) {
      if (penalty_mode) {  // stalled spectral phase; try the defect anyway
        penalty_mode = false;
        reset_phase();
        continue;
      }
      break;
    }
    if (cur.f < best_f) {
      best_f = cur.f;
      best_u = out.U;
      best_v = out.V;
    }
    step = std::min(2.0 * s, 1.0);
  }

  out.U = best_u;
  out.V = best_v;
  out.f = best_f;
  out.success = best_f <= opts.residual_target;
  return out;
}

}  // namespace detail

/// Squared-Frobenius defect of the identity at (U, V).
inline double objective(const HermitianMatrix& x, const HermitianMatrix& y,
                        const UnitaryMatrix& u, const UnitaryMatrix& v) {
  detail::require_same_dim(x, y);
  if (u.dim() != x.dim() || v.dim() != x.dim())
    throw DimensionMismatch("objective: unitary dimensions differ from X");
  const CMat t = unitary_exp(x).mat() * unitary_exp(y).mat();
  detail::Eval e;
  detail::evaluate(x.mat(), y.mat(), t, u.mat(), v.mat(), e);
  return e.f;
}

/// Riemannian gradient of the defect under perturbations
/// U(s) = e^{sA}U, V(s) = e^{sB}V; returns the skew-Hermitian pair (A, B)
/// of steepest ascent.
inline std::pair<CMat, CMat> gradient(const HermitianMatrix& x,
                                      const HermitianMatrix& y,
                                      const UnitaryMatrix& u,
                                      const UnitaryMatrix& v) {
  detail::require_same_dim(x, y);
  if (u.dim() != x.dim() || v.dim() != x.dim())
    throw DimensionMismatch("gradient: unitary dimensions differ from X");
  const CMat t = unitary_exp(x).mat() * unitary_exp(y).mat();
  detail::Eval e;
  detail::evaluate(x.mat(), y.mat(), t, u.mat(), v.mat(), e);
  const CMat g = detail::defect_dual(t, e);
  return {detail::orbit_gradient(g, u.mat() * x.mat() * u.mat().adjoint()),
          detail::orbit_gradient(g, v.mat() * y.mat() * v.mat().adjoint())};
}

/// Candidate exponent spectra: principal-branch eigenphases shifted by
/// 2*pi integer vectors that keep the trace identity exact, sorted
/// non-increasing, filtered for feasibility against (lambda(X), lambda(Y)),
/// and ordered by distance from the principal spectrum. An empty list is a
/// legal return; the solver then runs unguided.
inline std::vector<BranchTarget> branch_targets(const HermitianMatrix& x,
                                                const HermitianMatrix& y,
                                                int limit, int m_max = 1,
                                                int horn_cap = kHornCap) {
  detail::require_same_dim(x, y);
  if (limit < 1) throw InvalidArgument("branch_targets: limit must be >= 1");
  const Eigen::Index n = x.dim();
  const CMat t = unitary_exp(x).mat() * unitary_exp(y).mat();
  const HermitianMatrix principal = principal_log_unitary(UnitaryMatrix(t));
  const Spectrum gamma0 = spectrum_of(principal);

  const double trace_sum = x.trace_real() + y.trace_real();
  const double shift_exact =
      (trace_sum - gamma0.sum()) / (2.0 * kPi);
  const long shift_total = std::lround(shift_exact);
  if (std::abs(2.0 * kPi * (shift_exact - static_cast<double>(shift_total))) >
      1e-8)
    return {};
  if (n > 16 || std::abs(shift_total) > static_cast<long>(n) * m_max)
    return {};

  std::optional<Spectrum> lam_x, lam_y;
  if (n <= horn_cap) {
    lam_x = spectrum_of(x);
    lam_y = spectrum_of(y);
  }

  std::vector<BranchTarget> found;
  std::vector<int> m(static_cast<std::size_t>(n), 0);
  const auto emit = [&]() {
    std::vector<double> shifted(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j)
      shifted[static_cast<std::size_t>(j)] =
          gamma0[static_cast<std::size_t>(j)] +
          2.0 * kPi * m[static_cast<std::size_t>(j)];
    Spectrum gamma = Spectrum::sorted(std::move(shifted));
    if (lam_x &&
        !check_horn(*lam_x, *lam_y, gamma, 1e-9, horn_cap).feasible)
      return;
    double dist2 = 0.0;
    for (std::size_t j = 0; j < gamma.size(); ++j) {
      const double d = gamma[j] - gamma0[j];
      dist2 += d * d;
    }
    for (const auto& seen : found) {  // drop duplicate spectra
      double gap = 0.0;
      for (std::size_t j = 0; j < gamma.size(); ++j)
        gap = std::max(gap, std::abs(gamma[j] - seen.spectrum[j]));
      if (gap <= 1e-12) return;
    }
    found.push_back(BranchTarget{std::move(gamma), m, std::sqrt(dist2)});
  };
  // Depth-first over shift vectors with the running-sum window pruned.
  const auto enumerate = [&](auto&& self, Eigen::Index pos, long sum) -> void {
    const long left = n - pos;
    if (pos == n) {
      if (sum == shift_total) emit();
      return;
    }
    for (int mj = -m_max; mj <= m_max; ++mj) {
      const long next = sum + mj;
      if (next - (left - 1) * m_max > shift_total) continue;
      if (next + (left - 1) * m_max < shift_total) continue;
      m[static_cast<std::size_t>(pos)] = mj;
      self(self, pos + 1, next);
    }
  };
  enumerate(enumerate, 0, 0);

  std::stable_sort(found.begin(), found.end(),
                   [](const BranchTarget& a, const BranchTarget& b) {
                     return a.distance < b.distance;
                   });
  if (static_cast<int>(found.size()) > limit)
    found.erase(found.begin() + limit, found.end());
  return found;
}

/// Multi-start descent over U(n) x U(n). Restarts run in waves of
/// `threads` and commit in index order, so the outcome is a pure function
/// of (inputs, options) regardless of parallel schedule. Warm-start pairs,
/// when given, occupy the leading restart indices, followed by the
/// identity start and seeded Haar starts.
inline SolveReport solve(const HermitianMatrix& x, const HermitianMatrix& y,
                         const SolveOptions& opts, int threads = 1,
                         const std::vector<std::pair<CMat, CMat>>& warm = {}) {
  opts.validate();
  detail::require_same_dim(x, y);
  if (threads < 1) throw InvalidArgument("solve: threads must be >= 1");
  const Eigen::Index n = x.dim();
  const CMat t = unitary_exp(x).mat() * unitary_exp(y).mat();

  std::vector<BranchTarget> targets;
  if (opts.use_branch_targets)
    targets = branch_targets(x, y, opts.branch_limit, opts.m_max);

  std::vector<detail::RestartOutcome> results(
      static_cast<std::size_t>(opts.restarts));
  int winner = -1;
  int executed = 0;
  for (int wave = 0; wave < opts.restarts && winner < 0; wave += threads) {
    const int wave_end = std::min(opts.restarts, wave + threads);
    if (threads == 1) {
      results[static_cast<std::size_t>(wave)] = detail::run_restart(
          x.mat(), y.mat(), t, wave, opts, targets, warm);
    } else {
      std::vector<std::thread> pool;
      for (int idx = wave; idx < wave_end; ++idx)
        pool.emplace_back([&, idx] {
          results[static_cast<std::size_t>(idx)] = detail::run_restart(
              x.mat(), y.mat(), t, idx, opts, targets, warm);
        });
      for (auto& th : pool) th.join();
    }
    executed = wave_end;
    for (int idx = wave; idx < wave_end; ++idx)
      if (results[static_cast<std::size_t>(idx)].success) {
        winner = idx;
        break;
      }
  }

  int best = winner;
  if (best < 0) {
    best = 0;
    for (int idx = 1; idx < executed; ++idx)
      if (results[static_cast<std::size_t>(idx)].f <
          results[static_cast<std::size_t>(best)].f)
        best = idx;
  }
  const detail::RestartOutcome& win = results[static_cast<std::size_t>(best)];

  SolveReport report{UnitaryMatrix(win.U), UnitaryMatrix(win.V),
                     HermitianMatrix(win.U * x.mat() * win.U.adjoint() +
                                     win.V * y.mat() * win.V.adjoint())};
  const CMat defect = t - unitary_exp(report.Z).mat();
  report.residual = defect.norm();
  report.residual_operator = operator_norm(defect);
  report.iterations = win.iters;
  report.restarts_used = winner >= 0 ? winner + 1 : executed;
  report.success = win.success;
  if (win.target_index >= 0)
    report.branch_shift =
        targets[static_cast<std::size_t>(win.target_index)].shift;
  if (n <= kHornCap)
    report.horn_certificate = check_horn(spectrum_of(x), spectrum_of(y),
                                         spectrum_of(report.Z), 1e-9);
  return report;
}

struct VerifyResult {
  double residual = 0.0;
  bool ok = false;
  std::optional<HornCertificate> certificate;
};

/// Recomputes the identity's defect for given unitaries; no search.
inline VerifyResult verify(const HermitianMatrix& x, const HermitianMatrix& y,
                           const UnitaryMatrix& u, const UnitaryMatrix& v,
                           double tol) {
  detail::require_same_dim(x, y);
  if (u.dim() != x.dim() || v.dim() != x.dim())
    throw DimensionMismatch("verify: unitary dimensions differ from X");
  const CMat t = unitary_exp(x).mat() * unitary_exp(y).mat();
  const HermitianMatrix z(u.mat() * x.mat() * u.mat().adjoint() +
                          v.mat() * y.mat() * v.mat().adjoint());
  VerifyResult r;
  r.residual = (t - unitary_exp(z).mat()).norm();
  r.ok = r.residual <= tol;
  if (x.dim() <= kHornCap)
    r.certificate =
        check_horn(spectrum_of(x), spectrum_of(y), spectrum_of(z), tol);
  return r;
}

/// Zero-padded block embedding used by the doubled-space variant.
inline HermitianMatrix dilate(const HermitianMatrix& x) {
  const Eigen::Index n = x.dim();
  CMat big = CMat::Zero(2 * n, 2 * n);
  big.topLeftCorner(n, n) = x.mat();
  return HermitianMatrix(big);
}

/// Runs the solve on the zero-padded 2n-dimensional embeddings; useful
/// when the undilated search stalls.
inline SolveReport dilate_and_solve(const HermitianMatrix& x,
                                    const HermitianMatrix& y,
                                    const SolveOptions& opts,
                                    int threads = 1) {
  SolveReport report = solve(dilate(x), dilate(y), opts, threads);
  report.dilated = true;
  return report;
}

}  // namespace tlab
