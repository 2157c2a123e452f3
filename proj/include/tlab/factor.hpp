#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tlab/horn.hpp"
#include "tlab/linalg.hpp"
#include "tlab/matrix.hpp"
#include "tlab/rng.hpp"
#include "tlab/step_function.hpp"
#include "tlab/thompson.hpp"
#include "tlab/tolerances.hpp"

namespace tlab {

/// Exact fraction for interval endpoints; always normalized, positive
/// denominator.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d) : num(n), den(d) {
    if (den == 0) throw InvalidArgument("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num * b.den < b.num * a.den;
  }
  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
};

/// Union of the level-n blocks selected by an index set:
/// sigma = union over i in I of [(i-1)/n, i/n). Endpoints stay rational;
/// adjacent blocks are merged.
struct SigmaSet {
  int n = 1;
  std::vector<int> indices;                           // sorted subset of 1..n
  std::vector<std::pair<Rational, Rational>> intervals;

  Rational total_length() const {
    return Rational(static_cast<long long>(indices.size()), n);
  }
};

inline SigmaSet sigma_set(std::vector<int> indices, int n) {
  if (n < 1) throw InvalidArgument("sigma_set: level must be >= 1");
  std::sort(indices.begin(), indices.end());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] < 1 || indices[j] > n)
      throw InvalidArgument("sigma_set: index " + std::to_string(indices[j]) +
                            " outside 1.." + std::to_string(n));
    if (j > 0 && indices[j] == indices[j - 1])
      throw InvalidArgument("sigma_set: duplicate index");
  }
  SigmaSet s;
  s.n = n;
  s.indices = std::move(indices);
  for (std::size_t j = 0; j < s.indices.size(); ++j) {
    const Rational lo(s.indices[j] - 1, n);
    const Rational hi(s.indices[j], n);
    if (!s.intervals.empty() && s.intervals.back().second == lo)
      s.intervals.back().second = hi;  // merge adjacent blocks
    else
      s.intervals.emplace_back(lo, hi);
  }
  return s;
}

/// Integral of a step function over a sigma set: piecewise products of
/// interval overlaps and values, compensated summation.
inline double integrate_over(const StepFunction& f, const SigmaSet& s) {
  double sum = 0.0, comp = 0.0;
  const auto& bp = f.breakpoints();
  for (const auto& iv : s.intervals) {
    const double lo = iv.first.value();
    const double hi = iv.second.value();
    for (std::size_t j = 0; j < f.pieces(); ++j) {
      const double a = std::max(lo, bp[j]);
      const double b = std::min(hi, j + 1 < bp.size() ? bp[j + 1] : 1.0);
      if (b <= a) continue;
      const double term = f.values()[j] * (b - a);
      const double t = sum + term;
      comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term
                                              : (term - t) + sum;
      sum = t;
    }
  }
  return sum + comp;
}

struct IntegralHornViolation {
  HornTriple triple;  // carries its level n
  double slack;
};

struct IntegralHornCertificate {
  bool feasible = true;
  double trace_gap = 0.0;  // integral of u + integral of v - integral of w
  std::vector<IntegralHornViolation> violations;
  long checked_count = 0;
};

/// Function-level Horn system: the total-integral equality plus, for every
/// level n <= max_n and every admissible triple, the block-set inequality
/// integral_{sigma_I} u + integral_{sigma_J} v >= integral_{sigma_K} w.
inline IntegralHornCertificate integral_horn_check(
    const StepFunction& u, const StepFunction& v, const StepFunction& w,
    int max_n, double tol = default_tol().horn, int cap = kHornCap) {
  if (!u.nonincreasing() || !v.nonincreasing() || !w.nonincreasing())
    throw InvalidArgument("integral_horn_check: inputs must be non-increasing");
  if (max_n < 1)
    throw InvalidArgument("integral_horn_check: max_n must be >= 1");

  IntegralHornCertificate cert;
  cert.trace_gap = u.integral() + v.integral() - w.integral();
  cert.feasible = std::abs(cert.trace_gap) <= tol;

  for (int n = 1; n <= max_n; ++n) {
    for (const HornTriple& t : gen_all(n, cap)) {
      const double lhs = integrate_over(u, sigma_set(t.I, n)) +
                         integrate_over(v, sigma_set(t.J, n));
      const double rhs = integrate_over(w, sigma_set(t.K, n));
      const double slack = lhs - rhs;
      ++cert.checked_count;
      if (slack < -tol) {
        cert.feasible = false;
        cert.violations.push_back({t, slack});
      }
    }
  }
  return cert;
}

/// Midpoint sampling of a bounded function onto an m x m diagonal matrix:
/// entries lambda((j - 1/2)/m), j = 1..m.
inline HermitianMatrix discretize(const StepFunction& lambda, int m) {
  if (m < 1) throw InvalidArgument("discretize: size must be >= 1");
  CMat d = CMat::Zero(m, m);
  for (int j = 1; j <= m; ++j)
    d(j - 1, j - 1) = lambda((j - 0.5) / static_cast<double>(m));
  return HermitianMatrix(d);
}

struct FactorOptions {
  int moments = 5;        // circle moments z^k, k = 1..moments
  int max_n = 4;          // integral Horn depth on the limit candidate
  std::uint64_t seed = 0; // de-commuting conjugation seed
  bool decommute = true;  // conjugate samples by seeded unitaries
  SolveOptions solve;     // per-size identity solve
  int threads = 1;
};

struct FactorLevel {
  int m;
  bool solver_success;
  double residual;
  long iterations;
  StepFunction lambda_d;  // eigenvalue function of U A U* + V B V*
  StepFunction lambda_c;  // eigenvalue function of the principal log
  std::vector<double> moment_gaps;  // |moment_k(lambda_c) - moment_k(f)|
  bool distributions_match = false;
  std::optional<StepFunction> lambda_c_bar;
};

struct FactorReport {
  std::vector<FactorLevel> levels;
  StepFunction f;                   // final-level lambda_d
  std::vector<double> cauchy_gaps;  // sup-gap of consecutive lambda_d on the grid
  IntegralHornCertificate integral_horn;
};

namespace detail {

inline std::complex<double> circle_moment(const StepFunction& f, int k) {
  std::complex<double> s(0.0, 0.0);
  for (std::size_t j = 0; j < f.pieces(); ++j)
    s += f.width(j) * std::polar(1.0, k * f.values()[j]);
  return s;
}

}  // namespace detail

/// Finite-size shadow of the factor-level statement: per size, sample both
/// functions, optionally de-commute by seeded conjugation, solve the
/// identity, and track the eigenvalue functions of the combined exponent
/// and of the principal log. Convergence is reported as grid gaps between
/// consecutive exponent functions and as circle-moment gaps against the
/// final exponent function f; f also passes through the function-level
/// Horn system. Branch reduction of f against each lambda_c is attempted
/// whenever their circle distributions match; a mismatch is recorded, not
/// fatal.
inline FactorReport factor_pipeline(const StepFunction& lambda_a,
                                    const StepFunction& lambda_b,
                                    const std::vector<int>& sizes,
                                    const FactorOptions& opts = FactorOptions{}) {
  if (sizes.empty()) throw InvalidArgument("factor_pipeline: no sizes given");
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (sizes[j] < 1)
      throw InvalidArgument("factor_pipeline: sizes must be >= 1");
    if (j > 0 && sizes[j] <= sizes[j - 1])
      throw InvalidArgument("factor_pipeline: sizes must be increasing");
  }
  if (opts.moments < 1)
    throw InvalidArgument("factor_pipeline: moments must be >= 1");

  std::vector<FactorLevel> levels;
  levels.reserve(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const int m = sizes[i];
    HermitianMatrix a = discretize(lambda_a, m);
    HermitianMatrix b = discretize(lambda_b, m);
    if (opts.decommute) {
      a = conjugate(random_unitary(m, Rng::derive(opts.seed, 2 * i)), a);
      b = conjugate(random_unitary(m, Rng::derive(opts.seed, 2 * i + 1)), b);
    }
    const SolveReport rep = solve(a, b, opts.solve, opts.threads);
    const HermitianMatrix d(
        rep.U.mat() * a.mat() * rep.U.mat().adjoint() +
        rep.V.mat() * b.mat() * rep.V.mat().adjoint());
    const UnitaryMatrix product(unitary_exp(a).mat() * unitary_exp(b).mat());
    const HermitianMatrix c = principal_log_unitary(product);
    levels.push_back(FactorLevel{m, rep.success, rep.residual, rep.iterations,
                                 step_lambda(d), step_lambda(c),
                                 {}, false, std::nullopt});
  }

  FactorReport report{std::move(levels), StepFunction::constant(0.0), {}, {}};
  report.f = report.levels.back().lambda_d;

  for (std::size_t i = 0; i + 1 < report.levels.size(); ++i) {
    double gap = 0.0;
    for (int g = 0; g < 256; ++g) {
      const double t = (g + 0.5) / 256.0;
      gap = std::max(gap, std::abs(report.levels[i].lambda_d(t) -
                                   report.levels[i + 1].lambda_d(t)));
    }
    report.cauchy_gaps.push_back(gap);
  }

  for (FactorLevel& lvl : report.levels) {
    lvl.moment_gaps.resize(static_cast<std::size_t>(opts.moments));
    for (int k = 1; k <= opts.moments; ++k)
      lvl.moment_gaps[static_cast<std::size_t>(k - 1)] =
          std::abs(detail::circle_moment(lvl.lambda_c, k) -
                   detail::circle_moment(report.f, k));
    try {
      lvl.lambda_c_bar = branch_reduce(report.f, lvl.lambda_c);
      lvl.distributions_match = true;
    } catch (const DistributionMismatch&) {
      lvl.distributions_match = false;
    }
  }

  report.integral_horn =
      integral_horn_check(lambda_a, lambda_b, report.f, opts.max_n);
  return report;
}

}  // namespace tlab
