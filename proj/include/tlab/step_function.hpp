#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tlab/errors.hpp"
#include "tlab/linalg.hpp"
#include "tlab/matrix.hpp"
#include "tlab/tolerances.hpp"

namespace tlab {

/// Right-continuous piecewise-constant function on [0,1): piece j carries
/// values()[j] on [breakpoints()[j], breakpoints()[j+1]).
class StepFunction {
 public:
  StepFunction(std::vector<double> breakpoints, std::vector<double> values)
      : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (breakpoints_.empty() || breakpoints_.size() != values_.size())
      throw InvalidArgument("StepFunction: need one value per breakpoint");
    if (breakpoints_.front() != 0.0)
      throw InvalidArgument("StepFunction: domain must start at 0");
    for (std::size_t j = 0; j < breakpoints_.size(); ++j) {
      if (!(breakpoints_[j] >= 0.0 && breakpoints_[j] < 1.0))
        throw InvalidArgument("StepFunction: breakpoints must lie in [0,1)");
      if (j > 0 && !(breakpoints_[j] > breakpoints_[j - 1]))
        throw InvalidArgument("StepFunction: breakpoints must be strictly increasing");
      if (!std::isfinite(values_[j]))
        throw InvalidArgument("StepFunction: values must be finite");
    }
    nonincreasing_ = true;
    for (std::size_t j = 1; j < values_.size(); ++j)
      if (values_[j] > values_[j - 1]) {
        nonincreasing_ = false;
        break;
      }
  }

  static StepFunction constant(double v) { return StepFunction({0.0}, {v}); }

  std::size_t pieces() const { return values_.size(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  bool nonincreasing() const { return nonincreasing_; }

  double width(std::size_t j) const {
    return (j + 1 < breakpoints_.size() ? breakpoints_[j + 1] : 1.0) -
           breakpoints_[j];
  }

  double operator()(double t) const {
    if (!(t >= 0.0 && t < 1.0))
      throw InvalidArgument("StepFunction: argument outside [0,1)");
    const auto it =
        std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
  }

  double integral() const {
    double s = 0.0;
    for (std::size_t j = 0; j < values_.size(); ++j) s += values_[j] * width(j);
    return s;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  bool nonincreasing_ = false;
};

/// Reduce an angle to the principal branch (-pi, pi]; odd multiples of pi
/// land on +pi.
inline double reduce_angle(double v) {
  const double k = std::ceil((v - kPi) / (2.0 * kPi));
  double r = v - 2.0 * kPi * k;
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

/// Eigenvalue step function: n equal-width pieces carrying the spectrum in
/// non-increasing order.
inline StepFunction step_lambda(const HermitianMatrix& m) {
  const Spectrum s = spectrum_of(m);
  const std::size_t n = s.size();
  std::vector<double> bp(n);
  for (std::size_t j = 0; j < n; ++j)
    bp[j] = static_cast<double>(j) / static_cast<double>(n);
  return StepFunction(std::move(bp), s.values());
}

/// Equimeasurable non-increasing rearrangement: pieces sorted by value
/// descending (stable), widths concatenated. The piece multiset is
/// preserved; no merging of equal-valued neighbours.
inline StepFunction decreasing_rearrangement(const StepFunction& f) {
  std::vector<std::pair<double, double>> pieces(f.pieces());
  for (std::size_t j = 0; j < f.pieces(); ++j)
    pieces[j] = {f.values()[j], f.width(j)};
  std::stable_sort(pieces.begin(), pieces.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> bp(pieces.size()), vals(pieces.size());
  double t = 0.0;
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    bp[j] = t;
    vals[j] = pieces[j].first;
    t += pieces[j].second;
  }
  return StepFunction(std::move(bp), std::move(vals));
}

namespace detail {

// Angular distance reduced into (0, 2*pi]; exact multiples of 2*pi map to
// 2*pi, so a full-circle arc covers everything.
inline double positive_angle(double d) {
  double r = std::fmod(d, 2.0 * kPi);
  if (r <= 0.0) r += 2.0 * kPi;
  return r;
}

inline bool arc_contains(double theta1, double theta2, double x) {
  return positive_angle(x - theta1) <= positive_angle(theta2 - theta1);
}

}  // namespace detail

/// Mass of {t : e^{if(t)} in the arc (theta1, theta2]} on the unit circle.
inline double circle_distribution(const StepFunction& f, double theta1,
                                  double theta2) {
  if (theta1 == theta2)
    throw InvalidArgument("circle_distribution: zero-length arc");
  double mass = 0.0;
  for (std::size_t j = 0; j < f.pieces(); ++j)
    if (detail::arc_contains(theta1, theta2, f.values()[j])) mass += f.width(j);
  return mass;
}

/// Verifies that f and g induce the same distribution on the unit circle.
/// Both distributions are atomic (step functions), so the masses of the
/// carried angles are compared directly: reduced angles are clustered
/// within tol (circularly, so dust on either side of +pi coincides) and
/// each cluster's total width per function must agree. Throws
/// DistributionMismatch with a witness arc isolating the offending atom.
inline void require_matching_distribution(const StepFunction& f,
                                          const StepFunction& g, double tol) {
  struct Atom {
    double angle, width;
    bool from_f;
  };
  std::vector<Atom> atoms;
  atoms.reserve(f.pieces() + g.pieces());
  for (std::size_t j = 0; j < f.pieces(); ++j)
    atoms.push_back({reduce_angle(f.values()[j]), f.width(j), true});
  for (std::size_t j = 0; j < g.pieces(); ++j)
    atoms.push_back({reduce_angle(g.values()[j]), g.width(j), false});
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.angle < b.angle; });

  struct Cluster {
    double low = 0.0, rep = 0.0;
    double mass_f = 0.0, mass_g = 0.0;
  };
  std::vector<Cluster> clusters;
  for (const Atom& a : atoms) {
    if (clusters.empty() || a.angle - clusters.back().rep > tol) {
      clusters.push_back(Cluster{a.angle, a.angle, 0.0, 0.0});
    }
    clusters.back().rep = a.angle;
    (a.from_f ? clusters.back().mass_f : clusters.back().mass_g) += a.width;
  }
  // Angles just above -pi and at +pi are the same circle point.
  if (clusters.size() >= 2 &&
      clusters.front().low + 2.0 * kPi - clusters.back().rep <= tol) {
    clusters.back().mass_f += clusters.front().mass_f;
    clusters.back().mass_g += clusters.front().mass_g;
    clusters.erase(clusters.begin());
  }

  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const double gap = clusters[i].mass_f - clusters[i].mass_g;
    if (std::abs(gap) > tol) {
      const double theta2 = clusters[i].rep;
      const double theta1 =
          i > 0 ? clusters[i - 1].rep : clusters.back().rep - 2.0 * kPi;
      std::ostringstream msg;
      msg << "distributions disagree on the arc (" << theta1 << ", " << theta2
          << "]: masses " << clusters[i].mass_f << " vs " << clusters[i].mass_g;
      throw DistributionMismatch(msg.str(), theta1, theta2, gap);
    }
  }
}

/// Branch reduction: returns g-bar with e^{i g-bar} = e^{if} pointwise,
/// values in [-pi, pi], and decreasing rearrangement equal to g. Pieces
/// where e^{if} = -1 are split between +pi and -pi, matching g's widths at
/// those values, with the +pi part allocated from the left.
inline StepFunction branch_reduce(const StepFunction& f, const StepFunction& g,
                                  const Tolerances& tol = default_tol()) {
  const double eps = tol.distribution;
  if (!g.nonincreasing())
    throw InvalidArgument("branch_reduce: g must be non-increasing");
  if (g.max_abs() > kPi + eps)
    throw InvalidArgument("branch_reduce: g must satisfy sup|g| <= pi");
  require_matching_distribution(f, g, eps);

  // Width budget for the +pi side of the e^{if} = -1 set.
  double plus_budget = 0.0;
  for (std::size_t j = 0; j < g.pieces(); ++j)
    if (std::abs(g.values()[j] - kPi) <= eps) plus_budget += g.width(j);

  std::vector<double> bp, vals;
  bp.reserve(f.pieces() + 1);
  vals.reserve(f.pieces() + 1);
  for (std::size_t j = 0; j < f.pieces(); ++j) {
    const double start = f.breakpoints()[j];
    const double w = f.width(j);
    const double r = reduce_angle(f.values()[j]);
    if (kPi - std::abs(r) <= eps) {
      if (plus_budget >= w - 1e-13) {
        bp.push_back(start);
        vals.push_back(kPi);
        plus_budget -= w;
      } else if (plus_budget > 1e-13) {
        bp.push_back(start);
        vals.push_back(kPi);
        bp.push_back(start + plus_budget);
        vals.push_back(-kPi);
        plus_budget = 0.0;
      } else {
        bp.push_back(start);
        vals.push_back(-kPi);
        plus_budget = 0.0;
      }
    } else {
      bp.push_back(start);
      vals.push_back(r);
    }
  }
  return StepFunction(std::move(bp), std::move(vals));
}

/// Pointwise comparison on the common breakpoint refinement.
inline bool approx_equal(const StepFunction& a, const StepFunction& b,
                         double tol) {
  std::vector<double> grid = a.breakpoints();
  grid.insert(grid.end(), b.breakpoints().begin(), b.breakpoints().end());
  grid.push_back(1.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    const double t = 0.5 * (grid[j] + grid[j + 1]);
    if (std::abs(a(t) - b(t)) > tol) return false;
  }
  return true;
}

}  // namespace tlab
