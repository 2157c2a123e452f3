#pragma once

namespace tlab {

/// Central numerical tolerance record. Every module reads its defaults from
/// here; call sites may override individual values through function
/// parameters, but the canonical thresholds live in this one place.
struct Tolerances {
  double hermiticity = 1e-12;        // accepted asymmetry after (M+M*)/2
  double unitarity = 1e-10;          // ||U*U - I||_F before re-orthonormalization
  double eig_reconstruct = 1e-10;    // ||Q D Q* - H||_F
  double log_roundtrip = 1e-9;       // ||e^{iZ} - W||_F for the principal log
  double branch_sensitive = 1e-12;   // |lambda + 1| flag threshold on the circle
  double horn = 1e-9;                // default Horn inequality slack tolerance
  double subspace_drop = 1e-10;      // rank-revealing drop threshold
  double distribution = 1e-12;       // circle-distribution matching
  double trace_match = 1e-8;         // branch-target trace congruence
};

inline const Tolerances& default_tol() {
  static const Tolerances t{};
  return t;
}

}  // namespace tlab
