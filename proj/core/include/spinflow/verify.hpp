#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinflow/flow.hpp"

namespace spinflow {

struct CheckResult {
  std::string group;
  std::string name;
  bool pass = false;
  std::string detail;
};

// The self-verification suite: one group per library module, one check per
// documented invariant. inject_failure appends a deliberately failing check
// (used to exercise the nonzero exit path end to end).
std::vector<CheckResult> run_verification(bool inject_failure = false);

// Deterministic random data shared by the suite and the test binaries.

// Random spinor projected to the tangent bundle along u, L2-normalized.
// band < 0 draws site-wise white noise; band >= 0 restricts every ambient
// component to Fourier modes |k| <= band before projecting (pointwise
// identities that involve products need spectrally resolved probes).
TwistedSpinorField random_tangential_field(const MapField& u, const SpinStructure& spin,
                                           std::uint64_t seed, int band = -1);

// Band-limited ambient field projected pointwise to the tangent spaces
// (a smooth variation direction for gradient checks).
Eigen::MatrixXd random_tangent_variation(const MapField& u, int band, std::uint64_t seed);

// alpha_rhs scaled pointwise by the energy weight alpha (1 + |du|^2)^(alpha-1);
// the exact discrete L2 gradient of the functional, used by variation checks.
Eigen::MatrixXd weighted_alpha_rhs(const SpectralKit& kit, const MapField& u,
                                   const TwistedSpinorField* psi, double alpha);

}  // namespace spinflow
