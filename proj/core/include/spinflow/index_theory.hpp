#pragma once

#include <vector>

#include "spinflow/twisted_dirac.hpp"

namespace spinflow {

// Pullback of the holomorphic tangent bundle of a genus-g target under a
// degree-deg map CP^1 -> N, expressed in powers of the tautological bundle:
// first Chern class a * gamma with a = 2 deg (1 - g). Always even.
struct Cp1TwistData {
  int deg = 0;
  int genus = 0;  // >= 0

  int a() const { return 2 * deg * (1 - genus); }
};

// Complex dimension of the holomorphic sections of gamma^m over CP^1
// (gamma the tautological bundle, so gamma^m has degree -m).
int h0_dim(int m);

// dim_C of the kernel of the holomorphic twisted Dirac operator on CP^1:
// the two-term cohomology sum h0(a+1) + h0(1-a), which collapses to the
// closed form 2 |deg (genus - 1)|.
int cp1_kernel_dim(const Cp1TwistData& data);

// Z_2 quantity [dim_C / 2] mod 2; defined only for even kernel dimension.
int script_I(int dim_c_kernel);

// Dimension-based branches of the Clifford index in domain dimension m:
// m = 1 (mod 8) -> dim mod 2, m = 2 (mod 8) -> (dim / 2) mod 2 (dim must be
// even), m = 0, 4 (mod 8) -> Unsupported (characteristic-class branches),
// every other residue -> 0.
int index_I(int m, int dim_c_kernel);

// One sample of the kernel dimension along a homotopy. ambiguous marks
// samples where the near-zero cluster could not be separated at the given
// threshold; such samples carry kernel_dim = -1 and are skipped by the jump
// analysis.
struct FlowSample {
  double t = 0.0;
  int kernel_dim = 0;
  bool ambiguous = false;
};

struct FlowJump {
  double t_before = 0.0;
  double t_after = 0.0;
  int dim_before = 0;
  int dim_after = 0;
  bool even_change = false;
};

struct SpectralFlowReport {
  std::vector<FlowSample> samples;
  std::vector<FlowJump> jumps;
  bool quaternionic = false;   // target carries the antilinear structure
  bool all_jumps_even = true;  // vacuous without jumps
};

// Kernel dimension of the holomorphic block sampled along the site-wise
// geodesic homotopy from u0 to u1 at steps + 1 equispaced parameters.
// Requires every site pair within the injectivity radius (CutLocus).
SpectralFlowReport spectral_flow_family(const MapField& u0, const MapField& u1, int steps,
                                        double threshold, const SpinStructure& spin);

}  // namespace spinflow
