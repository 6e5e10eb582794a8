#pragma once

#include "spinflow/twisted_dirac.hpp"

namespace spinflow {

// Site-wise parallel transport between two maps over the same domain and
// target. Valid only when every site pair is closer than the target's
// transport radius (< half the injectivity radius); a single bad site
// invalidates the whole context.
struct TransportContext {
  MapField source;
  MapField dest;
  std::vector<Eigen::MatrixXd> maps;  // per-site tangent transport, kills normals
  double max_site_distance = 0.0;
  double radius = 0.0;
};

TransportContext make_transport(const MapField& u, const MapField& v);

// Transport acting on the target factor, identity on the spinor factor.
// Site-wise isometry of tangential sections.
TwistedSpinorField transport_spinor(const TransportContext& ctx, const TwistedSpinorField& psi,
                                    double tangency_tol = 1e-6);

// Sup-norm holonomy defect of the closed triangle u0 -> u -> v -> u0 applied
// to a tangent (possibly complexified) field z over u0; linear in the
// separation of the maps on curved targets, exactly zero on flat ones.
double triple_transport_defect(const MapField& u0, const MapField& u, const MapField& v,
                               const Eigen::MatrixXcd& z);

// Defect of transporting the holomorphic Dirac operator of u onto sections
// over v, against the operator of v itself, on a deterministic band-limited
// probe set; paired with the ambient sup distance for scaling studies.
struct OperatorComparison {
  double defect = 0.0;
  double c0_distance = 0.0;
};
OperatorComparison operator_comparison_defect(const MapField& u, const MapField& v,
                                              const SpinStructure& spin, int probes = 8);

// The constraint-spinor construction: transport the anchor kernel spinor
// psi0 (over u0) to the current map, project onto the near-zero spectral
// subspace there, and normalize in L2.
struct ConstraintSpinor {
  TwistedSpinorField psi;      // L2-normalized
  double psi_bar_norm = 0.0;   // norm before normalization
  int kernel_dim = 0;
  double gap = 0.0;
  // Norm-bound bookkeeping: the construction is expected to keep
  // psi_bar_norm in [sqrt(1/2), 1]; the stronger sqrt(3/4) floor is logged
  // for comparison, neither violation is an error.
  bool weak_bound_violated = false;
  bool strong_bound_violated = false;
};

ConstraintSpinor constraint_spinor(const MapField& u0, const TwistedSpinorField& psi0,
                                   const MapField& ut, const SpinStructure& spin,
                                   double threshold, DiracBlock block);

}  // namespace spinflow
