#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinflow/transport_constraint.hpp"

namespace spinflow {

// Closed-loop controls for one flow run. A non-positive lambda means
// "measure half the spectral separation of the initial map" (the default
// threshold policy); a positive value is used as-is.
struct FlowConfig {
  double alpha = 1.0;
  double dt = 1e-3;
  double t_max = 1.0;
  int max_steps = 1000;
  double lambda = 0.0;
  bool reproject = true;
  double tangency_tol = 1e-9;
  double convergence_eps = 1e-8;
  double gradient_bound = 100.0;
  DiracBlock kernel_block = DiracBlock::holomorphic;
  SpinStructure spin;
};

enum class EventKind { kernel_jump, converged, max_steps, tube_exit, gradient_blowup };
const char* to_string(EventKind kind);

struct FlowEvent {
  EventKind kind;
  double t;
  std::string note;
};

struct FlowRecord {
  double t = 0.0;
  double energy = 0.0;
  double energy_alpha = 0.0;
  double diss_residual = 0.0;  // one-step defect of the energy identity
  int kernel_dim = 0;
  double gap = 0.0;
  double el_residual = 0.0;
  int degree = 0;
};

struct ConstraintDiag {
  double t = 0.0;
  double psi_bar_norm = 0.0;
  int kernel_dim = 0;
  double gap = 0.0;
};

struct FlowTrace {
  std::vector<FlowRecord> records;
  std::vector<FlowEvent> events;
  std::vector<ConstraintDiag> constraint_diags;
};

// Raw state: map values are kept as a plain matrix so that runs with
// reprojection disabled can drift off the manifold without violating the
// MapField invariant; validated views are built on demand.
struct FlowState {
  double t = 0.0;
  Eigen::MatrixXd u;
  TwistedSpinorField psi;
  bool has_spinor = false;
  double diss_residual = 0.0;
  int kernel_dim = 0;
  double gap = 0.0;
  double psi_bar_norm = 1.0;
};

// ---------------------------------------------------------------------------
// Term evaluators (shared by the engine, the verification suite and tests).

// F1 = -(projector hessian) contracted with <grad u, grad u>; the ambient
// mean-curvature correction that keeps the tension field tangential.
Eigen::MatrixXd f1_term(const SpectralKit& kit, const MapField& u);

// F2: the spinor back-reaction, real-valued ambient field. psi may be null
// (treated as zero).
Eigen::MatrixXd f2_term(const SpectralKit& kit, const MapField& u, const TwistedSpinorField& psi);

// Right-hand side of the regularized flow, as the exact gradient of the
// discrete functional in the metric weighted by alpha (1+|du|^2)^(alpha-1):
// Pi [ sum_b D_b(w D_b u) / w - S / (alpha w) ] with w = (1+|du|^2)^(alpha-1)
// and S the spinor-coupling term. Pointwise Leibniz expansions (f1_term,
// f2_term) are continuum-equivalent but not exact under spectral
// differentiation; using them here would bias the energy ledger.
Eigen::MatrixXd alpha_rhs(const SpectralKit& kit, const MapField& u,
                          const TwistedSpinorField* psi, double alpha);

double energy(const SpectralKit& kit, const MapField& u);
double energy_alpha(const SpectralKit& kit, const MapField& u, double alpha);

// Full functional: energy_alpha plus the (real) spinor pairing 1/2 <psi, D psi>.
double lagrangian(const SpectralKit& kit, const MapField& u, const TwistedSpinorField& psi,
                  double alpha);

// L2 norm of alpha_rhs; the convergence monitor.
double el_residual(const SpectralKit& kit, const MapField& u, const TwistedSpinorField* psi,
                   double alpha);

// Residual of the discrete energy identity accumulated over the whole trace.
double dissipation_check(const FlowTrace& trace);

// Signed mapping degree via the pulled-back normalized area form of the
// two-dimensional target; defect (distance to the nearest integer) optionally
// reported, above 0.1 it raises DegenerateDegree.
int degree(const SpectralKit& kit, const MapField& u, double* defect = nullptr);

// ---------------------------------------------------------------------------
// Initial data utilities.

// Linear wrap torus -> Clifford torus with winding matrix w and angle offsets;
// totally geodesic, hence a discrete fixed point of the harmonic flow.
MapField wrap_map(const TorusDomain& dom, std::shared_ptr<const EmbeddedTarget> torus,
                  const Eigen::Matrix2i& w, const Eigen::Vector2d& phase = Eigen::Vector2d::Zero());

// Closed-form Dirichlet energy of wrap_map.
double wrap_energy(const TorusDomain& dom, const CliffordTorus& torus, const Eigen::Matrix2i& w);

// Band-limited tangential perturbation followed by reprojection; modes with
// |k| <= band per axis, deterministic in the seed, sup-norm of the ambient
// displacement field equal to amplitude before projection.
MapField perturb_map(const MapField& u, double amplitude, std::uint64_t seed, int band = 2);

// Pick one L2-normalized section of the near-zero subspace (ascending |lambda|
// order within the cluster).
TwistedSpinorField kernel_spinor(TwistedDiracOperator& op, DiracBlock block, double threshold,
                                 int index = 0);

// ---------------------------------------------------------------------------

// IMEX integrator: implicit spectral Laplacian, explicit remainder, optional
// nearest-point reprojection, then the constraint-spinor re-solve from the
// fixed anchors (u0, psi0).
class FlowEngine {
 public:
  FlowEngine(const TorusDomain& dom, std::shared_ptr<const EmbeddedTarget> target,
             const FlowConfig& cfg);

  // Resolves the threshold policy, validates the initial kernel cluster when
  // a spinor is present, and normalizes the anchor.
  FlowState initial_state(const MapField& u0, const TwistedSpinorField* psi0);

  // One IMEX update. Throws TubeExit when the update leaves the tubular
  // neighborhood, AmbiguousCluster / DegenerateProjection from the
  // constraint solve.
  FlowState step(const FlowState& state);

  // final_state, when given, receives the last accepted state of the run.
  FlowTrace run(const MapField& u0, const TwistedSpinorField* psi0,
                FlowState* final_state = nullptr);

  double threshold() const { return lambda_; }
  const SpectralKit& kit() const { return kit_; }
  MapField map_view(const FlowState& state) const;

 private:
  FlowRecord snapshot(const FlowState& state);

  TorusDomain dom_;
  std::shared_ptr<const EmbeddedTarget> target_;
  FlowConfig cfg_;
  SpectralKit kit_;
  double lambda_ = 0.0;
  double last_sup_grad_ = 0.0;
  Eigen::VectorXd freq_sq_;
  // constraint anchors, fixed across the run
  std::unique_ptr<MapField> anchor_u_;
  TwistedSpinorField anchor_psi_;
};

}  // namespace spinflow
