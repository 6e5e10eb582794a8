#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "spinflow/error.hpp"

namespace spinflow {

// Second-derivative tensor pi^A_{BC} of a nearest-point projection, stored as
// one q x q matrix per ambient output component A. Fully symmetric in (A,B,C)
// because the projection is the gradient of a scalar potential.
class HessianTensor {
public:
  explicit HessianTensor(int q) : comp_(static_cast<size_t>(q), Eigen::MatrixXd::Zero(q, q)) {}

  Eigen::MatrixXd& operator[](int a) { return comp_[static_cast<size_t>(a)]; }
  const Eigen::MatrixXd& operator[](int a) const { return comp_[static_cast<size_t>(a)]; }
  int ambient_dim() const { return static_cast<int>(comp_.size()); }

  // Contraction pi^A_{BC} X^B Y^C over (B,C); result indexed by A.
  Eigen::VectorXd contract(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

private:
  std::vector<Eigen::MatrixXd> comp_;
};

/**
 * Closed-form geometry of a compact submanifold N of R^q, exposed through its
 * tubular-neighborhood projection. All maps and spinors in the lab are stored
 * in ambient coordinates; this interface supplies the projection, its
 * derivatives, geodesics, parallel transport, curvature, and (when present)
 * the compatible complex and real structures.
 *
 * Conventions:
 *  - project() is defined on the tube dist(z, N) <= tube_radius() and errors
 *    with OutsideTube beyond it.
 *  - proj_jacobian at p in N is the orthogonal projector onto T_p N.
 *  - The second fundamental form satisfies II(X, Y) = pi^A_{BC} X^B Y^C at
 *    points of N (sphere check: II(X, X) = -<X,X> p).
 *  - parallel_transport(p, q) returns the q x q matrix that transports
 *    tangent vectors at p along the unique shortest geodesic to q and kills
 *    normal components.
 *  - complex_structure(p) ("i") and real_structure(p) ("j2") act on T_p N and
 *    vanish on the normal space; targets without them raise
 *    StructureUnavailable.
 */
class EmbeddedTarget {
public:
  virtual ~EmbeddedTarget() = default;

  virtual std::string name() const = 0;
  virtual int ambient_dim() const = 0;  // q
  virtual int dim() const = 0;          // n = dim N

  // Tubular radius delta with delta * weingarten_bound < 1.
  virtual double tube_radius() const = 0;
  // Uniform bound C on the Weingarten map (principal curvatures).
  virtual double weingarten_bound() const = 0;
  virtual double injectivity_radius() const = 0;
  // Transport radius epsilon with 2 epsilon < injectivity radius.
  double transport_radius() const { return 0.49 * injectivity_radius(); }

  // Unsigned ambient distance to N (no tube restriction).
  virtual double ambient_distance(const Eigen::VectorXd& z) const = 0;

  // Nearest-point projection; OutsideTube beyond the tubular radius.
  virtual Eigen::VectorXd project(const Eigen::VectorXd& z) const = 0;
  // d(project) at z in the tube; at z in N this is the tangent projector.
  virtual Eigen::MatrixXd proj_jacobian(const Eigen::VectorXd& z) const = 0;
  // Second derivative pi^A_{BC} at z in the tube.
  virtual HessianTensor proj_hessian(const Eigen::VectorXd& z) const = 0;

  // Constant-speed shortest geodesic with gamma(0)=p, gamma(1)=q.
  // CutLocus when d(p,q) reaches the injectivity radius.
  virtual Eigen::VectorXd geodesic(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                                   double t) const = 0;
  // Inverse exponential: tangent vector at p pointing to q, |log| = d(p,q).
  virtual Eigen::VectorXd log_map(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const = 0;
  virtual double geodesic_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const = 0;
  virtual Eigen::MatrixXd parallel_transport(const Eigen::VectorXd& p,
                                             const Eigen::VectorXd& q) const = 0;

  // Riemann tensor R(X,Y)Z at p (tangent inputs, tangent output).
  virtual Eigen::VectorXd riemann_curvature(const Eigen::VectorXd& p, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& y,
                                            const Eigen::VectorXd& z) const = 0;

  virtual bool has_complex_structure() const { return false; }
  virtual bool has_real_structure() const { return false; }
  // Parallel complex structure as a real matrix on T_p N (zero on normals).
  virtual Eigen::MatrixXd complex_structure(const Eigen::VectorXd& p) const;
  // Parallel real structure j2 on T_p N: j2^2 = 1, j2 i = -i j2.
  virtual Eigen::MatrixXd real_structure(const Eigen::VectorXd& p) const;

  // Orthonormal basis of T_p N as columns of a q x n matrix. Deterministic in
  // p; no smoothness in p is promised and none is needed (only site-wise
  // changes of basis are built from it).
  virtual Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& p) const = 0;

  // Orthogonal projector onto T_p N for p on N.
  Eigen::MatrixXd tangent_projector(const Eigen::VectorXd& p) const { return proj_jacobian(p); }

  bool on_manifold(const Eigen::VectorXd& z, double tol = 1e-10) const {
    return ambient_distance(z) <= tol;
  }

  void require_point(const Eigen::VectorXd& p, double tol = 1e-10) const;
  void require_tangent(const Eigen::VectorXd& p, const Eigen::VectorXd& v,
                       double tol = 1e-10) const;
};

// Round sphere of radius 1 in R^q (q >= 3). Kaehler structure i_p(X) = p x X
// exists only for q = 3; no parallel real structure exists.
class UnitSphere final : public EmbeddedTarget {
public:
  explicit UnitSphere(int q = 3);

  std::string name() const override { return "sphere"; }
  int ambient_dim() const override { return q_; }
  int dim() const override { return q_ - 1; }
  double tube_radius() const override { return 0.4; }
  double weingarten_bound() const override { return 1.0; }
  double injectivity_radius() const override;

  double ambient_distance(const Eigen::VectorXd& z) const override;
  Eigen::VectorXd project(const Eigen::VectorXd& z) const override;
  Eigen::MatrixXd proj_jacobian(const Eigen::VectorXd& z) const override;
  HessianTensor proj_hessian(const Eigen::VectorXd& z) const override;

  Eigen::VectorXd geodesic(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                           double t) const override;
  Eigen::VectorXd log_map(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const override;
  double geodesic_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd parallel_transport(const Eigen::VectorXd& p,
                                     const Eigen::VectorXd& q) const override;

  Eigen::VectorXd riemann_curvature(const Eigen::VectorXd& p, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& z) const override;

  bool has_complex_structure() const override { return q_ == 3; }
  Eigen::MatrixXd complex_structure(const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& p) const override;

private:
  int q_;
};

// Product of two circles of radii (r1, r2) in R^4 = R^2 x R^2: flat, Kaehler,
// and carrying the parallel real structure j2(t1) = t1, j2(t2) = -t2 in the
// angular frame.
class CliffordTorus final : public EmbeddedTarget {
public:
  CliffordTorus(double r1 = 1.0, double r2 = 1.0);

  std::string name() const override { return "clifford_torus"; }
  int ambient_dim() const override { return 4; }
  int dim() const override { return 2; }
  double tube_radius() const override { return 0.3 * std::min(r1_, r2_); }
  double weingarten_bound() const override { return 1.0 / std::min(r1_, r2_); }
  double injectivity_radius() const override;

  double ambient_distance(const Eigen::VectorXd& z) const override;
  Eigen::VectorXd project(const Eigen::VectorXd& z) const override;
  Eigen::MatrixXd proj_jacobian(const Eigen::VectorXd& z) const override;
  HessianTensor proj_hessian(const Eigen::VectorXd& z) const override;

  Eigen::VectorXd geodesic(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                           double t) const override;
  Eigen::VectorXd log_map(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const override;
  double geodesic_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const override;
  Eigen::MatrixXd parallel_transport(const Eigen::VectorXd& p,
                                     const Eigen::VectorXd& q) const override;

  Eigen::VectorXd riemann_curvature(const Eigen::VectorXd& p, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& z) const override;

  bool has_complex_structure() const override { return true; }
  bool has_real_structure() const override { return true; }
  Eigen::MatrixXd complex_structure(const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd real_structure(const Eigen::VectorXd& p) const override;
  Eigen::MatrixXd tangent_basis(const Eigen::VectorXd& p) const override;

  double r1() const { return r1_; }
  double r2() const { return r2_; }
  // Point from the two angles.
  Eigen::Vector4d point_from_angles(double theta1, double theta2) const;
  // Angles of a point on (or near) the torus.
  Eigen::Vector2d angles(const Eigen::VectorXd& p) const;
  // Unit angular frame (t1, t2) at p.
  Eigen::MatrixXd frame(const Eigen::VectorXd& p) const;

private:
  double r1_, r2_;
};

std::shared_ptr<const EmbeddedTarget> make_sphere(int q = 3);
std::shared_ptr<const EmbeddedTarget> make_clifford_torus(double r1 = 1.0, double r2 = 1.0);

// Checks the tube-to-manifold distance comparison
//   d_N(p, q) <= |p - q| / (1 - delta C)
// for p = project(z1), q = project(z2) with |z1 - z2| small. Returns the
// worst ratio d_N(p,q) * (1 - delta C) / |p - q| observed over the samples
// (must stay <= 1 for the bound to hold).
double distance_comparison_ratio(const EmbeddedTarget& target, const Eigen::VectorXd& z1,
                                 const Eigen::VectorXd& z2);

}  // namespace spinflow
