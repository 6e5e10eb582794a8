#pragma once

#include <memory>

#include "spinflow/spin_domain.hpp"
#include "spinflow/target_geometry.hpp"

namespace spinflow {

// Map from the torus into an embedded target; values(site, A) in ambient
// coordinates. Construction enforces the on-manifold invariant, so holders
// of a MapField may rely on every row lying on the target to 1e-10.
struct MapField {
  TorusDomain domain;
  std::shared_ptr<const EmbeddedTarget> target;
  Eigen::MatrixXd values;

  MapField(const TorusDomain& dom, std::shared_ptr<const EmbeddedTarget> tgt,
           Eigen::MatrixXd vals, double tol = 1e-10);

  Eigen::VectorXd point(int site) const { return values.row(site).transpose(); }
};

MapField constant_map(const TorusDomain& dom, std::shared_ptr<const EmbeddedTarget> tgt,
                      const Eigen::VectorXd& point);

// Both partial derivatives of every ambient component, spectral and plain
// periodic (maps carry no twist).
struct MapGradient {
  Eigen::MatrixXd dx;  // sites x q
  Eigen::MatrixXd dy;
};

MapGradient gradient(const SpectralKit& kit, const MapField& u);

// |du|^2 per site.
Eigen::VectorXd energy_density(const MapGradient& g);

// Spinor with values in the pulled-back ambient bundle: values(site, 2 A + c)
// for ambient index A and spinor component c. Tangency to the map is a
// property checked at interfaces, not enforced by the container, because
// intermediate algebra (derivatives, Clifford products) leaves the subbundle.
struct TwistedSpinorField {
  TorusDomain domain;
  SpinStructure spin;
  int ambient_dim = 0;
  Eigen::MatrixXcd values;

  TwistedSpinorField() = default;
  TwistedSpinorField(const TorusDomain& dom, const SpinStructure& s, int q)
      : domain(dom), spin(s), ambient_dim(q), values(Eigen::MatrixXcd::Zero(dom.sites(), 2 * q)) {}

  int col(int ambient, int c) const { return 2 * ambient + c; }

  // Per-site values as a q x 2 matrix (rows ambient, columns spinor).
  Eigen::MatrixXcd site_block(int site) const;
  void set_site_block(int site, const Eigen::MatrixXcd& block);
};

// Largest per-site normal residual relative to the section size; zero for an
// exactly tangential section.
double tangency_defect(const MapField& u, const TwistedSpinorField& psi);

void require_tangential(const MapField& u, const TwistedSpinorField& psi, double tol = 1e-9);

// Pointwise orthogonal projection onto the tangent spaces along u.
TwistedSpinorField project_tangential(const MapField& u, const TwistedSpinorField& psi);

// Clifford multiplication acting on the spinor index of every ambient slot.
TwistedSpinorField clifford_mul(const Eigen::MatrixXd& v, const TwistedSpinorField& psi);

std::complex<double> l2_inner(const TwistedSpinorField& a, const TwistedSpinorField& b);
double l2_norm(const TwistedSpinorField& a);

// Flat vector view in the dense-operator ordering: index = (site * q + A) * 2 + c.
Eigen::VectorXcd flatten(const TwistedSpinorField& psi);
TwistedSpinorField unflatten(const TorusDomain& dom, const SpinStructure& s, int q,
                             const Eigen::VectorXcd& flat);

}  // namespace spinflow
