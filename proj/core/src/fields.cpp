#include "spinflow/fields.hpp"

#include <sstream>

namespace spinflow {

MapField::MapField(const TorusDomain& dom, std::shared_ptr<const EmbeddedTarget> tgt,
                   Eigen::MatrixXd vals, double tol)
    : domain(dom), target(std::move(tgt)), values(std::move(vals)) {
  if (!target) fail(ErrorCode::config_error, "map requires a target");
  if (values.rows() != domain.sites() || values.cols() != target->ambient_dim())
    fail(ErrorCode::config_error, "map value shape mismatch");
  for (int s = 0; s < domain.sites(); ++s) {
    const double d = target->ambient_distance(values.row(s).transpose());
    if (!(d <= tol)) {
      std::ostringstream os;
      os << "map leaves " << target->name() << " at site " << s << " by " << d;
      fail(ErrorCode::tangency_violation, os.str());
    }
  }
}

MapField constant_map(const TorusDomain& dom, std::shared_ptr<const EmbeddedTarget> tgt,
                      const Eigen::VectorXd& point) {
  Eigen::MatrixXd vals(dom.sites(), point.size());
  vals.rowwise() = point.transpose();
  return MapField(dom, std::move(tgt), std::move(vals));
}

MapGradient gradient(const SpectralKit& kit, const MapField& u) {
  const int q = static_cast<int>(u.values.cols());
  MapGradient g{Eigen::MatrixXd(u.domain.sites(), q), Eigen::MatrixXd(u.domain.sites(), q)};
  for (int a = 0; a < q; ++a) {
    const Eigen::VectorXcd comp = u.values.col(a).cast<std::complex<double>>();
    g.dx.col(a) = kit.derivative(comp, 0, spin_pp).real();
    g.dy.col(a) = kit.derivative(comp, 1, spin_pp).real();
  }
  return g;
}

Eigen::VectorXd energy_density(const MapGradient& g) {
  return g.dx.array().square().rowwise().sum() + g.dy.array().square().rowwise().sum();
}

Eigen::MatrixXcd TwistedSpinorField::site_block(int site) const {
  Eigen::MatrixXcd block(ambient_dim, 2);
  for (int a = 0; a < ambient_dim; ++a)
    for (int c = 0; c < 2; ++c) block(a, c) = values(site, col(a, c));
  return block;
}

void TwistedSpinorField::set_site_block(int site, const Eigen::MatrixXcd& block) {
  for (int a = 0; a < ambient_dim; ++a)
    for (int c = 0; c < 2; ++c) values(site, col(a, c)) = block(a, c);
}

double tangency_defect(const MapField& u, const TwistedSpinorField& psi) {
  if (!(u.domain == psi.domain) || u.target->ambient_dim() != psi.ambient_dim)
    fail(ErrorCode::config_error, "map and spinor live over different data");
  const double scale = std::max(psi.values.norm(), 1e-30);
  double worst = 0.0;
  for (int s = 0; s < u.domain.sites(); ++s) {
    const Eigen::MatrixXd proj = u.target->tangent_projector(u.point(s));
    const Eigen::MatrixXcd block = psi.site_block(s);
    const Eigen::MatrixXcd normal = block - proj * block;
    worst = std::max(worst, normal.norm() / scale);
  }
  return worst;
}

void require_tangential(const MapField& u, const TwistedSpinorField& psi, double tol) {
  const double d = tangency_defect(u, psi);
  if (!(d <= tol)) {
    std::ostringstream os;
    os << "spinor has normal component " << d << " relative to its size";
    fail(ErrorCode::tangency_violation, os.str());
  }
}

TwistedSpinorField project_tangential(const MapField& u, const TwistedSpinorField& psi) {
  TwistedSpinorField out = psi;
  for (int s = 0; s < u.domain.sites(); ++s) {
    const Eigen::MatrixXd proj = u.target->tangent_projector(u.point(s));
    out.set_site_block(s, proj * psi.site_block(s));
  }
  return out;
}

TwistedSpinorField clifford_mul(const Eigen::MatrixXd& v, const TwistedSpinorField& psi) {
  if (v.rows() != psi.domain.sites() || v.cols() != 2)
    fail(ErrorCode::config_error, "vector field shape mismatch");
  constexpr std::complex<double> kI{0.0, 1.0};
  TwistedSpinorField out(psi.domain, psi.spin, psi.ambient_dim);
  for (int a = 0; a < psi.ambient_dim; ++a) {
    const auto c0 = psi.values.col(psi.col(a, 0));
    const auto c1 = psi.values.col(psi.col(a, 1));
    const Eigen::VectorXcd w1 = kI * v.col(0).cast<std::complex<double>>();
    const Eigen::VectorXcd w2 = v.col(1).cast<std::complex<double>>();
    out.values.col(out.col(a, 0)) = (w1 + w2).cwiseProduct(c1);
    out.values.col(out.col(a, 1)) = (w1 - w2).cwiseProduct(c0);
  }
  return out;
}

std::complex<double> l2_inner(const TwistedSpinorField& a, const TwistedSpinorField& b) {
  if (!(a.domain == b.domain) || a.ambient_dim != b.ambient_dim)
    fail(ErrorCode::config_error, "spinor shape mismatch in pairing");
  std::complex<double> acc = 0.0;
  for (int c = 0; c < a.values.cols(); ++c) acc += a.values.col(c).dot(b.values.col(c));
  return a.domain.cell_area() * acc;
}

double l2_norm(const TwistedSpinorField& a) { return std::sqrt(std::real(l2_inner(a, a))); }

Eigen::VectorXcd flatten(const TwistedSpinorField& psi) {
  const int q = psi.ambient_dim;
  Eigen::VectorXcd out(psi.domain.sites() * 2 * q);
  for (int s = 0; s < psi.domain.sites(); ++s)
    for (int a = 0; a < q; ++a)
      for (int c = 0; c < 2; ++c) out((s * q + a) * 2 + c) = psi.values(s, psi.col(a, c));
  return out;
}

TwistedSpinorField unflatten(const TorusDomain& dom, const SpinStructure& s, int q,
                             const Eigen::VectorXcd& flat) {
  if (flat.size() != dom.sites() * 2 * q)
    fail(ErrorCode::config_error, "flat spinor length mismatch");
  TwistedSpinorField out(dom, s, q);
  for (int site = 0; site < dom.sites(); ++site)
    for (int a = 0; a < q; ++a)
      for (int c = 0; c < 2; ++c) out.values(site, out.col(a, c)) = flat((site * q + a) * 2 + c);
  return out;
}

}  // namespace spinflow
