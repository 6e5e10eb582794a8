#include "spinflow/target_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace spinflow {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Wrap an angle difference into (-pi, pi].
double wrap_angle(double a) {
  const double two_pi = 2.0 * M_PI;
  a = std::fmod(a, two_pi);
  if (a <= -M_PI) a += two_pi;
  if (a > M_PI) a -= two_pi;
  return a;
}

// Second derivative of the radial projection z -> r z / |z| restricted to one
// factor; fully symmetric in (A, B, C).
void radial_hessian_block(HessianTensor& h, int offset, int dim, const Eigen::VectorXd& z,
                          double r) {
  const double s = z.norm();
  const double s3 = s * s * s;
  const double s5 = s3 * s * s;
  for (int a = 0; a < dim; ++a) {
    for (int b = 0; b < dim; ++b) {
      for (int c = 0; c < dim; ++c) {
        double v = 3.0 * z(a) * z(b) * z(c) / s5;
        if (a == b) v -= z(c) / s3;
        if (a == c) v -= z(b) / s3;
        if (b == c) v -= z(a) / s3;
        h[offset + a](offset + b, offset + c) = r * v;
      }
    }
  }
}

}  // namespace

Eigen::VectorXd HessianTensor::contract(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  Eigen::VectorXd out(ambient_dim());
  for (int a = 0; a < ambient_dim(); ++a) out(a) = x.dot(comp_[static_cast<size_t>(a)] * y);
  return out;
}

Eigen::MatrixXd EmbeddedTarget::complex_structure(const Eigen::VectorXd&) const {
  fail(ErrorCode::structure_unavailable, name() + " carries no compatible complex structure");
}

Eigen::MatrixXd EmbeddedTarget::real_structure(const Eigen::VectorXd&) const {
  fail(ErrorCode::structure_unavailable, name() + " carries no parallel real structure");
}

void EmbeddedTarget::require_point(const Eigen::VectorXd& p, double tol) const {
  if (p.size() != ambient_dim())
    fail(ErrorCode::tangency_violation, "point has ambient dimension " + fmt(p.size()) +
                                            ", expected " + fmt(ambient_dim()));
  const double d = ambient_distance(p);
  if (!(d <= tol))
    fail(ErrorCode::tangency_violation, "point off " + name() + " by " + fmt(d));
}

void EmbeddedTarget::require_tangent(const Eigen::VectorXd& p, const Eigen::VectorXd& v,
                                     double tol) const {
  require_point(p, tol);
  const Eigen::VectorXd normal_part = v - tangent_projector(p) * v;
  const double r = normal_part.norm();
  if (!(r <= tol * std::max(1.0, v.norm())))
    fail(ErrorCode::tangency_violation, "vector has normal residual " + fmt(r));
}

// ---------------------------------------------------------------------------
// UnitSphere

UnitSphere::UnitSphere(int q) : q_(q) {
  if (q < 3 || q > 4)
    fail(ErrorCode::config_error, "sphere ambient dimension must be 3 or 4, got " + fmt(q));
}

double UnitSphere::injectivity_radius() const { return M_PI; }

double UnitSphere::ambient_distance(const Eigen::VectorXd& z) const {
  return std::abs(z.norm() - 1.0);
}

Eigen::VectorXd UnitSphere::project(const Eigen::VectorXd& z) const {
  const double d = ambient_distance(z);
  if (!(d <= tube_radius()))
    fail(ErrorCode::outside_tube,
         "distance " + fmt(d) + " to " + name() + " exceeds tube radius " + fmt(tube_radius()));
  return z / z.norm();
}

Eigen::MatrixXd UnitSphere::proj_jacobian(const Eigen::VectorXd& z) const {
  const double s = z.norm();
  const Eigen::VectorXd zh = z / s;
  return (Eigen::MatrixXd::Identity(q_, q_) - zh * zh.transpose()) / s;
}

HessianTensor UnitSphere::proj_hessian(const Eigen::VectorXd& z) const {
  HessianTensor h(q_);
  radial_hessian_block(h, 0, q_, z, 1.0);
  return h;
}

double UnitSphere::geodesic_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const {
  const double c = p.dot(q);
  const Eigen::VectorXd perp = q - c * p;
  return std::atan2(perp.norm(), c);
}

Eigen::VectorXd UnitSphere::geodesic(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                                     double t) const {
  const double theta = geodesic_distance(p, q);
  if (theta >= injectivity_radius() - 1e-9)
    fail(ErrorCode::cut_locus, "antipodal pair at distance " + fmt(theta));
  if (theta < 1e-12) {
    Eigen::VectorXd m = (1.0 - t) * p + t * q;
    return m / m.norm();
  }
  const Eigen::VectorXd out = (std::sin((1.0 - t) * theta) * p + std::sin(t * theta) * q) /
                              std::sin(theta);
  return out / out.norm();
}

Eigen::VectorXd UnitSphere::log_map(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const {
  const double theta = geodesic_distance(p, q);
  if (theta >= injectivity_radius() - 1e-9)
    fail(ErrorCode::cut_locus, "antipodal pair at distance " + fmt(theta));
  const Eigen::VectorXd perp = q - p.dot(q) * p;
  const double s = perp.norm();
  if (s < 1e-14) return Eigen::VectorXd::Zero(q_);
  return perp * (theta / s);
}

Eigen::MatrixXd UnitSphere::parallel_transport(const Eigen::VectorXd& p,
                                               const Eigen::VectorXd& q) const {
  const double theta = geodesic_distance(p, q);
  if (theta >= injectivity_radius() - 1e-9)
    fail(ErrorCode::cut_locus, "antipodal pair at distance " + fmt(theta));
  const Eigen::MatrixXd tangent = Eigen::MatrixXd::Identity(q_, q_) - p * p.transpose();
  if (theta < 1e-14) return tangent;
  const Eigen::VectorXd log_pq = log_map(p, q);
  const Eigen::VectorXd w = log_pq / log_pq.norm();
  // Rotation by theta in the (p, w) plane, identity on the complement.
  Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(q_, q_);
  rot += std::sin(theta) * (w * p.transpose() - p * w.transpose());
  rot += (std::cos(theta) - 1.0) * (p * p.transpose() + w * w.transpose());
  return rot * tangent;
}

Eigen::VectorXd UnitSphere::riemann_curvature(const Eigen::VectorXd&, const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& y,
                                              const Eigen::VectorXd& z) const {
  // Constant curvature one: R(X,Y)Z = <Y,Z> X - <X,Z> Y.
  return y.dot(z) * x - x.dot(z) * y;
}

Eigen::MatrixXd UnitSphere::complex_structure(const Eigen::VectorXd& p) const {
  if (q_ != 3)
    fail(ErrorCode::structure_unavailable,
         "sphere in ambient dimension " + fmt(q_) + " carries no compatible complex structure");
  Eigen::Matrix3d j;
  j << 0, -p(2), p(1), p(2), 0, -p(0), -p(1), p(0), 0;
  return j;
}

Eigen::MatrixXd UnitSphere::tangent_basis(const Eigen::VectorXd& p) const {
  // Modified Gram-Schmidt over coordinate axes ordered by |p_i| ascending;
  // deterministic in p.
  std::vector<int> order(static_cast<size_t>(q_));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(p(a)) < std::abs(p(b)); });
  Eigen::MatrixXd basis(q_, q_ - 1);
  int filled = 0;
  for (int axis : order) {
    if (filled == q_ - 1) break;
    Eigen::VectorXd v = Eigen::VectorXd::Unit(q_, axis);
    v -= p.dot(v) * p;
    for (int j = 0; j < filled; ++j) v -= basis.col(j).dot(v) * basis.col(j);
    const double n = v.norm();
    if (n < 1e-8) continue;
    basis.col(filled++) = v / n;
  }
  return basis;
}

// ---------------------------------------------------------------------------
// CliffordTorus

CliffordTorus::CliffordTorus(double r1, double r2) : r1_(r1), r2_(r2) {
  if (!(r1 > 0.0) || !(r2 > 0.0))
    fail(ErrorCode::config_error, "torus radii must be positive, got (" + fmt(r1) + ", " +
                                      fmt(r2) + ")");
}

double CliffordTorus::injectivity_radius() const { return M_PI * std::min(r1_, r2_); }

double CliffordTorus::ambient_distance(const Eigen::VectorXd& z) const {
  const double d1 = z.head<2>().norm() - r1_;
  const double d2 = z.tail<2>().norm() - r2_;
  return std::hypot(d1, d2);
}

Eigen::VectorXd CliffordTorus::project(const Eigen::VectorXd& z) const {
  const double d = ambient_distance(z);
  if (!(d <= tube_radius()))
    fail(ErrorCode::outside_tube,
         "distance " + fmt(d) + " to " + name() + " exceeds tube radius " + fmt(tube_radius()));
  Eigen::Vector4d out;
  out.head<2>() = r1_ * z.head<2>().normalized();
  out.tail<2>() = r2_ * z.tail<2>().normalized();
  return out;
}

Eigen::MatrixXd CliffordTorus::proj_jacobian(const Eigen::VectorXd& z) const {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(4, 4);
  const double radii[2] = {r1_, r2_};
  for (int b = 0; b < 2; ++b) {
    const Eigen::Vector2d zb = z.segment<2>(2 * b);
    const double s = zb.norm();
    const Eigen::Vector2d zh = zb / s;
    jac.block<2, 2>(2 * b, 2 * b) =
        radii[b] / s * (Eigen::Matrix2d::Identity() - zh * zh.transpose());
  }
  return jac;
}

HessianTensor CliffordTorus::proj_hessian(const Eigen::VectorXd& z) const {
  HessianTensor h(4);
  radial_hessian_block(h, 0, 2, z.head<2>(), r1_);
  radial_hessian_block(h, 2, 2, z.tail<2>(), r2_);
  return h;
}

Eigen::Vector4d CliffordTorus::point_from_angles(double theta1, double theta2) const {
  Eigen::Vector4d p;
  p << r1_ * std::cos(theta1), r1_ * std::sin(theta1), r2_ * std::cos(theta2),
      r2_ * std::sin(theta2);
  return p;
}

Eigen::Vector2d CliffordTorus::angles(const Eigen::VectorXd& p) const {
  return {std::atan2(p(1), p(0)), std::atan2(p(3), p(2))};
}

Eigen::MatrixXd CliffordTorus::frame(const Eigen::VectorXd& p) const {
  const Eigen::Vector2d th = angles(p);
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(4, 2);
  f.col(0) << -std::sin(th(0)), std::cos(th(0)), 0, 0;
  f.col(1) << 0, 0, -std::sin(th(1)), std::cos(th(1));
  return f;
}

double CliffordTorus::geodesic_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const {
  const Eigen::Vector2d tp = angles(p), tq = angles(q);
  const double d1 = r1_ * wrap_angle(tq(0) - tp(0));
  const double d2 = r2_ * wrap_angle(tq(1) - tp(1));
  return std::hypot(d1, d2);
}

Eigen::VectorXd CliffordTorus::geodesic(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                                        double t) const {
  const double d = geodesic_distance(p, q);
  if (d >= injectivity_radius() - 1e-9)
    fail(ErrorCode::cut_locus, "pair at distance " + fmt(d) + " reaches the cut locus");
  const Eigen::Vector2d tp = angles(p), tq = angles(q);
  return point_from_angles(tp(0) + t * wrap_angle(tq(0) - tp(0)),
                           tp(1) + t * wrap_angle(tq(1) - tp(1)));
}

Eigen::VectorXd CliffordTorus::log_map(const Eigen::VectorXd& p, const Eigen::VectorXd& q) const {
  const double d = geodesic_distance(p, q);
  if (d >= injectivity_radius() - 1e-9)
    fail(ErrorCode::cut_locus, "pair at distance " + fmt(d) + " reaches the cut locus");
  const Eigen::Vector2d tp = angles(p), tq = angles(q);
  const Eigen::MatrixXd f = frame(p);
  return r1_ * wrap_angle(tq(0) - tp(0)) * f.col(0) + r2_ * wrap_angle(tq(1) - tp(1)) * f.col(1);
}

Eigen::MatrixXd CliffordTorus::parallel_transport(const Eigen::VectorXd& p,
                                                  const Eigen::VectorXd& q) const {
  const double d = geodesic_distance(p, q);
  if (d >= injectivity_radius() - 1e-9)
    fail(ErrorCode::cut_locus, "pair at distance " + fmt(d) + " reaches the cut locus");
  // The angular frame is parallel: transport is the frame change.
  const Eigen::MatrixXd fp = frame(p), fq = frame(q);
  return fq * fp.transpose();
}

Eigen::VectorXd CliffordTorus::riemann_curvature(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                                 const Eigen::VectorXd&,
                                                 const Eigen::VectorXd&) const {
  return Eigen::VectorXd::Zero(4);  // flat
}

Eigen::MatrixXd CliffordTorus::complex_structure(const Eigen::VectorXd& p) const {
  const Eigen::MatrixXd f = frame(p);
  return f.col(1) * f.col(0).transpose() - f.col(0) * f.col(1).transpose();
}

Eigen::MatrixXd CliffordTorus::real_structure(const Eigen::VectorXd& p) const {
  const Eigen::MatrixXd f = frame(p);
  return f.col(0) * f.col(0).transpose() - f.col(1) * f.col(1).transpose();
}

Eigen::MatrixXd CliffordTorus::tangent_basis(const Eigen::VectorXd& p) const { return frame(p); }

std::shared_ptr<const EmbeddedTarget> make_sphere(int q) {
  return std::make_shared<UnitSphere>(q);
}

std::shared_ptr<const EmbeddedTarget> make_clifford_torus(double r1, double r2) {
  return std::make_shared<CliffordTorus>(r1, r2);
}

double distance_comparison_ratio(const EmbeddedTarget& target, const Eigen::VectorXd& z1,
                                 const Eigen::VectorXd& z2) {
  const Eigen::VectorXd p = target.project(z1);
  const Eigen::VectorXd q = target.project(z2);
  const double chord = (p - q).norm();
  if (chord < 1e-14) return 0.0;
  const double slack = 1.0 - target.tube_radius() * target.weingarten_bound();
  return target.geodesic_distance(p, q) * slack / chord;
}

}  // namespace spinflow
