#include <doctest.h>

#include <cmath>

#include "spinflow/rng.hpp"
#include "spinflow/target_geometry.hpp"
#include "test_util.hpp"

using namespace spinflow;
using testutil::thrown_code;
using Eigen::MatrixXd;
using Eigen::Vector4d;
using Eigen::VectorXd;

TEST_SUITE("target_geometry") {

TEST_CASE("sphere family admissibility") {
  CHECK(make_sphere(3)->dim() == 2);
  CHECK(make_sphere(4)->dim() == 3);
  CHECK(thrown_code([] { make_sphere(5); }) == ErrorCode::config_error);
  CHECK(thrown_code([] { make_sphere(2); }) == ErrorCode::config_error);

  auto s4 = make_sphere(4);
  CHECK(!s4->has_complex_structure());
  CHECK(thrown_code([&] { s4->complex_structure(VectorXd::Unit(4, 0)); }) ==
        ErrorCode::structure_unavailable);
}

TEST_CASE("unequal radii torus") {
  CliffordTorus torus(2.0, 0.5);
  CHECK(torus.tube_radius() == doctest::Approx(0.15));
  CHECK(torus.weingarten_bound() == doctest::Approx(2.0));

  Vector4d p = torus.point_from_angles(0.4, -1.3);
  CHECK(p.head<2>().norm() == doctest::Approx(2.0));
  CHECK(p.tail<2>().norm() == doctest::Approx(0.5));
  Eigen::Vector2d angles = torus.angles(p);
  CHECK(angles[0] == doctest::Approx(0.4));
  CHECK(angles[1] == doctest::Approx(-1.3));

  // Projection acts per circle factor.
  Vector4d z = p + Vector4d(0.05, -0.02, 0.01, 0.03);
  Vector4d proj = torus.project(z);
  CHECK((proj.head<2>() - 2.0 * z.head<2>().normalized()).norm() < 1e-14);
  CHECK((proj.tail<2>() - 0.5 * z.tail<2>().normalized()).norm() < 1e-14);
}

TEST_CASE("tube guards") {
  auto sphere = make_sphere(3);
  CHECK(thrown_code([&] { sphere->project(VectorXd::Zero(3)); }) == ErrorCode::outside_tube);
  // Derivative formulas stay smooth off the tube; only project guards it.
  MatrixXd far_jac = sphere->proj_jacobian(2.0 * VectorXd::Unit(3, 0));
  MatrixXd far_expect = (MatrixXd::Identity(3, 3) - VectorXd::Unit(3, 0) * VectorXd::Unit(3, 0).transpose()) / 2.0;
  CHECK((far_jac - far_expect).norm() < 1e-14);

  CliffordTorus torus;
  Vector4d axis(0.0, 0.0, 1.0, 0.0);  // first circle factor degenerate
  CHECK(thrown_code([&] { torus.project(axis); }) == ErrorCode::outside_tube);
}

TEST_CASE("cut locus guards") {
  auto sphere = make_sphere(3);
  VectorXd p = VectorXd::Unit(3, 0);
  CHECK(thrown_code([&] { sphere->log_map(p, -p); }) == ErrorCode::cut_locus);
  CHECK(thrown_code([&] { sphere->parallel_transport(p, -p); }) == ErrorCode::cut_locus);

  CliffordTorus torus;
  Vector4d a = torus.point_from_angles(0.0, 0.0);
  Vector4d b = torus.point_from_angles(M_PI, 0.0);
  CHECK(thrown_code([&] { torus.log_map(a, b); }) == ErrorCode::cut_locus);
}

TEST_CASE("sphere transport closed form") {
  // Along the geodesic p -> q: v -> v - <q, v> (p + q) / (1 + <p, q>).
  auto sphere = make_sphere(3);
  Rng rng(301);
  for (int trial = 0; trial < 20; ++trial) {
    VectorXd p(3), dir(3);
    for (int i = 0; i < 3; ++i) {
      p[i] = rng.normal();
      dir[i] = rng.normal();
    }
    p.normalize();
    VectorXd q = sphere->project(p + 0.25 * dir.normalized());
    if (sphere->geodesic_distance(p, q) >= sphere->transport_radius()) continue;
    MatrixXd got = sphere->parallel_transport(p, q);
    MatrixXd basis = sphere->tangent_basis(p);
    for (int c = 0; c < basis.cols(); ++c) {
      VectorXd v = basis.col(c);
      VectorXd expect = v - (q.dot(v) / (1.0 + p.dot(q))) * (p + q);
      CHECK((got * v - expect).norm() < 1e-12);
    }
  }
}

TEST_CASE("torus transport closed form") {
  // Flat product metric: transport rotates each circle factor by its angle
  // difference.
  CliffordTorus torus(1.3, 0.7);
  Vector4d p = torus.point_from_angles(0.2, 1.1);
  Vector4d q = torus.point_from_angles(0.9, 0.6);
  MatrixXd t = torus.parallel_transport(p, q);
  auto rot = [](double dtheta) {
    Eigen::Matrix2d r;
    r << std::cos(dtheta), -std::sin(dtheta), std::sin(dtheta), std::cos(dtheta);
    return r;
  };
  MatrixXd expect = MatrixXd::Zero(4, 4);
  expect.block<2, 2>(0, 0) = rot(0.7);
  expect.block<2, 2>(2, 2) = rot(-0.5);
  // Compare on the tangent space only (transport kills normals).
  MatrixXd basis = torus.tangent_basis(p);
  CHECK((t * basis - expect * basis).norm() < 1e-12);
}

TEST_CASE("curvature closed forms") {
  auto sphere = make_sphere(3);
  Rng rng(302);
  VectorXd p(3);
  for (int i = 0; i < 3; ++i) p[i] = rng.normal();
  p.normalize();
  MatrixXd basis = sphere->tangent_basis(p);
  VectorXd x = basis.col(0), y = basis.col(1);
  VectorXd z = 0.3 * x - 1.2 * y;
  VectorXd got = sphere->riemann_curvature(p, x, y, z);
  VectorXd expect = y.dot(z) * x - x.dot(z) * y;  // constant curvature one
  CHECK((got - expect).norm() < 1e-12);

  CliffordTorus torus;
  Vector4d tp = torus.point_from_angles(0.5, -0.2);
  MatrixXd tb = torus.tangent_basis(tp);
  CHECK(torus.riemann_curvature(tp, tb.col(0), tb.col(1), tb.col(0)).norm() < 1e-14);
}

TEST_CASE("projector hessian is symmetric in its lower indices") {
  Rng rng(303);
  for (const auto& target : {make_sphere(3), make_clifford_torus()}) {
    const int q = target->ambient_dim();
    VectorXd base = q == 3 ? VectorXd::Unit(3, 0).eval()
                           : VectorXd(CliffordTorus().point_from_angles(0.1, 0.2));
    VectorXd z = base;
    for (int i = 0; i < q; ++i) z[i] += 0.1 * target->tube_radius() * rng.normal();
    HessianTensor hess = target->proj_hessian(z);
    for (int a = 0; a < q; ++a) CHECK((hess[a] - hess[a].transpose()).norm() < 1e-12);
  }
}

}  // TEST_SUITE
