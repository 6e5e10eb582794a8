#include <doctest.h>

#include <cmath>

#include "spinflow/flow.hpp"
#include "spinflow/transport_constraint.hpp"
#include "test_util.hpp"

using namespace spinflow;
using testutil::thrown_code;

namespace {

std::shared_ptr<const EmbeddedTarget> shared_torus() {
  static std::shared_ptr<const EmbeddedTarget> t = make_clifford_torus();
  return t;
}

const CliffordTorus& torus_geom() {
  return *dynamic_cast<const CliffordTorus*>(shared_torus().get());
}

}  // namespace

TEST_SUITE("transport_constraint") {

TEST_CASE("transport context validation") {
  TorusDomain dom;
  TorusDomain other(2 * M_PI, 2 * M_PI, 4, 4);
  auto tgt = shared_torus();
  MapField a = constant_map(dom, tgt, torus_geom().point_from_angles(0.2, 0.3));
  MapField b = constant_map(other, tgt, torus_geom().point_from_angles(0.2, 0.3));
  CHECK(thrown_code([&] { make_transport(a, b); }) == ErrorCode::config_error);

  // Same domain, sites at angular separation pi: on the cut locus.
  MapField c = constant_map(dom, tgt, torus_geom().point_from_angles(0.2 + M_PI, 0.3));
  CHECK(thrown_code([&] { make_transport(a, c); }) == ErrorCode::cut_locus);
}

TEST_CASE("transport rejects non-tangential sections") {
  TorusDomain dom;
  auto tgt = shared_torus();
  MapField a = constant_map(dom, tgt, torus_geom().point_from_angles(0.0, 0.0));
  MapField b = constant_map(dom, tgt, torus_geom().point_from_angles(0.1, -0.1));
  TransportContext ctx = make_transport(a, b);

  TwistedSpinorField psi(dom, spin_pp, 4);
  psi.values.setConstant(1.0);  // constant ambient field has a normal part
  CHECK(thrown_code([&] { transport_spinor(ctx, psi); }) == ErrorCode::tangency_violation);
}

TEST_CASE("constraint solve guards") {
  TorusDomain dom;
  auto tgt = shared_torus();
  MapField u0 = constant_map(dom, tgt, torus_geom().point_from_angles(0.5, -0.2));
  TwistedDiracOperator op(u0, spin_pp);
  SpectralData data = eigen_solve(op, DiracBlock::holomorphic);
  const double thr = spectral_gap(data);
  TwistedSpinorField psi0 = kernel_spinor(op, DiracBlock::holomorphic, thr);

  // Unnormalized anchor is rejected outright.
  TwistedSpinorField zero(dom, spin_pp, 4);
  CHECK(thrown_code([&] {
          constraint_spinor(u0, zero, u0, spin_pp, thr, DiracBlock::holomorphic);
        }) == ErrorCode::config_error);

  // A threshold beyond the whole spectrum never identifies a cluster.
  CHECK(thrown_code([&] {
          constraint_spinor(u0, psi0, u0, spin_pp, 1e6, DiracBlock::holomorphic);
        }) == ErrorCode::ambiguous_cluster);
}

TEST_CASE("norm bound flags track the measured norm") {
  TorusDomain dom;
  auto tgt = shared_torus();
  MapField u0 = constant_map(dom, tgt, torus_geom().point_from_angles(0.5, -0.2));
  TwistedDiracOperator op(u0, spin_pp);
  const double thr = spectral_gap(eigen_solve(op, DiracBlock::holomorphic));
  TwistedSpinorField psi0 = kernel_spinor(op, DiracBlock::holomorphic, thr);

  MapField ut = perturb_map(u0, 0.03, 512);
  ConstraintSpinor cs = constraint_spinor(u0, psi0, ut, spin_pp, thr, DiracBlock::holomorphic);

  CHECK(cs.kernel_dim == 2);
  CHECK(std::abs(l2_norm(cs.psi) - 1.0) < 1e-10);
  CHECK(cs.weak_bound_violated ==
        (cs.psi_bar_norm < std::sqrt(0.5) || cs.psi_bar_norm > 1.0 + 1e-9));
  CHECK(cs.strong_bound_violated == (cs.psi_bar_norm < std::sqrt(0.75)));
  CHECK(cs.psi_bar_norm > std::sqrt(0.5));
  CHECK(cs.psi_bar_norm <= 1.0 + 1e-9);
}

}  // TEST_SUITE
