#include <doctest.h>

#include <sstream>

#include "spinflow/flow.hpp"
#include "spinflow/index_theory.hpp"
#include "spinflow/io.hpp"
#include "test_util.hpp"

using namespace spinflow;
using testutil::thrown_code;

TEST_SUITE("index_theory") {

TEST_CASE("argument guards") {
  CHECK(thrown_code([] { cp1_kernel_dim({1, -1}); }) == ErrorCode::config_error);
  CHECK(thrown_code([] { script_I(-2); }) == ErrorCode::config_error);
  CHECK(thrown_code([] { script_I(3); }) == ErrorCode::odd_kernel_dimension);
  CHECK(thrown_code([] { index_I(0, 2); }) == ErrorCode::config_error);
  CHECK(thrown_code([] { index_I(2, -4); }) == ErrorCode::config_error);
  CHECK(thrown_code([] { index_I(2, 3); }) == ErrorCode::odd_kernel_dimension);
  CHECK(thrown_code([] { index_I(8, 2); }) == ErrorCode::unsupported_index);
  CHECK(thrown_code([] { index_I(12, 2); }) == ErrorCode::unsupported_index);
}

TEST_CASE("closed form at the table extremes") {
  CHECK(cp1_kernel_dim({10, 5}) == 80);
  CHECK(cp1_kernel_dim({-10, 5}) == 80);
  CHECK(cp1_kernel_dim({-10, 0}) == 20);
  CHECK(cp1_kernel_dim({7, 1}) == 0);   // genus one kills the twist
  CHECK(cp1_kernel_dim({0, 4}) == 0);   // degree zero likewise
  CHECK(script_I(80) == 0);
  CHECK(script_I(2) == 1);
  // Dimension branches away from the 2 (mod 8) case.
  CHECK(index_I(1, 3) == 1);
  CHECK(index_I(9, 4) == 0);
  CHECK(index_I(3, 7) == 0);
  CHECK(index_I(5, 2) == 0);
}

TEST_CASE("table emitter golden rows") {
  std::string csv = index_table_csv(-1, 1, 0, 1);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "deg,g_N,dim_C,script_I");
  bool found = false;
  while (std::getline(is, line)) {
    if (line == "1,0,2,1") found = true;
  }
  CHECK(found);
  // Full sweep: (3 degrees) x (2 genera) rows plus the header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("homotopy sampling guards") {
  TorusDomain dom;
  auto tgt = make_clifford_torus();
  const auto& geom = *dynamic_cast<const CliffordTorus*>(tgt.get());
  MapField a = constant_map(dom, tgt, geom.point_from_angles(0.1, 0.1));
  CHECK(thrown_code([&] { spectral_flow_family(a, a, 0, 0.3, spin_pp); }) ==
        ErrorCode::config_error);

  TorusDomain other(2 * M_PI, 2 * M_PI, 4, 4);
  MapField b = constant_map(other, tgt, geom.point_from_angles(0.1, 0.1));
  CHECK(thrown_code([&] { spectral_flow_family(a, b, 4, 0.3, spin_pp); }) ==
        ErrorCode::config_error);
}

TEST_CASE("stationary family has no jumps") {
  TorusDomain dom;
  auto tgt = make_clifford_torus();
  const auto& geom = *dynamic_cast<const CliffordTorus*>(tgt.get());
  MapField a = constant_map(dom, tgt, geom.point_from_angles(0.4, -0.6));
  TwistedDiracOperator op(a, spin_pp);
  const double thr = spectral_gap(eigen_solve(op, DiracBlock::holomorphic));

  SpectralFlowReport report = spectral_flow_family(a, a, 3, thr, spin_pp);
  CHECK(report.quaternionic);
  CHECK(report.samples.size() == 4);
  for (const auto& s : report.samples) {
    CHECK(!s.ambiguous);
    CHECK(s.kernel_dim == 2);
  }
  CHECK(report.jumps.empty());
  CHECK(report.all_jumps_even);
}

}  // TEST_SUITE
