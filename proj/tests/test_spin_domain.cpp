#include <doctest.h>

#include <cmath>
#include <complex>

#include "spinflow/rng.hpp"
#include "spinflow/spin_domain.hpp"
#include "test_util.hpp"

using namespace spinflow;
using testutil::thrown_code;
using Cplx = std::complex<double>;
using Eigen::VectorXcd;

TEST_SUITE("spin_domain") {

TEST_CASE("domain admissibility") {
  CHECK(thrown_code([] { TorusDomain(-1.0, 2 * M_PI, 8, 8); }) == ErrorCode::config_error);
  CHECK(thrown_code([] { TorusDomain(2 * M_PI, 2 * M_PI, 5, 8); }) == ErrorCode::config_error);
  CHECK(thrown_code([] { TorusDomain(2 * M_PI, 2 * M_PI, 8, 2); }) == ErrorCode::config_error);
  CHECK(TorusDomain(1.0, 2.0, 6, 4).sites() == 24);
}

TEST_CASE("spin structure labels") {
  CHECK(parse_spin_structure("periodic-periodic") == spin_pp);
  CHECK(parse_spin_structure("periodic-antiperiodic") == spin_pa);
  CHECK(parse_spin_structure("antiperiodic-periodic") == spin_ap);
  CHECK(parse_spin_structure(spin_aa.label()) == spin_aa);
  CHECK(thrown_code([] { parse_spin_structure("twisted"); }) == ErrorCode::config_error);
  CHECK(spin_ap.shift1() == 0.5);
  CHECK(spin_ap.shift2() == 0.0);
}

TEST_CASE("signed index convention") {
  // Nyquist goes to the negative side.
  CHECK(SpectralKit::signed_index(0, 8) == 0);
  CHECK(SpectralKit::signed_index(3, 8) == 3);
  CHECK(SpectralKit::signed_index(4, 8) == -4);
  CHECK(SpectralKit::signed_index(7, 8) == -1);
}

TEST_CASE("transform round trip") {
  TorusDomain dom(2 * M_PI, 4.0, 8, 6);
  SpectralKit kit(dom);
  Rng rng(401);
  VectorXcd f(dom.sites());
  for (int i = 0; i < f.size(); ++i) f[i] = Cplx(rng.normal(), rng.normal());
  VectorXcd back = kit.inverse(kit.forward(f));
  CHECK((back - f).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("plane wave eigenpairs") {
  TorusDomain dom;
  SpectralKit kit(dom);
  for (const auto& spin : {spin_pp, spin_aa}) {
    const double k1 = 1.0 + spin.shift1();
    const double k2 = -2.0 + spin.shift2();
    const double norm = std::hypot(k1, k2);
    // Fourier symbol [[0, -k1 + i k2], [-k1 - i k2, 0]]: (1, (-k1 - i k2)/|k|)
    // has eigenvalue +|k|.
    SpinorField psi(dom, spin);
    for (int ix = 0; ix < dom.N1; ++ix)
      for (int iy = 0; iy < dom.N2; ++iy) {
        Cplx wave = std::exp(Cplx(0.0, k1 * dom.x1(ix) + k2 * dom.x2(iy)));
        psi.values(dom.site(ix, iy), 0) = wave;
        psi.values(dom.site(ix, iy), 1) = wave * Cplx(-k1, -k2) / norm;
      }
    SpinorField dpsi = dirac_plain(kit, psi);
    CHECK((dpsi.values - norm * psi.values).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("one-dimensional derivative matrix") {
  const int n = 8;
  const double length = 2 * M_PI;
  Eigen::MatrixXcd d = derivative_matrix_1d(n, length, 0.5);
  for (int k : {0, 1, -3}) {
    const double freq = k + 0.5;
    VectorXcd f(n);
    for (int i = 0; i < n; ++i) f[i] = std::exp(Cplx(0.0, freq * length * i / n));
    CHECK((d * f - Cplx(0.0, freq) * f).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("analytic spectrum structure") {
  TorusDomain dom;
  Eigen::VectorXd pp = analytic_dirac_spectrum(dom, spin_pp);
  Eigen::VectorXd aa = analytic_dirac_spectrum(dom, spin_aa);
  CHECK(pp.size() == 2 * dom.sites());
  CHECK(std::abs(pp.sum()) < 1e-10);  // symmetric spectrum

  int zeros = 0;
  for (int i = 0; i < pp.size(); ++i)
    if (pp[i] == 0.0) ++zeros;
  CHECK(zeros == 2);

  double min_aa = aa.cwiseAbs().minCoeff();
  CHECK(min_aa == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

}  // TEST_SUITE
