#include <doctest.h>

#include <cmath>
#include <complex>

#include "spinflow/rng.hpp"
#include "spinflow/twisted_dirac.hpp"
#include "spinflow/verify.hpp"
#include "test_util.hpp"

using namespace spinflow;
using testutil::thrown_code;
using Cplx = std::complex<double>;

namespace {

MapField const_torus_map(const TorusDomain& dom) {
  auto tgt = make_clifford_torus();
  auto* torus = dynamic_cast<const CliffordTorus*>(tgt.get());
  return constant_map(dom, tgt, torus->point_from_angles(0.4, -1.1));
}

SpectralData synthetic(std::initializer_list<double> eigenvalues) {
  SpectralData d;
  d.eigenvalues = Eigen::VectorXd(static_cast<int>(eigenvalues.size()));
  int i = 0;
  for (double v : eigenvalues) d.eigenvalues[i++] = v;
  return d;
}

}  // namespace

TEST_SUITE("twisted_dirac") {

TEST_CASE("operator rejects non-tangential sections") {
  TorusDomain dom;
  MapField u = const_torus_map(dom);
  SpectralKit kit(dom);
  TwistedSpinorField psi(dom, spin_pp, 4);
  psi.values.setConstant(Cplx(1.0, 0.0));  // constant ambient section, mostly normal
  CHECK(thrown_code([&] { apply_dirac(kit, u, psi); }) == ErrorCode::tangency_violation);
}

TEST_CASE("block dimensions") {
  TorusDomain dom(2 * M_PI, 2 * M_PI, 6, 4);
  MapField u = const_torus_map(dom);
  TwistedDiracOperator op(u, spin_pp);
  CHECK(op.dim(DiracBlock::full) == 4 * dom.sites());
  CHECK(op.dim(DiracBlock::holomorphic) == 2 * dom.sites());
  CHECK(op.ambient_dim() == 4);
  CHECK(op.tangent_dim() == 2);
}

TEST_CASE("kernel count guards on synthetic spectra") {
  CHECK(thrown_code([] { kernel_dimension(synthetic({0.1, 0.15}), 0.12); }) ==
        ErrorCode::ambiguous_cluster);
  CHECK(kernel_dimension(synthetic({1e-9, 0.3}), 0.1) == 1);
  CHECK(thrown_code([] { kernel_dimension(synthetic({0.5, 1.0}), 2.0); }) ==
        ErrorCode::ambiguous_cluster);
  CHECK(thrown_code([] { kernel_dimension(synthetic({0.5, 1.0}), -1.0); }) ==
        ErrorCode::config_error);
  CHECK(kernel_dimension(synthetic({0.5, 1.0}), 0.1) == 0);
}

TEST_CASE("gap detection on synthetic spectra") {
  // Dominant jump between the near-zero cluster and the bulk.
  double gap = spectral_gap(synthetic({-0.5, -1e-8, 1e-8, 0.5}));
  CHECK(gap == doctest::Approx(0.25).epsilon(1e-6));
  // No near-zero cluster: half the smallest magnitude.
  CHECK(spectral_gap(synthetic({-1.0, -0.7, 0.7, 1.0})) == doctest::Approx(0.35).epsilon(1e-12));
  CHECK(thrown_code([] { spectral_gap(synthetic({0.0, 0.0})); }) == ErrorCode::ambiguous_cluster);
}

TEST_CASE("constant map spectra and gap") {
  TorusDomain dom;
  MapField u = const_torus_map(dom);

  TwistedDiracOperator pp(u, spin_pp);
  SpectralData holo = eigen_solve(pp, DiracBlock::holomorphic);
  SpectralData full = eigen_solve(pp, DiracBlock::full);
  double thr_holo = spectral_gap(holo);
  double thr_full = spectral_gap(full);
  CHECK(kernel_dimension(holo, thr_holo) == 2);
  CHECK(kernel_dimension(full, thr_full) == 4);

  TwistedDiracOperator aa(u, spin_aa);
  SpectralData aah = eigen_solve(aa, DiracBlock::holomorphic);
  CHECK(spectral_gap(aah) == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(kernel_dimension(aah, spectral_gap(aah)) == 0);
}

TEST_CASE("contour rejects radii on the spectrum") {
  TorusDomain dom;
  MapField u = const_torus_map(dom);
  TwistedDiracOperator op(u, spin_pp);
  SpectralData data = eigen_solve(op, DiracBlock::holomorphic);
  Rng rng(77);
  Eigen::VectorXcd v(op.dim(DiracBlock::holomorphic));
  for (int i = 0; i < v.size(); ++i) v[i] = Cplx(rng.normal(), rng.normal());
  // Smallest nonzero magnitude of the plain pp spectrum is exactly 1, so a
  // threshold of 2 puts the contour straight through it.
  CHECK(thrown_code([&] {
          project_kernel_contour(op, DiracBlock::holomorphic, data.eigenvalues, v, 2.0, 16);
        }) == ErrorCode::contour_hits_spectrum);
  CHECK(thrown_code([&] {
          project_kernel_contour(op, DiracBlock::holomorphic, data.eigenvalues, v, 0.5, 3);
        }) == ErrorCode::config_error);
}

TEST_CASE("quaternionic structure squares to minus one") {
  TorusDomain dom;
  MapField u = const_torus_map(dom);
  TwistedDiracOperator op(u, spin_ap);
  Rng rng(911);
  Eigen::VectorXcd phi(op.dim(DiracBlock::holomorphic));
  for (int i = 0; i < phi.size(); ++i) phi[i] = Cplx(rng.normal(), rng.normal());

  Eigen::VectorXcd jj = quaternionic_J_compressed(quaternionic_J_compressed(phi));
  CHECK((jj + phi).cwiseAbs().maxCoeff() < 1e-12);
  // Antilinear: J(i phi) = -i J(phi).
  Eigen::VectorXcd ji = quaternionic_J_compressed((Cplx(0, 1) * phi).eval());
  Eigen::VectorXcd ij = Cplx(0, 1) * quaternionic_J_compressed(phi);
  CHECK((ji + ij).cwiseAbs().maxCoeff() < 1e-12);

  // Compressed and ambient forms agree through embed.
  TwistedSpinorField emb = op.embed(DiracBlock::holomorphic, phi);
  TwistedSpinorField j_emb = quaternionic_J(u, emb);
  Eigen::VectorXcd back = op.compress(DiracBlock::holomorphic, j_emb);
  CHECK((back - quaternionic_J_compressed(phi)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("eigen solve truncation") {
  TorusDomain dom(2 * M_PI, 2 * M_PI, 4, 4);
  MapField u = const_torus_map(dom);
  TwistedDiracOperator op(u, spin_aa);
  SpectralData all = eigen_solve(op, DiracBlock::holomorphic);
  SpectralData ten = eigen_solve(op, DiracBlock::holomorphic, 10);

  CHECK(ten.eigenvalues.size() == 10);
  CHECK(ten.vectors.cols() == 10);
  for (int i = 0; i + 1 < 10; ++i) CHECK(ten.eigenvalues[i] <= ten.eigenvalues[i + 1]);

  // The retained magnitudes are the 10 smallest of the full list.
  Eigen::VectorXd mags = all.eigenvalues.cwiseAbs();
  std::sort(mags.data(), mags.data() + mags.size());
  double cutoff = mags[9];
  for (int i = 0; i < 10; ++i) CHECK(std::abs(ten.eigenvalues[i]) <= cutoff + 1e-12);
}

}  // TEST_SUITE
