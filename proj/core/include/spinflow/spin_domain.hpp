#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <string>

#include "spinflow/error.hpp"

namespace spinflow {

// Flat rectangular torus R^2 / (L1 Z x L2 Z) sampled on a uniform N1 x N2
// grid. Site layout is row-major with the second axis fastest:
// site(ix, iy) = ix * N2 + iy, grid point x = (ix L1 / N1, iy L2 / N2).
struct TorusDomain {
  double L1 = 2.0 * M_PI;
  double L2 = 2.0 * M_PI;
  int N1 = 8;
  int N2 = 8;

  TorusDomain() = default;
  TorusDomain(double l1, double l2, int n1, int n2);

  int sites() const { return N1 * N2; }
  int site(int ix, int iy) const { return ix * N2 + iy; }
  double x1(int ix) const { return L1 * ix / N1; }
  double x2(int iy) const { return L2 * iy / N2; }
  double cell_area() const { return (L1 / N1) * (L2 / N2); }
  double area() const { return L1 * L2; }

  bool operator==(const TorusDomain&) const = default;
};

// Spin structure on the torus: one sign choice per generator. true means the
// antiperiodic (bounding) lift, shifting the frequency lattice by one half.
struct SpinStructure {
  bool anti1 = false;
  bool anti2 = false;

  double shift1() const { return anti1 ? 0.5 : 0.0; }
  double shift2() const { return anti2 ? 0.5 : 0.0; }
  std::string label() const;

  bool operator==(const SpinStructure&) const = default;
};

SpinStructure parse_spin_structure(const std::string& label);

inline constexpr SpinStructure spin_pp{false, false};
inline constexpr SpinStructure spin_pa{false, true};
inline constexpr SpinStructure spin_ap{true, false};
inline constexpr SpinStructure spin_aa{true, true};

// Two-component spinor samples on the grid; values(site, c) with c in {0, 1}.
// Antiperiodic directions store raw section values at the grid points; the
// half-integer frequency content is handled by the gauge factor inside
// SpectralKit, never by the storage.
struct SpinorField {
  TorusDomain domain;
  SpinStructure spin;
  Eigen::MatrixXcd values;

  SpinorField() = default;
  SpinorField(const TorusDomain& dom, const SpinStructure& s)
      : domain(dom), spin(s), values(Eigen::MatrixXcd::Zero(dom.sites(), 2)) {}
};

// FFT workspace for one grid size. Plans are created once (deterministic
// FFTW_ESTIMATE planning) and guarded by a mutex, so a kit may be shared.
class SpectralKit {
 public:
  explicit SpectralKit(const TorusDomain& dom);
  ~SpectralKit();
  SpectralKit(const SpectralKit&) = delete;
  SpectralKit& operator=(const SpectralKit&) = delete;

  const TorusDomain& domain() const;

  // Unnormalized forward transform; inverse divides by the site count, so
  // inverse(forward(f)) == f to machine precision.
  Eigen::VectorXcd forward(const Eigen::VectorXcd& grid) const;
  Eigen::VectorXcd inverse(const Eigen::VectorXcd& hat) const;

  // Signed integer frequency for a grid index along one axis; even sizes keep
  // the Nyquist bucket at -N/2.
  static int signed_index(int idx, int n);

  // Twisted frequency 2 pi (k + shift) / L along dir (0 or 1).
  double twisted_freq(int dir, int idx, const SpinStructure& s) const;

  // |k~|^2 per hat-space site, laid out like the grid.
  Eigen::VectorXd freq_sq(const SpinStructure& s) const;

  // Gauge phase exp(i theta), theta = 2 pi (s1 x / L1 + s2 y / L2), per site.
  Eigen::VectorXcd gauge_phase(const SpinStructure& s) const;

  // Exact spectral derivative of raw section values along dir.
  Eigen::VectorXcd derivative(const Eigen::VectorXcd& grid, int dir, const SpinStructure& s) const;

  // Spectral Laplacian (sum of second derivatives, nonpositive symbol).
  Eigen::VectorXcd laplacian(const Eigen::VectorXcd& grid, const SpinStructure& s) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Untwisted Dirac operator D = gamma_1 d_1 + gamma_2 d_2 with
// gamma_1 = i sigma_1, gamma_2 = i sigma_2; anti-Hermitian gammas squaring
// to -1, so D is self-adjoint with symbol eigenvalues +-|k~|.
SpinorField dirac_plain(const SpectralKit& kit, const SpinorField& psi);

// Clifford multiplication by a real domain vector field v (sites x 2):
// (v . psi) = (v1 gamma_1 + v2 gamma_2) psi, pointwise.
SpinorField clifford_mul(const Eigen::MatrixXd& v, const SpinorField& psi);

// Chirality grading G = i gamma_1 gamma_2 = sigma_3; anticommutes with D.
SpinorField grading(const SpinorField& psi);

// One-dimensional spectral derivative as a dense Toeplitz matrix acting on
// raw section values. Built by direct DFT summation, independent of FFTW.
Eigen::MatrixXcd derivative_matrix_1d(int n, double length, double shift);

// Dense 2 Ns x 2 Ns matrix of dirac_plain, row index 2 * site + c. The
// independent assembly route used to cross-check the transform route.
Eigen::MatrixXcd dirac_plain_matrix(const TorusDomain& dom, const SpinStructure& s);

// All 2 Ns eigenvalues +-|k~| of the discretized operator, sorted ascending.
Eigen::VectorXd analytic_dirac_spectrum(const TorusDomain& dom, const SpinStructure& s);

// L2 pairing with the cell-area weight; antilinear in the first slot.
std::complex<double> l2_inner(const SpinorField& a, const SpinorField& b);
double l2_norm(const SpinorField& a);

}  // namespace spinflow
