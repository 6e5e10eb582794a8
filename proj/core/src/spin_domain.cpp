#include "spinflow/spin_domain.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <vector>

namespace spinflow {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

TorusDomain::TorusDomain(double l1, double l2, int n1, int n2) : L1(l1), L2(l2), N1(n1), N2(n2) {
  if (!(l1 > 0.0) || !(l2 > 0.0))
    fail(ErrorCode::config_error, "torus side lengths must be positive");
  if (n1 < 4 || n2 < 4 || n1 % 2 != 0 || n2 % 2 != 0)
    fail(ErrorCode::config_error, "grid sizes must be even and at least 4");
}

std::string SpinStructure::label() const {
  auto word = [](bool anti) { return anti ? std::string("antiperiodic") : std::string("periodic"); };
  return word(anti1) + "-" + word(anti2);
}

SpinStructure parse_spin_structure(const std::string& label) {
  for (SpinStructure s : {spin_pp, spin_pa, spin_ap, spin_aa})
    if (s.label() == label) return s;
  fail(ErrorCode::config_error, "unknown spin structure '" + label + "'");
}

struct SpectralKit::Impl {
  TorusDomain dom;
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  mutable std::mutex mtx;

  explicit Impl(const TorusDomain& d) : dom(d) {
    const int ns = dom.sites();
    buf = fftw_alloc_complex(static_cast<size_t>(ns));
    // In-place transforms on the private buffer; ESTIMATE keeps planning
    // deterministic (no timing-dependent algorithm choice).
    fwd = fftw_plan_dft_2d(dom.N1, dom.N2, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_2d(dom.N1, dom.N2, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!buf || !fwd || !bwd) fail(ErrorCode::eigen_failure, "FFT plan creation failed");
  }

  ~Impl() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
  }

  Eigen::VectorXcd run(const Eigen::VectorXcd& in, bool forward) const {
    const int ns = dom.sites();
    if (in.size() != ns) fail(ErrorCode::config_error, "grid size mismatch in transform");
    std::lock_guard<std::mutex> lock(mtx);
    for (int i = 0; i < ns; ++i) {
      buf[i][0] = in(i).real();
      buf[i][1] = in(i).imag();
    }
    fftw_execute(forward ? fwd : bwd);
    Eigen::VectorXcd out(ns);
    const double scale = forward ? 1.0 : 1.0 / ns;
    for (int i = 0; i < ns; ++i) out(i) = scale * std::complex<double>(buf[i][0], buf[i][1]);
    return out;
  }
};

SpectralKit::SpectralKit(const TorusDomain& dom) : impl_(std::make_unique<Impl>(dom)) {}
SpectralKit::~SpectralKit() = default;

const TorusDomain& SpectralKit::domain() const { return impl_->dom; }

Eigen::VectorXcd SpectralKit::forward(const Eigen::VectorXcd& grid) const {
  return impl_->run(grid, true);
}

Eigen::VectorXcd SpectralKit::inverse(const Eigen::VectorXcd& hat) const {
  return impl_->run(hat, false);
}

int SpectralKit::signed_index(int idx, int n) { return idx <= n / 2 - 1 ? idx : idx - n; }

double SpectralKit::twisted_freq(int dir, int idx, const SpinStructure& s) const {
  const TorusDomain& d = impl_->dom;
  const int n = dir == 0 ? d.N1 : d.N2;
  const double len = dir == 0 ? d.L1 : d.L2;
  const double shift = dir == 0 ? s.shift1() : s.shift2();
  return 2.0 * M_PI * (signed_index(idx, n) + shift) / len;
}

Eigen::VectorXd SpectralKit::freq_sq(const SpinStructure& s) const {
  const TorusDomain& d = impl_->dom;
  Eigen::VectorXd out(d.sites());
  for (int ix = 0; ix < d.N1; ++ix) {
    const double k1 = twisted_freq(0, ix, s);
    for (int iy = 0; iy < d.N2; ++iy) {
      const double k2 = twisted_freq(1, iy, s);
      out(d.site(ix, iy)) = k1 * k1 + k2 * k2;
    }
  }
  return out;
}

Eigen::VectorXcd SpectralKit::gauge_phase(const SpinStructure& s) const {
  const TorusDomain& d = impl_->dom;
  Eigen::VectorXcd out(d.sites());
  for (int ix = 0; ix < d.N1; ++ix) {
    for (int iy = 0; iy < d.N2; ++iy) {
      const double theta =
          2.0 * M_PI * (s.shift1() * d.x1(ix) / d.L1 + s.shift2() * d.x2(iy) / d.L2);
      out(d.site(ix, iy)) = std::exp(kI * theta);
    }
  }
  return out;
}

Eigen::VectorXcd SpectralKit::derivative(const Eigen::VectorXcd& grid, int dir,
                                         const SpinStructure& s) const {
  const TorusDomain& d = impl_->dom;
  const bool twisted = s.anti1 || s.anti2;
  Eigen::VectorXcd work = grid;
  Eigen::VectorXcd phase;
  if (twisted) {
    phase = gauge_phase(s);
    work.array() *= phase.array().conjugate();
  }
  Eigen::VectorXcd hat = forward(work);
  for (int ix = 0; ix < d.N1; ++ix) {
    for (int iy = 0; iy < d.N2; ++iy) {
      const int idx = dir == 0 ? ix : iy;
      hat(d.site(ix, iy)) *= kI * twisted_freq(dir, idx, s);
    }
  }
  Eigen::VectorXcd out = inverse(hat);
  if (twisted) out.array() *= phase.array();
  return out;
}

Eigen::VectorXcd SpectralKit::laplacian(const Eigen::VectorXcd& grid,
                                        const SpinStructure& s) const {
  const bool twisted = s.anti1 || s.anti2;
  Eigen::VectorXcd work = grid;
  Eigen::VectorXcd phase;
  if (twisted) {
    phase = gauge_phase(s);
    work.array() *= phase.array().conjugate();
  }
  Eigen::VectorXcd hat = forward(work);
  hat.array() *= -freq_sq(s).array();
  Eigen::VectorXcd out = inverse(hat);
  if (twisted) out.array() *= phase.array();
  return out;
}

SpinorField dirac_plain(const SpectralKit& kit, const SpinorField& psi) {
  if (!(psi.domain == kit.domain())) fail(ErrorCode::config_error, "domain mismatch");
  const Eigen::VectorXcd d1c0 = kit.derivative(psi.values.col(0), 0, psi.spin);
  const Eigen::VectorXcd d1c1 = kit.derivative(psi.values.col(1), 0, psi.spin);
  const Eigen::VectorXcd d2c0 = kit.derivative(psi.values.col(0), 1, psi.spin);
  const Eigen::VectorXcd d2c1 = kit.derivative(psi.values.col(1), 1, psi.spin);
  SpinorField out(psi.domain, psi.spin);
  out.values.col(0) = kI * d1c1 + d2c1;
  out.values.col(1) = kI * d1c0 - d2c0;
  return out;
}

SpinorField clifford_mul(const Eigen::MatrixXd& v, const SpinorField& psi) {
  if (v.rows() != psi.domain.sites() || v.cols() != 2)
    fail(ErrorCode::config_error, "vector field shape mismatch");
  SpinorField out(psi.domain, psi.spin);
  // (v1 gamma_1 + v2 gamma_2) acts per site as [[0, i v1 + v2], [i v1 - v2, 0]].
  out.values.col(0) =
      (kI * v.col(0).cast<std::complex<double>>() + v.col(1).cast<std::complex<double>>())
          .cwiseProduct(psi.values.col(1));
  out.values.col(1) =
      (kI * v.col(0).cast<std::complex<double>>() - v.col(1).cast<std::complex<double>>())
          .cwiseProduct(psi.values.col(0));
  return out;
}

SpinorField grading(const SpinorField& psi) {
  SpinorField out = psi;
  out.values.col(1) *= -1.0;
  return out;
}

Eigen::MatrixXcd derivative_matrix_1d(int n, double length, double shift) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      std::complex<double> acc = 0.0;
      for (int idx = 0; idx < n; ++idx) {
        const double k = SpectralKit::signed_index(idx, n) + shift;
        const double freq = 2.0 * M_PI * k / length;
        acc += kI * freq * std::exp(kI * (2.0 * M_PI * k * (a - b) / n));
      }
      out(a, b) = acc / static_cast<double>(n);
    }
  }
  return out;
}

Eigen::MatrixXcd dirac_plain_matrix(const TorusDomain& dom, const SpinStructure& s) {
  const int ns = dom.sites();
  const Eigen::MatrixXcd d1 = derivative_matrix_1d(dom.N1, dom.L1, s.shift1());
  const Eigen::MatrixXcd d2 = derivative_matrix_1d(dom.N2, dom.L2, s.shift2());
  Eigen::Matrix2cd g1, g2;
  g1 << 0, kI, kI, 0;
  g2 << 0, 1, -1, 0;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * ns, 2 * ns);
  for (int ax = 0; ax < dom.N1; ++ax) {
    for (int ay = 0; ay < dom.N2; ++ay) {
      const int row_site = dom.site(ax, ay);
      for (int bx = 0; bx < dom.N1; ++bx) {
        for (int by = 0; by < dom.N2; ++by) {
          const int col_site = dom.site(bx, by);
          // site derivative blocks: Dx = D1 (x) I, Dy = I (x) D1
          const std::complex<double> dx = ay == by ? d1(ax, bx) : 0.0;
          const std::complex<double> dy = ax == bx ? d2(ay, by) : 0.0;
          if (dx == 0.0 && dy == 0.0) continue;
          for (int cr = 0; cr < 2; ++cr)
            for (int cc = 0; cc < 2; ++cc)
              out(2 * row_site + cr, 2 * col_site + cc) = dx * g1(cr, cc) + dy * g2(cr, cc);
        }
      }
    }
  }
  return out;
}

Eigen::VectorXd analytic_dirac_spectrum(const TorusDomain& dom, const SpinStructure& s) {
  std::vector<double> evs;
  evs.reserve(static_cast<size_t>(2 * dom.sites()));
  for (int ix = 0; ix < dom.N1; ++ix) {
    const double k1 = 2.0 * M_PI * (SpectralKit::signed_index(ix, dom.N1) + s.shift1()) / dom.L1;
    for (int iy = 0; iy < dom.N2; ++iy) {
      const double k2 = 2.0 * M_PI * (SpectralKit::signed_index(iy, dom.N2) + s.shift2()) / dom.L2;
      const double lam = std::hypot(k1, k2);
      evs.push_back(lam);
      evs.push_back(-lam);
    }
  }
  std::sort(evs.begin(), evs.end());
  return Eigen::Map<Eigen::VectorXd>(evs.data(), static_cast<Eigen::Index>(evs.size()));
}

std::complex<double> l2_inner(const SpinorField& a, const SpinorField& b) {
  if (!(a.domain == b.domain)) fail(ErrorCode::config_error, "domain mismatch in pairing");
  std::complex<double> acc = 0.0;
  for (int c = 0; c < 2; ++c) acc += a.values.col(c).dot(b.values.col(c));
  return a.domain.cell_area() * acc;
}

double l2_norm(const SpinorField& a) { return std::sqrt(std::real(l2_inner(a, a))); }

}  // namespace spinflow
