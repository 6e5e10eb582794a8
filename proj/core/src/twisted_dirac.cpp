#include "spinflow/twisted_dirac.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spinflow/rng.hpp"

namespace spinflow {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};

Eigen::Matrix2cd gamma1() {
  Eigen::Matrix2cd g;
  g << 0, kI, kI, 0;
  return g;
}

Eigen::Matrix2cd gamma2() {
  Eigen::Matrix2cd g;
  g << 0, 1, -1, 0;
  return g;
}
}  // namespace

TwistedDiracOperator::TwistedDiracOperator(const MapField& u, const SpinStructure& spin)
    : u_(u),
      spin_(spin),
      q_(u.target->ambient_dim()),
      n_(u.target->dim()),
      kahler_(u.target->has_complex_structure()) {
  const int ns = u_.domain.sites();
  frames_.reserve(static_cast<size_t>(ns));
  if (kahler_ && n_ == 2) holo_frames_.reserve(static_cast<size_t>(ns));
  for (int s = 0; s < ns; ++s) {
    const Eigen::VectorXd p = u_.point(s);
    Eigen::MatrixXd frame = u_.target->tangent_basis(p);
    if (kahler_ && n_ == 2) {
      // Orientation-locked frame: second leg is i_N of the first, so the
      // holomorphic span is read off the same columns.
      const Eigen::VectorXd t1 = frame.col(0);
      frame.col(1) = u_.target->complex_structure(p) * t1;
      holo_frames_.push_back((frame.col(0) - kI * frame.col(1)) / std::sqrt(2.0));
    }
    frames_.push_back(std::move(frame));
  }
}

int TwistedDiracOperator::dim(DiracBlock block) const {
  return block == DiracBlock::full ? 2 * n_ * u_.domain.sites() : 2 * u_.domain.sites();
}

const Eigen::VectorXcd& TwistedDiracOperator::holo_frame(int site) const {
  if (holo_frames_.empty())
    fail(ErrorCode::structure_unavailable,
         u_.target->name() + " has no holomorphic splitting of its tangent bundle");
  return holo_frames_[static_cast<size_t>(site)];
}

const Eigen::MatrixXcd& TwistedDiracOperator::matrix(DiracBlock block) {
  auto& slot = block == DiracBlock::full ? full_ : holo_;
  if (!slot) assemble(block);
  return *slot;
}

void TwistedDiracOperator::assemble(DiracBlock block) {
  const TorusDomain& d = u_.domain;
  const Eigen::MatrixXcd d1x = derivative_matrix_1d(d.N1, d.L1, spin_.shift1());
  const Eigen::MatrixXcd d1y = derivative_matrix_1d(d.N2, d.L2, spin_.shift2());
  const Eigen::Matrix2cd g1 = gamma1();
  const Eigen::Matrix2cd g2 = gamma2();
  if (block == DiracBlock::holomorphic && !(kahler_ && n_ == 2)) holo_frame(0);  // throws

  const int nb = block == DiracBlock::full ? n_ : 1;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim(block), dim(block));

  auto add_site_pair = [&](int row_site, int col_site, std::complex<double> deriv,
                           const Eigen::Matrix2cd& gamma) {
    if (block == DiracBlock::full) {
      const Eigen::MatrixXd overlap = frames_[static_cast<size_t>(row_site)].transpose() *
                                      frames_[static_cast<size_t>(col_site)];
      for (int jr = 0; jr < nb; ++jr)
        for (int jc = 0; jc < nb; ++jc) {
          const std::complex<double> w = overlap(jr, jc) * deriv;
          if (w == 0.0) continue;
          for (int cr = 0; cr < 2; ++cr)
            for (int cc = 0; cc < 2; ++cc)
              m((row_site * nb + jr) * 2 + cr, (col_site * nb + jc) * 2 + cc) += w * gamma(cr, cc);
        }
    } else {
      const std::complex<double> overlap = holo_frames_[static_cast<size_t>(row_site)].dot(
          holo_frames_[static_cast<size_t>(col_site)]);
      const std::complex<double> w = overlap * deriv;
      for (int cr = 0; cr < 2; ++cr)
        for (int cc = 0; cc < 2; ++cc) m(row_site * 2 + cr, col_site * 2 + cc) += w * gamma(cr, cc);
    }
  };

  for (int ax = 0; ax < d.N1; ++ax) {
    for (int ay = 0; ay < d.N2; ++ay) {
      const int row_site = d.site(ax, ay);
      for (int bx = 0; bx < d.N1; ++bx) add_site_pair(row_site, d.site(bx, ay), d1x(ax, bx), g1);
      for (int by = 0; by < d.N2; ++by) add_site_pair(row_site, d.site(ax, by), d1y(ay, by), g2);
    }
  }

  auto& slot = block == DiracBlock::full ? full_ : holo_;
  slot = std::move(m);
}

TwistedSpinorField TwistedDiracOperator::embed(DiracBlock block,
                                               const Eigen::VectorXcd& compressed) const {
  if (compressed.size() != dim(block)) fail(ErrorCode::config_error, "compressed size mismatch");
  TwistedSpinorField out(u_.domain, spin_, q_);
  for (int s = 0; s < u_.domain.sites(); ++s) {
    Eigen::MatrixXcd site(q_, 2);
    if (block == DiracBlock::full) {
      Eigen::MatrixXcd phi(n_, 2);
      for (int j = 0; j < n_; ++j)
        for (int c = 0; c < 2; ++c) phi(j, c) = compressed((s * n_ + j) * 2 + c);
      site = frames_[static_cast<size_t>(s)].cast<std::complex<double>>() * phi;
    } else {
      const Eigen::VectorXcd& z = holo_frame(s);
      for (int c = 0; c < 2; ++c) site.col(c) = z * compressed(s * 2 + c);
    }
    out.set_site_block(s, site);
  }
  return out;
}

Eigen::VectorXcd TwistedDiracOperator::compress(DiracBlock block,
                                                const TwistedSpinorField& psi) const {
  if (!(psi.domain == u_.domain) || psi.ambient_dim != q_)
    fail(ErrorCode::config_error, "spinor shape mismatch");
  Eigen::VectorXcd out(dim(block));
  for (int s = 0; s < u_.domain.sites(); ++s) {
    const Eigen::MatrixXcd site = psi.site_block(s);
    if (block == DiracBlock::full) {
      const Eigen::MatrixXcd phi =
          frames_[static_cast<size_t>(s)].transpose().cast<std::complex<double>>() * site;
      for (int j = 0; j < n_; ++j)
        for (int c = 0; c < 2; ++c) out((s * n_ + j) * 2 + c) = phi(j, c);
    } else {
      const Eigen::VectorXcd& z = holo_frame(s);
      for (int c = 0; c < 2; ++c) out(s * 2 + c) = z.dot(site.col(c));
    }
  }
  return out;
}

TwistedSpinorField apply_dirac(const SpectralKit& kit, const MapField& u,
                               const TwistedSpinorField& psi, double tangency_tol) {
  if (!(kit.domain() == u.domain)) fail(ErrorCode::config_error, "domain mismatch");
  require_tangential(u, psi, tangency_tol);
  TwistedSpinorField out(psi.domain, psi.spin, psi.ambient_dim);
  for (int a = 0; a < psi.ambient_dim; ++a) {
    const Eigen::VectorXcd d1c0 = kit.derivative(psi.values.col(psi.col(a, 0)), 0, psi.spin);
    const Eigen::VectorXcd d1c1 = kit.derivative(psi.values.col(psi.col(a, 1)), 0, psi.spin);
    const Eigen::VectorXcd d2c0 = kit.derivative(psi.values.col(psi.col(a, 0)), 1, psi.spin);
    const Eigen::VectorXcd d2c1 = kit.derivative(psi.values.col(psi.col(a, 1)), 1, psi.spin);
    out.values.col(out.col(a, 0)) = kI * d1c1 + d2c1;
    out.values.col(out.col(a, 1)) = kI * d1c0 - d2c0;
  }
  return project_tangential(u, out);
}

TwistedSpinorField apply_dirac_geometric(const SpectralKit& kit, const MapField& u,
                                         const TwistedSpinorField& psi) {
  if (!(kit.domain() == u.domain)) fail(ErrorCode::config_error, "domain mismatch");
  TwistedSpinorField out(psi.domain, psi.spin, psi.ambient_dim);
  for (int a = 0; a < psi.ambient_dim; ++a) {
    const Eigen::VectorXcd d1c0 = kit.derivative(psi.values.col(psi.col(a, 0)), 0, psi.spin);
    const Eigen::VectorXcd d1c1 = kit.derivative(psi.values.col(psi.col(a, 1)), 0, psi.spin);
    const Eigen::VectorXcd d2c0 = kit.derivative(psi.values.col(psi.col(a, 0)), 1, psi.spin);
    const Eigen::VectorXcd d2c1 = kit.derivative(psi.values.col(psi.col(a, 1)), 1, psi.spin);
    out.values.col(out.col(a, 0)) = kI * d1c1 + d2c1;
    out.values.col(out.col(a, 1)) = kI * d1c0 - d2c0;
  }
  const MapGradient g = gradient(kit, u);
  const int q = psi.ambient_dim;
  for (int s = 0; s < u.domain.sites(); ++s) {
    const HessianTensor hess = u.target->proj_hessian(u.point(s));
    const Eigen::MatrixXcd block = psi.site_block(s);
    // (grad u^B . psi^C) per site: Clifford multiplication by the gradient
    // vector of ambient component B applied to the spinor slot C.
    Eigen::MatrixXcd mul0(q, q), mul1(q, q);  // (B, C) -> component c of v_B . psi^C
    for (int b = 0; b < q; ++b) {
      const std::complex<double> w1 = kI * g.dx(s, b);
      const double w2 = g.dy(s, b);
      for (int c2 = 0; c2 < q; ++c2) {
        mul0(b, c2) = (w1 + w2) * block(c2, 1);
        mul1(b, c2) = (w1 - w2) * block(c2, 0);
      }
    }
    for (int a = 0; a < q; ++a) {
      std::complex<double> acc0 = 0.0, acc1 = 0.0;
      for (int b = 0; b < q; ++b)
        for (int c2 = 0; c2 < q; ++c2) {
          const double h = hess[a](b, c2);
          acc0 += h * mul0(b, c2);
          acc1 += h * mul1(b, c2);
        }
      out.values(s, out.col(a, 0)) -= acc0;
      out.values(s, out.col(a, 1)) -= acc1;
    }
  }
  return out;
}

HoloSplit split_10_01(const MapField& u, const TwistedSpinorField& psi) {
  HoloSplit out{TwistedSpinorField(psi.domain, psi.spin, psi.ambient_dim),
                TwistedSpinorField(psi.domain, psi.spin, psi.ambient_dim)};
  const int q = psi.ambient_dim;
  for (int s = 0; s < u.domain.sites(); ++s) {
    const Eigen::MatrixXcd j =
        u.target->complex_structure(u.point(s)).cast<std::complex<double>>();
    const Eigen::MatrixXcd p10 =
        (Eigen::MatrixXcd::Identity(q, q) - kI * j) / 2.0;
    const Eigen::MatrixXcd block = psi.site_block(s);
    const Eigen::MatrixXcd holo = p10 * block;
    out.holo.set_site_block(s, holo);
    out.anti.set_site_block(s, block - holo);
  }
  return out;
}

SpectralData eigen_solve(TwistedDiracOperator& op, DiracBlock block, int k) {
  const Eigen::MatrixXcd& m = op.matrix(block);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::eigen_failure, "dense Hermitian eigensolve did not converge");

  Eigen::VectorXd evals = solver.eigenvalues();
  Eigen::MatrixXcd vecs = solver.eigenvectors();
  const Eigen::MatrixXcd residual = m * vecs - vecs * evals.asDiagonal();
  const double worst = residual.colwise().norm().maxCoeff();
  if (!(worst <= 1e-8)) {
    std::ostringstream os;
    os << "eigenpair residual " << worst << " exceeds 1e-8";
    fail(ErrorCode::eigen_failure, os.str());
  }

  const int dim = static_cast<int>(evals.size());
  if (k < 0 || k > dim) k = dim;
  std::vector<int> order(static_cast<size_t>(dim));
  std::iota(order.begin(), order.end(), 0);
  if (k < dim) {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(evals(a)) < std::abs(evals(b));
    });
    order.resize(static_cast<size_t>(k));
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return evals(a) < evals(b); });
  }

  SpectralData data;
  data.block = block;
  data.eigenvalues.resize(k);
  data.vectors.resize(dim, k);
  data.chirality.resize(k);
  for (int i = 0; i < k; ++i) {
    const int src = order[static_cast<size_t>(i)];
    data.eigenvalues(i) = evals(src);
    data.vectors.col(i) = vecs.col(src);
    // Grading expectation: G acts as sigma_3 on the spinor index, which is
    // the fastest-varying compressed index.
    double chi = 0.0;
    for (int r = 0; r < dim; ++r)
      chi += (r % 2 == 0 ? 1.0 : -1.0) * std::norm(vecs(r, src));
    data.chirality(i) = chi;
  }
  data.cluster_ids = cluster_labels(data.eigenvalues);
  return data;
}

std::vector<int> cluster_labels(const Eigen::VectorXd& eigenvalues) {
  std::vector<int> ids(static_cast<size_t>(eigenvalues.size()), 0);
  for (int i = 1; i < eigenvalues.size(); ++i) {
    const double scale = std::max(std::abs(eigenvalues(i)), std::abs(eigenvalues(i - 1)));
    const double tol = std::max(1e-8 * scale, 1e-10);
    ids[static_cast<size_t>(i)] =
        ids[static_cast<size_t>(i - 1)] + (eigenvalues(i) - eigenvalues(i - 1) > tol ? 1 : 0);
  }
  return ids;
}

bool clusters_all_even(const SpectralData& data) {
  if (data.cluster_ids.empty()) return true;
  std::vector<int> sizes(static_cast<size_t>(data.cluster_ids.back()) + 1, 0);
  for (int id : data.cluster_ids) ++sizes[static_cast<size_t>(id)];
  return std::all_of(sizes.begin(), sizes.end(), [](int s) { return s % 2 == 0; });
}

int kernel_dimension(const SpectralData& data, double threshold) {
  if (!(threshold > 0.0)) fail(ErrorCode::config_error, "kernel threshold must be positive");
  const Eigen::ArrayXd mags = data.eigenvalues.array().abs();
  if (mags.size() == 0) fail(ErrorCode::ambiguous_cluster, "empty spectrum");
  if (threshold > mags.maxCoeff())
    fail(ErrorCode::ambiguous_cluster, "threshold exceeds the whole spectrum");
  int count = 0;
  double max_in = 0.0;
  double min_out = std::numeric_limits<double>::infinity();
  for (int i = 0; i < mags.size(); ++i) {
    if (mags(i) < threshold) {
      ++count;
      max_in = std::max(max_in, mags(i));
    } else {
      min_out = std::min(min_out, mags(i));
    }
  }
  const double floor = std::max(max_in, threshold / 100.0);
  if (min_out < 10.0 * floor) {
    std::ostringstream os;
    os << "near-zero cluster not separated: max inside " << max_in << ", min outside " << min_out
       << " at threshold " << threshold;
    fail(ErrorCode::ambiguous_cluster, os.str());
  }
  return count;
}

double spectral_gap(const SpectralData& data) {
  // Kernel eigenvalues of discretized operators are only spectrally small
  // (not machine zero), so the zero cluster is located as the dominant
  // multiplicative jump in the sorted magnitudes. Without such a jump the
  // spectrum has no zero cluster and half the smallest magnitude is the
  // natural threshold (kernel dimension zero downstream).
  std::vector<double> mags(data.eigenvalues.data(), data.eigenvalues.data() + data.eigenvalues.size());
  for (double& m : mags) m = std::abs(m);
  std::sort(mags.begin(), mags.end());
  const double scale = mags.back();
  if (!(scale > 0.0))
    fail(ErrorCode::ambiguous_cluster, "spectrum has no nonzero part to measure a gap against");
  const double tiny = std::max(1e-9 * scale, 1e-12);
  int best = -1;
  double best_ratio = 10.0;
  for (size_t i = 0; i + 1 < mags.size() && mags[i] < 0.5 * scale; ++i) {
    const double ratio = mags[i + 1] / std::max(mags[i], tiny);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) return mags.front() / 2.0;
  return (mags[static_cast<size_t>(best) + 1] - mags[static_cast<size_t>(best)]) / 2.0;
}

Eigen::VectorXcd project_kernel_eigen(const SpectralData& data, const Eigen::VectorXcd& v,
                                      double threshold) {
  kernel_dimension(data, threshold);  // reliability gate
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (int i = 0; i < data.eigenvalues.size(); ++i) {
    if (std::abs(data.eigenvalues(i)) >= threshold) continue;
    out += data.vectors.col(i).dot(v) * data.vectors.col(i);
  }
  return out;
}

Eigen::VectorXcd project_kernel_contour(TwistedDiracOperator& op, DiracBlock block,
                                        const Eigen::VectorXd& eigenvalues,
                                        const Eigen::VectorXcd& v, double threshold, int nodes) {
  if (nodes < 4) fail(ErrorCode::config_error, "contour quadrature needs at least 4 nodes");
  const double radius = threshold / 2.0;
  for (int i = 0; i < eigenvalues.size(); ++i) {
    if (std::abs(std::abs(eigenvalues(i)) - radius) < 1e-6) {
      std::ostringstream os;
      os << "eigenvalue " << eigenvalues(i) << " lies on the contour of radius " << radius;
      fail(ErrorCode::contour_hits_spectrum, os.str());
    }
  }
  const Eigen::MatrixXcd& m = op.matrix(block);
  if (v.size() != m.rows()) fail(ErrorCode::config_error, "input size mismatch");
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(v.size());
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
  for (int j = 0; j < nodes; ++j) {
    const std::complex<double> z = radius * std::exp(kI * (2.0 * M_PI * j / nodes));
    const Eigen::VectorXcd x = Eigen::PartialPivLU<Eigen::MatrixXcd>(z * id - m).solve(v);
    if (!x.allFinite()) fail(ErrorCode::solver_failure, "shifted solve returned non-finite values");
    acc += z * x;
  }
  acc /= static_cast<double>(nodes);
  if (!acc.allFinite()) fail(ErrorCode::solver_failure, "quadrature accumulated non-finite values");
  return acc;
}

TwistedSpinorField quaternionic_J(const MapField& u, const TwistedSpinorField& psi) {
  TwistedSpinorField out(psi.domain, psi.spin, psi.ambient_dim);
  for (int s = 0; s < u.domain.sites(); ++s) {
    const Eigen::MatrixXcd r =
        u.target->real_structure(u.point(s)).cast<std::complex<double>>();
    const Eigen::MatrixXcd block = psi.site_block(s).conjugate();
    Eigen::MatrixXcd twisted(psi.ambient_dim, 2);
    twisted.col(0) = -kI * block.col(1);
    twisted.col(1) = kI * block.col(0);
    out.set_site_block(s, r * twisted);
  }
  return out;
}

Eigen::VectorXcd quaternionic_J_compressed(const Eigen::VectorXcd& phi) {
  Eigen::VectorXcd out(phi.size());
  for (int s = 0; 2 * s + 1 < phi.size(); ++s) {
    out(2 * s) = -kI * std::conj(phi(2 * s + 1));
    out(2 * s + 1) = kI * std::conj(phi(2 * s));
  }
  return out;
}

double j_commutation_defect(TwistedDiracOperator& op, int probes) {
  if (!op.base_map().target->has_real_structure())
    fail(ErrorCode::structure_unavailable,
         op.base_map().target->name() + " carries no parallel real structure");
  const Eigen::MatrixXcd& m = op.matrix(DiracBlock::holomorphic);
  const TorusDomain& d = op.domain();
  SpectralKit kit(d);
  Rng rng(0x9e3779b97f4a7c15ull);
  // Band-limited probes: site functions supported on |k| <= N/4 per axis, so
  // frame-times-field products stay inside the resolved frequency range.
  auto probe = [&]() {
    Eigen::VectorXcd out(2 * d.sites());
    for (int c = 0; c < 2; ++c) {
      Eigen::VectorXcd hat = Eigen::VectorXcd::Zero(d.sites());
      for (int ix = 0; ix < d.N1; ++ix)
        for (int iy = 0; iy < d.N2; ++iy) {
          if (std::abs(SpectralKit::signed_index(ix, d.N1)) > d.N1 / 4) continue;
          if (std::abs(SpectralKit::signed_index(iy, d.N2)) > d.N2 / 4) continue;
          hat(d.site(ix, iy)) = std::complex<double>(rng.normal(), rng.normal());
        }
      const Eigen::VectorXcd grid = kit.inverse(hat);
      for (int s = 0; s < d.sites(); ++s) out(2 * s + c) = grid(s);
    }
    return out;
  };
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    const Eigen::VectorXcd phi = probe();
    const Eigen::VectorXcd lhs = quaternionic_J_compressed(m * phi);
    const Eigen::VectorXcd rhs = m * quaternionic_J_compressed(phi);
    worst = std::max(worst, (lhs - rhs).norm() / phi.norm());
  }
  return worst;
}

}  // namespace spinflow
