#include "spinflow/transport_constraint.hpp"

#include <sstream>

#include "spinflow/rng.hpp"

namespace spinflow {

TransportContext make_transport(const MapField& u, const MapField& v) {
  if (!(u.domain == v.domain) || u.target.get() != v.target.get())
    fail(ErrorCode::config_error, "transport requires a shared domain and target");
  TransportContext ctx{u, v, {}, 0.0, u.target->transport_radius()};
  ctx.maps.reserve(static_cast<size_t>(u.domain.sites()));
  for (int s = 0; s < u.domain.sites(); ++s) {
    const Eigen::VectorXd p = u.point(s);
    const Eigen::VectorXd q = v.point(s);
    const double d = u.target->geodesic_distance(p, q);
    if (!(d < ctx.radius)) {
      std::ostringstream os;
      os << "site " << s << " separation " << d << " reaches the transport radius " << ctx.radius;
      fail(ErrorCode::cut_locus, os.str());
    }
    ctx.max_site_distance = std::max(ctx.max_site_distance, d);
    ctx.maps.push_back(u.target->parallel_transport(p, q));
  }
  return ctx;
}

TwistedSpinorField transport_spinor(const TransportContext& ctx, const TwistedSpinorField& psi,
                                    double tangency_tol) {
  require_tangential(ctx.source, psi, tangency_tol);
  TwistedSpinorField out(psi.domain, psi.spin, psi.ambient_dim);
  for (int s = 0; s < psi.domain.sites(); ++s)
    out.set_site_block(
        s, ctx.maps[static_cast<size_t>(s)].cast<std::complex<double>>() * psi.site_block(s));
  return out;
}

double triple_transport_defect(const MapField& u0, const MapField& u, const MapField& v,
                               const Eigen::MatrixXcd& z) {
  if (z.rows() != u0.domain.sites() || z.cols() != u0.target->ambient_dim())
    fail(ErrorCode::config_error, "probe field shape mismatch");
  const TransportContext leg1 = make_transport(u0, u);
  const TransportContext leg2 = make_transport(u, v);
  const TransportContext leg3 = make_transport(v, u0);
  double worst = 0.0;
  for (int s = 0; s < u0.domain.sites(); ++s) {
    const Eigen::MatrixXd round = leg3.maps[static_cast<size_t>(s)] *
                                  leg2.maps[static_cast<size_t>(s)] *
                                  leg1.maps[static_cast<size_t>(s)];
    const Eigen::VectorXcd zi = z.row(s).transpose();
    const double n = zi.norm();
    if (n < 1e-30) continue;
    worst = std::max(worst, (round.cast<std::complex<double>>() * zi - zi).norm() / n);
  }
  return worst;
}

OperatorComparison operator_comparison_defect(const MapField& u, const MapField& v,
                                              const SpinStructure& spin, int probes) {
  const TransportContext forward = make_transport(v, u);
  const TransportContext backward = make_transport(u, v);
  TwistedDiracOperator op_u(u, spin);
  TwistedDiracOperator op_v(v, spin);
  const Eigen::MatrixXcd& m_u = op_u.matrix(DiracBlock::holomorphic);
  const Eigen::MatrixXcd& m_v = op_v.matrix(DiracBlock::holomorphic);

  const TorusDomain& d = u.domain;
  SpectralKit kit(d);
  Rng rng(0xda3e39cb94b95bdbull);
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

  OperatorComparison result;
  result.c0_distance = (u.values - v.values).rowwise().norm().maxCoeff();
  for (int i = 0; i < probes; ++i) {
    const Eigen::VectorXcd phi = probe();
    const TwistedSpinorField psi_v = op_v.embed(DiracBlock::holomorphic, phi);
    // transport to u, apply the operator of u, transport back
    const TwistedSpinorField over_u = transport_spinor(forward, psi_v);
    const TwistedSpinorField d_over_u = op_u.embed(
        DiracBlock::holomorphic, m_u * op_u.compress(DiracBlock::holomorphic, over_u));
    const TwistedSpinorField conjugated = transport_spinor(backward, d_over_u);
    const TwistedSpinorField direct = op_v.embed(DiracBlock::holomorphic, m_v * phi);
    TwistedSpinorField diff = conjugated;
    diff.values -= direct.values;
    const double denom = std::sqrt(u.domain.cell_area()) * phi.norm();
    result.defect = std::max(result.defect, l2_norm(diff) / denom);
  }
  return result;
}

ConstraintSpinor constraint_spinor(const MapField& u0, const TwistedSpinorField& psi0,
                                   const MapField& ut, const SpinStructure& spin,
                                   double threshold, DiracBlock block) {
  const double n0 = l2_norm(psi0);
  if (std::abs(n0 - 1.0) > 1e-6)
    fail(ErrorCode::config_error, "anchor spinor must be L2-normalized");

  const TransportContext ctx = make_transport(u0, ut);
  const TwistedSpinorField moved = transport_spinor(ctx, psi0);

  TwistedDiracOperator op(ut, spin);
  SpectralData data = eigen_solve(op, block);

  ConstraintSpinor out;
  out.kernel_dim = kernel_dimension(data, threshold);
  out.gap = spectral_gap(data);

  const Eigen::VectorXcd projected =
      project_kernel_eigen(data, op.compress(block, moved), threshold);
  TwistedSpinorField bar = op.embed(block, projected);
  out.psi_bar_norm = l2_norm(bar);
  if (out.psi_bar_norm < 1e-8)
    fail(ErrorCode::degenerate_projection,
         "kernel projection collapsed: transported anchor has no component in the "
         "near-zero subspace");
  out.weak_bound_violated = out.psi_bar_norm < std::sqrt(0.5) || out.psi_bar_norm > 1.0 + 1e-9;
  out.strong_bound_violated = out.psi_bar_norm < std::sqrt(0.75);
  bar.values /= out.psi_bar_norm;
  out.psi = std::move(bar);
  return out;
}

}  // namespace spinflow
