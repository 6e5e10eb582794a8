#include "spinflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spinflow/rng.hpp"

namespace spinflow {

namespace {

Eigen::VectorXcd to_complex(const Eigen::VectorXd& v) { return v.cast<std::complex<double>>(); }

// Exact derivative of the spinor energy (1/2) Re <psi, Pi D psi> with the
// section's raw values held fixed: the map enters only through the per-site
// tangent projector, so the variation against a tangent direction eta is
// Re <(dPi . eta) psi, D psi> with D the unprojected componentwise Dirac.
Eigen::MatrixXd spinor_coupling(const SpectralKit& kit, const MapField& u,
                                const TwistedSpinorField& psi) {
  if (psi.ambient_dim != u.target->ambient_dim() || !(psi.domain == u.domain)) {
    fail(ErrorCode::config_error, "spinor does not match the map");
  }
  constexpr std::complex<double> kI{0.0, 1.0};
  TwistedSpinorField dpsi(psi.domain, psi.spin, psi.ambient_dim);
  for (int a = 0; a < psi.ambient_dim; ++a) {
    const Eigen::VectorXcd d1c0 = kit.derivative(psi.values.col(psi.col(a, 0)), 0, psi.spin);
    const Eigen::VectorXcd d1c1 = kit.derivative(psi.values.col(psi.col(a, 1)), 0, psi.spin);
    const Eigen::VectorXcd d2c0 = kit.derivative(psi.values.col(psi.col(a, 0)), 1, psi.spin);
    const Eigen::VectorXcd d2c1 = kit.derivative(psi.values.col(psi.col(a, 1)), 1, psi.spin);
    dpsi.values.col(dpsi.col(a, 0)) = kI * d1c1 + d2c1;
    dpsi.values.col(dpsi.col(a, 1)) = kI * d1c0 - d2c0;
  }
  const int ns = u.domain.sites();
  const int q = u.target->ambient_dim();
  Eigen::MatrixXd out(ns, q);
  for (int s = 0; s < ns; ++s) {
    const HessianTensor hess = u.target->proj_hessian(u.point(s));
    const Eigen::MatrixXcd pb = psi.site_block(s);
    const Eigen::MatrixXcd db = dpsi.site_block(s);
    for (int c = 0; c < q; ++c) {
      double acc = 0.0;
      for (int a2 = 0; a2 < q; ++a2) {
        for (int b = 0; b < q; ++b) {
          acc += hess[a2](b, c) *
                 (std::conj(pb(b, 0)) * db(a2, 0) + std::conj(pb(b, 1)) * db(a2, 1)).real();
        }
      }
      out(s, c) = acc;
    }
  }
  return out;
}

}  // namespace

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kernel_jump: return "KernelJump";
    case EventKind::converged: return "Converged";
    case EventKind::max_steps: return "MaxSteps";
    case EventKind::tube_exit: return "TubeExit";
    case EventKind::gradient_blowup: return "GradientBlowup";
  }
  return "?";
}

Eigen::MatrixXd f1_term(const SpectralKit& kit, const MapField& u) {
  const MapGradient g = gradient(kit, u);
  const int ns = u.domain.sites();
  const int q = u.target->ambient_dim();
  Eigen::MatrixXd out(ns, q);
  for (int s = 0; s < ns; ++s) {
    const HessianTensor hess = u.target->proj_hessian(u.point(s));
    const Eigen::VectorXd dx = g.dx.row(s).transpose();
    const Eigen::VectorXd dy = g.dy.row(s).transpose();
    out.row(s) = -(hess.contract(dx, dx) + hess.contract(dy, dy)).transpose();
  }
  return out;
}

Eigen::MatrixXd f2_term(const SpectralKit& kit, const MapField& u, const TwistedSpinorField& psi) {
  if (psi.ambient_dim != u.target->ambient_dim() || psi.domain != u.domain) {
    fail(ErrorCode::config_error, "spinor does not match the map");
  }
  const MapGradient g = gradient(kit, u);
  const int ns = u.domain.sites();
  const int q = u.target->ambient_dim();
  const std::complex<double> im(0.0, 1.0);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(ns, q);
  for (int s = 0; s < ns; ++s) {
    const Eigen::VectorXd p = u.point(s);
    const HessianTensor hess = u.target->proj_hessian(p);
    const Eigen::MatrixXd proj = u.target->tangent_projector(p);
    const Eigen::MatrixXcd blk = psi.site_block(s);  // q x 2

    // pairings(d, e, f) = Re <psi^d, grad u^e . psi^f> at this site,
    // with Clifford action (v . psi)_0 = (i v1 + v2) psi_1,
    // (v . psi)_1 = (i v1 - v2) psi_0.
    std::vector<Eigen::MatrixXd> pairings(static_cast<size_t>(q));
    for (int d = 0; d < q; ++d) {
      Eigen::MatrixXd m(q, q);
      for (int e = 0; e < q; ++e) {
        const std::complex<double> a = im * g.dx(s, e) + g.dy(s, e);
        const std::complex<double> b = im * g.dx(s, e) - g.dy(s, e);
        for (int f = 0; f < q; ++f) {
          m(e, f) = (std::conj(blk(d, 0)) * a * blk(f, 1) + std::conj(blk(d, 1)) * b * blk(f, 0))
                        .real();
        }
      }
      pairings[static_cast<size_t>(d)] = m;
    }

    // t_b = sum_c sum_d pi^c_{bd} sum_{ef} pi^c_{ef} pairings(d, e, f)
    Eigen::VectorXd t = Eigen::VectorXd::Zero(q);
    for (int c = 0; c < q; ++c) {
      Eigen::VectorXd sc(q);
      for (int d = 0; d < q; ++d) {
        sc(d) = hess[c].cwiseProduct(pairings[static_cast<size_t>(d)]).sum();
      }
      t += hess[c] * sc;
    }
    out.row(s) = -(proj * t).transpose();
  }
  return out;
}

Eigen::MatrixXd alpha_rhs(const SpectralKit& kit, const MapField& u,
                          const TwistedSpinorField* psi, double alpha) {
  if (alpha < 1.0) fail(ErrorCode::config_error, "alpha must be >= 1");
  const MapGradient g = gradient(kit, u);
  const Eigen::VectorXd e = energy_density(g);
  const int ns = u.domain.sites();
  const int q = u.target->ambient_dim();

  // Conservative flux sum_b D_b(w d_b u) / w with w = (1 + e)^(alpha - 1):
  // the exact gradient of the discrete alpha-energy in the weighted metric.
  // A pointwise Leibniz expansion of the same expression is not exact under
  // spectral differentiation and leaks a step-size independent error into
  // the dissipation ledger.
  const Eigen::ArrayXd w = (1.0 + e.array()).pow(alpha - 1.0);
  Eigen::MatrixXd bracket(ns, q);
  for (int a = 0; a < q; ++a) {
    const Eigen::VectorXcd fx = to_complex((w * g.dx.col(a).array()).matrix());
    const Eigen::VectorXcd fy = to_complex((w * g.dy.col(a).array()).matrix());
    bracket.col(a) = (kit.derivative(fx, 0, spin_pp).real().array() +
                      kit.derivative(fy, 1, spin_pp).real().array()) / w;
  }

  if (psi != nullptr) {
    bracket -= (spinor_coupling(kit, u, *psi).array().colwise() / (alpha * w)).matrix();
  }

  Eigen::MatrixXd rhs(ns, q);
  for (int s = 0; s < ns; ++s) {
    rhs.row(s) =
        (u.target->tangent_projector(u.point(s)) * bracket.row(s).transpose()).transpose();
  }
  return rhs;
}

double energy(const SpectralKit& kit, const MapField& u) {
  return 0.5 * u.domain.cell_area() * energy_density(gradient(kit, u)).sum();
}

double energy_alpha(const SpectralKit& kit, const MapField& u, double alpha) {
  const Eigen::VectorXd e = energy_density(gradient(kit, u));
  return 0.5 * u.domain.cell_area() * (1.0 + e.array()).pow(alpha).sum();
}

double lagrangian(const SpectralKit& kit, const MapField& u, const TwistedSpinorField& psi,
                  double alpha) {
  const TwistedSpinorField dpsi = apply_dirac(kit, u, psi);
  return energy_alpha(kit, u, alpha) + 0.5 * l2_inner(psi, dpsi).real();
}

double el_residual(const SpectralKit& kit, const MapField& u, const TwistedSpinorField* psi,
                   double alpha) {
  const Eigen::MatrixXd rhs = alpha_rhs(kit, u, psi, alpha);
  return std::sqrt(u.domain.cell_area() * rhs.squaredNorm());
}

double dissipation_check(const FlowTrace& trace) {
  double acc = 0.0;
  for (const FlowRecord& r : trace.records) acc += r.diss_residual;
  return std::abs(acc);
}

int degree(const SpectralKit& kit, const MapField& u, double* defect) {
  const MapGradient g = gradient(kit, u);
  const int ns = u.domain.sites();
  double total = 0.0;
  if (const auto* torus = dynamic_cast<const CliffordTorus*>(u.target.get())) {
    const double r1sq = torus->r1() * torus->r1();
    const double r2sq = torus->r2() * torus->r2();
    for (int s = 0; s < ns; ++s) {
      // Angle derivatives through the ambient chart: d theta_1 = (z0 dz1 - z1 dz0) / r1^2.
      const double t1x = (u.values(s, 0) * g.dx(s, 1) - u.values(s, 1) * g.dx(s, 0)) / r1sq;
      const double t1y = (u.values(s, 0) * g.dy(s, 1) - u.values(s, 1) * g.dy(s, 0)) / r1sq;
      const double t2x = (u.values(s, 2) * g.dx(s, 3) - u.values(s, 3) * g.dx(s, 2)) / r2sq;
      const double t2y = (u.values(s, 2) * g.dy(s, 3) - u.values(s, 3) * g.dy(s, 2)) / r2sq;
      total += t1x * t2y - t1y * t2x;
    }
    total *= u.domain.cell_area() / (4.0 * M_PI * M_PI);
  } else if (u.target->ambient_dim() == 3 && u.target->dim() == 2) {
    for (int s = 0; s < ns; ++s) {
      const Eigen::Vector3d p = u.point(s);
      const Eigen::Vector3d dx = g.dx.row(s).transpose();
      const Eigen::Vector3d dy = g.dy.row(s).transpose();
      total += p.dot(dx.cross(dy));
    }
    total *= u.domain.cell_area() / (4.0 * M_PI);
  } else {
    fail(ErrorCode::config_error, "degree needs an oriented two-dimensional target");
  }
  const double rounded = std::round(total);
  const double d = std::abs(total - rounded);
  if (defect != nullptr) *defect = d;
  if (d > 0.1) {
    fail(ErrorCode::degenerate_degree,
         "area-form integral " + std::to_string(total) + " is not close to an integer");
  }
  return static_cast<int>(rounded);
}

MapField wrap_map(const TorusDomain& dom, std::shared_ptr<const EmbeddedTarget> torus,
                  const Eigen::Matrix2i& w, const Eigen::Vector2d& phase) {
  const auto* t = dynamic_cast<const CliffordTorus*>(torus.get());
  if (t == nullptr) fail(ErrorCode::config_error, "wrap_map needs a flat torus target");
  Eigen::MatrixXd vals(dom.sites(), 4);
  for (int ix = 0; ix < dom.N1; ++ix) {
    for (int iy = 0; iy < dom.N2; ++iy) {
      const double f1 = 2.0 * M_PI * (w(0, 0) * ix / double(dom.N1) + w(0, 1) * iy / double(dom.N2));
      const double f2 = 2.0 * M_PI * (w(1, 0) * ix / double(dom.N1) + w(1, 1) * iy / double(dom.N2));
      vals.row(dom.site(ix, iy)) =
          t->point_from_angles(f1 + phase(0), f2 + phase(1)).transpose();
    }
  }
  return MapField(dom, std::move(torus), std::move(vals));
}

double wrap_energy(const TorusDomain& dom, const CliffordTorus& torus, const Eigen::Matrix2i& w) {
  const auto ksq = [&](int b) {
    const double k1 = 2.0 * M_PI * w(b, 0) / dom.L1;
    const double k2 = 2.0 * M_PI * w(b, 1) / dom.L2;
    return k1 * k1 + k2 * k2;
  };
  return 0.5 * dom.area() *
         (torus.r1() * torus.r1() * ksq(0) + torus.r2() * torus.r2() * ksq(1));
}

MapField perturb_map(const MapField& u, double amplitude, std::uint64_t seed, int band) {
  const TorusDomain& dom = u.domain;
  if (band < 0 || 2 * band >= std::min(dom.N1, dom.N2)) {
    fail(ErrorCode::config_error, "perturbation band does not fit the grid");
  }
  const int ns = dom.sites();
  const int q = u.target->ambient_dim();
  Rng rng(seed);

  Eigen::MatrixXd field = Eigen::MatrixXd::Zero(ns, q);
  for (int a = 0; a < q; ++a) {
    for (int kx = 0; kx <= band; ++kx) {
      for (int ky = -band; ky <= band; ++ky) {
        if (kx == 0 && ky < 0) continue;
        const double ca = rng.normal();
        const double sa = rng.normal();
        for (int ix = 0; ix < dom.N1; ++ix) {
          for (int iy = 0; iy < dom.N2; ++iy) {
            const double ph =
                2.0 * M_PI * (kx * ix / double(dom.N1) + ky * iy / double(dom.N2));
            field(dom.site(ix, iy), a) += ca * std::cos(ph) + sa * std::sin(ph);
          }
        }
      }
    }
  }

  Eigen::MatrixXd vals(ns, q);
  double sup = 0.0;
  std::vector<Eigen::VectorXd> tangent(static_cast<size_t>(ns));
  for (int s = 0; s < ns; ++s) {
    const Eigen::VectorXd p = u.point(s);
    Eigen::VectorXd v = u.target->tangent_projector(p) * field.row(s).transpose();
    sup = std::max(sup, v.norm());
    tangent[static_cast<size_t>(s)] = std::move(v);
  }
  const double scale = sup > 0.0 ? amplitude / sup : 0.0;
  for (int s = 0; s < ns; ++s) {
    vals.row(s) =
        u.target->project(u.point(s) + scale * tangent[static_cast<size_t>(s)]).transpose();
  }
  return MapField(dom, u.target, std::move(vals));
}

TwistedSpinorField kernel_spinor(TwistedDiracOperator& op, DiracBlock block, double threshold,
                                 int index) {
  const SpectralData data = eigen_solve(op, block);
  const int dim = kernel_dimension(data, threshold);
  if (index < 0 || index >= dim) {
    fail(ErrorCode::config_error, "kernel index " + std::to_string(index) +
                                      " outside a kernel of dimension " + std::to_string(dim));
  }
  std::vector<int> inside;
  for (int j = 0; j < data.eigenvalues.size(); ++j) {
    if (std::abs(data.eigenvalues(j)) < threshold) inside.push_back(j);
  }
  std::sort(inside.begin(), inside.end(), [&](int a, int b) {
    return std::abs(data.eigenvalues(a)) < std::abs(data.eigenvalues(b));
  });
  TwistedSpinorField psi = op.embed(block, data.vectors.col(inside[static_cast<size_t>(index)]));
  const double n = l2_norm(psi);
  if (n < 1e-12) fail(ErrorCode::degenerate_projection, "kernel section has zero norm");
  psi.values /= n;
  return psi;
}

// ---------------------------------------------------------------------------

FlowEngine::FlowEngine(const TorusDomain& dom, std::shared_ptr<const EmbeddedTarget> target,
                       const FlowConfig& cfg)
    : dom_(dom), target_(std::move(target)), cfg_(cfg), kit_(dom) {
  if (cfg_.alpha < 1.0) fail(ErrorCode::config_error, "alpha must be >= 1");
  if (cfg_.dt <= 0.0) fail(ErrorCode::config_error, "dt must be positive");
  if (cfg_.max_steps < 0) fail(ErrorCode::config_error, "max_steps must be nonnegative");
  freq_sq_ = kit_.freq_sq(spin_pp);
}

MapField FlowEngine::map_view(const FlowState& state) const {
  const double tol = cfg_.reproject ? 1e-8 : target_->tube_radius();
  return MapField(dom_, target_, state.u, tol);
}

FlowState FlowEngine::initial_state(const MapField& u0, const TwistedSpinorField* psi0) {
  if (u0.domain != dom_ || u0.target.get() != target_.get()) {
    fail(ErrorCode::config_error, "initial map does not live on the configured domain/target");
  }
  FlowState state;
  state.u = u0.values;
  if (psi0 == nullptr) {
    lambda_ = std::max(cfg_.lambda, 0.0);
    return state;
  }

  TwistedSpinorField anchor = *psi0;
  const double n = l2_norm(anchor);
  if (n < 1e-12) fail(ErrorCode::config_error, "initial spinor has zero norm");
  anchor.values /= n;

  if (cfg_.lambda > 0.0) {
    lambda_ = cfg_.lambda;
  } else {
    TwistedDiracOperator op(u0, cfg_.spin);
    lambda_ = spectral_gap(eigen_solve(op, cfg_.kernel_block));
  }

  anchor_u_ = std::make_unique<MapField>(u0);
  anchor_psi_ = std::move(anchor);

  const ConstraintSpinor cs =
      constraint_spinor(*anchor_u_, anchor_psi_, u0, cfg_.spin, lambda_, cfg_.kernel_block);
  state.psi = cs.psi;
  state.has_spinor = true;
  state.kernel_dim = cs.kernel_dim;
  state.gap = cs.gap;
  state.psi_bar_norm = cs.psi_bar_norm;
  return state;
}

FlowState FlowEngine::step(const FlowState& state) {
  const MapField u = map_view(state);
  const TwistedSpinorField* psi = state.has_spinor ? &state.psi : nullptr;
  const Eigen::MatrixXd rhs = alpha_rhs(kit_, u, psi, cfg_.alpha);
  const Eigen::VectorXd e_old = energy_density(gradient(kit_, u));
  const double e_alpha_old = 0.5 * dom_.cell_area() * (1.0 + e_old.array()).pow(cfg_.alpha).sum();

  const int q = target_->ambient_dim();
  Eigen::MatrixXd next(dom_.sites(), q);
  for (int a = 0; a < q; ++a) {
    const Eigen::VectorXcd uhat = kit_.forward(to_complex(state.u.col(a)));
    const Eigen::VectorXcd rhat = kit_.forward(to_complex(rhs.col(a)));
    Eigen::VectorXcd nhat(uhat.size());
    for (int m = 0; m < uhat.size(); ++m) {
      nhat(m) = (uhat(m) + cfg_.dt * (rhat(m) + freq_sq_(m) * uhat(m))) /
                (1.0 + cfg_.dt * freq_sq_(m));
    }
    next.col(a) = kit_.inverse(nhat).real();
  }

  for (int s = 0; s < dom_.sites(); ++s) {
    const double d = target_->ambient_distance(next.row(s).transpose());
    if (d > target_->tube_radius()) {
      fail(ErrorCode::tube_exit, "site " + std::to_string(s) + " left the tube (distance " +
                                     std::to_string(d) + ")");
    }
  }
  if (cfg_.reproject) {
    for (int s = 0; s < dom_.sites(); ++s) {
      next.row(s) = target_->project(next.row(s).transpose()).transpose();
    }
  }

  FlowState out;
  out.t = state.t + cfg_.dt;
  out.u = std::move(next);

  // Discrete energy identity: the realized update quotient replaces d_t u.
  const double e_alpha_new = energy_alpha(kit_, map_view(out), cfg_.alpha);
  const Eigen::MatrixXd quot = (out.u - state.u) / cfg_.dt;
  const double diss = cfg_.alpha * cfg_.dt * dom_.cell_area() *
                      ((1.0 + e_old.array()).pow(cfg_.alpha - 1.0) *
                       quot.rowwise().squaredNorm().array())
                          .sum();
  out.diss_residual = e_alpha_new - e_alpha_old + diss;

  if (state.has_spinor) {
    const ConstraintSpinor cs = constraint_spinor(*anchor_u_, anchor_psi_, map_view(out),
                                                  cfg_.spin, lambda_, cfg_.kernel_block);
    out.psi = cs.psi;
    out.has_spinor = true;
    out.kernel_dim = cs.kernel_dim;
    out.gap = cs.gap;
    out.psi_bar_norm = cs.psi_bar_norm;
  }
  return out;
}

FlowRecord FlowEngine::snapshot(const FlowState& state) {
  const MapField u = map_view(state);
  const MapGradient g = gradient(kit_, u);
  const Eigen::VectorXd e = energy_density(g);
  FlowRecord rec;
  rec.t = state.t;
  rec.energy = 0.5 * dom_.cell_area() * e.sum();
  rec.energy_alpha = 0.5 * dom_.cell_area() * (1.0 + e.array()).pow(cfg_.alpha).sum();
  rec.diss_residual = state.diss_residual;
  rec.kernel_dim = state.kernel_dim;
  rec.gap = state.gap;
  rec.el_residual =
      el_residual(kit_, u, state.has_spinor ? &state.psi : nullptr, cfg_.alpha);
  rec.degree = degree(kit_, u);
  last_sup_grad_ = std::sqrt(std::max(0.0, e.maxCoeff()));
  return rec;
}

FlowTrace FlowEngine::run(const MapField& u0, const TwistedSpinorField* psi0,
                          FlowState* final_state) {
  FlowTrace trace;
  FlowState state = initial_state(u0, psi0);
  int steps = 0;
  while (true) {
    const FlowRecord rec = snapshot(state);
    trace.records.push_back(rec);
    if (state.has_spinor) {
      trace.constraint_diags.push_back({state.t, state.psi_bar_norm, state.kernel_dim, state.gap});
    }

    if (rec.el_residual <= cfg_.convergence_eps) {
      trace.events.push_back({EventKind::converged, state.t, "el residual below tolerance"});
      break;
    }
    if (last_sup_grad_ > cfg_.gradient_bound) {
      trace.events.push_back({EventKind::gradient_blowup, state.t,
                              "sup |du| = " + std::to_string(last_sup_grad_)});
      break;
    }
    if (steps >= cfg_.max_steps || state.t >= cfg_.t_max - 1e-12) {
      trace.events.push_back({EventKind::max_steps, state.t, "time budget exhausted"});
      break;
    }

    FlowState next;
    try {
      next = step(state);
    } catch (const Error& err) {
      if (err.code() == ErrorCode::tube_exit) {
        trace.events.push_back({EventKind::tube_exit, state.t + cfg_.dt, err.what()});
        break;
      }
      if (err.code() == ErrorCode::ambiguous_cluster) {
        trace.events.push_back({EventKind::kernel_jump, state.t + cfg_.dt,
                                std::string("ambiguous kernel cluster: ") + err.what()});
        break;
      }
      throw;
    }
    if (state.has_spinor && next.kernel_dim > state.kernel_dim) {
      trace.events.push_back({EventKind::kernel_jump, next.t,
                              "kernel dimension rose from " + std::to_string(state.kernel_dim) +
                                  " to " + std::to_string(next.kernel_dim)});
      break;
    }
    state = std::move(next);
    ++steps;
  }
  if (final_state != nullptr) *final_state = std::move(state);
  return trace;
}

}  // namespace spinflow
