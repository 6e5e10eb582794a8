#include "spinflow/index_theory.hpp"

#include <cassert>
#include <cmath>
#include <cstdlib>

namespace spinflow {

int h0_dim(int m) { return m > 0 ? 0 : 1 - m; }

int cp1_kernel_dim(const Cp1TwistData& data) {
  if (data.genus < 0) fail(ErrorCode::config_error, "target genus must be nonnegative");
  const int a = data.a();
  const int sum = h0_dim(a + 1) + h0_dim(1 - a);
  assert(sum == 2 * std::abs(data.deg * (data.genus - 1)));
  return sum;
}

int script_I(int dim_c_kernel) {
  if (dim_c_kernel < 0) fail(ErrorCode::config_error, "kernel dimension must be nonnegative");
  if (dim_c_kernel % 2 != 0) {
    fail(ErrorCode::odd_kernel_dimension,
         "kernel dimension " + std::to_string(dim_c_kernel) + " is odd");
  }
  return (dim_c_kernel / 2) % 2;
}

int index_I(int m, int dim_c_kernel) {
  if (m <= 0) fail(ErrorCode::config_error, "domain dimension must be positive");
  if (dim_c_kernel < 0) fail(ErrorCode::config_error, "kernel dimension must be nonnegative");
  switch (m % 8) {
    case 1:
      return dim_c_kernel % 2;
    case 2:
      if (dim_c_kernel % 2 != 0) {
        fail(ErrorCode::odd_kernel_dimension,
             "kernel dimension " + std::to_string(dim_c_kernel) +
                 " is odd in domain dimension 2 (mod 8)");
      }
      return (dim_c_kernel / 2) % 2;
    case 0:
    case 4:
      fail(ErrorCode::unsupported_index,
           "dimension " + std::to_string(m) + " (mod 8) needs characteristic-class data");
    default:
      return 0;
  }
}

SpectralFlowReport spectral_flow_family(const MapField& u0, const MapField& u1, int steps,
                                        double threshold, const SpinStructure& spin) {
  if (steps < 1) fail(ErrorCode::config_error, "need at least one homotopy step");
  if (u0.domain != u1.domain || u0.target.get() != u1.target.get()) {
    fail(ErrorCode::config_error, "homotopy endpoints live on different domains or targets");
  }
  const int ns = u0.domain.sites();
  const int q = u0.target->ambient_dim();

  SpectralFlowReport report;
  report.quaternionic = u0.target->has_real_structure();
  report.samples.reserve(static_cast<size_t>(steps) + 1);

  for (int j = 0; j <= steps; ++j) {
    const double t = double(j) / steps;
    Eigen::MatrixXd vals(ns, q);
    for (int s = 0; s < ns; ++s) {
      vals.row(s) = u0.target->geodesic(u0.point(s), u1.point(s), t).transpose();
    }
    const MapField ut(u0.domain, u0.target, std::move(vals));
    TwistedDiracOperator op(ut, spin);
    const SpectralData data = eigen_solve(op, DiracBlock::holomorphic);
    FlowSample sample;
    sample.t = t;
    try {
      sample.kernel_dim = kernel_dimension(data, threshold);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::ambiguous_cluster) throw;
      sample.kernel_dim = -1;
      sample.ambiguous = true;
    }
    report.samples.push_back(sample);
  }

  const FlowSample* prev = nullptr;
  for (const FlowSample& s : report.samples) {
    if (s.ambiguous) continue;
    if (prev != nullptr && s.kernel_dim != prev->kernel_dim) {
      FlowJump jump;
      jump.t_before = prev->t;
      jump.t_after = s.t;
      jump.dim_before = prev->kernel_dim;
      jump.dim_after = s.kernel_dim;
      jump.even_change = (s.kernel_dim - prev->kernel_dim) % 2 == 0;
      report.all_jumps_even = report.all_jumps_even && jump.even_change;
      report.jumps.push_back(jump);
    }
    prev = &s;
  }
  return report;
}

}  // namespace spinflow
