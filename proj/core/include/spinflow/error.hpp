#pragma once

#include <stdexcept>
#include <string>

namespace spinflow {

// Failure classes surfaced by the lab. Every value corresponds to one contract
// violation; call sites attach the offending quantity to the message.
enum class ErrorCode {
  outside_tube,          // ambient point beyond the target's tubular radius
  cut_locus,             // geodesic data requested at/beyond the injectivity radius
  structure_unavailable, // complex or real structure missing on this target
  tangency_violation,    // spinor/map data not in the required subbundle
  ambiguous_cluster,     // kernel count unreliable: no clean spectral separation
  contour_hits_spectrum, // resolvent contour passes too close to an eigenvalue
  eigen_failure,         // dense eigensolve failed its residual contract
  solver_failure,        // shifted linear solve produced a non-finite result
  degenerate_projection, // projected constraint spinor collapsed below threshold
  odd_kernel_dimension,  // mod-2 invariant undefined for odd complex kernel dim
  unsupported_index,     // index branch outside the implemented dimensions
  degenerate_degree,     // degree integral too far from an integer
  tube_exit,             // flow update left the tubular neighborhood
  config_error,          // malformed or inadmissible run configuration
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace spinflow
