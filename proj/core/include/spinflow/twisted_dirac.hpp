#pragma once

#include <optional>
#include <vector>

#include "spinflow/fields.hpp"

namespace spinflow {

// Which compression of the operator to work with: the full tangent bundle
// (real rank n per site) or the holomorphic half (complex rank 1, Kahler
// targets only).
enum class DiracBlock { full, holomorphic };

// Twisted Dirac operator along a map: the plain operator on ambient-valued
// spinors compressed by the site-wise tangent projector. The compression is
// realized through per-site orthonormal frames, so the stored matrices are
// Hermitian and their spectra are exactly the spectra of the projected
// operator on the tangential (resp. holomorphic) subspace.
//
// Compressed coordinate layout: full block index (site * n + j) * 2 + c with
// frame column j; holomorphic block index site * 2 + c over the frame
// Z = (t1 - i t2) / sqrt(2), t2 = i_N t1, which spans the +i eigenspace of
// the target complex structure.
class TwistedDiracOperator {
 public:
  TwistedDiracOperator(const MapField& u, const SpinStructure& spin);

  const TorusDomain& domain() const { return u_.domain; }
  const SpinStructure& spin() const { return spin_; }
  const MapField& base_map() const { return u_; }
  int ambient_dim() const { return q_; }
  int tangent_dim() const { return n_; }
  int dim(DiracBlock block) const;

  // Dense Hermitian matrix of the requested block; assembled on first use.
  const Eigen::MatrixXcd& matrix(DiracBlock block);

  // Per-site real orthonormal tangent frame (q x n). When the target is
  // Kahler the second column is i_N applied to the first.
  const Eigen::MatrixXd& real_frame(int site) const { return frames_[static_cast<size_t>(site)]; }
  const Eigen::VectorXcd& holo_frame(int site) const;

  // Isometries between compressed coordinates and ambient sections. For a
  // tangential section, embed(compress(psi)) is the identity on the full
  // block and the pointwise holomorphic projection on the holomorphic block.
  TwistedSpinorField embed(DiracBlock block, const Eigen::VectorXcd& compressed) const;
  Eigen::VectorXcd compress(DiracBlock block, const TwistedSpinorField& psi) const;

 private:
  void assemble(DiracBlock block);

  MapField u_;
  SpinStructure spin_;
  int q_;
  int n_;
  bool kahler_;
  std::vector<Eigen::MatrixXd> frames_;
  std::vector<Eigen::VectorXcd> holo_frames_;
  std::optional<Eigen::MatrixXcd> full_;
  std::optional<Eigen::MatrixXcd> holo_;
};

// Matrix-free application D psi = (site-wise tangent projection of the plain
// operator applied per ambient slot). Agrees with the assembled matrix to
// machine precision on tangential input.
TwistedSpinorField apply_dirac(const SpectralKit& kit, const MapField& u,
                               const TwistedSpinorField& psi, double tangency_tol = 1e-6);

// The same operator written through the projector's second derivative:
// (D psi)^A = (dirac psi)^A - pi^A_BC (grad u^B . psi^C). Equal to apply_dirac
// analytically; discretely they differ by product-rule aliasing, so agreement
// is at spectral accuracy on smooth data, not machine precision.
TwistedSpinorField apply_dirac_geometric(const SpectralKit& kit, const MapField& u,
                                         const TwistedSpinorField& psi);

// Pointwise splitting into the +i / -i eigenspaces of the target complex
// structure acting on the ambient factor (orthogonal, norm-additive).
struct HoloSplit {
  TwistedSpinorField holo;
  TwistedSpinorField anti;
};
HoloSplit split_10_01(const MapField& u, const TwistedSpinorField& psi);

// Full eigendata of one compressed block.
struct SpectralData {
  DiracBlock block = DiracBlock::full;
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXcd vectors;      // orthonormal columns, compressed coordinates
  Eigen::VectorXd chirality;     // <v, G v> per eigenvector
  std::vector<int> cluster_ids;  // chain clusters, tolerance max(1e-8 rel, 1e-10 abs)
};

// Dense Hermitian solve. k limits the output to the k smallest-|lambda|
// pairs (k < 0 keeps everything); residuals are checked against 1e-8.
SpectralData eigen_solve(TwistedDiracOperator& op, DiracBlock block, int k = -1);

// Chain clustering of a sorted eigenvalue list.
std::vector<int> cluster_labels(const Eigen::VectorXd& eigenvalues);

// True when every cluster has even size (the quaternionic parity statement).
bool clusters_all_even(const SpectralData& data);

// Count of |lambda| < threshold, guarded: the set below the threshold must be
// separated from the rest by a relative factor of 10, and the threshold must
// lie inside the spectrum range. Violations raise AmbiguousCluster.
int kernel_dimension(const SpectralData& data, double threshold);

// Half the separation between the near-zero cluster and the rest of the
// spectrum; the default threshold passed downstream.
double spectral_gap(const SpectralData& data);

// Orthogonal projection (compressed coordinates) onto the span of
// eigenvectors with |lambda| < threshold.
Eigen::VectorXcd project_kernel_eigen(const SpectralData& data, const Eigen::VectorXcd& v,
                                      double threshold);

// Resolvent-quadrature projection: trapezoidal rule with the given node count
// on the circle of radius threshold / 2, one shifted dense solve per node.
// The eigenvalue list is used only to reject contours that graze the
// spectrum (distance < 1e-6).
Eigen::VectorXcd project_kernel_contour(TwistedDiracOperator& op, DiracBlock block,
                                        const Eigen::VectorXd& eigenvalues,
                                        const Eigen::VectorXcd& v, double threshold, int nodes);

// Antilinear quaternionic structure on holomorphic sections over targets with
// a parallel real structure: ambient form R(u) sigma_2 conj(psi).
TwistedSpinorField quaternionic_J(const MapField& u, const TwistedSpinorField& psi);

// The same structure in compressed holomorphic coordinates:
// phi(s) -> sigma_2 conj(phi(s)). Squares to -1, anticommutes with i.
Eigen::VectorXcd quaternionic_J_compressed(const Eigen::VectorXcd& phi);

// Max relative commutator defect of the holomorphic block with the
// quaternionic structure over a deterministic band-limited probe set.
double j_commutation_defect(TwistedDiracOperator& op, int probes = 16);

}  // namespace spinflow
