#pragma once

#include <string>

#include "spinflow/flow.hpp"

namespace spinflow {

// Shortest-exact decimal form of a double (17 significant digits), the
// format used by every CSV emitter so reruns are byte-identical.
std::string format_g17(double x);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Columns: index, eigenvalue, abs_lambda, chirality, cluster_id.
std::string spectrum_csv(const SpectralData& data);

// Pairing defect of the sorted spectrum against its negation.
double spectral_symmetry_defect(const Eigen::VectorXd& eigenvalues);

// {kernel_dim, gap, symmetry_defect, even_multiplicity, block, lambda}.
std::string spectrum_summary_json(const SpectralData& data, double lambda_used);

// One JSON object per line: state records, then constraint diagnostics
// interleaved by time, events at the end.
std::string trace_jsonl(const FlowTrace& trace);

// Raw row-major little-endian float64 arrays plus a JSON sidecar naming
// shape, dtype, and byte order. Writes <dir>/final_state.bin and
// <dir>/final_state.json; the spinor is stored as trailing (re, im) pairs.
void write_state_dump(const std::string& dir, const Eigen::MatrixXd& map_values,
                      const TwistedSpinorField* psi);

// CSV columns: deg, g_N, dim_C, script_I.
std::string index_table_csv(int deg_min, int deg_max, int genus_min, int genus_max);

}  // namespace spinflow
