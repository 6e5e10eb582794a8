#include "spinflow/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "spinflow/index_theory.hpp"

namespace spinflow {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "binary dumps assume a little-endian host");

json record_json(const FlowRecord& r) {
  return json{{"t", r.t},
              {"E", r.energy},
              {"E_alpha", r.energy_alpha},
              {"diss_residual", r.diss_residual},
              {"kernel_dim", r.kernel_dim},
              {"gap", r.gap},
              {"el_residual", r.el_residual},
              {"degree", r.degree}};
}

}  // namespace

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::config_error, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::config_error, "cannot write " + path);
  out << content;
}

std::string spectrum_csv(const SpectralData& data) {
  std::string out = "index,eigenvalue,abs_lambda,chirality,cluster_id\n";
  for (int i = 0; i < data.eigenvalues.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_g17(data.eigenvalues(i));
    out += ',';
    out += format_g17(std::abs(data.eigenvalues(i)));
    out += ',';
    out += format_g17(data.chirality(i));
    out += ',';
    out += std::to_string(data.cluster_ids[static_cast<size_t>(i)]);
    out += '\n';
  }
  return out;
}

double spectral_symmetry_defect(const Eigen::VectorXd& eigenvalues) {
  Eigen::VectorXd sorted = eigenvalues;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  double defect = 0.0;
  const int n = static_cast<int>(sorted.size());
  for (int i = 0; i < n; ++i) defect = std::max(defect, std::abs(sorted(i) + sorted(n - 1 - i)));
  return defect;
}

std::string spectrum_summary_json(const SpectralData& data, double lambda_used) {
  json j;
  j["kernel_dim"] = kernel_dimension(data, lambda_used);
  j["gap"] = spectral_gap(data);
  j["symmetry_defect"] = spectral_symmetry_defect(data.eigenvalues);
  j["even_multiplicity"] = clusters_all_even(data);
  j["block"] = data.block == DiracBlock::full ? "full" : "(1,0)";
  j["lambda"] = lambda_used;
  return j.dump(2) + "\n";
}

std::string trace_jsonl(const FlowTrace& trace) {
  std::string out;
  size_t diag = 0;
  for (const FlowRecord& r : trace.records) {
    out += record_json(r).dump();
    out += '\n';
    while (diag < trace.constraint_diags.size() &&
           trace.constraint_diags[diag].t <= r.t + 1e-15) {
      const ConstraintDiag& d = trace.constraint_diags[diag++];
      out += json{{"t", d.t},
                  {"psi_bar_norm", d.psi_bar_norm},
                  {"kernel_dim", d.kernel_dim},
                  {"gap", d.gap}}
                 .dump();
      out += '\n';
    }
  }
  for (const FlowEvent& e : trace.events) {
    json j{{"event", to_string(e.kind)}, {"t", e.t}};
    if (!e.note.empty()) j["note"] = e.note;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_state_dump(const std::string& dir, const Eigen::MatrixXd& map_values,
                      const TwistedSpinorField* psi) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path bin = std::filesystem::path(dir) / "final_state.bin";
  std::ofstream out(bin, std::ios::binary);
  if (!out) fail(ErrorCode::config_error, "cannot write " + bin.string());

  const auto put = [&out](double v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  for (int s = 0; s < map_values.rows(); ++s) {
    for (int a = 0; a < map_values.cols(); ++a) put(map_values(s, a));
  }
  json arrays = json::array();
  arrays.push_back(json{{"name", "map"},
                        {"dtype", "float64"},
                        {"shape", json::array({map_values.rows(), map_values.cols()})},
                        {"offset_bytes", 0}});
  if (psi != nullptr) {
    const std::int64_t offset = map_values.size() * 8;
    for (int s = 0; s < psi->values.rows(); ++s) {
      for (int c = 0; c < psi->values.cols(); ++c) {
        put(psi->values(s, c).real());
        put(psi->values(s, c).imag());
      }
    }
    arrays.push_back(json{{"name", "spinor"},
                          {"dtype", "float64"},
                          {"shape", json::array({psi->values.rows(), psi->values.cols(), 2})},
                          {"offset_bytes", offset}});
  }
  json sidecar;
  sidecar["file"] = "final_state.bin";
  sidecar["byte_order"] = "little";
  sidecar["arrays"] = arrays;
  write_text_file((std::filesystem::path(dir) / "final_state.json").string(),
                  sidecar.dump(2) + "\n");
}

std::string index_table_csv(int deg_min, int deg_max, int genus_min, int genus_max) {
  std::string out = "deg,g_N,dim_C,script_I\n";
  for (int deg = deg_min; deg <= deg_max; ++deg) {
    for (int g = genus_min; g <= genus_max; ++g) {
      const int dim = cp1_kernel_dim({deg, g});
      out += std::to_string(deg) + ',' + std::to_string(g) + ',' + std::to_string(dim) + ',' +
             std::to_string(script_I(dim)) + '\n';
    }
  }
  return out;
}

}  // namespace spinflow
