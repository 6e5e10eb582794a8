#include <doctest.h>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinflow/config.hpp"
#include "spinflow/io.hpp"
#include "test_util.hpp"

using namespace spinflow;
using testutil::thrown_code;

namespace {

std::filesystem::path scratch_dir() {
  auto p = std::filesystem::temp_directory_path() / "spinflow_io_test";
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("config_io") {

TEST_CASE("full flow document") {
  const std::string doc = R"json({
    "domain": {"L1": 6.283185307179586, "L2": 6.283185307179586, "Nx": 16, "Ny": 16},
    "target": {"kind": "clifford_torus", "r1": 1.0, "r2": 1.0},
    "spin_structure": ["periodic", "periodic"],
    "map": {"kind": "perturbed", "base": {"kind": "wrap", "w": [[1, 0], [0, 1]]},
            "amplitude": 0.05, "band": 2},
    "spinor": {"kind": "kernel", "index": 1},
    "alpha": 1.05, "dt": 0.002, "t_max": 0.5, "max_steps": 40,
    "kernel_block": "(1,0)", "seed": 7
  })json";
  FlowRunConfig cfg = parse_flow_config(doc);
  CHECK(cfg.domain.N1 == 16);
  CHECK(cfg.domain.N2 == 16);
  CHECK(cfg.flow.spin == spin_pp);
  CHECK(cfg.map.kind == "perturbed");
  CHECK(cfg.map.base->kind == "wrap");
  CHECK(cfg.spinor.kind == "kernel");
  CHECK(cfg.spinor.index == 1);
  CHECK(cfg.flow.alpha == 1.05);
  CHECK(cfg.flow.kernel_block == DiracBlock::holomorphic);
  CHECK(cfg.seed == 7);

  MapField u = cfg.map.build(cfg.domain, cfg.target.make(), cfg.seed);
  CHECK(u.domain.sites() == 256);

  // Serialization re-parses to the same structure.
  FlowRunConfig again = parse_flow_config(to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));
}

TEST_CASE("map recipe guards") {
  TorusDomain dom;
  TargetSpec sphere;  // kind=sphere, ambient=3

  MapSpec off;
  off.kind = "constant";
  off.point = Eigen::Vector3d(2.0, 0.0, 0.0);  // outside the tube
  CHECK(thrown_code([&] { off.build(dom, sphere.make(), 0); }) == ErrorCode::config_error);

  MapSpec near;
  near.kind = "constant";
  near.point = Eigen::Vector3d(0.0, 0.0, 1.00001);  // inside tube but not on the sphere
  CHECK(thrown_code([&] { near.build(dom, sphere.make(), 0); }) == ErrorCode::config_error);

  CHECK(thrown_code([] {
          parse_flow_config(R"({"target": {"kind": "clifford_torus"},
                                "spin_structure": "periodic-periodic",
                                "map": {"kind": "wrap", "w": [[1, 0], [0, 1.5]]}})");
        }) == ErrorCode::config_error);
  CHECK(thrown_code([] {
          parse_flow_config(R"({"target": {"kind": "clifford_torus"},
                                "spin_structure": "periodic-periodic",
                                "map": {"kind": "perturbed",
                                        "base": {"kind": "constant"}}})");
        }) == ErrorCode::config_error);  // missing amplitude
  CHECK(thrown_code([] {
          parse_flow_config(R"({"target": {"kind": "clifford_torus"},
                                "spin_structure": "periodic-periodic",
                                "map": {"kind": "perturbed", "amplitude": 0.1,
                                        "base": {"kind": "perturbed", "amplitude": 0.1,
                                                 "base": {"kind": "constant"}}}})");
        }) == ErrorCode::config_error);  // nested perturbations
}

TEST_CASE("grammar aliases and rejection paths") {
  // N1/N2 and the joined spin label are the other accepted spellings.
  SpectrumConfig cfg = parse_spectrum_config(R"({
    "domain": {"N1": 12, "N2": 10},
    "target": {"kind": "sphere"},
    "spin_structure": "antiperiodic-periodic",
    "map": {"kind": "constant"},
    "block": "full"
  })");
  CHECK(cfg.domain.N1 == 12);
  CHECK(cfg.domain.N2 == 10);
  CHECK(cfg.spin == spin_ap);

  auto unknown = thrown_code([] {
    parse_spectrum_config(R"({"target": {"kind": "sphere", "radius": 2},
                              "spin_structure": "periodic-periodic",
                              "map": {"kind": "constant"}})");
  });
  CHECK(unknown == ErrorCode::config_error);

  // Malformed documents report the position.
  try {
    parse_spectrum_config("{\n  \"target\": {\n");
    CHECK(false);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::config_error);
    CHECK(std::string(err.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("index range validation") {
  IndexConfig cfg = parse_index_config(R"({"deg_min": -2, "deg_max": 2, "genus_max": 3})");
  CHECK(cfg.deg_min == -2);
  CHECK(cfg.genus_max == 3);
  CHECK(thrown_code([] { parse_index_config(R"({"deg_min": 3, "deg_max": 1})"); }) ==
        ErrorCode::config_error);
  CHECK(thrown_code([] { parse_index_config(R"({"genus_min": -1})"); }) ==
        ErrorCode::config_error);
}

TEST_CASE("spectrum table shape") {
  TorusDomain dom(2 * M_PI, 2 * M_PI, 4, 4);
  auto tgt = make_clifford_torus();
  const auto& geom = *dynamic_cast<const CliffordTorus*>(tgt.get());
  MapField u = constant_map(dom, tgt, geom.point_from_angles(0.0, 0.0));
  TwistedDiracOperator op(u, spin_aa);
  SpectralData data = eigen_solve(op, DiracBlock::holomorphic);

  std::string csv = spectrum_csv(data);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "index,eigenvalue,abs_lambda,chirality,cluster_id");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(rows == data.eigenvalues.size());
}

TEST_CASE("trace lines are one json object each") {
  FlowTrace trace;
  trace.records.push_back({0.0, 1.0, 1.5, 0.0, 2, 0.4, 0.1, 1});
  trace.records.push_back({0.1, 0.9, 1.4, 1e-5, 2, 0.4, 0.05, 1});
  trace.constraint_diags.push_back({0.1, 0.93, 2, 0.4});
  trace.events.push_back({EventKind::converged, 0.1, "residual under eps"});

  std::istringstream is(trace_jsonl(trace));
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) {
    ++lines;
    auto j = nlohmann::json::parse(line);
    CHECK(j.is_object());
  }
  CHECK(lines == 4);
}

TEST_CASE("state dump round trip") {
  TorusDomain dom(2 * M_PI, 2 * M_PI, 4, 4);
  auto tgt = make_clifford_torus();
  const auto& geom = *dynamic_cast<const CliffordTorus*>(tgt.get());
  MapField u = constant_map(dom, tgt, geom.point_from_angles(0.2, -0.4));
  TwistedSpinorField psi(dom, spin_pp, 4);
  for (int s = 0; s < dom.sites(); ++s)
    for (int c = 0; c < 8; ++c) psi.values(s, c) = std::complex<double>(s + 0.25 * c, -c);

  auto dir = scratch_dir();
  write_state_dump(dir.string(), u.values, &psi);

  const auto sidecar = nlohmann::json::parse(read_text_file((dir / "final_state.json").string()));
  CHECK(sidecar.at("byte_order") == "little");
  CHECK(sidecar.at("arrays").size() == 2);
  CHECK(sidecar.at("arrays")[0].at("name") == "map");
  CHECK(sidecar.at("arrays")[1].at("offset_bytes").get<std::int64_t>() == 16 * 4 * 8);

  std::string raw = read_text_file((dir / "final_state.bin").string());
  CHECK(raw.size() == 16 * 4 * 8 + 16 * 8 * 16);

  const double* words = reinterpret_cast<const double*>(raw.data());
  size_t w = 0;
  for (int s = 0; s < 16; ++s)
    for (int a = 0; a < 4; ++a) CHECK(words[w++] == u.values(s, a));
  for (int s = 0; s < 16; ++s)
    for (int c = 0; c < 8; ++c) {
      CHECK(words[w++] == psi.values(s, c).real());
      CHECK(words[w++] == psi.values(s, c).imag());
    }
}

TEST_CASE("missing files are configuration errors") {
  CHECK(thrown_code([] { read_text_file("/nonexistent/spinflow.json"); }) ==
        ErrorCode::config_error);
}

}  // TEST_SUITE
