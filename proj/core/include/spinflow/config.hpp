#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "spinflow/flow.hpp"

namespace spinflow {

// Construction recipes parsed from JSON documents. Unknown keys are rejected
// with the JSON path in the message; parse errors carry line and column.

struct TargetSpec {
  std::string kind = "sphere";  // sphere | clifford_torus
  int ambient = 3;              // sphere only
  double r1 = 1.0;              // torus only
  double r2 = 1.0;

  std::shared_ptr<const EmbeddedTarget> make() const;
};

struct MapSpec {
  std::string kind = "constant";  // constant | wrap | perturbed
  std::optional<Eigen::VectorXd> point;                 // constant (defaults per target)
  Eigen::Matrix2i w = Eigen::Matrix2i::Identity();      // wrap winding
  Eigen::Vector2d phase = Eigen::Vector2d::Zero();      // wrap offsets
  std::shared_ptr<MapSpec> base;                        // perturbed: underlying map
  double amplitude = 0.0;
  int band = 2;

  MapField build(const TorusDomain& dom, std::shared_ptr<const EmbeddedTarget> target,
                 std::uint64_t seed) const;
};

struct SpectrumConfig {
  TorusDomain domain;
  TargetSpec target;
  SpinStructure spin;
  MapSpec map;
  DiracBlock block = DiracBlock::full;
  double lambda = 0.0;  // <= 0: use the measured half-gap
  std::uint64_t seed = 0;
};

struct SpinorSpec {
  std::string kind = "none";  // none | kernel
  int index = 0;
};

struct FlowRunConfig {
  TorusDomain domain;
  TargetSpec target;
  MapSpec map;
  SpinorSpec spinor;
  FlowConfig flow;
  std::uint64_t seed = 0;
};

struct IndexConfig {
  int deg_min = -10;
  int deg_max = 10;
  int genus_min = 0;
  int genus_max = 5;
};

SpectrumConfig parse_spectrum_config(const std::string& text);
FlowRunConfig parse_flow_config(const std::string& text);
IndexConfig parse_index_config(const std::string& text);

std::string to_json(const SpectrumConfig& cfg);
std::string to_json(const FlowRunConfig& cfg);
std::string to_json(const IndexConfig& cfg);

}  // namespace spinflow
