#pragma once

#include <cstdint>
#include <string>

namespace spinflow {

// Options shared by the CLI entry points. A negative seed defers to the
// config document; threads <= 0 leaves the linear algebra default alone.
struct CommandOptions {
  std::string config_path;
  std::string out_dir = ".";
  long long seed = -1;
  int threads = 0;
  bool inject_failure = false;
};

// Each command returns a process exit code:
//   0  success
//   1  verification failure
//   2  inadmissible configuration
//   3  numerical failure at runtime
int cmd_spectrum(const CommandOptions& opt);
int cmd_flow(const CommandOptions& opt);
int cmd_index(const CommandOptions& opt);
int cmd_verify(const CommandOptions& opt);

}  // namespace spinflow
