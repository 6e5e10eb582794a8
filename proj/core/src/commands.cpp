#include "spinflow/commands.hpp"

#include <cstdio>
#include <exception>
#include <string>

#include <Eigen/Core>

#include "spinflow/config.hpp"
#include "spinflow/error.hpp"
#include "spinflow/io.hpp"
#include "spinflow/verify.hpp"

namespace spinflow {

namespace {

void apply_threads(const CommandOptions& opt) {
  if (opt.threads > 0) Eigen::setNbThreads(opt.threads);
}

int exit_code_for(const Error& err) {
  return err.code() == ErrorCode::config_error ? 2 : 3;
}

// Shared wrapper: config/runtime faults to the documented exit codes.
template <typename Body>
int guarded(Body&& body) {
  try {
    return body();
  } catch (const Error& err) {
    std::fprintf(stderr, "error: %s [%s]\n", err.what(), to_string(err.code()));
    return exit_code_for(err);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 3;
  }
}

std::string out_path(const CommandOptions& opt, const char* name) {
  if (opt.out_dir.empty() || opt.out_dir == ".") return name;
  return opt.out_dir + "/" + name;
}

}  // namespace

int cmd_spectrum(const CommandOptions& opt) {
  return guarded([&]() {
    apply_threads(opt);
    SpectrumConfig cfg = parse_spectrum_config(read_text_file(opt.config_path));
    if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);

    auto target = cfg.target.make();
    MapField u = cfg.map.build(cfg.domain, target, cfg.seed);
    TwistedDiracOperator op(u, cfg.spin);
    SpectralData data = eigen_solve(op, cfg.block);
    double lambda = cfg.lambda > 0.0 ? cfg.lambda : spectral_gap(data);

    write_text_file(out_path(opt, "spectrum.csv"), spectrum_csv(data));
    write_text_file(out_path(opt, "summary.json"), spectrum_summary_json(data, lambda));
    std::printf("spectrum: %d eigenvalues, kernel dim %d at threshold %s\n",
                static_cast<int>(data.eigenvalues.size()), kernel_dimension(data, lambda),
                format_g17(lambda).c_str());
    return 0;
  });
}

int cmd_flow(const CommandOptions& opt) {
  return guarded([&]() {
    apply_threads(opt);
    FlowRunConfig cfg = parse_flow_config(read_text_file(opt.config_path));
    if (opt.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opt.seed);

    auto target = cfg.target.make();
    MapField u0 = cfg.map.build(cfg.domain, target, cfg.seed);
    FlowEngine engine(cfg.domain, target, cfg.flow);

    TwistedSpinorField psi0;
    bool with_spinor = cfg.spinor.kind == "kernel";
    if (with_spinor) {
      TwistedDiracOperator op(u0, cfg.flow.spin);
      SpectralData data = eigen_solve(op, cfg.flow.kernel_block);
      double thr = cfg.flow.lambda > 0.0 ? cfg.flow.lambda : spectral_gap(data);
      psi0 = kernel_spinor(op, cfg.flow.kernel_block, thr, cfg.spinor.index);
    }

    FlowState final_state;
    FlowTrace trace = engine.run(u0, with_spinor ? &psi0 : nullptr, &final_state);

    write_text_file(out_path(opt, "trace.jsonl"), trace_jsonl(trace));
    write_state_dump(opt.out_dir.empty() ? "." : opt.out_dir, final_state.u,
                     final_state.has_spinor ? &final_state.psi : nullptr);
    const FlowRecord& last = trace.records.back();
    std::printf("flow: %zu records, stop \"%s\" at t = %s, E_alpha = %s\n", trace.records.size(),
                trace.events.empty() ? "none" : to_string(trace.events.back().kind),
                format_g17(last.t).c_str(), format_g17(last.energy_alpha).c_str());
    return 0;
  });
}

int cmd_index(const CommandOptions& opt) {
  return guarded([&]() {
    IndexConfig cfg;
    if (!opt.config_path.empty()) cfg = parse_index_config(read_text_file(opt.config_path));
    write_text_file(out_path(opt, "index.csv"),
                    index_table_csv(cfg.deg_min, cfg.deg_max, cfg.genus_min, cfg.genus_max));
    int rows = (cfg.deg_max - cfg.deg_min + 1) * (cfg.genus_max - cfg.genus_min + 1);
    std::printf("index: %d rows over deg [%d, %d], genus [%d, %d]\n", rows, cfg.deg_min,
                cfg.deg_max, cfg.genus_min, cfg.genus_max);
    return 0;
  });
}

int cmd_verify(const CommandOptions& opt) {
  return guarded([&]() {
    apply_threads(opt);
    auto results = run_verification(opt.inject_failure);
    int failed = 0;
    for (const auto& r : results) {
      if (!r.pass) ++failed;
      std::printf("%s %s: %s%s%s\n", r.pass ? "PASS" : "FAIL", r.group.c_str(), r.name.c_str(),
                  r.detail.empty() ? "" : " -- ", r.detail.c_str());
    }
    std::printf("%d checks, %d failed\n", static_cast<int>(results.size()), failed);
    return failed == 0 ? 0 : 1;
  });
}

}  // namespace spinflow
