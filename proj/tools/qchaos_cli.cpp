// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "qchaos/qchaos.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool subtract_t0 = false;
  bool svg = false;
  bool quiet = false;
};

int fail(qchaos_status s, const char* what) {
  std::fprintf(stderr, "qchaos: %s failed (%s): %s\n", what, qchaos_status_string(s), qchaos_last_error());
  return static_cast<int>(s) == 0 ? 1 : (s == QCHAOS_E_INTERNAL ? 70 : 10 + static_cast<int>(s));
}

int execute(const std::string& mode, const Options& o) {
  qchaos_config* cfg = nullptr;
  qchaos_status s = qchaos_config_load(o.config.c_str(), &cfg);
  if (s != QCHAOS_OK) return fail(s, "loading config");
  if (o.seed && (s = qchaos_config_set_seed(cfg, *o.seed)) != QCHAOS_OK) return fail(s, "--seed");
  if (o.threads && (s = qchaos_config_set_threads(cfg, *o.threads)) != QCHAOS_OK) return fail(s, "--threads");
  if (o.subtract_t0 && (s = qchaos_config_set_subtract_t0(cfg, 1)) != QCHAOS_OK) return fail(s, "--subtract-t0");
  if (o.svg && (s = qchaos_config_set_svg(cfg, 1)) != QCHAOS_OK) return fail(s, "--svg");
  const std::string out = o.out.empty() ? "qchaos-out/" + mode : o.out;
  qchaos_result* res = nullptr;
  s = qchaos_run(cfg, mode.c_str(), out.c_str(), &res);
  qchaos_config_free(cfg);
  if (s != QCHAOS_OK) return fail(s, mode.c_str());
  if (!o.quiet) std::fputs(qchaos_result_summary(res), stdout);
  qchaos_result_free(res);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qchaos: OTOC, harmonics and level statistics of coupled nonlinear oscillators"};
  app.set_version_flag("--version", std::string(qchaos_version()));
  app.require_subcommand(1);

  const std::pair<const char*, const char*> modes[] = {
      {"classical-otoc", "classical OTOC C_pp over an energy-shell ensemble"},
      {"quantum-otoc", "quantum OTOC C_pp for coherent states"},
      {"classical-m2", "classical second moment of the harmonics distribution"},
      {"quantum-m2", "quantum second moment 2 sum Var(n_k)"},
      {"spectrum", "level-spacing statistics and the Delta parameter"},
      {"mqc", "multiple-quantum-coherence echo and its intensities"},
      {"scan", "restartable beta scan of v_bar and Delta"},
      {"fit", "growth-law fit and saturation analysis of a CSV series"},
  };
  Options opts;
  std::string chosen;
  for (const auto& [name, help] : modes) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output directory (default qchaos-out/<mode>)");
    sub->add_option("--seed", opts.seed, "master seed, overrides the config");
    sub->add_option("--threads", opts.threads, "worker threads; outputs do not depend on it")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--subtract-t0", opts.subtract_t0, "subtract the t=0 value from M2 series");
    sub->add_flag("--svg", opts.svg, "also write an SVG chart");
    sub->add_flag("-q,--quiet", opts.quiet, "do not print the JSON summary");
    sub->callback([&chosen, n = std::string(name)] { chosen = n; });
  }
  CLI11_PARSE(app, argc, argv);
  return execute(chosen, opts);
}
