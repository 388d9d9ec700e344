// Copyright 2026 The qchaos Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration, run drivers and file output for every CLI mode.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qchaos/analysis.hpp"
#include "qchaos/classical.hpp"
#include "qchaos/mqc.hpp"
#include "qchaos/quantum.hpp"
#include "qchaos/spectral.hpp"

namespace qchaos {

enum class RunMode {
  kClassicalOtoc,
  kQuantumOtoc,
  kClassicalM2,
  kQuantumM2,
  kSpectrum,
  kMqc,
  kScan,
  kFit,
};

const char* to_string(RunMode mode);
RunMode parse_run_mode(const std::string& s);

struct TimeGridSpec {
  double t_max = 20.0;
  int n_samples = 201;
  bool log_spacing = false;
  double t_min = 0.01;  // first nonzero time of a log grid

  std::vector<double> build() const;
};

struct FitSpec {
  GrowthLaw law = GrowthLaw::kExponential;
  std::optional<std::pair<double, double>> window;
  SaturationOptions saturation;
  std::string input;              // fit mode: CSV file
  std::string column = "log_mean";
  bool log_space = true;          // whether `column` already holds logs
};

struct ScanSpec {
  std::vector<double> betas;
  bool otoc = true;
  bool delta = true;
  double spectrum_hbar = 0.0;  // 0 -> same hbar as the OTOC runs
};

struct RunConfig {
  std::optional<RunMode> mode;
  ModelParams model = ModelParams::quartic(1.0);
  double hbar = 0.125;
  ShellSpec shell;
  std::vector<PhasePoint> centers;  // explicit centers replace shell sampling
  int ensemble_samples = 50;
  TimeGridSpec times;
  IntegratorOptions integrator;
  PropagatorSpec propagator;
  int n_max = 0;  // quantum Fock cutoff per mode; required by quantum modes
  double max_edge_population = 1e-8;
  int batch = 16;
  LevelStatsOptions spectrum;
  std::optional<PhaseGrid> mqc_grid;  // default: Nyquist grid of the basis
  FitSpec fit;
  ScanSpec scan;
  std::uint64_t seed = 1;
  int threads = 1;
  bool subtract_t0 = false;
  bool svg = false;

  void validate() const;  // throws ConfigError
};

// Parses and validates a JSON document; unknown keys are errors.
RunConfig parse_config(const std::string& json_text);

// Fully resolved configuration as canonical JSON. Threads and svg are
// excluded since they do not change any data.
std::string canonical_config(const RunConfig& cfg);
// FNV-1a 64 of canonical_config, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// Shortest round-trip decimal form.
std::string format_double(double x);

// Executes `mode` (or cfg.mode), writes its files into out_dir and returns
// the JSON summary that was written to out_dir/summary.json.
std::string run(const RunConfig& cfg, const std::string& out_dir,
                std::optional<RunMode> mode = std::nullopt);

}  // namespace qchaos
