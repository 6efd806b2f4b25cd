#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "oblique/assumptions.hpp"
#include "oblique/domain.hpp"
#include "oblique/field.hpp"
#include "oblique/path.hpp"
#include "oblique/pde.hpp"
#include "oblique/rsde.hpp"
#include "oblique/skorohod.hpp"
#include "oblique/testfn.hpp"

namespace oblique {

/// Overrides for the default tolerances of every module.
struct Tolerances {
  double boundary_tol = 1e-3;
  double direction_tol_deg = 2.0;
  double interior_fraction_tol = 1e-2;
  double oracle = 1e-3;
  double comparison = 1e-12;
  double margin = 1e-8;
  double fd_tolerance = 1e-5;
  /// Monte Carlo rows pass when |estimate - reference| <= sigmas * stderr + slack.
  double mc_sigmas = 3.0;
  double mc_slack = 5e-3;
};

struct SkorohodExperiment {
  SampledPath psi;
  PenaltyConfig penalty;
  /// Compare against the half-line oracle (1D domains whose upper end never binds).
  bool oracle = false;
};

struct SdeExperiment {
  SdeConfig sde;
  std::optional<Payoff> payoff;
  std::optional<double> expected;
  std::size_t save_paths = 0;
};

struct PdeExperiment {
  PdeProblem problem;
  PdeGrid grid;
  /// Second initial datum for the comparison check (must lie above the first).
  std::optional<Payoff> compare_with;
};

struct CrosscheckExperiment {
  double sigma = 1.0;
  Payoff g;
  PdeGrid grid;
  SdeConfig mc;
};

struct VerifyDomainExperiment {
  ConeCertificate certificate;
  SampleBudget budget;
};

struct VerifyTestfnExperiment {
  TestFunctionParams params;
  TestSampler sampler;
};

using Experiment = std::variant<SkorohodExperiment, SdeExperiment, PdeExperiment, CrosscheckExperiment,
                                VerifyDomainExperiment, VerifyTestfnExperiment>;

struct ExperimentConfig {
  std::string source;
  /// skorohod | sde | pde | crosscheck | verify-domain | verify-testfn
  std::string kind;
  std::optional<std::uint64_t> seed;
  std::string output;
  DomainSpec domain;
  ReflectionField field;
  Tolerances tolerances;
  Experiment experiment;
};

/// Overrides applied after parsing (command-line flags).
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> output;
};

/// Parses a TOML experiment file. Throws ConfigError with "file:line: field"
/// diagnostics on syntax errors, missing or unknown fields and bad values,
/// and IoError when the file (or a referenced psi file) cannot be read.
ExperimentConfig load_config(const std::string& path, const RunOverrides& overrides = {});

/// Same, from text; relative file references resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::string& source, const std::string& base_dir,
                              const RunOverrides& overrides = {});

}  // namespace oblique
