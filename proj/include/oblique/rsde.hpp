#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "oblique/domain.hpp"
#include "oblique/field.hpp"
#include "oblique/path.hpp"
#include "oblique/report.hpp"

namespace oblique {

struct ConstantDrift {
  Vec b;
};
/// b = b0 + B x.
struct AffineDrift {
  Vec b0;
  Mat B;
};
/// b = sum_k amplitude_k sin(<wave_k, x> + phase_k): bounded and smooth.
struct TableDrift {
  std::vector<Vec> amplitude;
  std::vector<Vec> wave;
  std::vector<double> phase;
};
using DriftSpec = std::variant<ConstantDrift, AffineDrift, TableDrift>;

/// n x m matrices throughout.
struct ConstantDiffusion {
  Mat S;
};
/// sigma = S0 + sum_i x_i Sx[i].
struct AffineDiffusion {
  Mat S0;
  std::vector<Mat> Sx;
};
/// sigma = S0 + S1 sin(<wave, x> + phase).
struct TableDiffusion {
  Mat S0;
  Mat S1;
  Vec wave;
  double phase = 0.0;
};
using DiffusionSpec = std::variant<ConstantDiffusion, AffineDiffusion, TableDiffusion>;

Vec eval_drift(const DriftSpec& spec, double t, const Vec& x);
Mat eval_diffusion(const DiffusionSpec& spec, double t, const Vec& x);

struct SdeConfig {
  DriftSpec drift;
  DiffusionSpec diffusion;
  /// Declared Lipschitz constant of b and sigma (Frobenius norm).
  double lipschitz = 0.0;
  Vec x0;
  std::size_t steps = 1000;
  std::size_t paths = 1000;
  std::uint64_t seed = 1;
  int noise_dim = 1;
  double boundary_tol = 1e-3;
  /// Ratio dt / eps of the backward-Euler penalty step used as the per-step
  /// correction.
  double micro_ratio = 1e6;
  /// Worker threads; 0 uses the hardware concurrency.
  unsigned workers = 0;
};

/// Shape checks, x0 in the closure at t = 0 (InitialConditionError) and the
/// sampled Lipschitz check (ParameterError when the worst ratio exceeds
/// 1.05 times the declared constant).
void validate(const SdeConfig& cfg, const DomainSpec& domain);

/// Worst sampled |b(x) - b(y)| and |sigma(x) - sigma(y)| over |x - y| in the
/// domain's bounding box.
PropertyRow check_lipschitz(const SdeConfig& cfg, const DomainSpec& domain, std::size_t samples = 4000);

/// Standard normal increments scaled by sqrt(dt) for one path: entry
/// (k * m + j) is component j of step k, keyed by (seed, path, k * m + j).
std::vector<double> noise_table(const SdeConfig& cfg, double horizon, std::size_t path);

struct ReflectedTrajectory {
  SampledPath X;
  SampledPath Lambda;
  std::vector<double> tv;
  std::vector<double> noise;
  /// max_k d(t_k, X(t_k)).
  double max_violation = 0.0;
  double max_angle_deg = 0.0;
};

/// Per-step correction: the point y + mu gamma(t, .) with mu >= 0 solving
/// mu = r d(t, y + mu gamma), r = micro_ratio. Returns false when no bracket
/// is found (divergence).
bool correct_step(const DomainSpec& domain, const ReflectionField& field, double t, const Vec& y, double ratio,
                  Vec& out);

/// Discrete Skorohod map on psi's grid: phi_0 = psi_0 and
/// phi_{k+1} = correct_step(phi_k + psi_{k+1} - psi_k).
SampledPath discrete_skorohod_map(const SampledPath& psi, const DomainSpec& domain, const ReflectionField& field,
                                  double ratio);

/// One path of the Euler scheme on given noise (length steps * m).
ReflectedTrajectory simulate_path(const SdeConfig& cfg, const DomainSpec& domain, const ReflectionField& field,
                                  const Vec& x0, const std::vector<double>& noise);

struct PathSummary {
  Vec X_T;
  double tv_T = 0.0;
  double max_violation = 0.0;
  /// max angle (deg) between nonzero Lambda increments and gamma at the new point.
  double max_angle_deg = 0.0;
  bool failed = false;
};

struct Ensemble {
  std::vector<ReflectedTrajectory> paths;
  std::vector<PathSummary> summaries;
  std::size_t failed = 0;
  std::vector<std::string> failures;
  double max_violation = 0.0;
  double max_angle_deg = 0.0;
};

struct SimulationOptions {
  bool keep_paths = true;
  bool keep_noise = false;
};

/// Path-parallel Euler scheme with per-step correction. Paths whose
/// correction diverges are excluded and counted.
Ensemble simulate_reflected(const SdeConfig& cfg, const DomainSpec& domain, const ReflectionField& field,
                            const SimulationOptions& options = {});

struct PicardResult {
  std::vector<SampledPath> iterates;
  /// gaps[k] = sup_t |X^{k+1} - X^k|, X^0 = x0.
  std::vector<double> sup_gaps;
  bool converged = false;
};

/// X^{k+1} = Gamma(x0 + int b(X^k) ds + int sigma(X^k) dW) on a fixed noise
/// table, Gamma the discrete Skorohod map. Stops once a gap is <= tol.
/// Throws ConvergenceError when the gaps fail to decrease three times in a row.
PicardResult picard_solve(const SdeConfig& cfg, const DomainSpec& domain, const ReflectionField& field,
                          const std::vector<double>& noise, std::size_t n_iter, double tol = 1e-4);

struct ContractionResult {
  double lhs = 0.0;
  double rhs_integral = 0.0;
  double initial_gap_sq = 0.0;
  double fitted_C = 0.0;
  std::size_t pairs = 0;
};

/// Coupled runs from x0 and x0' on shared noise. X, X' are the first Picard
/// iterates (images of the constant paths) and Y, Y' their images;
/// lhs = E sup |Y - Y'|^2, rhs_integral = int_0^T E sup_{r <= s} |X - X'|^2 ds.
ContractionResult contraction_experiment(const SdeConfig& cfg, const Vec& x0, const Vec& x0_prime,
                                         const DomainSpec& domain, const ReflectionField& field);

/// Bounded terminal functionals.
struct ConstantPayoff {
  double value = 1.0;
};
struct CoordinatePayoff {
  int index = 0;
};
/// amplitude * cos(frequency * x_index + phase).
struct CosinePayoff {
  int index = 0;
  double amplitude = 1.0;
  double frequency = 1.0;
  double phase = 0.0;
};
using Payoff = std::variant<ConstantPayoff, CoordinatePayoff, CosinePayoff>;

double eval_payoff(const Payoff& payoff, const Vec& x);

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t paths = 0;
  std::size_t failed = 0;
};

/// Throws EmptyEnsembleError when every path failed.
McEstimate mc_expectation(const SdeConfig& cfg, const DomainSpec& domain, const ReflectionField& field,
                          const Payoff& payoff);

}  // namespace oblique
