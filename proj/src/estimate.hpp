#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dpf.hpp"

namespace rubato::estimate {

struct FitConfig {
  int beam = 200;
  int restarts = 5;
  int max_evals = 2000;     // per restart
  double tol = 1e-6;        // convergence tolerance on the objective spread
  uint64_t seed = 0;
};

struct FittedPerformance {
  tempo::Theta theta;
  std::vector<tempo::Node> path;
  std::vector<int> behaviors;         // projection of path, labels 1..4
  std::vector<double> smoothed_tempo; // b.p.m., one per note
  double loglik = 0.0;
  double log_prior = 0.0;
  double objective = 0.0;  // loglik + log_prior
  int evals = 0;
  bool converged = false;
};

// Penalized best-path log-likelihood: greedy DPF, refilter along the winning
// path, add the prior penalty. -inf for out-of-support theta.
double objective(const tempo::Theta& th, const std::vector<double>& y,
                 const std::vector<tempo::ScoreEvent>& score,
                 const FitConfig& cfg);

// Unconstrained reparameterization: logs for the positive scalars and the
// negated means, additive log-ratio (first component as reference) for each
// probability row. 12 coordinates total.
inline constexpr int kNumCoords = 12;
std::array<double, kNumCoords> to_unconstrained(const tempo::Theta& th);
tempo::Theta from_unconstrained(const std::array<double, kNumCoords>& u);

FittedPerformance fit(const std::vector<double>& y,
                      const std::vector<tempo::ScoreEvent>& score,
                      const FitConfig& cfg);

// Path and smoothed curve at a fixed theta (no optimization).
FittedPerformance infer(const tempo::Theta& th, const std::vector<double>& y,
                        const std::vector<tempo::ScoreEvent>& score,
                        const FitConfig& cfg);

}  // namespace rubato::estimate
