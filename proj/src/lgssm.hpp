#pragma once

#include <cstddef>
#include <vector>

#include "mat2.hpp"

namespace rubato::lgssm {

// Time-varying linear-Gaussian state-space machinery for state dimension 2
// and scalar observations:
//   x_{i} = d_i + T_i x_{i-1} + eta_i,   eta_i ~ N(0, Q_i)
//   y_i   = c_i + Z_i x_i + eps_i,       eps_i ~ N(0, G_i)
// Step i advances the belief with dyn_seq[i] and then conditions on y_i; the
// first step maps the initial belief into the first predicted state.

struct StepDynamics {
  Vec2 d;
  Mat2 T;
  Mat2 Q;  // symmetric PSD, rank 0..2 allowed
};

struct StepMeasurement {
  double c = 0.0;
  double z0 = 1.0, z1 = 0.0;  // loading row Z = (z0 z1)
  double G = 1.0;             // observation variance, > 0
};

struct GaussianBelief {
  Vec2 mean;
  Mat2 cov;  // kept symmetric
};

struct FilterResult {
  std::vector<GaussianBelief> predicted;  // x~_i, P_i
  std::vector<GaussianBelief> updated;    // x_{i|i}, P_{i|i}
  std::vector<double> y_pred;             // y~_i
  std::vector<double> forecast_var;       // F_i > 0
  std::vector<double> innovation;         // v_i
  double loglik = 0.0;                    // sum of exact Gaussian log-densities
};

struct FilterStep {
  GaussianBelief predicted;
  GaussianBelief updated;
  double y_pred;
  double forecast_var;
  double innovation;
  double ll_inc;
};

// One predict + update. ll_inc is the exact log N(y; y~, F) including
// normalizing constants.
FilterStep filter_step(const GaussianBelief& prior, const StepDynamics& dyn,
                       const StepMeasurement& meas, double y);

FilterResult filter(const std::vector<double>& y,
                    const std::vector<StepDynamics>& dyn_seq,
                    const std::vector<StepMeasurement>& meas_seq,
                    const GaussianBelief& init);

struct SmoothResult {
  std::vector<Vec2> x_hat;    // E[x_i | y_1..y_n]
  std::vector<double> y_hat;  // c_i + Z_i x_hat_i
};

// Rauch-Tung-Striebel backward pass. Predicted covariances may be singular
// (rank-deficient Q is the norm here), so the gain uses a pseudo-inverse.
SmoothResult smooth(const FilterResult& fr,
                    const std::vector<StepDynamics>& dyn_seq,
                    const std::vector<StepMeasurement>& meas_seq);

}  // namespace rubato::lgssm
