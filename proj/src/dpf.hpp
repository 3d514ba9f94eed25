#pragma once

#include <cstdint>
#include <vector>

#include "tempo_model.hpp"

namespace rubato::dpf {

struct Particle {
  std::vector<tempo::Node> path;
  double weight = 0.0;       // normalized across the live set
  double log_weight = 0.0;   // unnormalized, running log(prior * likelihood)
  lgssm::GaussianBelief belief;
  double loglik = 0.0;       // accumulated observation log-likelihood
};

struct BeamConfig {
  int beam = 200;       // maximum number of retained paths
  uint64_t seed = 0;
  bool greedy = false;  // deterministic top-B instead of stratified resampling
};

// Run the discrete particle filter over the expanded node chain. Each live
// path is expanded to every legal successor, its belief advanced by one
// Kalman step, and its weight multiplied by the one-step likelihood and the
// transition probability. When the live count exceeds the beam width the set
// is reduced to B paths. Returned weights sum to 1.
std::vector<Particle> run(const std::vector<double>& y,
                          const std::vector<tempo::ScoreEvent>& score,
                          const tempo::Theta& th,
                          const tempo::InitBelief& init,
                          const BeamConfig& cfg);

struct ResampleResult {
  std::vector<int> kept;            // indices into the input
  std::vector<double> new_weights;  // renormalized, one per kept index
};

// Fearnhead-Clifford optimal resampling: solve sum_j min(c*w_j, 1) = B;
// particles with c*w_j >= 1 survive with their original weight, the rest are
// stratified-sampled to fill the budget at weight 1/c. Unbiased before
// renormalization.
ResampleResult fc_resample(const std::vector<double>& weights, int B,
                           uint64_t seed);

struct BestPath {
  std::vector<tempo::Node> path;
  double weight = 0.0;
  double loglik = 0.0;
};

// Highest-weight particle; ties broken by lexicographically smallest node
// sequence.
BestPath best_path(const std::vector<Particle>& particles);

}  // namespace rubato::dpf
