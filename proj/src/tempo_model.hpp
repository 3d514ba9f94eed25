#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lgssm.hpp"

namespace rubato::tempo {

// Four performance behaviors: 1 constant tempo, 2 deceleration,
// 3 acceleration, 4 single-note stress. Deceleration and acceleration must
// persist at least two notes, and stress is a one-note excursion bracketed by
// constant tempo. The dwell constraints are encoded by splitting behaviors 2
// and 3 into enter/continue nodes, giving a first-order chain on 6 nodes.

enum class Node : uint8_t {
  Const = 0,
  DecelEnter = 1,
  DecelCont = 2,
  AccelEnter = 3,
  AccelCont = 4,
  Stress = 5,
};
inline constexpr int kNumNodes = 6;

// Projection onto the behavior label 1..4.
inline int behavior(Node n) {
  switch (n) {
    case Node::Const: return 1;
    case Node::DecelEnter:
    case Node::DecelCont: return 2;
    case Node::AccelEnter:
    case Node::AccelCont: return 3;
    case Node::Stress: return 4;
  }
  return 0;
}

// Legal successors of each node, in fixed enumeration order.
std::span<const Node> successors(Node n);

// The 11 free parameters of one recording's model. sigma2_acc and
// sigma2_stress are structurally fixed at 1.
struct Theta {
  double sigma2_eps = 400.0;   // observation variance (b.p.m.^2)
  double mu_tempo = 132.0;     // mean tempo re-entry level (b.p.m.)
  double mu_acc = -10.0;       // per-note tempo increment on entering 2/3; < 0
  double mu_stress = -40.0;    // stress offset; < 0
  double sigma2_tempo = 400.0; // variance of tempo re-entry (b.p.m.^2)
  double sigma2_acc = 1.0;     // fixed
  double sigma2_stress = 1.0;  // fixed
  std::array<double, 4> row1 = {0.85, 0.05, 0.02, 0.08};  // from behavior 1
  std::array<double, 3> row2 = {4.0 / 15, 10.0 / 15, 1.0 / 15};  // from 2
  std::array<double, 3> row3 = {5.0 / 15, 3.0 / 15, 7.0 / 15};   // from 3

  bool in_support() const;
};

// Theta at the prior means of the penalty distributions, with mu_tempo set to
// the recording's mean observed tempo.
Theta prior_mean_theta(double ybar);

struct ScoreEvent {
  int index = 0;
  int measure = 0;
  double beat = 0.0;  // position within the measure
  double l = 0.0;     // note length as a fraction of a measure, > 0
};

struct InitBelief {
  double mu1 = 132.0;      // initial tempo mean (b.p.m.)
  double sigma2_1 = 400.0; // initial tempo variance
  lgssm::GaussianBelief gaussian() const {
    return {{mu1, 0.0}, Mat2::diag(sigma2_1, 0.0)};
  }
};

// Default initial belief: mean of the first 8 observed tempos, variance at
// the sigma2_tempo prior mean.
InitBelief default_init(const std::vector<double>& y);

// Parameter matrices of the transition equation, indexed by the behavioral
// pair (prev -> cur) and the note length l.
lgssm::StepDynamics dynamics_for(Node prev, Node cur, double l, const Theta& th);

lgssm::StepMeasurement measurement_for(Node cur, const Theta& th);

// First-order transition probability on the expanded chain; 0 for illegal
// pairs.
double transition_prob(Node prev, Node cur, const Theta& th);

// Log of the penalty density (informative priors) at theta; -inf outside the
// support. ybar is the recording's mean observed tempo.
double log_prior(const Theta& th, double ybar);

struct Simulation {
  std::vector<Node> nodes;
  std::vector<Vec2> x;
  std::vector<double> y;
};

// Generative draw from the model over the given score, starting in Const.
Simulation simulate(const Theta& th, const std::vector<ScoreEvent>& score,
                    const InitBelief& init, uint64_t seed);

}  // namespace rubato::tempo
