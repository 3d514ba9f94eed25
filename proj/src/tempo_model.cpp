#include "tempo_model.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rng.hpp"

namespace rubato::tempo {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const Node kSuccConst[] = {Node::Const, Node::DecelEnter, Node::AccelEnter,
                           Node::Stress};
const Node kSuccDecelEnter[] = {Node::DecelCont};
const Node kSuccDecelCont[] = {Node::Const, Node::DecelCont, Node::AccelEnter};
const Node kSuccAccelEnter[] = {Node::AccelCont};
const Node kSuccAccelCont[] = {Node::Const, Node::DecelEnter, Node::AccelCont};
const Node kSuccStress[] = {Node::Const};
}  // namespace

std::span<const Node> successors(Node n) {
  switch (n) {
    case Node::Const: return kSuccConst;
    case Node::DecelEnter: return kSuccDecelEnter;
    case Node::DecelCont: return kSuccDecelCont;
    case Node::AccelEnter: return kSuccAccelEnter;
    case Node::AccelCont: return kSuccAccelCont;
    case Node::Stress: return kSuccStress;
  }
  return {};
}

bool Theta::in_support() const {
  auto simplex = [](auto row) {
    double s = 0.0;
    for (double p : row) {
      if (!(p > 0.0)) return false;
      s += p;
    }
    return std::abs(s - 1.0) < 1e-8;
  };
  return sigma2_eps > 0.0 && mu_tempo > 0.0 && mu_acc < 0.0 &&
         mu_stress < 0.0 && sigma2_tempo > 0.0 && simplex(row1) &&
         simplex(row2) && simplex(row3);
}

Theta prior_mean_theta(double ybar) {
  Theta th;
  th.mu_tempo = ybar;
  return th;
}

InitBelief default_init(const std::vector<double>& y) {
  InitBelief init;
  size_t m = std::min<size_t>(8, y.size());
  if (m > 0) {
    init.mu1 = std::accumulate(y.begin(), y.begin() + m, 0.0) / double(m);
  }
  init.sigma2_1 = 400.0;
  return init;
}

lgssm::StepDynamics dynamics_for(Node prev, Node cur, double l,
                                 const Theta& th) {
  int sp = behavior(prev), sc = behavior(cur);
  bool legal = false;
  for (Node s : successors(prev)) legal = legal || s == cur;
  if (!legal) throw std::invalid_argument("illegal transition");

  const Mat2 keep_tempo = {1.0, 0.0, 0.0, 0.0};  // drop the second component
  const Mat2 ramp = {1.0, l, 0.0, 1.0};          // integrate acceleration
  Mat2 q_acc = Mat2{l * l, l, l, 1.0} * th.sigma2_acc;

  lgssm::StepDynamics dyn;
  if (sc == 1 && (sp == 1 || sp == 4)) {
    dyn.T = keep_tempo;
  } else if (sc == 2 && sp == 2) {
    dyn.T = ramp;
  } else if (sc == 3 && sp == 3) {
    dyn.T = ramp;
  } else if (sc == 2) {  // entering deceleration from 1 or 3
    dyn.d = {l * th.mu_acc, th.mu_acc};
    dyn.T = keep_tempo;
    dyn.Q = q_acc;
  } else if (sc == 3) {  // entering acceleration from 1 or 2
    dyn.d = {-l * th.mu_acc, -th.mu_acc};
    dyn.T = keep_tempo;
    dyn.Q = q_acc;
  } else if (sc == 4) {  // stress, only from 1
    dyn.d = {0.0, th.mu_stress};
    dyn.T = keep_tempo;
    dyn.Q = Mat2::diag(0.0, th.sigma2_stress);
  } else {  // back to constant tempo after a ramp: fresh tempo draw
    dyn.d = {th.mu_tempo, 0.0};
    dyn.T = {};
    dyn.Q = Mat2::diag(th.sigma2_tempo, 0.0);
  }
  return dyn;
}

lgssm::StepMeasurement measurement_for(Node cur, const Theta& th) {
  lgssm::StepMeasurement meas;
  meas.c = 0.0;
  meas.z0 = 1.0;
  meas.z1 = cur == Node::Stress ? 1.0 : 0.0;
  meas.G = th.sigma2_eps;
  return meas;
}

double transition_prob(Node prev, Node cur, const Theta& th) {
  switch (prev) {
    case Node::Const:
      switch (cur) {
        case Node::Const: return th.row1[0];
        case Node::DecelEnter: return th.row1[1];
        case Node::AccelEnter: return th.row1[2];
        case Node::Stress: return th.row1[3];
        default: return 0.0;
      }
    case Node::DecelEnter:
      return cur == Node::DecelCont ? 1.0 : 0.0;
    case Node::DecelCont:
      switch (cur) {
        case Node::Const: return th.row2[0];
        case Node::DecelCont: return th.row2[1];
        case Node::AccelEnter: return th.row2[2];
        default: return 0.0;
      }
    case Node::AccelEnter:
      return cur == Node::AccelCont ? 1.0 : 0.0;
    case Node::AccelCont:
      switch (cur) {
        case Node::Const: return th.row3[0];
        case Node::DecelEnter: return th.row3[1];
        case Node::AccelCont: return th.row3[2];
        default: return 0.0;
      }
    case Node::Stress:
      return cur == Node::Const ? 1.0 : 0.0;
  }
  return 0.0;
}

namespace {

// shape-scale parameterization: mean = shape * scale
double gamma_logpdf(double x, double shape, double scale) {
  if (!(x > 0.0)) return kNegInf;
  return (shape - 1.0) * std::log(x) - x / scale - shape * std::log(scale) -
         std::lgamma(shape);
}

template <size_t K>
double dirichlet_logpdf(const std::array<double, K>& p,
                        const std::array<double, K>& alpha) {
  double a0 = 0.0, lp = 0.0, norm = 0.0;
  for (size_t i = 0; i < K; ++i) {
    if (!(p[i] > 0.0)) return kNegInf;
    a0 += alpha[i];
    lp += (alpha[i] - 1.0) * std::log(p[i]);
    norm += std::lgamma(alpha[i]);
  }
  return lp + std::lgamma(a0) - norm;
}

}  // namespace

double log_prior(const Theta& th, double ybar) {
  if (!th.in_support() || !(ybar > 0.0)) return kNegInf;
  double lp = 0.0;
  lp += gamma_logpdf(th.sigma2_eps, 40.0, 10.0);
  lp += gamma_logpdf(th.mu_tempo, ybar * ybar / 100.0, 100.0 / ybar);
  lp += gamma_logpdf(-th.mu_acc, 15.0, 2.0 / 3.0);
  lp += gamma_logpdf(-th.mu_stress, 20.0, 2.0);
  lp += gamma_logpdf(th.sigma2_tempo, 40.0, 10.0);
  lp += dirichlet_logpdf(th.row1, {85.0, 5.0, 2.0, 8.0});
  lp += dirichlet_logpdf(th.row2, {4.0, 10.0, 1.0});
  lp += dirichlet_logpdf(th.row3, {5.0, 3.0, 7.0});
  return lp;
}

Simulation simulate(const Theta& th, const std::vector<ScoreEvent>& score,
                    const InitBelief& init, uint64_t seed) {
  if (score.empty()) throw std::invalid_argument("simulate: empty score");
  Rng rng(seed);
  size_t n = score.size();
  Simulation sim;
  sim.nodes.reserve(n);
  sim.x.reserve(n);
  sim.y.reserve(n);

  // x_1 ~ N((mu1, 0), diag(sigma2_1, 0)), s_1 = Const
  Node node = Node::Const;
  Vec2 x = {init.mu1 + std::sqrt(init.sigma2_1) * rng.normal(), 0.0};
  for (size_t i = 0; i < n; ++i) {
    if (i > 0) {
      auto succ = successors(node);
      std::vector<double> probs;
      probs.reserve(succ.size());
      for (Node s : succ) probs.push_back(transition_prob(node, s, th));
      Node next = succ[rng.categorical(probs)];
      auto dyn = dynamics_for(node, next, score[i].l, th);
      Mat2 L = psd_chol(dyn.Q);
      Vec2 eta = L * Vec2{rng.normal(), rng.normal()};
      x = dyn.d + dyn.T * x + eta;
      node = next;
    }
    auto meas = measurement_for(node, th);
    double y = meas.c + meas.z0 * x.x + meas.z1 * x.y +
               std::sqrt(meas.G) * rng.normal();
    sim.nodes.push_back(node);
    sim.x.push_back(x);
    sim.y.push_back(y);
  }
  return sim;
}

}  // namespace rubato::tempo
