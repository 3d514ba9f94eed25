#pragma once

// Test-only oracles, independent of the library's filtering code path.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "dpf.hpp"
#include "lgssm.hpp"
#include "tempo_model.hpp"

namespace testsupport {

using rubato::Mat2;
using rubato::Vec2;
namespace lg = rubato::lgssm;
namespace tm = rubato::tempo;

inline Eigen::Matrix2d to_eigen(const Mat2& m) {
  Eigen::Matrix2d e;
  e << m.a, m.b, m.c, m.d;
  return e;
}
inline Eigen::Vector2d to_eigen(const Vec2& v) { return {v.x, v.y}; }

// Brute-force joint-Gaussian computation for the model
//   x_i = d_i + T_i x_{i-1} + eta_i,  y_i = c_i + Z_i x_i + eps_i,
// with x_0 ~ init. Assembles the full covariance explicitly; only sane for
// small n.
struct JointGaussian {
  Eigen::VectorXd y_mean;                  // n
  Eigen::MatrixXd y_cov;                   // n x n
  std::vector<Eigen::Vector2d> x_mean;     // n (x_1..x_n)
  std::vector<Eigen::MatrixXd> xy_cov;     // n entries, each 2 x n
};

inline JointGaussian joint_gaussian(const std::vector<lg::StepDynamics>& dyn,
                                    const std::vector<lg::StepMeasurement>& meas,
                                    const lg::GaussianBelief& init) {
  int n = int(dyn.size());
  std::vector<Eigen::Vector2d> m(n + 1);
  std::vector<std::vector<Eigen::Matrix2d>> C(
      n + 1, std::vector<Eigen::Matrix2d>(n + 1));
  m[0] = to_eigen(init.mean);
  C[0][0] = to_eigen(init.cov);
  for (int i = 1; i <= n; ++i) {
    Eigen::Matrix2d T = to_eigen(dyn[i - 1].T);
    m[i] = to_eigen(dyn[i - 1].d) + T * m[i - 1];
    for (int j = 0; j < i; ++j) C[i][j] = T * C[i - 1][j];
    C[i][i] = T * C[i - 1][i - 1] * T.transpose() + to_eigen(dyn[i - 1].Q);
    for (int j = 0; j < i; ++j) C[j][i] = C[i][j].transpose();
  }

  JointGaussian jg;
  jg.y_mean.resize(n);
  jg.y_cov.resize(n, n);
  jg.x_mean.resize(n);
  jg.xy_cov.assign(n, Eigen::MatrixXd(2, n));
  std::vector<Eigen::RowVector2d> Z(n);
  for (int i = 0; i < n; ++i) Z[i] << meas[i].z0, meas[i].z1;
  for (int i = 0; i < n; ++i) {
    jg.y_mean(i) = meas[i].c + Z[i] * m[i + 1];
    jg.x_mean[i] = m[i + 1];
    for (int j = 0; j < n; ++j) {
      jg.y_cov(i, j) = Z[i] * C[i + 1][j + 1] * Z[j].transpose();
      if (i == j) jg.y_cov(i, j) += meas[i].G;
      jg.xy_cov[i].col(j) = C[i + 1][j + 1] * Z[j].transpose();
    }
  }
  return jg;
}

inline double oracle_loglik(const JointGaussian& jg,
                            const std::vector<double>& y) {
  int n = int(y.size());
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) r(i) = y[i] - jg.y_mean(i);
  Eigen::LLT<Eigen::MatrixXd> llt(jg.y_cov);
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  double quad = r.dot(llt.solve(r));
  return -0.5 * (n * std::log(2.0 * M_PI) + logdet + quad);
}

inline std::vector<Eigen::Vector2d> oracle_smoothed_means(
    const JointGaussian& jg, const std::vector<double>& y) {
  int n = int(y.size());
  Eigen::VectorXd r(n);
  for (int i = 0; i < n; ++i) r(i) = y[i] - jg.y_mean(i);
  Eigen::VectorXd w = jg.y_cov.llt().solve(r);
  std::vector<Eigen::Vector2d> out(n);
  for (int i = 0; i < n; ++i) out[i] = jg.x_mean[i] + jg.xy_cov[i] * w;
  return out;
}

// Seeded random nonsingular 2-state system for oracle comparisons.
struct RandomSystem {
  std::vector<double> y;
  std::vector<lg::StepDynamics> dyn;
  std::vector<lg::StepMeasurement> meas;
  lg::GaussianBelief init;
};

inline RandomSystem random_system(int n, uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rand_psd = [&](double scale) {
    Mat2 A{u(eng), u(eng), u(eng), u(eng)};
    Mat2 s = A * A.transpose();
    return s * scale + Mat2::diag(0.05, 0.05);  // keep well-conditioned
  };
  RandomSystem rs;
  rs.init.mean = {u(eng) * 5.0, u(eng) * 5.0};
  rs.init.cov = rand_psd(1.0);
  for (int i = 0; i < n; ++i) {
    lg::StepDynamics d;
    d.d = {u(eng), u(eng)};
    d.T = {u(eng), u(eng), u(eng), u(eng)};
    d.Q = rand_psd(0.5);
    rs.dyn.push_back(d);
    lg::StepMeasurement m;
    m.c = u(eng);
    m.z0 = 1.0 + 0.2 * u(eng);
    m.z1 = 0.5 * u(eng);
    m.G = 0.5 + 0.4 * std::abs(u(eng));
    rs.meas.push_back(m);
    rs.y.push_back(u(eng) * 3.0);
  }
  return rs;
}

// Deterministic synthetic score in 3/4 time: repeating eighth/quarter note
// pattern, measure and beat tracked cumulatively.
inline std::vector<tm::ScoreEvent> make_score(int n) {
  const double pattern[] = {1.0 / 6, 1.0 / 6, 1.0 / 3, 1.0 / 3};
  std::vector<tm::ScoreEvent> score;
  double pos = 0.0;  // position in measures
  for (int i = 0; i < n; ++i) {
    tm::ScoreEvent ev;
    ev.index = i;
    ev.measure = int(pos) + 1;
    ev.beat = (pos - int(pos)) * 3.0;
    ev.l = pattern[i % 4];
    score.push_back(ev);
    pos += ev.l;
  }
  return score;
}

// Exhaustive enumeration over all legal node paths (s_1 = Const), weighting
// each by prior(path) * likelihood(path) via a direct per-path Kalman run.
struct EnumeratedPath {
  std::vector<tm::Node> path;
  double weight = 0.0;
  double loglik = 0.0;
};

inline std::vector<EnumeratedPath> enumerate_paths(
    const std::vector<double>& y, const std::vector<tm::ScoreEvent>& score,
    const tm::Theta& th, const tm::InitBelief& init) {
  int n = int(y.size());
  std::vector<std::vector<tm::Node>> paths = {{tm::Node::Const}};
  for (int i = 1; i < n; ++i) {
    std::vector<std::vector<tm::Node>> next;
    for (const auto& p : paths) {
      for (tm::Node s : tm::successors(p.back())) {
        if (tm::transition_prob(p.back(), s, th) <= 0.0) continue;
        auto q = p;
        q.push_back(s);
        next.push_back(std::move(q));
      }
    }
    paths = std::move(next);
  }

  std::vector<EnumeratedPath> out;
  double total = 0.0;
  for (const auto& p : paths) {
    std::vector<lg::StepDynamics> dyn(n);
    std::vector<lg::StepMeasurement> meas(n);
    dyn[0] = {{}, Mat2::identity(), {}};
    meas[0] = tm::measurement_for(p[0], th);
    double log_prior_path = 0.0;
    for (int i = 1; i < n; ++i) {
      log_prior_path += std::log(tm::transition_prob(p[i - 1], p[i], th));
      dyn[i] = tm::dynamics_for(p[i - 1], p[i], score[i].l, th);
      meas[i] = tm::measurement_for(p[i], th);
    }
    auto fr = lg::filter(y, dyn, meas, init.gaussian());
    EnumeratedPath ep;
    ep.path = p;
    ep.loglik = fr.loglik;
    ep.weight = std::exp(log_prior_path + fr.loglik);
    total += ep.weight;
    out.push_back(std::move(ep));
  }
  for (auto& ep : out) ep.weight /= total;
  return out;
}

// Published parameter estimates for a few recordings, used as realistic
// inputs and plausibility anchors.
inline tm::Theta theta_richter_1976() {
  tm::Theta th;
  th.sigma2_eps = 426.70;
  th.mu_tempo = 136.33;
  th.mu_acc = -11.84;
  th.mu_stress = -34.82;
  th.sigma2_tempo = 439.38;
  th.row1 = {0.85, 0.05, 0.02, 0.08};
  th.row2 = {0.25, 0.74, 0.01};
  th.row3 = {0.44, 0.17, 0.39};
  return th;
}

inline tm::Theta theta_hatto_1993() {
  tm::Theta th;
  th.sigma2_eps = 405.57;
  th.mu_tempo = 130.36;
  th.mu_acc = -13.57;
  th.mu_stress = -27.93;
  th.sigma2_tempo = 408.99;
  th.row1 = {0.94, 0.03, 0.01, 0.02};
  th.row2 = {0.16, 0.82, 0.02};
  th.row3 = {0.36, 0.19, 0.45};
  return th;
}

inline tm::Theta theta_cortot_1951() {
  tm::Theta th;
  th.sigma2_eps = 403.71;
  th.mu_tempo = 182.84;
  th.mu_acc = -21.43;
  th.mu_stress = -45.67;
  th.sigma2_tempo = 460.82;
  th.row1 = {0.92, 0.02, 0.03, 0.03};
  th.row2 = {0.23, 0.71, 0.06};
  th.row3 = {0.34, 0.09, 0.57};
  return th;
}

inline tm::Theta theta_wasowski_1980() {
  tm::Theta th;
  th.sigma2_eps = 414.99;
  th.mu_tempo = 132.00;
  th.mu_acc = -10.00;
  th.mu_stress = -40.00;
  th.sigma2_tempo = 425.00;
  th.row1 = {0.85, 0.05, 0.02, 0.08};
  th.row2 = {0.26, 0.67, 0.07};
  th.row3 = {0.34, 0.20, 0.46};
  return th;
}

}  // namespace testsupport
