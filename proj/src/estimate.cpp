#include "estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rng.hpp"

namespace rubato::estimate {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

template <size_t K>
std::array<double, K> clamp_row(std::array<double, K> row) {
  bool clamped = false;
  double total = 0.0;
  for (double& p : row) {
    if (p < 1e-8) { p = 1e-8; clamped = true; }
    if (p > 1.0 - 1e-8) { p = 1.0 - 1e-8; clamped = true; }
    total += p;
  }
  if (clamped) {
    std::fprintf(stderr, "warning: probability row clamped away from boundary\n");
    for (double& p : row) p /= total;
  }
  return row;
}

template <size_t K>
void alr_encode(const std::array<double, K>& row, double* out) {
  auto r = clamp_row(row);
  for (size_t k = 1; k < K; ++k) out[k - 1] = std::log(r[k] / r[0]);
}

template <size_t K>
std::array<double, K> alr_decode(const double* u) {
  std::array<double, K> row;
  double total = 1.0;
  row[0] = 1.0;
  for (size_t k = 1; k < K; ++k) {
    row[k] = std::exp(u[k - 1]);
    total += row[k];
  }
  for (double& p : row) p /= total;
  return row;
}

}  // namespace

std::array<double, kNumCoords> to_unconstrained(const tempo::Theta& th) {
  std::array<double, kNumCoords> u;
  u[0] = std::log(th.sigma2_eps);
  u[1] = std::log(th.mu_tempo);
  u[2] = std::log(-th.mu_acc);
  u[3] = std::log(-th.mu_stress);
  u[4] = std::log(th.sigma2_tempo);
  alr_encode(th.row1, &u[5]);
  alr_encode(th.row2, &u[8]);
  alr_encode(th.row3, &u[10]);
  return u;
}

tempo::Theta from_unconstrained(const std::array<double, kNumCoords>& u) {
  tempo::Theta th;
  th.sigma2_eps = std::exp(u[0]);
  th.mu_tempo = std::exp(u[1]);
  th.mu_acc = -std::exp(u[2]);
  th.mu_stress = -std::exp(u[3]);
  th.sigma2_tempo = std::exp(u[4]);
  th.row1 = alr_decode<4>(&u[5]);
  th.row2 = alr_decode<3>(&u[8]);
  th.row3 = alr_decode<3>(&u[10]);
  return th;
}

double objective(const tempo::Theta& th, const std::vector<double>& y,
                 const std::vector<tempo::ScoreEvent>& score,
                 const FitConfig& cfg) {
  if (!th.in_support()) return kNegInf;
  double ybar = mean(y);
  double lp = tempo::log_prior(th, ybar);
  if (!std::isfinite(lp)) return kNegInf;

  dpf::BeamConfig bc{cfg.beam, cfg.seed, /*greedy=*/true};
  auto init = tempo::default_init(y);
  auto particles = dpf::run(y, score, th, init, bc);
  auto best = dpf::best_path(particles);

  // Refilter along the winning path for the exact path log-likelihood.
  std::vector<lgssm::StepDynamics> dyn(y.size());
  std::vector<lgssm::StepMeasurement> meas(y.size());
  dyn[0] = {{}, Mat2::identity(), {}};
  meas[0] = tempo::measurement_for(best.path[0], th);
  for (size_t i = 1; i < y.size(); ++i) {
    dyn[i] = tempo::dynamics_for(best.path[i - 1], best.path[i], score[i].l, th);
    meas[i] = tempo::measurement_for(best.path[i], th);
  }
  auto fr = lgssm::filter(y, dyn, meas, init.gaussian());
  return fr.loglik + lp;
}

FittedPerformance infer(const tempo::Theta& th, const std::vector<double>& y,
                        const std::vector<tempo::ScoreEvent>& score,
                        const FitConfig& cfg) {
  if (y.size() != score.size() || y.empty()) {
    throw std::invalid_argument("infer: bad input lengths");
  }
  dpf::BeamConfig bc{cfg.beam, cfg.seed, /*greedy=*/true};
  auto init = tempo::default_init(y);
  auto particles = dpf::run(y, score, th, init, bc);
  auto best = dpf::best_path(particles);

  size_t n = y.size();
  std::vector<lgssm::StepDynamics> dyn(n);
  std::vector<lgssm::StepMeasurement> meas(n);
  dyn[0] = {{}, Mat2::identity(), {}};
  meas[0] = tempo::measurement_for(best.path[0], th);
  for (size_t i = 1; i < n; ++i) {
    dyn[i] = tempo::dynamics_for(best.path[i - 1], best.path[i], score[i].l, th);
    meas[i] = tempo::measurement_for(best.path[i], th);
  }
  auto fr = lgssm::filter(y, dyn, meas, init.gaussian());
  auto sm = lgssm::smooth(fr, dyn, meas);

  FittedPerformance fp;
  fp.theta = th;
  fp.path = best.path;
  fp.behaviors.reserve(n);
  for (auto node : best.path) fp.behaviors.push_back(tempo::behavior(node));
  fp.smoothed_tempo = sm.y_hat;
  fp.loglik = fr.loglik;
  fp.log_prior = tempo::log_prior(th, mean(y));
  fp.objective = fp.loglik + fp.log_prior;
  return fp;
}

namespace {

// Nelder-Mead on kNumCoords dimensions, minimizing.
struct Simplex {
  std::vector<std::array<double, kNumCoords>> pts;
  std::vector<double> vals;
};

template <class F>
std::pair<std::array<double, kNumCoords>, double> nelder_mead(
    F&& f, const std::array<double, kNumCoords>& start, double step,
    int max_evals, double tol, int& evals) {
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  const int n = kNumCoords;

  Simplex s;
  s.pts.push_back(start);
  s.vals.push_back(f(start));
  ++evals;
  for (int i = 0; i < n; ++i) {
    auto p = start;
    p[i] += step;
    s.pts.push_back(p);
    s.vals.push_back(f(p));
    ++evals;
  }

  auto order = [&]() {
    std::vector<int> idx(s.pts.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return s.vals[a] < s.vals[b]; });
    Simplex t;
    for (int i : idx) {
      t.pts.push_back(s.pts[i]);
      t.vals.push_back(s.vals[i]);
    }
    s = std::move(t);
  };

  order();
  // converged when the simplex has collapsed in value or when a window of
  // evaluations buys only a negligible relative improvement (the objective
  // has path-switch plateaus where the spread criterion alone idles)
  const int kWindow = 150;
  double window_best = s.vals[0];
  int window_start = evals;
  while (evals < max_evals) {
    if (std::isfinite(s.vals[0]) && std::isfinite(s.vals[n]) &&
        s.vals[n] - s.vals[0] < tol) {
      break;
    }
    if (evals - window_start >= kWindow) {
      if (window_best - s.vals[0] < 1e-4 * (1.0 + std::abs(s.vals[0]))) break;
      window_best = s.vals[0];
      window_start = evals;
    }
    std::array<double, kNumCoords> centroid{};
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < kNumCoords; ++k) centroid[k] += s.pts[i][k] / n;
    }
    auto mix = [&](double t) {
      std::array<double, kNumCoords> p;
      for (int k = 0; k < kNumCoords; ++k) {
        p[k] = centroid[k] + t * (s.pts[n][k] - centroid[k]);
      }
      return p;
    };

    auto refl = mix(-alpha);
    double frefl = f(refl);
    ++evals;
    if (frefl < s.vals[0]) {
      auto exp_pt = mix(-gamma);
      double fexp = f(exp_pt);
      ++evals;
      if (fexp < frefl) {
        s.pts[n] = exp_pt;
        s.vals[n] = fexp;
      } else {
        s.pts[n] = refl;
        s.vals[n] = frefl;
      }
    } else if (frefl < s.vals[n - 1]) {
      s.pts[n] = refl;
      s.vals[n] = frefl;
    } else {
      bool outside = frefl < s.vals[n];
      auto con = mix(outside ? -rho : rho);
      double fcon = f(con);
      ++evals;
      if (fcon < std::min(frefl, s.vals[n])) {
        s.pts[n] = con;
        s.vals[n] = fcon;
      } else {
        // shrink toward the best point
        for (int i = 1; i <= n; ++i) {
          for (int k = 0; k < kNumCoords; ++k) {
            s.pts[i][k] = s.pts[0][k] + sigma * (s.pts[i][k] - s.pts[0][k]);
          }
          s.vals[i] = f(s.pts[i]);
          ++evals;
        }
      }
    }
    order();
  }
  return {s.pts[0], s.vals[0]};
}

}  // namespace

FittedPerformance fit(const std::vector<double>& y,
                      const std::vector<tempo::ScoreEvent>& score,
                      const FitConfig& cfg) {
  if (y.size() != score.size()) {
    throw std::invalid_argument("fit: observation/score length mismatch");
  }
  if (y.size() < 16) {
    throw std::invalid_argument("fit: need at least 16 notes");
  }

  double ybar = mean(y);
  auto base = to_unconstrained(tempo::prior_mean_theta(ybar));

  auto neg_obj = [&](const std::array<double, kNumCoords>& u) {
    double v = objective(from_unconstrained(u), y, score, cfg);
    return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
  };

  Rng rng(cfg.seed);
  double best_val = std::numeric_limits<double>::infinity();
  std::array<double, kNumCoords> best_pt = base;
  int total_evals = 0;
  bool converged = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    auto start = base;
    if (r > 0) {
      for (double& c : start) c += 0.3 * rng.normal();
    }
    int evals = 0;
    auto [pt, val] = nelder_mead(neg_obj, start, 0.1, cfg.max_evals, cfg.tol, evals);
    total_evals += evals;
    if (val < best_val) {
      best_val = val;
      best_pt = pt;
      converged = evals < cfg.max_evals;
    }
  }
  if (!std::isfinite(best_val)) throw std::runtime_error("fit failed");

  auto fp = infer(from_unconstrained(best_pt), y, score, cfg);
  fp.evals = total_evals;
  fp.converged = converged;
  return fp;
}

}  // namespace rubato::estimate
