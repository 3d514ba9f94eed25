#include "lgssm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rubato::lgssm {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

FilterStep filter_step(const GaussianBelief& prior, const StepDynamics& dyn,
                       const StepMeasurement& meas, double y) {
  if (!finite(prior.mean) || !finite(prior.cov) || !finite(dyn.d) ||
      !finite(dyn.T) || !finite(dyn.Q) || !std::isfinite(meas.c) ||
      !std::isfinite(meas.z0) || !std::isfinite(meas.z1) ||
      !std::isfinite(meas.G) || !std::isfinite(y)) {
    throw std::invalid_argument("non-finite filter input");
  }

  FilterStep out;

  // Predict
  out.predicted.mean = dyn.d + dyn.T * prior.mean;
  out.predicted.cov =
      (dyn.Q + dyn.T * prior.cov * dyn.T.transpose()).symmetrized();

  const Mat2& P = out.predicted.cov;
  // Z P Z^T and P Z^T for the scalar row Z = (z0 z1)
  double pz0 = P.a * meas.z0 + P.b * meas.z1;
  double pz1 = P.c * meas.z0 + P.d * meas.z1;
  double zpz = meas.z0 * pz0 + meas.z1 * pz1;

  out.y_pred = meas.c + meas.z0 * out.predicted.mean.x + meas.z1 * out.predicted.mean.y;
  out.forecast_var = meas.G + zpz;
  if (!(out.forecast_var > 0.0) || !std::isfinite(out.forecast_var)) {
    throw std::runtime_error("degenerate forecast variance");
  }

  out.innovation = y - out.y_pred;
  double k0 = pz0 / out.forecast_var;
  double k1 = pz1 / out.forecast_var;

  out.updated.mean = {out.predicted.mean.x + k0 * out.innovation,
                      out.predicted.mean.y + k1 * out.innovation};
  // P_{i|i} = P - (P Z^T)(K)^T
  Mat2 upd = {P.a - pz0 * k0, P.b - pz0 * k1,
              P.c - pz1 * k0, P.d - pz1 * k1};
  out.updated.cov = upd.symmetrized();

  out.ll_inc = -0.5 * (kLogTwoPi + std::log(out.forecast_var) +
                       out.innovation * out.innovation / out.forecast_var);
  return out;
}

FilterResult filter(const std::vector<double>& y,
                    const std::vector<StepDynamics>& dyn_seq,
                    const std::vector<StepMeasurement>& meas_seq,
                    const GaussianBelief& init) {
  size_t n = y.size();
  if (dyn_seq.size() != n || meas_seq.size() != n) {
    throw std::invalid_argument("filter: sequence length mismatch");
  }
  FilterResult fr;
  fr.predicted.reserve(n);
  fr.updated.reserve(n);
  fr.y_pred.reserve(n);
  fr.forecast_var.reserve(n);
  fr.innovation.reserve(n);

  GaussianBelief belief = init;
  for (size_t i = 0; i < n; ++i) {
    FilterStep st;
    try {
      st = filter_step(belief, dyn_seq[i], meas_seq[i], y[i]);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(e.what()) + " at step " +
                               std::to_string(i));
    }
    fr.predicted.push_back(st.predicted);
    fr.updated.push_back(st.updated);
    fr.y_pred.push_back(st.y_pred);
    fr.forecast_var.push_back(st.forecast_var);
    fr.innovation.push_back(st.innovation);
    fr.loglik += st.ll_inc;
    belief = st.updated;
  }
  return fr;
}

SmoothResult smooth(const FilterResult& fr,
                    const std::vector<StepDynamics>& dyn_seq,
                    const std::vector<StepMeasurement>& meas_seq) {
  size_t n = fr.updated.size();
  if (dyn_seq.size() != n || meas_seq.size() != n ||
      fr.predicted.size() != n) {
    throw std::invalid_argument("smooth: sequence length mismatch");
  }
  SmoothResult sr;
  sr.x_hat.resize(n);
  sr.y_hat.resize(n);
  if (n == 0) return sr;

  sr.x_hat[n - 1] = fr.updated[n - 1].mean;
  for (size_t i = n - 1; i > 0; --i) {
    // x^_{i-1} = x_{i-1|i-1} + P_{i-1|i-1} T_i^T pinv(P_i) (x^_i - x~_i)
    Mat2 gain = fr.updated[i - 1].cov * dyn_seq[i].T.transpose() *
                sym_pinv(fr.predicted[i].cov);
    Vec2 e = sr.x_hat[i] - fr.predicted[i].mean;
    sr.x_hat[i - 1] = fr.updated[i - 1].mean + gain * e;
  }
  for (size_t i = 0; i < n; ++i) {
    sr.y_hat[i] = meas_seq[i].c + meas_seq[i].z0 * sr.x_hat[i].x +
                  meas_seq[i].z1 * sr.x_hat[i].y;
  }
  return sr;
}

}  // namespace rubato::lgssm
