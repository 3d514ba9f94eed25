#include "cluster.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>

namespace rubato::cluster {

Linkage linkage_from_string(const std::string& s) {
  if (s == "complete") return Linkage::Complete;
  if (s == "average") return Linkage::Average;
  if (s == "single") return Linkage::Single;
  throw std::invalid_argument("unknown linkage: " + s);
}

std::vector<std::vector<double>> dirichlet_cov(const std::vector<double>& alpha) {
  size_t k = alpha.size();
  double a0 = 0.0;
  for (double a : alpha) {
    if (!(a > 0.0)) throw std::invalid_argument("dirichlet_cov: alpha <= 0");
    a0 += a;
  }
  double denom = a0 * a0 * (a0 + 1.0);
  std::vector<std::vector<double>> sigma(k, std::vector<double>(k));
  for (size_t i = 0; i < k; ++i) {
    for (size_t j = 0; j < k; ++j) {
      double num = (i == j ? alpha[i] * a0 : 0.0) - alpha[i] * alpha[j];
      sigma[i][j] = num / denom;
    }
  }
  return sigma;
}

double row_distance(const std::vector<double>& p, const std::vector<double>& q,
                    const std::vector<double>& alpha) {
  size_t k = alpha.size();
  if (p.size() != k || q.size() != k) {
    throw std::invalid_argument("row_distance: dimension mismatch");
  }
  auto sigma = dirichlet_cov(alpha);
  Eigen::MatrixXd S(k, k);
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j) S(i, j) = sigma[i][j];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  double cut = 1e-10 * es.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = es.eigenvalues().unaryExpr(
      [cut](double v) { return std::abs(v) > cut ? 1.0 / v : 0.0; });
  Eigen::MatrixXd omega =
      es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();

  Eigen::VectorXd diff(k);
  for (size_t i = 0; i < k; ++i) diff(i) = p[i] - q[i];
  return diff.dot(omega * diff);
}

namespace {

using Component = std::vector<std::vector<double>>;

// Normalize a component matrix to maximum 1; identically-zero components are
// skipped with a warning and contribute nothing.
bool normalize_component(Component& m, const char* name) {
  double mx = 0.0;
  for (const auto& row : m)
    for (double v : row) mx = std::max(mx, v);
  if (mx == 0.0) {
    std::fprintf(stderr, "warning: distance component %s identically zero, skipped\n", name);
    return false;
  }
  for (auto& row : m)
    for (double& v : row) v /= mx;
  return true;
}

}  // namespace

DistanceMatrix distance_matrix(
    const std::vector<estimate::FittedPerformance>& fits,
    const std::vector<std::string>& labels) {
  size_t n = fits.size();
  if (n < 2) throw std::invalid_argument("distance_matrix: need >= 2 fits");
  if (labels.size() != n) {
    throw std::invalid_argument("distance_matrix: label count mismatch");
  }

  auto scalar_component = [&](auto get) {
    Component m(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j)
        m[i][j] = std::abs(get(fits[i].theta) - get(fits[j].theta));
    return m;
  };
  auto row_component = [&](auto get, const std::vector<double>& alpha) {
    Component m(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        auto pi = get(fits[i].theta);
        auto pj = get(fits[j].theta);
        double d = row_distance({pi.begin(), pi.end()}, {pj.begin(), pj.end()},
                                alpha);
        m[i][j] = m[j][i] = d;
      }
    }
    return m;
  };

  struct Named {
    Component m;
    const char* name;
  };
  std::vector<Named> comps;
  comps.push_back({scalar_component([](const tempo::Theta& t) { return t.sigma2_eps; }), "sigma2_eps"});
  comps.push_back({scalar_component([](const tempo::Theta& t) { return t.mu_tempo; }), "mu_tempo"});
  comps.push_back({scalar_component([](const tempo::Theta& t) { return t.mu_acc; }), "mu_acc"});
  comps.push_back({scalar_component([](const tempo::Theta& t) { return t.mu_stress; }), "mu_stress"});
  comps.push_back({scalar_component([](const tempo::Theta& t) { return t.sigma2_tempo; }), "sigma2_tempo"});
  comps.push_back({row_component([](const tempo::Theta& t) { return t.row1; }, {85, 5, 2, 8}), "row1"});
  comps.push_back({row_component([](const tempo::Theta& t) { return t.row2; }, {4, 10, 1}), "row2"});
  comps.push_back({row_component([](const tempo::Theta& t) { return t.row3; }, {5, 3, 7}), "row3"});

  DistanceMatrix dm;
  dm.labels = labels;
  dm.d.assign(n, std::vector<double>(n, 0.0));
  for (auto& c : comps) {
    if (!normalize_component(c.m, c.name)) continue;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) dm.d[i][j] += c.m[i][j];
  }
  // enforce exact symmetry and zero diagonal against rounding
  for (size_t i = 0; i < n; ++i) {
    dm.d[i][i] = 0.0;
    for (size_t j = i + 1; j < n; ++j) {
      double v = 0.5 * (dm.d[i][j] + dm.d[j][i]);
      dm.d[i][j] = dm.d[j][i] = v;
    }
  }
  return dm;
}

ScreenResult screen_outliers(const DistanceMatrix& dm, int k, double threshold) {
  int n = int(dm.labels.size());
  if (k >= n) throw std::invalid_argument("screen_outliers: k >= recordings");
  ScreenResult res;
  for (int i = 0; i < n; ++i) {
    std::vector<double> off;
    off.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j != i) off.push_back(dm.d[i][j]);
    }
    std::nth_element(off.begin(), off.begin() + (k - 1), off.end());
    double dk = off[k - 1] / 8.0;  // unit scale
    if (dk > threshold) {
      res.removed.push_back(dm.labels[i]);
    } else {
      res.kept.push_back(dm.labels[i]);
    }
  }
  return res;
}

Dendrogram hclust(const DistanceMatrix& dm, Linkage linkage) {
  int n = int(dm.labels.size());
  Dendrogram dend;
  dend.leaves = n;
  if (n < 2) return dend;

  std::vector<int> id(n);       // current cluster id per active slot
  std::vector<int> size(n, 1);
  std::vector<bool> active(n, true);
  std::vector<std::vector<double>> d = dm.d;
  for (int i = 0; i < n; ++i) id[i] = i;

  for (int step = 0; step < n - 1; ++step) {
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (int j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        double v = d[i][j];
        // deterministic tie-break on the smallest cluster-id pair
        if (v < best ||
            (v == best && std::minmax(id[i], id[j]) <
                              std::minmax(id[bi], id[bj]))) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    auto [lo, hi] = std::minmax(id[bi], id[bj]);
    dend.merges.push_back({lo, hi, best});

    // Lance-Williams update into slot bi
    for (int m = 0; m < n; ++m) {
      if (!active[m] || m == bi || m == bj) continue;
      double a = d[bi][m], b = d[bj][m];
      double v;
      switch (linkage) {
        case Linkage::Complete: v = std::max(a, b); break;
        case Linkage::Single: v = std::min(a, b); break;
        case Linkage::Average:
          v = (size[bi] * a + size[bj] * b) / double(size[bi] + size[bj]);
          break;
      }
      d[bi][m] = d[m][bi] = v;
    }
    size[bi] += size[bj];
    active[bj] = false;
    id[bi] = n + step;
  }
  return dend;
}

std::vector<int> cut(const Dendrogram& dend, int k) {
  int n = dend.leaves;
  if (k < 1 || k > n) throw std::invalid_argument("cut: bad cluster count");

  // union-find over the first n-k merges
  std::vector<int> parent(n + dend.merges.size());
  for (size_t i = 0; i < parent.size(); ++i) parent[i] = int(i);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int m = 0; m < n - k; ++m) {
    int root = n + m;
    parent[find(dend.merges[m].a)] = root;
    parent[find(dend.merges[m].b)] = root;
  }

  std::vector<int> labels(n, -1);
  std::vector<int> seen;
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    auto it = std::find(seen.begin(), seen.end(), r);
    if (it == seen.end()) {
      seen.push_back(r);
      labels[i] = int(seen.size()) - 1;
    } else {
      labels[i] = int(it - seen.begin());
    }
  }
  return labels;
}

}  // namespace rubato::cluster
