#pragma once

#include <string>
#include <vector>

#include "estimate.hpp"

namespace rubato::cluster {

struct DistanceMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> d;  // symmetric, zero diagonal, <= 8
};

struct Merge {
  int a = 0, b = 0;      // cluster ids being merged (leaves are 0..n-1)
  double height = 0.0;
};

struct Dendrogram {
  int leaves = 0;
  std::vector<Merge> merges;  // n-1 merges; merge i creates cluster n+i
};

enum class Linkage { Complete, Average, Single };
Linkage linkage_from_string(const std::string& s);

// Covariance of a Dirichlet distribution with concentration alpha.
std::vector<std::vector<double>> dirichlet_cov(const std::vector<double>& alpha);

// Quadratic-form distance between two probability rows weighted by the
// pseudo-inverse of the Dirichlet covariance (the covariance is singular on
// the simplex, but row differences lie in its range).
double row_distance(const std::vector<double>& p, const std::vector<double>& q,
                    const std::vector<double>& alpha);

// 8 per-parameter component matrices (absolute differences for the five
// scalars, prior-weighted row distances for the three probability rows), each
// normalized to maximum 1 and summed; total entries lie in [0, 8].
DistanceMatrix distance_matrix(const std::vector<estimate::FittedPerformance>& fits,
                               const std::vector<std::string>& labels);

struct ScreenResult {
  std::vector<std::string> kept;
  std::vector<std::string> removed;
};

// Remove recordings whose k-th nearest neighbor distance, on the unit scale
// (total / 8), exceeds the threshold.
ScreenResult screen_outliers(const DistanceMatrix& dm, int k = 3,
                             double threshold = 0.35);

Dendrogram hclust(const DistanceMatrix& dm, Linkage linkage);

// Cut into k groups; returns a cluster id per leaf, ids numbered 0..k-1 in
// order of first appearance.
std::vector<int> cut(const Dendrogram& dend, int k);

}  // namespace rubato::cluster
