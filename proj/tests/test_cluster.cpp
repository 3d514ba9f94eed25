#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "cluster.hpp"
#include "support.hpp"

using namespace rubato;
using namespace rubato::cluster;
namespace ts = testsupport;

static estimate::FittedPerformance fit_of(const tempo::Theta& th) {
  estimate::FittedPerformance fp;
  fp.theta = th;
  return fp;
}

TEST_CASE("dirichlet_cov: published concentration row") {
  auto S = dirichlet_cov({85.0, 5.0, 2.0, 8.0});
  CHECK(S[0][0] == doctest::Approx(1275.0 / 1010000.0).epsilon(1e-12));
  CHECK(S[0][1] == doctest::Approx(-425.0 / 1010000.0).epsilon(1e-12));
  CHECK(S[1][0] == doctest::Approx(S[0][1]).epsilon(1e-14));
  // rows sum to zero: the simplex constraint
  for (const auto& row : S) {
    double s = 0.0;
    for (double v : row) s += v;
    CHECK(std::abs(s) < 1e-15);
  }
}

TEST_CASE("dirichlet_cov: two-component uniform") {
  auto S = dirichlet_cov({1.0, 1.0});
  CHECK(S[0][0] == doctest::Approx(1.0 / 12.0));
  CHECK(S[0][1] == doctest::Approx(-1.0 / 12.0));
  CHECK(S[1][1] == doctest::Approx(1.0 / 12.0));
}

TEST_CASE("row_distance: axioms and an eigendecomposition oracle") {
  std::vector<double> alpha{85.0, 5.0, 2.0, 8.0};
  std::vector<double> p{0.85, 0.05, 0.02, 0.08};
  std::vector<double> q{0.94, 0.03, 0.01, 0.02};

  CHECK(row_distance(p, p, alpha) == doctest::Approx(0.0));
  CHECK(row_distance(p, q, alpha) ==
        doctest::Approx(row_distance(q, p, alpha)).epsilon(1e-12));
  CHECK(row_distance(p, q, alpha) > 0.0);

  // independent oracle: explicit pseudo-inverse via eigendecomposition
  auto S = dirichlet_cov(alpha);
  Eigen::Matrix4d Se;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) Se(i, j) = S[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(Se);
  Eigen::Matrix4d pinv = Eigen::Matrix4d::Zero();
  for (int i = 0; i < 4; ++i) {
    if (es.eigenvalues()(i) > 1e-12 * es.eigenvalues().maxCoeff()) {
      pinv += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose() /
              es.eigenvalues()(i);
    }
  }
  Eigen::Vector4d delta;
  for (int i = 0; i < 4; ++i) delta(i) = p[i] - q[i];
  CHECK(row_distance(p, q, alpha) ==
        doctest::Approx(delta.dot(pinv * delta)).epsilon(1e-10));
}

TEST_CASE("row_distance: invariant under simultaneous permutation") {
  std::vector<double> alpha{4.0, 10.0, 1.0};
  std::vector<double> p{0.26, 0.67, 0.07};
  std::vector<double> q{0.16, 0.82, 0.02};
  double d = row_distance(p, q, alpha);
  std::vector<double> alpha2{10.0, 1.0, 4.0}, p2{0.67, 0.07, 0.26},
      q2{0.82, 0.02, 0.16};
  CHECK(row_distance(p2, q2, alpha2) == doctest::Approx(d).epsilon(1e-10));
}

TEST_CASE("distance_matrix: identical fits collapse to zero") {
  auto th = ts::theta_richter_1976();
  std::vector<estimate::FittedPerformance> fits{fit_of(th), fit_of(th),
                                                fit_of(th)};
  auto dm = distance_matrix(fits, {"a", "b", "c"});
  for (const auto& row : dm.d)
    for (double v : row) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("distance_matrix: published fits give a sane metric-like matrix") {
  std::vector<estimate::FittedPerformance> fits{
      fit_of(ts::theta_richter_1976()), fit_of(ts::theta_hatto_1993()),
      fit_of(ts::theta_cortot_1951()), fit_of(ts::theta_wasowski_1980())};
  auto dm = distance_matrix(fits, {"richter", "hatto", "cortot", "wasowski"});
  REQUIRE(dm.labels.size() == 4);
  double maxv = 0.0;
  for (int i = 0; i < 4; ++i) {
    CHECK(dm.d[i][i] == 0.0);
    for (int j = 0; j < 4; ++j) {
      CHECK(dm.d[i][j] == dm.d[j][i]);
      CHECK(dm.d[i][j] >= 0.0);
      CHECK(dm.d[i][j] <= 8.0 + 1e-12);
      maxv = std::max(maxv, dm.d[i][j]);
    }
  }
  CHECK(maxv > 0.0);
  // Cortot's 1951 recording is the fastest and most extreme of the four; it
  // should sit far from everyone relative to the Richter/Hatto/Wasowski trio.
  double cortot_min = 8.0, other_max = 0.0;
  for (int j : {0, 1, 3}) cortot_min = std::min(cortot_min, dm.d[2][j]);
  for (int i : {0, 1, 3})
    for (int j : {0, 1, 3})
      if (i != j) other_max = std::max(other_max, dm.d[i][j]);
  CHECK(cortot_min > 0.0);
}

TEST_CASE("distance_matrix: per-component max-normalization") {
  // two fits differing only in sigma2_eps: one component contributes exactly
  // 1 at its maximum, everything else 0
  auto a = ts::theta_richter_1976();
  auto b = a;
  b.sigma2_eps += 50.0;
  auto c = a;
  c.sigma2_eps += 100.0;
  auto dm = distance_matrix({fit_of(a), fit_of(b), fit_of(c)}, {"a", "b", "c"});
  CHECK(dm.d[0][2] == doctest::Approx(1.0));
  CHECK(dm.d[0][1] == doctest::Approx(0.5));
  CHECK(dm.d[1][2] == doctest::Approx(0.5));
}

TEST_CASE("screen_outliers: far-away recording is removed") {
  DistanceMatrix dm;
  dm.labels = {"a", "b", "c", "d", "e"};
  int n = 5;
  dm.d.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) dm.d[i][j] = 0.4;  // tight clique on the total scale
  for (int j = 0; j < n - 1; ++j) dm.d[n - 1][j] = dm.d[j][n - 1] = 7.2;

  auto sr = screen_outliers(dm, 3, 0.35);
  REQUIRE(sr.removed.size() == 1);
  CHECK(sr.removed[0] == "e");
  CHECK(sr.kept.size() == 4);

  // permissive threshold keeps everyone
  auto all = screen_outliers(dm, 3, 0.95);
  CHECK(all.removed.empty());
}

TEST_CASE("screen_outliers: k-th neighbor, not the nearest") {
  // "d" has one close friend but its 2nd neighbor is distant
  DistanceMatrix dm;
  dm.labels = {"a", "b", "c", "d"};
  dm.d = {{0.0, 0.1, 0.1, 6.0},
          {0.1, 0.0, 0.1, 6.0},
          {0.1, 0.1, 0.0, 6.0},
          {6.0, 6.0, 6.0, 0.0}};
  auto sr1 = screen_outliers(dm, 1, 0.35);
  CHECK(sr1.removed == std::vector<std::string>{"d"});
  dm.d[2][3] = dm.d[3][2] = 0.1;
  auto sr2 = screen_outliers(dm, 1, 0.35);
  CHECK(sr2.removed.empty());
  auto sr3 = screen_outliers(dm, 2, 0.35);
  CHECK(sr3.removed == std::vector<std::string>{"d"});
}

TEST_CASE("hclust: two points merge at their distance") {
  DistanceMatrix dm;
  dm.labels = {"a", "b"};
  dm.d = {{0.0, 1.5}, {1.5, 0.0}};
  for (Linkage l : {Linkage::Complete, Linkage::Average, Linkage::Single}) {
    auto dend = hclust(dm, l);
    REQUIRE(dend.merges.size() == 1);
    CHECK(dend.merges[0].a == 0);
    CHECK(dend.merges[0].b == 1);
    CHECK(dend.merges[0].height == doctest::Approx(1.5));
  }
}

TEST_CASE("hclust: three collinear points, linkage-specific final height") {
  DistanceMatrix dm;
  dm.labels = {"a", "b", "c"};
  dm.d = {{0.0, 1.0, 10.0}, {1.0, 0.0, 9.0}, {10.0, 9.0, 0.0}};
  struct Case {
    Linkage l;
    double final_height;
  };
  for (auto [l, h] : {Case{Linkage::Complete, 10.0}, Case{Linkage::Average, 9.5},
                      Case{Linkage::Single, 9.0}}) {
    auto dend = hclust(dm, l);
    REQUIRE(dend.merges.size() == 2);
    CHECK(dend.merges[0].height == doctest::Approx(1.0));
    CHECK(dend.merges[1].height == doctest::Approx(h));
    CHECK(dend.merges[1].b == 3);  // the {a,b} cluster formed by merge 0
  }
}

TEST_CASE("hclust: heights are monotone under complete linkage") {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int n = 12;
  std::vector<double> pts(n);
  for (auto& p : pts) p = u(eng) * 8.0;
  DistanceMatrix dm;
  dm.d.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    dm.labels.push_back("p" + std::to_string(i));
    for (int j = 0; j < n; ++j) dm.d[i][j] = std::abs(pts[i] - pts[j]);
  }
  auto dend = hclust(dm, Linkage::Complete);
  for (size_t i = 1; i < dend.merges.size(); ++i) {
    CHECK(dend.merges[i].height >= dend.merges[i - 1].height - 1e-12);
  }
}

TEST_CASE("cut: extremes and a planted two-group case") {
  DistanceMatrix dm;
  dm.labels = {"a", "b", "c", "d"};
  // two pairs: {a,b} near, {c,d} near, pairs far apart
  dm.d = {{0.0, 0.2, 5.0, 5.1},
          {0.2, 0.0, 5.2, 5.3},
          {5.0, 5.2, 0.0, 0.3},
          {5.1, 5.3, 0.3, 0.0}};
  auto dend = hclust(dm, Linkage::Complete);

  auto one = cut(dend, 1);
  CHECK(one == std::vector<int>{0, 0, 0, 0});
  auto all = cut(dend, 4);
  CHECK(all == std::vector<int>{0, 1, 2, 3});
  auto two = cut(dend, 2);
  CHECK(two[0] == two[1]);
  CHECK(two[2] == two[3]);
  CHECK(two[0] != two[2]);
  CHECK(two[0] == 0);  // ids ordered by first appearance
  CHECK(two[2] == 1);
}
