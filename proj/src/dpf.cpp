#include "dpf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "rng.hpp"

namespace rubato::dpf {

using tempo::Node;

namespace {

bool path_less(const std::vector<Node>& a, const std::vector<Node>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

namespace {

// Internal particle state during the run: paths are kept as parent pointers
// into the per-step survivor history and materialized only at the end, so a
// step costs O(candidates) rather than O(candidates * path length).
struct Cand {
  lgssm::GaussianBelief belief;
  double weight = 0.0;
  double log_weight = 0.0;
  double loglik = 0.0;
  int parent = -1;  // index into the previous step's survivors
  Node node = Node::Const;
};

void normalize_cands(std::vector<Cand>& cs, size_t step) {
  double mx = -std::numeric_limits<double>::infinity();
  for (const auto& c : cs) mx = std::max(mx, c.log_weight);
  if (!std::isfinite(mx)) {
    throw std::runtime_error("particle collapse at step " +
                             std::to_string(step));
  }
  double total = 0.0;
  for (auto& c : cs) {
    c.weight = std::exp(c.log_weight - mx);
    total += c.weight;
  }
  for (auto& c : cs) c.weight /= total;
}

std::vector<Node> trace_path(const std::vector<std::vector<Cand>>& history,
                             int last_index) {
  std::vector<Node> path(history.size());
  int idx = last_index;
  for (int i = int(history.size()) - 1; i >= 0; --i) {
    path[i] = history[i][idx].node;
    idx = history[i][idx].parent;
  }
  return path;
}

}  // namespace

std::vector<Particle> run(const std::vector<double>& y,
                          const std::vector<tempo::ScoreEvent>& score,
                          const tempo::Theta& th,
                          const tempo::InitBelief& init,
                          const BeamConfig& cfg) {
  if (y.size() != score.size()) {
    throw std::invalid_argument("dpf: observation/score length mismatch");
  }
  if (cfg.beam < 1) throw std::invalid_argument("dpf: beam width must be >= 1");
  size_t n = y.size();
  if (n == 0) return {};

  // Cache the per-node step parameters; the dynamics depend only on the
  // behavioral pair and the note length, so each step needs at most one
  // dynamics_for call per legal pair rather than one per candidate.
  std::array<lgssm::StepMeasurement, tempo::kNumNodes> meas_cache;
  for (int s = 0; s < tempo::kNumNodes; ++s) {
    meas_cache[s] = tempo::measurement_for(Node(s), th);
  }
  struct Edge {
    Node s;
    double log_tp;
    lgssm::StepDynamics dyn;
  };
  std::array<std::vector<Edge>, tempo::kNumNodes> edges;
  for (int a = 0; a < tempo::kNumNodes; ++a) {
    for (Node s : tempo::successors(Node(a))) {
      double tp = tempo::transition_prob(Node(a), s, th);
      if (tp > 0.0) edges[a].push_back({s, std::log(tp), {}});
    }
  }

  std::vector<std::vector<Cand>> history;
  history.reserve(n);

  // First note: s_1 = Const, belief advanced from the initial distribution.
  {
    Cand c;
    lgssm::StepDynamics identity{{}, Mat2::identity(), {}};
    auto st = lgssm::filter_step(init.gaussian(), identity,
                                 meas_cache[int(Node::Const)], y[0]);
    c.belief = st.updated;
    c.loglik = st.ll_inc;
    c.log_weight = st.ll_inc;
    if (!std::isfinite(c.log_weight)) {
      throw std::runtime_error("particle collapse at step 0");
    }
    history.push_back({c});
  }

  // In greedy mode selection depends only on log_weight order, so per-step
  // weight normalization is skipped and done once at the end.
  std::vector<Cand> next;
  for (size_t i = 1; i < n; ++i) {
    const auto& cur = history.back();
    for (int a = 0; a < tempo::kNumNodes; ++a) {
      for (auto& e : edges[a]) {
        e.dyn = tempo::dynamics_for(Node(a), e.s, score[i].l, th);
      }
    }
    next.clear();
    next.reserve(cur.size() * 4);
    double mx = -std::numeric_limits<double>::infinity();
    for (int pi = 0; pi < int(cur.size()); ++pi) {
      const Cand& p = cur[pi];
      for (const Edge& e : edges[int(p.node)]) {
        auto st = lgssm::filter_step(p.belief, e.dyn, meas_cache[int(e.s)], y[i]);
        Cand q;
        q.belief = st.updated;
        q.loglik = p.loglik + st.ll_inc;
        q.log_weight = p.log_weight + st.ll_inc + e.log_tp;
        q.parent = pi;
        q.node = e.s;
        mx = std::max(mx, q.log_weight);
        next.push_back(q);
      }
    }
    if (!std::isfinite(mx)) {
      throw std::runtime_error("particle collapse at step " + std::to_string(i));
    }
    if (int(next.size()) > cfg.beam) {
      if (cfg.greedy) {
        // deterministic top-B; ties broken toward the lexicographically
        // smaller path (materialized only when a tie actually occurs)
        std::partial_sort(
            next.begin(), next.begin() + cfg.beam, next.end(),
            [&](const Cand& a, const Cand& b) {
              if (a.log_weight != b.log_weight) {
                return a.log_weight > b.log_weight;
              }
              auto pa = trace_path(history, a.parent);
              pa.push_back(a.node);
              auto pb = trace_path(history, b.parent);
              pb.push_back(b.node);
              return path_less(pa, pb);
            });
        next.resize(cfg.beam);
      } else {
        normalize_cands(next, i);
        std::vector<double> w(next.size());
        for (size_t j = 0; j < next.size(); ++j) w[j] = next[j].weight;
        ResampleResult rr = fc_resample(w, cfg.beam, cfg.seed + i);
        std::vector<Cand> kept;
        kept.reserve(rr.kept.size());
        for (size_t j = 0; j < rr.kept.size(); ++j) {
          kept.push_back(next[rr.kept[j]]);
          kept.back().weight = rr.new_weights[j];
          kept.back().log_weight = std::log(rr.new_weights[j]);
        }
        next = std::move(kept);
      }
    }
    history.push_back(next);
  }

  normalize_cands(history.back(), n - 1);
  const auto& last = history.back();
  std::vector<Particle> ps(last.size());
  for (size_t j = 0; j < last.size(); ++j) {
    ps[j].path = trace_path(history, int(j));
    ps[j].weight = last[j].weight;
    ps[j].log_weight = last[j].log_weight;
    ps[j].belief = last[j].belief;
    ps[j].loglik = last[j].loglik;
  }
  return ps;
}

ResampleResult fc_resample(const std::vector<double>& weights, int B,
                           uint64_t seed) {
  int n = int(weights.size());
  if (n <= B) throw std::invalid_argument("no resampling needed");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return weights[a] > weights[b]; });

  // Find the number kappa of deterministically kept particles and the
  // threshold c with kappa + c * (mass below threshold) = B.
  double tail = 0.0;
  for (double w : weights) tail += w;
  int kappa = 0;
  double c = double(B) / tail;
  while (kappa < B && c * weights[order[kappa]] >= 1.0) {
    tail -= weights[order[kappa]];
    ++kappa;
    c = double(B - kappa) / tail;
  }

  ResampleResult rr;
  for (int i = 0; i < kappa; ++i) {
    rr.kept.push_back(order[i]);
    rr.new_weights.push_back(weights[order[i]]);
  }

  int budget = B - kappa;
  if (budget > 0) {
    // Stratified sampling over the remainder with stride 1/c: each particle
    // survives with probability exactly c * w and exactly `budget` survive.
    Rng rng(seed);
    double stride = 1.0 / c;
    double next_mark = rng.uniform() * stride;
    double cum = 0.0;
    for (int i = kappa; i < n && int(rr.kept.size()) < B; ++i) {
      cum += weights[order[i]];
      if (cum > next_mark) {
        rr.kept.push_back(order[i]);
        rr.new_weights.push_back(stride);
        next_mark += stride;
      }
    }
    // numerical fringe: fill from the largest remaining if rounding starved us
    for (int i = kappa; int(rr.kept.size()) < B; ++i) {
      if (std::find(rr.kept.begin(), rr.kept.end(), order[i]) ==
          rr.kept.end()) {
        rr.kept.push_back(order[i]);
        rr.new_weights.push_back(stride);
      }
    }
  }

  double total = std::accumulate(rr.new_weights.begin(), rr.new_weights.end(), 0.0);
  for (double& w : rr.new_weights) w /= total;
  return rr;
}

BestPath best_path(const std::vector<Particle>& particles) {
  if (particles.empty()) throw std::invalid_argument("best_path: empty set");
  const Particle* best = &particles[0];
  for (const auto& p : particles) {
    if (p.weight > best->weight ||
        (p.weight == best->weight && path_less(p.path, best->path))) {
      best = &p;
    }
  }
  return {best->path, best->weight, best->loglik};
}

}  // namespace rubato::dpf
