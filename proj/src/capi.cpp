#include "rubato/rubato.h"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "cluster.hpp"
#include "estimate.hpp"
#include "io.hpp"

namespace {

thread_local std::string g_last_error;

int fail(rubato_error code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

// Map exception text onto the coarse error taxonomy of the C API.
int classify(const std::exception& e) {
  std::string msg = e.what();
  auto has = [&](const char* s) { return msg.find(s) != std::string::npos; };
  if (has("cannot open") || has("cannot write") || has("rename failed")) {
    return fail(RUBATO_ERR_IO, msg);
  }
  if (has("parse") || has("missing key") || has("bad path line") ||
      has("too few columns") || has("empty file")) {
    return fail(RUBATO_ERR_PARSE, msg);
  }
  if (has("mismatch") || has("length")) {
    return fail(RUBATO_ERR_DIMENSION, msg);
  }
  if (has("collapse") || has("degenerate") || has("fit failed") ||
      has("non-finite")) {
    return fail(RUBATO_ERR_NUMERIC, msg);
  }
  return fail(RUBATO_ERR_DOMAIN, msg);
}

template <class F>
int guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return RUBATO_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

rubato::estimate::FitConfig to_cpp(const rubato_fit_config* cfg) {
  rubato::estimate::FitConfig c;
  if (cfg) {
    c.beam = cfg->beam;
    c.restarts = cfg->restarts;
    c.max_evals = cfg->max_evals;
    c.tol = cfg->tol;
    c.seed = cfg->seed;
  }
  return c;
}

}  // namespace

struct rubato_record {
  rubato::io::PerformanceRecord rec;
};
struct rubato_theta {
  rubato::tempo::Theta th;
};
struct rubato_fit {
  rubato::estimate::FittedPerformance fp;
  std::string id;
};
struct rubato_dmat {
  rubato::cluster::DistanceMatrix dm;
};

extern "C" {

const char* rubato_last_error(void) { return g_last_error.c_str(); }

void rubato_fit_config_default(rubato_fit_config* cfg) {
  rubato::estimate::FitConfig d;
  cfg->beam = d.beam;
  cfg->restarts = d.restarts;
  cfg->max_evals = d.max_evals;
  cfg->tol = d.tol;
  cfg->seed = d.seed;
}

int rubato_record_load(const char* path, const char* format,
                       int beats_per_measure, rubato_record** out) {
  return guarded([&] {
    rubato::io::IngestFormat f;
    if (std::strcmp(format, "onsets") == 0) {
      f = rubato::io::IngestFormat::Onsets;
    } else if (std::strcmp(format, "tempos") == 0) {
      f = rubato::io::IngestFormat::Tempos;
    } else {
      throw std::invalid_argument(std::string("unknown format: ") + format);
    }
    int bpm = beats_per_measure > 0 ? beats_per_measure : 3;
    *out = new rubato_record{rubato::io::ingest(path, f, bpm)};
  });
}

int rubato_record_save(const rubato_record* rec, const char* path) {
  return guarded([&] { rubato::io::save_tempos(rec->rec, path); });
}

int rubato_record_length(const rubato_record* rec) {
  return int(rec->rec.y.size());
}

void rubato_record_free(rubato_record* rec) { delete rec; }

int rubato_theta_load(const char* path, rubato_theta** out) {
  return guarded([&] { *out = new rubato_theta{rubato::io::load_theta(path)}; });
}

int rubato_theta_save(const rubato_theta* th, const char* path) {
  return guarded([&] { rubato::io::save_theta(th->th, path); });
}

int rubato_theta_prior_means(double mean_tempo, rubato_theta** out) {
  return guarded([&] {
    if (!(mean_tempo > 0.0)) {
      throw std::invalid_argument("mean tempo must be positive");
    }
    *out = new rubato_theta{rubato::tempo::prior_mean_theta(mean_tempo)};
  });
}

void rubato_theta_free(rubato_theta* th) { delete th; }

int rubato_simulate(const rubato_theta* th, const char* score_path,
                    uint64_t seed, const char* id, rubato_record** out) {
  return guarded([&] {
    auto score = rubato::io::load_score(score_path);
    rubato::tempo::InitBelief init;
    init.mu1 = th->th.mu_tempo;
    init.sigma2_1 = 400.0;
    auto sim = rubato::tempo::simulate(th->th, score, init, seed);
    rubato::io::PerformanceRecord rec;
    rec.id = id ? id : "simulated";
    rec.score = score;
    rec.y = sim.y;
    *out = new rubato_record{std::move(rec)};
  });
}

int rubato_fit_run(const rubato_record* rec, const rubato_fit_config* cfg,
                   rubato_fit** out) {
  return guarded([&] {
    auto fp = rubato::estimate::fit(rec->rec.y, rec->rec.score, to_cpp(cfg));
    *out = new rubato_fit{std::move(fp), rec->rec.id};
  });
}

int rubato_infer(const rubato_record* rec, const rubato_theta* th,
                 const rubato_fit_config* cfg, rubato_fit** out) {
  return guarded([&] {
    auto fp = rubato::estimate::infer(th->th, rec->rec.y, rec->rec.score,
                                      to_cpp(cfg));
    *out = new rubato_fit{std::move(fp), rec->rec.id};
  });
}

int rubato_fit_save(const rubato_fit* fit, const rubato_record* rec,
                    const rubato_fit_config* cfg, const char* path) {
  return guarded([&] {
    auto c = to_cpp(cfg);
    rubato::io::RunMeta meta;
    meta.seed = c.seed;
    meta.beam = c.beam;
    meta.restarts = c.restarts;
    rubato::io::save_fit(fit->fp, rec->rec, meta, path);
  });
}

int rubato_fit_load(const char* path, rubato_fit** out) {
  return guarded([&] {
    auto lf = rubato::io::load_fit(path);
    *out = new rubato_fit{std::move(lf.fit), lf.id};
  });
}

int rubato_fit_theta(const rubato_fit* fit, rubato_theta** out) {
  return guarded([&] { *out = new rubato_theta{fit->fp.theta}; });
}

int rubato_fit_export(const rubato_fit* fit, const rubato_record* rec,
                      const char* path) {
  return guarded([&] {
    if (fit->fp.behaviors.size() != rec->rec.y.size()) {
      throw std::invalid_argument("fit/record length mismatch");
    }
    rubato::io::export_curve(fit->fp, rec->rec, path);
  });
}

void rubato_fit_free(rubato_fit* fit) { delete fit; }

int rubato_distances(const char* const* fit_paths, size_t n_fits,
                     rubato_dmat** out) {
  return guarded([&] {
    std::vector<rubato::estimate::FittedPerformance> fits;
    std::vector<std::string> labels;
    for (size_t i = 0; i < n_fits; ++i) {
      auto lf = rubato::io::load_fit(fit_paths[i]);
      fits.push_back(std::move(lf.fit));
      labels.push_back(lf.id);
    }
    *out = new rubato_dmat{rubato::cluster::distance_matrix(fits, labels)};
  });
}

int rubato_dmat_save(const rubato_dmat* dm, const char* path) {
  return guarded([&] { rubato::io::save_distance_matrix(dm->dm, path); });
}

int rubato_dmat_load(const char* path, rubato_dmat** out) {
  return guarded([&] {
    *out = new rubato_dmat{rubato::io::load_distance_matrix(path)};
  });
}

int rubato_cluster(const rubato_dmat* dm, int k_clusters, const char* linkage,
                   int outlier_k, double outlier_threshold,
                   const char* labels_path, const char* dendrogram_path) {
  return guarded([&] {
    auto lk = rubato::cluster::linkage_from_string(linkage);
    auto screened =
        rubato::cluster::screen_outliers(dm->dm, outlier_k, outlier_threshold);

    // restrict the matrix to the kept recordings
    rubato::cluster::DistanceMatrix sub;
    std::vector<size_t> idx;
    for (size_t i = 0; i < dm->dm.labels.size(); ++i) {
      if (std::find(screened.kept.begin(), screened.kept.end(),
                    dm->dm.labels[i]) != screened.kept.end()) {
        idx.push_back(i);
        sub.labels.push_back(dm->dm.labels[i]);
      }
    }
    size_t m = idx.size();
    if (int(m) < k_clusters) {
      throw std::invalid_argument("fewer kept recordings than clusters");
    }
    sub.d.assign(m, std::vector<double>(m));
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < m; ++j) sub.d[i][j] = dm->dm.d[idx[i]][idx[j]];

    auto dend = rubato::cluster::hclust(sub, lk);
    auto assignment = rubato::cluster::cut(dend, k_clusters);
    rubato::io::save_cluster_labels(sub.labels, assignment, screened.removed,
                                    labels_path);
    if (dendrogram_path) {
      rubato::io::save_dendrogram(dend, sub.labels, dendrogram_path);
    }
  });
}

void rubato_dmat_free(rubato_dmat* dm) { delete dm; }

}  // extern "C"
