// rubato: batch front end for tempo-interpretation model fitting, inference,
// simulation, and clustering of recordings. Links only the public C API.

#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rubato/rubato.h"

namespace {

constexpr int kExitUsage = 6;

int report(int code) {
  if (code != RUBATO_OK) {
    std::fprintf(stderr, "error: code=%d msg=%s\n", code, rubato_last_error());
  }
  return code;
}

std::string stem_of(const std::string& path) {
  size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  size_t dot = base.find_last_of('.');
  return dot == std::string::npos ? base : base.substr(0, dot);
}

struct CommonOpts {
  rubato_fit_config cfg;
  std::string out_dir = ".";
  std::string format = "tempos";
  int beats_per_measure = 3;
};

void add_fit_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--beam", o.cfg.beam, "maximum DPF beam width");
  cmd->add_option("--restarts", o.cfg.restarts, "optimizer multistarts");
  cmd->add_option("--seed", o.cfg.seed, "random seed");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
}

int cmd_fit(const std::vector<std::string>& inputs, const CommonOpts& o) {
  struct Job {
    std::string input;
    int code = RUBATO_OK;
    std::string err;
  };
  std::vector<Job> jobs;
  for (const auto& in : inputs) jobs.push_back({in});

  // one worker per recording
  std::vector<std::thread> workers;
  for (auto& job : jobs) {
    workers.emplace_back([&job, &o] {
      rubato_record* rec = nullptr;
      rubato_fit* fit = nullptr;
      job.code = rubato_record_load(job.input.c_str(), o.format.c_str(),
                                    o.beats_per_measure, &rec);
      if (job.code == RUBATO_OK) {
        job.code = rubato_fit_run(rec, &o.cfg, &fit);
      }
      if (job.code == RUBATO_OK) {
        std::string out = o.out_dir + "/" + stem_of(job.input) + ".fit";
        job.code = rubato_fit_save(fit, rec, &o.cfg, out.c_str());
      }
      if (job.code != RUBATO_OK) job.err = rubato_last_error();
      rubato_fit_free(fit);
      rubato_record_free(rec);
    });
  }
  for (auto& w : workers) w.join();

  for (const auto& job : jobs) {
    if (job.code != RUBATO_OK) {
      std::fprintf(stderr, "error: code=%d input=%s msg=%s\n", job.code,
                   job.input.c_str(), job.err.c_str());
      return job.code;
    }
  }
  return 0;
}

int cmd_infer(const std::string& input, const std::string& theta_path,
              const CommonOpts& o) {
  rubato_record* rec = nullptr;
  rubato_theta* th = nullptr;
  rubato_fit* fit = nullptr;
  int code = rubato_record_load(input.c_str(), o.format.c_str(),
                                o.beats_per_measure, &rec);
  if (code == RUBATO_OK) code = rubato_theta_load(theta_path.c_str(), &th);
  if (code == RUBATO_OK) code = rubato_infer(rec, th, &o.cfg, &fit);
  if (code == RUBATO_OK) {
    std::string out = o.out_dir + "/" + stem_of(input) + ".fit";
    code = rubato_fit_save(fit, rec, &o.cfg, out.c_str());
  }
  rubato_fit_free(fit);
  rubato_theta_free(th);
  rubato_record_free(rec);
  return report(code);
}

int cmd_simulate(const std::string& theta_path, const std::string& score_path,
                 const std::string& id, const CommonOpts& o) {
  rubato_theta* th = nullptr;
  rubato_record* rec = nullptr;
  int code = rubato_theta_load(theta_path.c_str(), &th);
  if (code == RUBATO_OK) {
    code = rubato_simulate(th, score_path.c_str(), o.cfg.seed, id.c_str(), &rec);
  }
  if (code == RUBATO_OK) {
    std::string out = o.out_dir + "/" + id + ".csv";
    code = rubato_record_save(rec, out.c_str());
  }
  rubato_record_free(rec);
  rubato_theta_free(th);
  return report(code);
}

int cmd_distances(const std::vector<std::string>& fit_paths,
                  const CommonOpts& o) {
  std::vector<const char*> paths;
  for (const auto& p : fit_paths) paths.push_back(p.c_str());
  rubato_dmat* dm = nullptr;
  int code = rubato_distances(paths.data(), paths.size(), &dm);
  if (code == RUBATO_OK) {
    std::string out = o.out_dir + "/distances.csv";
    code = rubato_dmat_save(dm, out.c_str());
  }
  rubato_dmat_free(dm);
  return report(code);
}

int cmd_cluster(const std::string& dmat_path, int clusters,
                const std::string& linkage, int outlier_k,
                double outlier_threshold, const CommonOpts& o) {
  rubato_dmat* dm = nullptr;
  int code = rubato_dmat_load(dmat_path.c_str(), &dm);
  if (code == RUBATO_OK) {
    std::string labels = o.out_dir + "/clusters.csv";
    std::string dendro = o.out_dir + "/dendrogram.csv";
    code = rubato_cluster(dm, clusters, linkage.c_str(), outlier_k,
                          outlier_threshold, labels.c_str(), dendro.c_str());
  }
  rubato_dmat_free(dm);
  return report(code);
}

int cmd_export(const std::string& fit_path, const std::string& input,
               const CommonOpts& o) {
  rubato_fit* fit = nullptr;
  rubato_record* rec = nullptr;
  int code = rubato_fit_load(fit_path.c_str(), &fit);
  if (code == RUBATO_OK) {
    code = rubato_record_load(input.c_str(), o.format.c_str(),
                              o.beats_per_measure, &rec);
  }
  if (code == RUBATO_OK) {
    std::string out = o.out_dir + "/" + stem_of(fit_path) + "_curve.csv";
    code = rubato_fit_export(fit, rec, out.c_str());
  }
  rubato_record_free(rec);
  rubato_fit_free(fit);
  return report(code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-switching tempo model: fit, infer, simulate, cluster"};
  app.require_subcommand(1);

  CommonOpts o;
  rubato_fit_config_default(&o.cfg);

  std::vector<std::string> inputs;
  std::string theta_path, score_path, dmat_path, fit_path;
  std::string id = "simulated";
  std::string linkage = "complete";
  int clusters = 4;
  int outlier_k = 3;
  double outlier_threshold = 0.35;

  auto* fit = app.add_subcommand("fit", "fit recordings by penalized ML");
  fit->add_option("inputs", inputs, "recording CSV files")->required();
  fit->add_option("--format", o.format, "input format: tempos|onsets");
  fit->add_option("--beats-per-measure", o.beats_per_measure);
  add_fit_flags(fit, o);

  auto* infer = app.add_subcommand("infer", "best path at a fixed theta");
  infer->add_option("input", fit_path, "recording CSV")->required();
  infer->add_option("--theta", theta_path, "theta file")->required();
  infer->add_option("--format", o.format, "input format: tempos|onsets");
  infer->add_option("--beats-per-measure", o.beats_per_measure);
  add_fit_flags(infer, o);

  auto* simulate = app.add_subcommand("simulate", "draw a synthetic performance");
  simulate->add_option("--theta", theta_path, "theta file")->required();
  simulate->add_option("--score", score_path, "score CSV")->required();
  simulate->add_option("--id", id, "identifier for the output recording");
  simulate->add_option("--seed", o.cfg.seed, "random seed");
  simulate->add_option("--out-dir", o.out_dir, "output directory");

  auto* distances = app.add_subcommand("distances", "pairwise parametric distances");
  distances->add_option("fits", inputs, "fit files")->required();
  distances->add_option("--out-dir", o.out_dir, "output directory");

  auto* clusterc = app.add_subcommand("cluster", "screen outliers and cluster");
  clusterc->add_option("distances", dmat_path, "distance matrix CSV")->required();
  clusterc->add_option("--clusters", clusters, "number of clusters");
  clusterc->add_option("--linkage", linkage, "complete|average|single");
  clusterc->add_option("--outlier-k", outlier_k, "neighbor rank for screening");
  clusterc->add_option("--outlier-threshold", outlier_threshold,
                       "unit-scale screening threshold");
  clusterc->add_option("--out-dir", o.out_dir, "output directory");

  auto* exportc = app.add_subcommand("export", "plot-ready per-note CSV");
  exportc->add_option("fit", fit_path, "fit file")->required();
  exportc->add_option("input", score_path, "matching recording CSV")->required();
  exportc->add_option("--format", o.format, "input format: tempos|onsets");
  exportc->add_option("--beats-per-measure", o.beats_per_measure);
  exportc->add_option("--out-dir", o.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  if (fit->parsed()) return cmd_fit(inputs, o);
  if (infer->parsed()) return cmd_infer(fit_path, theta_path, o);
  if (simulate->parsed()) return cmd_simulate(theta_path, score_path, id, o);
  if (distances->parsed()) return cmd_distances(inputs, o);
  if (clusterc->parsed()) {
    return cmd_cluster(dmat_path, clusters, linkage, outlier_k,
                       outlier_threshold, o);
  }
  if (exportc->parsed()) return cmd_export(fit_path, score_path, o);
  return kExitUsage;
}
