#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cluster.hpp"
#include "estimate.hpp"

namespace rubato::io {

struct PerformanceRecord {
  std::string id;  // performer + year
  std::vector<tempo::ScoreEvent> score;
  std::vector<double> y;  // tempo per note, b.p.m.
  std::vector<double> onsets;    // raw onset times, empty unless ingested
  std::vector<double> loudness;  // preserved but never modeled
};

enum class IngestFormat { Onsets, Tempos };

// CSV ingestion. `onsets` columns: note_index, measure, beat, l, onset_s
// (optional trailing loudness); tempo i is 60 * beats_per_measure * l_i over
// the i-th inter-onset interval, so y has one fewer entry than the onset
// rows. `tempos` columns carry tempo_bpm directly.
PerformanceRecord ingest(const std::string& path, IngestFormat format,
                         int beats_per_measure = 3);

// Score-only CSV: note_index, measure, beat, l.
std::vector<tempo::ScoreEvent> load_score(const std::string& path);
void save_score(const std::vector<tempo::ScoreEvent>& score,
                const std::string& path);

void save_tempos(const PerformanceRecord& rec, const std::string& path);

// Parameter files: one `key: value` line per parameter, keys in the order
// sigma2_eps, mu_tempo, mu_acc, mu_stress, sigma2_tempo, p11, p12, p22, p31,
// p13, p21, p32.
void save_theta(const tempo::Theta& th, const std::string& path);
tempo::Theta load_theta(const std::string& path);

struct RunMeta {
  std::string version = "rubato 0.1.0";
  uint64_t seed = 0;
  int beam = 200;
  int restarts = 5;
};

// Per-recording fit result: metadata, theta, diagnostics, and the per-note
// path with smoothed tempos. Round-trips byte-identically.
void save_fit(const estimate::FittedPerformance& fp,
              const PerformanceRecord& rec, const RunMeta& meta,
              const std::string& path);

struct LoadedFit {
  estimate::FittedPerformance fit;
  std::string id;
  RunMeta meta;
};
LoadedFit load_fit(const std::string& path);

void save_distance_matrix(const cluster::DistanceMatrix& dm,
                          const std::string& path);
cluster::DistanceMatrix load_distance_matrix(const std::string& path);

void save_dendrogram(const cluster::Dendrogram& dend,
                     const std::vector<std::string>& labels,
                     const std::string& path);

// label,cluster CSV; screened-out recordings are listed with cluster `other`.
void save_cluster_labels(const std::vector<std::string>& labels,
                         const std::vector<int>& assignment,
                         const std::vector<std::string>& removed,
                         const std::string& path);

// Plot-ready CSV: note_index, measure, observed_tempo, smoothed_tempo,
// behavior.
void export_curve(const estimate::FittedPerformance& fp,
                  const PerformanceRecord& rec, const std::string& path);

// All writes go through a temp file + rename.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace rubato::io
