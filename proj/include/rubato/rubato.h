/* C API for the rubato tempo-interpretation library.
 *
 * All functions return RUBATO_OK (0) on success or a nonzero error code;
 * rubato_last_error() describes the most recent failure on the calling
 * thread. Objects are opaque handles released with the matching _free call.
 */
#ifndef RUBATO_H
#define RUBATO_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rubato_error {
  RUBATO_OK = 0,
  RUBATO_ERR_IO = 1,       /* file missing / unreadable / unwritable */
  RUBATO_ERR_PARSE = 2,    /* malformed input file */
  RUBATO_ERR_DIMENSION = 3,/* length or dimension mismatch */
  RUBATO_ERR_DOMAIN = 4,   /* argument outside its valid domain */
  RUBATO_ERR_NUMERIC = 5,  /* numerical failure (collapse, degenerate system) */
} rubato_error;

/* Message for the last error on this thread; empty string if none. */
const char* rubato_last_error(void);

typedef struct rubato_record rubato_record;   /* score + observed tempos */
typedef struct rubato_theta rubato_theta;     /* model parameters */
typedef struct rubato_fit rubato_fit;         /* fitted performance */
typedef struct rubato_dmat rubato_dmat;       /* labeled distance matrix */

typedef struct rubato_fit_config {
  int beam;            /* maximum DPF beam width */
  int restarts;        /* optimizer multistarts */
  int max_evals;       /* objective evaluations per restart */
  double tol;          /* convergence tolerance on the objective */
  uint64_t seed;
} rubato_fit_config;

/* Defaults: beam 200, restarts 5, max_evals 2000, tol 1e-6, seed 0. */
void rubato_fit_config_default(rubato_fit_config* cfg);

/* --- records ------------------------------------------------------------ */

/* format: "onsets" or "tempos". beats_per_measure <= 0 selects the default
 * of 3 (3/4 time). */
int rubato_record_load(const char* path, const char* format,
                       int beats_per_measure, rubato_record** out);
int rubato_record_save(const rubato_record* rec, const char* path);
int rubato_record_length(const rubato_record* rec);
void rubato_record_free(rubato_record* rec);

/* --- parameters --------------------------------------------------------- */

int rubato_theta_load(const char* path, rubato_theta** out);
int rubato_theta_save(const rubato_theta* th, const char* path);
/* Theta at the penalty prior means with mu_tempo = mean_tempo. */
int rubato_theta_prior_means(double mean_tempo, rubato_theta** out);
void rubato_theta_free(rubato_theta* th);

/* --- simulation --------------------------------------------------------- */

/* Draw a synthetic performance over the score CSV at `score_path`. */
int rubato_simulate(const rubato_theta* th, const char* score_path,
                    uint64_t seed, const char* id, rubato_record** out);

/* --- fitting and inference ---------------------------------------------- */

int rubato_fit_run(const rubato_record* rec, const rubato_fit_config* cfg,
                   rubato_fit** out);
/* Best path and smoothed curve at a fixed theta. */
int rubato_infer(const rubato_record* rec, const rubato_theta* th,
                 const rubato_fit_config* cfg, rubato_fit** out);
int rubato_fit_save(const rubato_fit* fit, const rubato_record* rec,
                    const rubato_fit_config* cfg, const char* path);
int rubato_fit_load(const char* path, rubato_fit** out);
int rubato_fit_theta(const rubato_fit* fit, rubato_theta** out);
/* Plot-ready per-note CSV. */
int rubato_fit_export(const rubato_fit* fit, const rubato_record* rec,
                      const char* path);
void rubato_fit_free(rubato_fit* fit);

/* --- distances and clustering ------------------------------------------- */

/* Pairwise parametric distances between previously saved fit files. */
int rubato_distances(const char* const* fit_paths, size_t n_fits,
                     rubato_dmat** out);
int rubato_dmat_save(const rubato_dmat* dm, const char* path);
int rubato_dmat_load(const char* path, rubato_dmat** out);
/* Screen outliers (k-th neighbor above threshold on the unit scale), cluster
 * the rest with the given linkage ("complete", "average", "single"), cut
 * into k_clusters groups, and write label and dendrogram files. */
int rubato_cluster(const rubato_dmat* dm, int k_clusters, const char* linkage,
                   int outlier_k, double outlier_threshold,
                   const char* labels_path, const char* dendrogram_path);
void rubato_dmat_free(rubato_dmat* dm);

#ifdef __cplusplus
}
#endif

#endif /* RUBATO_H */
