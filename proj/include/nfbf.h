/*
 * C interface to the near-field dynamic hybrid beamforming library.
 *
 * Handles are opaque; every call returns a status code and a thread-local
 * message is available through nfbf_last_error() after a failure. Strings
 * written into caller buffers are always NUL-terminated when the buffer is
 * non-empty.
 */
#ifndef NFBF_H
#define NFBF_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32) || defined(_WIN64)
#define NFBF_API __declspec(dllexport)
#else
#define NFBF_API __attribute__((visibility("default")))
#endif

typedef enum nfbf_status {
  NFBF_OK = 0,
  NFBF_ERROR_INVALID_ARGUMENT = 1,
  NFBF_ERROR_CONFIG = 2,
  NFBF_ERROR_IO = 3,
  NFBF_ERROR_NUMERIC = 4,
  NFBF_ERROR_INTERNAL = 5
} nfbf_status;

/* A loaded, validated experiment configuration. */
typedef struct nfbf_experiment nfbf_experiment;

NFBF_API const char* nfbf_version(void);

/* Message for the most recent failure on this thread ("" when none). */
NFBF_API const char* nfbf_last_error(void);

NFBF_API nfbf_status nfbf_experiment_load_file(const char* path, nfbf_experiment** out);
NFBF_API nfbf_status nfbf_experiment_load_string(const char* json_text, nfbf_experiment** out);
NFBF_API void nfbf_experiment_free(nfbf_experiment* experiment);

/* Canonical configuration hash, e.g. "fnv1a64:1a2b...". */
NFBF_API nfbf_status nfbf_experiment_config_hash(const nfbf_experiment* experiment, char* buf,
                                                 size_t buflen);

/* Runs the experiment and writes results.csv / manifest.json (plus optional
 * exports) under the configured output directory, or output_dir_override
 * when non-NULL. */
NFBF_API nfbf_status nfbf_experiment_run(const nfbf_experiment* experiment,
                                         const char* output_dir_override);

/* Catalogue of supported sweep axes / exports. Writes up to buflen bytes;
 * *required (optional) receives the full length including the terminator. */
NFBF_API nfbf_status nfbf_list_experiments(char* buf, size_t buflen, size_t* required);

/* One-shot real-time dynamic hybrid design on a caller-supplied channel.
 * h_re/h_im: column-major n_antennas x n_ues. noise_w: per-UE noise power in
 * watts. Outputs are optional unless noted: out_sum_rate (required),
 * out_theta (n_antennas), out_chain (n_antennas; 0 = antenna off, else
 * 1-based RF chain), out_fbb_re/out_fbb_im (column-major n_rf x n_ues). */
NFBF_API nfbf_status nfbf_realtime_design(int n_antennas, int n_rf, int n_ues,
                                          const double* h_re, const double* h_im,
                                          const double* noise_w, double p_t_w,
                                          double* out_sum_rate, double* out_theta,
                                          int32_t* out_chain, double* out_fbb_re,
                                          double* out_fbb_im);

#ifdef __cplusplus
}
#endif

#endif /* NFBF_H */
