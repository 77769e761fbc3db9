#include "nfbf.h"

#include <cstring>
#include <new>
#include <string>

#include "nfbf/fp_realtime.hpp"
#include "nfbf/harness.hpp"

namespace {

thread_local std::string g_last_error;

nfbf_status fail(nfbf_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

nfbf_status from_exception() {
  try {
    throw;
  } catch (const nfbf::ConfigError& e) {
    return fail(NFBF_ERROR_CONFIG, e.what());
  } catch (const nfbf::IoError& e) {
    return fail(NFBF_ERROR_IO, e.what());
  } catch (const nfbf::NumericError& e) {
    return fail(NFBF_ERROR_NUMERIC, e.what());
  } catch (const nfbf::CapacityError& e) {
    return fail(NFBF_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(NFBF_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(NFBF_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NFBF_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(NFBF_ERROR_INTERNAL, "unknown error");
  }
}

nfbf_status copy_out(const std::string& text, char* buf, size_t buflen, size_t* required) {
  if (required) *required = text.size() + 1;
  if (!buf || buflen == 0) {
    if (required) return NFBF_OK;  // size query
    return fail(NFBF_ERROR_INVALID_ARGUMENT, "output buffer is empty");
  }
  const size_t n = text.size() < buflen - 1 ? text.size() : buflen - 1;
  std::memcpy(buf, text.data(), n);
  buf[n] = '\0';
  return NFBF_OK;
}

}  // namespace

struct nfbf_experiment {
  nfbf::harness::ExperimentConfig config;
};

extern "C" {

const char* nfbf_version(void) { return nfbf::harness::kVersion; }

const char* nfbf_last_error(void) { return g_last_error.c_str(); }

nfbf_status nfbf_experiment_load_file(const char* path, nfbf_experiment** out) {
  if (!path || !out) return fail(NFBF_ERROR_INVALID_ARGUMENT, "path and out must be non-NULL");
  *out = nullptr;
  try {
    auto* handle = new nfbf_experiment{nfbf::harness::ExperimentConfig::load_file(path)};
    *out = handle;
    g_last_error.clear();
    return NFBF_OK;
  } catch (...) {
    return from_exception();
  }
}

nfbf_status nfbf_experiment_load_string(const char* json_text, nfbf_experiment** out) {
  if (!json_text || !out)
    return fail(NFBF_ERROR_INVALID_ARGUMENT, "json_text and out must be non-NULL");
  *out = nullptr;
  try {
    auto* handle = new nfbf_experiment{nfbf::harness::ExperimentConfig::load_string(json_text)};
    *out = handle;
    g_last_error.clear();
    return NFBF_OK;
  } catch (...) {
    return from_exception();
  }
}

void nfbf_experiment_free(nfbf_experiment* experiment) { delete experiment; }

nfbf_status nfbf_experiment_config_hash(const nfbf_experiment* experiment, char* buf,
                                        size_t buflen) {
  if (!experiment) return fail(NFBF_ERROR_INVALID_ARGUMENT, "experiment must be non-NULL");
  try {
    return copy_out(experiment->config.config_hash(), buf, buflen, nullptr);
  } catch (...) {
    return from_exception();
  }
}

nfbf_status nfbf_experiment_run(const nfbf_experiment* experiment,
                                const char* output_dir_override) {
  if (!experiment) return fail(NFBF_ERROR_INVALID_ARGUMENT, "experiment must be non-NULL");
  try {
    const auto manifest = nfbf::harness::run_experiment(experiment->config);
    const std::string out_dir =
        output_dir_override ? output_dir_override : experiment->config.output_dir;
    nfbf::harness::emit_csv(manifest, experiment->config, out_dir);
    g_last_error.clear();
    return NFBF_OK;
  } catch (...) {
    return from_exception();
  }
}

nfbf_status nfbf_list_experiments(char* buf, size_t buflen, size_t* required) {
  try {
    return copy_out(nfbf::harness::list_experiments(), buf, buflen, required);
  } catch (...) {
    return from_exception();
  }
}

nfbf_status nfbf_realtime_design(int n_antennas, int n_rf, int n_ues, const double* h_re,
                                 const double* h_im, const double* noise_w, double p_t_w,
                                 double* out_sum_rate, double* out_theta, int32_t* out_chain,
                                 double* out_fbb_re, double* out_fbb_im) {
  if (n_antennas < 1 || n_rf < 1 || n_ues < 1)
    return fail(NFBF_ERROR_INVALID_ARGUMENT, "dimensions must be positive");
  if (!h_re || !h_im || !noise_w || !out_sum_rate)
    return fail(NFBF_ERROR_INVALID_ARGUMENT, "h_re, h_im, noise_w, out_sum_rate are required");
  try {
    nfbf::CMat h(n_antennas, n_ues);
    for (int k = 0; k < n_ues; ++k)
      for (int n = 0; n < n_antennas; ++n) {
        const int idx = n + k * n_antennas;
        h(n, k) = nfbf::cxd(h_re[idx], h_im[idx]);
      }
    nfbf::RVec sigma2(n_ues);
    for (int k = 0; k < n_ues; ++k) sigma2(k) = noise_w[k];

    const auto result = nfbf::fp::run(h, sigma2, p_t_w, n_rf, nfbf::fp::FpSettings{});
    *out_sum_rate = result.trace(result.trace.size() - 1);
    if (out_theta)
      for (int n = 0; n < n_antennas; ++n) out_theta[n] = result.analog.theta(n);
    if (out_chain)
      for (int n = 0; n < n_antennas; ++n) {
        out_chain[n] = 0;
        for (int l = 0; l < n_rf; ++l)
          if (result.analog.switches(n, l) != 0) out_chain[n] = l + 1;
      }
    if (out_fbb_re && out_fbb_im)
      for (int k = 0; k < n_ues; ++k)
        for (int l = 0; l < n_rf; ++l) {
          const int idx = l + k * n_rf;
          out_fbb_re[idx] = result.f_bb(l, k).real();
          out_fbb_im[idx] = result.f_bb(l, k).imag();
        }
    g_last_error.clear();
    return NFBF_OK;
  } catch (...) {
    return from_exception();
  }
}

}  // extern "C"
