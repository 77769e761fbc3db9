#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nfbf.h"

namespace {

const char* kConfig = R"({
  "name": "capi",
  "scenario": {
    "n_antennas": 10, "n_rf": 2, "n_ues": 2,
    "ue_centers": [{"aod_deg": 15.0, "range_m": 2.5}, {"aod_deg": -30.0, "range_m": 3.0}],
    "aod_spread_rad": 0.0, "range_spread_m": 0.0
  },
  "algorithms": ["DS-R"],
  "sweep": {"axis": "power", "values": [30.0]},
  "seeds": [7],
  "fp": {"max_outer_iters": 6}
})";

}  // namespace

TEST_SUITE("capi") {
  TEST_CASE("version and error text") {
    CHECK(std::strlen(nfbf_version()) > 0);
    CHECK(nfbf_last_error() != nullptr);
  }

  TEST_CASE("load, hash, run, free") {
    namespace fs = std::filesystem;
    nfbf_experiment* experiment = nullptr;
    REQUIRE(nfbf_experiment_load_string(kConfig, &experiment) == NFBF_OK);
    REQUIRE(experiment != nullptr);

    char hash[64];
    CHECK(nfbf_experiment_config_hash(experiment, hash, sizeof hash) == NFBF_OK);
    CHECK(std::string(hash).rfind("fnv1a64:", 0) == 0);

    const fs::path dir = fs::temp_directory_path() / "nfbf_capi_out";
    fs::remove_all(dir);
    CHECK(nfbf_experiment_run(experiment, dir.string().c_str()) == NFBF_OK);
    CHECK(fs::exists(dir / "results.csv"));
    CHECK(fs::exists(dir / "manifest.json"));
    fs::remove_all(dir);
    nfbf_experiment_free(experiment);
  }

  TEST_CASE("load failures set a status and a message") {
    nfbf_experiment* experiment = nullptr;
    CHECK(nfbf_experiment_load_string("{ not json", &experiment) == NFBF_ERROR_CONFIG);
    CHECK(experiment == nullptr);
    CHECK(std::strlen(nfbf_last_error()) > 0);

    CHECK(nfbf_experiment_load_string(R"({"algorithms": ["DS-R"],
          "sweep": {"values": [2, 1]}, "seeds": [1]})",
                                      &experiment) == NFBF_ERROR_CONFIG);
    CHECK(nfbf_experiment_load_file("/nonexistent/path.json", &experiment) == NFBF_ERROR_CONFIG);
    CHECK(nfbf_experiment_load_string(nullptr, &experiment) == NFBF_ERROR_INVALID_ARGUMENT);
  }

  TEST_CASE("list_experiments size query and copy") {
    size_t required = 0;
    CHECK(nfbf_list_experiments(nullptr, 0, &required) == NFBF_OK);
    CHECK(required > 10);
    std::vector<char> buf(required);
    CHECK(nfbf_list_experiments(buf.data(), buf.size(), nullptr) == NFBF_OK);
    CHECK(std::strlen(buf.data()) == required - 1);

    char tiny[8];
    CHECK(nfbf_list_experiments(tiny, sizeof tiny, nullptr) == NFBF_OK);
    CHECK(std::strlen(tiny) == 7);  // truncated but terminated
  }

  TEST_CASE("realtime design over the flat-array surface") {
    // small deterministic complex channel
    const int n_t = 6, n_rf = 2, k = 2;
    std::vector<double> h_re(n_t * k), h_im(n_t * k);
    for (int i = 0; i < n_t * k; ++i) {
      h_re[i] = 0.01 * std::cos(0.7 * i + 0.3);
      h_im[i] = 0.01 * std::sin(1.1 * i);
    }
    std::vector<double> noise(k, 1e-6);
    double rate = 0.0;
    std::vector<double> theta(n_t);
    std::vector<int32_t> chain(n_t);
    std::vector<double> fbb_re(n_rf * k), fbb_im(n_rf * k);

    REQUIRE(nfbf_realtime_design(n_t, n_rf, k, h_re.data(), h_im.data(), noise.data(), 1.0,
                                 &rate, theta.data(), chain.data(), fbb_re.data(),
                                 fbb_im.data()) == NFBF_OK);
    CHECK(rate > 0.0);
    for (int n = 0; n < n_t; ++n) {
      CHECK(chain[n] >= 0);
      CHECK(chain[n] <= n_rf);
    }

    // reconstruct the beamformers and verify the advertised sum rate / power
    const double rho = 1.0 / std::sqrt(static_cast<double>(n_t));
    std::vector<std::complex<double>> f_rf(n_t * n_rf, 0.0), f_bb(n_rf * k);
    for (int n = 0; n < n_t; ++n)
      if (chain[n] > 0) f_rf[n + (chain[n] - 1) * n_t] = std::polar(rho, theta[n]);
    for (int i = 0; i < n_rf * k; ++i) f_bb[i] = {fbb_re[i], fbb_im[i]};

    double power = 0.0;
    double sum_rate = 0.0;
    std::vector<std::complex<double>> eff(k * k, 0.0);
    for (int uk = 0; uk < k; ++uk)
      for (int j = 0; j < k; ++j) {
        std::complex<double> acc = 0.0;
        for (int n = 0; n < n_t; ++n)
          for (int l = 0; l < n_rf; ++l)
            acc += std::conj(std::complex<double>(h_re[n + uk * n_t], h_im[n + uk * n_t])) *
                   f_rf[n + l * n_t] * f_bb[l + j * n_rf];
        eff[uk + j * k] = acc;
      }
    for (int n = 0; n < n_t; ++n)
      for (int j = 0; j < k; ++j) {
        std::complex<double> acc = 0.0;
        for (int l = 0; l < n_rf; ++l) acc += f_rf[n + l * n_t] * f_bb[l + j * n_rf];
        power += std::norm(acc);
      }
    for (int uk = 0; uk < k; ++uk) {
      double interference = noise[uk];
      for (int j = 0; j < k; ++j)
        if (j != uk) interference += std::norm(eff[uk + j * k]);
      sum_rate += std::log2(1.0 + std::norm(eff[uk + uk * k]) / interference);
    }
    CHECK(power == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sum_rate == doctest::Approx(rate).epsilon(1e-9));

    CHECK(nfbf_realtime_design(0, 1, 1, h_re.data(), h_im.data(), noise.data(), 1.0, &rate,
                               nullptr, nullptr, nullptr, nullptr) ==
          NFBF_ERROR_INVALID_ARGUMENT);
  }
}
