// Command-line front end; talks to the library exclusively through the C API.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nfbf.h"

namespace {

int report(nfbf_status status) {
  if (status == NFBF_OK) return 0;
  std::fprintf(stderr, "error: %s\n", nfbf_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-field dynamic hybrid beamforming simulator"};
  app.set_version_flag("--version", std::string(nfbf_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;

  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("config", config_path, "Path to the experiment config")->required();
  run->add_option("-o,--output-dir", output_dir, "Override the configured output directory");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse and validate a config, print its hash");
  validate->add_option("config", validate_path, "Path to the experiment config")->required();

  auto* list = app.add_subcommand("list-experiments", "Describe the supported experiment sweeps");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    nfbf_experiment* experiment = nullptr;
    if (int rc = report(nfbf_experiment_load_file(config_path.c_str(), &experiment))) return rc;
    const int rc = report(
        nfbf_experiment_run(experiment, output_dir.empty() ? nullptr : output_dir.c_str()));
    if (rc == 0) std::printf("ok: results written\n");
    nfbf_experiment_free(experiment);
    return rc;
  }

  if (validate->parsed()) {
    nfbf_experiment* experiment = nullptr;
    if (int rc = report(nfbf_experiment_load_file(validate_path.c_str(), &experiment))) return rc;
    char hash[64];
    const int rc = report(nfbf_experiment_config_hash(experiment, hash, sizeof hash));
    if (rc == 0) std::printf("ok: %s\n", hash);
    nfbf_experiment_free(experiment);
    return rc;
  }

  if (list->parsed()) {
    size_t required = 0;
    nfbf_list_experiments(nullptr, 0, &required);
    std::vector<char> buf(required);
    if (int rc = report(nfbf_list_experiments(buf.data(), buf.size(), nullptr))) return rc;
    std::fputs(buf.data(), stdout);
    return 0;
  }

  return 1;
}
