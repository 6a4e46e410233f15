// Command-line front end over the pseudoproc C API.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pseudoproc.h"

namespace {

int fail_with(pp_status status) {
  std::fprintf(stderr,
               "{\n  \"error\": \"%s\",\n  \"detail\": \"%s\"\n}\n",
               pp_status_name(status), pp_last_error());
  return 2;
}

int cmd_run(const std::string& config_path) {
  pp_result* result = nullptr;
  const pp_status status = pp_run_config_file(config_path.c_str(), &result);
  if (status != PP_OK) return fail_with(status);
  std::printf("%s\n", pp_result_manifest_json(result));
  const int ok = pp_result_all_passed(result);
  pp_result_free(result);
  return ok ? 0 : 1;
}

int cmd_ingest(const std::string& csv_path, int dim, bool peek) {
  pp_sample* sample = nullptr;
  const pp_status status = pp_sample_ingest_csv(csv_path.c_str(), dim, &sample);
  if (status != PP_OK) return fail_with(status);
  const int64_t n = pp_sample_size(sample);
  std::printf("rows=%lld dim=%d source=%s\n", static_cast<long long>(n),
              pp_sample_dim(sample), csv_path.c_str());
  if (peek) {
    std::vector<double> data(static_cast<size_t>(n) * dim);
    pp_sample_copy_data(sample, data.data());
    const int64_t show = n < 5 ? n : 5;
    for (int64_t i = 0; i < show; ++i) {
      std::printf("  [%lld]", static_cast<long long>(i));
      for (int j = 0; j < dim; ++j) {
        std::printf(" %.6g", data[static_cast<size_t>(i) * dim + j]);
      }
      std::printf("\n");
    }
    if (show < n) std::printf("  ... %lld more rows\n",
                              static_cast<long long>(n - show));
  }
  pp_sample_free(sample);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-observation process experiments"};
  app.set_version_flag("--version", std::string(pp_version()));
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "execute an experiment config");
  run_cmd->add_option("config", config_path, "JSON config file")
      ->required()
      ->check(CLI::ExistingFile);

  std::string csv_path;
  int dim = 2;
  bool peek = false;
  auto* ingest_cmd =
      app.add_subcommand("ingest", "validate and inspect a CSV sample");
  ingest_cmd->add_option("file", csv_path, "CSV file with header")->required();
  ingest_cmd->add_option("--dim", dim, "number of columns")->required();
  ingest_cmd->add_flag("--peek", peek, "print the first rows");

  auto* list_cmd = app.add_subcommand("list-checks", "list runnable checks");

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) return cmd_run(config_path);
  if (ingest_cmd->parsed()) return cmd_ingest(csv_path, dim, peek);
  if (list_cmd->parsed()) {
    std::printf("%s", pp_list_checks());
    return 0;
  }
  return 0;
}
