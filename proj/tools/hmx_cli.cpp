#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hmx/hmx.h"

namespace {

int input_error(const std::string& where, hmx_status s) {
  std::cerr << "hmx: " << where << ": " << hmx_status_name(s) << ": " << hmx_last_error() << "\n";
  return 2;
}

bool write_file(const std::string& path, const char* text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run an hmx job: arrangement, cosheaf, gluing, reduction, skeleton and flow checks"};
  std::string job_path;
  std::optional<int> degree;
  std::optional<std::string> cut_shift;
  std::optional<double> tolerance, max_flow_time;
  std::string trajectories_path, json_out;
  bool quiet = false;

  app.add_option("job", job_path, "job file (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--degree", degree, "degree bound D, overrides the job")->check(CLI::Range(2, 64));
  app.add_option("--cut-shift", cut_shift, "\"auto\" or comma separated rationals");
  app.add_option("--tolerance", tolerance, "relative tolerance of the flow integrator");
  app.add_option("--max-flow-time", max_flow_time, "integration time limit per flow line");
  app.add_option("--emit-trajectories", trajectories_path, "write flow trajectories as CSV");
  app.add_option("--json-out", json_out, "write the JSON report here instead of stdout");
  app.add_flag("-q,--quiet", quiet, "omit the summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  hmx_job* job = nullptr;
  if (auto s = hmx_job_from_file(job_path.c_str(), &job); s != HMX_OK) return input_error(job_path, s);

  hmx_status s = HMX_OK;
  if (degree) s = hmx_job_set_degree(job, *degree);
  if (s == HMX_OK && cut_shift) s = hmx_job_set_cut_shift(job, cut_shift->c_str());
  if (s == HMX_OK && tolerance) s = hmx_job_set_tolerance(job, *tolerance);
  if (s == HMX_OK && max_flow_time) s = hmx_job_set_max_flow_time(job, *max_flow_time);
  if (s == HMX_OK && !trajectories_path.empty()) s = hmx_job_set_emit_trajectories(job, 1);
  if (s != HMX_OK) {
    hmx_job_free(job);
    return input_error("options", s);
  }

  hmx_report* report = nullptr;
  s = hmx_run(job, &report);
  hmx_job_free(job);
  if (s != HMX_OK) {
    std::cerr << "hmx: " << hmx_status_name(s) << ": " << hmx_last_error() << "\n";
    return 1;
  }

  int rc = hmx_report_exit_code(report);
  if (json_out.empty()) {
    std::cout << hmx_report_json(report);
  } else if (!write_file(json_out, hmx_report_json(report))) {
    std::cerr << "hmx: cannot write " << json_out << "\n";
    rc = std::max(rc, 1);
  }
  if (!trajectories_path.empty() && !write_file(trajectories_path, hmx_report_trajectories_csv(report))) {
    std::cerr << "hmx: cannot write " << trajectories_path << "\n";
    rc = std::max(rc, 1);
  }
  if (!quiet) (json_out.empty() ? std::cerr : std::cout) << hmx_report_summary(report);
  hmx_report_free(report);
  return rc;
}
