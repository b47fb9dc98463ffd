#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hmx/core_lattice.hpp"
#include "hmx/skeleton.hpp"

namespace hmx::job {

using Json = nlohmann::ordered_json;

struct FlowSpec {
  skeleton::FlowParams params;
  std::vector<std::pair<double, double>> points;  // (r, theta)
  std::size_t random_points = 100;                // drawn in r_lo < r < r_hi when points is empty
  std::uint64_t seed = 1;
  double r_lo = 1.2, r_hi = 1.9;
  std::size_t grid = 400;
  bool trajectories = false;
};

struct JobSpec {
  std::string name;
  lattice::IntMatrix iota;
  RatVec beta;
  int degree = 6;
  std::optional<RatVec> cut_shift;  // empty means "auto"
  std::vector<std::string> commands;
  FlowSpec flow;
};

/// Throws Error(ParseError) with the offending field.
JobSpec parse_job(const Json& j);
JobSpec parse_job_text(const std::string& text);
/// "auto" or comma separated rationals.
std::optional<RatVec> parse_cut_shift(const std::string& s);

struct ReportBundle {
  Json report;
  bool passed = false;
  int exit_code = 1;  // 0 pass, 1 verification failure, 2 input error
  std::string summary;
  std::string trajectories_csv;
};

ReportBundle run(const JobSpec& job);

/// Stage order; requested stages pull in what they depend on.
const std::vector<std::string>& stage_order();

}  // namespace hmx::job
