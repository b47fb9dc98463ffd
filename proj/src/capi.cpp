#include "hmx/hmx.h"

#include <fstream>
#include <sstream>
#include <string>

#include "hmx/job.hpp"

struct hmx_job {
  hmx::job::JobSpec spec;
};

struct hmx_report {
  hmx::job::ReportBundle bundle;
  std::string json;
};

namespace {

thread_local std::string last_error;

hmx_status status_of(hmx::ErrorKind k) { return static_cast<hmx_status>(static_cast<int>(k) + 1); }

hmx_status fail(hmx_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

template <class F>
hmx_status guarded(F&& f) {
  last_error.clear();
  try {
    return f();
  } catch (const hmx::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(HMX_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(HMX_INTERNAL_ERROR, e.what());
  }
}

}  // namespace

extern "C" {

const char* hmx_last_error(void) { return last_error.c_str(); }

const char* hmx_version(void) { return "0.1.0"; }

const char* hmx_status_name(hmx_status status) {
  switch (status) {
    case HMX_OK:
      return "Ok";
    case HMX_IO_ERROR:
      return "IoError";
    case HMX_INVALID_ARGUMENT:
      return "InvalidArgument";
    case HMX_INTERNAL_ERROR:
      return "InternalError";
    default:
      break;
  }
  int k = static_cast<int>(status) - 1;
  if (k < 0 || k > static_cast<int>(hmx::ErrorKind::ParseError)) return "Unknown";
  return hmx::to_string(static_cast<hmx::ErrorKind>(k));
}

hmx_status hmx_job_from_json(const char* text, hmx_job** out) {
  if (!text || !out) return fail(HMX_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new hmx_job{hmx::job::parse_job_text(text)};
    return HMX_OK;
  });
}

hmx_status hmx_job_from_file(const char* path, hmx_job** out) {
  if (!path || !out) return fail(HMX_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  std::ifstream in(path);
  if (!in) return fail(HMX_IO_ERROR, std::string("cannot open ") + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return hmx_job_from_json(buf.str().c_str(), out);
}

void hmx_job_free(hmx_job* job) { delete job; }

hmx_status hmx_job_set_degree(hmx_job* job, int degree) {
  if (!job) return fail(HMX_INVALID_ARGUMENT, "null job");
  if (degree < 2) return fail(HMX_PARSE_ERROR, "degree must be at least 2");
  job->spec.degree = degree;
  return HMX_OK;
}

hmx_status hmx_job_set_cut_shift(hmx_job* job, const char* shift) {
  if (!job || !shift) return fail(HMX_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    job->spec.cut_shift = hmx::job::parse_cut_shift(shift);
    return HMX_OK;
  });
}

hmx_status hmx_job_set_tolerance(hmx_job* job, double rel_tolerance) {
  if (!job) return fail(HMX_INVALID_ARGUMENT, "null job");
  if (!(rel_tolerance > 0)) return fail(HMX_PARSE_ERROR, "tolerance must be positive");
  job->spec.flow.params.rel_tolerance = rel_tolerance;
  return HMX_OK;
}

hmx_status hmx_job_set_max_flow_time(hmx_job* job, double max_time) {
  if (!job) return fail(HMX_INVALID_ARGUMENT, "null job");
  if (!(max_time > 0)) return fail(HMX_PARSE_ERROR, "max flow time must be positive");
  job->spec.flow.params.max_time = max_time;
  return HMX_OK;
}

hmx_status hmx_job_set_emit_trajectories(hmx_job* job, int enabled) {
  if (!job) return fail(HMX_INVALID_ARGUMENT, "null job");
  job->spec.flow.trajectories = enabled != 0;
  return HMX_OK;
}

hmx_status hmx_run(const hmx_job* job, hmx_report** out) {
  if (!job || !out) return fail(HMX_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto r = new hmx_report{hmx::job::run(job->spec), {}};
    r->json = r->bundle.report.dump(2) + "\n";
    *out = r;
    return HMX_OK;
  });
}

void hmx_report_free(hmx_report* report) { delete report; }

int hmx_report_passed(const hmx_report* report) { return report && report->bundle.passed ? 1 : 0; }

int hmx_report_exit_code(const hmx_report* report) { return report ? report->bundle.exit_code : 2; }

const char* hmx_report_json(const hmx_report* report) { return report ? report->json.c_str() : ""; }

const char* hmx_report_summary(const hmx_report* report) { return report ? report->bundle.summary.c_str() : ""; }

const char* hmx_report_trajectories_csv(const hmx_report* report) {
  return report ? report->bundle.trajectories_csv.c_str() : "";
}

}  // extern "C"
