#include "hmx/job.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "hmx/arrangement.hpp"
#include "hmx/cosheaf_glue.hpp"

namespace hmx::job {

namespace {

using beilinson::Flavor;

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

Json ints(const IntVec& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(x.fits_slong_p() ? Json(x.get_si()) : Json(x.get_str()));
  return a;
}

Json rats(const RatVec& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(to_string(x));
  return a;
}

Json longs(const std::vector<long>& v) { return Json(v); }

Json matrix(const lattice::IntMatrix& m) {
  Json a = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) a.push_back(ints(m.row(i)));
  return a;
}

Json failures(const ValidationReport& r) { return Json(r.failures); }

bool input_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidSequence:
    case ErrorKind::NoLift:
    case ErrorKind::NonGenericArrangement:
    case ErrorKind::NonUnimodularFlat:
      return true;
    default:
      return false;
  }
}

Json presentation_json(const ncalg::Presentation& p) {
  Json j;
  j["vertices"] = p.vertices;
  Json gens = Json::array();
  for (const auto& g : p.generators)
    gens.push_back({{"name", g.name}, {"src", p.vertices[g.src]}, {"tgt", p.vertices[g.tgt]}, {"degree", g.degree}});
  j["generators"] = gens;
  Json inv = Json::array();
  for (const auto& [g, h] : p.inverses) inv.push_back({p.generators[g].name, p.generators[h].name});
  j["inverses"] = inv;
  Json rel = Json::array();
  for (const auto& r : p.relations) rel.push_back(p.to_string(r));
  j["relations"] = rel;
  return j;
}

std::string join_dims(const std::vector<std::size_t>& d) {
  std::string s;
  for (auto x : d) s += (s.empty() ? "" : ",") + std::to_string(x);
  return "(" + s + ")";
}

struct Context {
  explicit Context(const JobSpec& j) : job(j), report(Json::object()) {}
  const JobSpec& job;
  Json report;
  Json verifications = Json::array();
  std::vector<std::string> lines;
  std::string csv;

  std::optional<lattice::ToriSequence> seq;
  std::optional<arrangement::FacePoset> poset;
  std::optional<glue::AlgebraCosheaf> cosheaf_b, cosheaf_b0;
  std::optional<glue::CellComplex> cells;

  void verify(const std::string& name, bool ok, Json detail = Json()) {
    Json v{{"name", name}, {"passed", ok}};
    if (!detail.is_null()) v["detail"] = std::move(detail);
    verifications.push_back(std::move(v));
    lines.push_back(std::string(ok ? "PASS " : "FAIL ") + name);
  }
};

void stage_arrange(Context& c) {
  Json out;
  c.seq = lattice::make_sequence(c.job.iota);
  out["sequence"] = {{"n", c.seq->n}, {"k", c.seq->k}, {"d", c.seq->d()}, {"iota", matrix(c.seq->iota)},
                     {"L_basis", matrix(c.seq->L_basis)}};
  auto arr = arrangement::build_arrangement(*c.seq, lattice::RationalPoint::reduced(c.job.beta));
  Json fams = Json::array();
  for (const auto& f : arr.families) fams.push_back({{"alpha", ints(f.alpha)}, {"offset", to_string(f.offset)}});
  out["families"] = fams;
  auto gen = arrangement::genericity_check(arr);
  Json flats = Json::array();
  for (const auto& f : gen.flats) flats.push_back({{"families", f.families}, {"reason", f.reason}});
  out["genericity"] = {{"passed", gen.passed()}, {"failures", failures(gen)}, {"flats", flats}};
  c.report["arrange"] = out;
  if (!gen.passed()) {
    c.verify("arrangement is generic", false, flats);
    throw Error(ErrorKind::NonGenericArrangement, gen.failures.front());
  }
  c.poset = arrangement::enumerate_faces(arr);
  const auto& P = *c.poset;
  Json faces = Json::array();
  std::vector<std::size_t> by_dim(arr.d + 1, 0);
  long euler = 0;
  for (const auto& f : P.faces()) {
    faces.push_back({{"dim", f.dim}, {"lift", longs(f.lift)}, {"rep_point", rats(f.rep_point)}});
    ++by_dim[f.dim];
    euler += f.dim % 2 == 0 ? 1 : -1;
  }
  c.report["arrange"]["faces"] = faces;
  c.report["arrange"]["face_counts"] = by_dim;
  c.report["arrange"]["covers"] = P.covers().size();
  c.verify("arrangement is generic", true);
  const bool full_rank = lattice::rank(arr.conormals()) == arr.d;
  if (full_rank) c.verify("torus Euler relation", euler == 0, Json{{"alternating_sum", euler}});
  c.lines.push_back("faces by dimension " + join_dims(by_dim));
}

Json cosheaf_json(const glue::AlgebraCosheaf& C, int D) {
  Json stalks = Json::array();
  for (std::size_t f = 0; f < C.algebras.size(); ++f) {
    auto rw = ncalg::complete(C.algebras[f], std::max(D, 8));
    stalks.push_back({{"face", f},
                      {"factors", C.stalks[f].labels},
                      {"vertices", C.algebras[f].vertices.size()},
                      {"generators", C.algebras[f].generators.size()},
                      {"graded_dims", rw.graded_dims(std::min(D, 4))}});
  }
  Json cors = Json::array();
  const auto& cs = C.poset.covers();
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto& F = C.algebras[cs[i].upper];
    const auto& G = C.algebras[cs[i].lower];
    Json images;
    for (ncalg::Gen g = 0; g < F.generators.size(); ++g) images[F.generators[g].name] = G.to_string(C.corestrictions[i].gen_image[g]);
    cors.push_back({{"upper", cs[i].upper}, {"lower", cs[i].lower}, {"wall", cs[i].wall}, {"side", cs[i].side}, {"images", images}});
  }
  return {{"flavor", beilinson::to_string(C.flavor)}, {"stalks", stalks}, {"corestrictions", cors}};
}

void stage_cosheaf(Context& c) {
  const int D = c.job.degree;
  Json out;
  for (auto flavor : {Flavor::B0, Flavor::B}) {
    auto C = glue::build_cosheaf(*c.poset, flavor, D);
    auto rep = glue::check_cosheaf(C, D);
    c.verify(std::string("cosheaf ") + beilinson::to_string(flavor) + " is functorial", rep.passed(), failures(rep));
    out[beilinson::to_string(flavor)] = cosheaf_json(C, D);
    (flavor == Flavor::B ? c.cosheaf_b : c.cosheaf_b0) = std::move(C);
  }
  c.report["cosheaf"] = out;
}

void ensure_cells(Context& c) {
  if (c.cells) return;
  c.cells = c.job.cut_shift ? glue::refine_cells(*c.poset, *c.job.cut_shift) : glue::refine_cells_auto(*c.poset);
}

void stage_global(Context& c) {
  ensure_cells(c);
  const int D = c.job.degree;
  Json out;
  out["cut_shift"] = rats(c.cells->shift);
  out["cut_shift_mode"] = c.job.cut_shift ? "given" : "auto";
  std::vector<std::size_t> cell_counts(c.poset->arrangement().d + 1, 0);
  for (const auto& f : c.cells->cells.faces()) ++cell_counts[f.dim];
  out["cells_by_dimension"] = cell_counts;
  out["model"] = "gluing quiver: stalk algebras per cell, invertible connectors per cover and stalk idempotent";
  for (const auto* C : {&*c.cosheaf_b0, &*c.cosheaf_b}) {
    auto g = glue::global_algebra(*C, *c.cells);
    auto rw = ncalg::complete(g.collapsed(), std::max(D, 8));
    Json j;
    j["quiver"] = {{"vertices", g.quiver.vertices.size()},
                   {"generators", g.quiver.generators.size()},
                   {"relations", g.quiver.relations.size()},
                   {"connectors", g.connectors.size()}};
    j["collapsed"] = presentation_json(g.collapsed());
    j["rewriting"] = {{"rules", rw.rules().size()}, {"finite", rw.finite()}};
    auto dims = rw.graded_dims(D);
    j["graded_dims"] = dims;
    const std::string flavor = beilinson::to_string(C->flavor);
    if (C->central_structure()) {
      Json central = Json::array();
      bool all = true;
      for (const auto& z : g.central) {
        bool ok = ncalg::is_central(rw, z);
        all = all && ok;
        central.push_back({{"element", g.collapsed().to_string(rw.reduce(z))}, {"central", ok}});
      }
      j["central_lattice"] = central;
      c.verify("glued central elements are central", all);
    }
    c.lines.push_back("global algebra " + flavor + " graded dims " + join_dims(dims));
    out[flavor] = j;
  }
  c.report["global"] = out;
}

void stage_reduce(Context& c) {
  const int D = c.job.degree;
  auto R = glue::reduce_cosheaf(*c.cosheaf_b, D);
  Json stalks = Json::array();
  bool all = true;
  for (std::size_t f = 0; f < R.algebras.size(); ++f) {
    auto rr = ncalg::complete(R.algebras[f], std::max(D, 8));
    auto r0 = ncalg::complete(c.cosheaf_b0->algebras[f], std::max(D, 8));
    auto iso = ncalg::iso_check(r0, rr, ncalg::map_by_name(c.cosheaf_b0->algebras[f], R.algebras[f]), D);
    all = all && iso.passed();
    stalks.push_back({{"face", f}, {"passed", iso.passed()}, {"dims", iso.target_dims}, {"failures", failures(iso)}});
  }
  c.report["reduce"] = {{"stalks", stalks}};
  c.verify("stalkwise reduction matches B0", all);
}

void stage_verify(Context& c) {
  ensure_cells(c);
  auto rep = glue::verify_reduction_commutes(*c.poset, *c.cells, c.job.degree);
  c.report["verify"] = {{"degree", rep.degree},
                        {"passed", rep.passed()},
                        {"dims_b0", rep.dims_b0},
                        {"dims_reduced_cosheaf", rep.dims_reduced_cosheaf},
                        {"dims_reduced_global", rep.dims_reduced_global},
                        {"failures", failures(rep)},
                        {"notes", rep.notes}};
  c.verify("reduction commutes with gluing", rep.passed());
}

void stage_skeleton(Context& c) {
  auto S = skeleton::build_skeleton(*c.poset);
  ensure_cells(c);
  long chi = skeleton::euler_characteristic(S, *c.cells);
  long ie = skeleton::euler_inclusion_exclusion(c.poset->arrangement());
  std::size_t local_fail = 0;
  for (std::size_t i = 0; i < S.strata.size(); ++i) local_fail += !skeleton::local_model_check(S, i).passed();
  auto M = skeleton::attach_microsheaf_cosheaf(S, c.job.degree);
  auto dict = skeleton::check_dictionary(M);
  Json strata = Json::array();
  for (std::size_t i = 0; i < S.strata.size(); ++i) {
    Json labels = Json::array();
    for (auto l : S.strata[i].labels) labels.push_back(skeleton::to_string(l));
    strata.push_back({{"face", S.strata[i].face}, {"labels", labels}, {"dim", S.strata[i].dim}});
  }
  c.report["skeleton"] = {{"strata", strata},
                          {"incidences", S.incidences.size()},
                          {"euler_characteristic", chi},
                          {"inclusion_exclusion", ie},
                          {"local_model_failures", local_fail},
                          {"dictionary_failures", failures(dict)}};
  c.verify("skeleton Euler characteristic matches inclusion-exclusion", chi == ie, Json{{"chi", chi}, {"expected", ie}});
  c.verify("local product structure at every stratum", local_fail == 0);
  c.verify("microsheaf dictionary is total", dict.passed());
  c.lines.push_back("skeleton: " + std::to_string(S.strata.size()) + " strata, chi = " + std::to_string(chi));
}

void stage_flow(Context& c) {
  const auto& fs = c.job.flow;
  auto lr = skeleton::liouville_check_2d(fs.params, fs.grid);
  skeleton::FlowParams p = fs.params;
  p.c = lr.c;
  std::vector<std::pair<double, double>> pts = fs.points;
  if (pts.empty()) {
    std::mt19937_64 rng(fs.seed);
    std::uniform_real_distribution<double> rr(fs.r_lo, fs.r_hi), th(0, 2 * std::numbers::pi);
    for (std::size_t i = 0; i < fs.random_points; ++i) {
      double r = rr(rng);
      pts.emplace_back(r, th(rng));
    }
  }
  auto res = skeleton::flow_to_skeleton(p, pts, fs.trajectories);
  Json points = Json::array();
  std::size_t converged = 0, monotone = 0;
  double worst = 0, drift = 0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto& f = res[i];
    converged += f.limit != skeleton::Limit::NotConverged;
    monotone += f.monotone;
    worst = std::max(worst, f.distance);
    drift = std::max(drift, f.max_axis_drift);
    points.push_back({{"start", {f.r0, f.theta0}},
                      {"end", {f.r, f.theta}},
                      {"time", f.time},
                      {"distance", f.distance},
                      {"limit", skeleton::to_string(f.limit)},
                      {"monotone", f.monotone}});
    for (const auto& [t, r, th] : f.trajectory) {
      std::ostringstream line;
      line.precision(17);
      line << i << "," << t << "," << r << "," << th << "," << r * std::cos(th) << "," << r * std::sin(th) << "\n";
      c.csv += line.str();
    }
  }
  if (!c.csv.empty()) c.csv = "point,t,r,theta,x,y\n" + c.csv;
  c.report["flow"] = {{"epsilon", lr.epsilon},
                      {"c", lr.c},
                      {"c_threshold", lr.c_threshold},
                      {"grid", lr.resolution},
                      {"min_F", lr.min_F},
                      {"min_F_inner", lr.min_F_inner},
                      {"min_F_outer", lr.min_F_outer},
                      {"converged", converged},
                      {"monotone", monotone},
                      {"max_distance", worst},
                      {"max_axis_drift", drift},
                      {"points", points}};
  c.verify("Liouville coefficient F is positive", lr.positive, Json{{"min_F", lr.min_F}, {"c", lr.c}});
  c.verify("flow lines reach the skeleton", converged == res.size() && worst <= p.hausdorff_tolerance);
  c.verify("distance to the skeleton is non-increasing", monotone == res.size());
  std::ostringstream s;
  s << "flow: c = " << lr.c << ", min F = " << lr.min_F << ", " << converged << "/" << res.size() << " converged";
  c.lines.push_back(s.str());
}

const std::map<std::string, std::vector<std::string>>& dependencies() {
  static const std::map<std::string, std::vector<std::string>> deps{
      {"arrange", {}},
      {"cosheaf", {"arrange"}},
      {"global", {"cosheaf"}},
      {"reduce", {"cosheaf"}},
      {"verify", {"arrange"}},
      {"skeleton", {"arrange"}},
      {"flow", {}},
  };
  return deps;
}

std::vector<double> numbers(const Json& j, const std::string& what) {
  if (!j.is_array()) parse_fail(what + " must be an array");
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) parse_fail(what + " must contain numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

Rational rational_field(const Json& x, const std::string& what) {
  if (x.is_string()) return parse_rational(x.get<std::string>());
  if (x.is_number_integer()) return Rational(x.get<long>());
  parse_fail(what + " entries must be rational strings");
}

}  // namespace

const std::vector<std::string>& stage_order() {
  static const std::vector<std::string> order{"arrange", "cosheaf", "global", "reduce", "verify", "skeleton", "flow"};
  return order;
}

std::optional<RatVec> parse_cut_shift(const std::string& s) {
  if (s == "auto") return std::nullopt;
  RatVec v;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) v.push_back(parse_rational(tok));
  if (v.empty()) parse_fail("empty cut shift");
  return v;
}

JobSpec parse_job(const Json& j) {
  if (!j.is_object()) parse_fail("job must be a JSON object");
  JobSpec job;
  job.name = j.value("name", std::string());
  if (!j.contains("seq")) parse_fail("missing field seq");
  const auto& seq = j["seq"];
  if (!seq.is_object() || !seq.contains("n")) parse_fail("seq needs n and iota");
  const auto n = seq["n"].get<std::size_t>();
  std::vector<IntVec> rows;
  for (const auto& row : seq.value("iota", Json::array())) {
    IntVec r;
    for (const auto& x : row) {
      if (x.is_number_integer()) r.emplace_back(x.get<long>());
      else if (x.is_string()) r.push_back(parse_int(x.get<std::string>()));
      else parse_fail("iota entries must be integers");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) {
    job.iota = lattice::IntMatrix(n, 0);
  } else {
    for (const auto& r : rows)
      if (r.size() != rows.front().size()) parse_fail("iota rows differ in length");
    if (rows.size() != n) parse_fail("iota has " + std::to_string(rows.size()) + " rows, n = " + std::to_string(n));
    job.iota = lattice::IntMatrix::from_vectors(rows);
  }
  for (const auto& b : j.value("beta", Json::array())) job.beta.push_back(rational_field(b, "beta"));
  job.degree = j.value("degree_bound", 6);
  if (job.degree < 2) parse_fail("degree_bound must be at least 2");
  if (j.contains("cut_shift")) {
    const auto& cs = j["cut_shift"];
    if (cs.is_string()) {
      job.cut_shift = parse_cut_shift(cs.get<std::string>());
    } else if (cs.is_array()) {
      RatVec v;
      for (const auto& x : cs) v.push_back(rational_field(x, "cut_shift"));
      job.cut_shift = v;
    } else {
      parse_fail("cut_shift must be \"auto\" or a list of rationals");
    }
  }
  if (!j.contains("commands") || !j["commands"].is_array() || j["commands"].empty()) parse_fail("commands must be a nonempty list");
  for (const auto& cmd : j["commands"]) {
    if (!cmd.is_string() || !dependencies().contains(cmd.get<std::string>()))
      parse_fail("unknown command " + cmd.dump());
    job.commands.push_back(cmd.get<std::string>());
  }
  if (j.contains("flow")) {
    const auto& f = j["flow"];
    auto& p = job.flow.params;
    p.epsilon = f.value("epsilon", p.epsilon);
    p.c = f.value("c", p.c);
    p.rel_tolerance = f.value("tolerance", p.rel_tolerance);
    p.max_time = f.value("max_time", p.max_time);
    p.hausdorff_tolerance = f.value("hausdorff_tolerance", p.hausdorff_tolerance);
    job.flow.random_points = f.value("random_points", job.flow.random_points);
    job.flow.seed = f.value("seed", job.flow.seed);
    job.flow.grid = f.value("grid", job.flow.grid);
    if (f.contains("r_range")) {
      auto r = numbers(f["r_range"], "r_range");
      if (r.size() != 2) parse_fail("r_range needs two numbers");
      job.flow.r_lo = r[0];
      job.flow.r_hi = r[1];
    }
    for (const auto& pt : f.value("points", Json::array())) {
      auto v = numbers(pt, "flow point");
      if (v.size() != 2) parse_fail("flow points are (r, theta) pairs");
      job.flow.points.emplace_back(v[0], v[1]);
    }
    if (!(p.epsilon > 0 && p.epsilon < 0.5)) parse_fail("epsilon must lie in (0, 1/2)");
  }
  return job;
}

JobSpec parse_job_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    parse_fail(e.what());
  }
  try {
    return parse_job(j);
  } catch (const nlohmann::json::exception& e) {
    parse_fail(e.what());
  }
}

ReportBundle run(const JobSpec& job) {
  Context c(job);
  c.report["job"] = {{"name", job.name}, {"commands", job.commands}, {"degree_bound", job.degree},
                     {"beta", rats(job.beta)}, {"cut_shift", job.cut_shift ? rats(*job.cut_shift) : Json("auto")}};

  std::set<std::string> wanted;
  std::function<void(const std::string&)> pull = [&](const std::string& s) {
    if (!wanted.insert(s).second) return;
    for (const auto& d : dependencies().at(s)) pull(d);
  };
  for (const auto& s : job.commands) pull(s);

  ReportBundle out;
  std::set<std::string> failed;
  Json stages = Json::array();
  int exit_code = 0;
  for (const auto& s : stage_order()) {
    if (!wanted.contains(s)) continue;
    std::vector<std::string> blocked;
    for (const auto& d : dependencies().at(s))
      if (failed.contains(d)) blocked.push_back(d);
    if (!blocked.empty()) {
      failed.insert(s);
      stages.push_back({{"stage", s}, {"status", "blocked"}, {"by", blocked}});
      c.lines.push_back("BLOCKED " + s);
      continue;
    }
    try {
      if (s == "arrange") stage_arrange(c);
      else if (s == "cosheaf") stage_cosheaf(c);
      else if (s == "global") stage_global(c);
      else if (s == "reduce") stage_reduce(c);
      else if (s == "verify") stage_verify(c);
      else if (s == "skeleton") stage_skeleton(c);
      else if (s == "flow") stage_flow(c);
      stages.push_back({{"stage", s}, {"status", "ok"}});
    } catch (const Error& e) {
      failed.insert(s);
      stages.push_back({{"stage", s}, {"status", "error"}, {"error", to_string(e.kind())}, {"message", e.what()}});
      c.lines.push_back(std::string("ERROR ") + s + ": " + e.what());
      exit_code = std::max(exit_code, input_error(e.kind()) ? 2 : 1);
    }
  }
  bool all = true;
  for (const auto& v : c.verifications) all = all && v["passed"].get<bool>();
  if (!all) exit_code = std::max(exit_code, 1);
  if (exit_code == 2 || (exit_code == 0 && !all)) all = false;
  out.passed = all && exit_code == 0;
  out.exit_code = out.passed ? 0 : std::max(exit_code, 1);
  c.report["stages"] = stages;
  c.report["verifications"] = c.verifications;
  c.report["passed"] = out.passed;
  out.report = std::move(c.report);
  std::string summary;
  for (const auto& l : c.lines) summary += l + "\n";
  summary += out.passed ? "result: pass\n" : "result: fail\n";
  out.summary = summary;
  out.trajectories_csv = std::move(c.csv);
  return out;
}

}  // namespace hmx::job
