#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "hmx/beilinson.hpp"
#include "hmx/cosheaf_glue.hpp"
#include "hmx/job.hpp"
#include "hmx/skeleton.hpp"
#include "oracles.hpp"

using namespace hmx;
using beilinson::Flavor;
using lattice::IntMatrix;
using ncalg::Element;

namespace {

arrangement::PeriodicArrangement pants() { return arrangement::build_arrangement(lattice::make_sequence(IntMatrix(1, 0)), {{}}); }

arrangement::PeriodicArrangement two_points(Rational beta = Rational(1, 3)) {
  return arrangement::build_arrangement(lattice::make_sequence(IntMatrix::from_rows({{1}, {1}})), {{beta}});
}

arrangement::PeriodicArrangement square_torus() {
  return arrangement::build_arrangement(lattice::make_sequence(IntMatrix(2, 0)), {{}});
}

arrangement::PeriodicArrangement three_family_torus() {
  arrangement::PeriodicArrangement a;
  a.d = 2;
  a.families = {{{1, 0}, 0}, {{0, 1}, 0}, {{1, 1}, Rational(1, 2)}};
  return a;
}

struct Outcome {
  bool ok = true;
  std::string note;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) note = what;
    ok = ok && cond;
  }
};

int failed = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.ok = false;
    o.note = std::string("exception: ") + e.what();
  }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && s > budget_s) o.require(false, "over the time budget of " + std::to_string(budget_s) + " s");
  std::printf("%s %2d %-52s %8.3fs%s%s\n", o.ok ? "PASS" : "FAIL", id, title, s, o.note.empty() ? "" : "  ",
              o.note.c_str());
  std::fflush(stdout);
  failed += !o.ok;
}

Element loop_power(const ncalg::Presentation& B, ncalg::Vertex v, const std::string& name, long k) {
  if (k == 0) return B.idem(v);
  const std::string g = k > 0 ? name : name + "^-1";
  return B.pow(B.gen(g), static_cast<unsigned>(k >= 0 ? k : -k));
}

ncalg::Gen find_suffix(const ncalg::Presentation& A, const std::string& suffix) {
  for (ncalg::Gen k = 0; k < A.generators.size(); ++k)
    if (A.generators[k].name.ends_with(suffix)) return k;
  throw std::runtime_error("no generator ending in " + suffix);
}

}  // namespace

int main() {
  criterion(1, "center of B up to filtration 8", 10, [](Outcome& o) {
    auto B = beilinson::b_presentation();
    auto rw = ncalg::complete(B, 16);
    for (int D = 0; D <= 8; ++D) {
      std::vector<Element> expected;
      for (long k = -D / 2; k <= D / 2; ++k)
        expected.push_back(rw.reduce(loop_power(B, 0, "t", k) + loop_power(B, 1, "tau", k)));
      auto got = ncalg::center_up_to(rw, D);
      o.require(got.size() == expected.size(), "center size differs at D = " + std::to_string(D));
      o.require(oracle::same_span(got, expected), "center span differs at D = " + std::to_string(D));
    }
  });

  criterion(2, "reduction of B is B0", 0, [](Outcome& o) {
    auto R = beilinson::b_reduce();
    auto B0 = beilinson::b0_presentation();
    auto rr = ncalg::complete(R, 10);
    auto r0 = ncalg::complete(B0, 10);
    o.require(ncalg::iso_check(r0, rr, ncalg::map_by_name(B0, R), 8).passed(), "iso_check failed");
    o.require(rr.graded_dims(8) == std::vector<std::size_t>{2, 2, 0, 0, 0, 0, 0, 0, 0}, "dims are not (2,2,0,...)");
    for (const auto& e : {R.idem(0), R.idem(1), R.gen("x"), R.gen("y")})
      o.require(!rr.reduce(e).is_zero(), "a basis element vanished");
    o.require(rr.reduce(R.mul(R.gen("x"), R.gen("y"))).is_zero() && rr.reduce(R.mul(R.gen("y"), R.gen("x"))).is_zero(),
              "xy or yx survives");
  });

  criterion(3, "pants mirror: B0 glued over one-vertex circle", 30, [](Outcome& o) {
    auto P = arrangement::enumerate_faces(pants());
    auto g = glue::global_algebra(glue::build_cosheaf(P, Flavor::B0), glue::refine_cells_auto(P));
    const auto& A = g.collapsed();
    o.require(A.vertices.size() == 1, "collapse left more than one vertex");
    auto rw = ncalg::complete(A, 10);
    o.require(rw.graded_dims(8) == oracle::axes_dims(8), "graded dims differ from Z[x,y]/(xy)");
    Element x = A.gen(find_suffix(A, ".x")), y = A.gen(find_suffix(A, ".y"));
    o.require(rw.reduce(A.mul(x, y)).is_zero() && rw.reduce(A.mul(y, x)).is_zero(), "XY or YX nonzero");
    for (unsigned n = 1; n <= 8; ++n)
      o.require(!rw.reduce(A.pow(x, n)).is_zero() && !rw.reduce(A.pow(y, n)).is_zero(), "a pure power vanished");
  });

  criterion(4, "self-mirror: B glued over one-vertex circle", 60, [](Outcome& o) {
    auto P = arrangement::enumerate_faces(pants());
    auto g = glue::global_algebra(glue::build_cosheaf(P, Flavor::B), glue::refine_cells_auto(P));
    const auto& A = g.collapsed();
    auto rw = ncalg::complete(A, 10);
    Element x = A.gen(find_suffix(A, ".x")), y = A.gen(find_suffix(A, ".y"));
    Element tinv = A.gen(find_suffix(A, ".t^-1"));
    Element u = A.one() + A.mul(x, y);
    o.require(rw.reduce(A.mul(x, y) - A.mul(y, x)).is_zero(), "xy - yx does not reduce to 0");
    o.require(rw.reduce(A.mul(tinv, u)) == A.one() && rw.reduce(A.mul(u, tinv)) == A.one(), "1 + xy not invertible");
    std::size_t acc = 0;
    auto dims = rw.graded_dims(6);
    for (int n = 0; n <= 6; ++n) {
      acc += dims[n];
      o.require(acc == oracle::localized_filtration_dim(n), "filtration level " + std::to_string(n) + " differs");
    }
  });

  criterion(5, "reduction commutes with gluing (D = 4)", 0, [](Outcome& o) {
    for (const auto& a : {pants(), two_points(), square_torus()}) {
      auto P = arrangement::enumerate_faces(a);
      auto r = glue::verify_reduction_commutes(P, glue::refine_cells_auto(P), 4);
      o.require(r.passed(), r.failures.empty() ? "" : r.failures.front());
      o.require(r.dims_reduced_global == r.dims_b0 && r.dims_reduced_cosheaf == r.dims_b0, "dims disagree");
    }
  });

  criterion(6, "faces match sampled sign vectors; Euler relation", 0, [](Outcome& o) {
    std::mt19937_64 rng(17);
    for (const auto& a : {pants(), two_points(), two_points(Rational(2, 7)), square_torus(), three_family_torus()}) {
      auto P = arrangement::enumerate_faces(a);
      o.require(oracle::sampled_chamber_classes(a, 10000, 23) == P.chambers().size(), "chamber count differs");
      for (int k = 0; k < 200; ++k) {
        auto u = oracle::random_point(rng, a.d);
        auto f = P.locate(arrangement::signature_of(a, u));
        o.require(f && P.faces()[*f].is_chamber(), "a sample is not in an enumerated chamber");
      }
      long chi = 0;
      for (const auto& f : P.faces()) chi += f.dim % 2 == 0 ? 1 : -1;
      o.require(chi == 0, "alternating face count is not 0");
    }
  });

  criterion(7, "deck action is free with |Xi| orbits", 0, [](Outcome& o) {
    for (const auto& a : {pants(), two_points(), square_torus(), three_family_torus()}) {
      auto P = arrangement::enumerate_faces(a);
      std::vector<arrangement::Signature> classes;
      for (const auto& [sig, pt] : arrangement::lifted_faces_in_box(a, -1, 2)) {
        if (std::any_of(sig.begin(), sig.end(), arrangement::sig_active)) continue;
        bool seen = false;
        for (const auto& k : classes) seen = seen || oracle::same_orbit(a, k, sig, 4);
        if (!seen) classes.push_back(sig);
        for (std::size_t j = 0; j < a.d; ++j)
          for (long l : {-2L, -1L, 1L, 2L}) {
            IntVec lam(a.d);
            lam[j] = l;
            o.require(arrangement::deck_act(P, lam, sig) != sig, "a translation fixes a chamber");
          }
      }
      o.require(classes.size() == P.chambers().size(), "orbit count differs from |Xi|");
    }
  });

  criterion(8, "skeleton Euler characteristics", 0, [](Outcome& o) {
    auto p = arrangement::enumerate_faces(pants());
    auto q = arrangement::enumerate_faces(two_points());
    long cp = skeleton::euler_characteristic(skeleton::build_skeleton(p));
    long cq = skeleton::euler_characteristic(skeleton::build_skeleton(q));
    o.require(cp == -1, "pants chi = " + std::to_string(cp));
    o.require(cq == -2, "two-point chi = " + std::to_string(cq));
    o.require(cp == skeleton::euler_inclusion_exclusion(pants()) && cq == skeleton::euler_inclusion_exclusion(two_points()),
              "inclusion-exclusion disagrees");
  });

  criterion(9, "local product structure at every stratum", 0, [](Outcome& o) {
    for (const auto& a : {pants(), two_points(), square_torus(), three_family_torus()}) {
      auto s = skeleton::build_skeleton(arrangement::enumerate_faces(a));
      for (std::size_t i = 0; i < s.strata.size(); ++i) {
        auto rep = skeleton::local_model_check(s, i);
        o.require(rep.passed(), rep.failures.empty() ? "" : rep.failures.front());
      }
    }
    auto s = skeleton::build_skeleton(arrangement::enumerate_faces(square_torus()));
    auto v = s.poset.faces_of_dim(0).at(0);
    std::size_t over = 0;
    for (std::size_t i = 0; i < s.strata.size(); ++i)
      if (s.strata[i].face == v) over += skeleton::local_model_check(s, i).passed();
    o.require(over == 16, "strata over the d = 2 vertex: " + std::to_string(over));
  });

  criterion(10, "planar Liouville model and flow", 60, [](Outcome& o) {
    skeleton::FlowParams p;
    auto rep = skeleton::liouville_check_2d(p, 400);
    o.require(rep.positive && rep.min_F > 0, "min F is not positive");
    p.c = rep.c;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> rr(1.2, 1.9), th(0, 2 * std::numbers::pi);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 100; ++i) {
      double r = rr(rng);
      pts.emplace_back(r, th(rng));
    }
    for (const auto& f : skeleton::flow_to_skeleton(p, pts))
      o.require(f.limit != skeleton::Limit::NotConverged && f.distance <= 1e-3, "a flow line missed the skeleton");
    std::vector<std::pair<double, double>> axis{{1.3, 0}, {1.5, 0}, {1.8, std::numbers::pi}, {2.5, 0}, {0.5, std::numbers::pi}};
    for (const auto& f : skeleton::flow_to_skeleton(p, axis))
      o.require(f.max_axis_drift < 1e-9, "axis drift " + std::to_string(f.max_axis_drift));
  });

  criterion(11, "beta = 0 is rejected as non-generic", 0, [](Outcome& o) {
    auto a = two_points(Rational(0));
    bool threw = false;
    try {
      arrangement::enumerate_faces(a);
    } catch (const Error& e) {
      threw = e.kind() == ErrorKind::NonGenericArrangement;
    }
    o.require(threw, "enumerate_faces did not raise NonGenericArrangement");
    auto job = job::parse_job_text(R"({"seq": {"n": 2, "iota": [[1], [1]]}, "beta": ["0"], "commands": ["arrange"]})");
    auto out = job::run(job);
    o.require(out.exit_code == 2, "job exit code is not 2");
    o.require(out.report["stages"][0]["error"] == "NonGenericArrangement", "job did not report NonGenericArrangement");
    o.require(!out.report["arrange"]["genericity"]["flats"].empty(), "no flat report");
  });

  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
