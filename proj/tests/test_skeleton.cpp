#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hmx/skeleton.hpp"

using namespace hmx;
using namespace hmx::skeleton;
using lattice::IntMatrix;

namespace {

arrangement::FacePoset pants() {
  return arrangement::enumerate_faces(arrangement::build_arrangement(lattice::make_sequence(IntMatrix(1, 0)), {{}}));
}

arrangement::FacePoset two_points() {
  return arrangement::enumerate_faces(
      arrangement::build_arrangement(lattice::make_sequence(IntMatrix::from_rows({{1}, {1}})), {{Rational(1, 3)}}));
}

arrangement::FacePoset square_torus() {
  return arrangement::enumerate_faces(arrangement::build_arrangement(lattice::make_sequence(IntMatrix(2, 0)), {{}}));
}

arrangement::FacePoset three_family_torus() {
  arrangement::PeriodicArrangement a;
  a.d = 2;
  a.families = {{{1, 0}, 0}, {{0, 1}, 0}, {{1, 1}, Rational(1, 2)}};
  return arrangement::enumerate_faces(a);
}

arrangement::FacePoset empty_circle() {
  arrangement::PeriodicArrangement a;
  a.d = 1;
  return arrangement::enumerate_faces(a);
}

// Over a chamber piece the fiber is a point; over a wall piece it is a product of circles, whose
// strata cancel. So chi counts only the cells of the refinement that avoid every wall.
long chamber_cell_count(const arrangement::FacePoset& P) {
  auto cc = glue::refine_cells_auto(P);
  long chi = 0;
  for (std::size_t i = 0; i < cc.cells.faces().size(); ++i)
    if (P.faces()[cc.tag[i]].is_chamber()) chi += cc.cells.faces()[i].dim % 2 == 0 ? 1 : -1;
  return chi;
}

}  // namespace

TEST_CASE("strata counts") {
  auto s = build_skeleton(pants());
  CHECK(s.strata.size() == 5);
  std::size_t points = 0, arcs = 0;
  for (const auto& st : s.strata)
    if (!st.labels.empty()) (is_arc(st.labels[0]) ? arcs : points) += 1;
  CHECK(points == 2);
  CHECK(arcs == 2);

  auto e = build_skeleton(empty_circle());
  CHECK(e.strata.size() == 1);

  auto T = square_torus();
  auto t = build_skeleton(T);
  for (std::size_t f = 0; f < T.faces().size(); ++f) {
    std::size_t n = 0;
    for (const auto& st : t.strata) n += st.face == f;
    CHECK(n == static_cast<std::size_t>(std::pow(4, T.faces()[f].codim())));
  }
  CHECK(t.strata.size() == 16 + 4 + 4 + 1);
  for (const auto& inc : t.incidences) CHECK(t.strata[inc.upper].dim == t.strata[inc.lower].dim + 1);

  arrangement::PeriodicArrangement bad;
  bad.d = 1;
  bad.families = {{{1}, 0}, {{-1}, 0}};
  CHECK_THROWS_AS(build_skeleton(arrangement::FacePoset(bad, {}, {})), Error);
}

TEST_CASE("projection is a poset map") {
  for (auto P : {pants(), two_points(), square_torus(), three_family_torus()}) {
    auto s = build_skeleton(P);
    for (const auto& inc : s.incidences) {
      auto fu = s.projection(inc.upper), fl = s.projection(inc.lower);
      if (inc.base_cover) {
        CHECK(P.covers()[*inc.base_cover].upper == fu);
        CHECK(P.covers()[*inc.base_cover].lower == fl);
      } else {
        CHECK(fu == fl);
      }
    }
  }
}

TEST_CASE("skeleton Euler characteristics") {
  CHECK(euler_characteristic(build_skeleton(pants())) == -1);
  CHECK(euler_characteristic(build_skeleton(empty_circle())) == 0);
  CHECK(euler_characteristic(build_skeleton(two_points())) == -2);
  for (auto P : {pants(), two_points(), empty_circle(), square_torus(), three_family_torus()}) {
    long chi = euler_characteristic(build_skeleton(P));
    CHECK(chi == euler_inclusion_exclusion(P.arrangement()));
    CHECK(chi == chamber_cell_count(P));
  }
  CHECK(euler_inclusion_exclusion(square_torus().arrangement()) == 1);
  CHECK(euler_inclusion_exclusion(three_family_torus().arrangement()) == 3);
}

TEST_CASE("fibers over walls have vanishing Euler characteristic") {
  auto s = build_skeleton(square_torus());
  std::map<std::size_t, long> chi;
  for (const auto& st : s.strata) {
    long arcs = 0;
    for (auto l : st.labels) arcs += is_arc(l);
    chi[st.face] += arcs % 2 == 0 ? 1 : -1;
  }
  for (const auto& [f, v] : chi) CHECK(v == (s.poset.faces()[f].is_chamber() ? 1 : 0));
}

TEST_CASE("local product structure") {
  for (auto P : {pants(), two_points(), square_torus(), three_family_torus()}) {
    auto s = build_skeleton(P);
    for (std::size_t i = 0; i < s.strata.size(); ++i) {
      auto rep = local_model_check(s, i);
      for (const auto& f : rep.failures) MESSAGE(f);
      CHECK(rep.passed());
    }
  }
  // The plus point over the pants vertex sees one ray and both arcs.
  auto s = build_skeleton(pants());
  auto v = s.poset.faces_of_dim(0)[0];
  std::size_t plus = s.find(v, {FiberLabel::PlusPoint});
  std::size_t above = 0;
  for (const auto& inc : s.incidences) above += inc.lower == plus;
  CHECK(above == 3);
}

TEST_CASE("microsheaf dictionary") {
  for (auto P : {pants(), empty_circle(), square_torus()}) {
    auto s = build_skeleton(P);
    auto m = attach_microsheaf_cosheaf(s);
    CHECK(m.dictionary.size() == s.strata.size());
    CHECK(check_dictionary(m).passed());
  }
  auto m = attach_microsheaf_cosheaf(build_skeleton(pants()));
  for (const auto& e : m.dictionary)
    if (!e.factor_data.empty() && e.factor_data[0] == "x") CHECK(e.stalk_generators == std::vector<std::string>{"w0.x"});
}

TEST_CASE("Liouville form") {
  FlowParams p;
  p.c = 0.05;
  for (double th : {0.0, 0.7, 2.0}) {
    CHECK(liouville_F(p, 0.7, th) == doctest::Approx(p.c / 0.7));
    CHECK(liouville_F(p, 2.5, th) == doctest::Approx(2.5));
  }
  CHECK(eta(p, 1.05) == 0);
  CHECK(eta(p, 1.95) == 1);
  for (double r = 1.11; r < 1.9; r += 0.05) {
    CHECK(eta(p, r) > 0);
    CHECK(eta(p, r) < 1);
    CHECK(eta_prime(p, r) > 0);
  }
  // d(lambda) = -F dr ^ dtheta, checked by central differences.
  const double h = 1e-5;
  auto lam_theta = [&](double r, double th) {
    return -r * r * std::sin(th) * std::sin(th) * eta(p, r) - p.c * std::log(r) * (1 - eta(p, r));
  };
  auto lam_r = [&](double r, double th) { return r * std::sin(th) * std::cos(th) * eta(p, r); };
  for (double r : {0.6, 1.3, 1.5, 1.7, 2.4})
    for (double th : {0.3, 1.2, 2.9}) {
      double curl = (lam_theta(r + h, th) - lam_theta(r - h, th)) / (2 * h) - (lam_r(r, th + h) - lam_r(r, th - h)) / (2 * h);
      CHECK(-curl == doctest::Approx(liouville_F(p, r, th)).epsilon(1e-5));
    }

  FlowParams big;
  big.c = 1e6;
  CHECK(liouville_check_2d(big, 200).min_F < 0);
  auto rep = liouville_check_2d(FlowParams{}, 400);
  CHECK(rep.positive);
  CHECK(rep.c < rep.c_threshold);
  CHECK(rep.min_F_inner > 0);
  CHECK(rep.min_F_outer > 0);
}

TEST_CASE("flow to the skeleton") {
  FlowParams p;
  auto res = flow_to_skeleton(p, {{0.5, 1.0}, {3.0, 0.0}, {3.0, std::numbers::pi}, {1.5, 0.0}});
  CHECK(res[0].limit == Limit::Circle);
  CHECK(res[0].theta == doctest::Approx(1.0));
  CHECK(res[1].limit == Limit::RayPlus);
  CHECK(res[1].r == doctest::Approx(3.0));
  CHECK(res[2].limit == Limit::RayMinus);
  for (std::size_t i = 1; i < res.size(); ++i) CHECK(res[i].max_axis_drift < 1e-9);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rr(1.2, 1.9), th(0, 2 * std::numbers::pi);
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 100; ++i) pts.emplace_back(rr(rng), th(rng));
  int converged = 0;
  for (const auto& f : flow_to_skeleton(p, pts)) {
    converged += f.limit != Limit::NotConverged && f.distance < 1e-3;
    CHECK(f.monotone);
  }
  CHECK(converged == 100);
}
