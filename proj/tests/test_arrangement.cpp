#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "hmx/arrangement.hpp"

using namespace hmx;
using namespace hmx::arrangement;
using lattice::IntMatrix;

namespace {

PeriodicArrangement pants() {
  return build_arrangement(lattice::make_sequence(IntMatrix(1, 0)), {{}});
}

PeriodicArrangement two_points(Rational beta = Rational(1, 3)) {
  return build_arrangement(lattice::make_sequence(IntMatrix::from_rows({{1}, {1}})), {{beta}});
}

PeriodicArrangement square_torus() {
  return build_arrangement(lattice::make_sequence(IntMatrix(2, 0)), {{}});
}

PeriodicArrangement three_family_torus() {
  PeriodicArrangement a;
  a.d = 2;
  a.families = {{{1, 0}, 0}, {{0, 1}, 0}, {{1, 1}, Rational(1, 2)}};
  return a;
}

PeriodicArrangement empty_circle() {
  PeriodicArrangement a;
  a.d = 1;
  return a;
}

long euler_sum(const FacePoset& p) {
  long chi = 0;
  for (const auto& f : p.faces()) chi += (f.dim % 2 == 0) ? 1 : -1;
  return chi;
}

}  // namespace

TEST_CASE("building arrangements") {
  auto a = pants();
  REQUIRE(a.d == 1);
  REQUIRE(a.families.size() == 1);
  CHECK(a.families[0].alpha == IntVec{1});
  CHECK(a.families[0].offset == 0);

  auto b = two_points();
  REQUIRE(b.families.size() == 2);
  CHECK(b.families[0].alpha == IntVec{1});
  CHECK(b.families[0].offset == Rational(1, 3));
  CHECK(b.families[1].alpha == IntVec{-1});
  CHECK(b.families[1].offset == 0);
}

TEST_CASE("genericity") {
  CHECK(genericity_check(pants()).passed());
  CHECK(genericity_check(two_points()).passed());
  auto bad = genericity_check(two_points(0));
  CHECK_FALSE(bad.passed());
  REQUIRE(bad.flats.size() == 1);
  CHECK(bad.flats[0].families == std::vector<std::size_t>{0, 1});
  CHECK(genericity_check(three_family_torus()).passed());

  auto triple = three_family_torus();
  triple.families[2].offset = 0;
  CHECK_FALSE(genericity_check(triple).passed());

  PeriodicArrangement thick;
  thick.d = 1;
  thick.families = {{{2}, 0}};
  CHECK_FALSE(genericity_check(thick).passed());
  CHECK(genericity_check(thick, false).passed());

  CHECK_THROWS_AS(enumerate_faces(two_points(0)), Error);
}

TEST_CASE("face enumeration") {
  auto p = enumerate_faces(pants());
  CHECK(p.faces_of_dim(0).size() == 1);
  CHECK(p.chambers().size() == 1);

  auto q = enumerate_faces(two_points());
  CHECK(q.faces_of_dim(0).size() == 2);
  CHECK(q.chambers().size() == 2);

  auto r = enumerate_faces(square_torus());
  CHECK(r.faces_of_dim(0).size() == 1);
  CHECK(r.faces_of_dim(1).size() == 2);
  CHECK(r.chambers().size() == 1);

  auto t = enumerate_faces(three_family_torus());
  CHECK(t.faces_of_dim(0).size() == 3);
  CHECK(t.faces_of_dim(1).size() == 6);
  CHECK(t.chambers().size() == 3);

  auto e = enumerate_faces(empty_circle());
  CHECK(e.faces().size() == 1);
  CHECK(e.chambers().size() == 1);

  for (const auto* poset : {&p, &q, &r, &t, &e}) {
    // Faces are cells only when the conormals span; the empty circle is a single open circle.
    if (poset != &e) CHECK(euler_sum(*poset) == 0);
    for (const auto& f : poset->faces()) {
      for (const auto& c : f.rep_point) {
        CHECK(c >= 0);
        CHECK(c < 1);
      }
      CHECK(signature_of(poset->arrangement(), f.rep_point) == f.lift);
    }
    for (const auto& c : poset->covers()) {
      const auto& up = poset->faces()[c.upper];
      const auto& low = poset->faces()[c.lower];
      CHECK(up.codim() + 1 == low.codim());
    }
  }
}

TEST_CASE("chambers agree with sampled sign vectors") {
  for (const auto& a : {pants(), two_points(), square_torus(), three_family_torus(), two_points(Rational(2, 7))}) {
    auto p = enumerate_faces(a);
    CHECK(oracle::sampled_chamber_classes(a, 10000, 11) == p.chambers().size());
  }
}

TEST_CASE("deck action") {
  auto p = enumerate_faces(pants());
  auto v = p.faces_of_dim(0).at(0);
  CHECK(deck_act(p, {0}, p.faces()[v].lift) == p.faces()[v].lift);
  CHECK(deck_act(p, {1}, p.faces()[v].lift) == Signature{2});

  for (const auto& a : {pants(), two_points(), square_torus(), three_family_torus()}) {
    auto poset = enumerate_faces(a);
    auto lifted = lifted_faces_in_box(a, -1, 2);
    std::vector<Signature> chambers;
    for (const auto& [sig, pt] : lifted)
      if (std::none_of(sig.begin(), sig.end(), sig_active)) chambers.push_back(sig);
    std::vector<Signature> classes;
    for (const auto& c : chambers) {
      bool seen = false;
      for (const auto& k : classes) seen = seen || oracle::same_orbit(a, k, c, 4);
      if (!seen) classes.push_back(c);
      CHECK(poset.locate(c).has_value());
      for (long l = -3; l <= 3; ++l)
        for (std::size_t j = 0; j < a.d; ++j) {
          if (l == 0) continue;
          IntVec lam(a.d);
          lam[j] = l;
          CHECK(deck_act(poset, lam, c) != c);
        }
    }
    CHECK(classes.size() == poset.chambers().size());
  }
}

TEST_CASE("local data") {
  auto p = enumerate_faces(pants());
  auto ch = face_local_data(p, p.chambers().at(0));
  CHECK(ch.codim == 0);
  CHECK(ch.splitting == IntMatrix::identity(1));
  auto v = face_local_data(p, p.faces_of_dim(0).at(0));
  CHECK(v.codim == 1);
  CHECK(v.splitting == IntMatrix::identity(1));

  PeriodicArrangement a;
  a.d = 2;
  a.families = {{{1, 0}, 0}, {{1, 1}, Rational(1, 2)}};
  auto q = enumerate_faces(a);
  auto vert = face_local_data(q, q.faces_of_dim(0).at(0));
  CHECK(vert.splitting == IntMatrix::from_rows({{1, 0}, {1, 1}}));
  CHECK(lattice::determinant(vert.splitting) == 1);
  for (std::size_t f = 0; f < q.faces().size(); ++f) {
    auto ld = face_local_data(q, f);
    CHECK(abs(lattice::determinant(ld.splitting)) == 1);
    for (std::size_t r = 0; r < ld.codim; ++r) CHECK(ld.splitting.row(r) == a.families[ld.walls[r]].alpha);
  }
}

TEST_CASE("chamber polytopes") {
  auto p = enumerate_faces(pants());
  auto seg = chamber_polytope(p, p.chambers().at(0));
  CHECK(seg.bounded);
  CHECK(seg.facets.size() == 2);
  REQUIRE(seg.vertices.size() == 2);
  CHECK(seg.vertices[0] == RatVec{0});
  CHECK(seg.vertices[1] == RatVec{1});

  auto q = enumerate_faces(two_points());
  std::set<RatVec> ends;
  for (auto c : q.chambers()) {
    auto poly = chamber_polytope(q, c);
    CHECK(poly.vertices.size() == 2);
    for (const auto& v : poly.vertices) ends.insert({frac(v[0])});
  }
  CHECK(ends.size() == 2);

  auto e = enumerate_faces(empty_circle());
  auto line = chamber_polytope(e, 0);
  CHECK_FALSE(line.bounded);
  CHECK(line.facets.empty());

  auto t = enumerate_faces(three_family_torus());
  for (auto c : t.chambers()) {
    auto poly = chamber_polytope(t, c);
    CHECK(poly.bounded);
    CHECK(poly.vertices.size() == poly.facets.size());
  }
}
