#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "hmx/beilinson.hpp"
#include "hmx/core_lattice.hpp"

using namespace hmx;
using namespace hmx::beilinson;
using ncalg::Mono;

namespace {

arrangement::FacePoset circle() {
  return arrangement::enumerate_faces(
      arrangement::build_arrangement(lattice::make_sequence(lattice::IntMatrix(1, 0)), {{}}));
}

arrangement::FacePoset square() {
  return arrangement::enumerate_faces(
      arrangement::build_arrangement(lattice::make_sequence(lattice::IntMatrix(2, 0)), {{}}));
}

}  // namespace

TEST_CASE("closed-form products") {
  auto x = BElement::basis(Corner::X, 0), y = BElement::basis(Corner::Y, 0);
  auto yx = b_multiply(y, x);
  auto expect = BElement::basis(Corner::One, 1);
  expect.add(Corner::One, 0, -1);
  CHECK(yx == expect);
  CHECK(b_multiply(BElement::basis(Corner::One, 1), BElement::basis(Corner::One, -1)) == BElement::basis(Corner::One, 0));
  auto xy = b_multiply(x, y);
  auto expect2 = BElement::basis(Corner::Two, 1);
  expect2.add(Corner::Two, 0, -1);
  CHECK(xy == expect2);
  CHECK_THROWS_AS(b_multiply(x, x), Error);
}

TEST_CASE("closed form agrees with rewriting") {
  auto B = b_presentation();
  auto rw = ncalg::complete(B, 12);
  REQUIRE(rw.finite());
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    Element e;
    for (int k = 0; k < 3; ++k) {
      ncalg::Vertex v = rng() % 2;
      ncalg::Word w;
      ncalg::Vertex at = v;
      int len = rng() % 7;
      for (int i = 0; i < len; ++i) {
        std::vector<ncalg::Gen> opts;
        for (ncalg::Gen g = 0; g < B.generators.size(); ++g)
          if (B.generators[g].src == at) opts.push_back(g);
        ncalg::Gen g = opts[rng() % opts.size()];
        w.insert(w.begin(), g);
        at = B.generators[g].tgt;
      }
      e.add(w.empty() ? B.idem_mono(v) : B.mono(w), Int(static_cast<long>(rng() % 5) - 2));
    }
    Element nf = rw.reduce(e);
    BElement closed = from_presentation(e, B);
    CHECK(from_presentation(nf, B) == closed);
    CHECK(rw.reduce(to_presentation(closed, B)) == nf);
  }
}

TEST_CASE("center of B") {
  auto B = b_presentation();
  auto rw = ncalg::complete(B, 16);
  for (int D = 0; D <= 8; ++D) {
    std::vector<Element> expected;
    for (const auto& z : b_center_basis(D)) expected.push_back(rw.reduce(to_presentation(z, B)));
    auto got = ncalg::center_up_to(rw, D);
    CHECK(got.size() == expected.size());
    CHECK(oracle::same_span(got, expected));
  }
  CHECK(ncalg::center_up_to(rw, 8).size() == 9);
  auto zs = b_center_basis(2);
  CHECK(zs[1] == [] { auto u = BElement::basis(Corner::One, 0); u.add(Corner::Two, 0, 1); return u; }());
  CHECK(ncalg::is_central(rw, to_presentation(zs[2], B)));
  CHECK_FALSE(ncalg::is_central(rw, B.idem(0)));
}

TEST_CASE("reduction of B") {
  auto R = b_reduce();
  auto rr = ncalg::complete(R, 10);
  auto z = b0_presentation();
  auto rz = ncalg::complete(z, 10);
  CHECK(rr.graded_dims(4) == std::vector<std::size_t>{2, 2, 0, 0, 0});
  CHECK(ncalg::iso_check(rz, rr, ncalg::map_by_name(z, R), 8).passed());
  CHECK_FALSE(rr.reduce(R.gen("x")).is_zero());
  CHECK(rr.reduce(R.gen("t") - R.idem(0)).is_zero());
}

TEST_CASE("stalks and central embedding") {
  auto c = circle();
  auto ch = stalk_algebra(arrangement::face_local_data(c, c.chambers()[0]), Flavor::B);
  auto rch = ncalg::complete(ch.pres(), 10);
  CHECK(rch.graded_dims(4) == std::vector<std::size_t>{1, 0, 2, 0, 2});
  auto vx = stalk_algebra(arrangement::face_local_data(c, c.faces_of_dim(0)[0]), Flavor::B);
  auto rvx = ncalg::complete(vx.pres(), 12);
  CHECK(rvx.graded_dims(6) == ncalg::complete(b_presentation(), 12).graded_dims(6));

  CHECK(central_embed(vx, {0}) == vx.pres().one());
  auto tt = central_embed(vx, {1});
  CHECK(tt == vx.pres().gen("w0.t") + vx.pres().gen("w0.tau"));
  CHECK(ncalg::is_central(rvx, tt));

  auto sq = square();
  auto vertex = stalk_algebra(arrangement::face_local_data(sq, sq.faces_of_dim(0)[0]), Flavor::B);
  CHECK(vertex.pres().vertices.size() == 4);
  auto edge_face = sq.faces_of_dim(1)[0];
  auto edge = stalk_algebra(arrangement::face_local_data(sq, edge_face), Flavor::B);
  auto row2 = edge.local.splitting.row(1);
  CHECK(central_embed(edge, row2) == edge.tensor.embed(edge.factor_ptrs(), 1, edge.factors[1].gen("s")));

  auto redge = ncalg::complete(edge.pres(), 10);
  for (long a = -1; a <= 1; ++a)
    for (long b = -1; b <= 1; ++b) {
      IntVec l1{a, b}, l2{b, 1};
      IntVec sum{a + b, b + 1};
      CHECK(redge.reduce(edge.pres().mul(central_embed(edge, l1), central_embed(edge, l2))) ==
            redge.reduce(central_embed(edge, sum)));
      CHECK(ncalg::is_central(redge, central_embed(edge, l1)));
    }
}

TEST_CASE("corestrictions") {
  auto c = circle();
  auto chamber = arrangement::face_local_data(c, c.chambers()[0]);
  auto vertex = arrangement::face_local_data(c, c.faces_of_dim(0)[0]);
  auto F = stalk_algebra(chamber, Flavor::B), G = stalk_algebra(vertex, Flavor::B);
  auto right = corestriction(F, G, +1);
  CHECK(right.gen_image[F.pres().at("f0.s")] == G.pres().gen("w0.tau"));
  auto left = corestriction(F, G, -1);
  CHECK(left.gen_image[F.pres().at("f0.s")] == G.pres().gen("w0.t"));
  auto rG = ncalg::complete(G.pres(), 10);
  CHECK(ncalg::check_homomorphism(right, F.pres(), rG).passed());
  CHECK_THROWS_AS(corestriction(F, G, 0), Error);
  CHECK_THROWS_AS(corestriction(G, F, 1), Error);

  auto F0 = stalk_algebra(chamber, Flavor::B0), G0 = stalk_algebra(vertex, Flavor::B0);
  auto node = corestriction(F0, G0, -1);
  CHECK(ncalg::apply(node, F0.pres(), G0.pres(), F0.pres().one()) == G0.pres().idem(0));

  auto sq = square();
  auto v = arrangement::face_local_data(sq, sq.faces_of_dim(0)[0]);
  auto rv = ncalg::complete(stalk_algebra(v, Flavor::B).pres(), 10);
  for (auto e : sq.faces_of_dim(1)) {
    auto ld = arrangement::face_local_data(sq, e);
    auto S = stalk_algebra(ld, Flavor::B), T = stalk_algebra(v, Flavor::B);
    for (int side : {-1, 1}) {
      auto m = corestriction(S, T, side);
      CHECK(ncalg::check_homomorphism(m, S.pres(), rv).passed());
      std::size_t kept = ld.walls[0];
      for (ncalg::Gen g : S.tensor.gen_index[0][S.factors[0].at("x")]) {
        auto tuple = T.tensor.tuple_of(m.vertex_image[S.pres().generators[g].src]);
        CHECK(m.gen_image[g] == T.pres().gen(T.tensor.lifted(T.wall_factor(kept), S.factors[0].at("x"), tuple)));
      }
      auto prefix = "w" + std::to_string(1 - kept) + (side < 0 ? ".t" : ".tau");
      for (ncalg::Gen g : S.tensor.gen_index[1][S.factors[1].at("s")]) {
        bool mentions = false;
        for (const auto& [mono, coef] : m.gen_image[g].terms())
          for (auto l : mono.word) mentions = mentions || T.pres().generators[l].name.rfind(prefix, 0) == 0;
        CHECK(mentions);
      }
      Element unit_image = ncalg::apply(m, S.pres(), T.pres(), S.pres().one());
      for (long a = -1; a <= 1; ++a)
        for (long b = -1; b <= 1; ++b) {
          IntVec l{a, b};
          CHECK(rv.reduce(ncalg::apply(m, S.pres(), T.pres(), central_embed(S, l))) ==
                rv.reduce(T.pres().mul(unit_image, central_embed(T, l))));
        }
    }
  }
}
