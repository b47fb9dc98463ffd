#include <doctest.h>

#include <random>

#include "hmx/ncalg.hpp"

using namespace hmx;
using namespace hmx::ncalg;

namespace {

Presentation b0() {
  Presentation p;
  auto v1 = p.add_vertex("1"), v2 = p.add_vertex("2");
  p.add_generator("x", v1, v2);
  p.add_generator("y", v2, v1);
  p.add_relation(p.path({"x", "y"}));
  p.add_relation(p.path({"y", "x"}));
  return p;
}

Presentation beil() {
  Presentation p;
  auto v1 = p.add_vertex("1"), v2 = p.add_vertex("2");
  p.add_invertible("t", "t^-1", v1, v1, 2);
  p.add_invertible("tau", "tau^-1", v2, v2, 2);
  p.add_generator("x", v1, v2);
  p.add_generator("y", v2, v1);
  p.add_relation(p.gen("t") - p.idem(v1) - p.path({"y", "x"}));
  p.add_relation(p.gen("tau") - p.idem(v2) - p.path({"x", "y"}));
  return p;
}

std::vector<std::size_t> convolve(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> c(std::min(a.size(), b.size()), 0);
  for (std::size_t n = 0; n < c.size(); ++n)
    for (std::size_t i = 0; i <= n; ++i) c[n] += a[i] * b[n - i];
  return c;
}

// Applies rules at randomly chosen positions until no rule applies.
Element random_reduce(const RewriteSystem& rw, Element e, std::mt19937_64& rng) {
  const auto& p = rw.base();
  for (int guard = 0; guard < 100000; ++guard) {
    std::vector<std::tuple<Mono, std::size_t, std::size_t>> spots;
    for (const auto& [m, c] : e.terms())
      for (std::size_t r = 0; r < rw.rules().size(); ++r) {
        const auto& l = rw.rules()[r].lhs.word;
        for (std::size_t pos = m.word.find(l); pos != Word::npos; pos = m.word.find(l, pos + 1))
          spots.emplace_back(m, r, pos);
      }
    if (spots.empty()) return e;
    auto [m, r, pos] = spots[std::uniform_int_distribution<std::size_t>(0, spots.size() - 1)(rng)];
    Int c = e.coeff(m);
    e.add(m, -c);
    const auto& rule = rw.rules()[r];
    Word left = m.word.substr(0, pos), right = m.word.substr(pos + rule.lhs.word.size());
    for (const auto& [t, tc] : rule.rhs.terms()) e.add(concat(p, left, t, right), c * tc);
  }
  FAIL("random reduction did not terminate");
  return e;
}

Element random_element(const Presentation& p, int max_len, std::mt19937_64& rng) {
  Element e;
  std::uniform_int_distribution<int> coef(-3, 3);
  for (int k = 0; k < 3; ++k) {
    Vertex v = std::uniform_int_distribution<Vertex>(0, p.vertices.size() - 1)(rng);
    Word w;
    Vertex at = v;
    int len = std::uniform_int_distribution<int>(0, max_len)(rng);
    for (int i = 0; i < len; ++i) {
      std::vector<Gen> options;
      for (Gen g = 0; g < p.generators.size(); ++g)
        if (p.generators[g].src == at) options.push_back(g);
      if (options.empty()) break;
      Gen g = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
      w.insert(w.begin(), g);
      at = p.generators[g].tgt;
    }
    e.add(w.empty() ? p.idem_mono(v) : p.mono(w), coef(rng));
  }
  return e;
}

}  // namespace

TEST_CASE("completion of small presentations") {
  auto loop = complete(free_loops({"x"}), 6);
  CHECK(loop.rules().empty());
  CHECK(loop.graded_dims(5) == std::vector<std::size_t>{1, 1, 1, 1, 1, 1});

  auto z = complete(b0(), 6);
  REQUIRE(z.rules().size() == 2);
  CHECK(z.basis(6).total() == 4);
  CHECK(z.graded_dims(3) == std::vector<std::size_t>{2, 2, 0, 0});

  auto comm = free_loops({"x", "y"});
  comm.add_relation(comm.path({"x", "y"}) - comm.path({"y", "x"}));
  auto cr = complete(comm, 10);
  auto dims = cr.graded_dims(10);
  for (std::size_t n = 0; n <= 10; ++n) CHECK(dims[n] == n + 1);
}

TEST_CASE("normal forms") {
  auto p = b0();
  auto z = complete(p, 6);
  CHECK(z.normal_form(p.path({"x", "y"})).is_zero());
  CHECK(z.normal_form(p.mul(p.gen("x"), p.idem(0))) == p.gen("x"));
  CHECK(z.normal_form(p.mul(p.idem(1), p.gen("x"))) == p.gen("x"));
  CHECK(p.mul(p.idem(0), p.gen("x")).is_zero());

  auto b = beil();
  auto rb = complete(b, 12);
  CHECK(rb.finite());
  CHECK(rb.normal_form(b.path({"y", "x"})) == b.gen("t") - b.idem(0));
  CHECK(rb.normal_form(b.path({"t", "t^-1"})) == b.idem(0));
  CHECK(rb.normal_form(b.path({"x", "y"})) == rb.normal_form(b.gen("tau") - b.idem(1)));
}

TEST_CASE("confluence by random reduction order") {
  auto b = beil();
  auto rb = complete(b, 12);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    Element e = random_element(b, 6, rng);
    Element nf = rb.reduce(e);
    CHECK(random_reduce(rb, e, rng) == nf);
    CHECK(rb.reduce(nf) == nf);
    Element f = random_element(b, 4, rng);
    CHECK(rb.reduce(b.mul(e, f)) == rb.reduce(b.mul(nf, rb.reduce(f))));
  }
}

TEST_CASE("completion errors") {
  Presentation p = free_loops({"x"});
  p.add_relation(Int(2) * p.gen("x"));
  CHECK_THROWS_AS(complete(p, 4), Error);
  try {
    complete(p, 4);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonMonicRelation);
  }
  Presentation braid = free_loops({"a", "b"});
  braid.add_relation(braid.path({"b", "a", "b"}) - braid.path({"a", "b", "a"}));
  CompletionOptions tight;
  tight.max_rules = 3;
  try {
    complete(braid, 30, tight);
    FAIL("expected blowup");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CompletionBlowup);
  }
  auto bounded = complete(braid, 6);
  CHECK_FALSE(bounded.finite());
  CHECK_THROWS_AS(bounded.normal_form(bounded.base().pow(bounded.base().gen("a"), 8)), Error);
}

TEST_CASE("tensor products") {
  auto z = b0();
  auto unit = unit_algebra();
  auto zu = complete(tensor(z, unit), 6);
  auto zz = complete(z, 6);
  CHECK(zu.graded_dims(6) == zz.graded_dims(6));

  auto t = tensor({&z, &z}, {"a", "b"});
  CHECK(t.pres.vertices.size() == 4);
  CHECK(t.pres.generators.size() == 8);
  auto rt = complete(t.pres, 8);
  CHECK(rt.graded_dims(6) == convolve(zz.graded_dims(6), zz.graded_dims(6)));

  auto l = laurent();
  auto rl = complete(l, 8);
  CHECK(rl.graded_dims(5) == std::vector<std::size_t>{1, 2, 2, 2, 2, 2});
  auto ll = complete(tensor(l, l), 10);
  CHECK(ll.graded_dims(8) == convolve(rl.graded_dims(8), rl.graded_dims(8)));

  auto b = beil();
  auto rb = complete(b, 12);
  auto bl = tensor({&b, &l}, {"w", "f"});
  auto rbl = complete(bl.pres, 10);
  CHECK(rbl.graded_dims(8) == convolve(rb.graded_dims(8), rl.graded_dims(8)));

  // Pure tensors multiply factorwise.
  Element a = t.pure({&z, &z}, {z.gen("x"), z.idem(0)});
  Element c = t.pure({&z, &z}, {z.idem(1), z.gen("x")});
  Element both = t.pure({&z, &z}, {z.gen("x"), z.gen("x")});
  CHECK(rt.reduce(t.pres.mul(c, a)) == rt.reduce(both));
  Element a2 = t.pure({&z, &z}, {z.gen("x"), z.idem(1)});
  CHECK(rt.reduce(t.pres.mul(a2, t.pure({&z, &z}, {z.idem(0), z.gen("x")}))) == rt.reduce(both));
}

TEST_CASE("central quotients") {
  auto b = beil();
  auto rb = complete(b, 12);
  auto q = quotient_central(b, {b.gen("t") + b.gen("tau") - b.one()}, rb);
  auto rq = complete(q, 10);
  auto rz = complete(b0(), 10);
  CHECK(rq.basis(10).total() == 4);
  CHECK(iso_check(rz, rq, map_by_name(b0(), q), 8).passed());

  auto same = quotient_central(b, {}, rb);
  CHECK(same.relations.size() == b.relations.size());

  auto l = laurent();
  auto ql = quotient_central(l, {l.gen("s") - l.one()}, complete(l, 6));
  CHECK(complete(ql, 6).graded_dims(4) == std::vector<std::size_t>{1, 0, 0, 0, 0});

  try {
    quotient_central(b, {b.idem(0)}, rb);
    FAIL("idempotent accepted as central");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotCentral);
  }
}

TEST_CASE("centers") {
  auto z = b0();
  auto cz = center_up_to(complete(z, 8), 4);
  REQUIRE(cz.size() == 1);
  CHECK(cz[0] == z.one());

  auto free2 = free_loops({"x", "y"});
  auto cf = center_up_to(complete(free2, 8), 4);
  REQUIRE(cf.size() == 1);
  CHECK(cf[0] == free2.one());
}

TEST_CASE("amalgamation and collapse") {
  auto z = b0();
  auto unit = unit_algebra();
  AlgebraMap left{{0}, {}}, right{{1}, {}};
  auto am = amalgamate({unit, unit, z}, {"L", "R", "B"}, {{0, 2, left}, {1, 2, right}});
  CHECK(am.pres.vertices.size() == 2);
  auto ra = complete(am.pres, 6);
  CHECK(ra.graded_dims(4) == complete(z, 6).graded_dims(4));

  auto single = amalgamate({z}, {"B"}, {});
  CHECK(complete(single.pres, 6).graded_dims(4) == complete(z, 6).graded_dims(4));

  AlgebraMap bad{{0}, {}};
  bad.vertex_image = {7};
  CHECK_THROWS_AS(amalgamate({unit, z}, {"U", "B"}, {{0, 1, bad}}), Error);

  Presentation q;
  q.add_vertex("a");
  q.add_vertex("b");
  q.add_invertible("g", "g^-1", 0, 1);
  auto c = morita_collapse(q, true);
  CHECK(c.pres.vertices.size() == 1);
  CHECK(c.pres.generators.empty());

  q.add_generator("x", 0, 1);
  auto c2 = morita_collapse(q, true);
  REQUIRE(c2.pres.generators.size() == 1);
  CHECK(c2.pres.generators[0].src == c2.pres.generators[0].tgt);
  CHECK(complete(c2.pres, 6).graded_dims(4) == std::vector<std::size_t>{1, 1, 1, 1, 1});

  Presentation apart;
  apart.add_vertex("a");
  apart.add_vertex("b");
  CHECK_THROWS_AS(morita_collapse(apart, true), Error);
}

TEST_CASE("isomorphism checks") {
  auto z = b0();
  auto rz = complete(z, 8);
  CHECK(iso_check(rz, rz, map_by_name(z, z), 6).passed());

  auto l = laurent();
  auto rl = complete(l, 8);
  AlgebraMap f{{0, 0}, {l.gen("s"), l.gen("s^-1")}};
  CHECK_FALSE(iso_check(rz, rl, f, 6).passed());
}
