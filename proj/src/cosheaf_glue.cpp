#include "hmx/cosheaf_glue.hpp"

#include <algorithm>

namespace hmx::glue {

using ncalg::Gen;
using ncalg::Mono;
using ncalg::Vertex;

std::map<CoverKey, std::size_t> cover_index(const arrangement::FacePoset& poset) {
  std::map<CoverKey, std::size_t> out;
  const auto& cs = poset.covers();
  for (std::size_t i = 0; i < cs.size(); ++i) out[{cs[i].lower, cs[i].wall, cs[i].side}] = i;
  return out;
}

std::vector<Square> squares(const arrangement::FacePoset& poset) {
  auto idx = cover_index(poset);
  const auto& cs = poset.covers();
  std::vector<Square> out;
  for (std::size_t L = 0; L < poset.faces().size(); ++L) {
    const auto& act = poset.faces()[L].active;
    for (std::size_t i = 0; i < act.size(); ++i)
      for (std::size_t j = i + 1; j < act.size(); ++j)
        for (int si : {-1, 1})
          for (int sj : {-1, 1}) {
            Square q;
            q.lower = L;
            q.wall_a = act[i].first;
            q.wall_b = act[j].first;
            q.side_a = si;
            q.side_b = sj;
            q.cover_a = idx.at({L, q.wall_a, si});
            q.cover_b = idx.at({L, q.wall_b, sj});
            q.cover_a_up = idx.at({cs[q.cover_a].upper, q.wall_b, sj});
            q.cover_b_up = idx.at({cs[q.cover_b].upper, q.wall_a, si});
            q.upper = cs[q.cover_a_up].upper;
            if (cs[q.cover_b_up].upper != q.upper)
              throw Error(ErrorKind::FunctorialityFailure, "square at face " + std::to_string(L) + " does not close");
            out.push_back(q);
          }
  }
  return out;
}

Element AlgebraCosheaf::central(std::size_t face, const IntVec& ell) const {
  if (!central_structure()) return algebras[face].one();
  return beilinson::central_embed(stalks[face], ell);
}

namespace {

std::string square_name(const Square& q) {
  return "face " + std::to_string(q.lower) + " walls (" + std::to_string(q.wall_a) + "," + std::to_string(q.wall_b) +
         ") sides (" + std::to_string(q.side_a) + "," + std::to_string(q.side_b) + ")";
}

// B only closes up at degree 7 (tau^-1 tau x t^-1), so systems are completed at least that far.
ncalg::RewriteSystem stalk_system(const Presentation& p, int D) { return ncalg::complete(p, std::max(D, 8)); }

IntVec unit_vector(std::size_t d, std::size_t j) {
  IntVec v(d);
  v[j] = 1;
  return v;
}

}  // namespace

ValidationReport check_cosheaf(const AlgebraCosheaf& C, int D) {
  ValidationReport rep;
  const auto& cs = C.poset.covers();
  std::vector<std::optional<ncalg::RewriteSystem>> rw(C.algebras.size());
  auto system = [&](std::size_t f) -> const ncalg::RewriteSystem& {
    if (!rw[f]) rw[f] = stalk_system(C.algebras[f], D);
    return *rw[f];
  };
  for (std::size_t i = 0; i < cs.size(); ++i) {
    auto hom = ncalg::check_homomorphism(C.corestrictions[i], C.algebras[cs[i].upper], system(cs[i].lower));
    for (auto& f : hom.failures) rep.fail("cover " + std::to_string(i) + ": " + f);
  }
  for (const auto& q : squares(C.poset)) {
    const auto& U = C.algebras[q.upper];
    const auto& Lo = C.algebras[q.lower];
    auto one = ncalg::compose(C.corestrictions[q.cover_a], C.corestrictions[q.cover_a_up], C.algebras[cs[q.cover_a].upper], Lo);
    auto two = ncalg::compose(C.corestrictions[q.cover_b], C.corestrictions[q.cover_b_up], C.algebras[cs[q.cover_b].upper], Lo);
    if (one.vertex_image != two.vertex_image) {
      rep.fail("vertex composites differ at " + square_name(q));
      continue;
    }
    const auto& r = system(q.lower);
    for (Gen g = 0; g < U.generators.size(); ++g)
      if (r.reduce(one.gen_image[g]) != r.reduce(two.gen_image[g]))
        rep.fail("composites differ on " + U.generators[g].name + " at " + square_name(q));
  }
  if (C.central_structure()) {
    const std::size_t d = C.poset.arrangement().d;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const auto& F = C.algebras[cs[i].upper];
      const auto& G = C.algebras[cs[i].lower];
      Element unit = ncalg::apply(C.corestrictions[i], F, G, F.one());
      for (std::size_t j = 0; j < d; ++j) {
        auto ell = unit_vector(d, j);
        Element lhs = ncalg::apply(C.corestrictions[i], F, G, C.central(cs[i].upper, ell));
        Element rhs = G.mul(unit, C.central(cs[i].lower, ell));
        if (system(cs[i].lower).reduce(lhs - rhs) != Element())
          rep.fail("cover " + std::to_string(i) + " does not intertwine the central action");
      }
    }
  }
  return rep;
}

AlgebraCosheaf build_cosheaf(const arrangement::FacePoset& poset, Flavor flavor, int D) {
  AlgebraCosheaf C;
  C.poset = poset;
  C.flavor = flavor;
  for (std::size_t f = 0; f < poset.faces().size(); ++f) {
    C.stalks.push_back(beilinson::stalk_algebra(arrangement::face_local_data(poset, f), flavor));
    C.algebras.push_back(C.stalks.back().pres());
  }
  for (const auto& c : poset.covers())
    C.corestrictions.push_back(beilinson::corestriction(C.stalks[c.upper], C.stalks[c.lower], c.side));
  auto rep = check_cosheaf(C, D);
  if (!rep.passed()) throw Error(ErrorKind::FunctorialityFailure, rep.failures.front());
  return C;
}

CellComplex refine_cells(const arrangement::FacePoset& poset, const RatVec& shift) {
  const auto& arr = poset.arrangement();
  if (shift.size() != arr.d) throw Error(ErrorKind::NonTransverseCut, "shift has the wrong length");
  arrangement::PeriodicArrangement ext = arr;
  for (std::size_t j = 0; j < arr.d; ++j) ext.families.push_back({unit_vector(arr.d, j), -shift[j]});
  auto gen = arrangement::genericity_check(ext, false);
  if (!gen.passed()) throw Error(ErrorKind::NonTransverseCut, gen.failures.front());

  CellComplex cc;
  cc.cells = arrangement::enumerate_faces(ext, false);
  cc.arrangement_families = arr.families.size();
  cc.shift = shift;
  for (const auto& cell : cc.cells.faces()) {
    arrangement::Signature prefix(cell.lift.begin(), cell.lift.begin() + static_cast<long>(arr.families.size()));
    auto f = poset.locate(prefix);
    if (!f) throw Error(ErrorKind::NonTransverseCut, "cell does not lie in an arrangement face");
    cc.tag.push_back(*f);
  }
  return cc;
}

CellComplex refine_cells_auto(const arrangement::FacePoset& poset) {
  // 1/2, 1/3, 2/5, 3/7, 4/9, ...
  for (long k = 0; k < 64; ++k) {
    Rational s = k == 0 ? Rational(1, 2) : Rational(k, 2 * k + 1);
    try {
      return refine_cells(poset, RatVec(poset.arrangement().d, s));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonTransverseCut) throw;
    }
  }
  throw Error(ErrorKind::NonTransverseCut, "no transverse shift among the first 64 candidates");
}

Element GlobalAlgebra::lift(std::size_t cell, const Element& e) const {
  Element out;
  const Vertex vb = vertex_base[cell];
  const Gen gb = gen_base[cell];
  for (const auto& [m, c] : e.terms()) {
    Mono n = m;
    for (auto& l : n.word) l += gb;
    n.src += vb;
    n.tgt += vb;
    out.add(n, c);
  }
  return out;
}

GlobalAlgebra global_algebra(const AlgebraCosheaf& C, const CellComplex& cc) {
  const auto& cells = cc.cells;
  const auto arr_cover = cover_index(C.poset);
  const auto& acs = C.poset.covers();
  GlobalAlgebra G;
  auto& Q = G.quiver;

  for (std::size_t i = 0; i < cells.faces().size(); ++i) {
    const auto& S = C.algebras[cc.tag[i]];
    const std::string prefix = "c" + std::to_string(i);
    G.vertex_base.push_back(static_cast<Vertex>(Q.vertices.size()));
    G.gen_base.push_back(static_cast<Gen>(Q.generators.size()));
    for (const auto& v : S.vertices) Q.add_vertex(prefix + ":" + v);
    for (const auto& g : S.generators)
      Q.add_generator(prefix + "." + g.name, G.vertex_base[i] + g.src, G.vertex_base[i] + g.tgt, g.degree);
    for (const auto& [g, h] : S.inverses) Q.inverses.emplace_back(G.gen_base[i] + g, G.gen_base[i] + h);
    for (const auto& r : S.relations) Q.add_relation(G.lift(i, r));
  }

  // Corestriction across each cell cover: identity over cut walls, the arrangement's otherwise.
  const auto& ccs = cells.covers();
  std::vector<AlgebraMap> phi(ccs.size());
  std::vector<AlgebraMap> identity(C.algebras.size());
  for (std::size_t f = 0; f < C.algebras.size(); ++f) {
    const auto& S = C.algebras[f];
    for (Vertex v = 0; v < S.vertices.size(); ++v) identity[f].vertex_image.push_back(v);
    for (Gen g = 0; g < S.generators.size(); ++g) identity[f].gen_image.push_back(S.gen(g));
  }
  for (std::size_t k = 0; k < ccs.size(); ++k) {
    const auto& c = ccs[k];
    const std::size_t fu = cc.tag[c.upper], fl = cc.tag[c.lower];
    if (cc.is_cut(c.wall)) {
      if (fu != fl) throw Error(ErrorKind::NonTransverseCut, "cut wall separates different arrangement faces");
      phi[k] = identity[fu];
      continue;
    }
    auto it = arr_cover.find({fl, c.wall, c.side});
    if (it == arr_cover.end() || acs[it->second].upper != fu)
      throw Error(ErrorKind::NotAdjacent, "cell cover " + std::to_string(k) + " has no arrangement cover");
    phi[k] = C.corestrictions[it->second];
  }

  std::map<std::pair<std::size_t, Vertex>, Gen> connector_of;
  for (std::size_t k = 0; k < ccs.size(); ++k) {
    const auto& c = ccs[k];
    const auto& S = C.algebras[cc.tag[c.upper]];
    for (Vertex v = 0; v < S.vertices.size(); ++v) {
      std::string name = "g" + std::to_string(k) + "." + std::to_string(v);
      Gen g = Q.add_invertible(name, name + "^-1", G.vertex_base[c.upper] + v,
                               G.vertex_base[c.lower] + phi[k].vertex_image[v], 1);
      G.connectors.push_back({k, v, g});
      connector_of[{k, v}] = g;
    }
  }
  for (std::size_t k = 0; k < ccs.size(); ++k) {
    const auto& c = ccs[k];
    const auto& S = C.algebras[cc.tag[c.upper]];
    for (Gen a = 0; a < S.generators.size(); ++a) {
      const auto& A = S.generators[a];
      Element left = Q.mul(Q.gen(connector_of.at({k, A.tgt})), Q.gen(G.gen_base[c.upper] + a));
      Element right = Q.mul(G.lift(c.lower, phi[k].gen_image[a]), Q.gen(connector_of.at({k, A.src})));
      Q.add_relation(left - right);
    }
  }
  for (const auto& q : squares(cells)) {
    const auto& S = C.algebras[cc.tag[q.upper]];
    for (Vertex v = 0; v < S.vertices.size(); ++v) {
      Vertex va = phi[q.cover_a_up].vertex_image[v];
      Vertex vb = phi[q.cover_b_up].vertex_image[v];
      if (phi[q.cover_a].vertex_image[va] != phi[q.cover_b].vertex_image[vb])
        throw Error(ErrorKind::FunctorialityFailure, "cell square at " + std::to_string(q.lower) + " does not commute on vertices");
      Element one = Q.mul(Q.gen(connector_of.at({q.cover_a, va})), Q.gen(connector_of.at({q.cover_a_up, v})));
      Element two = Q.mul(Q.gen(connector_of.at({q.cover_b, vb})), Q.gen(connector_of.at({q.cover_b_up, v})));
      Q.add_relation(one - two);
    }
  }

  G.collapse = ncalg::morita_collapse(Q);
  if (C.central_structure()) {
    const std::size_t d = C.poset.arrangement().d;
    for (std::size_t j = 0; j < d; ++j) {
      Element z;
      for (std::size_t i = 0; i < cells.faces().size(); ++i) z += G.lift(i, C.central(cc.tag[i], unit_vector(d, j)));
      // After the collapse every corner of z is identified; keep one corner per component.
      std::vector<bool> seen(G.collapse.pres.vertices.size(), false);
      Element corner;
      for (Vertex v = 0; v < Q.vertices.size(); ++v) {
        Vertex w = G.collapse.map.vertex_image[v];
        if (seen[w]) continue;
        seen[w] = true;
        for (const auto& [m, c] : z.terms())
          if (m.src == v && m.tgt == v) corner.add(m, c);
      }
      G.central.push_back(ncalg::apply(G.collapse.map, Q, G.collapse.pres, corner));
    }
  }
  return G;
}

AlgebraCosheaf reduce_cosheaf(const AlgebraCosheaf& C, int D) {
  if (!C.central_structure()) throw Error(ErrorKind::NotCentral, "reduction needs the B flavor with its central structure");
  AlgebraCosheaf R = C;
  const std::size_t d = C.poset.arrangement().d;
  for (std::size_t f = 0; f < C.algebras.size(); ++f) {
    std::vector<Element> rel;
    for (std::size_t j = 0; j < d; ++j) rel.push_back(C.central(f, unit_vector(d, j)) - C.algebras[f].one());
    R.algebras[f] = ncalg::quotient_central(C.algebras[f], rel, stalk_system(C.algebras[f], D));
  }
  R.flavor = Flavor::B0;
  R.reduced = true;
  return R;
}

Presentation reduce_global(const GlobalAlgebra& g, int D) {
  std::vector<Element> rel;
  for (const auto& z : g.central) rel.push_back(z - g.collapsed().one());
  return ncalg::quotient_central(g.collapsed(), rel, stalk_system(g.collapsed(), D));
}

ReductionReport verify_reduction_commutes(const arrangement::FacePoset& poset, const CellComplex& cells, int D) {
  ReductionReport rep;
  rep.degree = D;
  rep.notes.push_back(
      "global sections are modeled by the gluing quiver: stalk algebras joined by invertible connectors");
  try {
    auto B = build_cosheaf(poset, Flavor::B, D);
    auto B0 = build_cosheaf(poset, Flavor::B0, D);
    auto R = reduce_cosheaf(B, D);
    auto gB = global_algebra(B, cells);
    auto gR = global_algebra(R, cells);
    auto g0 = global_algebra(B0, cells);
    auto reduced_global = reduce_global(gB, D);
    auto r0 = stalk_system(g0.collapsed(), D);
    auto rR = stalk_system(gR.collapsed(), D);
    auto rG = stalk_system(reduced_global, D);
    rep.dims_b0 = r0.graded_dims(D);
    rep.dims_reduced_cosheaf = rR.graded_dims(D);
    rep.dims_reduced_global = rG.graded_dims(D);
    auto a = ncalg::iso_check(r0, rR, ncalg::map_by_name(g0.collapsed(), gR.collapsed()), D);
    for (auto& f : a.failures) rep.fail("B0 vs reduced cosheaf: " + f);
    auto b = ncalg::iso_check(r0, rG, ncalg::map_by_name(g0.collapsed(), reduced_global), D);
    for (auto& f : b.failures) rep.fail("B0 vs reduced global algebra: " + f);
  } catch (const Error& e) {
    rep.fail(e.what());
  }
  return rep;
}

AlgebraMap match_by_tag(const GlobalAlgebra& a, const CellComplex& ca, const GlobalAlgebra& b, const CellComplex& cb) {
  std::map<std::size_t, std::size_t> first_cell;
  for (std::size_t j = 0; j < cb.tag.size(); ++j) first_cell.try_emplace(cb.tag[j], j);
  auto cell_of = [](const std::vector<ncalg::Gen>& base, std::size_t x) {
    return static_cast<std::size_t>(std::upper_bound(base.begin(), base.end(), x) - base.begin() - 1);
  };

  std::vector<Gen> b_connectors;
  for (const auto& c : b.connectors)
    if (b.collapse.map.gen_image[c.gen].terms().begin()->first.word.size() == 1) b_connectors.push_back(c.gen);
  std::size_t next_connector = 0;
  std::map<Gen, Gen> connector_match;
  for (const auto& c : a.connectors)
    if (a.collapse.map.gen_image[c.gen].terms().begin()->first.word.size() == 1 && next_connector < b_connectors.size()) {
      connector_match[c.gen] = b_connectors[next_connector];
      connector_match[c.gen + 1] = b_connectors[next_connector] + 1;
      ++next_connector;
    }

  AlgebraMap m;
  const auto& A = a.collapsed();
  m.vertex_image.assign(A.vertices.size(), 0);
  for (Vertex v = 0; v < a.quiver.vertices.size(); ++v) {
    std::size_t i = cell_of(a.vertex_base, v);
    std::size_t j = first_cell.at(ca.tag[i]);
    m.vertex_image[a.collapse.map.vertex_image[v]] =
        b.collapse.map.vertex_image[b.vertex_base[j] + (v - a.vertex_base[i])];
  }
  m.gen_image.assign(A.generators.size(), Element());
  for (Gen g = 0; g < a.quiver.generators.size(); ++g) {
    const auto& img = a.collapse.map.gen_image[g];
    if (img.terms().size() != 1 || img.terms().begin()->first.word.size() != 1) continue;
    Gen target = img.terms().begin()->first.word[0];
    Gen source;
    if (auto it = connector_match.find(g); it != connector_match.end()) {
      source = it->second;
    } else if (a.connectors.empty() || g < a.connectors.front().gen) {
      std::size_t i = cell_of(a.gen_base, g);
      std::size_t j = first_cell.at(ca.tag[i]);
      source = b.gen_base[j] + (g - a.gen_base[i]);
    } else {
      continue;
    }
    m.gen_image[target] = ncalg::apply(b.collapse.map, b.quiver, b.collapsed(), b.quiver.gen(source));
  }
  return m;
}

}  // namespace hmx::glue
