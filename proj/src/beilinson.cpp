#include "hmx/beilinson.hpp"

#include <algorithm>

namespace hmx::beilinson {

namespace {

using ncalg::Gen;
using ncalg::Vertex;

int corner_src(Corner c) { return (c == Corner::One || c == Corner::X) ? 0 : 1; }
int corner_tgt(Corner c) { return (c == Corner::One || c == Corner::Y) ? 0 : 1; }

Element loop_power(const Presentation& B, const std::string& g, long k) {
  if (k == 0) return B.idem(B.generators[B.at(g)].src);
  return B.pow(B.gen(k > 0 ? g : g + "^-1"), static_cast<unsigned>(std::labs(k)));
}

// Power of the corner of t + tau at node `v` (0: t, 1: tau).
Element corner_power(const Presentation& B, Vertex v, long k) { return loop_power(B, v == 0 ? "t" : "tau", k); }

}  // namespace

Presentation b0_presentation() {
  Presentation p;
  auto v1 = p.add_vertex("1"), v2 = p.add_vertex("2");
  p.add_generator("x", v1, v2);
  p.add_generator("y", v2, v1);
  p.add_relation(p.path({"x", "y"}));
  p.add_relation(p.path({"y", "x"}));
  return p;
}

Presentation b_presentation() {
  Presentation p;
  auto v1 = p.add_vertex("1"), v2 = p.add_vertex("2");
  // Declared before x and y so that yx -> t - e1 and xy -> tau - e2 orient as written.
  p.add_invertible("t", "t^-1", v1, v1, 2);
  p.add_invertible("tau", "tau^-1", v2, v2, 2);
  p.add_generator("x", v1, v2);
  p.add_generator("y", v2, v1);
  p.add_relation(p.gen("t") - p.idem(v1) - p.path({"y", "x"}));
  p.add_relation(p.gen("tau") - p.idem(v2) - p.path({"x", "y"}));
  return p;
}

BElement BElement::basis(Corner c, long k, Int coeff) {
  BElement e;
  e.add(c, k, coeff);
  return e;
}

void BElement::add(Corner c, long k, const Int& v) {
  if (v == 0) return;
  auto [it, fresh] = terms.try_emplace({c, k}, v);
  if (!fresh) {
    it->second += v;
    if (it->second == 0) terms.erase(it);
  }
}

BElement& BElement::operator+=(const BElement& o) {
  for (const auto& [key, v] : o.terms) add(key.first, key.second, v);
  return *this;
}

BElement b_multiply(const BElement& a, const BElement& b) {
  BElement r;
  bool composable = false;
  for (const auto& [ka, va] : a.terms)
    for (const auto& [kb, vb] : b.terms) {
      auto [ca, p] = ka;
      auto [cb, q] = kb;
      if (corner_src(ca) != corner_tgt(cb)) continue;
      composable = true;
      Int v = va * vb;
      switch (ca) {
        case Corner::One:  // t^p * (t^q or y tau^q)
          r.add(cb, p + q, v);
          break;
        case Corner::Two:  // tau^p * (tau^q or x t^q)
          r.add(cb, p + q, v);
          break;
        case Corner::X:  // x t^p * (t^q or y tau^q)
          if (cb == Corner::One) {
            r.add(Corner::X, p + q, v);
          } else {  // x y tau^{p+q} = (tau - 1) tau^{p+q}
            r.add(Corner::Two, p + q + 1, v);
            r.add(Corner::Two, p + q, -v);
          }
          break;
        case Corner::Y:  // y tau^p * (tau^q or x t^q)
          if (cb == Corner::Two) {
            r.add(Corner::Y, p + q, v);
          } else {
            r.add(Corner::One, p + q + 1, v);
            r.add(Corner::One, p + q, -v);
          }
          break;
      }
    }
  if (!composable && !a.is_zero() && !b.is_zero()) throw Error(ErrorKind::NotComposable, "no composable corners");
  return r;
}

Element to_presentation(const BElement& a, const Presentation& B) {
  Element out;
  for (const auto& [key, v] : a.terms) {
    auto [c, k] = key;
    Element term;
    switch (c) {
      case Corner::One:
        term = loop_power(B, "t", k);
        break;
      case Corner::Two:
        term = loop_power(B, "tau", k);
        break;
      case Corner::X:
        term = B.mul(B.gen("x"), loop_power(B, "t", k));
        break;
      case Corner::Y:
        term = B.mul(B.gen("y"), loop_power(B, "tau", k));
        break;
    }
    out += v * term;
  }
  return out;
}

BElement from_presentation(const Element& e, const Presentation& B) {
  std::vector<BElement> letter(B.generators.size());
  for (Gen g = 0; g < B.generators.size(); ++g) {
    const auto& n = B.generators[g].name;
    if (n == "t") letter[g] = BElement::basis(Corner::One, 1);
    else if (n == "t^-1") letter[g] = BElement::basis(Corner::One, -1);
    else if (n == "tau") letter[g] = BElement::basis(Corner::Two, 1);
    else if (n == "tau^-1") letter[g] = BElement::basis(Corner::Two, -1);
    else if (n == "x") letter[g] = BElement::basis(Corner::X, 0);
    else if (n == "y") letter[g] = BElement::basis(Corner::Y, 0);
    else throw std::invalid_argument("not a generator of B: " + n);
  }
  BElement out;
  for (const auto& [m, v] : e.terms()) {
    BElement w = BElement::basis(m.src == 0 ? Corner::One : Corner::Two, 0, v);
    for (std::size_t i = m.word.size(); i-- > 0;) w = b_multiply(letter[m.word[i]], w);
    out += w;
  }
  return out;
}

std::vector<BElement> b_center_basis(int D) {
  std::vector<BElement> out;
  for (long k = -D / 2; k <= D / 2; ++k) {
    BElement z = BElement::basis(Corner::One, k);
    z.add(Corner::Two, k, 1);
    out.push_back(std::move(z));
  }
  return out;
}

Presentation b_reduce() {
  auto B = b_presentation();
  auto rw = ncalg::complete(B, 8);
  return ncalg::quotient_central(B, {B.gen("t") + B.gen("tau") - B.one()}, rw);
}

const char* to_string(Flavor f) { return f == Flavor::B ? "B" : "B0"; }

std::vector<const Presentation*> StalkAlgebra::factor_ptrs() const {
  std::vector<const Presentation*> out;
  for (const auto& f : factors) out.push_back(&f);
  return out;
}

std::size_t StalkAlgebra::wall_factor(std::size_t family) const {
  for (std::size_t i = 0; i < labeling.size(); ++i)
    if (labeling[i].wall && labeling[i].index == family) return i;
  throw Error(ErrorKind::NotAdjacent, "wall " + std::to_string(family) + " is not active here");
}

StalkAlgebra stalk_algebra(const arrangement::FaceLocalData& fld, Flavor flavor) {
  StalkAlgebra S;
  S.local = fld;
  S.flavor = flavor;
  for (auto w : fld.walls) {
    S.factors.push_back(flavor == Flavor::B ? b_presentation() : b0_presentation());
    S.labels.push_back("w" + std::to_string(w));
    S.labeling.push_back({true, w});
  }
  if (flavor == Flavor::B) {
    const std::size_t free = fld.splitting.rows() - fld.codim;
    for (std::size_t j = 0; j < free; ++j) {
      // Degree 2 so that s -> t and s -> tau respect the filtration.
      S.factors.push_back(ncalg::laurent("s", 2));
      S.labels.push_back("f" + std::to_string(j));
      S.labeling.push_back({false, j});
    }
  }
  S.tensor = ncalg::tensor(S.factor_ptrs(), S.labels);
  return S;
}

namespace {

// Row vector ell written in the basis given by the rows of the splitting.
IntVec splitting_coords(const arrangement::FaceLocalData& fld, const IntVec& ell) {
  const auto& inv = fld.splitting_inverse;
  IntVec a(inv.cols());
  for (std::size_t i = 0; i < inv.cols(); ++i)
    for (std::size_t j = 0; j < inv.rows(); ++j) a[i] += ell[j] * inv(j, i);
  return a;
}

long to_long(const Int& v) {
  if (!v.fits_slong_p()) throw std::overflow_error("exponent out of range");
  return v.get_si();
}

}  // namespace

Element central_embed(const StalkAlgebra& stalk, const IntVec& ell) {
  if (stalk.flavor == Flavor::B0) return stalk.pres().one();
  IntVec a = splitting_coords(stalk.local, ell);
  std::vector<Element> parts;
  for (std::size_t f = 0; f < stalk.factors.size(); ++f) {
    const auto& P = stalk.factors[f];
    long k = to_long(a[f]);
    if (stalk.labeling[f].wall)
      parts.push_back(corner_power(P, 0, k) + corner_power(P, 1, k));
    else
      parts.push_back(loop_power(P, "s", k));
  }
  return stalk.tensor.pure(stalk.factor_ptrs(), parts);
}

AlgebraMap corestriction(const StalkAlgebra& F, const StalkAlgebra& G, int side) {
  if (side != 1 && side != -1) throw Error(ErrorKind::SideUnspecified, "side must be +1 or -1");
  if (F.flavor != G.flavor) throw Error(ErrorKind::NotAdjacent, "stalks of different flavors");
  const auto& wf = F.local.walls;
  const auto& wg = G.local.walls;
  std::vector<std::size_t> extra;
  std::set_difference(wg.begin(), wg.end(), wf.begin(), wf.end(), std::back_inserter(extra));
  if (extra.size() != 1 || wg.size() != wf.size() + 1 || !std::includes(wg.begin(), wg.end(), wf.begin(), wf.end()))
    throw Error(ErrorKind::NotAdjacent, "faces do not differ by exactly one wall");
  const std::size_t fresh = extra[0];
  const std::size_t cf = wf.size(), cg = wg.size();
  const auto gptrs = G.factor_ptrs();

  auto map_tuple = [&](const std::vector<Vertex>& tf) {
    std::vector<Vertex> tg(G.factors.size(), 0);
    for (std::size_t i = 0; i < cg; ++i) tg[i] = (wg[i] == fresh) ? (side < 0 ? 0 : 1) : tf[F.wall_factor(wg[i])];
    return tg;
  };

  AlgebraMap m;
  for (Vertex v = 0; v < F.pres().vertices.size(); ++v) m.vertex_image.push_back(G.tensor.vertex_of(map_tuple(F.tensor.tuple_of(v))));
  m.gen_image.resize(F.pres().generators.size());
  for (std::size_t f = 0; f < F.factors.size(); ++f) {
    for (Gen g = 0; g < F.factors[f].generators.size(); ++g) {
      for (Gen lifted : F.tensor.gen_index[f][g]) {
        auto tg = map_tuple(F.tensor.tuple_of(F.pres().generators[lifted].src));
        if (F.labeling[f].wall) {
          m.gen_image[lifted] = G.pres().gen(G.tensor.lifted(G.wall_factor(F.labeling[f].index), g, tg));
          continue;
        }
        // Free direction j of F: its lattice vector in G's splitting picks t or tau on the new wall.
        const long sign = (F.factors[f].generators[g].name == "s") ? 1 : -1;
        IntVec dir = F.local.splitting.row(cf + F.labeling[f].index);
        IntVec a = splitting_coords(G.local, dir);
        std::vector<Element> parts;
        for (std::size_t i = 0; i < G.factors.size(); ++i) {
          long k = sign * to_long(a[i]);
          const auto& P = G.factors[i];
          if (G.labeling[i].wall)
            parts.push_back(corner_power(P, tg[i], k));
          else
            parts.push_back(loop_power(P, "s", k));
        }
        m.gen_image[lifted] = G.tensor.pure(gptrs, parts);
      }
    }
  }
  return m;
}

AlgebraMap identity_map(const StalkAlgebra& S) {
  AlgebraMap m;
  for (Vertex v = 0; v < S.pres().vertices.size(); ++v) m.vertex_image.push_back(v);
  for (Gen g = 0; g < S.pres().generators.size(); ++g) m.gen_image.push_back(S.pres().gen(g));
  return m;
}

}  // namespace hmx::beilinson
