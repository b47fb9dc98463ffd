#include "hmx/arrangement.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "exact_lp.hpp"

namespace hmx::arrangement {

namespace {

std::string family_list(const std::vector<std::size_t>& fams) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < fams.size(); ++i) os << (i ? "," : "") << fams[i];
  os << "}";
  return os.str();
}

RatVec to_rat(const IntVec& v) { return RatVec(v.begin(), v.end()); }

long to_long(const Int& v) {
  if (!v.fits_slong_p()) throw std::overflow_error("signature entry out of range");
  return v.get_si();
}

Int floor_int(const Rational& v) { return floor_rational(v).get_num(); }

// Visits all subsets of {0..n-1} of size 1..max_size in lexicographic order.
template <class F>
void for_each_subset(std::size_t n, std::size_t max_size, F&& f) {
  std::vector<std::size_t> idx;
  for (std::size_t size = 1; size <= std::min(n, max_size); ++size) {
    idx.resize(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    for (;;) {
      f(idx);
      std::size_t p = size;
      while (p > 0 && idx[p - 1] == n - size + p - 1) --p;
      if (p == 0) break;
      ++idx[p - 1];
      for (std::size_t j = p; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
}

struct Wall {
  std::size_t family;
  long level;
};

struct Piece {
  std::vector<int> signs;  // one per processed wall: -1, 0, +1
  RatVec point;
};

}  // namespace

IntMatrix PeriodicArrangement::conormals() const {
  IntMatrix a(families.size(), d);
  for (std::size_t i = 0; i < families.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = families[i].alpha[j];
  return a;
}

Rational PeriodicArrangement::value(std::size_t family, const RatVec& u) const {
  const auto& f = families[family];
  Rational v = f.offset;
  for (std::size_t j = 0; j < d; ++j) v += Rational(f.alpha[j]) * u[j];
  return v;
}

Signature signature_of(const PeriodicArrangement& arr, const RatVec& u) {
  Signature s(arr.families.size());
  for (std::size_t i = 0; i < arr.families.size(); ++i) {
    Rational v = arr.value(i, u);
    Int fl = floor_int(v);
    s[i] = (Rational(fl) == v) ? 2 * to_long(fl) : 2 * to_long(fl) + 1;
  }
  return s;
}

PeriodicArrangement build_arrangement(const lattice::ToriSequence& seq, const lattice::RationalPoint& beta) {
  auto rep = lattice::validate_sequence(seq);
  if (!rep.passed()) throw Error(ErrorKind::InvalidSequence, rep.failures.front());
  if (beta.coords.size() != seq.k)
    throw Error(ErrorKind::InvalidSequence, "beta has " + std::to_string(beta.coords.size()) +
                                                " coordinates, expected " + std::to_string(seq.k));
  IntMatrix L = seq.L_basis;
  if (L.rows() != seq.n || L.cols() != seq.d()) L = lattice::dual_data(seq).L_basis;
  RatVec b(seq.n);
  if (seq.k > 0 && !lattice::solve_rational(seq.iota.transpose(), beta.coords, b))
    throw Error(ErrorKind::NoLift, "iota^T b = beta has no rational solution");
  PeriodicArrangement arr;
  arr.d = seq.d();
  for (std::size_t i = 0; i < seq.n; ++i) arr.families.push_back(Family{L.row(i), b[i]});
  return arr;
}

GenericityReport genericity_check(const PeriodicArrangement& arr, bool require_unimodular) {
  GenericityReport rep;
  const std::size_t n = arr.families.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (arr.families[i].alpha.size() != arr.d) {
      rep.fail("family " + std::to_string(i) + " has conormal of wrong length");
      return rep;
    }
    if (std::all_of(arr.families[i].alpha.begin(), arr.families[i].alpha.end(), [](const Int& v) { return v == 0; })) {
      rep.fail("family " + std::to_string(i) + " has zero conormal");
      rep.flats.push_back({{i}, "zero conormal"});
    }
  }
  if (!rep.passed()) return rep;
  for_each_subset(n, arr.d + 1, [&](const std::vector<std::size_t>& fams) {
    IntMatrix a(fams.size(), arr.d);
    RatVec off(fams.size());
    for (std::size_t r = 0; r < fams.size(); ++r) {
      for (std::size_t c = 0; c < arr.d; ++c) a(r, c) = arr.families[fams[r]].alpha[c];
      off[r] = arr.families[fams[r]].offset;
    }
    auto snf = lattice::smith_normal_form(a);
    const std::size_t r = snf.rank();
    RatVec c = snf.U_inv * off;
    for (std::size_t i = r; i < c.size(); ++i)
      if (c[i].get_den() != 1) return;  // empty flat on the torus
    if (r < fams.size()) {
      std::string why = (fams.size() == 2 && r == 1)
                            ? "parallel families share a wall"
                            : "flat of codim " + std::to_string(r) + " lies on " + std::to_string(fams.size()) + " walls";
      rep.fail("families " + family_list(fams) + ": " + why);
      rep.flats.push_back({fams, why});
      return;
    }
    if (require_unimodular)
      for (const auto& f : snf.invariant_factors())
        if (f != 1) {
          std::string why = "conormals do not extend to an integer basis";
          rep.fail("families " + family_list(fams) + ": " + why);
          rep.flats.push_back({fams, why});
          return;
        }
  });
  return rep;
}

std::vector<std::pair<Signature, RatVec>> lifted_faces_in_box(const PeriodicArrangement& arr, const Rational& lo,
                                                              const Rational& hi) {
  const std::size_t d = arr.d;
  std::vector<Wall> walls;
  for (std::size_t i = 0; i < arr.families.size(); ++i) {
    const auto& f = arr.families[i];
    Rational vmin = f.offset, vmax = f.offset;
    for (std::size_t j = 0; j < d; ++j) {
      Rational a(f.alpha[j]);
      vmin += std::min(a * lo, a * hi);
      vmax += std::max(a * lo, a * hi);
    }
    Int m0 = floor_int(vmin);
    if (Rational(m0) < vmin) m0 += 1;
    for (Int m = m0; Rational(m) <= vmax; ++m) walls.push_back({i, to_long(m)});
  }

  std::vector<lp::Constraint> box;
  for (std::size_t j = 0; j < d; ++j) {
    RatVec e(d);
    e[j] = 1;
    box.push_back({e, lp::Sense::GreaterEq, lo});
    box.push_back({e, lp::Sense::LessEq, hi});
  }

  RatVec start(d, (lo + hi) / 2);
  std::vector<Piece> pieces{Piece{{}, start}};
  for (std::size_t w = 0; w < walls.size(); ++w) {
    const auto& wall = walls[w];
    std::vector<Piece> next;
    for (const auto& piece : pieces) {
      Rational v = arr.value(wall.family, piece.point) - Rational(wall.level);
      int s0 = sgn(v);
      for (int s : {-1, 0, 1}) {
        Piece np;
        np.signs = piece.signs;
        np.signs.push_back(s);
        if (s == s0) {
          np.point = piece.point;
          next.push_back(std::move(np));
          continue;
        }
        std::vector<lp::Constraint> hard = box;
        std::vector<RatVec> strict;
        RatVec strict_rhs;
        for (std::size_t k = 0; k < np.signs.size(); ++k) {
          const auto& wk = walls[k];
          const auto& fk = arr.families[wk.family];
          RatVec coeffs = to_rat(fk.alpha);
          if (np.signs[k] == 0) {
            hard.push_back({coeffs, lp::Sense::Equal, Rational(wk.level) - fk.offset});
          } else {
            for (auto& c : coeffs) c *= np.signs[k];
            strict.push_back(coeffs);
            strict_rhs.push_back(np.signs[k] * (fk.offset - Rational(wk.level)));
          }
        }
        if (lp::find_strict_point(d, hard, strict, strict_rhs, np.point)) next.push_back(std::move(np));
      }
    }
    pieces = std::move(next);
  }

  std::map<Signature, RatVec> found;
  for (const auto& piece : pieces) {
    Signature s = signature_of(arr, piece.point);
    found.emplace(std::move(s), piece.point);
  }
  return {found.begin(), found.end()};
}

FacePoset::FacePoset(PeriodicArrangement arr, std::vector<Face> faces, std::vector<Cover> covers)
    : arr_(std::move(arr)), faces_(std::move(faces)), covers_(std::move(covers)) {
  alpha_snf_ = lattice::smith_normal_form(arr_.conormals());
  for (std::size_t f = 0; f < faces_.size(); ++f) by_key_[orbit_key(faces_[f].lift)] = f;
}

std::vector<Int> FacePoset::orbit_key(const Signature& s) const {
  IntVec sv(s.begin(), s.end());
  IntVec y = alpha_snf_.U_inv * sv;
  const std::size_t r = alpha_snf_.rank();
  for (std::size_t i = 0; i < r; ++i) {
    Int m = 2 * alpha_snf_.D(i, i);
    mpz_fdiv_r(y[i].get_mpz_t(), y[i].get_mpz_t(), m.get_mpz_t());
  }
  return y;
}

std::optional<std::size_t> FacePoset::locate(const Signature& lift, IntVec* translation) const {
  auto it = by_key_.find(orbit_key(lift));
  if (it == by_key_.end()) return std::nullopt;
  if (translation) {
    const auto& canon = faces_[it->second].lift;
    IntVec half(lift.size());
    for (std::size_t i = 0; i < lift.size(); ++i) half[i] = Int((lift[i] - canon[i]) / 2);
    IntVec y = alpha_snf_.U_inv * half;
    const std::size_t r = alpha_snf_.rank();
    IntVec yy(arr_.d);
    for (std::size_t i = 0; i < r; ++i) yy[i] = y[i] / alpha_snf_.D(i, i);
    *translation = alpha_snf_.V_inv * yy;
  }
  return it->second;
}

Signature FacePoset::translate(const Signature& lift, const IntVec& lambda) const {
  Signature out = lift;
  for (std::size_t i = 0; i < arr_.families.size(); ++i) {
    Int shift = 0;
    for (std::size_t j = 0; j < arr_.d; ++j) shift += arr_.families[i].alpha[j] * lambda[j];
    out[i] += 2 * to_long(shift);
  }
  return out;
}

std::vector<std::size_t> FacePoset::chambers() const { return faces_of_dim(arr_.d); }

std::vector<std::size_t> FacePoset::faces_of_dim(std::size_t dim) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < faces_.size(); ++f)
    if (faces_[f].dim == dim) out.push_back(f);
  return out;
}

std::vector<const Cover*> FacePoset::covers_below(std::size_t face) const {
  std::vector<const Cover*> out;
  for (const auto& c : covers_)
    if (c.lower == face) out.push_back(&c);
  return out;
}

std::vector<const Cover*> FacePoset::covers_above(std::size_t face) const {
  std::vector<const Cover*> out;
  for (const auto& c : covers_)
    if (c.upper == face) out.push_back(&c);
  return out;
}

FacePoset enumerate_faces(const PeriodicArrangement& arr, bool require_unimodular) {
  auto gen = genericity_check(arr, require_unimodular);
  if (!gen.passed()) {
    std::string msg;
    for (const auto& f : gen.failures) msg += (msg.empty() ? "" : "; ") + f;
    throw Error(ErrorKind::NonGenericArrangement, msg);
  }
  const std::size_t n = arr.families.size();
  const std::size_t d = arr.d;
  auto pieces = lifted_faces_in_box(arr, 0, 1);

  FacePoset poset;
  poset.arr_ = arr;
  poset.alpha_snf_ = lattice::smith_normal_form(arr.conormals());

  // Group pieces by orbit; the representative is the lexicographically smallest lift found.
  std::map<std::vector<Int>, std::pair<Signature, RatVec>> reps;
  for (auto& [sig, pt] : pieces) {
    auto key = poset.orbit_key(sig);
    auto it = reps.find(key);
    if (it == reps.end() || sig < it->second.first) reps[key] = {sig, pt};
  }
  std::vector<Face> faces;
  for (auto& [key, rep] : reps) {
    auto& [sig, pt] = rep;
    IntVec lambda(d);
    Face f;
    f.rep_point.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      lambda[j] = -floor_int(pt[j]);
      f.rep_point[j] = pt[j] + Rational(lambda[j]);
    }
    f.lift = poset.translate(sig, lambda);
    for (std::size_t i = 0; i < n; ++i)
      if (sig_active(f.lift[i])) f.active.emplace_back(i, f.lift[i] / 2);
    f.dim = d - f.active.size();
    faces.push_back(std::move(f));
  }
  std::sort(faces.begin(), faces.end(), [](const Face& a, const Face& b) {
    if (a.dim != b.dim) return a.dim < b.dim;
    return a.lift < b.lift;
  });
  poset.faces_ = std::move(faces);
  poset.by_key_.clear();
  for (std::size_t f = 0; f < poset.faces_.size(); ++f) poset.by_key_[poset.orbit_key(poset.faces_[f].lift)] = f;

  for (std::size_t g = 0; g < poset.faces_.size(); ++g) {
    for (const auto& [wall, level] : poset.faces_[g].active) {
      for (int side : {-1, 1}) {
        Signature up = poset.faces_[g].lift;
        up[wall] = 2 * level + side;
        Cover c;
        auto f = poset.locate(up, &c.translation);
        if (!f)
          throw Error(ErrorKind::NonGenericArrangement,
                      "face " + std::to_string(g) + " has no neighbour across wall " + std::to_string(wall));
        c.upper = *f;
        c.lower = g;
        c.wall = wall;
        c.side = side;
        poset.covers_.push_back(std::move(c));
      }
    }
  }
  return poset;
}

Signature deck_act(const FacePoset& poset, const IntVec& lambda, const Signature& lifted) {
  return poset.translate(lifted, lambda);
}

FaceLocalData face_local_data(const FacePoset& poset, std::size_t face) {
  const auto& arr = poset.arrangement();
  const auto& f = poset.faces().at(face);
  FaceLocalData out;
  out.face = face;
  out.codim = f.codim();
  IntMatrix rows(f.active.size(), arr.d);
  for (std::size_t r = 0; r < f.active.size(); ++r) {
    out.walls.push_back(f.active[r].first);
    for (std::size_t c = 0; c < arr.d; ++c) rows(r, c) = arr.families[f.active[r].first].alpha[c];
  }
  out.splitting = lattice::unimodular_completion(rows, arr.d);
  out.splitting_inverse = lattice::unimodular_inverse(out.splitting);
  return out;
}

Polytope chamber_polytope(const FacePoset& poset, std::size_t chamber) {
  const auto& arr = poset.arrangement();
  const auto& face = poset.faces().at(chamber);
  if (!face.is_chamber()) throw std::invalid_argument("chamber_polytope: face is not a chamber");
  const std::size_t n = arr.families.size(), d = arr.d;
  Polytope poly;
  const std::size_t rk = lattice::rank(arr.conormals());
  if (rk < d) {
    poly.bounded = false;
    poly.lineality = d - rk;
    poly.description = (n == 0) ? "whole space; recession cone is all of R^" + std::to_string(d)
                                : "unbounded slab region with lineality " + std::to_string(d - rk);
  }
  // Half-spaces lo_i <= alpha_i u + o_i <= lo_i + 1.
  struct Bound {
    std::size_t wall;
    int side;
    long level;
  };
  std::vector<Bound> bounds;
  for (std::size_t i = 0; i < n; ++i) {
    long lo = sig_level(face.lift[i]);
    bounds.push_back({i, 1, lo});       // chamber on + side of wall at level lo
    bounds.push_back({i, -1, lo + 1});  // chamber on - side of wall at level lo+1
  }
  for (const auto& b : bounds) {
    std::vector<lp::Constraint> hard;
    std::vector<RatVec> strict;
    RatVec strict_rhs;
    const auto& fb = arr.families[b.wall];
    hard.push_back({to_rat(fb.alpha), lp::Sense::Equal, Rational(b.level) - fb.offset});
    for (const auto& o : bounds) {
      if (o.wall == b.wall) continue;
      const auto& fo = arr.families[o.wall];
      RatVec coeffs = to_rat(fo.alpha);
      for (auto& c : coeffs) c *= o.side;
      strict.push_back(coeffs);
      strict_rhs.push_back(o.side * (fo.offset - Rational(o.level)));
    }
    RatVec pt;
    if (lp::find_strict_point(d, hard, strict, strict_rhs, pt)) {
      Facet f{b.wall, b.side, b.level, {}};
      for (const auto& a : fb.alpha) f.outward.push_back(-b.side * a);
      poly.facets.push_back(std::move(f));
    }
  }
  if (poly.bounded) {
    // Vertices: choose d facets with independent conormals and solve.
    std::set<RatVec> verts;
    std::vector<std::size_t> idx;
    for_each_subset(poly.facets.size(), d, [&](const std::vector<std::size_t>& sub) {
      if (sub.size() != d) return;
      IntMatrix a(d, d);
      RatVec rhs(d);
      for (std::size_t r = 0; r < d; ++r) {
        const auto& f = poly.facets[sub[r]];
        for (std::size_t c = 0; c < d; ++c) a(r, c) = arr.families[f.wall].alpha[c];
        rhs[r] = Rational(f.level) - arr.families[f.wall].offset;
      }
      if (lattice::determinant(a) == 0) return;
      RatVec x;
      if (!lattice::solve_rational(a, rhs, x)) return;
      for (const auto& b : bounds) {
        Rational v = arr.value(b.wall, x) - Rational(b.level);
        if (b.side * v < 0) return;
      }
      verts.insert(x);
    });
    poly.vertices.assign(verts.begin(), verts.end());
    poly.description = "bounded polytope with " + std::to_string(poly.vertices.size()) + " vertices and " +
                       std::to_string(poly.facets.size()) + " facets";
  }
  return poly;
}

}  // namespace hmx::arrangement
