#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmx/core_lattice.hpp"
#include "hmx/error.hpp"
#include "hmx/numbers.hpp"

namespace hmx::arrangement {

using lattice::IntMatrix;

/// Hyperplane family {u : alpha . u + offset in Z} on R^d.
struct Family {
  IntVec alpha;
  Rational offset;
};

struct PeriodicArrangement {
  std::size_t d = 0;
  std::vector<Family> families;

  IntMatrix conormals() const;  // n x d, row i = alpha_i
  Rational value(std::size_t family, const RatVec& u) const;
};

/// A lifted face of the periodic arrangement is encoded per family: 2m when the face lies on the
/// wall alpha.u + o = m, and 2m+1 when alpha.u + o lies in the open interval (m, m+1).
using Signature = std::vector<long>;

inline bool sig_active(long s) { return s % 2 == 0; }
inline long sig_level(long s) { return (s - (((s % 2) + 2) % 2)) / 2; }  // floor(s/2)

struct Face {
  Signature lift;  // canonical lift, contains rep_point
  std::vector<std::pair<std::size_t, long>> active;  // (family, m) sorted by family
  RatVec rep_point;                                       // in [0,1)^d
  std::size_t dim = 0;

  std::size_t codim() const { return active.size(); }
  bool is_chamber() const { return active.empty(); }
};

/// Face `upper` covers face `lower`: the lift `canonical(upper) + translation` is the face obtained
/// from canonical(lower) by releasing wall `wall` towards `side` (+1 where alpha.u + o > m).
struct Cover {
  std::size_t upper = 0;
  std::size_t lower = 0;
  std::size_t wall = 0;
  int side = 0;
  IntVec translation;
};

class FacePoset {
 public:
  FacePoset() = default;
  FacePoset(PeriodicArrangement arr, std::vector<Face> faces, std::vector<Cover> covers);

  const PeriodicArrangement& arrangement() const { return arr_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Cover>& covers() const { return covers_; }

  std::vector<std::size_t> chambers() const;
  std::vector<std::size_t> faces_of_dim(std::size_t dim) const;
  /// Covers whose lower face is `face`, in (wall, side) order.
  std::vector<const Cover*> covers_below(std::size_t face) const;
  std::vector<const Cover*> covers_above(std::size_t face) const;

  /// Torus face containing the lifted face, with the translation from its canonical lift.
  std::optional<std::size_t> locate(const Signature& lift, IntVec* translation = nullptr) const;
  Signature translate(const Signature& lift, const IntVec& lambda) const;

 private:
  friend FacePoset enumerate_faces(const PeriodicArrangement& arr, bool require_unimodular);
  std::vector<Int> orbit_key(const Signature& s) const;

  PeriodicArrangement arr_;
  std::vector<Face> faces_;
  std::vector<Cover> covers_;
  lattice::SmithForm alpha_snf_;
  std::map<std::vector<Int>, std::size_t> by_key_;
};

struct FaceLocalData {
  std::size_t face = 0;
  std::size_t codim = 0;
  std::vector<std::size_t> walls;  // active families, sorted; row i of splitting is alpha_{walls[i]}
  IntMatrix splitting;             // d x d unimodular
  IntMatrix splitting_inverse;
};

struct Facet {
  std::size_t wall = 0;
  int side = 0;         // the chamber lies on this side of the wall
  long level = 0;  // wall level m
  IntVec outward;       // outward conormal
};

struct Polytope {
  bool bounded = true;
  std::size_t lineality = 0;
  std::vector<RatVec> vertices;
  std::vector<Facet> facets;
  std::string description;
};

struct FlatReport {
  std::vector<std::size_t> families;
  std::string reason;
};

struct GenericityReport : ValidationReport {
  std::vector<FlatReport> flats;
};

PeriodicArrangement build_arrangement(const lattice::ToriSequence& seq, const lattice::RationalPoint& beta);

/// Normal crossings, unimodular flats (optional) and no shared walls between parallel families.
GenericityReport genericity_check(const PeriodicArrangement& arr, bool require_unimodular = true);

FacePoset enumerate_faces(const PeriodicArrangement& arr, bool require_unimodular = true);

Signature deck_act(const FacePoset& poset, const IntVec& lambda, const Signature& lifted);

FaceLocalData face_local_data(const FacePoset& poset, std::size_t face);

Polytope chamber_polytope(const FacePoset& poset, std::size_t chamber);

/// Lifted faces meeting the closed box [lo, hi]^d with a relative-interior point of each.
std::vector<std::pair<Signature, RatVec>> lifted_faces_in_box(const PeriodicArrangement& arr, const Rational& lo,
                                                              const Rational& hi);

/// Signature of the lifted face containing u.
Signature signature_of(const PeriodicArrangement& arr, const RatVec& u);

}  // namespace hmx::arrangement
