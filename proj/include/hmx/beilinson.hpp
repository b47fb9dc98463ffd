#pragma once

#include <map>
#include <string>
#include <vector>

#include "hmx/arrangement.hpp"
#include "hmx/ncalg.hpp"

namespace hmx::beilinson {

using ncalg::AlgebraMap;
using ncalg::Element;
using ncalg::Presentation;

/// Two nodes 1, 2 with x: 1 -> 2, y: 2 -> 1 and xy = yx = 0.
Presentation b0_presentation();
/// Two nodes with t, tau invertible loops (degree 2), x, y (degree 1), t = e1 + yx, tau = e2 + xy.
Presentation b_presentation();

/// Closed-form model of B. Corners: (1,1) = Z[t^+-], (2,2) = Z[tau^+-], x Z[t^+-] from 1 to 2 and
/// y Z[tau^+-] from 2 to 1. Basis keys are (corner, k) meaning t^k, tau^k, x t^k or y tau^k.
enum class Corner { One = 0, Two = 1, X = 2, Y = 3 };

struct BElement {
  std::map<std::pair<Corner, long>, Int> terms;

  static BElement basis(Corner c, long k, Int coeff = 1);
  void add(Corner c, long k, const Int& v);
  bool is_zero() const { return terms.empty(); }
  friend bool operator==(const BElement&, const BElement&) = default;
  BElement& operator+=(const BElement& o);
};

/// Product a*b (b first). Throws NotComposable when no corner of a can follow a corner of b.
BElement b_multiply(const BElement& a, const BElement& b);
Element to_presentation(const BElement& a, const Presentation& B);
/// Reads a normal form of the rewriting model back into the closed form.
BElement from_presentation(const Element& e, const Presentation& B);

/// {t^k + tau^k : 2|k| <= D}, the central elements of filtration at most D.
std::vector<BElement> b_center_basis(int D);
/// B modulo the central element t + tau - 1, i.e. the corner relations t = e1, tau = e2.
Presentation b_reduce();

enum class Flavor { B, B0 };

const char* to_string(Flavor f);

struct FactorLabel {
  bool wall = true;
  std::size_t index = 0;  // family index for a wall, position among free directions otherwise
};

/// Stalk of the cosheaf at a face: one B (or B0) factor per active wall in family order, then one
/// Laurent factor per free direction of the adapted splitting (omitted for B0).
struct StalkAlgebra {
  arrangement::FaceLocalData local;
  Flavor flavor = Flavor::B;
  std::vector<Presentation> factors;
  std::vector<std::string> labels;
  std::vector<FactorLabel> labeling;
  ncalg::Tensor tensor;

  const Presentation& pres() const { return tensor.pres; }
  std::vector<const Presentation*> factor_ptrs() const;
  std::size_t wall_factor(std::size_t family) const;  // throws when the wall is not active
};

StalkAlgebra stalk_algebra(const arrangement::FaceLocalData& fld, Flavor flavor);

/// Image of the lattice vector ell in the center: prod (t_i + tau_i)^{a_i} prod s_j^{b_j} where
/// (a, b) are the coordinates of ell in the adapted splitting. The unit for B0.
Element central_embed(const StalkAlgebra& stalk, const IntVec& ell);

/// Corestriction from the stalk of F to the stalk of G, where G has exactly one more active wall
/// and F lies on `side` (+1 or -1) of it. Non-unital: the unit goes to e_side on the new factor.
AlgebraMap corestriction(const StalkAlgebra& F, const StalkAlgebra& G, int side);
/// The identity of a stalk, used across auxiliary cut walls.
AlgebraMap identity_map(const StalkAlgebra& S);

}  // namespace hmx::beilinson
