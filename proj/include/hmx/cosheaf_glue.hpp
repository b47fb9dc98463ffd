#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "hmx/arrangement.hpp"
#include "hmx/beilinson.hpp"
#include "hmx/ncalg.hpp"

namespace hmx::glue {

using beilinson::Flavor;
using ncalg::AlgebraMap;
using ncalg::Element;
using ncalg::Presentation;

/// Cover lookup by (lower face, wall, side).
using CoverKey = std::tuple<std::size_t, std::size_t, int>;
std::map<CoverKey, std::size_t> cover_index(const arrangement::FacePoset& poset);

/// A lifted codim-2 square: lower face with two released walls, and the four covers
/// lower <- a <- upper and lower <- b <- upper.
struct Square {
  std::size_t lower = 0;
  std::size_t upper = 0;
  std::size_t wall_a = 0, wall_b = 0;
  int side_a = 0, side_b = 0;
  std::size_t cover_a = 0, cover_a_up = 0;  // lower <- a, a <- upper
  std::size_t cover_b = 0, cover_b_up = 0;
};
std::vector<Square> squares(const arrangement::FacePoset& poset);

struct AlgebraCosheaf {
  arrangement::FacePoset poset;
  Flavor flavor = Flavor::B;
  bool reduced = false;                           // produced by reduce_cosheaf
  std::vector<beilinson::StalkAlgebra> stalks;    // by face
  std::vector<Presentation> algebras;             // by face: the stalk, or its reduction
  std::vector<AlgebraMap> corestrictions;         // by cover index, upper -> lower

  bool central_structure() const { return flavor == Flavor::B && !reduced; }
  Element central(std::size_t face, const IntVec& ell) const;
};

/// Stalks and corestrictions over the face poset; throws FunctorialityFailure on a square whose two
/// composites differ in normal form (computed up to degree D).
AlgebraCosheaf build_cosheaf(const arrangement::FacePoset& poset, Flavor flavor, int D = 6);

/// Functoriality and central compatibility, report-valued.
ValidationReport check_cosheaf(const AlgebraCosheaf& cosheaf, int D);

struct CellComplex {
  arrangement::FacePoset cells;  // families: the arrangement's, then one cut family per coordinate
  std::size_t arrangement_families = 0;
  RatVec shift;
  std::vector<std::size_t> tag;  // cell -> arrangement face

  bool is_cut(std::size_t wall) const { return wall >= arrangement_families; }
};

/// Adds the walls u_j = shift_j; throws NonTransverseCut when they are not in general position.
CellComplex refine_cells(const arrangement::FacePoset& poset, const RatVec& shift);
/// Tries 1/2, 1/3, 2/5, 3/7, ... in every coordinate until refine_cells succeeds.
CellComplex refine_cells_auto(const arrangement::FacePoset& poset);

struct Connector {
  std::size_t cover = 0;  // cell cover
  ncalg::Vertex upper_vertex = 0;
  ncalg::Gen gen = 0;     // in the quiver; gen + 1 is its inverse
};

struct GlobalAlgebra {
  Presentation quiver;
  std::vector<ncalg::Vertex> vertex_base;  // by cell
  std::vector<ncalg::Gen> gen_base;        // by cell
  std::vector<Connector> connectors;
  ncalg::Collapse collapse;
  std::vector<Element> central;  // flavor B: glued images of the coordinate vectors, in the collapsed algebra

  const Presentation& collapsed() const { return collapse.pres; }
  /// A stalk element of `cell` written in the quiver.
  Element lift(std::size_t cell, const Element& e) const;
};

GlobalAlgebra global_algebra(const AlgebraCosheaf& cosheaf, const CellComplex& cells);

/// Stalkwise quotient by central_embed(e_j) - 1.
AlgebraCosheaf reduce_cosheaf(const AlgebraCosheaf& cosheaf, int D = 6);

/// Reduction of the collapsed B-flavor global algebra by its glued central elements.
Presentation reduce_global(const GlobalAlgebra& g, int D);

struct ReductionReport : ValidationReport {
  int degree = 0;
  std::vector<std::size_t> dims_reduced_cosheaf;  // global algebra of the reduced cosheaf
  std::vector<std::size_t> dims_reduced_global;   // reduction of the global algebra
  std::vector<std::size_t> dims_b0;               // global algebra of the B0 cosheaf
  std::vector<std::string> notes;
};

ReductionReport verify_reduction_commutes(const arrangement::FacePoset& poset, const CellComplex& cells, int D);

/// Sends each stalk generator of a cell to the same stalk generator of the first cell of the other
/// complex with the same tag, and the k-th surviving connector to the k-th. Used to compare global
/// algebras built from different cut shifts.
AlgebraMap match_by_tag(const GlobalAlgebra& a, const CellComplex& ca, const GlobalAlgebra& b, const CellComplex& cb);

}  // namespace hmx::glue
