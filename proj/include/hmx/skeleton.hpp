#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hmx/arrangement.hpp"
#include "hmx/cosheaf_glue.hpp"

namespace hmx::skeleton {

/// Position in the circle fiber over a wall: the two attaching points and the two arcs between them.
enum class FiberLabel { PlusPoint, MinusPoint, UpperArc, LowerArc };

const char* to_string(FiberLabel l);
inline bool is_arc(FiberLabel l) { return l == FiberLabel::UpperArc || l == FiberLabel::LowerArc; }

struct Stratum {
  std::size_t face = 0;
  std::vector<FiberLabel> labels;  // one per active wall of the face, in family order
  std::size_t dim = 0;
};

/// `upper` contains `lower` in its closure and is one dimension higher. Either an arc closes up onto
/// a point over the same face (`base_cover` empty) or a stratum over a shallower face approaches a
/// wall from one side.
struct Incidence {
  std::size_t upper = 0;
  std::size_t lower = 0;
  std::size_t wall = 0;
  std::optional<std::size_t> base_cover;
};

struct AbstractSkeleton {
  arrangement::FacePoset poset;
  std::vector<Stratum> strata;
  std::vector<Incidence> incidences;
  std::vector<std::size_t> first_of_face;  // strata of face f start here, 4^c of them

  std::size_t find(std::size_t face, const std::vector<FiberLabel>& labels) const;
  std::size_t projection(std::size_t stratum) const { return strata[stratum].face; }
};

AbstractSkeleton build_skeleton(const arrangement::FacePoset& poset);

/// Alternating count of strata over the cells of the refinement.
long euler_characteristic(const AbstractSkeleton& skel, const glue::CellComplex& cells);
long euler_characteristic(const AbstractSkeleton& skel);
/// -chi of the union of walls by inclusion-exclusion over point intersections: (-1)^d sum |det alpha_I|.
long euler_inclusion_exclusion(const arrangement::PeriodicArrangement& arr);

/// The star of the stratum, built by walking incidences upward, compared with the product of the
/// stars in the one-dimensional local model (a point sees one ray and both arcs, an arc sees itself).
ValidationReport local_model_check(const AbstractSkeleton& skel, std::size_t stratum);

struct DictionaryEntry {
  std::size_t stratum = 0;
  std::size_t face = 0;
  /// Per active wall: the B0 node for a point label ("1" for minus, "2" for plus) or the arrow for an
  /// arc ("x" for upper, "y" for lower).
  std::vector<std::string> factor_data;
  std::optional<ncalg::Vertex> stalk_vertex;  // for strata made of points only
  std::vector<std::string> stalk_generators;  // tensor generators named by the arcs, at any node
};

struct MicrosheafCosheaf {
  glue::AlgebraCosheaf cosheaf;
  std::vector<DictionaryEntry> dictionary;
};

MicrosheafCosheaf attach_microsheaf_cosheaf(const AbstractSkeleton& skel, int D = 6);
/// Every stratum has an entry; point strata cover the stalk vertices bijectively.
ValidationReport check_dictionary(const MicrosheafCosheaf& m);

struct FlowParams {
  double epsilon = 0.1;
  double c = 0.0;  // 0 means: half the bisected threshold
  double rel_tolerance = 1e-9;
  double abs_tolerance = 1e-12;
  double max_time = 200.0;
  double velocity_threshold = 1e-8;
  double hausdorff_tolerance = 1e-3;
};

double eta(const FlowParams& p, double r);
double eta_prime(const FlowParams& p, double r);
double liouville_F(const FlowParams& p, double r, double theta);
/// (dr/dt, dtheta/dt) of the downward field F^-1 lambda_theta d_r - F^-1 lambda_r d_theta.
std::pair<double, double> liouville_field(const FlowParams& p, double r, double theta);

struct LiouvilleReport {
  double epsilon = 0;
  double c = 0;
  std::size_t resolution = 0;
  double r_min = 0, r_max = 0;
  double min_F = 0;
  double min_F_inner = 0, min_F_outer = 0;  // over r <= 1+eps and r >= 2-eps
  double c_threshold = 0;                   // largest c with min F > 0, by bisection
  bool positive = false;
};

/// Grid over r in [r_min, r_max] and theta in [0, 2 pi). When params.c is 0 the c used is half the
/// bisected threshold.
LiouvilleReport liouville_check_2d(const FlowParams& params, std::size_t resolution, double r_min = 0.25,
                                   double r_max = 3.0);
double admissible_c(const FlowParams& params, std::size_t resolution);

enum class Limit { RayPlus, RayMinus, Circle, NotConverged };
const char* to_string(Limit l);

/// Distance in the plane to (-inf,-1] u C_1 u [1,inf).
double distance_to_skeleton(double r, double theta);

struct FlowResult {
  double r0 = 0, theta0 = 0;
  double r = 0, theta = 0;
  double time = 0;
  double distance = 0;
  double max_axis_drift = 0;  // |y| along the path, for starting points on the axis
  bool monotone = true;       // distance non-increasing once inside r < 2 - eps
  Limit limit = Limit::NotConverged;
  std::vector<std::array<double, 3>> trajectory;  // (t, r, theta), when requested
};

std::vector<FlowResult> flow_to_skeleton(const FlowParams& params, const std::vector<std::pair<double, double>>& points,
                                         bool keep_trajectories = false);

}  // namespace hmx::skeleton
