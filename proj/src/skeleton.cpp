#include "hmx/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include <boost/numeric/odeint.hpp>

namespace hmx::skeleton {

namespace {

constexpr FiberLabel kLabels[] = {FiberLabel::PlusPoint, FiberLabel::MinusPoint, FiberLabel::UpperArc,
                                  FiberLabel::LowerArc};

std::vector<FiberLabel> decode(std::size_t index, std::size_t c) {
  std::vector<FiberLabel> out(c);
  for (std::size_t i = c; i-- > 0;) {
    out[i] = kLabels[index % 4];
    index /= 4;
  }
  return out;
}

std::size_t encode(const std::vector<FiberLabel>& labels) {
  std::size_t index = 0;
  for (auto l : labels) index = 4 * index + static_cast<std::size_t>(l);
  return index;
}

std::size_t arcs(const std::vector<FiberLabel>& labels) {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), is_arc));
}

FiberLabel point(int side) { return side > 0 ? FiberLabel::PlusPoint : FiberLabel::MinusPoint; }

std::vector<std::size_t> walls_of(const arrangement::Face& f) {
  std::vector<std::size_t> w;
  for (const auto& [fam, m] : f.active) w.push_back(fam);
  return w;
}

}  // namespace

const char* to_string(FiberLabel l) {
  switch (l) {
    case FiberLabel::PlusPoint: return "plus_point";
    case FiberLabel::MinusPoint: return "minus_point";
    case FiberLabel::UpperArc: return "upper_arc";
    case FiberLabel::LowerArc: return "lower_arc";
  }
  return "?";
}

std::size_t AbstractSkeleton::find(std::size_t face, const std::vector<FiberLabel>& labels) const {
  return first_of_face.at(face) + encode(labels);
}

AbstractSkeleton build_skeleton(const arrangement::FacePoset& poset) {
  auto gen = arrangement::genericity_check(poset.arrangement());
  if (!gen.passed()) throw Error(ErrorKind::NonGenericArrangement, gen.failures.front());
  AbstractSkeleton S;
  S.poset = poset;
  for (std::size_t f = 0; f < poset.faces().size(); ++f) {
    const auto& face = poset.faces()[f];
    S.first_of_face.push_back(S.strata.size());
    const std::size_t c = face.codim();
    std::size_t count = 1;
    for (std::size_t i = 0; i < c; ++i) count *= 4;
    for (std::size_t k = 0; k < count; ++k) {
      auto labels = decode(k, c);
      S.strata.push_back({f, labels, face.dim + arcs(labels)});
    }
  }
  // Arcs close up onto both attaching points.
  for (std::size_t s = 0; s < S.strata.size(); ++s) {
    const auto& st = S.strata[s];
    auto walls = walls_of(poset.faces()[st.face]);
    for (std::size_t i = 0; i < st.labels.size(); ++i) {
      if (!is_arc(st.labels[i])) continue;
      for (int side : {1, -1}) {
        auto lower = st.labels;
        lower[i] = point(side);
        S.incidences.push_back({s, S.find(st.face, lower), walls[i], std::nullopt});
      }
    }
  }
  // Approaching a wall from one side lands on that side's attaching point.
  const auto& covers = poset.covers();
  for (std::size_t k = 0; k < covers.size(); ++k) {
    const auto& cv = covers[k];
    auto uw = walls_of(poset.faces()[cv.upper]);
    auto lw = walls_of(poset.faces()[cv.lower]);
    const std::size_t first = S.first_of_face[cv.upper];
    const std::size_t count = (cv.upper + 1 < S.first_of_face.size() ? S.first_of_face[cv.upper + 1] : S.strata.size()) - first;
    for (std::size_t k2 = 0; k2 < count; ++k2) {
      const auto& up = S.strata[first + k2];
      std::vector<FiberLabel> lower;
      for (auto w : lw) {
        if (w == cv.wall) {
          lower.push_back(point(cv.side));
        } else {
          auto pos = std::find(uw.begin(), uw.end(), w) - uw.begin();
          lower.push_back(up.labels[static_cast<std::size_t>(pos)]);
        }
      }
      S.incidences.push_back({first + k2, S.find(cv.lower, lower), cv.wall, k});
    }
  }
  return S;
}

long euler_characteristic(const AbstractSkeleton& skel, const glue::CellComplex& cells) {
  long chi = 0;
  for (std::size_t i = 0; i < cells.cells.faces().size(); ++i) {
    const auto& cell = cells.cells.faces()[i];
    const std::size_t c = skel.poset.faces()[cells.tag[i]].codim();
    std::size_t count = 1;
    for (std::size_t j = 0; j < c; ++j) count *= 4;
    for (std::size_t k = 0; k < count; ++k) chi += ((cell.dim + arcs(decode(k, c))) % 2 == 0) ? 1 : -1;
  }
  return chi;
}

long euler_characteristic(const AbstractSkeleton& skel) {
  return euler_characteristic(skel, glue::refine_cells_auto(skel.poset));
}

long euler_inclusion_exclusion(const arrangement::PeriodicArrangement& arr) {
  const std::size_t n = arr.families.size(), d = arr.d;
  if (d == 0 || n < d) return 0;
  Int total = 0;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(d), true);
  do {
    lattice::IntMatrix M(d, d);
    std::size_t row = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (pick[i]) {
        for (std::size_t j = 0; j < d; ++j) M(row, j) = arr.families[i].alpha[j];
        ++row;
      }
    total += abs(lattice::determinant(M));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  long v = total.get_si();
  return d % 2 == 0 ? v : -v;
}

namespace {

// Elements of the one-dimensional star: the label itself, or the ray on a side.
struct ModelElement {
  bool ray = false;
  int side = 0;
  FiberLabel label = FiberLabel::PlusPoint;

  auto operator<=>(const ModelElement&) const = default;
};

// In the star of a point, the point lies below the ray on its side and both arcs.
bool model_leq(const ModelElement& a, const ModelElement& b) {
  if (a == b) return true;
  return !a.ray && !is_arc(a.label);
}

}  // namespace

ValidationReport local_model_check(const AbstractSkeleton& skel, std::size_t stratum) {
  ValidationReport rep;
  const auto& base = skel.strata[stratum];
  const auto walls = walls_of(skel.poset.faces()[base.face]);
  std::multimap<std::size_t, const Incidence*> above;
  for (const auto& inc : skel.incidences) above.emplace(inc.lower, &inc);

  using Released = std::vector<std::pair<std::size_t, int>>;
  using Node = std::pair<std::size_t, Released>;
  std::map<Node, std::size_t> id;
  std::vector<Node> nodes;
  std::vector<std::vector<std::size_t>> up;
  auto intern = [&](const Node& n) {
    auto [it, fresh] = id.try_emplace(n, nodes.size());
    if (fresh) {
      nodes.push_back(n);
      up.emplace_back();
    }
    return it->second;
  };
  intern({stratum, {}});
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node cur = nodes[i];
    auto [lo, hi] = above.equal_range(cur.first);
    for (auto it = lo; it != hi; ++it) {
      const auto& inc = *it->second;
      Released r = cur.second;
      if (inc.base_cover) {
        r.emplace_back(inc.wall, skel.poset.covers()[*inc.base_cover].side);
        std::sort(r.begin(), r.end());
      }
      std::size_t j = intern({inc.upper, r});
      up[i].push_back(j);
    }
  }

  // Coordinates of each star element in the product model.
  std::vector<std::vector<ModelElement>> coord(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& [s, released] = nodes[i];
    const auto& st = skel.strata[s];
    const auto sw = walls_of(skel.poset.faces()[st.face]);
    for (auto w : walls) {
      auto rel = std::find_if(released.begin(), released.end(), [&](const auto& p) { return p.first == w; });
      if (rel != released.end()) {
        coord[i].push_back({true, rel->second, FiberLabel::PlusPoint});
        continue;
      }
      auto pos = std::find(sw.begin(), sw.end(), w);
      if (pos == sw.end()) {
        rep.fail("wall " + std::to_string(w) + " disappears without being released");
        return rep;
      }
      coord[i].push_back({false, 0, st.labels[static_cast<std::size_t>(pos - sw.begin())]});
    }
    std::size_t expected_dim = base.dim;
    for (std::size_t k = 0; k < walls.size(); ++k)
      if (coord[i][k] != coord[0][k]) ++expected_dim;
    if (st.dim != expected_dim) rep.fail("star element " + std::to_string(s) + " has the wrong dimension");
  }

  // The model star: per wall, a point sees itself, its ray and both arcs; an arc sees itself.
  std::set<std::vector<ModelElement>> model{{}};
  for (std::size_t k = 0; k < walls.size(); ++k) {
    const auto l = base.labels[k];
    std::vector<ModelElement> opts{{false, 0, l}};
    if (!is_arc(l)) {
      opts.push_back({true, l == FiberLabel::PlusPoint ? 1 : -1, FiberLabel::PlusPoint});
      opts.push_back({false, 0, FiberLabel::UpperArc});
      opts.push_back({false, 0, FiberLabel::LowerArc});
    }
    std::set<std::vector<ModelElement>> next;
    for (const auto& m : model)
      for (const auto& o : opts) {
        auto v = m;
        v.push_back(o);
        next.insert(v);
      }
    model = std::move(next);
  }
  std::set<std::vector<ModelElement>> seen(coord.begin(), coord.end());
  if (seen.size() != coord.size()) rep.fail("two star elements share model coordinates");
  if (seen != model)
    rep.fail("star has " + std::to_string(seen.size()) + " elements, the model " + std::to_string(model.size()));

  // Order: reachability against the product order.
  std::vector<std::vector<bool>> reach(nodes.size(), std::vector<bool>(nodes.size(), false));
  for (std::size_t i = nodes.size(); i-- > 0;) {
    reach[i][i] = true;
    std::vector<std::size_t> stack(up[i].begin(), up[i].end());
    while (!stack.empty()) {
      auto j = stack.back();
      stack.pop_back();
      if (reach[i][j]) continue;
      reach[i][j] = true;
      stack.insert(stack.end(), up[j].begin(), up[j].end());
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      bool leq = true;
      for (std::size_t k = 0; k < walls.size(); ++k) leq = leq && model_leq(coord[i][k], coord[j][k]);
      if (leq != reach[i][j]) {
        rep.fail("order mismatch in the star of stratum " + std::to_string(stratum));
        return rep;
      }
    }
  return rep;
}

MicrosheafCosheaf attach_microsheaf_cosheaf(const AbstractSkeleton& skel, int D) {
  MicrosheafCosheaf M;
  M.cosheaf = glue::build_cosheaf(skel.poset, beilinson::Flavor::B0, D);
  for (std::size_t s = 0; s < skel.strata.size(); ++s) {
    const auto& st = skel.strata[s];
    const auto& stalk = M.cosheaf.stalks[st.face];
    DictionaryEntry e;
    e.stratum = s;
    e.face = st.face;
    std::vector<ncalg::Vertex> tuple(st.labels.size(), 0);
    for (std::size_t i = 0; i < st.labels.size(); ++i) {
      switch (st.labels[i]) {
        case FiberLabel::PlusPoint: e.factor_data.push_back("2"); tuple[i] = 1; break;
        case FiberLabel::MinusPoint: e.factor_data.push_back("1"); tuple[i] = 0; break;
        case FiberLabel::UpperArc: e.factor_data.push_back("x"); break;
        case FiberLabel::LowerArc: e.factor_data.push_back("y"); break;
      }
    }
    if (arcs(st.labels) == 0) {
      e.stalk_vertex = stalk.tensor.vertex_of(tuple);
    } else {
      const auto& P = stalk.pres();
      for (std::size_t i = 0; i < st.labels.size(); ++i) {
        if (!is_arc(st.labels[i])) continue;
        ncalg::Gen g = stalk.factors[i].at(e.factor_data[i]);
        for (ncalg::Gen lifted : stalk.tensor.gen_index[i][g]) {
          auto t = stalk.tensor.tuple_of(P.generators[lifted].src);
          bool match = true;
          for (std::size_t j = 0; j < st.labels.size(); ++j)
            if (j != i && !is_arc(st.labels[j])) match = match && t[j] == tuple[j];
          if (match) e.stalk_generators.push_back(P.generators[lifted].name);
        }
      }
    }
    M.dictionary.push_back(std::move(e));
  }
  return M;
}

ValidationReport check_dictionary(const MicrosheafCosheaf& m) {
  ValidationReport rep;
  const auto& stalks = m.cosheaf.stalks;
  std::vector<std::vector<int>> hit(stalks.size());
  for (std::size_t f = 0; f < stalks.size(); ++f) hit[f].assign(stalks[f].pres().vertices.size(), 0);
  for (const auto& e : m.dictionary) {
    if (e.stalk_vertex) {
      ++hit[e.face][*e.stalk_vertex];
    } else if (e.stalk_generators.empty()) {
      rep.fail("stratum " + std::to_string(e.stratum) + " names no arrow");
    }
  }
  for (std::size_t f = 0; f < hit.size(); ++f)
    for (std::size_t v = 0; v < hit[f].size(); ++v)
      if (hit[f][v] != 1)
        rep.fail("stalk vertex " + std::to_string(v) + " of face " + std::to_string(f) + " is hit " +
                 std::to_string(hit[f][v]) + " times");
  return rep;
}

double eta(const FlowParams& p, double r) {
  const double a = 1 + p.epsilon, b = 2 - p.epsilon;
  if (r <= a) return 0;
  if (r >= b) return 1;
  const double u = (r - a) / (b - a);
  return u * u * (3 - 2 * u);
}

double eta_prime(const FlowParams& p, double r) {
  const double a = 1 + p.epsilon, b = 2 - p.epsilon;
  if (r <= a || r >= b) return 0;
  const double u = (r - a) / (b - a);
  return 6 * u * (1 - u) / (b - a);
}

namespace {

// F = A + c B.
std::pair<double, double> F_parts(const FlowParams& p, double r, double theta) {
  const double e = eta(p, r), ep = eta_prime(p, r), s = std::sin(theta);
  return {r * e + ep * r * r * s * s, (1 - e) / r - ep * std::log(r)};
}

}  // namespace

double liouville_F(const FlowParams& p, double r, double theta) {
  auto [a, b] = F_parts(p, r, theta);
  return a + p.c * b;
}

std::pair<double, double> liouville_field(const FlowParams& p, double r, double theta) {
  const double e = eta(p, r), s = std::sin(theta), co = std::cos(theta);
  const double lam_theta = -r * r * s * s * e - p.c * std::log(r) * (1 - e);
  const double lam_r = r * s * co * e;
  const double F = liouville_F(p, r, theta);
  return {lam_theta / F, -lam_r / F};
}

namespace {

double grid_min(const FlowParams& p, std::size_t n, double r_min, double r_max, double c, int region) {
  double best = std::numeric_limits<double>::infinity();
  const double a = 1 + p.epsilon, b = 2 - p.epsilon;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = r_min + (r_max - r_min) * static_cast<double>(i) / static_cast<double>(n - 1);
    if ((region < 0 && r > a) || (region > 0 && r < b)) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const double th = 2 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      auto [A, B] = F_parts(p, r, th);
      best = std::min(best, A + c * B);
    }
  }
  return best;
}

}  // namespace

double admissible_c(const FlowParams& params, std::size_t resolution) {
  auto positive = [&](double c) { return grid_min(params, resolution, 0.25, 3.0, c, 0) > 0; };
  double hi = 1e6;
  if (positive(hi)) return hi;
  double lo = 1.0;
  while (!positive(lo)) {
    hi = lo;
    lo /= 2;
    if (lo < 1e-300) return 0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (positive(mid) ? lo : hi) = mid;
  }
  return lo;
}

LiouvilleReport liouville_check_2d(const FlowParams& params, std::size_t resolution, double r_min, double r_max) {
  LiouvilleReport rep;
  rep.epsilon = params.epsilon;
  rep.resolution = resolution;
  rep.r_min = r_min;
  rep.r_max = r_max;
  rep.c_threshold = admissible_c(params, resolution);
  rep.c = params.c > 0 ? params.c : rep.c_threshold / 2;
  rep.min_F = grid_min(params, resolution, r_min, r_max, rep.c, 0);
  rep.min_F_inner = grid_min(params, resolution, r_min, r_max, rep.c, -1);
  rep.min_F_outer = grid_min(params, resolution, r_min, r_max, rep.c, 1);
  rep.positive = rep.min_F > 0;
  return rep;
}

const char* to_string(Limit l) {
  switch (l) {
    case Limit::RayPlus: return "ray+";
    case Limit::RayMinus: return "ray-";
    case Limit::Circle: return "circle";
    case Limit::NotConverged: return "not_converged";
  }
  return "?";
}

namespace {

double ray_distance(double r, double theta) {
  const double x = std::abs(r * std::cos(theta)), y = std::abs(r * std::sin(theta));
  return x >= 1 ? y : std::hypot(x - 1, y);
}

}  // namespace

double distance_to_skeleton(double r, double theta) { return std::min(std::abs(r - 1), ray_distance(r, theta)); }

std::vector<FlowResult> flow_to_skeleton(const FlowParams& params, const std::vector<std::pair<double, double>>& points,
                                         bool keep_trajectories) {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 2>;
  FlowParams p = params;
  if (p.c <= 0) p.c = admissible_c(p, 400) / 2;
  auto rhs = [&](const State& x, State& dx, double) {
    auto [dr, dth] = liouville_field(p, x[0], x[1]);
    dx = {dr, dth};
  };
  std::vector<FlowResult> out;
  for (const auto& [r0, th0] : points) {
    FlowResult res;
    res.r0 = r0;
    res.theta0 = th0;
    const bool on_axis = std::sin(th0) == 0.0;
    auto stepper = ode::make_controlled(p.abs_tolerance, p.rel_tolerance, ode::runge_kutta_dopri5<State>());
    State x{r0, th0};
    double t = 0, dt = 1e-3;
    double last = distance_to_skeleton(r0, th0);
    if (keep_trajectories) res.trajectory.push_back({t, x[0], x[1]});
    while (t < p.max_time) {
      dt = std::min({dt, 1.0, p.max_time - t});
      if (stepper.try_step(rhs, x, t, dt) != ode::success) {
        if (dt < 1e-14) throw Error(ErrorKind::StepFailure, "step size underflow at t = " + std::to_string(t));
        continue;
      }
      if (x[0] <= 0) throw Error(ErrorKind::StepFailure, "trajectory reached the origin");
      if (keep_trajectories) res.trajectory.push_back({t, x[0], x[1]});
      if (on_axis) res.max_axis_drift = std::max(res.max_axis_drift, std::abs(x[0] * std::sin(x[1])));
      const double dist = distance_to_skeleton(x[0], x[1]);
      if (x[0] < 2 - p.epsilon && dist > last + 1e-9) res.monotone = false;
      last = dist;
      auto [dr, dth] = liouville_field(p, x[0], x[1]);
      if (std::hypot(dr, x[0] * dth) < p.velocity_threshold) break;
    }
    res.r = x[0];
    res.theta = x[1];
    res.time = t;
    res.distance = distance_to_skeleton(x[0], x[1]);
    if (res.distance <= p.hausdorff_tolerance) {
      if (std::abs(x[0] - 1) <= ray_distance(x[0], x[1]))
        res.limit = Limit::Circle;
      else
        res.limit = std::cos(x[1]) > 0 ? Limit::RayPlus : Limit::RayMinus;
    }
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace hmx::skeleton
