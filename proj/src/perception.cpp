#include "obusim/perception.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "obusim/errors.hpp"

namespace obusim {
namespace {

constexpr double kPi = std::numbers::pi;

struct PieceSet {
  std::array<AngularPiece, 2> items;
  std::size_t count = 0;

  std::span<const AngularPiece> view() const { return {items.data(), count}; }
};

PieceSet box_piece_set(const ProjectionView& v) {
  PieceSet s;
  if (v.box_wraps()) {
    s.items[s.count++] = {v.delta1, kPi, true, true};
    s.items[s.count++] = {-kPi, v.delta2, true, true};
  } else {
    s.items[s.count++] = {v.delta1, v.delta2, true, true};
  }
  return s;
}

PieceSet plate_piece_set(const ProjectionView& v) {
  PieceSet s;
  if (v.plate_wraps()) {
    s.items[s.count++] = {v.rho1, kPi, false, true};
    s.items[s.count++] = {-kPi, v.rho2, true, false};
  } else {
    s.items[s.count++] = {v.rho1, v.rho2, false, false};
  }
  return s;
}

// Min/max of the arguments of `points`, with the seam encoding of
// ProjectionView when the points straddle the -x axis. The points are never
// spread over more than pi since the shape excludes the origin.
template <std::size_t N>
std::array<double, 2> angular_range(const std::array<Vec2<double>, N>& points) {
  std::array<double, N> a;
  for (std::size_t i = 0; i < N; ++i) a[i] = arg(points[i]);
  const auto [mn, mx] = std::minmax_element(a.begin(), a.end());
  if (*mx - *mn <= kPi) return {*mn, *mx};
  // Crossing the seam: start at the smallest non-negative argument, end at
  // the largest negative one.
  double start = kPi, end = -kPi;
  for (double x : a) {
    if (x >= 0.0) start = std::min(start, x);
    else end = std::max(end, x);
  }
  return {start, end};
}

}  // namespace

void PerceptionConfig::validate() const {
  if (!(fov_half_angle > 0.0 && fov_half_angle <= kPi / 2.0)) {
    throw ConfigError("fov_half_angle must lie in (0, pi/2]");
  }
  if (!(max_range > 0.0)) throw ConfigError("max_range must be positive");
  if (!(max_plate_angle > 0.0)) throw ConfigError("max_plate_angle must be positive");
  if (!(plate_width > 0.0)) throw ConfigError("plate_width must be positive");
}

std::vector<AngularPiece> box_pieces(const ProjectionView& v) {
  auto s = box_piece_set(v);
  return {s.view().begin(), s.view().end()};
}

std::vector<AngularPiece> plate_pieces(const ProjectionView& v) {
  auto s = plate_piece_set(v);
  return {s.view().begin(), s.view().end()};
}

bool fov_relevant(std::span<const Vec2<double>, 4> corners, const PerceptionConfig& cfg) {
  const double r2 = cfg.max_range * cfg.max_range;
  return std::any_of(corners.begin(), corners.end(), [&](const Vec2<double>& c) {
    return std::abs(arg(c)) <= cfg.fov_half_angle && c.squaredNorm() <= r2;
  });
}

BoundingBox<double> normalize_heading(const BoundingBox<double>& box) {
  if (std::abs(box.heading) <= kPi / 2.0) return box;
  const Vec2<double> twice_center = box.g + box.f;
  BoundingBox<double> out;
  out.corners = {box.corners[2], box.corners[3], box.corners[0], box.corners[1]};
  out.g = box.f;
  out.f = box.g;
  out.m = twice_center - box.m;
  out.n = twice_center - box.n;
  out.heading = normalize_angle(box.heading + kPi);
  return out;
}

ProjectionView projection_angles(const BoundingBox<double>& box, VehicleId id) {
  if (box_contains(box, Vec2<double>(Vec2<double>::Zero()))) {
    throw DegenerateGeometry("vehicle box contains the camera origin");
  }
  ProjectionView v;
  v.id = id;
  const auto delta = angular_range(box.corners);
  const auto rho = angular_range(std::array<Vec2<double>, 2>{box.m, box.n});
  v.delta1 = delta[0];
  v.delta2 = delta[1];
  v.rho1 = rho[0];
  v.rho2 = rho[1];
  v.dist_g = box.g.norm();
  v.heading = box.heading;
  return v;
}

CoverageTree::CoverageTree(std::size_t slots)
    : n_(slots), full_(4 * std::max<std::size_t>(slots, 1), 0), some_(full_.size(), 0) {}

void CoverageTree::cover(std::size_t lo, std::size_t hi) {
  if (lo > hi || n_ == 0) return;
  cover(1, 0, n_ - 1, lo, std::min(hi, n_ - 1));
}

bool CoverageTree::any_covered(std::size_t lo, std::size_t hi) const {
  if (lo > hi || n_ == 0) return false;
  return any(1, 0, n_ - 1, lo, std::min(hi, n_ - 1));
}

void CoverageTree::cover(std::size_t node, std::size_t l, std::size_t r, std::size_t lo,
                         std::size_t hi) {
  if (full_[node] || hi < l || r < lo) return;
  some_[node] = 1;
  if (lo <= l && r <= hi) {
    full_[node] = 1;
    return;
  }
  const std::size_t mid = l + (r - l) / 2;
  cover(2 * node, l, mid, lo, hi);
  cover(2 * node + 1, mid + 1, r, lo, hi);
  full_[node] = full_[2 * node] && full_[2 * node + 1];
}

bool CoverageTree::any(std::size_t node, std::size_t l, std::size_t r, std::size_t lo,
                       std::size_t hi) const {
  if (hi < l || r < lo || !some_[node]) return false;
  if (full_[node] || (lo <= l && r <= hi)) return true;
  const std::size_t mid = l + (r - l) / 2;
  return any(2 * node, l, mid, lo, hi) || any(2 * node + 1, mid + 1, r, lo, hi);
}

std::vector<ProjectionView> get_visible_lines(std::span<const ProjectionView> candidates) {
  if (candidates.empty()) return {};
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].dist_g < candidates[i - 1].dist_g) {
      throw ContractViolation("get_visible_lines: candidates not sorted by distance (index " +
                              std::to_string(i) + ")");
    }
  }

  std::vector<PieceSet> boxes, plates;
  boxes.reserve(candidates.size());
  plates.reserve(candidates.size());
  std::vector<double> coords;
  coords.reserve(candidates.size() * 8);
  for (const auto& c : candidates) {
    boxes.push_back(box_piece_set(c));
    plates.push_back(plate_piece_set(c));
    for (const auto* set : {&boxes.back(), &plates.back()}) {
      for (const auto& p : set->view()) {
        coords.push_back(p.lo);
        coords.push_back(p.hi);
      }
    }
  }
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

  // Slot 2i is the point coords[i]; slot 2i+1 the open gap after it.
  auto rank = [&](double x) {
    return static_cast<std::ptrdiff_t>(std::lower_bound(coords.begin(), coords.end(), x) -
                                       coords.begin());
  };
  auto slots = [&](const AngularPiece& p) -> std::array<std::ptrdiff_t, 2> {
    return {2 * rank(p.lo) + (p.lo_closed ? 0 : 1), 2 * rank(p.hi) - (p.hi_closed ? 0 : 1)};
  };

  CoverageTree covered(2 * coords.size() - 1);
  std::vector<ProjectionView> visible;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    bool hidden = false;
    for (const auto& p : plates[i].view()) {
      const auto [a, b] = slots(p);
      if (a <= b && covered.any_covered(static_cast<std::size_t>(a), static_cast<std::size_t>(b))) {
        hidden = true;
        break;
      }
    }
    if (i == 0 || !hidden) visible.push_back(candidates[i]);
    for (const auto& p : boxes[i].view()) {
      const auto [a, b] = slots(p);
      if (a <= b) covered.cover(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    }
  }
  return visible;
}

bool heading_visible(double heading_cam, const PerceptionConfig& cfg) {
  return std::abs(heading_cam) <= cfg.max_plate_angle;
}

std::vector<PerceivedObject> perceive(const VehicleState& ego,
                                      std::span<const VehicleState> neighbors,
                                      const PerceptionConfig& cfg, Tick tick) {
  const auto cam = CameraPose<double>::of(ego);
  struct Candidate {
    ProjectionView view;
    const VehicleState* truth;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(neighbors.size());
  for (const auto& other : neighbors) {
    if (other.id == ego.id) continue;
    const auto box = to_camera_frame(cam, reconstruct_box(other, cfg.plate_width));
    if (!fov_relevant(std::span<const Vec2<double>, 4>(box.corners), cfg)) continue;
    const auto facing = normalize_heading(box);
    // A box around the camera means the trace has overlapping vehicles; such
    // a box has no meaningful projection and is left out.
    if (box_contains(facing, Vec2<double>(Vec2<double>::Zero()))) continue;
    candidates.push_back({projection_angles(facing, other.id), &other});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.view.dist_g != b.view.dist_g ? a.view.dist_g < b.view.dist_g : a.view.id < b.view.id;
  });

  std::vector<ProjectionView> views;
  views.reserve(candidates.size());
  for (const auto& c : candidates) views.push_back(c.view);
  const auto visible = get_visible_lines(views);

  std::vector<PerceivedObject> out;
  out.reserve(visible.size());
  std::size_t cursor = 0;
  for (const auto& v : visible) {
    while (candidates[cursor].view.id != v.id) ++cursor;
    if (!heading_visible(v.heading, cfg)) continue;
    const auto& t = *candidates[cursor].truth;
    out.push_back({t.id, t.x, t.y, t.heading, tick});
  }
  return out;
}

}  // namespace obusim
