#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "obusim/geometry.hpp"
#include "obusim/types.hpp"

namespace obusim {

struct PerceptionConfig {
  double fov_half_angle = std::numbers::pi / 4.0;
  double max_range = 100.0;
  /// Plates turned further than this from the camera axis are unreadable.
  double max_plate_angle = std::numbers::pi / 3.0;
  double plate_width = 0.52;

  /// Throws ConfigError.
  void validate() const;
};

/// A candidate reduced to angular intervals in the camera frame.
///
/// [delta1, delta2] is the angular extent of the box and (rho1, rho2) that of
/// the plate. When a box straddles the -x axis its extent crosses the +-pi
/// seam; this is stored with delta1 > delta2 and means
/// [delta1, pi] u [-pi, delta2]. The plate uses the same encoding.
struct ProjectionView {
  VehicleId id = 0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double dist_g = 0.0;
  /// Camera-frame heading after normalisation, |heading| <= pi/2.
  double heading = 0.0;

  bool box_wraps() const noexcept { return delta1 > delta2; }
  bool plate_wraps() const noexcept { return rho1 > rho2; }

  friend bool operator==(const ProjectionView&, const ProjectionView&) = default;
};

/// A piece of the flattened [-pi, pi] line with per-endpoint closedness.
struct AngularPiece {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = true;
};

/// Closed pieces covered by the vehicle box (one or two).
std::vector<AngularPiece> box_pieces(const ProjectionView& v);
/// Open plate pieces; across the seam the +-pi point itself is interior.
std::vector<AngularPiece> plate_pieces(const ProjectionView& v);

/// True iff at least one corner is inside the field of view and within range.
bool fov_relevant(std::span<const Vec2<double>, 4> corners, const PerceptionConfig& cfg);

/// Rotates the vehicle's role labels by pi when |heading| > pi/2 so the plate
/// and G always refer to the edge facing the camera.
BoundingBox<double> normalize_heading(const BoundingBox<double>& box);

/// Angular ranges of a camera-frame box. Throws DegenerateGeometry when the
/// box contains the camera.
ProjectionView projection_angles(const BoundingBox<double>& box, VehicleId id = 0);

/// Visible candidates among `candidates` (sorted ascending by dist_g): a
/// plate is visible when its open interval meets none of the closed box
/// intervals of the candidates before it. Discretised endpoints plus a
/// coverage segment tree, O(|C| log |C|). Throws ContractViolation on
/// unsorted input.
std::vector<ProjectionView> get_visible_lines(std::span<const ProjectionView> candidates);

bool heading_visible(double heading_cam, const PerceptionConfig& cfg);

/// The full camera pipeline for one ego vehicle. Returns the ground truth of
/// every vehicle whose plate is recognisable, nearest first.
std::vector<PerceivedObject> perceive(const VehicleState& ego,
                                      std::span<const VehicleState> neighbors,
                                      const PerceptionConfig& cfg, Tick tick = 0);

/// Range "any slot covered" queries over slots that only ever become covered.
class CoverageTree {
 public:
  explicit CoverageTree(std::size_t slots);

  std::size_t size() const noexcept { return n_; }
  /// Marks slots [lo, hi] covered. Empty when lo > hi.
  void cover(std::size_t lo, std::size_t hi);
  /// True iff some slot in [lo, hi] is covered. False when lo > hi.
  bool any_covered(std::size_t lo, std::size_t hi) const;

 private:
  void cover(std::size_t node, std::size_t l, std::size_t r, std::size_t lo, std::size_t hi);
  bool any(std::size_t node, std::size_t l, std::size_t r, std::size_t lo, std::size_t hi) const;

  std::size_t n_;
  std::vector<unsigned char> full_;
  std::vector<unsigned char> some_;
};

}  // namespace obusim
