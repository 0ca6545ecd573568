#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "obusim/types.hpp"

namespace obusim {

/// Uniform square-cell index over one tick's vehicles, rebuilt every tick.
///
/// The grid covers the bounding box of all positions plus a ring of two empty
/// margin cells on every side, so the 3x3 neighbourhood of any occupied cell
/// is always addressable, including for slightly negative coordinates. Cells
/// are stored compressed (CSR): one contiguous run of states per cell.
///
/// Queries inspect the query cell and its eight neighbours, which is exact
/// only while radius <= cell_size; larger radii are rejected.
class GridIndex {
 public:
  using CellCoord = std::array<std::int64_t, 2>;
  static constexpr std::int64_t kMargin = 2;

  GridIndex() = default;

  /// O(N) counting-sort build. Throws ConfigError for cell_size <= 0 or when
  /// the extent would need an unreasonable number of cells.
  static GridIndex rebuild(std::span<const VehicleState> states, double cell_size);

  double cell_size() const noexcept { return cell_size_; }
  const Eigen::Vector2d& origin() const noexcept { return origin_; }
  std::int64_t columns() const noexcept { return nx_; }
  std::int64_t rows() const noexcept { return ny_; }
  std::size_t size() const noexcept { return entries_.size(); }

  CellCoord cell_of(double x, double y) const noexcept;
  /// Number of cells holding at least one vehicle.
  std::size_t occupied_cells() const noexcept;
  std::span<const VehicleState> cell(CellCoord c) const;

  const VehicleState* find(VehicleId id) const noexcept;
  /// Throws NotFoundError.
  const VehicleState& at(VehicleId id) const;

  /// Vehicles other than `ego` within `radius` (inclusive) of ego, by id.
  std::vector<VehicleState> get_nearby_vehicles(VehicleId ego, double radius) const;

  /// Cells a query centred at (x, y) inspects; never more than nine.
  std::vector<CellCoord> candidate_cells(double x, double y) const;

  /// Calls fn(const VehicleState&) for every vehicle within `radius` of
  /// (x, y) except `exclude`, in unspecified order. No radius checks.
  template <typename Fn>
  void for_each_within(double x, double y, double radius, VehicleId exclude, Fn&& fn) const {
    if (entries_.empty()) return;
    const auto c = cell_of(x, y);
    const double r2 = radius * radius;
    const auto x0 = std::max<std::int64_t>(c[0] - 1, 0), x1 = std::min<std::int64_t>(c[0] + 1, nx_ - 1);
    const auto y0 = std::max<std::int64_t>(c[1] - 1, 0), y1 = std::min<std::int64_t>(c[1] + 1, ny_ - 1);
    for (auto cy = y0; cy <= y1; ++cy) {
      for (auto cx = x0; cx <= x1; ++cx) {
        const auto k = static_cast<std::size_t>(cy * nx_ + cx);
        for (auto i = offsets_[k]; i < offsets_[k + 1]; ++i) {
          const auto& s = entries_[i];
          if (s.id == exclude) continue;
          const double dx = s.x - x, dy = s.y - y;
          if (dx * dx + dy * dy <= r2) fn(s);
        }
      }
    }
  }

 private:
  double cell_size_ = 1.0;
  Eigen::Vector2d origin_ = Eigen::Vector2d::Zero();
  std::int64_t nx_ = 0;
  std::int64_t ny_ = 0;
  std::vector<std::uint32_t> offsets_;
  std::vector<VehicleState> entries_;
  std::unordered_map<VehicleId, std::uint32_t> slot_;
};

}  // namespace obusim
