#include "obusim/grid_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "obusim/errors.hpp"

namespace obusim {
namespace {

constexpr std::int64_t kMaxCells = std::int64_t{1} << 26;

}  // namespace

GridIndex GridIndex::rebuild(std::span<const VehicleState> states, double cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw ConfigError("cell_size must be positive, got " + std::to_string(cell_size));
  }
  GridIndex g;
  g.cell_size_ = cell_size;
  if (states.empty()) {
    g.offsets_.assign(1, 0);
    return g;
  }

  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (const auto& s : states) {
    const Eigen::Vector2d p(s.x, s.y);
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  // Align the grid with the world lattice so cell boundaries do not move
  // with the bounding box.
  g.origin_ = ((lo / cell_size).array().floor() - kMargin).matrix() * cell_size;
  const Eigen::Vector2d span = ((hi - g.origin_) / cell_size).array().floor();
  if (!(span.maxCoeff() < static_cast<double>(kMaxCells))) {
    throw ConfigError("vehicle extent too large for cell_size " + std::to_string(cell_size));
  }
  g.nx_ = static_cast<std::int64_t>(span.x()) + 1 + kMargin;
  g.ny_ = static_cast<std::int64_t>(span.y()) + 1 + kMargin;
  if (g.nx_ * g.ny_ > kMaxCells) {
    throw ConfigError("vehicle extent too large for cell_size " + std::to_string(cell_size));
  }

  const auto ncells = static_cast<std::size_t>(g.nx_ * g.ny_);
  std::vector<std::uint32_t> cell_of_state(states.size());
  g.offsets_.assign(ncells + 1, 0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto c = g.cell_of(states[i].x, states[i].y);
    const auto k = static_cast<std::uint32_t>(c[1] * g.nx_ + c[0]);
    cell_of_state[i] = k;
    ++g.offsets_[k + 1];
  }
  for (std::size_t k = 0; k < ncells; ++k) g.offsets_[k + 1] += g.offsets_[k];

  std::vector<std::uint32_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  g.entries_.resize(states.size());
  g.slot_.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto pos = cursor[cell_of_state[i]]++;
    g.entries_[pos] = states[i];
    if (!g.slot_.emplace(states[i].id, pos).second) {
      throw ValidationError("duplicate vehicle id " + std::to_string(states[i].id) + " in grid");
    }
  }
  return g;
}

GridIndex::CellCoord GridIndex::cell_of(double x, double y) const noexcept {
  return {static_cast<std::int64_t>(std::floor((x - origin_.x()) / cell_size_)),
          static_cast<std::int64_t>(std::floor((y - origin_.y()) / cell_size_))};
}

std::size_t GridIndex::occupied_cells() const noexcept {
  std::size_t n = 0;
  for (std::size_t k = 0; k + 1 < offsets_.size(); ++k) n += offsets_[k + 1] > offsets_[k];
  return n;
}

std::span<const VehicleState> GridIndex::cell(CellCoord c) const {
  if (c[0] < 0 || c[1] < 0 || c[0] >= nx_ || c[1] >= ny_) return {};
  const auto k = static_cast<std::size_t>(c[1] * nx_ + c[0]);
  return std::span<const VehicleState>(entries_).subspan(offsets_[k], offsets_[k + 1] - offsets_[k]);
}

const VehicleState* GridIndex::find(VehicleId id) const noexcept {
  auto it = slot_.find(id);
  return it == slot_.end() ? nullptr : &entries_[it->second];
}

const VehicleState& GridIndex::at(VehicleId id) const {
  if (const auto* s = find(id)) return *s;
  throw NotFoundError("vehicle " + std::to_string(id) + " is not in the grid index");
}

std::vector<VehicleState> GridIndex::get_nearby_vehicles(VehicleId ego, double radius) const {
  if (!(radius >= 0.0) || radius > cell_size_) {
    throw ConfigError("query radius " + std::to_string(radius) + " must lie in [0, cell_size " +
                      std::to_string(cell_size_) + "]");
  }
  const auto& e = at(ego);
  std::vector<VehicleState> out;
  for_each_within(e.x, e.y, radius, ego, [&](const VehicleState& s) { out.push_back(s); });
  std::sort(out.begin(), out.end(),
            [](const VehicleState& a, const VehicleState& b) { return a.id < b.id; });
  return out;
}

std::vector<GridIndex::CellCoord> GridIndex::candidate_cells(double x, double y) const {
  std::vector<CellCoord> out;
  if (entries_.empty()) return out;
  const auto c = cell_of(x, y);
  for (std::int64_t dy = -1; dy <= 1; ++dy) {
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      const CellCoord n{c[0] + dx, c[1] + dy};
      if (n[0] >= 0 && n[1] >= 0 && n[0] < nx_ && n[1] < ny_) out.push_back(n);
    }
  }
  return out;
}

}  // namespace obusim
