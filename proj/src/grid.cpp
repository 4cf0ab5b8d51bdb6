#include "latentcast/grid.hpp"

#include <cmath>

#include "latentcast/common.hpp"

namespace latentcast {

void GridField::validate() const {
  if (!data.defined() || data.dim() != 4)
    throw DataError("grid data must be a [time, channel, lat, lon] array");
  if (static_cast<std::int64_t>(lat.size()) != height())
    throw DataError("lat length " + std::to_string(lat.size()) + " != grid height " +
                    std::to_string(height()));
  if (static_cast<std::int64_t>(lon.size()) != width())
    throw DataError("lon length " + std::to_string(lon.size()) + " != grid width " +
                    std::to_string(width()));
  for (double v : lat)
    if (std::abs(v) >= 90.0)
      throw DataError("cell-center latitude at/beyond pole: " + std::to_string(v));
  if (lon.size() >= 2) {
    const double step = lon[1] - lon[0];
    if (step <= 0) throw DataError("longitudes must be strictly increasing");
    for (std::size_t i = 1; i < lon.size(); ++i)
      if (std::abs((lon[i] - lon[i - 1]) - step) > 1e-9 * std::max(1.0, std::abs(step)))
        throw DataError("longitudes must be equally spaced");
  }
  if (dt_hours <= 0) throw DataError("dt_hours must be positive");
  if (!torch::isfinite(data).all().item<bool>())
    throw DataError("grid data contains non-finite values");
}

GridField GridField::slice_time(std::int64_t first, std::int64_t count) const {
  if (first < 0 || count < 0 || first + count > steps())
    throw DataError("time slice [" + std::to_string(first) + ", " +
                    std::to_string(first + count) + ") outside [0, " +
                    std::to_string(steps()) + ")");
  GridField out;
  out.data = data.narrow(0, first, count);
  out.lat = lat;
  out.lon = lon;
  out.t0_hours = t0_hours + first * dt_hours;
  out.dt_hours = dt_hours;
  return out;
}

std::vector<double> cell_center_lats(std::int64_t h) {
  std::vector<double> out(static_cast<std::size_t>(h));
  const double step = 180.0 / static_cast<double>(h);
  for (std::int64_t k = 0; k < h; ++k)
    out[static_cast<std::size_t>(k)] = -90.0 + (static_cast<double>(k) + 0.5) * step;
  return out;
}

std::vector<double> cell_center_lons(std::int64_t w) {
  std::vector<double> out(static_cast<std::size_t>(w));
  const double step = 360.0 / static_cast<double>(w);
  for (std::int64_t k = 0; k < w; ++k)
    out[static_cast<std::size_t>(k)] = static_cast<double>(k) * step;
  return out;
}

}  // namespace latentcast
