#include "latentcast/catalog.hpp"

#include <algorithm>
#include <unordered_set>

#include "latentcast/common.hpp"

namespace latentcast {

void VariableCatalog::validate() const {
  const auto c_total = num_channels();
  if (levels.size() != names.size() || surface_flags.size() != names.size())
    throw DataError("catalog field lengths disagree");
  if (c_total == 0) throw DataError("catalog has no channels");
  std::unordered_set<std::string> seen;
  for (const auto& n : names)
    if (!seen.insert(n).second) throw DataError("duplicate channel name: " + n);
  std::unordered_set<std::int64_t> kseen;
  for (auto k : key_indices) {
    if (k < 0 || k >= c_total)
      throw DataError("key index " + std::to_string(k) + " outside [0, " +
                      std::to_string(c_total) + ")");
    if (!kseen.insert(k).second)
      throw DataError("repeated key index " + std::to_string(k));
  }
  if (num_keys() > c_total) throw DataError("more key variables than channels");
}

std::vector<double> VariableCatalog::key_surface_weights() const {
  std::vector<double> w(key_indices.size());
  for (std::size_t j = 0; j < key_indices.size(); ++j) {
    const auto idx = key_indices[j];
    const bool surf = surface_flags[idx];
    w[j] = (surf && names[idx] != "t2m") ? 0.1 : 1.0;
  }
  return w;
}

const std::vector<int>& upper_air_levels() {
  static const std::vector<int> levels = {50,  100, 150, 200, 250, 300, 400,
                                          500, 600, 700, 850, 925, 1000};
  return levels;
}

VariableCatalog era5_catalog() {
  VariableCatalog cat;
  auto add = [&](const std::string& name, const std::string& level, bool surf) {
    cat.names.push_back(name);
    cat.levels.push_back(level);
    cat.surface_flags.push_back(surf);
  };

  // Surface and integrated channels. tcwv is column-integrated but carries the
  // surface flag: it is a single-level field and takes the 0.1 loss weight.
  add("tp_6hr", "surface", true);
  add("u10m", "surface", true);
  add("v10m", "surface", true);
  add("ws10m", "surface", true);
  add("t2m", "surface", true);
  add("mslp", "surface", true);
  add("sp", "surface", true);
  add("tisr", "surface", true);
  add("tisr_6hr", "surface", true);
  add("tisr_12hr", "surface", true);
  add("tcc", "surface", true);
  add("tcwv", "integrated", true);
  add("tp_12hr", "surface", true);

  for (const char* var : {"z", "t", "rh", "u", "v", "w", "ws"})
    for (int lev : upper_air_levels())
      add(std::string(var) + "_" + std::to_string(lev), std::to_string(lev), false);

  auto index_of = [&](const std::string& n) -> std::int64_t {
    auto it = std::find(cat.names.begin(), cat.names.end(), n);
    return static_cast<std::int64_t>(it - cat.names.begin());
  };
  // Key order: surface block, then 1000/850/500/50 hPa selections, then tcwv.
  for (const char* n :
       {"u10m", "v10m", "t2m", "sp", "mslp", "u_1000", "v_1000", "z_1000", "t_850",
        "u_850", "v_850", "z_850", "rh_850", "t_500", "u_500", "v_500", "z_500",
        "rh_500", "z_50", "tcwv"})
    cat.key_indices.push_back(index_of(n));

  cat.validate();
  return cat;
}

}  // namespace latentcast
