#pragma once

#include <filesystem>
#include <utility>

#include "latentcast/catalog.hpp"
#include "latentcast/grid.hpp"

namespace latentcast {

/// Write a dataset directory: one `<channel-name>.f32` raw file per channel
/// (little-endian float32, C-order [time, lat, lon]) plus `manifest.json`
/// describing dims, coordinates, timestamps, and the channel catalog.
void write_dataset(const std::filesystem::path& dir, const GridField& field,
                   const VariableCatalog& cat);

/// Load a dataset directory written by write_dataset (or by hand). `path` may
/// be the directory or the manifest file itself. Non-finite values, missing
/// files, and dimension mismatches are hard errors.
std::pair<GridField, VariableCatalog> load_dataset(const std::filesystem::path& path);

}  // namespace latentcast
