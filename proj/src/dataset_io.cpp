#include "latentcast/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "latentcast/common.hpp"
#include "latentcast/time_utils.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset files are little-endian float32; big-endian hosts are unsupported");

namespace latentcast {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path channel_file(const fs::path& dir, const std::string& name) {
  return dir / (name + ".f32");
}

json make_manifest(const GridField& field, const VariableCatalog& cat) {
  json m;
  m["dims"] = {{"time", field.steps()}, {"lat", field.height()}, {"lon", field.width()}};
  m["dt_hours"] = field.dt_hours;
  m["t0"] = format_iso_hours(field.t0_hours);
  m["lat"] = field.lat;
  m["lon"] = field.lon;
  json channels = json::array();
  for (std::int64_t i = 0; i < cat.num_channels(); ++i) {
    json ch;
    ch["name"] = cat.names[i];
    ch["level"] = cat.levels[i];
    ch["surface"] = static_cast<bool>(cat.surface_flags[i]);
    ch["key_index"] = nullptr;
    for (std::int64_t j = 0; j < cat.num_keys(); ++j)
      if (cat.key_indices[j] == i) ch["key_index"] = j;
    channels.push_back(std::move(ch));
  }
  m["channels"] = std::move(channels);
  return m;
}

}  // namespace

void write_dataset(const fs::path& dir, const GridField& field, const VariableCatalog& cat) {
  field.validate();
  cat.validate();
  if (field.channels() != cat.num_channels())
    throw ShapeError("write_dataset: field has " + std::to_string(field.channels()) +
                     " channels, catalog describes " + std::to_string(cat.num_channels()));
  fs::create_directories(dir);

  torch::Tensor data = field.data.to(torch::kFloat32).contiguous();
  const std::int64_t per_channel = field.steps() * field.height() * field.width();
  for (std::int64_t ch = 0; ch < field.channels(); ++ch) {
    torch::Tensor one = data.select(1, ch).contiguous();
    const fs::path p = channel_file(dir, cat.names[ch]);
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("write_dataset: cannot open " + p.string());
    f.write(reinterpret_cast<const char*>(one.data_ptr<float>()),
            static_cast<std::streamsize>(per_channel * sizeof(float)));
    if (!f) throw IoError("write_dataset: short write to " + p.string());
  }

  std::ofstream mf(dir / "manifest.json", std::ios::trunc);
  if (!mf) throw IoError("write_dataset: cannot open manifest in " + dir.string());
  mf << make_manifest(field, cat).dump(2) << "\n";
}

std::pair<GridField, VariableCatalog> load_dataset(const fs::path& path) {
  fs::path manifest_path = fs::is_directory(path) ? path / "manifest.json" : path;
  const fs::path dir = manifest_path.parent_path();
  std::ifstream mf(manifest_path);
  if (!mf) throw IoError("load_dataset: cannot open manifest " + manifest_path.string());
  json m;
  try {
    mf >> m;
  } catch (const json::exception& e) {
    throw DataError("load_dataset: manifest " + manifest_path.string() +
                    " is not valid JSON: " + e.what());
  }

  GridField field;
  VariableCatalog cat;
  try {
    const std::int64_t T = m.at("dims").at("time").get<std::int64_t>();
    const std::int64_t H = m.at("dims").at("lat").get<std::int64_t>();
    const std::int64_t W = m.at("dims").at("lon").get<std::int64_t>();
    field.dt_hours = m.at("dt_hours").get<int>();
    field.t0_hours = parse_iso_hours(m.at("t0").get<std::string>());
    field.lat = m.at("lat").get<std::vector<double>>();
    field.lon = m.at("lon").get<std::vector<double>>();

    const json& channels = m.at("channels");
    const std::int64_t C = static_cast<std::int64_t>(channels.size());
    if (C == 0) throw DataError("load_dataset: manifest lists no channels");
    std::vector<std::pair<std::int64_t, std::int64_t>> keyed;  // (key_index, channel)
    for (std::int64_t i = 0; i < C; ++i) {
      const json& ch = channels[static_cast<std::size_t>(i)];
      cat.names.push_back(ch.at("name").get<std::string>());
      cat.levels.push_back(ch.at("level").get<std::string>());
      cat.surface_flags.push_back(ch.at("surface").get<bool>());
      if (!ch.at("key_index").is_null())
        keyed.emplace_back(ch.at("key_index").get<std::int64_t>(), i);
    }
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t j = 0; j < keyed.size(); ++j) {
      if (keyed[j].first != static_cast<std::int64_t>(j))
        throw DataError("load_dataset: key_index values must be 0.." +
                        std::to_string(keyed.size() - 1) + " without gaps");
      cat.key_indices.push_back(keyed[j].second);
    }
    cat.validate();

    const std::int64_t per_channel = T * H * W;
    field.data = torch::empty({T, C, H, W}, torch::kFloat32);
    torch::Tensor one = torch::empty({T, H, W}, torch::kFloat32);
    for (std::int64_t ch = 0; ch < C; ++ch) {
      const fs::path p = channel_file(dir, cat.names[ch]);
      std::error_code ec;
      const auto size = fs::file_size(p, ec);
      if (ec) throw IoError("load_dataset: missing channel file " + p.string());
      const std::int64_t elems = static_cast<std::int64_t>(size / sizeof(float));
      if (elems != per_channel || size % sizeof(float) != 0)
        throw DataError("load_dataset: " + p.string() + " holds " + std::to_string(elems) +
                        " values, manifest dims require " + std::to_string(per_channel));
      std::ifstream f(p, std::ios::binary);
      if (!f) throw IoError("load_dataset: cannot open " + p.string());
      f.read(reinterpret_cast<char*>(one.data_ptr<float>()),
             static_cast<std::streamsize>(per_channel * sizeof(float)));
      if (!f) throw IoError("load_dataset: short read from " + p.string());
      field.data.select(1, ch).copy_(one);
    }
  } catch (const json::exception& e) {
    throw DataError("load_dataset: bad manifest " + manifest_path.string() + ": " + e.what());
  }

  field.validate();
  return {std::move(field), std::move(cat)};
}

}  // namespace latentcast
