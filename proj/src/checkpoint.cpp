#include "latentcast/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "latentcast/common.hpp"

namespace latentcast {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'L', 'C', 'C', 'K', 'P', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

json catalog_json(const VariableCatalog& cat) {
  json j;
  j["names"] = cat.names;
  j["levels"] = cat.levels;
  j["surface"] = cat.surface_flags;
  j["key_indices"] = cat.key_indices;
  return j;
}

VariableCatalog catalog_from_json(const json& j) {
  VariableCatalog cat;
  cat.names = j.at("names").get<std::vector<std::string>>();
  cat.levels = j.at("levels").get<std::vector<std::string>>();
  cat.surface_flags = j.at("surface").get<std::vector<bool>>();
  cat.key_indices = j.at("key_indices").get<std::vector<std::int64_t>>();
  cat.validate();
  return cat;
}

const char* dtype_name(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return "float32";
    case torch::kFloat64: return "float64";
    case torch::kInt64: return "int64";
    case torch::kUInt8: return "uint8";
    default: throw IoError("checkpoint cannot store dtype " + std::string(torch::toString(t)));
  }
}

torch::ScalarType dtype_from_name(const std::string& s) {
  if (s == "float32") return torch::kFloat32;
  if (s == "float64") return torch::kFloat64;
  if (s == "int64") return torch::kInt64;
  if (s == "uint8") return torch::kUInt8;
  throw IoError("checkpoint holds unknown dtype '" + s + "'");
}

void write_tensor(std::ofstream& out, const torch::Tensor& t) {
  torch::Tensor c = t.detach().contiguous().cpu();
  out.write(static_cast<const char*>(c.data_ptr()),
            static_cast<std::streamsize>(c.numel() * c.element_size()));
}

torch::Tensor read_tensor(std::ifstream& in, const std::vector<std::int64_t>& shape,
                          torch::ScalarType dtype, const std::string& name) {
  torch::Tensor t = torch::empty(shape, dtype);
  const auto bytes = static_cast<std::streamsize>(t.numel() * t.element_size());
  if (!in.read(static_cast<char*>(t.data_ptr()), bytes))
    throw IoError("checkpoint truncated while reading array '" + name + "'");
  return t;
}

torch::Tensor torch_rng_state() {
  return at::detail::getDefaultCPUGenerator().get_state();
}

}  // namespace

std::uint64_t Checkpoint::config_hash() const {
  return fnv1a64(model_config.dump() + "\n" + train_config.dump() + "\n" +
                 catalog_json(catalog).dump());
}

Checkpoint make_checkpoint(ForecastModel& model, const AdamW& opt, const VariableCatalog& cat,
                           const NormalizationStats& stats, const nlohmann::json& model_cfg,
                           const nlohmann::json& train_cfg, int epoch,
                           const std::mt19937_64& rng) {
  Checkpoint ckpt;
  ckpt.model_config = model_cfg;
  ckpt.train_config = train_cfg;
  ckpt.catalog = cat;
  ckpt.stats = stats;
  ckpt.epoch = epoch;
  std::ostringstream os;
  os << rng;
  ckpt.rng_state = os.str();
  torch::NoGradGuard guard;
  for (const auto& p : model->named_parameters())
    ckpt.tensors["model." + p.key()] = p.value().detach().clone();
  for (const auto& b : model->named_buffers())
    ckpt.tensors["model." + b.key()] = b.value().detach().clone();
  for (const auto& [name, slot] : opt.state()) {
    ckpt.tensors["opt.m." + name] = slot.m.clone();
    ckpt.tensors["opt.v." + name] = slot.v.clone();
    ckpt.opt_t[name] = slot.t;
  }
  ckpt.tensors["torch_rng"] = torch_rng_state();
  return ckpt;
}

void restore_training(const Checkpoint& ckpt, ForecastModel& model, AdamW* opt,
                      std::mt19937_64* rng) {
  torch::NoGradGuard guard;
  const auto fetch = [&ckpt](const std::string& name) -> const torch::Tensor& {
    const auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end())
      throw IoError("checkpoint is missing array '" + name + "'");
    return it->second;
  };
  const auto assign = [&fetch](const std::string& name, torch::Tensor dst) {
    const torch::Tensor& src = fetch(name);
    if (src.sizes() != dst.sizes())
      throw ShapeError("checkpoint array '" + name + "' has mismatched shape");
    dst.copy_(src);
  };
  for (const auto& p : model->named_parameters()) assign("model." + p.key(), p.value());
  for (const auto& b : model->named_buffers()) assign("model." + b.key(), b.value());
  if (opt != nullptr) {
    std::map<std::string, AdamW::Slot> slots;
    for (const auto& [name, t] : ckpt.opt_t)
      slots[name] = AdamW::Slot{fetch("opt.m." + name), fetch("opt.v." + name), t};
    opt->load_state(slots);
  }
  if (rng != nullptr) {
    std::istringstream is(ckpt.rng_state);
    is >> *rng;
    if (is.fail()) throw IoError("checkpoint sampler state is unreadable");
  }
  const auto it = ckpt.tensors.find("torch_rng");
  if (it != ckpt.tensors.end()) {
    at::Generator gen = at::detail::getDefaultCPUGenerator();
    gen.set_state(it->second);
  }
}

void require_matching_config(const Checkpoint& ckpt, std::uint64_t expected, bool force) {
  const std::uint64_t got = ckpt.config_hash();
  if (got == expected) return;
  if (force) return;
  throw ConfigError("checkpoint config hash " + to_hex(got) +
                    " does not match the requested configuration " + to_hex(expected) +
                    " (use force to load anyway)");
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  json header;
  header["version"] = ckpt.version;
  header["model_config"] = ckpt.model_config;
  header["train_config"] = ckpt.train_config;
  header["catalog"] = catalog_json(ckpt.catalog);
  header["epoch"] = ckpt.epoch;
  header["rng_state"] = ckpt.rng_state;
  header["opt_t"] = ckpt.opt_t;
  header["config_hash"] = to_hex(ckpt.config_hash());

  std::vector<std::pair<std::string, torch::Tensor>> arrays;
  arrays.emplace_back("stats.mean", ckpt.stats.mean);
  arrays.emplace_back("stats.std", ckpt.stats.std);
  for (const auto& [name, t] : ckpt.tensors) arrays.emplace_back(name, t);

  json index = json::array();
  for (const auto& [name, t] : arrays) {
    json e;
    e["name"] = name;
    e["dtype"] = dtype_name(t.scalar_type());
    e["shape"] = t.sizes().vec();
    index.push_back(std::move(e));
  }
  header["arrays"] = std::move(index);

  const std::string hdr = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t hlen = hdr.size();
  out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
  for (const auto& [name, t] : arrays) write_tensor(out, t);
  if (!out) throw IoError("failed writing checkpoint to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("'" + path + "' is not a checkpoint file");
  std::uint64_t hlen = 0;
  if (!in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen)))
    throw IoError("checkpoint header length missing in '" + path + "'");
  std::string hdr(hlen, '\0');
  if (!in.read(hdr.data(), static_cast<std::streamsize>(hlen)))
    throw IoError("checkpoint header truncated in '" + path + "'");
  json header;
  try {
    header = json::parse(hdr);
  } catch (const json::exception& e) {
    throw IoError("checkpoint header is not valid JSON: " + std::string(e.what()));
  }

  Checkpoint ckpt;
  try {
    ckpt.version = header.at("version").get<int>();
    if (ckpt.version != 1)
      throw IoError("unsupported checkpoint version " + std::to_string(ckpt.version));
    ckpt.model_config = header.at("model_config");
    ckpt.train_config = header.at("train_config");
    ckpt.catalog = catalog_from_json(header.at("catalog"));
    ckpt.epoch = header.at("epoch").get<int>();
    ckpt.rng_state = header.at("rng_state").get<std::string>();
    ckpt.opt_t = header.at("opt_t").get<std::map<std::string, std::int64_t>>();

    for (const json& e : header.at("arrays")) {
      const auto name = e.at("name").get<std::string>();
      const auto shape = e.at("shape").get<std::vector<std::int64_t>>();
      torch::Tensor t = read_tensor(in, shape, dtype_from_name(e.at("dtype").get<std::string>()),
                                    name);
      if (name == "stats.mean")
        ckpt.stats.mean = t;
      else if (name == "stats.std")
        ckpt.stats.std = t;
      else
        ckpt.tensors[name] = t;
    }

    const auto stored = header.at("config_hash").get<std::string>();
    if (stored != to_hex(ckpt.config_hash()))
      throw IoError("checkpoint '" + path + "' fails its stored config hash (corrupt header)");
  } catch (const json::exception& e) {
    throw IoError("checkpoint header is malformed: " + std::string(e.what()));
  }
  if (!ckpt.stats.mean.defined() || !ckpt.stats.std.defined())
    throw IoError("checkpoint '" + path + "' is missing normalization stats");
  return ckpt;
}

}  // namespace latentcast
