#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "binary_io.hpp"
#include "scanleak/errors.hpp"
#include "scanleak/nn/model.hpp"

namespace scanleak::nn {

using namespace scanleak::binio;

namespace {

constexpr std::uint16_t kModelFormatVersion = 1;

}  // namespace

void save_model(Model& model, const std::string& path) {
  auto os = open_for_write(path);
  write_bytes(os, "TMDL", 4);
  write_pod<std::uint16_t>(os, kModelFormatVersion);

  const ModelSpec& spec = model.spec();
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(spec.input_shape.size()));
  for (std::size_t d : spec.input_shape)
    write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(d));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(spec.layers.size()));
  for (const LayerSpec& layer : spec.layers) {
    write_string(os, layer.kind);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(layer.args.size()));
    for (const auto& [key, value] : layer.args) {  // map order = sorted keys
      write_string(os, key);
      write_pod<double>(os, value);
    }
  }

  const std::vector<ParamRef> state = model.state();
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(state.size()));
  for (const ParamRef& p : state) {
    write_string(os, p.name);
    write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(p.value->numel()));
    for (double v : p.value->data)
      write_pod<float>(os, static_cast<float>(v));
  }
  os.flush();
  if (!os) throw FileError(FileError::Kind::io, "write failed: " + path);
}

Model load_model(const std::string& path) {
  auto is = open_for_read(path);
  check_magic(is, "TMDL", path);
  const auto version = read_pod<std::uint16_t>(is, "version");
  if (version != kModelFormatVersion)
    throw FileError(FileError::Kind::version_mismatch,
                    path + ": model format version " + std::to_string(version) +
                        ", expected " + std::to_string(kModelFormatVersion));

  ModelSpec spec;
  const auto ndim = read_pod<std::uint32_t>(is, "input shape rank");
  for (std::uint32_t i = 0; i < ndim; ++i)
    spec.input_shape.push_back(static_cast<std::size_t>(
        read_pod<std::uint64_t>(is, "input shape dimension")));
  const auto n_layers = read_pod<std::uint32_t>(is, "layer count");
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    LayerSpec layer;
    layer.kind = read_string(is, "layer kind");
    const auto n_args = read_pod<std::uint32_t>(is, "layer config size");
    for (std::uint32_t j = 0; j < n_args; ++j) {
      std::string key = read_string(is, "layer config key");
      layer.args[key] = read_pod<double>(is, "layer config value");
    }
    spec.layers.push_back(std::move(layer));
  }

  Model model(spec, 0);
  std::map<std::string, Tensor*> slots;
  for (const ParamRef& p : model.state()) slots[p.name] = p.value;

  const auto n_blobs = read_pod<std::uint32_t>(is, "blob count");
  if (n_blobs != slots.size())
    throw FileError(FileError::Kind::parse,
                    path + ": checkpoint holds " + std::to_string(n_blobs) +
                        " tensors, architecture expects " +
                        std::to_string(slots.size()));
  for (std::uint32_t i = 0; i < n_blobs; ++i) {
    const std::string name = read_string(is, "blob name");
    auto it = slots.find(name);
    if (it == slots.end())
      throw FileError(FileError::Kind::parse,
                      path + ": unknown tensor '" + name + "'");
    Tensor& value = *it->second;
    const auto count = read_pod<std::uint64_t>(is, "blob size");
    if (count != value.numel())
      throw FileError(FileError::Kind::parse,
                      path + ": tensor '" + name + "' holds " +
                          std::to_string(count) + " values, expected " +
                          std::to_string(value.numel()));
    for (std::size_t j = 0; j < value.numel(); ++j)
      value[j] = static_cast<double>(read_pod<float>(is, "blob data"));
  }
  return model;
}

}  // namespace scanleak::nn
