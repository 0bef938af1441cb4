#include <bit>
#include <cstdint>
#include <cstring>
#include <string>

#include <json.hpp>

#include "io_util.hpp"
#include "wsl/error.hpp"
#include "wsl/model.hpp"

namespace wsl {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

static_assert(sizeof(double) == 8);

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint64_t get_u64(std::string_view bytes, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + b])) << (8 * b);
  return v;
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

double get_f64(std::string_view bytes, std::size_t at) {
  return std::bit_cast<double>(get_u64(bytes, at));
}

ordered_json config_to_json(const ModelConfig& cfg) {
  return ordered_json{{"input_dim", cfg.input_dim},
                      {"hidden_sizes", cfg.hidden_sizes},
                      {"num_classes", cfg.num_classes},
                      {"dropout_keep_prob", cfg.dropout_keep_prob},
                      {"init_seed", cfg.init_seed},
                      {"init_scale", cfg.init_scale}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.input_dim = j.at("input_dim").get<int>();
  cfg.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
  cfg.num_classes = j.at("num_classes").get<int>();
  cfg.dropout_keep_prob = j.at("dropout_keep_prob").get<double>();
  cfg.init_seed = j.at("init_seed").get<std::uint64_t>();
  cfg.init_scale = j.at("init_scale").get<std::string>();
  return cfg;
}

}  // namespace

std::string serialize_checkpoint(const ModelParams& params) {
  params.validate();
  std::string data;
  ordered_json layers = ordered_json::array();
  for (const auto& layer : params.layers) {
    const std::size_t w_off = data.size();
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) put_f64(data, layer.weights(r, c));
    const std::size_t b_off = data.size();
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) put_f64(data, layer.bias(i));
    layers.push_back({{"weights_shape", {layer.weights.rows(), layer.weights.cols()}},
                      {"weights_offset", w_off},
                      {"bias_shape", {layer.bias.size()}},
                      {"bias_offset", b_off}});
  }
  const ordered_json header{{"format_version", kFormatVersion},
                            {"config", config_to_json(params.config)},
                            {"layers", std::move(layers)},
                            {"data_bytes", data.size()}};
  const std::string header_text = header.dump();

  std::string out(kCheckpointMagic);
  put_u64(out, header_text.size());
  out += header_text;
  out += data;
  return out;
}

ModelParams deserialize_checkpoint(std::string_view bytes, const CheckpointExpect& expect) {
  const std::size_t prefix = kCheckpointMagic.size() + 8;
  if (bytes.size() < prefix || bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic)
    throw ParseError("not a WSLCKPT1 checkpoint", 0);
  const std::uint64_t header_len = get_u64(bytes, kCheckpointMagic.size());
  if (header_len > bytes.size() - prefix) throw ParseError("checkpoint header is truncated", 0);
  const std::string_view data = bytes.substr(prefix + header_len);

  ModelParams params;
  try {
    const auto header = nlohmann::json::parse(bytes.substr(prefix, header_len));
    if (header.at("format_version").get<int>() != kFormatVersion)
      throw ValidationError("unsupported checkpoint format_version");
    params.config = config_from_json(header.at("config"));
    if (header.at("data_bytes").get<std::uint64_t>() != data.size())
      throw ValidationError("checkpoint data section has the wrong size");
    for (const auto& lj : header.at("layers")) {
      const auto ws = lj.at("weights_shape").get<std::vector<Eigen::Index>>();
      const auto bs = lj.at("bias_shape").get<std::vector<Eigen::Index>>();
      if (ws.size() != 2 || bs.size() != 1 || ws[0] < 0 || ws[1] < 0 || bs[0] < 0)
        throw ValidationError("checkpoint layer has a malformed shape");
      const auto w_off = lj.at("weights_offset").get<std::size_t>();
      const auto b_off = lj.at("bias_offset").get<std::size_t>();
      const auto w_count = static_cast<std::size_t>(ws[0] * ws[1]);
      const auto b_count = static_cast<std::size_t>(bs[0]);
      if (w_off > data.size() || w_count > (data.size() - w_off) / 8 || b_off > data.size() ||
          b_count > (data.size() - b_off) / 8)
        throw ValidationError("checkpoint layer offsets exceed the data section");
      Layer layer{Eigen::MatrixXd(ws[0], ws[1]), Eigen::VectorXd(bs[0])};
      std::size_t at = w_off;
      for (Eigen::Index r = 0; r < ws[0]; ++r)
        for (Eigen::Index c = 0; c < ws[1]; ++c, at += 8) layer.weights(r, c) = get_f64(data, at);
      at = b_off;
      for (Eigen::Index i = 0; i < bs[0]; ++i, at += 8) layer.bias(i) = get_f64(data, at);
      params.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what(), 0);
  }
  params.validate();
  if (expect.num_classes && *expect.num_classes != params.config.num_classes)
    throw ValidationError("checkpoint has K=" + std::to_string(params.config.num_classes) +
                          ", expected " + std::to_string(*expect.num_classes));
  if (expect.input_dim && *expect.input_dim != params.config.input_dim)
    throw ValidationError("checkpoint has D=" + std::to_string(params.config.input_dim) +
                          ", expected " + std::to_string(*expect.input_dim));
  return params;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  detail::write_file(path, serialize_checkpoint(params));
}

ModelParams load_checkpoint(const std::filesystem::path& path, const CheckpointExpect& expect) {
  return deserialize_checkpoint(detail::read_file(path), expect);
}

}  // namespace wsl
