#include "ust/model.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

namespace ust {
namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Network channel c takes image channel source_channel(c).
Index source_channel(const Preprocessing& pre, Index c) { return pre.bgr ? 2 - c : c; }

Tensor3f preprocess(const Tensor3f& img, const Preprocessing& pre) {
  Tensor3f out(3, img.height(), img.width());
  for (Index c = 0; c < 3; ++c)
    out.matrix().row(c) = (img.matrix().row(source_channel(pre, c)).array() * pre.scale -
                           pre.mean[static_cast<std::size_t>(c)])
                              .matrix();
  return out;
}

Tensor3f postprocess(const Tensor3f& t, const Preprocessing& pre) {
  Tensor3f out(3, t.height(), t.width());
  for (Index c = 0; c < 3; ++c)
    out.matrix().row(source_channel(pre, c)) =
        ((t.matrix().row(c).array() + pre.mean[static_cast<std::size_t>(c)]) / pre.scale).matrix();
  return out;
}

}  // namespace

void require_level(int level) {
  if (level < kMinLevel || level > kMaxLevel)
    throw InvalidArgument("level must be in 1..5, got " + std::to_string(level));
}

Model Model::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("weight directory not found: " + dir.string());
  WeightStore store = load_weights(dir / "weights.wctw");
  std::vector<Network> nets;
  for (int level = kMinLevel; level <= kMaxLevel; ++level) {
    for (const Direction d : {Direction::encoder, Direction::decoder}) {
      const auto path = dir / (to_string(d) + std::to_string(level) + ".net");
      if (std::filesystem::exists(path)) nets.push_back(parse_network(read_text(path), d, level));
    }
  }
  if (nets.empty()) throw ConfigurationError("no network specs found in " + dir.string());
  return Model(std::move(store), std::move(nets));
}

Model::Model(WeightStore store, std::vector<Network> networks) : store_(std::move(store)) {
  pre_ = store_.preprocessing();
  for (auto& net : networks) {
    validate_network(net, store_);
    auto& slot = net.direction == Direction::encoder ? encoders_ : decoders_;
    slot[static_cast<std::size_t>(net.level - 1)] = std::move(net);
  }
  for (int level = kMinLevel; level <= kMaxLevel; ++level) {
    const auto& enc = encoders_[static_cast<std::size_t>(level - 1)];
    const auto& dec = decoders_[static_cast<std::size_t>(level - 1)];
    if (enc && dec && enc->output_channels() != dec->input_channels())
      throw ConfigurationError("decoder" + std::to_string(level) + " expects " +
                               std::to_string(dec->input_channels()) + " channels but encoder" +
                               std::to_string(level) + " produces " + std::to_string(enc->output_channels()));
  }
}

bool Model::has_level(int level) const {
  if (level < kMinLevel || level > kMaxLevel) return false;
  const auto i = static_cast<std::size_t>(level - 1);
  return encoders_[i].has_value() && decoders_[i].has_value();
}

const Network& Model::encoder(int level) const {
  require_level(level);
  const auto& net = encoders_[static_cast<std::size_t>(level - 1)];
  if (!net) throw ConfigurationError("no encoder for level " + std::to_string(level) + " in this model");
  return *net;
}

const Network& Model::decoder(int level) const {
  require_level(level);
  const auto& net = decoders_[static_cast<std::size_t>(level - 1)];
  if (!net) throw ConfigurationError("no decoder for level " + std::to_string(level) + " in this model");
  return *net;
}

Tensor3f Model::run(const Network& net, Tensor3f x) const {
  if (x.channels() != net.input_channels())
    throw InvalidArgument(to_string(net.direction) + std::to_string(net.level) + ": expected " +
                          std::to_string(net.input_channels()) + " input channels, got " +
                          std::to_string(x.channels()));
  for (const auto& layer : net.layers) {
    switch (layer.kind) {
      case LayerKind::conv3x3: {
        const auto& w = store_.at(layer.weight_name);
        const auto& b = store_.at(layer.bias_name);
        x = conv3x3(x, w.data, b.data, layer.out_channels, layer.pad);
        break;
      }
      case LayerKind::relu: x = relu(std::move(x)); break;
      case LayerKind::maxpool2: x = maxpool2(x); break;
      case LayerKind::upsample_nearest2: x = upsample_nearest2(x); break;
      case LayerKind::preprocess: x = preprocess(x, pre_); break;
      case LayerKind::postprocess: x = postprocess(x, pre_); break;
    }
  }
  return x;
}

Tensor3f encode(const ImageBuffer& img, int level, const Model& model) {
  if (img.empty()) throw InvalidArgument("encode: empty image");
  const Network& net = model.encoder(level);
  Tensor3f x = img.tensor();
  // Specs may omit an explicit preprocess layer; it always runs first.
  const bool explicit_pre = !net.layers.empty() && net.layers.front().kind == LayerKind::preprocess;
  if (!explicit_pre) x = preprocess(x, model.preprocessing());
  return model.run(net, std::move(x));
}

Tensor3f decode_raw(const Tensor3f& features, int level, const Model& model) {
  const Network& net = model.decoder(level);
  if (features.channels() != net.input_channels())
    throw InvalidArgument("decode: level " + std::to_string(level) + " expects " +
                          std::to_string(net.input_channels()) + " channels, got " +
                          std::to_string(features.channels()));
  Tensor3f out = model.run(net, features);
  const bool explicit_post = !net.layers.empty() && net.layers.back().kind == LayerKind::postprocess;
  if (!explicit_post) out = postprocess(out, model.preprocessing());
  return out;
}

ImageBuffer decode(const Tensor3f& features, int level, const Model& model) {
  return ImageBuffer(decode_raw(features, level, model)).clamped();
}

double reconstruction_loss(const ImageBuffer& input, const ImageBuffer& output, double lambda, int level,
                           const Model& model) {
  if (input.height() != output.height() || input.width() != output.width())
    throw InvalidArgument("reconstruction_loss: image sizes differ");
  const double pixel = (output.tensor().matrix().cast<double>() - input.tensor().matrix().cast<double>()).squaredNorm();
  if (lambda == 0.0) return pixel;
  const Tensor3f fi = encode(input, level, model);
  const Tensor3f fo = encode(output, level, model);
  const double feature = (fo.matrix().cast<double>() - fi.matrix().cast<double>()).squaredNorm();
  return pixel + lambda * feature;
}

Tensor3f load_reference_activation(const std::filesystem::path& stem) {
  auto shape_path = stem;
  shape_path += ".shape";
  auto data_path = stem;
  data_path += ".f32";
  std::istringstream shape(read_text(shape_path));
  Index c = 0, h = 0, w = 0;
  if (!(shape >> c >> h >> w) || c < 1 || h < 1 || w < 1)
    throw FormatError("malformed shape sidecar " + shape_path.string(), 0);
  std::ifstream in(data_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + data_path.string());
  Tensor3f t(c, h, w);
  in.read(reinterpret_cast<char*>(t.data().data()), static_cast<std::streamsize>(t.size() * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(t.size() * sizeof(float)))
    throw FormatError("reference activation " + data_path.string() + " is shorter than its shape",
                      static_cast<std::uint64_t>(in.gcount()));
  return t;
}

void save_reference_activation(const Tensor3f& t, const std::filesystem::path& stem) {
  auto shape_path = stem;
  shape_path += ".shape";
  auto data_path = stem;
  data_path += ".f32";
  std::ofstream shape(shape_path);
  shape << t.channels() << ' ' << t.height() << ' ' << t.width() << '\n';
  std::ofstream out(data_path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(t.data().data()), static_cast<std::streamsize>(t.size() * sizeof(float)));
  if (!shape || !out) throw IoError("failed writing reference activation " + stem.string());
}

}  // namespace ust
