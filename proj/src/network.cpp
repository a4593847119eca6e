#include "ust/network.hpp"

#include <sstream>

namespace ust {
namespace {

LayerKind parse_kind(const std::string& s, int line_no) {
  if (s == "conv3x3") return LayerKind::conv3x3;
  if (s == "relu") return LayerKind::relu;
  if (s == "maxpool2") return LayerKind::maxpool2;
  if (s == "upsample_nearest2") return LayerKind::upsample_nearest2;
  if (s == "preprocess") return LayerKind::preprocess;
  if (s == "postprocess") return LayerKind::postprocess;
  throw ConfigurationError("network spec line " + std::to_string(line_no) + ": unknown layer kind '" + s + "'");
}

void parse_channels(const std::string& token, LayerSpec& layer, int line_no) {
  const auto arrow = token.find("->");
  try {
    if (arrow == std::string::npos) throw std::invalid_argument("no arrow");
    std::size_t used = 0;
    const std::string lhs = token.substr(0, arrow);
    const std::string rhs = token.substr(arrow + 2);
    layer.in_channels = std::stol(lhs, &used);
    if (used != lhs.size()) throw std::invalid_argument("junk");
    layer.out_channels = std::stol(rhs, &used);
    if (used != rhs.size()) throw std::invalid_argument("junk");
  } catch (const std::exception&) {
    throw ConfigurationError("network spec line " + std::to_string(line_no) + ": expected 'in->out', got '" +
                             token + "'");
  }
  if (layer.in_channels < 1 || layer.out_channels < 1)
    throw ConfigurationError("network spec line " + std::to_string(line_no) + ": channel counts must be positive");
}

}  // namespace

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv3x3: return "conv3x3";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool2: return "maxpool2";
    case LayerKind::upsample_nearest2: return "upsample_nearest2";
    case LayerKind::preprocess: return "preprocess";
    case LayerKind::postprocess: return "postprocess";
  }
  return "?";
}

std::string to_string(Direction direction) { return direction == Direction::encoder ? "encoder" : "decoder"; }

int Network::resolution_steps() const {
  int n = 0;
  for (const auto& l : layers)
    if (l.kind == LayerKind::maxpool2 || l.kind == LayerKind::upsample_nearest2) ++n;
  return n;
}

Network parse_network(const std::string& text, Direction direction, int level) {
  Network net;
  net.direction = direction;
  net.level = level;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::vector<std::string> words;
    for (std::string w; tokens >> w;) words.push_back(w);
    if (words.empty()) continue;

    LayerSpec layer;
    layer.kind = parse_kind(words.front(), line_no);
    parse_channels(words.back(), layer, line_no);
    std::vector<std::string> args(words.begin() + 1, words.end() - 1);

    if (layer.kind == LayerKind::conv3x3) {
      if (args.size() == 3) {
        if (args[0] == "reflect")
          layer.pad = PadMode::reflect;
        else if (args[0] == "zero")
          layer.pad = PadMode::zero;
        else
          throw ConfigurationError("network spec line " + std::to_string(line_no) + ": unknown pad mode '" +
                                   args[0] + "'");
        args.erase(args.begin());
      }
      if (args.size() != 2)
        throw ConfigurationError("network spec line " + std::to_string(line_no) +
                                 ": conv3x3 needs weight and bias names");
      layer.weight_name = args[0];
      layer.bias_name = args[1];
    } else if (!args.empty()) {
      throw ConfigurationError("network spec line " + std::to_string(line_no) + ": unexpected arguments for " +
                               words.front());
    }
    net.layers.push_back(std::move(layer));
  }
  if (net.layers.empty()) throw ConfigurationError("network spec is empty");
  return net;
}

std::string format_network(const Network& net) {
  std::ostringstream out;
  for (const auto& l : net.layers) {
    out << to_string(l.kind);
    if (l.kind == LayerKind::conv3x3)
      out << ' ' << (l.pad == PadMode::reflect ? "reflect" : "zero") << ' ' << l.weight_name << ' ' << l.bias_name;
    out << ' ' << l.in_channels << "->" << l.out_channels << '\n';
  }
  return out.str();
}

void validate_network(const Network& net, const WeightStore& store) {
  const std::string where = to_string(net.direction) + std::to_string(net.level);
  if (net.level < 1 || net.level > 5) throw ConfigurationError(where + ": level must be 1..5");
  if (net.layers.empty()) throw ConfigurationError(where + ": no layers");

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const auto& l = net.layers[i];
    const std::string at = where + " layer " + std::to_string(i) + " (" + to_string(l.kind) + ")";
    if (i > 0 && net.layers[i - 1].out_channels != l.in_channels)
      throw ConfigurationError(at + ": expects " + std::to_string(l.in_channels) + " input channels but previous " +
                               "layer produces " + std::to_string(net.layers[i - 1].out_channels));
    if (l.kind != LayerKind::conv3x3) {
      if (l.in_channels != l.out_channels) throw ConfigurationError(at + ": must preserve channel count");
      if ((l.kind == LayerKind::preprocess || l.kind == LayerKind::postprocess) && l.in_channels != 3)
        throw ConfigurationError(at + ": operates on 3-channel images only");
      continue;
    }
    if (!store.contains(l.weight_name)) throw ConfigurationError(at + ": missing weight tensor " + l.weight_name);
    if (!store.contains(l.bias_name)) throw ConfigurationError(at + ": missing bias tensor " + l.bias_name);
    const auto& w = store.at(l.weight_name);
    const std::vector<std::uint32_t> expected_w = {static_cast<std::uint32_t>(l.out_channels),
                                                   static_cast<std::uint32_t>(l.in_channels), 3, 3};
    if (w.shape != expected_w) throw ConfigurationError(at + ": tensor " + l.weight_name + " has wrong shape");
    const auto& b = store.at(l.bias_name);
    if (b.shape != std::vector<std::uint32_t>{static_cast<std::uint32_t>(l.out_channels)})
      throw ConfigurationError(at + ": tensor " + l.bias_name + " has wrong shape");
  }

  const int steps = net.resolution_steps();
  if (steps != net.level - 1)
    throw ConfigurationError(where + ": has " + std::to_string(steps) + " resolution changes, expected " +
                             std::to_string(net.level - 1));
  for (const auto& l : net.layers) {
    if (net.direction == Direction::encoder && l.kind == LayerKind::upsample_nearest2)
      throw ConfigurationError(where + ": encoders cannot upsample");
    if (net.direction == Direction::decoder && l.kind == LayerKind::maxpool2)
      throw ConfigurationError(where + ": decoders cannot pool");
  }
  if (net.direction == Direction::encoder) {
    if (net.input_channels() != 3) throw ConfigurationError(where + ": must consume a 3-channel image");
    if (net.layers.back().kind != LayerKind::relu) throw ConfigurationError(where + ": must end with relu");
  } else if (net.output_channels() != 3) {
    throw ConfigurationError(where + ": must emit 3 channels");
  }
}

}  // namespace ust
