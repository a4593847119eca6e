#include "ust/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "ust/image_io.hpp"
#include "ust/pipeline.hpp"

namespace ust::cli {
namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Size {
  Index height = 256;
  Index width = 256;
};

Size parse_size(const std::string& s) {
  const auto x = s.find_first_of("xX");
  Size size;
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t used_h = 0, used_w = 0;
    size.height = std::stol(s.substr(0, x), &used_h);
    size.width = std::stol(s.substr(x + 1), &used_w);
    if (used_h != x || used_w != s.size() - x - 1) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw UsageError("--size must look like HxW, got '" + s + "'");
  }
  if (size.height < 1 || size.width < 1) throw UsageError("--size dimensions must be positive");
  return size;
}

struct Options {
  std::string weights;
  double eps = kDefaultEps;
  std::string intermediates;

  std::string content, input, result, out;
  std::vector<std::string> styles, masks;
  std::string style_a, style_b;
  double alpha = 0.6;
  std::vector<int> levels{5, 4, 3, 2, 1};
  double style_scale = 1.0;
  std::string transform = "wct";
  bool final_level_blend_only = false;
  std::string size = "256x256";
  std::uint64_t seed = 0;
  int passes = 3;
  double beta = 0.5;
  int level = 1;
};

Model load_model(const Options& o) {
  if (o.weights.empty())
    throw UsageError("no weights given: pass --weights DIR or set the WCT_WEIGHTS environment variable");
  return Model::load(o.weights);
}

StylizationConfig make_config(const Options& o) {
  StylizationConfig cfg;
  cfg.alpha = o.alpha;
  cfg.levels = o.levels;
  cfg.style_scale = o.style_scale;
  cfg.eps = o.eps;
  cfg.blend_per_level = !o.final_level_blend_only;
  cfg.seed = o.seed;
  cfg.passes = o.passes;
  cfg.transform = o.transform == "hm" ? FeatureTransform::histogram_match : FeatureTransform::wct;
  cfg.validate();
  return cfg;
}

IntermediateSink intermediate_sink(const Options& o) {
  if (o.intermediates.empty()) return {};
  fs::create_directories(o.intermediates);
  return [dir = fs::path(o.intermediates)](int level, const ImageBuffer& img) {
    save_png(img, dir / ("I_" + std::to_string(level) + ".png"));
  };
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_stylize(const Options& o, std::ostream& err) {
  const StylizationConfig cfg = make_config(o);
  if (!o.masks.empty() && o.masks.size() != o.styles.size())
    throw UsageError("--mask must be given once per --style (" + std::to_string(o.styles.size()) + " styles, " +
                     std::to_string(o.masks.size()) + " masks)");
  if (o.masks.empty() && o.styles.size() != 1)
    throw UsageError("multiple --style images need one --mask each");
  const Model model = load_model(o);
  const ImageBuffer content = load_image(o.content);
  const auto start = std::chrono::steady_clock::now();
  ImageBuffer out;
  if (o.masks.empty()) {
    out = stylize_multi(content, load_image(o.styles.front()), cfg, model, intermediate_sink(o));
  } else {
    std::vector<StyleRegion> regions;
    for (std::size_t i = 0; i < o.styles.size(); ++i) {
      const ImageBuffer mask_img = load_image(o.masks[i]);
      if (mask_img.height() != content.height() || mask_img.width() != content.width())
        throw UsageError("mask " + o.masks[i] + " does not match the content size");
      regions.push_back({mask_from_image(mask_img), load_image(o.styles[i])});
    }
    out = stylize_spatial(content, regions, cfg, model, intermediate_sink(o));
  }
  err << "elapsed_s=" << std::fixed << std::setprecision(3) << seconds_since(start) << " (" << content.height()
      << "x" << content.width() << ", levels=" << o.levels.size() << ")\n";
  save_png(out, o.out);
  return kSuccess;
}

int cmd_texture(const Options& o, std::ostream& err) {
  const StylizationConfig cfg = make_config(o);
  const Size size = parse_size(o.size);
  const Model model = load_model(o);
  const auto start = std::chrono::steady_clock::now();
  const ImageBuffer out = synthesize_texture(load_image(o.styles.front()), size.height, size.width, cfg, model);
  err << "elapsed_s=" << std::fixed << std::setprecision(3) << seconds_since(start) << "\n";
  save_png(out, o.out);
  return kSuccess;
}

int cmd_texture_interp(const Options& o, std::ostream& err) {
  const StylizationConfig cfg = make_config(o);
  const Size size = parse_size(o.size);
  const Model model = load_model(o);
  const auto start = std::chrono::steady_clock::now();
  const ImageBuffer out =
      interpolate_textures(load_image(o.style_a), load_image(o.style_b), o.beta, size.height, size.width, cfg, model);
  err << "elapsed_s=" << std::fixed << std::setprecision(3) << seconds_since(start) << "\n";
  save_png(out, o.out);
  return kSuccess;
}

int cmd_reconstruct(const Options& o) {
  const Model model = load_model(o);
  save_png(reconstruct(load_image(o.input), o.level, model), o.out);
  return kSuccess;
}

int cmd_whiten_viz(const Options& o) {
  const Model model = load_model(o);
  save_png(whiten_viz(load_image(o.input), o.level, model, o.eps), o.out);
  return kSuccess;
}

int cmd_metric(const Options& o, std::ostream& out) {
  const Model model = load_model(o);
  const StyleDistance d = style_distance(load_image(o.result), load_image(o.style_a), model);
  out << std::setprecision(9) << "L_s=" << d.value << " log_L_s=" << d.log_value << "\n";
  return kSuccess;
}

int cmd_inspect(const Options& o, std::ostream& out) {
  if (o.weights.empty())
    throw UsageError("no weights given: pass --weights DIR or set the WCT_WEIGHTS environment variable");
  fs::path path = o.weights;
  if (fs::is_directory(path)) path /= "weights.wctw";
  const WeightStore store = load_weights(path);
  for (const auto& [k, v] : store.metadata()) out << "# " << k << ": " << v << "\n";
  for (const auto& [name, tensor] : store.tensors()) {
    out << name << " f32 [";
    for (std::size_t i = 0; i < tensor.shape.size(); ++i) out << (i ? "," : "") << tensor.shape[i];
    out << "]\n";
  }
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Universal style transfer with whitening and coloring transforms"};
  app.name("ust");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--weights", o.weights, "Weight directory (weights.wctw + encoder/decoder specs)")
      ->envname("WCT_WEIGHTS");
  app.add_option("--eps", o.eps, "Eigenvalue truncation threshold")->capture_default_str();
  app.add_option("--save-intermediates", o.intermediates, "Write I_5..I_1 of the multi-level fold to DIR");

  auto add_style_options = [&o](CLI::App* cmd) {
    cmd->add_option("--levels", o.levels, "Levels in application order")->delimiter(',')->capture_default_str();
    cmd->add_option("--style-scale", o.style_scale, "Style image resize factor")->capture_default_str();
  };
  auto add_texture_options = [&o](CLI::App* cmd) {
    cmd->add_option("--size", o.size, "Output size HxW")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Noise seed")->capture_default_str();
    cmd->add_option("--passes", o.passes, "Multi-level passes")->capture_default_str();
  };

  auto* stylize = app.add_subcommand("stylize", "Multi-level style transfer (spatial control with --mask)");
  stylize->add_option("--content", o.content, "Content image")->required();
  stylize->add_option("--style", o.styles, "Style image (repeatable)")->required();
  stylize->add_option("--mask", o.masks, "Region mask per style (repeatable, same order as --style)");
  stylize->add_option("--alpha", o.alpha, "Style weight in [0,1]")->capture_default_str();
  add_style_options(stylize);
  stylize->add_option("--transform", o.transform, "Feature transform")
      ->check(CLI::IsMember({"wct", "hm"}))
      ->capture_default_str();
  stylize->add_flag("--final-level-blend-only", o.final_level_blend_only,
                    "Apply --alpha at the last level only (full transfer before it)");
  stylize->add_option("--out", o.out, "Output PNG")->required();

  auto* texture = app.add_subcommand("texture", "Texture synthesis from Gaussian noise");
  texture->add_option("--style", o.styles, "Texture example")->required()->expected(1);
  add_texture_options(texture);
  add_style_options(texture);
  texture->add_option("--out", o.out, "Output PNG")->required();

  auto* interp = app.add_subcommand("texture-interp", "Interpolate between two textures");
  interp->add_option("--style-a", o.style_a, "First texture")->required();
  interp->add_option("--style-b", o.style_b, "Second texture")->required();
  interp->add_option("--beta", o.beta, "Weight of the first texture in [0,1]")->capture_default_str();
  add_texture_options(interp);
  add_style_options(interp);
  interp->add_option("--out", o.out, "Output PNG")->required();

  auto* recon = app.add_subcommand("reconstruct", "Decode(encode(image)) at one level");
  recon->add_option("--input", o.input, "Input image")->required();
  recon->add_option("--level", o.level, "Level 1..5")->capture_default_str();
  recon->add_option("--out", o.out, "Output PNG")->required();

  auto* wviz = app.add_subcommand("whiten-viz", "Decode whitened features, rescaled to [0,1]");
  wviz->add_option("--input", o.input, "Input image")->required();
  wviz->add_option("--level", o.level, "Level 1..5")->capture_default_str();
  wviz->add_option("--out", o.out, "Output PNG")->required();

  auto* metric = app.add_subcommand("metric", "Covariance distance L_s between a result and a style");
  metric->add_option("--result", o.result, "Stylized image")->required();
  metric->add_option("--style", o.style_a, "Style image")->required();

  app.add_subcommand("inspect-weights", "List tensors in a weight file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (stylize->parsed()) return cmd_stylize(o, err);
    if (texture->parsed()) return cmd_texture(o, err);
    if (interp->parsed()) return cmd_texture_interp(o, err);
    if (recon->parsed()) return cmd_reconstruct(o);
    if (wviz->parsed()) return cmd_whiten_viz(o);
    if (metric->parsed()) return cmd_metric(o, out);
    return cmd_inspect(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const DegenerateInput& e) {
    err << "degenerate input: " << e.what() << "\n";
    return kNumerical;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const FormatError& e) {
    err << "weight format error: " << e.what() << "\n";
    return kWeightFormat;
  } catch (const ConfigurationError& e) {
    err << "weight configuration error: " << e.what() << "\n";
    return kWeightFormat;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace ust::cli
