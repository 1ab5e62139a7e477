// Command-line front end: data generation, training, inference, evaluation,
// the attention benchmark, and the derivative checker.
//
// Exit status: 0 success; 1 contract/config/format error; 2 numerical
// failure (non-finite loss or a failed derivative check).

#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mafnet/bench.hpp"
#include "mafnet/errors.hpp"
#include "mafnet/gradcheck_suite.hpp"
#include "mafnet/image_io.hpp"
#include "mafnet/trainer.hpp"

namespace {

using namespace mafnet;

struct CommonFlags {
  std::string config_path;
  std::int64_t seed = -1;
  std::string out_dir;
  std::string checkpoint;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "run configuration file (key = value lines)");
  cmd->add_option("--seed", flags.seed, "override the config seed");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--checkpoint", flags.checkpoint, "checkpoint path");
}

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty()) cfg = load_config(flags.config_path);
  if (flags.seed >= 0) cfg.seed = flags.seed;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (!flags.checkpoint.empty()) cfg.checkpoint_path = flags.checkpoint;
  validate_config(cfg);
  return cfg;
}

void write_sample_set(const RunConfig& cfg, const std::string& dir, const char* prefix,
                      std::int64_t count, std::uint64_t stream_base) {
  for (std::int64_t i = 0; i < count; ++i) {
    Rng r(static_cast<std::uint64_t>(cfg.seed), stream_base + static_cast<std::uint64_t>(i));
    const StereoSample s = gen_synthetic_pair(r.next_u64(), cfg.height, cfg.width,
                                              static_cast<double>(cfg.dmax));
    char stem[64];
    std::snprintf(stem, sizeof(stem), "%s/%s_%04lld", dir.c_str(), prefix,
                  static_cast<long long>(i));
    write_sample(s, std::string(stem) + ".msb");
    write_ppm(s.left, std::string(stem) + "_left.ppm");
    write_ppm(s.right, std::string(stem) + "_right.ppm");
    write_pfm(s.gt, std::string(stem) + "_gt.pfm");
  }
}

int cmd_gen_data(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const std::string dir = !flags.out_dir.empty() ? flags.out_dir
                          : !cfg.data_dir.empty() ? cfg.data_dir
                                                  : cfg.out_dir;
  std::filesystem::create_directories(dir);
  write_sample_set(cfg, dir, "sample", cfg.n_train_pairs, 1000);
  write_sample_set(cfg, dir, "eval", cfg.n_eval_pairs, 500000);
  std::printf("wrote %lld training and %lld held-out pairs to %s\n",
              static_cast<long long>(cfg.n_train_pairs),
              static_cast<long long>(cfg.n_eval_pairs), dir.c_str());
  return 0;
}

int cmd_train(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const TrainResult r = run_train(cfg);
  std::printf("checkpoint: %s\n", r.checkpoint_file.c_str());
  return 0;
}

int cmd_infer(const CommonFlags& flags, const std::string& left_path,
              const std::string& right_path) {
  const RunConfig cfg = resolve_config(flags);
  if (cfg.checkpoint_path.empty()) {
    throw ConfigError("infer needs --checkpoint (or checkpoint_path in the config)");
  }
  const Tensor left = read_ppm(left_path);
  const Tensor right = read_ppm(right_path);
  const std::int64_t h = left.dim(1), w = left.dim(2);
  if (!same_shape(left, right)) {
    throw DimensionError("left and right images differ: " + shape_str(left.shape()) + " vs " +
                         shape_str(right.shape()));
  }
  if (h % 32 != 0 || w % 32 != 0) {
    const std::int64_t hp = (h + 31) / 32 * 32, wp = (w + 31) / 32 * 32;
    throw DimensionError("image extents " + std::to_string(h) + "x" + std::to_string(w) +
                         " must be multiples of 32; pad to " + std::to_string(hp) + "x" +
                         std::to_string(wp));
  }
  if (h != cfg.height || w != cfg.width) {
    throw ConfigError("image extents " + std::to_string(h) + "x" + std::to_string(w) +
                      " do not match the trained extents " + std::to_string(cfg.height) + "x" +
                      std::to_string(cfg.width) +
                      " (the token-mixing projections are extent-specific)");
  }
  const Model model = load_model(cfg, cfg.checkpoint_path);
  StageTimes times;
  const DisparityMap pred = predict_disparity(model, left, right, cfg, &times);
  std::filesystem::create_directories(cfg.out_dir);
  write_pfm(pred, cfg.out_dir + "/disparity.pfm");
  write_pgm(pred, static_cast<double>(cfg.dmax), cfg.out_dir + "/disparity.pgm");
  std::printf("stage seconds: encoder %.4f  volume %.4f  affa %.4f  aahf %.4f  head %.4f\n",
              times.encoder, times.volume, times.affa, times.aahf, times.head);
  std::printf("wrote %s/disparity.pfm and .pgm\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_eval(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  if (cfg.checkpoint_path.empty()) {
    throw ConfigError("eval needs --checkpoint (or checkpoint_path in the config)");
  }
  const Model model = load_model(cfg, cfg.checkpoint_path);
  const auto samples = make_eval_set(cfg);
  const MetricsReport r = evaluate_pairs(model, cfg, samples);
  const nlohmann::json rec = {
      {"epe", r.epe}, {"bad3", r.bad3}, {"d1", r.d1}, {"n_valid", r.n_valid}};
  std::printf("%s\n", rec.dump().c_str());
  return 0;
}

int cmd_bench(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  std::filesystem::create_directories(cfg.out_dir);
  run_attention_bench(cfg.out_dir + "/bench.jsonl", /*quiet=*/false);
  return 0;
}

int cmd_gradcheck(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const auto rows = run_gradcheck_suite(static_cast<std::uint64_t>(cfg.seed), /*quiet=*/false);
  return all_pass(rows) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stereo disparity pipeline: frequency-aware cost-volume attention"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string left_path, right_path;

  CLI::App* gen = app.add_subcommand("gen-data", "write synthetic stereo pairs");
  add_common(gen, flags);
  CLI::App* train = app.add_subcommand("train", "run the training loop");
  add_common(train, flags);
  CLI::App* infer = app.add_subcommand("infer", "predict disparity for one pair");
  add_common(infer, flags);
  infer->add_option("left", left_path, "left image (binary PPM)")->required();
  infer->add_option("right", right_path, "right image (binary PPM)")->required();
  CLI::App* eval = app.add_subcommand("eval", "metrics of a checkpoint on the held-out set");
  add_common(eval, flags);
  CLI::App* bench = app.add_subcommand("bench", "attention timing grid");
  add_common(bench, flags);
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "central-difference derivative checks");
  add_common(gradcheck, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(flags);
    if (train->parsed()) return cmd_train(flags);
    if (infer->parsed()) return cmd_infer(flags, left_path, right_path);
    if (eval->parsed()) return cmd_eval(flags);
    if (bench->parsed()) return cmd_bench(flags);
    if (gradcheck->parsed()) return cmd_gradcheck(flags);
  } catch (const NumericsError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
