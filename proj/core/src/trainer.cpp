#include "mafnet/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "mafnet/errors.hpp"

namespace mafnet {

namespace {

std::uint64_t sample_seed(const RunConfig& cfg, std::uint64_t stream) {
  Rng r(static_cast<std::uint64_t>(cfg.seed), stream);
  return r.next_u64();
}

std::vector<StereoSample> load_or_generate(const RunConfig& cfg, const char* file_prefix,
                                           std::int64_t count, std::uint64_t stream_base) {
  std::vector<StereoSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    if (!cfg.data_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%04lld.msb", file_prefix,
                    static_cast<long long>(i));
      out.push_back(read_sample(cfg.data_dir + "/" + name));
      if (out.back().left.dim(1) != cfg.height || out.back().left.dim(2) != cfg.width) {
        throw ConfigError("sample " + std::string(name) + " extents " +
                          std::to_string(out.back().left.dim(1)) + "x" +
                          std::to_string(out.back().left.dim(2)) + " do not match config " +
                          std::to_string(cfg.height) + "x" + std::to_string(cfg.width));
      }
    } else {
      out.push_back(gen_synthetic_pair(sample_seed(cfg, stream_base + static_cast<std::uint64_t>(i)),
                                       cfg.height, cfg.width, static_cast<double>(cfg.dmax)));
    }
  }
  return out;
}

// Batch assembly: stacks samples along a new leading axis.
struct Batch {
  Tensor left;   // [B,3,H,W]
  Tensor right;  // [B,3,H,W]
  Tensor gt;     // [B,H,W]
  std::vector<std::uint8_t> valid;
};

Batch gather_batch(const std::vector<StereoSample>& samples,
                   const std::vector<std::int64_t>& idx) {
  const std::int64_t b = static_cast<std::int64_t>(idx.size());
  const std::int64_t h = samples[0].left.dim(1), w = samples[0].left.dim(2);
  Batch out;
  out.left = Tensor{Shape{b, 3, h, w}};
  out.right = Tensor{Shape{b, 3, h, w}};
  out.gt = Tensor{Shape{b, h, w}};
  out.valid.resize(static_cast<std::size_t>(b * h * w));
  for (std::int64_t j = 0; j < b; ++j) {
    const StereoSample& s = samples[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
    std::copy_n(s.left.data(), 3 * h * w, out.left.data() + j * 3 * h * w);
    std::copy_n(s.right.data(), 3 * h * w, out.right.data() + j * 3 * h * w);
    std::copy_n(s.gt.values.data(), h * w, out.gt.data() + j * h * w);
    std::copy_n(s.gt.valid.begin(), h * w, out.valid.begin() + j * h * w);
  }
  return out;
}

void append_jsonl(std::ofstream& log, const nlohmann::json& record) {
  log << record.dump() << '\n';
  log.flush();
}

void restore_values_only(const Checkpoint& ckpt,
                         const std::vector<std::pair<std::string, Var>>& params) {
  std::map<std::string, const ParamState*> by_name;
  for (const ParamState& p : ckpt.params) by_name[p.name] = &p;
  if (by_name.size() != params.size()) {
    throw ContractError("checkpoint holds " + std::to_string(by_name.size()) +
                        " parameters, model has " + std::to_string(params.size()));
  }
  for (const auto& [name, var] : params) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw ContractError("checkpoint is missing parameter '" + name + "'");
    }
    if (!same_shape(it->second->value, var->value)) {
      throw ContractError("checkpoint parameter '" + name + "' has shape " +
                          shape_str(it->second->value.shape()) + ", model expects " +
                          shape_str(var->value.shape()));
    }
    var->value = it->second->value;
  }
}

}  // namespace

std::vector<StereoSample> make_train_set(const RunConfig& cfg) {
  return load_or_generate(cfg, "sample", cfg.n_train_pairs, 1000);
}

std::vector<StereoSample> make_eval_set(const RunConfig& cfg) {
  return load_or_generate(cfg, "eval", cfg.n_eval_pairs, 500000);
}

DisparityMap predict_disparity(const Model& m, const Tensor& left, const Tensor& right,
                               const RunConfig& cfg, StageTimes* times) {
  const std::int64_t h = left.dim(1), w = left.dim(2);
  Tensor lb{Shape{1, 3, h, w}, std::vector<double>(left.data(), left.data() + left.size())};
  Tensor rb{Shape{1, 3, h, w}, std::vector<double>(right.data(), right.data() + right.size())};
  const ModelOutput out = model_forward(m, constant(lb), constant(rb), cfg, times);
  DisparityMap map;
  map.values = Tensor{Shape{h, w},
                      std::vector<double>(out.d1->value.data(),
                                          out.d1->value.data() + out.d1->value.size())};
  map.valid.assign(static_cast<std::size_t>(h * w), 1);
  return map;
}

MetricsReport evaluate_pairs(const Model& m, const RunConfig& cfg,
                             const std::vector<StereoSample>& samples) {
  if (samples.empty()) throw ContractError("evaluate_pairs: empty sample set");
  double epe_px = 0.0, bad3_px = 0.0, d1_px = 0.0;
  std::int64_t n = 0;
  for (const StereoSample& s : samples) {
    const DisparityMap pred = predict_disparity(m, s.left, s.right, cfg);
    const MetricsReport r = compute_metrics(pred, s.gt);
    const double nv = static_cast<double>(r.n_valid);
    epe_px += r.epe * nv;
    bad3_px += r.bad3 * nv;
    d1_px += r.d1 * nv;
    n += r.n_valid;
  }
  MetricsReport total;
  total.n_valid = n;
  total.epe = epe_px / static_cast<double>(n);
  total.bad3 = bad3_px / static_cast<double>(n);
  total.d1 = d1_px / static_cast<double>(n);
  return total;
}

Checkpoint snapshot_params(const AdamW& opt, std::uint64_t cfg_hash, std::uint64_t step,
                           const std::array<std::uint64_t, 4>& rng_state) {
  Checkpoint ckpt;
  ckpt.config_hash = cfg_hash;
  ckpt.step = step;
  ckpt.rng_state = rng_state;
  const auto& params = opt.params();
  ckpt.params.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamState p;
    p.name = params[i].first;
    p.value = params[i].second->value;
    p.m = opt.first_moment(i);
    p.v = opt.second_moment(i);
    ckpt.params.push_back(std::move(p));
  }
  return ckpt;
}

void restore_params(const Checkpoint& ckpt, AdamW& opt) {
  restore_values_only(ckpt, opt.params());
  std::map<std::string, const ParamState*> by_name;
  for (const ParamState& p : ckpt.params) by_name[p.name] = &p;
  for (std::size_t i = 0; i < opt.params().size(); ++i) {
    const ParamState& p = *by_name.at(opt.params()[i].first);
    opt.restore(i, p.m, p.v);
  }
  opt.set_step_count(static_cast<std::int64_t>(ckpt.step));
}

Model load_model(const RunConfig& cfg, const std::string& ckpt_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  if (ckpt.config_hash != config_hash(cfg)) {
    throw ConfigError("checkpoint " + ckpt_path + " was written under a different config (hash " +
                      std::to_string(ckpt.config_hash) + " vs " +
                      std::to_string(config_hash(cfg)) + "); refusing to load");
  }
  const std::int64_t n_tokens = (cfg.height / 4) * (cfg.width / 4);
  Model m = init_model(cfg, n_tokens);
  restore_values_only(ckpt, model_param_list(m, cfg.use_affa));
  return m;
}

TrainResult run_train(const RunConfig& cfg, bool quiet) {
  validate_config(cfg);
  std::filesystem::create_directories(cfg.out_dir);

  const std::vector<StereoSample> train_set = make_train_set(cfg);
  const std::vector<StereoSample> eval_set = make_eval_set(cfg);

  const std::int64_t n_tokens = (cfg.height / 4) * (cfg.width / 4);
  Model model = init_model(cfg, n_tokens);
  AdamW opt(model_param_list(model, cfg.use_affa), 0.9, 0.999, 1e-8, cfg.weight_decay);
  Rng master(static_cast<std::uint64_t>(cfg.seed), 0);
  const std::uint64_t cfg_hash = config_hash(cfg);

  std::int64_t start_step = 0;
  if (!cfg.checkpoint_path.empty() && std::filesystem::exists(cfg.checkpoint_path)) {
    const Checkpoint ckpt = load_checkpoint(cfg.checkpoint_path);
    if (ckpt.config_hash != cfg_hash) {
      throw ConfigError("checkpoint " + cfg.checkpoint_path +
                        " was written under a different config; refusing to resume");
    }
    restore_params(ckpt, opt);
    master.set_state(ckpt.rng_state);
    start_step = static_cast<std::int64_t>(ckpt.step);
    if (!quiet) std::printf("resumed from %s at step %lld\n", cfg.checkpoint_path.c_str(),
                            static_cast<long long>(start_step));
  }

  std::ofstream log(cfg.out_dir + "/train_log.jsonl",
                    start_step > 0 ? std::ios::app : std::ios::trunc);
  if (!log) throw ConfigError("cannot open log in " + cfg.out_dir);

  // halt_step slices a long run; the schedule and batch streams still follow
  // cfg.steps, so the sliced trajectory matches an uninterrupted one.
  const std::int64_t end_step =
      (cfg.halt_step > 0 && cfg.halt_step < cfg.steps) ? cfg.halt_step : cfg.steps;
  double final_loss = 0.0;
  for (std::int64_t step = start_step; step < end_step; ++step) {
    // Batch choice comes from a per-step stream, so a resumed run sees the
    // exact batches an uninterrupted one would.
    Rng pick(static_cast<std::uint64_t>(cfg.seed), 2000000 + static_cast<std::uint64_t>(step));
    std::vector<std::int64_t> idx(static_cast<std::size_t>(cfg.batch_size));
    for (auto& i : idx) i = pick.uniform_int(static_cast<std::int64_t>(train_set.size()));
    const Batch batch = gather_batch(train_set, idx);

    const double lr = one_cycle_lr(step, cfg.steps, cfg.max_lr, cfg.warmup_frac,
                                   cfg.warmup_floor, cfg.final_lr_frac);
    double loss_value = 0.0;
    try {
      const ModelOutput out =
          model_forward(model, constant(batch.left), constant(batch.right), cfg);
      const Var loss =
          total_loss(out.d0, out.d1, batch.gt, batch.valid, cfg.lambda0, cfg.lambda1);
      loss_value = loss->value[0];
      backward(loss);
      clip_grad_norm(opt.params(), cfg.clip_grad_norm);
      opt.step(lr);
    } catch (const NumericsError& e) {
      throw NumericsError("step " + std::to_string(step) + ": " + e.what());
    }
    final_loss = loss_value;

    append_jsonl(log, {{"step", step}, {"loss", loss_value}, {"lr", lr}});
    if (!quiet && (step % 100 == 0 || step + 1 == end_step)) {
      std::printf("step %5lld  loss %.6f  lr %.6g\n", static_cast<long long>(step), loss_value,
                  lr);
      std::fflush(stdout);
    }
  }

  TrainResult result;
  result.final_loss = final_loss;
  result.checkpoint_file = cfg.out_dir + "/model.ckpt";
  save_checkpoint(snapshot_params(opt, cfg_hash, static_cast<std::uint64_t>(end_step),
                                  master.state()),
                  result.checkpoint_file);
  result.train_metrics = evaluate_pairs(model, cfg, train_set);
  result.eval_metrics = evaluate_pairs(model, cfg, eval_set);
  append_jsonl(log, {{"final", true},
                     {"train_epe", result.train_metrics.epe},
                     {"train_bad3", result.train_metrics.bad3},
                     {"train_d1", result.train_metrics.d1},
                     {"eval_epe", result.eval_metrics.epe},
                     {"eval_bad3", result.eval_metrics.bad3},
                     {"eval_d1", result.eval_metrics.d1}});
  if (!quiet) {
    std::printf("train epe %.4f bad3 %.4f d1 %.4f | eval epe %.4f bad3 %.4f d1 %.4f\n",
                result.train_metrics.epe, result.train_metrics.bad3, result.train_metrics.d1,
                result.eval_metrics.epe, result.eval_metrics.bad3, result.eval_metrics.d1);
  }
  return result;
}

}  // namespace mafnet
