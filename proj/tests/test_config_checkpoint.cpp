#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "mafnet/checkpoint.hpp"
#include "mafnet/config.hpp"
#include "mafnet/errors.hpp"
#include "mafnet/ops.hpp"
#include "mafnet/optim.hpp"
#include "mafnet/rng.hpp"

namespace mafnet {
namespace {

std::string tmp_path(const std::string& name) { return ::testing::TempDir() + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

TEST(Config, DefaultsAreValid) {
  RunConfig cfg;
  EXPECT_NO_THROW(validate_config(cfg));
  EXPECT_EQ(cfg.height, 64);
  EXPECT_EQ(cfg.width, 128);
  EXPECT_EQ(cfg.dmax, 32);
  EXPECT_EQ(cfg.steps, 2000);
  EXPECT_DOUBLE_EQ(cfg.max_lr, 8e-4);
}

TEST(Config, ParsesKeyValueFileWithComments) {
  const std::string path = tmp_path("ok.cfg");
  {
    std::ofstream out(path);
    out << "# training run\n"
        << "height = 32\n"
        << "width=64   # inline comment\n"
        << "dmax = 16\n"
        << "use_affa = false\n"
        << "max_lr = 1e-3\n"
        << "out_dir = /tmp/somewhere\n";
  }
  const RunConfig cfg = load_config(path);
  EXPECT_EQ(cfg.height, 32);
  EXPECT_EQ(cfg.width, 64);
  EXPECT_EQ(cfg.dmax, 16);
  EXPECT_FALSE(cfg.use_affa);
  EXPECT_DOUBLE_EQ(cfg.max_lr, 1e-3);
  EXPECT_EQ(cfg.out_dir, "/tmp/somewhere");
  EXPECT_EQ(cfg.steps, 2000);  // untouched keys keep defaults
  std::remove(path.c_str());
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  const std::string path = tmp_path("bad.cfg");
  {
    std::ofstream out(path);
    out << "heigth = 32\n";  // typo
  }
  try {
    load_config(path);
    FAIL() << "unknown key accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("heigth"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(":1"), std::string::npos);  // file:line
  }
  {
    std::ofstream out(path);
    out << "height = not_a_number\n";
  }
  EXPECT_THROW(load_config(path), ConfigError);
  {
    std::ofstream out(path);
    out << "height 32\n";  // missing '='
  }
  EXPECT_THROW(load_config(path), ConfigError);
  EXPECT_THROW(load_config(tmp_path("missing_file.cfg")), ConfigError);
  std::remove(path.c_str());
}

TEST(Config, ValidationCatchesContractViolations) {
  auto broken = [](auto mutate) {
    RunConfig cfg;
    mutate(cfg);
    return cfg;
  };
  EXPECT_THROW(validate_config(broken([](RunConfig& c) { c.height = 33; })), ConfigError);
  EXPECT_THROW(validate_config(broken([](RunConfig& c) { c.width = 0; })), ConfigError);
  EXPECT_THROW(validate_config(broken([](RunConfig& c) { c.dmax = 30; })), ConfigError);
  EXPECT_THROW(validate_config(broken([](RunConfig& c) { c.dmax = 36; })), ConfigError);
  EXPECT_THROW(validate_config(broken([](RunConfig& c) { c.batch_size = 0; })), ConfigError);
  EXPECT_THROW(validate_config(broken([](RunConfig& c) { c.max_lr = 0.0; })), ConfigError);
  EXPECT_THROW(validate_config(broken([](RunConfig& c) { c.warmup_frac = 1.0; })), ConfigError);
  EXPECT_THROW(validate_config(broken([](RunConfig& c) { c.warmup_floor = 0.0; })), ConfigError);
  EXPECT_THROW(validate_config(broken([](RunConfig& c) { c.lambda1 = -0.5; })), ConfigError);
  EXPECT_THROW(validate_config(broken([](RunConfig& c) { c.halt_step = -1; })), ConfigError);
  // dmax == width/4 sits exactly on the boundary and is allowed.
  EXPECT_NO_THROW(validate_config(broken([](RunConfig& c) { c.dmax = 32; })));
}

TEST(Config, HashIgnoresTransientFieldsOnly) {
  RunConfig a;
  const std::uint64_t base = config_hash(a);

  RunConfig b = a;
  b.out_dir = "elsewhere";
  b.data_dir = "/data";
  b.checkpoint_path = "x.ckpt";
  b.halt_step = 500;
  EXPECT_EQ(config_hash(b), base);

  RunConfig c = a;
  c.dmax = 16;
  EXPECT_NE(config_hash(c), base);
  RunConfig d = a;
  d.use_affa = false;
  EXPECT_NE(config_hash(d), base);
  RunConfig e = a;
  e.seed = 8;
  EXPECT_NE(config_hash(e), base);
}

TEST(Config, SaveLoadRoundTripPreservesEverything) {
  RunConfig cfg;
  cfg.height = 32;
  cfg.width = 64;
  cfg.dmax = 16;
  cfg.max_lr = 3.25e-4;
  cfg.use_affa = false;
  cfg.halt_step = 7;
  cfg.data_dir = "dd";
  cfg.checkpoint_path = "cp.ckpt";
  const std::string path = tmp_path("rt.cfg");
  save_config(cfg, path);
  const RunConfig r = load_config(path);
  EXPECT_EQ(canonical_config(r, true), canonical_config(cfg, true));
  std::remove(path.c_str());
}

TEST(Config, CanonicalFormIsSortedAndFiltered) {
  RunConfig cfg;
  const std::string with = canonical_config(cfg, true);
  const std::string without = canonical_config(cfg, false);
  EXPECT_NE(with.find("out_dir="), std::string::npos);
  EXPECT_EQ(without.find("out_dir="), std::string::npos);
  EXPECT_EQ(without.find("halt_step="), std::string::npos);
  // Sorted: batch_size precedes dmax precedes width.
  EXPECT_LT(without.find("batch_size="), without.find("dmax="));
  EXPECT_LT(without.find("dmax="), without.find("width="));
}

TEST(Schedule, OneCycleEndpoints) {
  const double max_lr = 8e-4;
  // 100 steps, 5% warm-up: ramp over 5 steps, cosine over the rest.
  EXPECT_DOUBLE_EQ(one_cycle_lr(0, 100, max_lr, 0.05, 0.1, 0.01), 0.1 * max_lr);
  EXPECT_DOUBLE_EQ(one_cycle_lr(5, 100, max_lr, 0.05, 0.1, 0.01), max_lr);
  EXPECT_DOUBLE_EQ(one_cycle_lr(99, 100, max_lr, 0.05, 0.1, 0.01), 0.01 * max_lr);
  // Ramp is strictly increasing, decay strictly decreasing.
  for (int s = 1; s <= 5; ++s) {
    EXPECT_GT(one_cycle_lr(s, 100, max_lr, 0.05, 0.1, 0.01),
              one_cycle_lr(s - 1, 100, max_lr, 0.05, 0.1, 0.01));
  }
  for (int s = 6; s < 100; ++s) {
    EXPECT_LT(one_cycle_lr(s, 100, max_lr, 0.05, 0.1, 0.01),
              one_cycle_lr(s - 1, 100, max_lr, 0.05, 0.1, 0.01));
  }
  // No warm-up requested: the peak is step 0.
  EXPECT_DOUBLE_EQ(one_cycle_lr(0, 50, max_lr, 0.0, 0.1, 0.01), max_lr);
  EXPECT_THROW(one_cycle_lr(-1, 100, max_lr, 0.05, 0.1, 0.01), ContractError);
  EXPECT_THROW(one_cycle_lr(100, 100, max_lr, 0.05, 0.1, 0.01), ContractError);
}

TEST(Optimizer, SingleStepMatchesHandComputation) {
  Var w = make_leaf(Tensor(Shape{1}, {1.0}), true, "w");
  AdamW opt({{"w", w}}, 0.9, 0.999, 1e-8, 0.1);
  Var loss = sum_all(mul(w, w));
  backward(loss);  // grad = 2w = 2
  const double lr = 0.01;
  opt.step(lr);

  const double g = 2.0;
  const double decayed = 1.0 * (1.0 - lr * 0.1);
  const double m = 0.1 * g;             // (1-beta1) g
  const double v = 0.001 * g * g;       // (1-beta2) g^2
  const double mhat = m / (1.0 - 0.9);  // t = 1
  const double vhat = v / (1.0 - 0.999);
  const double expect = decayed - lr * mhat / (std::sqrt(vhat) + 1e-8);
  EXPECT_NEAR(w->value[0], expect, 1e-15);
  EXPECT_EQ(opt.step_count(), 1);
  EXPECT_NEAR(opt.first_moment(0)[0], m, 1e-18);
  EXPECT_NEAR(opt.second_moment(0)[0], v, 1e-18);
}

TEST(Optimizer, DecayIsDecoupledFromGradient) {
  // Zero gradient: the only movement is the multiplicative decay.
  Var w = make_leaf(Tensor(Shape{2}, {4.0, -2.0}), true, "w");
  AdamW opt({{"w", w}}, 0.9, 0.999, 1e-8, 0.25);
  Var loss = mul_scalar(sum_all(mul(w, constant(Tensor(Shape{2})))), 1.0);
  backward(loss);  // grad exists and is exactly zero
  opt.step(0.1);
  EXPECT_DOUBLE_EQ(w->value[0], 4.0 * (1.0 - 0.1 * 0.25));
  EXPECT_DOUBLE_EQ(w->value[1], -2.0 * (1.0 - 0.1 * 0.25));
}

TEST(Optimizer, ConvergesOnAQuadratic) {
  Var w = make_leaf(Tensor(Shape{3}, {2.0, -3.0, 0.5}), true, "w");
  AdamW opt({{"w", w}}, 0.9, 0.999, 1e-8, 0.0);
  for (int i = 0; i < 400; ++i) {
    Var loss = sum_all(mul(w, w));
    backward(loss);
    opt.step(0.05);
  }
  for (std::int64_t i = 0; i < 3; ++i) EXPECT_NEAR(w->value[i], 0.0, 1e-2);
}

TEST(Optimizer, RequiresGradAndTrackedLeaves) {
  Var w = make_leaf(Tensor(Shape{1}, {1.0}), true, "w");
  AdamW opt({{"w", w}});
  EXPECT_THROW(opt.step(0.1), ContractError);  // no backward ran, grad missing
  Var frozen = make_leaf(Tensor(Shape{1}, {1.0}), false, "frozen");
  EXPECT_THROW(AdamW({{"frozen", frozen}}), ContractError);
}

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.config_hash = 0x1234abcd5678ef00ull;
  c.step = 77;
  c.rng_state = {1, 2, 3, 4};
  Rng rng(901);
  ParamState scalarp;
  scalarp.name = "affa.tau_low_raw";
  scalarp.value = Tensor::scalar(0.25);
  scalarp.m = Tensor::scalar(0.0);
  scalarp.v = Tensor::scalar(0.0);
  ParamState mat;
  mat.name = "enc.w1";
  mat.value = Tensor::uniform({4, 3, 2, 2}, rng, -1.0, 1.0);
  mat.m = Tensor::uniform({4, 3, 2, 2}, rng, -1e-3, 1e-3);
  mat.v = Tensor::uniform({4, 3, 2, 2}, rng, 0.0, 1e-6);
  c.params = {scalarp, mat};
  return c;
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  const Checkpoint c = sample_checkpoint();
  const std::string p1 = tmp_path("c1.ckpt");
  const std::string p2 = tmp_path("c2.ckpt");
  save_checkpoint(c, p1);
  const Checkpoint r = load_checkpoint(p1);
  EXPECT_EQ(r.config_hash, c.config_hash);
  EXPECT_EQ(r.step, 77u);
  EXPECT_EQ(r.rng_state, c.rng_state);
  ASSERT_EQ(r.params.size(), 2u);
  EXPECT_EQ(r.params[0].name, "affa.tau_low_raw");
  EXPECT_EQ(r.params[0].value.rank(), 0);
  EXPECT_EQ(r.params[0].value[0], 0.25);
  EXPECT_EQ(max_abs_diff(r.params[1].value, c.params[1].value), 0.0);
  EXPECT_EQ(max_abs_diff(r.params[1].m, c.params[1].m), 0.0);
  EXPECT_EQ(max_abs_diff(r.params[1].v, c.params[1].v), 0.0);
  save_checkpoint(r, p2);
  EXPECT_EQ(slurp(p1), slurp(p2));
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST(Checkpoint, FileStartsWithMagic) {
  const std::string p = tmp_path("magic.ckpt");
  save_checkpoint(sample_checkpoint(), p);
  const std::string bytes = slurp(p);
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(bytes.substr(0, 8), "MAFCKPT1");
  std::remove(p.c_str());
}

TEST(Checkpoint, RejectsCorruptInput) {
  const std::string p = tmp_path("corrupt.ckpt");
  {
    std::ofstream out(p, std::ios::binary);
    out << "WRONGMAG" << std::string(64, '\0');
  }
  EXPECT_THROW(load_checkpoint(p), FormatError);
  save_checkpoint(sample_checkpoint(), p);
  const std::string full = slurp(p);
  {
    std::ofstream out(p, std::ios::binary);
    out.write(full.data(), static_cast<std::streamsize>(full.size() / 2));
  }
  EXPECT_THROW(load_checkpoint(p), FormatError);
  EXPECT_THROW(load_checkpoint(tmp_path("never_written.ckpt")), FormatError);
  std::remove(p.c_str());

  Checkpoint bad = sample_checkpoint();
  bad.params[1].m = Tensor(Shape{2, 2});  // moment shape no longer matches value
  EXPECT_THROW(save_checkpoint(bad, p), ContractError);
}

}  // namespace
}  // namespace mafnet
