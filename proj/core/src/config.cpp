#include "mafnet/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>
#include <vector>

#include "mafnet/errors.hpp"

namespace mafnet {

namespace {

using IntField = std::int64_t RunConfig::*;
using DoubleField = double RunConfig::*;
using BoolField = bool RunConfig::*;
using StringField = std::string RunConfig::*;

struct FieldDesc {
  const char* name;
  std::variant<IntField, DoubleField, BoolField, StringField> member;
  bool transient = false;  // not part of the run identity, excluded from the hash
};

// Single registry drives parse, serialization, and hashing; adding a field
// means one row here.
const std::vector<FieldDesc>& fields() {
  static const std::vector<FieldDesc> f = {
      {"height", &RunConfig::height},
      {"width", &RunConfig::width},
      {"dmax", &RunConfig::dmax},
      {"num_groups", &RunConfig::num_groups},
      {"linformer_k", &RunConfig::linformer_k},
      {"d_attn", &RunConfig::d_attn},
      {"batch_size", &RunConfig::batch_size},
      {"steps", &RunConfig::steps},
      {"halt_step", &RunConfig::halt_step, true},
      {"n_train_pairs", &RunConfig::n_train_pairs},
      {"n_eval_pairs", &RunConfig::n_eval_pairs},
      {"seed", &RunConfig::seed},
      {"max_lr", &RunConfig::max_lr},
      {"warmup_frac", &RunConfig::warmup_frac},
      {"warmup_floor", &RunConfig::warmup_floor},
      {"final_lr_frac", &RunConfig::final_lr_frac},
      {"lambda0", &RunConfig::lambda0},
      {"lambda1", &RunConfig::lambda1},
      {"weight_decay", &RunConfig::weight_decay},
      {"clip_grad_norm", &RunConfig::clip_grad_norm},
      {"use_affa", &RunConfig::use_affa},
      {"data_dir", &RunConfig::data_dir, true},
      {"out_dir", &RunConfig::out_dir, true},
      {"checkpoint_path", &RunConfig::checkpoint_path, true},
  };
  return f;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

void assign_field(RunConfig& cfg, const FieldDesc& fd, const std::string& raw,
                  const std::string& where) {
  const std::string val = trim(raw);
  auto bad = [&] {
    return ConfigError(where + ": bad value '" + val + "' for key '" + fd.name + "'");
  };
  if (std::holds_alternative<IntField>(fd.member)) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(val, &pos);
      if (pos != val.size()) throw bad();
      cfg.*std::get<IntField>(fd.member) = v;
    } catch (const ConfigError&) {
      throw;
    } catch (...) {
      throw bad();
    }
  } else if (std::holds_alternative<DoubleField>(fd.member)) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(val, &pos);
      if (pos != val.size()) throw bad();
      cfg.*std::get<DoubleField>(fd.member) = v;
    } catch (const ConfigError&) {
      throw;
    } catch (...) {
      throw bad();
    }
  } else if (std::holds_alternative<BoolField>(fd.member)) {
    if (val == "true" || val == "1") {
      cfg.*std::get<BoolField>(fd.member) = true;
    } else if (val == "false" || val == "0") {
      cfg.*std::get<BoolField>(fd.member) = false;
    } else {
      throw bad();
    }
  } else {
    cfg.*std::get<StringField>(fd.member) = val;
  }
}

std::string format_field(const RunConfig& cfg, const FieldDesc& fd) {
  if (std::holds_alternative<IntField>(fd.member)) {
    return std::to_string(cfg.*std::get<IntField>(fd.member));
  }
  if (std::holds_alternative<DoubleField>(fd.member)) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", cfg.*std::get<DoubleField>(fd.member));
    return buf;
  }
  if (std::holds_alternative<BoolField>(fd.member)) {
    return cfg.*std::get<BoolField>(fd.member) ? "true" : "false";
  }
  return cfg.*std::get<StringField>(fd.member);
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.resize(hash_pos);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    const std::string where = path + ":" + std::to_string(lineno);
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected 'key = value', got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const auto it = std::find_if(fields().begin(), fields().end(),
                                 [&](const FieldDesc& fd) { return key == fd.name; });
    if (it == fields().end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
    assign_field(cfg, *it, stripped.substr(eq + 1), where);
  }
  validate_config(cfg);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  auto positive = [&](std::int64_t v, const char* name) {
    if (v < 1) fail(std::string(name) + " must be positive, got " + std::to_string(v));
  };
  positive(cfg.height, "height");
  positive(cfg.width, "width");
  positive(cfg.dmax, "dmax");
  positive(cfg.num_groups, "num_groups");
  positive(cfg.linformer_k, "linformer_k");
  positive(cfg.d_attn, "d_attn");
  positive(cfg.batch_size, "batch_size");
  positive(cfg.steps, "steps");
  positive(cfg.n_train_pairs, "n_train_pairs");
  positive(cfg.n_eval_pairs, "n_eval_pairs");
  if (cfg.height % 32 != 0 || cfg.width % 32 != 0) {
    fail("extents must be multiples of 32, got " + std::to_string(cfg.height) + "x" +
         std::to_string(cfg.width));
  }
  if (cfg.dmax % 4 != 0) {
    fail("dmax must be a multiple of 4, got " + std::to_string(cfg.dmax));
  }
  if (cfg.dmax > cfg.width / 4) {
    fail("dmax " + std::to_string(cfg.dmax) + " exceeds width/4 = " +
         std::to_string(cfg.width / 4));
  }
  if (!(cfg.max_lr > 0.0)) fail("max_lr must be positive");
  if (!(cfg.warmup_frac >= 0.0 && cfg.warmup_frac < 1.0)) fail("warmup_frac must be in [0,1)");
  if (!(cfg.warmup_floor > 0.0 && cfg.warmup_floor <= 1.0)) fail("warmup_floor must be in (0,1]");
  if (!(cfg.final_lr_frac > 0.0 && cfg.final_lr_frac <= 1.0)) fail("final_lr_frac must be in (0,1]");
  if (cfg.lambda0 < 0.0 || cfg.lambda1 < 0.0) fail("loss weights must be >= 0");
  if (cfg.weight_decay < 0.0) fail("weight_decay must be >= 0");
  if (cfg.clip_grad_norm < 0.0) fail("clip_grad_norm must be >= 0");
  if (cfg.halt_step < 0) fail("halt_step must be >= 0");
}

std::string canonical_config(const RunConfig& cfg, bool include_transient) {
  std::map<std::string, std::string> rows;
  for (const auto& fd : fields()) {
    if (fd.transient && !include_transient) continue;
    rows[fd.name] = format_field(cfg, fd);
  }
  std::string out;
  for (const auto& [k, v] : rows) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  const std::string text = canonical_config(cfg, false);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config: " + path);
  out << canonical_config(cfg, true);
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace mafnet
