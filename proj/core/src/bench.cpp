#include "mafnet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>

#include <nlohmann/json.hpp>

#include "mafnet/aahf.hpp"
#include "mafnet/rng.hpp"

namespace mafnet {

namespace {

double median_seconds(const std::function<void()>& fn, int reps) {
  fn();  // warm-up, untimed
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(reps));
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(times.begin(), times.end());
  const std::size_t mid = times.size() / 2;
  return times.size() % 2 == 1 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
}

// Keep results observable so the calls cannot be optimized away.
volatile double g_sink = 0.0;

}  // namespace

std::vector<BenchRecord> run_attention_bench(const std::vector<std::int64_t>& ns,
                                             const std::vector<std::int64_t>& ks,
                                             std::int64_t d_attn, int reps,
                                             const std::string& out_path, bool quiet) {
  std::ofstream out;
  if (!out_path.empty()) out.open(out_path);
  std::vector<BenchRecord> records;
  Rng rng(20240901);
  for (const std::int64_t n : ns) {
    const Tensor q = Tensor::uniform(Shape{n, d_attn}, rng, -1.0, 1.0);
    const Tensor kk = Tensor::uniform(Shape{n, d_attn}, rng, -1.0, 1.0);
    const Tensor v = Tensor::uniform(Shape{n, d_attn}, rng, -1.0, 1.0);
    const double t_full = median_seconds(
        [&] { g_sink = full_attention(q, kk, v)[0]; }, reps);
    for (const std::int64_t k : ks) {
      if (k > n) continue;
      const Tensor e = averaging_projection(k, n);
      const Tensor f = averaging_projection(k, n);
      BenchRecord r;
      r.n = n;
      r.k = k;
      r.d_attn = d_attn;
      r.t_full = t_full;
      r.t_lin = median_seconds([&] { g_sink = lin_attention(q, kk, v, e, f)[0]; }, reps);
      r.speedup = r.t_lin > 0.0 ? r.t_full / r.t_lin : 0.0;
      // Full materializes one 256-row score chunk; lin the whole n x k
      // score matrix plus the k-token projections.
      r.full_transient_bytes = 8 * std::min<std::int64_t>(n, 256) * n;
      r.lin_transient_bytes = 8 * (n * k + 2 * k * d_attn);
      records.push_back(r);
      if (out) {
        const nlohmann::json rec = {{"n", r.n},
                                    {"k", r.k},
                                    {"d_attn", r.d_attn},
                                    {"t_full", r.t_full},
                                    {"t_lin", r.t_lin},
                                    {"speedup", r.speedup},
                                    {"full_transient_bytes", r.full_transient_bytes},
                                    {"lin_transient_bytes", r.lin_transient_bytes}};
        out << rec.dump() << '\n';
      }
      if (!quiet) {
        std::printf("n %6lld  k %4lld  t_full %9.4fs  t_lin %9.4fs  speedup %6.2fx\n",
                    static_cast<long long>(r.n), static_cast<long long>(r.k), r.t_full, r.t_lin,
                    r.speedup);
        std::fflush(stdout);
      }
    }
  }
  return records;
}

std::vector<BenchRecord> run_attention_bench(const std::string& out_path, bool quiet) {
  return run_attention_bench({1024, 4096, 8192, 16384}, {64, 256}, 32, 10, out_path, quiet);
}

}  // namespace mafnet
