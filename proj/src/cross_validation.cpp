#include <algorithm>
#include <atomic>
#include <mutex>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "mnn/error.hpp"
#include "mnn/evaluation.hpp"

namespace mnn::eval {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(base) ^ a) ^ b);
}

}  // namespace

std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed, int repetition) {
  if (folds < 2) fail(ErrorKind::Usage, "cross-validation needs at least 2 folds");
  if (n < static_cast<std::size_t>(folds)) fail(ErrorKind::Usage, "dataset smaller than the fold count");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0xf01d, static_cast<std::uint64_t>(repetition)));
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold[perm[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  return fold;
}

CvResult cross_validate(const Dataset& data, std::span<const NamedModelConfig> configs,
                        const CvOptions& options) {
  if (options.repetitions < 1) fail(ErrorKind::Usage, "cross-validation needs at least one repetition");
  CvResult result;
  for (int r = 0; r < options.repetitions; ++r) {
    result.fold_of.push_back(assign_folds(data.size(), options.folds, options.seed, r));
  }

  struct Run {
    std::size_t config;
    int repetition;
    int fold;
    std::optional<RunMetrics> metrics;
    std::string error;
  };
  std::vector<Run> runs;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    for (int r = 0; r < options.repetitions; ++r) {
      for (int f = 0; f < options.folds; ++f) runs.push_back({c, r, f, std::nullopt, {}});
    }
  }

  auto execute = [&](Run& run) {
    const auto& fold_of = result.fold_of[static_cast<std::size_t>(run.repetition)];
    Dataset train_set;
    Dataset test_set;
    for (std::size_t i = 0; i < data.size(); ++i) {
      (fold_of[i] == run.fold ? test_set : train_set).push_back(data[i]);
    }
    const auto& cfg = configs[run.config];
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.train.seed, static_cast<std::uint64_t>(run.repetition),
                          static_cast<std::uint64_t>(run.fold));
    try {
      const auto fitted = train(cfg.model, train_set, tc);
      run.metrics = evaluate_model(fitted.model, test_set, options.eval);
    } catch (const std::exception& e) {
      run.error = e.what();
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (auto& run : runs) execute(run);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (int w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) execute(runs[i]);
      });
    }
    for (auto& w : workers) w.join();
  }

  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<RunMetrics> ok;
    std::size_t failed = 0;
    for (const auto& run : runs) {
      if (run.config != c) continue;
      if (run.metrics) {
        ok.push_back(*run.metrics);
      } else {
        ++failed;
        result.failures.push_back(
            fmt::format("{} rep {} fold {}: {}", configs[c].name, run.repetition, run.fold, run.error));
      }
    }
    for (auto& report : summarize(configs[c].name, ok, failed)) result.reports.push_back(std::move(report));
  }
  return result;
}

}  // namespace mnn::eval
