#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ptrgeo/dataset.hpp"
#include "ptrgeo/models.hpp"

namespace ptrgeo::nn {

struct TrainLogRecord {
  std::size_t step = 0;  // 1-based index of the completed step
  double mean_nll = 0.0;  // per token, over the batch
  double seconds = 0.0;   // wall time since train() started
  double examples_per_sec = 0.0;
};

struct TrainOptions {
  std::size_t steps = 0;       // total step count to reach
  std::size_t start_step = 0;  // steps already done (resume)
  std::size_t checkpoint_every = 0;
  std::function<void(const Model&, std::size_t step)> checkpoint;
  std::function<void(const TrainLogRecord&)> log;
};

struct TrainResult {
  std::vector<TrainLogRecord> log;
  std::size_t steps_done = 0;
};

// Mini-batch SGD with global-norm clipping. Examples for step s are positions
// [s*B, (s+1)*B) of an endless stream of per-epoch shuffles keyed by the seed,
// so a resumed run sees the same batches as an uninterrupted one.
//
// A non-finite loss or gradient throws TrainingError before the parameters
// are touched; the checkpoint sink is never called with a bad state.
TrainResult train(Model& model, std::span<const data::Example> dataset, const HyperParams& hp,
                  const TrainOptions& options);

// Dataset positions of the examples used by `step`.
std::vector<std::size_t> batch_indices(std::size_t dataset_size, std::size_t batch,
                                       std::uint64_t seed, std::size_t step);

struct BatchGradients {
  ad::Gradients grads;  // summed over examples, not normalized
  double nll_sum = 0.0;
  std::size_t tokens = 0;
};

// Per-example tapes over a fixed number of shards; shard sums are reduced in
// shard order so the result does not depend on the thread count.
BatchGradients batch_gradients(const Model& model, std::span<const data::Example> dataset,
                               std::span<const std::size_t> indices);

// Checkpoint file:
//   "PTRN" | u32 version | u32 task | u32 hidden |
//   repeated until EOF: u32 name_len | name | u32 rank | u32 dims[rank] | f64 values
// All integers and floats little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const Model& model);
Model decode_checkpoint(std::string_view bytes);
// Writes to a temporary file and renames it over `path`.
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace ptrgeo::nn
