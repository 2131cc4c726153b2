#include "ptrgeo/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "ptrgeo/error.hpp"
#include "ptrgeo/parallel.hpp"
#include "ptrgeo/rng.hpp"

namespace ptrgeo::nn {

namespace {

constexpr std::size_t kShards = 8;
constexpr std::uint64_t kShuffleSalt = 0x5eed5eed5eedULL;

class EpochSampler {
 public:
  EpochSampler(std::size_t size, std::uint64_t seed) : size_(size), seed_(seed) {}

  std::size_t at(std::size_t position) {
    const std::size_t epoch = position / size_;
    auto it = cache_.find(epoch);
    if (it == cache_.end()) {
      if (cache_.size() > 4) cache_.erase(cache_.begin());
      std::vector<std::size_t> perm(size_);
      std::iota(perm.begin(), perm.end(), 0);
      Pcg64 rng(seed_ ^ kShuffleSalt, epoch);
      rng.shuffle(std::span<std::size_t>(perm));
      it = cache_.emplace(epoch, std::move(perm)).first;
    }
    return it->second[position % size_];
  }

 private:
  std::size_t size_;
  std::uint64_t seed_;
  std::map<std::size_t, std::vector<std::size_t>> cache_;
};

}  // namespace

std::vector<std::size_t> batch_indices(std::size_t dataset_size, std::size_t batch,
                                       std::uint64_t seed, std::size_t step) {
  if (dataset_size == 0) throw ArgumentError("empty dataset");
  EpochSampler sampler(dataset_size, seed);
  std::vector<std::size_t> out(batch);
  for (std::size_t b = 0; b < batch; ++b) out[b] = sampler.at(step * batch + b);
  return out;
}

BatchGradients batch_gradients(const Model& model, std::span<const data::Example> dataset,
                               std::span<const std::size_t> indices) {
  const std::size_t shards = std::min(kShards, std::max<std::size_t>(1, indices.size()));
  std::vector<BatchGradients> parts(shards);
  parallel_for(shards, [&](std::size_t s) {
    BatchGradients& part = parts[s];
    part.grads = ad::Gradients(model.params());
    const std::size_t begin = indices.size() * s / shards;
    const std::size_t end = indices.size() * (s + 1) / shards;
    for (std::size_t i = begin; i < end; ++i) {
      const data::Example& ex = dataset[indices[i]];
      ad::Tape tape;
      Var loss = model.forward_nll(tape, ex);
      tape.backward(loss, &part.grads);
      part.nll_sum += loss.value().item();
      part.tokens += ex.output.size() + 1;
    }
    part.grads.flush();
  });
  BatchGradients total = std::move(parts[0]);
  for (std::size_t s = 1; s < shards; ++s) {
    total.grads.add(parts[s].grads);
    total.nll_sum += parts[s].nll_sum;
    total.tokens += parts[s].tokens;
  }
  return total;
}

TrainResult train(Model& model, std::span<const data::Example> dataset, const HyperParams& hp,
                  const TrainOptions& options) {
  hp.validate();
  if (dataset.empty()) throw ArgumentError("training needs a non-empty dataset");
  for (const auto& ex : dataset) {
    if (ex.task != model.task()) {
      throw ArgumentError("dataset task " + std::string(to_string(ex.task)) +
                          " does not match model task " + std::string(to_string(model.task())));
    }
    model.check_length(ex.n());
  }

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  EpochSampler sampler(dataset.size(), hp.seed);
  TrainResult result;
  std::vector<std::size_t> indices(hp.batch);
  for (std::size_t step = options.start_step; step < options.steps; ++step) {
    for (std::size_t b = 0; b < hp.batch; ++b) indices[b] = sampler.at(step * hp.batch + b);
    BatchGradients bg = batch_gradients(model, dataset, indices);
    const double mean = bg.nll_sum / static_cast<double>(bg.tokens);
    if (!std::isfinite(mean)) {
      throw TrainingError("non-finite loss at step " + std::to_string(step + 1));
    }
    bg.grads.scale(1.0 / static_cast<double>(bg.tokens));
    ad::sgd_step(model.params(), bg.grads, hp.lr, hp.clip);

    TrainLogRecord rec;
    rec.step = step + 1;
    rec.mean_nll = mean;
    rec.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    const double done = static_cast<double>((rec.step - options.start_step) * hp.batch);
    rec.examples_per_sec = rec.seconds > 0.0 ? done / rec.seconds : 0.0;
    result.log.push_back(rec);
    if (options.log) options.log(rec);
    result.steps_done = rec.step;
    if (options.checkpoint && options.checkpoint_every &&
        rec.step % options.checkpoint_every == 0) {
      options.checkpoint(model, rec.step);
    }
  }
  if (options.checkpoint && result.steps_done &&
      !(options.checkpoint_every && result.steps_done % options.checkpoint_every == 0)) {
    options.checkpoint(model, result.steps_done);
  }
  return result;
}

}  // namespace ptrgeo::nn
