#include "bivicap/batch.hpp"

#include <algorithm>
#include <future>
#include <numeric>

#include "bivicap/tokens.hpp"

namespace bivicap {

std::vector<int> Batch::caption_of(int b) const {
  std::vector<int> caption{special::bos};
  for (int t = 0; t < targets.rows; ++t) {
    if (target_mask.at(t, b) == 0) break;
    caption.push_back(targets.at(t, b));
  }
  return caption;
}

Batch make_batch(const std::vector<TrainSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("make_batch: empty batch");
  Batch batch;
  int t_max = 0;
  for (const auto& s : samples) {
    if (!s.features || !s.caption || s.caption->size() < 2)
      throw std::invalid_argument("make_batch: malformed sample");
    batch.inputs.push_back(s.features);
    t_max = std::max(t_max, static_cast<int>(s.caption->size()) - 1);
  }
  const int b_count = static_cast<int>(samples.size());
  batch.targets = TokenMatrix(t_max, b_count);
  batch.target_mask = TokenMatrix(t_max, b_count);
  for (int b = 0; b < b_count; ++b) {
    const auto& caption = *samples[b].caption;
    for (std::size_t t = 1; t < caption.size(); ++t) {
      batch.targets.at(static_cast<int>(t) - 1, b) = caption[t];
      batch.target_mask.at(static_cast<int>(t) - 1, b) = 1;
    }
  }
  return batch;
}

std::vector<Batch> make_batches(const Dataset& dataset, int batch_size, Rng& rng) {
  if (batch_size < 1)
    throw std::invalid_argument("make_batches: batch_size must be >= 1");
  std::vector<TrainSample> samples;
  for (const auto& entry : dataset.entries)
    for (const auto& caption : entry.captions)
      samples.push_back({&entry.features, &caption});
  if (samples.empty())
    throw std::invalid_argument("make_batches: dataset '" + dataset.split_name +
                                "' has no captions");

  // shuffle, then group similar frame counts so batches stay homogeneous
  for (std::size_t i = samples.size(); i > 1; --i)
    std::swap(samples[i - 1], samples[rng.uniform_int(0, static_cast<std::int64_t>(i) - 1)]);
  std::stable_sort(samples.begin(), samples.end(),
                   [](const TrainSample& a, const TrainSample& b) {
                     return a.features->frame_count() < b.features->frame_count();
                   });

  std::vector<Batch> batches;
  for (std::size_t pos = 0; pos < samples.size(); pos += batch_size) {
    const auto end = std::min(pos + batch_size, samples.size());
    batches.push_back(make_batch({samples.begin() + pos, samples.begin() + end}));
  }
  for (std::size_t i = batches.size(); i > 1; --i)
    std::swap(batches[i - 1], batches[rng.uniform_int(0, static_cast<std::int64_t>(i) - 1)]);
  return batches;
}

double batch_loss(const ModelParams& model, const Batch& batch,
                  const ForwardOptions& opts) {
  double total = 0.0;
  for (int b = 0; b < batch.size(); ++b)
    total += sentence_loss(model, *batch.inputs[b], batch.caption_of(b), opts);
  return total / batch.size();
}

BackwardResult batch_backward(const ModelParams& model, const Batch& batch,
                              const ForwardOptions& opts, int threads) {
  const int b_count = batch.size();
  const double weight = 1.0 / b_count;
  BackwardResult total;
  total.grads = GradientSet::zeros(model.dims);

  if (threads <= 1) {
    for (int b = 0; b < b_count; ++b) {
      BackwardResult r = backward(model, *batch.inputs[b], batch.caption_of(b), opts);
      total.loss += weight * r.loss;
      add_scaled(total.grads, r.grads, weight);
    }
    return total;
  }

  // waves of `threads` samples; accumulation stays in sample order
  for (int start = 0; start < b_count; start += threads) {
    const int end = std::min(start + threads, b_count);
    std::vector<std::future<BackwardResult>> wave;
    for (int b = start; b < end; ++b)
      wave.push_back(std::async(std::launch::async, [&, b] {
        return backward(model, *batch.inputs[b], batch.caption_of(b), opts);
      }));
    for (auto& fut : wave) {
      BackwardResult r = fut.get();
      total.loss += weight * r.loss;
      add_scaled(total.grads, r.grads, weight);
    }
  }
  return total;
}

}  // namespace bivicap
