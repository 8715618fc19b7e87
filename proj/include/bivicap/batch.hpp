#pragma once

#include "bivicap/data.hpp"
#include "bivicap/loss.hpp"

namespace bivicap {

/// Row-major integer matrix for padded token blocks.
struct TokenMatrix {
  int rows = 0, cols = 0;
  std::vector<int> data;

  TokenMatrix() = default;
  TokenMatrix(int rows, int cols)
      : rows(rows), cols(cols),
        data(static_cast<std::size_t>(rows) * cols, 0) {}
  int& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  int at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

/// One (video, caption) training sample; non-owning views into a Dataset.
struct TrainSample {
  const FrameFeatureSequence* features = nullptr;
  const std::vector<int>* caption = nullptr;
};

/// Variable-J inputs plus a T_max×B padded target block. Row t of column b is
/// the target token at position t+1 of sample b; the mask is 1 exactly on real
/// targets (the last unmasked row of each column is eos).
struct Batch {
  std::vector<const FrameFeatureSequence*> inputs;
  TokenMatrix targets;
  TokenMatrix target_mask;

  int size() const { return static_cast<int>(inputs.size()); }
  /// Reconstructs sample b's bos-wrapped caption from the padded block.
  std::vector<int> caption_of(int b) const;
};

Batch make_batch(const std::vector<TrainSample>& samples);

/// Flattens every (video, caption) pair, shuffles, groups similar frame
/// counts into the same batch, and shuffles the batch order.
std::vector<Batch> make_batches(const Dataset& dataset, int batch_size, Rng& rng);

/// Mean of the per-sample sentence losses, computed through the padded block.
double batch_loss(const ModelParams& model, const Batch& batch,
                  const ForwardOptions& opts = {});

/// Loss plus the mean per-sample gradient. Per-sample passes may run on up to
/// `threads` workers; gradients are summed in sample order regardless, so the
/// result does not depend on the thread count.
BackwardResult batch_backward(const ModelParams& model, const Batch& batch,
                              const ForwardOptions& opts = {}, int threads = 1);

}  // namespace bivicap
