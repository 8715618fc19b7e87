#pragma once

#include <vector>

#include "bivicap/model.hpp"

namespace bivicap {

struct ForwardOptions {
  CellVariant variant = CellVariant::paper;
  InitStateMode init_state = InitStateMode::mean;
};

/// Teacher-forced negative mean log-probability over the target positions.
/// The caption must be bos-wrapped: [bos, w_1, …, w_k, eos].
double sentence_loss(const ModelParams& model, const FrameFeatureSequence& video,
                     const std::vector<int>& caption,
                     const ForwardOptions& opts = {});

struct BackwardResult {
  double loss = 0.0;
  GradientSet grads;
};

/// Exact gradient of sentence_loss w.r.t. every parameter, by reverse
/// accumulation through the decoder steps, attention, fusion and both
/// BLSTM directions.
BackwardResult backward(const ModelParams& model, const FrameFeatureSequence& video,
                        const std::vector<int>& caption,
                        const ForwardOptions& opts = {});

}  // namespace bivicap
