#pragma once

#include "bivicap/checkpoint.hpp"

namespace bivicap {

/// Partial caption tracked by beam search. tokens always starts with bos;
/// logprob is the raw sum of per-step log-probabilities.
struct Hypothesis {
  std::vector<int> tokens;
  double logprob = 0.0;
  LstmState state;
  bool finished = false;

  int generated_length() const { return static_cast<int>(tokens.size()) - 1; }
};

struct BeamOptions {
  int beam_width = 10;
  int max_len = 30;          // generated tokens before eos is forced
  bool length_norm = false;  // rank by logprob / generated length
  CellVariant variant = CellVariant::paper;
  InitStateMode init_state = InitStateMode::mean;
};

/// Breadth-limited best-first search; finished hypotheses stay in the beam and
/// compete by score. Returns all surviving hypotheses, best first.
std::vector<Hypothesis> beam_search(const ModelParams& model,
                                    const EncodedVideo& enc,
                                    const BeamOptions& opts);

struct CaptionOptions {
  int beam_width = 10;
  int max_len = 30;
  bool length_norm = false;
};

/// subsample → encode → beam_search → detokenize of the best hypothesis.
std::string caption(const TrainedModel& model, const FrameFeatureSequence& raw,
                    const CaptionOptions& opts = {});

std::vector<Hypothesis> caption_hypotheses(const TrainedModel& model,
                                           const FrameFeatureSequence& raw,
                                           const CaptionOptions& opts = {});

/// Strips the special tokens and joins with single spaces.
std::string detokenize(const Vocabulary& vocab, const std::vector<int>& tokens);

/// `rank TAB logprob TAB caption` lines for the top-k hypotheses.
std::string format_hypotheses_tsv(const Vocabulary& vocab,
                                  const std::vector<Hypothesis>& hyps,
                                  int top_k,
                                  const std::string& id_prefix = "");

}  // namespace bivicap
