#pragma once

#include <cstdint>

#include "bivicap/adadelta.hpp"
#include "bivicap/batch.hpp"
#include "bivicap/checkpoint.hpp"
#include "bivicap/inference.hpp"

namespace bivicap {

struct TrainingConfig {
  int batch_size = 64;
  int eval_every = 1000;      // updates between validation evaluations
  int patience = 5;           // consecutive non-improving evaluations
  int stride = 26;            // frame subsampling (applied at data load)
  int val_beam_width = 1;     // 1 = greedy validation decoding
  int max_caption_len = 30;
  std::uint64_t seed = 1;
  CellVariant cell_variant = CellVariant::paper;
  InitStateMode init_state = InitStateMode::mean;

  // model hyperparameters; 0 means "derive": attn_dim from dec_hidden,
  // readout_dim from embed_dim
  int embed_dim = 64;
  int enc_hidden = 64;
  int dec_hidden = 128;
  int attn_dim = 0;
  int readout_dim = 0;

  int min_count = 1;        // vocabulary pruning threshold
  long max_updates = 0;     // 0 = run until early stopping
  double grad_clip = 0.0;   // 0 = off; otherwise max gradient norm
  int threads = 1;
  double adadelta_rho = 0.95;
  double adadelta_eps = 1e-6;

  void validate() const;
  ForwardOptions forward_options() const { return {cell_variant, init_state}; }
  ModelDims model_dims(int feature_dim, int vocab_size) const;
};

struct EvalRecord {
  long update = 0;
  double train_loss = 0.0;
  double val_bleu = 0.0;
  bool best = false;
};

struct TrainResult {
  TrainedModel best;
  double best_bleu = 0.0;
  std::vector<EvalRecord> evals;
  std::string log_text;  // exact bytes of the training log
  long updates = 0;
};

/// Full protocol: shuffled mini-batches, Adadelta updates, periodic validation
/// decoding scored with corpus BLEU, best-checkpoint keeping, early stopping
/// after `patience` consecutive evaluations without improvement.
TrainResult train(const TrainingConfig& cfg, const Dataset& train_set,
                  const Dataset& val_set, const Vocabulary& vocab);

/// Greedy/beam decode of every entry, returned as (video_id, caption).
std::vector<std::pair<std::string, std::string>> decode_dataset(
    const ModelParams& params, const Vocabulary& vocab, const Dataset& dataset,
    const ForwardOptions& opts, int beam_width, int max_len);

/// Corpus BLEU of the decoded dataset against its own captions.
double evaluate_bleu(const ModelParams& params, const Vocabulary& vocab,
                     const Dataset& dataset, const ForwardOptions& opts,
                     int beam_width, int max_len);

// --- random hyperparameter search ---

struct HyperRange {
  int lo = 0, hi = 0;
};

struct SearchRanges {
  HyperRange embed_dim{300, 700};
  HyperRange dec_hidden{1000, 3000};
  HyperRange enc_hidden{100, 2100};

  SearchRanges scaled(double factor) const;
  void validate() const;
};

struct SampledHypers {
  int embed_dim = 0, dec_hidden = 0, enc_hidden = 0;
};

SampledHypers sample_hyperparams(Rng& rng, const SearchRanges& ranges);

struct TrialOutcome {
  int trial = 0;
  SampledHypers hypers;
  double best_bleu = 0.0;
  TrainResult result;
};

/// Runs `trials` independent trainings with uniformly sampled hyperparameters,
/// ranked by best validation BLEU (ties by trial index).
std::vector<TrialOutcome> random_search(const TrainingConfig& base,
                                        const SearchRanges& ranges, int trials,
                                        const Dataset& train_set,
                                        const Dataset& val_set,
                                        const Vocabulary& vocab);

}  // namespace bivicap
