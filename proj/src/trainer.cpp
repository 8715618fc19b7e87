#include "bivicap/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bivicap/metrics.hpp"
#include "bivicap/tokens.hpp"

namespace bivicap {

void TrainingConfig::validate() const {
  auto positive = [](const char* name, long v) {
    if (v < 1)
      throw std::invalid_argument(std::string("TrainingConfig: ") + name +
                                  " must be >= 1, got " + std::to_string(v));
  };
  positive("batch_size", batch_size);
  positive("eval_every", eval_every);
  positive("patience", patience);
  positive("stride", stride);
  positive("val_beam_width", val_beam_width);
  positive("max_caption_len", max_caption_len);
  positive("embed_dim", embed_dim);
  positive("enc_hidden", enc_hidden);
  positive("dec_hidden", dec_hidden);
  positive("threads", threads);
  if (attn_dim < 0 || readout_dim < 0)
    throw std::invalid_argument("TrainingConfig: negative derived dimension");
  if (max_updates < 0)
    throw std::invalid_argument("TrainingConfig: max_updates must be >= 0");
  if (grad_clip < 0.0)
    throw std::invalid_argument("TrainingConfig: grad_clip must be >= 0");
}

ModelDims TrainingConfig::model_dims(int feature_dim, int vocab_size) const {
  ModelDims dims;
  dims.feature_dim = feature_dim;
  dims.enc_hidden = enc_hidden;
  dims.dec_hidden = dec_hidden;
  dims.embed_dim = embed_dim;
  dims.attn_dim = attn_dim > 0 ? attn_dim : dec_hidden;
  dims.readout_dim = readout_dim > 0 ? readout_dim : embed_dim;
  dims.vocab_size = vocab_size;
  return dims;
}

namespace {

std::vector<std::string> hypothesis_tokens(const Vocabulary& vocab,
                                           const std::vector<int>& ids) {
  std::vector<std::string> out;
  for (int id : ids)
    if (!Vocabulary::is_special(id)) out.push_back(vocab.token(id));
  return out;
}

std::vector<std::string> reference_tokens(const Vocabulary& vocab,
                                          const std::vector<int>& ids) {
  std::vector<std::string> out;
  for (int id : ids) {
    if (id == special::bos || id == special::eos || id == special::pad) continue;
    out.push_back(vocab.token(id));  // unk stays, as the model saw it
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> decode_dataset(
    const ModelParams& params, const Vocabulary& vocab, const Dataset& dataset,
    const ForwardOptions& opts, int beam_width, int max_len) {
  std::vector<std::pair<std::string, std::string>> out;
  BeamOptions beam_opts;
  beam_opts.beam_width = beam_width;
  beam_opts.max_len = max_len;
  beam_opts.variant = opts.variant;
  beam_opts.init_state = opts.init_state;
  for (const auto& entry : dataset.entries) {
    EncodedVideo enc = encode(params.enc_fwd, params.enc_bwd, entry.features,
                              opts.variant);
    auto hyps = beam_search(params, enc, beam_opts);
    out.emplace_back(entry.video_id, detokenize(vocab, hyps.front().tokens));
  }
  return out;
}

double evaluate_bleu(const ModelParams& params, const Vocabulary& vocab,
                     const Dataset& dataset, const ForwardOptions& opts,
                     int beam_width, int max_len) {
  BeamOptions beam_opts;
  beam_opts.beam_width = beam_width;
  beam_opts.max_len = max_len;
  beam_opts.variant = opts.variant;
  beam_opts.init_state = opts.init_state;
  TokenizedCorpus corpus;
  for (const auto& entry : dataset.entries) {
    EncodedVideo enc = encode(params.enc_fwd, params.enc_bwd, entry.features,
                              opts.variant);
    auto hyps = beam_search(params, enc, beam_opts);
    CorpusEntry ce;
    ce.id = entry.video_id;
    ce.hypothesis = hypothesis_tokens(vocab, hyps.front().tokens);
    for (const auto& caption : entry.captions)
      ce.references.push_back(reference_tokens(vocab, caption));
    corpus.entries.push_back(std::move(ce));
  }
  return bleu(corpus);
}

TrainResult train(const TrainingConfig& cfg, const Dataset& train_set,
                  const Dataset& val_set, const Vocabulary& vocab) {
  cfg.validate();
  if (train_set.entries.empty() || train_set.caption_count() == 0)
    throw std::invalid_argument("train: empty training split");
  if (val_set.entries.empty() || val_set.caption_count() == 0)
    throw std::invalid_argument("train: empty validation split");
  if (vocab.size() <= special::count)
    throw std::invalid_argument("train: vocabulary holds only the special "
                                "tokens; no words to learn");

  const int feature_dim = train_set.entries.front().features.feature_dim();
  const ModelDims dims = cfg.model_dims(feature_dim, vocab.size());
  const ForwardOptions opts = cfg.forward_options();

  Rng rng(cfg.seed);
  ModelParams model = ModelParams::random(dims, rng);
  AdadeltaState optimizer(dims, cfg.adadelta_rho, cfg.adadelta_eps);

  TrainResult result;
  result.best_bleu = -std::numeric_limits<double>::infinity();
  std::string log;

  long update = 0;
  int evals_since_best = 0;
  double loss_sum = 0.0;
  long loss_count = 0;
  bool stop = false;

  auto run_eval = [&] {
    const double val_bleu = evaluate_bleu(model, vocab, val_set, opts,
                                          cfg.val_beam_width, cfg.max_caption_len);
    const double train_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    loss_sum = 0.0;
    loss_count = 0;
    const bool best = val_bleu > result.best_bleu;
    if (best) {
      result.best_bleu = val_bleu;
      result.best = TrainedModel{model, vocab, cfg.cell_variant, cfg.init_state,
                                 cfg.stride};
      evals_since_best = 0;
    } else {
      ++evals_since_best;
    }
    result.evals.push_back({update, train_loss, val_bleu, best});
    char line[128];
    std::snprintf(line, sizeof(line), "%ld\t%.6f\t%.4f\t%d\n", update, train_loss,
                  val_bleu, best ? 1 : 0);
    log += line;
    if (evals_since_best >= cfg.patience) stop = true;
  };

  while (!stop) {
    auto batches = make_batches(train_set, cfg.batch_size, rng);
    for (auto& batch : batches) {
      BackwardResult step = batch_backward(model, batch, opts, cfg.threads);
      if (cfg.grad_clip > 0.0) clip_gradients(step.grads, cfg.grad_clip);
      adadelta_update(model, step.grads, optimizer);
      ++update;
      loss_sum += step.loss;
      ++loss_count;
      if (update % cfg.eval_every == 0) run_eval();
      if (cfg.max_updates > 0 && update >= cfg.max_updates) stop = true;
      if (stop) break;
    }
  }
  if (result.evals.empty()) run_eval();  // max_updates shorter than eval_every

  result.updates = update;
  result.log_text = std::move(log);
  return result;
}

SearchRanges SearchRanges::scaled(double factor) const {
  if (factor <= 0.0)
    throw std::invalid_argument("SearchRanges: scale factor must be > 0");
  auto apply = [&](HyperRange r) {
    return HyperRange{std::max(1, static_cast<int>(std::lround(r.lo * factor))),
                      std::max(1, static_cast<int>(std::lround(r.hi * factor)))};
  };
  return {apply(embed_dim), apply(dec_hidden), apply(enc_hidden)};
}

void SearchRanges::validate() const {
  for (const auto& [name, r] :
       {std::pair<const char*, HyperRange>{"embed_dim", embed_dim},
        {"dec_hidden", dec_hidden},
        {"enc_hidden", enc_hidden}}) {
    if (r.lo < 1 || r.hi < r.lo)
      throw std::invalid_argument(std::string("SearchRanges: invalid ") + name +
                                  " range [" + std::to_string(r.lo) + ", " +
                                  std::to_string(r.hi) + "]");
  }
}

SampledHypers sample_hyperparams(Rng& rng, const SearchRanges& ranges) {
  ranges.validate();
  SampledHypers h;
  h.embed_dim = static_cast<int>(rng.uniform_int(ranges.embed_dim.lo, ranges.embed_dim.hi));
  h.dec_hidden = static_cast<int>(rng.uniform_int(ranges.dec_hidden.lo, ranges.dec_hidden.hi));
  h.enc_hidden = static_cast<int>(rng.uniform_int(ranges.enc_hidden.lo, ranges.enc_hidden.hi));
  return h;
}

std::vector<TrialOutcome> random_search(const TrainingConfig& base,
                                        const SearchRanges& ranges, int trials,
                                        const Dataset& train_set,
                                        const Dataset& val_set,
                                        const Vocabulary& vocab) {
  if (trials < 1)
    throw std::invalid_argument("random_search: trials must be >= 1, got " +
                                std::to_string(trials));
  ranges.validate();

  Rng sampler(base.seed);
  std::vector<TrialOutcome> outcomes;
  for (int trial = 0; trial < trials; ++trial) {
    TrialOutcome outcome;
    outcome.trial = trial;
    outcome.hypers = sample_hyperparams(sampler, ranges);
    TrainingConfig cfg = base;
    cfg.embed_dim = outcome.hypers.embed_dim;
    cfg.dec_hidden = outcome.hypers.dec_hidden;
    cfg.enc_hidden = outcome.hypers.enc_hidden;
    cfg.attn_dim = 0;     // derived from the sampled decoder size
    cfg.readout_dim = 0;  // derived from the sampled embedding size
    cfg.seed = base.seed + 7919ULL * (static_cast<std::uint64_t>(trial) + 1);
    outcome.result = train(cfg, train_set, val_set, vocab);
    outcome.best_bleu = outcome.result.best_bleu;
    outcomes.push_back(std::move(outcome));
  }
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const TrialOutcome& a, const TrialOutcome& b) {
                     return a.best_bleu > b.best_bleu;
                   });
  return outcomes;
}

}  // namespace bivicap
