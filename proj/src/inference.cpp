#include "bivicap/inference.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "bivicap/tokens.hpp"

namespace bivicap {

namespace {

double rank_score(const Hypothesis& h, bool length_norm) {
  if (!length_norm) return h.logprob;
  return h.logprob / std::max(1, h.generated_length());
}

}  // namespace

std::vector<Hypothesis> beam_search(const ModelParams& model,
                                    const EncodedVideo& enc,
                                    const BeamOptions& opts) {
  if (opts.beam_width < 1)
    throw std::invalid_argument("beam_search: beam width must be >= 1, got " +
                                std::to_string(opts.beam_width));
  if (opts.max_len < 1)
    throw std::invalid_argument("beam_search: max length must be >= 1, got " +
                                std::to_string(opts.max_len));

  const int vocab = model.dims.vocab_size;
  Hypothesis root;
  root.tokens = {special::bos};
  root.state = init_decoder_state(model.dec, enc, opts.init_state);
  std::vector<Hypothesis> beam{std::move(root)};

  auto by_score_desc = [&](const Hypothesis& a, const Hypothesis& b) {
    return rank_score(a, opts.length_norm) > rank_score(b, opts.length_norm);
  };

  for (int step = 0; step < opts.max_len; ++step) {
    bool any_open = false;
    for (const auto& h : beam) any_open |= !h.finished;
    if (!any_open) break;

    std::vector<Hypothesis> candidates;
    candidates.reserve(beam.size() * vocab);
    for (auto& hyp : beam) {
      if (hyp.finished) {
        candidates.push_back(std::move(hyp));
        continue;
      }
      DecodeStep out = decode_step(model.dec, hyp.tokens.back(), hyp.state, enc,
                                   opts.variant);
      LstmState next{std::move(out.h), std::move(out.c)};
      for (int v = 0; v < vocab; ++v) {
        Hypothesis cand;
        cand.tokens = hyp.tokens;
        cand.tokens.push_back(v);
        cand.logprob = hyp.logprob + out.logprobs[v];
        cand.state = next;
        cand.finished = v == special::eos;
        candidates.push_back(std::move(cand));
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(), by_score_desc);
    if (static_cast<int>(candidates.size()) > opts.beam_width)
      candidates.resize(opts.beam_width);
    beam = std::move(candidates);
  }

  // force eos on anything still open at the length limit
  for (auto& hyp : beam) {
    if (hyp.finished) continue;
    DecodeStep out = decode_step(model.dec, hyp.tokens.back(), hyp.state, enc,
                                 opts.variant);
    hyp.logprob += out.logprobs[special::eos];
    hyp.tokens.push_back(special::eos);
    hyp.state = {std::move(out.h), std::move(out.c)};
    hyp.finished = true;
  }
  std::stable_sort(beam.begin(), beam.end(), by_score_desc);
  return beam;
}

std::string detokenize(const Vocabulary& vocab, const std::vector<int>& tokens) {
  std::string out;
  for (int id : tokens) {
    if (Vocabulary::is_special(id)) continue;
    if (!out.empty()) out += ' ';
    out += vocab.token(id);
  }
  return out;
}

std::vector<Hypothesis> caption_hypotheses(const TrainedModel& model,
                                           const FrameFeatureSequence& raw,
                                           const CaptionOptions& opts) {
  if (raw.feature_dim() != model.params.dims.feature_dim)
    throw ShapeError("caption: features for '" + raw.video_id + "' have d=" +
                     std::to_string(raw.feature_dim()) + " but the model expects d=" +
                     std::to_string(model.params.dims.feature_dim));
  FrameFeatureSequence seq = subsample(raw, model.stride);
  EncodedVideo enc = encode(model.params.enc_fwd, model.params.enc_bwd, seq,
                            model.variant);
  BeamOptions beam_opts;
  beam_opts.beam_width = opts.beam_width;
  beam_opts.max_len = opts.max_len;
  beam_opts.length_norm = opts.length_norm;
  beam_opts.variant = model.variant;
  beam_opts.init_state = model.init_state;
  return beam_search(model.params, enc, beam_opts);
}

std::string caption(const TrainedModel& model, const FrameFeatureSequence& raw,
                    const CaptionOptions& opts) {
  auto hyps = caption_hypotheses(model, raw, opts);
  return detokenize(model.vocab, hyps.front().tokens);
}

std::string format_hypotheses_tsv(const Vocabulary& vocab,
                                  const std::vector<Hypothesis>& hyps,
                                  int top_k, const std::string& id_prefix) {
  std::ostringstream out;
  const int n = std::min<int>(top_k, static_cast<int>(hyps.size()));
  for (int i = 0; i < n; ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", hyps[i].logprob);
    if (!id_prefix.empty()) out << id_prefix << '\t';
    out << (i + 1) << '\t' << buf << '\t'
        << detokenize(vocab, hyps[i].tokens) << '\n';
  }
  return out.str();
}

}  // namespace bivicap
