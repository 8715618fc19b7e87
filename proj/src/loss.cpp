#include "bivicap/loss.hpp"

#include <cmath>

#include "bivicap/tokens.hpp"

namespace bivicap {

namespace {

void check_caption(const std::vector<int>& caption, int vocab_size) {
  if (caption.size() < 2)
    throw std::invalid_argument("sentence_loss: caption needs at least bos and "
                                "eos, got " + std::to_string(caption.size()) +
                                " token(s)");
  if (caption.front() != special::bos || caption.back() != special::eos)
    throw std::invalid_argument("sentence_loss: caption must start with bos and "
                                "end with eos");
  for (int id : caption)
    if (id < 0 || id >= vocab_size)
      throw std::out_of_range("sentence_loss: token " + std::to_string(id) +
                              " outside vocabulary of size " +
                              std::to_string(vocab_size));
}

struct SentenceForward {
  BlstmTrace enc_trace;
  EncodedVideo enc;
  LstmState state0;
  std::vector<DecodeStepTrace> steps;  // steps[t-1] produced h_t and p(y_t | ·)
  double loss = 0.0;
};

SentenceForward run_forward(const ModelParams& model,
                            const FrameFeatureSequence& video,
                            const std::vector<int>& caption,
                            const ForwardOptions& opts) {
  check_caption(caption, model.dims.vocab_size);
  SentenceForward fwd;
  fwd.enc = encode_traced(model.enc_fwd, model.enc_bwd, video, opts.variant,
                          fwd.enc_trace);
  fwd.state0 = init_decoder_state(model.dec, fwd.enc, opts.init_state);

  const std::size_t targets = caption.size() - 1;
  fwd.steps.reserve(targets);
  LstmState state = fwd.state0;
  double total = 0.0;
  for (std::size_t t = 1; t <= targets; ++t) {
    fwd.steps.push_back(decode_step_traced(model.dec, caption[t - 1], state,
                                           fwd.enc, opts.variant));
    const DecodeStepTrace& tr = fwd.steps.back();
    total -= std::log(std::max(tr.probs[caption[t]], 1e-300));
    state = {tr.cell.h, tr.cell.c};
  }
  fwd.loss = total / static_cast<double>(targets);
  return fwd;
}

}  // namespace

double sentence_loss(const ModelParams& model, const FrameFeatureSequence& video,
                     const std::vector<int>& caption, const ForwardOptions& opts) {
  return run_forward(model, video, caption, opts).loss;
}

BackwardResult backward(const ModelParams& model, const FrameFeatureSequence& video,
                        const std::vector<int>& caption, const ForwardOptions& opts) {
  SentenceForward fwd = run_forward(model, video, caption, opts);
  const int targets = static_cast<int>(caption.size()) - 1;
  const int hidden = model.dims.dec_hidden;
  const double inv_t = 1.0 / targets;

  BackwardResult out;
  out.loss = fwd.loss;
  out.grads = ModelParams::zeros(model.dims);

  Matrix d_enc(fwd.enc.frame_count(), fwd.enc.width());
  Matrix dh(hidden, 1), dc(hidden, 1);
  for (int t = targets; t >= 1; --t) {
    const DecodeStepTrace& tr = fwd.steps[t - 1];
    Matrix d_logits(model.dims.vocab_size, 1);
    for (int v = 0; v < model.dims.vocab_size; ++v) d_logits[v] = tr.probs[v] * inv_t;
    d_logits[caption[t]] -= inv_t;

    Matrix dh_prev(hidden, 1), dc_prev(hidden, 1);
    decode_step_backward(model.dec, tr, fwd.enc, d_logits, dh, dc, opts.variant,
                         out.grads.dec, d_enc, dh_prev, dc_prev);
    dh = std::move(dh_prev);
    dc = std::move(dc_prev);
  }

  if (opts.init_state == InitStateMode::mean)
    init_state_backward(model.dec, fwd.enc, fwd.state0, dh, dc, out.grads.dec,
                        d_enc);
  blstm_backward(model.enc_fwd, model.enc_bwd, video, fwd.enc_trace, d_enc,
                 opts.variant, out.grads.enc_fwd, out.grads.enc_bwd);
  return out;
}

}  // namespace bivicap
