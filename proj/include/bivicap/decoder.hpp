#pragma once

#include <vector>

#include "bivicap/encoder.hpp"

namespace bivicap {

/// Single-layered alignment perceptron:
/// e_j = w_scoreᵀ tanh(W_a h_prev + U_a w_j + b_a), alpha = softmax(e).
struct AttentionParams {
  Matrix W_a;      // A×H
  Matrix U_a;      // A×(d+2D)
  Matrix b_a;      // A×1
  Matrix w_score;  // A×1

  int attn_dim() const { return W_a.rows(); }

  static AttentionParams random(int attn, int dec_hidden, int enc_width, Rng& rng);
  static AttentionParams zeros(int attn, int dec_hidden, int enc_width);
};

struct Attention {
  Matrix z;                   // (d+2D)×1 context vector
  std::vector<double> alpha;  // J weights, nonnegative, sum 1
};

/// valid_rows < 0 attends over every row; otherwise rows >= valid_rows are
/// masked out (weight exactly 0), for callers working on frame-padded blocks.
Attention attend(const AttentionParams& p, const Matrix& h_prev,
                 const EncodedVideo& enc, int valid_rows = -1);

/// Decoder cell: gates g = σ(W_g E(y) + U_g h_prev + A_g z + b_g), candidate
/// with tanh, state update as in the encoder cell.
struct DecoderCellParams {
  Matrix W_i, U_i, A_i, b_i;
  Matrix W_f, U_f, A_f, b_f;
  Matrix W_o, U_o, A_o, b_o;
  Matrix W_c, U_c, A_c, b_c;

  int hidden_dim() const { return U_i.rows(); }
  int embed_dim() const { return W_i.cols(); }
  int context_dim() const { return A_i.cols(); }

  static DecoderCellParams random(int hidden, int embed, int context, Rng& rng);
  static DecoderCellParams zeros(int hidden, int embed, int context);
};

/// Deep output: p = softmax(U_p tanh(W_p [h; z; E(y)] + b_p) + d_out).
struct ReadoutParams {
  Matrix W_p;    // R×(H + (d+2D) + m)
  Matrix b_p;    // R×1
  Matrix U_p;    // V×R
  Matrix d_out;  // V×1

  int readout_dim() const { return W_p.rows(); }
  int vocab_size() const { return U_p.rows(); }

  static ReadoutParams random(int readout, int dec_hidden, int enc_width,
                              int embed, int vocab, Rng& rng);
  static ReadoutParams zeros(int readout, int dec_hidden, int enc_width,
                             int embed, int vocab);
};

struct DecoderParams {
  DecoderCellParams cell;
  AttentionParams attention;
  Matrix embedding;  // m×V, column per token
  ReadoutParams readout;
  Matrix init_h, init_c;  // H×(d+2D) projections of the mean encoder output

  int hidden_dim() const { return cell.hidden_dim(); }
  int embed_dim() const { return embedding.rows(); }
  int vocab_size() const { return embedding.cols(); }
};

struct DecodeStep {
  Matrix h, c;                   // H×1
  std::vector<double> alpha;     // J
  std::vector<double> logprobs;  // V
};

DecodeStep decode_step(const DecoderParams& p, int prev_token,
                       const LstmState& state, const EncodedVideo& enc,
                       CellVariant variant = CellVariant::paper);

enum class InitStateMode { mean, zero };

/// h_0 = tanh(init_h · mean_j w_j), likewise c_0; or zero vectors.
LstmState init_decoder_state(const DecoderParams& p, const EncodedVideo& enc,
                             InitStateMode mode = InitStateMode::mean);

/// E(token) as an m×1 column.
Matrix embedding_column(const Matrix& embedding, int token);

// --- traced forward + backward, used by training ---

struct AttendTrace {
  Matrix scored;  // A×J, column j is tanh(W_a h_prev + U_a w_j + b_a)
  std::vector<double> alpha;
  Matrix z;
};

struct DecodeStepTrace {
  int prev_token = 0;
  LstmState prev;  // h_{t-1}, c_{t-1}
  AttendTrace att;
  LstmTrace cell;
  Matrix embedded;           // E(prev_token), m×1
  Matrix readout_act;        // R×1, tanh layer output
  std::vector<double> probs; // V, softmax of the logits
};

DecodeStepTrace decode_step_traced(const DecoderParams& p, int prev_token,
                                   const LstmState& state, const EncodedVideo& enc,
                                   CellVariant variant);

/// Reverse-mode step. d_logits is the loss gradient w.r.t. the pre-softmax
/// logits; dh_in/dc_in flow back from the following step. Accumulates
/// parameter gradients into `grad` (a zero-initialised shape mirror), encoder
/// row gradients into d_enc (J×(d+2D)), and emits dh_prev/dc_prev.
void decode_step_backward(const DecoderParams& p, const DecodeStepTrace& tr,
                          const EncodedVideo& enc, const Matrix& d_logits,
                          const Matrix& dh_in, const Matrix& dc_in,
                          CellVariant variant, DecoderParams& grad,
                          Matrix& d_enc, Matrix& dh_prev, Matrix& dc_prev);

/// Backward through init_decoder_state (mean mode); accumulates into grad and d_enc.
void init_state_backward(const DecoderParams& p, const EncodedVideo& enc,
                         const LstmState& state0, const Matrix& dh0,
                         const Matrix& dc0, DecoderParams& grad, Matrix& d_enc);

}  // namespace bivicap
