#include "bivicap/decoder.hpp"

#include <cmath>

namespace bivicap {

AttentionParams AttentionParams::random(int attn, int dec_hidden, int enc_width,
                                        Rng& rng) {
  AttentionParams p;
  p.W_a = init_matrix(rng, attn, dec_hidden, InitScheme::uniform_scaled);
  p.U_a = init_matrix(rng, attn, enc_width, InitScheme::uniform_scaled);
  p.b_a = Matrix(attn, 1);
  p.w_score = init_matrix(rng, attn, 1, InitScheme::uniform_scaled);
  return p;
}

AttentionParams AttentionParams::zeros(int attn, int dec_hidden, int enc_width) {
  AttentionParams p;
  p.W_a = Matrix(attn, dec_hidden);
  p.U_a = Matrix(attn, enc_width);
  p.b_a = Matrix(attn, 1);
  p.w_score = Matrix(attn, 1);
  return p;
}

DecoderCellParams DecoderCellParams::random(int hidden, int embed, int context,
                                            Rng& rng) {
  auto w = [&] { return init_matrix(rng, hidden, embed, InitScheme::uniform_scaled); };
  auto u = [&] { return init_matrix(rng, hidden, hidden, InitScheme::uniform_scaled); };
  auto a = [&] { return init_matrix(rng, hidden, context, InitScheme::uniform_scaled); };
  auto b = [&] { return Matrix(hidden, 1); };
  DecoderCellParams p;
  p.W_i = w(); p.U_i = u(); p.A_i = a(); p.b_i = b();
  p.W_f = w(); p.U_f = u(); p.A_f = a(); p.b_f = b();
  p.W_o = w(); p.U_o = u(); p.A_o = a(); p.b_o = b();
  p.W_c = w(); p.U_c = u(); p.A_c = a(); p.b_c = b();
  return p;
}

DecoderCellParams DecoderCellParams::zeros(int hidden, int embed, int context) {
  DecoderCellParams p;
  auto w = [&] { return Matrix(hidden, embed); };
  auto u = [&] { return Matrix(hidden, hidden); };
  auto a = [&] { return Matrix(hidden, context); };
  auto b = [&] { return Matrix(hidden, 1); };
  p.W_i = w(); p.U_i = u(); p.A_i = a(); p.b_i = b();
  p.W_f = w(); p.U_f = u(); p.A_f = a(); p.b_f = b();
  p.W_o = w(); p.U_o = u(); p.A_o = a(); p.b_o = b();
  p.W_c = w(); p.U_c = u(); p.A_c = a(); p.b_c = b();
  return p;
}

ReadoutParams ReadoutParams::random(int readout, int dec_hidden, int enc_width,
                                    int embed, int vocab, Rng& rng) {
  ReadoutParams p;
  p.W_p = init_matrix(rng, readout, dec_hidden + enc_width + embed,
                      InitScheme::uniform_scaled);
  p.b_p = Matrix(readout, 1);
  p.U_p = init_matrix(rng, vocab, readout, InitScheme::uniform_scaled);
  p.d_out = Matrix(vocab, 1);
  return p;
}

ReadoutParams ReadoutParams::zeros(int readout, int dec_hidden, int enc_width,
                                   int embed, int vocab) {
  ReadoutParams p;
  p.W_p = Matrix(readout, dec_hidden + enc_width + embed);
  p.b_p = Matrix(readout, 1);
  p.U_p = Matrix(vocab, readout);
  p.d_out = Matrix(vocab, 1);
  return p;
}

Matrix embedding_column(const Matrix& embedding, int token) {
  if (token < 0 || token >= embedding.cols())
    throw std::out_of_range("embedding_column: token " + std::to_string(token) +
                            " outside vocabulary of size " +
                            std::to_string(embedding.cols()));
  Matrix e(embedding.rows(), 1);
  for (int k = 0; k < embedding.rows(); ++k) e[k] = embedding(k, token);
  return e;
}

namespace {

AttendTrace attend_traced(const AttentionParams& p, const Matrix& h_prev,
                          const EncodedVideo& enc, int valid_rows) {
  const int j_count = enc.frame_count();
  if (j_count == 0) throw ShapeError("attend: empty video (J == 0)");
  const int valid = valid_rows < 0 ? j_count : valid_rows;
  if (valid < 1 || valid > j_count)
    throw ShapeError("attend: valid_rows " + std::to_string(valid) +
                     " outside [1, " + std::to_string(j_count) + "]");
  if (p.W_a.cols() != h_prev.rows() || p.U_a.cols() != enc.width())
    throw ShapeError("attend: params (W_a " + p.W_a.shape_str() + ", U_a " +
                     p.U_a.shape_str() + ") vs state " + h_prev.shape_str() +
                     " and encoding width " + std::to_string(enc.width()));

  const int attn = p.attn_dim();
  Matrix state_part = p.b_a;
  gemv_acc(state_part, p.W_a, h_prev);

  AttendTrace tr;
  tr.scored = Matrix(attn, j_count);
  std::vector<double> scores(valid);
  for (int j = 0; j < valid; ++j) {
    Matrix q = state_part;
    gemv_acc(q, p.U_a, enc.row_vector(j));
    double e = 0.0;
    for (int k = 0; k < attn; ++k) {
      const double u = std::tanh(q[k]);
      tr.scored(k, j) = u;
      e += p.w_score[k] * u;
    }
    scores[j] = e;
  }
  std::vector<double> alpha = softmax(scores);
  alpha.resize(j_count, 0.0);  // masked rows get exactly zero weight

  Matrix z(enc.width(), 1);
  for (int j = 0; j < valid; ++j) {
    auto w = enc.vectors.row(j);
    for (int k = 0; k < enc.width(); ++k) z[k] += alpha[j] * w[k];
  }
  tr.alpha = std::move(alpha);
  tr.z = std::move(z);
  return tr;
}

}  // namespace

Attention attend(const AttentionParams& p, const Matrix& h_prev,
                 const EncodedVideo& enc, int valid_rows) {
  AttendTrace tr = attend_traced(p, h_prev, enc, valid_rows);
  return {std::move(tr.z), std::move(tr.alpha)};
}

DecodeStepTrace decode_step_traced(const DecoderParams& p, int prev_token,
                                   const LstmState& state, const EncodedVideo& enc,
                                   CellVariant variant) {
  const int hidden = p.hidden_dim();
  if (state.h.rows() != hidden || state.c.rows() != hidden)
    throw ShapeError("decode_step: state " + state.h.shape_str() +
                     " vs decoder hidden dim " + std::to_string(hidden));

  DecodeStepTrace tr;
  tr.prev_token = prev_token;
  tr.prev = state;
  tr.embedded = embedding_column(p.embedding, prev_token);
  tr.att = attend_traced(p.attention, state.h, enc, -1);

  auto gate_pre = [&](const Matrix& w, const Matrix& u, const Matrix& a,
                      const Matrix& b) {
    Matrix pre = b;
    gemv_acc(pre, w, tr.embedded);
    gemv_acc(pre, u, state.h);
    gemv_acc(pre, a, tr.att.z);
    return pre;
  };
  const DecoderCellParams& c = p.cell;
  tr.cell.gate_i = sigmoid(gate_pre(c.W_i, c.U_i, c.A_i, c.b_i));
  tr.cell.gate_f = sigmoid(gate_pre(c.W_f, c.U_f, c.A_f, c.b_f));
  tr.cell.gate_o = sigmoid(gate_pre(c.W_o, c.U_o, c.A_o, c.b_o));
  tr.cell.cand = tanh_mat(gate_pre(c.W_c, c.U_c, c.A_c, c.b_c));
  tr.cell.c = add(hadamard(tr.cell.gate_f, state.c), hadamard(tr.cell.gate_i, tr.cell.cand));
  tr.cell.h = variant == CellVariant::paper
                  ? hadamard(tr.cell.gate_o, tr.cell.c)
                  : hadamard(tr.cell.gate_o, tanh_mat(tr.cell.c));

  // deep output over [h; z; E(y_prev)]
  const ReadoutParams& r = p.readout;
  const int width = enc.width();
  const int embed = p.embed_dim();
  Matrix concat(hidden + width + embed, 1);
  for (int k = 0; k < hidden; ++k) concat[k] = tr.cell.h[k];
  for (int k = 0; k < width; ++k) concat[hidden + k] = tr.att.z[k];
  for (int k = 0; k < embed; ++k) concat[hidden + width + k] = tr.embedded[k];
  Matrix act = r.b_p;
  gemv_acc(act, r.W_p, concat);
  tr.readout_act = tanh_mat(act);
  Matrix logits = r.d_out;
  gemv_acc(logits, r.U_p, tr.readout_act);
  tr.probs = softmax(logits.flat());
  return tr;
}

DecodeStep decode_step(const DecoderParams& p, int prev_token,
                       const LstmState& state, const EncodedVideo& enc,
                       CellVariant variant) {
  DecodeStepTrace tr = decode_step_traced(p, prev_token, state, enc, variant);
  DecodeStep out;
  out.h = std::move(tr.cell.h);
  out.c = std::move(tr.cell.c);
  out.alpha = std::move(tr.att.alpha);
  out.logprobs.resize(tr.probs.size());
  for (std::size_t v = 0; v < tr.probs.size(); ++v)
    out.logprobs[v] = std::log(tr.probs[v]);
  return out;
}

LstmState init_decoder_state(const DecoderParams& p, const EncodedVideo& enc,
                             InitStateMode mode) {
  const int hidden = p.hidden_dim();
  if (mode == InitStateMode::zero) return LstmState::zero(hidden);
  const int j_count = enc.frame_count();
  Matrix mean(enc.width(), 1);
  for (int j = 0; j < j_count; ++j) {
    auto row = enc.vectors.row(j);
    for (int k = 0; k < enc.width(); ++k) mean[k] += row[k];
  }
  for (int k = 0; k < enc.width(); ++k) mean[k] /= j_count;
  Matrix h(hidden, 1), c(hidden, 1);
  gemv_acc(h, p.init_h, mean);
  gemv_acc(c, p.init_c, mean);
  return {tanh_mat(h), tanh_mat(c)};
}

namespace {

// Backward through the alignment perceptron and the convex combination.
void attend_backward(const AttentionParams& p, const AttendTrace& tr,
                     const Matrix& h_prev, const EncodedVideo& enc,
                     const Matrix& dz, AttentionParams& grad, Matrix& d_enc,
                     Matrix& dh_prev) {
  const int j_count = enc.frame_count();
  const int width = enc.width();
  const int attn = p.attn_dim();

  // z = Σ α_j w_j
  std::vector<double> d_alpha(j_count);
  for (int j = 0; j < j_count; ++j) {
    auto w = enc.vectors.row(j);
    auto g = d_enc.row(j);
    double dot = 0.0;
    for (int k = 0; k < width; ++k) {
      dot += dz[k] * w[k];
      g[k] += tr.alpha[j] * dz[k];
    }
    d_alpha[j] = dot;
  }

  // softmax backward: de_j = α_j (dα_j − Σ_k α_k dα_k)
  double inner = 0.0;
  for (int j = 0; j < j_count; ++j) inner += tr.alpha[j] * d_alpha[j];
  Matrix dq(attn, 1);
  for (int j = 0; j < j_count; ++j) {
    const double de = tr.alpha[j] * (d_alpha[j] - inner);
    if (de == 0.0) continue;
    // e_j = w_scoreᵀ u_j, u_j = tanh(q_j)
    for (int k = 0; k < attn; ++k) {
      const double u = tr.scored(k, j);
      grad.w_score[k] += de * u;
      dq[k] = de * p.w_score[k] * (1.0 - u * u);
    }
    outer_acc(grad.W_a, dq, h_prev);
    add_in_place(grad.b_a, dq);
    gemv_t_acc(dh_prev, p.W_a, dq);
    auto w = enc.vectors.row(j);
    auto g = d_enc.row(j);
    for (int k = 0; k < attn; ++k) {
      const double dqk = dq[k];
      if (dqk == 0.0) continue;
      auto urow = p.U_a.row(k);
      auto grow = grad.U_a.row(k);
      for (int x = 0; x < width; ++x) {
        grow[x] += dqk * w[x];
        g[x] += urow[x] * dqk;
      }
    }
  }
}

}  // namespace

void decode_step_backward(const DecoderParams& p, const DecodeStepTrace& tr,
                          const EncodedVideo& enc, const Matrix& d_logits,
                          const Matrix& dh_in, const Matrix& dc_in,
                          CellVariant variant, DecoderParams& grad,
                          Matrix& d_enc, Matrix& dh_prev, Matrix& dc_prev) {
  const int hidden = p.hidden_dim();
  const int width = enc.width();
  const int embed = p.embed_dim();
  const ReadoutParams& r = p.readout;

  // readout: logits = U_p tanh(W_p concat + b_p) + d_out
  add_in_place(grad.readout.d_out, d_logits);
  outer_acc(grad.readout.U_p, d_logits, tr.readout_act);
  Matrix d_act(r.readout_dim(), 1);
  gemv_t_acc(d_act, r.U_p, d_logits);
  for (int k = 0; k < r.readout_dim(); ++k) {
    const double a = tr.readout_act[k];
    d_act[k] *= 1.0 - a * a;
  }
  Matrix concat(hidden + width + embed, 1);
  for (int k = 0; k < hidden; ++k) concat[k] = tr.cell.h[k];
  for (int k = 0; k < width; ++k) concat[hidden + k] = tr.att.z[k];
  for (int k = 0; k < embed; ++k) concat[hidden + width + k] = tr.embedded[k];
  outer_acc(grad.readout.W_p, d_act, concat);
  add_in_place(grad.readout.b_p, d_act);
  Matrix d_concat(hidden + width + embed, 1);
  gemv_t_acc(d_concat, r.W_p, d_act);

  Matrix dh = dh_in, dz(width, 1), d_embedded(embed, 1);
  for (int k = 0; k < hidden; ++k) dh[k] += d_concat[k];
  for (int k = 0; k < width; ++k) dz[k] = d_concat[hidden + k];
  for (int k = 0; k < embed; ++k) d_embedded[k] = d_concat[hidden + width + k];

  // cell backward (three-input variant of the lstm step)
  Matrix d_o(hidden, 1), dc = dc_in;
  if (variant == CellVariant::paper) {
    for (int k = 0; k < hidden; ++k) {
      d_o[k] = dh[k] * tr.cell.c[k];
      dc[k] += dh[k] * tr.cell.gate_o[k];
    }
  } else {
    for (int k = 0; k < hidden; ++k) {
      const double tc = std::tanh(tr.cell.c[k]);
      d_o[k] = dh[k] * tc;
      dc[k] += dh[k] * tr.cell.gate_o[k] * (1.0 - tc * tc);
    }
  }
  Matrix da_i(hidden, 1), da_f(hidden, 1), da_o(hidden, 1), da_c(hidden, 1);
  for (int k = 0; k < hidden; ++k) {
    const double i = tr.cell.gate_i[k], f = tr.cell.gate_f[k];
    const double o = tr.cell.gate_o[k], cd = tr.cell.cand[k];
    da_i[k] = dc[k] * cd * i * (1.0 - i);
    da_f[k] = dc[k] * tr.prev.c[k] * f * (1.0 - f);
    da_o[k] = d_o[k] * o * (1.0 - o);
    da_c[k] = dc[k] * i * (1.0 - cd * cd);
    dc_prev[k] += dc[k] * f;
  }
  auto backprop_gate = [&](const Matrix& da, const Matrix& w, const Matrix& u,
                           const Matrix& a, Matrix& gw, Matrix& gu, Matrix& ga,
                           Matrix& gb) {
    outer_acc(gw, da, tr.embedded);
    outer_acc(gu, da, tr.prev.h);
    outer_acc(ga, da, tr.att.z);
    add_in_place(gb, da);
    gemv_t_acc(d_embedded, w, da);
    gemv_t_acc(dh_prev, u, da);
    gemv_t_acc(dz, a, da);
  };
  const DecoderCellParams& c = p.cell;
  DecoderCellParams& gc = grad.cell;
  backprop_gate(da_i, c.W_i, c.U_i, c.A_i, gc.W_i, gc.U_i, gc.A_i, gc.b_i);
  backprop_gate(da_f, c.W_f, c.U_f, c.A_f, gc.W_f, gc.U_f, gc.A_f, gc.b_f);
  backprop_gate(da_o, c.W_o, c.U_o, c.A_o, gc.W_o, gc.U_o, gc.A_o, gc.b_o);
  backprop_gate(da_c, c.W_c, c.U_c, c.A_c, gc.W_c, gc.U_c, gc.A_c, gc.b_c);

  // attention consumed h_{t-1}
  attend_backward(p.attention, tr.att, tr.prev.h, enc, dz, grad.attention,
                  d_enc, dh_prev);

  // embedding column of the previous token
  for (int k = 0; k < embed; ++k)
    grad.embedding(k, tr.prev_token) += d_embedded[k];
}

void init_state_backward(const DecoderParams& p, const EncodedVideo& enc,
                         const LstmState& state0, const Matrix& dh0,
                         const Matrix& dc0, DecoderParams& grad, Matrix& d_enc) {
  const int hidden = p.hidden_dim();
  const int width = enc.width();
  const int j_count = enc.frame_count();
  Matrix mean(width, 1);
  for (int j = 0; j < j_count; ++j) {
    auto row = enc.vectors.row(j);
    for (int k = 0; k < width; ++k) mean[k] += row[k];
  }
  for (int k = 0; k < width; ++k) mean[k] /= j_count;

  Matrix d_mean(width, 1);
  Matrix da_h(hidden, 1), da_c(hidden, 1);
  for (int k = 0; k < hidden; ++k) {
    da_h[k] = dh0[k] * (1.0 - state0.h[k] * state0.h[k]);
    da_c[k] = dc0[k] * (1.0 - state0.c[k] * state0.c[k]);
  }
  outer_acc(grad.init_h, da_h, mean);
  outer_acc(grad.init_c, da_c, mean);
  gemv_t_acc(d_mean, p.init_h, da_h);
  gemv_t_acc(d_mean, p.init_c, da_c);
  for (int j = 0; j < j_count; ++j) {
    auto g = d_enc.row(j);
    for (int k = 0; k < width; ++k) g[k] += d_mean[k] / j_count;
  }
}

}  // namespace bivicap
