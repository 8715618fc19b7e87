#include "bivicap/lstm.hpp"

#include <cmath>

namespace bivicap {

LstmCellParams LstmCellParams::random(int hidden, int input, Rng& rng) {
  auto w = [&] { return init_matrix(rng, hidden, input, InitScheme::uniform_scaled); };
  auto u = [&] { return init_matrix(rng, hidden, hidden, InitScheme::uniform_scaled); };
  auto b = [&] { return Matrix(hidden, 1); };
  LstmCellParams p;
  p.W_i = w(); p.U_i = u(); p.b_i = b();
  p.W_f = w(); p.U_f = u(); p.b_f = b();
  p.W_o = w(); p.U_o = u(); p.b_o = b();
  p.W_c = w(); p.U_c = u(); p.b_c = b();
  return p;
}

LstmCellParams LstmCellParams::zeros(int hidden, int input) {
  LstmCellParams p;
  auto w = [&] { return Matrix(hidden, input); };
  auto u = [&] { return Matrix(hidden, hidden); };
  auto b = [&] { return Matrix(hidden, 1); };
  p.W_i = w(); p.U_i = u(); p.b_i = b();
  p.W_f = w(); p.U_f = u(); p.b_f = b();
  p.W_o = w(); p.U_o = u(); p.b_o = b();
  p.W_c = w(); p.U_c = u(); p.b_c = b();
  return p;
}

namespace {

// pre = W x + U h_prev + b
Matrix preactivation(const Matrix& w, const Matrix& u, const Matrix& b,
                     const Matrix& x, const Matrix& h_prev) {
  Matrix pre = b;
  gemv_acc(pre, w, x);
  gemv_acc(pre, u, h_prev);
  return pre;
}

void check_step_shapes(const LstmCellParams& p, const Matrix& x,
                       const LstmState& prev) {
  if (x.rows() != p.input_dim() || x.cols() != 1)
    throw ShapeError("lstm_step: input " + x.shape_str() + " vs cell input dim " +
                     std::to_string(p.input_dim()));
  if (prev.h.rows() != p.hidden_dim() || prev.c.rows() != p.hidden_dim())
    throw ShapeError("lstm_step: state " + prev.h.shape_str() +
                     " vs cell hidden dim " + std::to_string(p.hidden_dim()));
}

}  // namespace

LstmTrace lstm_step_traced(const LstmCellParams& p, const Matrix& x,
                           const LstmState& prev, CellVariant variant) {
  check_step_shapes(p, x, prev);
  LstmTrace tr;
  tr.gate_i = sigmoid(preactivation(p.W_i, p.U_i, p.b_i, x, prev.h));
  tr.gate_f = sigmoid(preactivation(p.W_f, p.U_f, p.b_f, x, prev.h));
  tr.gate_o = sigmoid(preactivation(p.W_o, p.U_o, p.b_o, x, prev.h));
  tr.cand = tanh_mat(preactivation(p.W_c, p.U_c, p.b_c, x, prev.h));
  tr.c = add(hadamard(tr.gate_f, prev.c), hadamard(tr.gate_i, tr.cand));
  tr.h = variant == CellVariant::paper ? hadamard(tr.gate_o, tr.c)
                                       : hadamard(tr.gate_o, tanh_mat(tr.c));
  return tr;
}

LstmState lstm_step(const LstmCellParams& p, const Matrix& x,
                    const LstmState& prev, CellVariant variant) {
  LstmTrace tr = lstm_step_traced(p, x, prev, variant);
  return {std::move(tr.h), std::move(tr.c)};
}

void lstm_step_backward(const LstmCellParams& p, const Matrix& x,
                        const LstmState& prev, const LstmTrace& tr,
                        const Matrix& dh, const Matrix& dc_in, CellVariant variant,
                        LstmCellParams& grad, Matrix& dx, Matrix& dh_prev,
                        Matrix& dc_prev) {
  const int dim = p.hidden_dim();
  Matrix d_o(dim, 1), dc = dc_in;
  if (variant == CellVariant::paper) {
    // h = o ⊙ c
    for (int k = 0; k < dim; ++k) {
      d_o[k] = dh[k] * tr.c[k];
      dc[k] += dh[k] * tr.gate_o[k];
    }
  } else {
    // h = o ⊙ tanh(c)
    for (int k = 0; k < dim; ++k) {
      const double tc = std::tanh(tr.c[k]);
      d_o[k] = dh[k] * tc;
      dc[k] += dh[k] * tr.gate_o[k] * (1.0 - tc * tc);
    }
  }

  Matrix da_i(dim, 1), da_f(dim, 1), da_o(dim, 1), da_c(dim, 1);
  for (int k = 0; k < dim; ++k) {
    const double i = tr.gate_i[k], f = tr.gate_f[k], o = tr.gate_o[k], cd = tr.cand[k];
    da_i[k] = dc[k] * cd * i * (1.0 - i);
    da_f[k] = dc[k] * prev.c[k] * f * (1.0 - f);
    da_o[k] = d_o[k] * o * (1.0 - o);
    da_c[k] = dc[k] * i * (1.0 - cd * cd);
    dc_prev[k] += dc[k] * f;
  }

  auto backprop_gate = [&](const Matrix& da, const Matrix& w, const Matrix& u,
                           Matrix& gw, Matrix& gu, Matrix& gb) {
    outer_acc(gw, da, x);
    outer_acc(gu, da, prev.h);
    add_in_place(gb, da);
    gemv_t_acc(dx, w, da);
    gemv_t_acc(dh_prev, u, da);
  };
  backprop_gate(da_i, p.W_i, p.U_i, grad.W_i, grad.U_i, grad.b_i);
  backprop_gate(da_f, p.W_f, p.U_f, grad.W_f, grad.U_f, grad.b_f);
  backprop_gate(da_o, p.W_o, p.U_o, grad.W_o, grad.U_o, grad.b_o);
  backprop_gate(da_c, p.W_c, p.U_c, grad.W_c, grad.U_c, grad.b_c);
}

}  // namespace bivicap
