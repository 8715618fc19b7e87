#pragma once

#include "bivicap/matrix.hpp"
#include "bivicap/rng.hpp"

namespace bivicap {

/// Hidden-state readout of the cell. `paper` emits h = o⊙c; `standard` emits
/// the common h = o⊙tanh(c).
enum class CellVariant { paper, standard };

/// One gated recurrent cell: per gate g ∈ {i, f, o} and candidate c̃, an input
/// projection W_g (D×in), a recurrent projection U_g (D×D) and a bias b_g.
struct LstmCellParams {
  Matrix W_i, U_i, b_i;
  Matrix W_f, U_f, b_f;
  Matrix W_o, U_o, b_o;
  Matrix W_c, U_c, b_c;

  int input_dim() const { return W_i.cols(); }
  int hidden_dim() const { return W_i.rows(); }

  static LstmCellParams random(int hidden, int input, Rng& rng);
  static LstmCellParams zeros(int hidden, int input);
};

struct LstmState {
  Matrix h, c;  // D×1 each
  static LstmState zero(int dim) { return {Matrix(dim, 1), Matrix(dim, 1)}; }
};

/// Activations saved by a traced step; everything backprop needs.
struct LstmTrace {
  Matrix gate_i, gate_f, gate_o, cand;
  Matrix c, h;
};

/// i,f,o = σ(W_g x + U_g h_prev + b_g); c̃ = tanh(W_c x + U_c h_prev + b_c);
/// c = f⊙c_prev + i⊙c̃; h per the variant.
LstmState lstm_step(const LstmCellParams& p, const Matrix& x,
                    const LstmState& prev, CellVariant variant = CellVariant::paper);

LstmTrace lstm_step_traced(const LstmCellParams& p, const Matrix& x,
                           const LstmState& prev, CellVariant variant);

/// Reverse-mode step. dh/dc are the loss gradients w.r.t. this step's h and c.
/// Parameter gradients accumulate into `grad`; input-side gradients accumulate
/// into dx, dh_prev, dc_prev (callers pass zeroed or running accumulators).
void lstm_step_backward(const LstmCellParams& p, const Matrix& x,
                        const LstmState& prev, const LstmTrace& tr,
                        const Matrix& dh, const Matrix& dc, CellVariant variant,
                        LstmCellParams& grad, Matrix& dx, Matrix& dh_prev,
                        Matrix& dc_prev);

}  // namespace bivicap
