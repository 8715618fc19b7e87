#include "bivicap/encoder.hpp"

namespace bivicap {

Matrix EncodedVideo::row_vector(int j) const {
  Matrix out(width(), 1);
  auto r = vectors.row(j);
  for (int k = 0; k < width(); ++k) out[k] = r[k];
  return out;
}

FrameFeatureSequence subsample(const FrameFeatureSequence& raw, int stride) {
  if (stride < 1)
    throw std::invalid_argument("subsample: stride must be >= 1, got " +
                                std::to_string(stride));
  if (stride == 1) return raw;
  const int j_in = raw.frame_count();
  const int j_out = (j_in + stride - 1) / stride;
  Matrix frames(j_out, raw.feature_dim());
  for (int j = 0; j < j_out; ++j) {
    auto src = raw.frames.row(j * stride);
    auto dst = frames.row(j);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return {raw.video_id, std::move(frames)};
}

namespace {

Matrix frame_column(const FrameFeatureSequence& seq, int j) {
  Matrix x(seq.feature_dim(), 1);
  auto r = seq.frames.row(j);
  for (int k = 0; k < seq.feature_dim(); ++k) x[k] = r[k];
  return x;
}

void check_encoder_shapes(const LstmCellParams& fwd, const LstmCellParams& bwd,
                          const FrameFeatureSequence& seq) {
  if (seq.frame_count() < 1)
    throw ShapeError("encoder: empty sequence for video '" + seq.video_id + "'");
  if (fwd.input_dim() != seq.feature_dim() || bwd.input_dim() != seq.feature_dim())
    throw ShapeError("encoder: feature dim " + std::to_string(seq.feature_dim()) +
                     " vs cell input dims " + std::to_string(fwd.input_dim()) +
                     "/" + std::to_string(bwd.input_dim()));
  if (fwd.hidden_dim() != bwd.hidden_dim())
    throw ShapeError("encoder: fwd/bwd hidden dims differ: " +
                     std::to_string(fwd.hidden_dim()) + " vs " +
                     std::to_string(bwd.hidden_dim()));
}

// Runs one direction over the frames in the given order, returning per-step traces.
std::vector<LstmTrace> run_direction(const LstmCellParams& cell,
                                     const FrameFeatureSequence& seq,
                                     bool reversed, CellVariant variant) {
  const int j_count = seq.frame_count();
  std::vector<LstmTrace> traces;
  traces.reserve(j_count);
  LstmState state = LstmState::zero(cell.hidden_dim());
  for (int s = 0; s < j_count; ++s) {
    const int j = reversed ? j_count - 1 - s : s;
    LstmTrace tr = lstm_step_traced(cell, frame_column(seq, j), state, variant);
    state = {tr.h, tr.c};
    traces.push_back(std::move(tr));
  }
  return traces;
}

}  // namespace

Matrix run_blstm(const LstmCellParams& fwd, const LstmCellParams& bwd,
                 const FrameFeatureSequence& seq, CellVariant variant) {
  check_encoder_shapes(fwd, bwd, seq);
  const int j_count = seq.frame_count();
  const int dim = fwd.hidden_dim();
  auto f_traces = run_direction(fwd, seq, false, variant);
  auto b_traces = run_direction(bwd, seq, true, variant);
  Matrix out(j_count, 2 * dim);
  for (int j = 0; j < j_count; ++j) {
    auto row = out.row(j);
    const Matrix& hf = f_traces[j].h;
    const Matrix& hb = b_traces[j_count - 1 - j].h;
    for (int k = 0; k < dim; ++k) row[k] = hf[k];
    for (int k = 0; k < dim; ++k) row[dim + k] = hb[k];
  }
  return out;
}

EncodedVideo encode_traced(const LstmCellParams& fwd, const LstmCellParams& bwd,
                           const FrameFeatureSequence& seq, CellVariant variant,
                           BlstmTrace& trace) {
  check_encoder_shapes(fwd, bwd, seq);
  const int j_count = seq.frame_count();
  const int d = seq.feature_dim();
  const int dim = fwd.hidden_dim();
  trace.fwd = run_direction(fwd, seq, false, variant);
  trace.bwd = run_direction(bwd, seq, true, variant);
  Matrix fused(j_count, d + 2 * dim);
  for (int j = 0; j < j_count; ++j) {
    auto row = fused.row(j);
    auto x = seq.frames.row(j);
    const Matrix& hf = trace.fwd[j].h;
    const Matrix& hb = trace.bwd[j_count - 1 - j].h;
    for (int k = 0; k < d; ++k) row[k] = x[k];
    for (int k = 0; k < dim; ++k) row[d + k] = hf[k];
    for (int k = 0; k < dim; ++k) row[d + dim + k] = hb[k];
  }
  return {std::move(fused), d, dim};
}

EncodedVideo encode(const LstmCellParams& fwd, const LstmCellParams& bwd,
                    const FrameFeatureSequence& seq, CellVariant variant) {
  BlstmTrace trace;
  return encode_traced(fwd, bwd, seq, variant, trace);
}

namespace {

// BPTT through one direction. d_h_ext[s] is the external gradient on the
// hidden state emitted at processing step s.
void direction_backward(const LstmCellParams& cell, const FrameFeatureSequence& seq,
                        const std::vector<LstmTrace>& traces, bool reversed,
                        const std::vector<Matrix>& d_h_ext, CellVariant variant,
                        LstmCellParams& grad) {
  const int j_count = seq.frame_count();
  const int dim = cell.hidden_dim();
  Matrix dh(dim, 1), dc(dim, 1);
  Matrix dx_sink(cell.input_dim(), 1);  // input gradients are discarded
  for (int s = j_count - 1; s >= 0; --s) {
    add_in_place(dh, d_h_ext[s]);
    const int j = reversed ? j_count - 1 - s : s;
    LstmState prev = s > 0 ? LstmState{traces[s - 1].h, traces[s - 1].c}
                           : LstmState::zero(dim);
    Matrix dh_prev(dim, 1), dc_prev(dim, 1);
    dx_sink.fill(0.0);
    lstm_step_backward(cell, frame_column(seq, j), prev, traces[s], dh, dc,
                       variant, grad, dx_sink, dh_prev, dc_prev);
    dh = std::move(dh_prev);
    dc = std::move(dc_prev);
  }
}

}  // namespace

void blstm_backward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                    const FrameFeatureSequence& seq, const BlstmTrace& trace,
                    const Matrix& d_enc, CellVariant variant,
                    LstmCellParams& grad_fwd, LstmCellParams& grad_bwd) {
  const int j_count = seq.frame_count();
  const int d = seq.feature_dim();
  const int dim = fwd.hidden_dim();
  if (d_enc.rows() != j_count || d_enc.cols() != d + 2 * dim)
    throw ShapeError("blstm_backward: d_enc " + d_enc.shape_str() + " vs " +
                     std::to_string(j_count) + "x" + std::to_string(d + 2 * dim));

  std::vector<Matrix> d_fwd(j_count), d_bwd(j_count);
  for (int j = 0; j < j_count; ++j) {
    auto row = d_enc.row(j);
    Matrix gf(dim, 1), gb(dim, 1);
    for (int k = 0; k < dim; ++k) gf[k] = row[d + k];
    for (int k = 0; k < dim; ++k) gb[k] = row[d + dim + k];
    d_fwd[j] = std::move(gf);
    // backward layer's step s handled frame j_count-1-s
    d_bwd[j_count - 1 - j] = std::move(gb);
  }
  direction_backward(fwd, seq, trace.fwd, false, d_fwd, variant, grad_fwd);
  direction_backward(bwd, seq, trace.bwd, true, d_bwd, variant, grad_bwd);
}

}  // namespace bivicap
