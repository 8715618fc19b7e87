#pragma once

#include <string>
#include <vector>

#include "bivicap/lstm.hpp"

namespace bivicap {

/// Per-frame feature vectors for one video: J×d, rows are frames.
struct FrameFeatureSequence {
  std::string video_id;
  Matrix frames;

  int frame_count() const { return frames.rows(); }
  int feature_dim() const { return frames.cols(); }
};

/// Fused encoder output: row j is w_j = [x_j ; v_j] with v_j = [v_fwd_j ; v_bwd_j].
struct EncodedVideo {
  Matrix vectors;   // J×(d+2D)
  int feature_dim;  // d
  int enc_hidden;   // D

  int frame_count() const { return vectors.rows(); }
  int width() const { return vectors.cols(); }
  Matrix row_vector(int j) const;  // w_j as a (d+2D)×1 column
};

/// Keeps frames 0, stride, 2·stride, …; never returns an empty sequence.
FrameFeatureSequence subsample(const FrameFeatureSequence& raw, int stride);

/// J×2D matrix; row j is [h_fwd_j ; h_bwd_j]. The backward layer consumes the
/// sequence reversed in time and its outputs are re-reversed to align with j.
Matrix run_blstm(const LstmCellParams& fwd, const LstmCellParams& bwd,
                 const FrameFeatureSequence& seq, CellVariant variant = CellVariant::paper);

EncodedVideo encode(const LstmCellParams& fwd, const LstmCellParams& bwd,
                    const FrameFeatureSequence& seq, CellVariant variant = CellVariant::paper);

/// Both layers' per-step activations, each in its own processing order
/// (bwd[s] belongs to frame J-1-s).
struct BlstmTrace {
  std::vector<LstmTrace> fwd, bwd;
};

EncodedVideo encode_traced(const LstmCellParams& fwd, const LstmCellParams& bwd,
                           const FrameFeatureSequence& seq, CellVariant variant,
                           BlstmTrace& trace);

/// d_enc holds loss gradients w.r.t. every fused row w_j (the first d columns,
/// gradients w.r.t. the input frames, are discarded — inputs are not trained).
void blstm_backward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                    const FrameFeatureSequence& seq, const BlstmTrace& trace,
                    const Matrix& d_enc, CellVariant variant,
                    LstmCellParams& grad_fwd, LstmCellParams& grad_bwd);

}  // namespace bivicap
