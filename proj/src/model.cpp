#include "bivicap/model.hpp"

namespace bivicap {

void ModelDims::validate() const {
  auto check = [](const char* name, int v) {
    if (v < 1)
      throw std::invalid_argument(std::string("ModelDims: ") + name +
                                  " must be >= 1, got " + std::to_string(v));
  };
  check("feature_dim", feature_dim);
  check("enc_hidden", enc_hidden);
  check("dec_hidden", dec_hidden);
  check("embed_dim", embed_dim);
  check("attn_dim", attn_dim);
  check("readout_dim", readout_dim);
  if (vocab_size < 4)
    throw std::invalid_argument("ModelDims: vocab_size must cover the special "
                                "tokens (>= 4), got " + std::to_string(vocab_size));
}

ModelParams ModelParams::random(const ModelDims& dims, Rng& rng) {
  dims.validate();
  ModelParams p;
  p.dims = dims;
  const int width = dims.enc_width();
  p.enc_fwd = LstmCellParams::random(dims.enc_hidden, dims.feature_dim, rng);
  p.enc_bwd = LstmCellParams::random(dims.enc_hidden, dims.feature_dim, rng);
  p.dec.cell = DecoderCellParams::random(dims.dec_hidden, dims.embed_dim, width, rng);
  p.dec.attention = AttentionParams::random(dims.attn_dim, dims.dec_hidden, width, rng);
  p.dec.embedding = init_matrix(rng, dims.embed_dim, dims.vocab_size,
                                InitScheme::uniform_scaled);
  p.dec.readout = ReadoutParams::random(dims.readout_dim, dims.dec_hidden, width,
                                        dims.embed_dim, dims.vocab_size, rng);
  p.dec.init_h = init_matrix(rng, dims.dec_hidden, width, InitScheme::uniform_scaled);
  p.dec.init_c = init_matrix(rng, dims.dec_hidden, width, InitScheme::uniform_scaled);
  return p;
}

ModelParams ModelParams::zeros(const ModelDims& dims) {
  dims.validate();
  ModelParams p;
  p.dims = dims;
  const int width = dims.enc_width();
  p.enc_fwd = LstmCellParams::zeros(dims.enc_hidden, dims.feature_dim);
  p.enc_bwd = LstmCellParams::zeros(dims.enc_hidden, dims.feature_dim);
  p.dec.cell = DecoderCellParams::zeros(dims.dec_hidden, dims.embed_dim, width);
  p.dec.attention = AttentionParams::zeros(dims.attn_dim, dims.dec_hidden, width);
  p.dec.embedding = Matrix(dims.embed_dim, dims.vocab_size);
  p.dec.readout = ReadoutParams::zeros(dims.readout_dim, dims.dec_hidden, width,
                                       dims.embed_dim, dims.vocab_size);
  p.dec.init_h = Matrix(dims.dec_hidden, width);
  p.dec.init_c = Matrix(dims.dec_hidden, width);
  return p;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](const std::string&, const Matrix& m) { n += m.size(); });
  return n;
}

void add_scaled(GradientSet& acc, const GradientSet& g, double s) {
  std::vector<Matrix*> dst;
  std::vector<const Matrix*> src;
  acc.for_each_tensor([&](const std::string&, Matrix& m) { dst.push_back(&m); });
  g.for_each_tensor([&](const std::string&, const Matrix& m) { src.push_back(&m); });
  // both visits follow the same canonical order
  for (std::size_t i = 0; i < dst.size(); ++i) axpy_in_place(*dst[i], s, *src[i]);
}

}  // namespace bivicap
