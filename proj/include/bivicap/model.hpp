#pragma once

#include <string>

#include "bivicap/decoder.hpp"

namespace bivicap {

struct ModelDims {
  int feature_dim = 0;  // d, per-frame CNN feature size
  int enc_hidden = 0;   // D, per-direction encoder hidden size
  int dec_hidden = 0;   // H, decoder hidden size
  int embed_dim = 0;    // m, word embedding size
  int attn_dim = 0;     // A, alignment perceptron inner size
  int readout_dim = 0;  // R, deep-output layer size
  int vocab_size = 0;   // V, including the four special tokens

  int enc_width() const { return feature_dim + 2 * enc_hidden; }
  bool operator==(const ModelDims&) const = default;
  void validate() const;
};

/// Every trainable tensor of the model. Gradient sets and optimizer
/// accumulators reuse this type as an exact shape mirror.
struct ModelParams {
  ModelDims dims;
  LstmCellParams enc_fwd, enc_bwd;
  DecoderParams dec;

  static ModelParams random(const ModelDims& dims, Rng& rng);
  static ModelParams zeros(const ModelDims& dims);

  /// Visits every tensor in a fixed canonical order with a stable name.
  template <typename F>
  void for_each_tensor(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    visit(const_cast<ModelParams&>(*this),
          [&](const std::string& name, Matrix& m) { f(name, std::as_const(m)); });
  }

  std::size_t parameter_count() const;

 private:
  template <typename F>
  static void visit(ModelParams& p, F&& f) {
    auto cell = [&](const char* prefix, LstmCellParams& c) {
      const std::string pre(prefix);
      f(pre + ".W_i", c.W_i); f(pre + ".U_i", c.U_i); f(pre + ".b_i", c.b_i);
      f(pre + ".W_f", c.W_f); f(pre + ".U_f", c.U_f); f(pre + ".b_f", c.b_f);
      f(pre + ".W_o", c.W_o); f(pre + ".U_o", c.U_o); f(pre + ".b_o", c.b_o);
      f(pre + ".W_c", c.W_c); f(pre + ".U_c", c.U_c); f(pre + ".b_c", c.b_c);
    };
    cell("enc_fwd", p.enc_fwd);
    cell("enc_bwd", p.enc_bwd);
    DecoderCellParams& d = p.dec.cell;
    f("dec.W_i", d.W_i); f("dec.U_i", d.U_i); f("dec.A_i", d.A_i); f("dec.b_i", d.b_i);
    f("dec.W_f", d.W_f); f("dec.U_f", d.U_f); f("dec.A_f", d.A_f); f("dec.b_f", d.b_f);
    f("dec.W_o", d.W_o); f("dec.U_o", d.U_o); f("dec.A_o", d.A_o); f("dec.b_o", d.b_o);
    f("dec.W_c", d.W_c); f("dec.U_c", d.U_c); f("dec.A_c", d.A_c); f("dec.b_c", d.b_c);
    AttentionParams& a = p.dec.attention;
    f("att.W_a", a.W_a); f("att.U_a", a.U_a); f("att.b_a", a.b_a); f("att.w", a.w_score);
    f("emb.E", p.dec.embedding);
    ReadoutParams& r = p.dec.readout;
    f("out.W_p", r.W_p); f("out.b_p", r.b_p); f("out.U_p", r.U_p); f("out.d", r.d_out);
    f("init.W_h", p.dec.init_h);
    f("init.W_c", p.dec.init_c);
  }
};

/// Shape mirror of ModelParams holding one gradient matrix per parameter.
using GradientSet = ModelParams;

void add_scaled(GradientSet& acc, const GradientSet& g, double s);

}  // namespace bivicap
