#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bivicap/data.hpp"
#include "bivicap/inference.hpp"
#include "bivicap/loss.hpp"
#include "bivicap/metrics.hpp"
#include "bivicap/trainer.hpp"

namespace py = pybind11;
using namespace bivicap;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix matrix_from_numpy(const DoubleArray& arr) {
  if (arr.ndim() == 1) {
    Matrix m(static_cast<int>(arr.shape(0)), 1);
    std::copy(arr.data(), arr.data() + arr.size(), m.data());
    return m;
  }
  if (arr.ndim() != 2)
    throw std::invalid_argument("expected a 1-D or 2-D float array");
  Matrix m(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  std::copy(arr.data(), arr.data() + arr.size(), m.data());
  return m;
}

py::array_t<double> matrix_to_numpy(const Matrix& m) {
  py::array_t<double> arr({m.rows(), m.cols()});
  std::copy(m.data(), m.data() + m.size(), arr.mutable_data());
  return arr;
}

TokenizedCorpus corpus_from_entries(
    const std::vector<std::tuple<std::string, std::string,
                                 std::vector<std::string>>>& entries) {
  TokenizedCorpus corpus;
  for (const auto& [id, hyp, refs] : entries) {
    CorpusEntry e;
    e.id = id;
    e.hypothesis = tokenize(hyp);
    for (const auto& r : refs) e.references.push_back(tokenize(r));
    corpus.entries.push_back(std::move(e));
  }
  return corpus;
}

TrainingConfig config_from_kwargs(const py::dict& kwargs) {
  TrainingConfig cfg;
  for (auto item : kwargs) {
    const std::string key = py::cast<std::string>(item.first);
    auto value = item.second;
    if (key == "batch_size") cfg.batch_size = py::cast<int>(value);
    else if (key == "eval_every") cfg.eval_every = py::cast<int>(value);
    else if (key == "patience") cfg.patience = py::cast<int>(value);
    else if (key == "stride") cfg.stride = py::cast<int>(value);
    else if (key == "val_beam_width") cfg.val_beam_width = py::cast<int>(value);
    else if (key == "max_caption_len") cfg.max_caption_len = py::cast<int>(value);
    else if (key == "seed") cfg.seed = py::cast<std::uint64_t>(value);
    else if (key == "embed_dim") cfg.embed_dim = py::cast<int>(value);
    else if (key == "enc_hidden") cfg.enc_hidden = py::cast<int>(value);
    else if (key == "dec_hidden") cfg.dec_hidden = py::cast<int>(value);
    else if (key == "attn_dim") cfg.attn_dim = py::cast<int>(value);
    else if (key == "readout_dim") cfg.readout_dim = py::cast<int>(value);
    else if (key == "min_count") cfg.min_count = py::cast<int>(value);
    else if (key == "max_updates") cfg.max_updates = py::cast<long>(value);
    else if (key == "grad_clip") cfg.grad_clip = py::cast<double>(value);
    else if (key == "threads") cfg.threads = py::cast<int>(value);
    else if (key == "cell_variant")
      cfg.cell_variant = cell_variant_from_string(py::cast<std::string>(value));
    else if (key == "init_state")
      cfg.init_state = init_state_from_string(py::cast<std::string>(value));
    else
      throw std::invalid_argument("unknown training option '" + key + "'");
  }
  return cfg;
}

struct PyModel {
  TrainedModel model;

  std::string caption_array(const DoubleArray& frames, int beam_width,
                            int max_len, bool length_norm) const {
    FrameFeatureSequence seq{"<array>", matrix_from_numpy(frames)};
    return caption(model, seq, {beam_width, max_len, length_norm});
  }

  std::vector<std::pair<double, std::string>> hypotheses_array(
      const DoubleArray& frames, int beam_width, int max_len,
      bool length_norm) const {
    FrameFeatureSequence seq{"<array>", matrix_from_numpy(frames)};
    auto hyps = caption_hypotheses(model, seq, {beam_width, max_len, length_norm});
    std::vector<std::pair<double, std::string>> out;
    for (const auto& h : hyps)
      out.emplace_back(h.logprob, detokenize(model.vocab, h.tokens));
    return out;
  }

  py::array_t<double> encode_array(const DoubleArray& frames) const {
    FrameFeatureSequence raw{"<array>", matrix_from_numpy(frames)};
    FrameFeatureSequence seq = subsample(raw, model.stride);
    EncodedVideo enc = encode(model.params.enc_fwd, model.params.enc_bwd, seq,
                              model.variant);
    return matrix_to_numpy(enc.vectors);
  }

  double loss_array(const DoubleArray& frames, const std::string& text) const {
    FrameFeatureSequence raw{"<array>", matrix_from_numpy(frames)};
    FrameFeatureSequence seq = subsample(raw, model.stride);
    return sentence_loss(model.params, seq,
                         model.vocab.encode_caption(tokenize(text)),
                         model.forward_options());
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Video captioning engine: bidirectional recurrent encoder, "
            "soft-attention decoder, beam search, BLEU/CIDEr metrics";

  m.def("softmax", [](const std::vector<double>& x) { return softmax(x); },
        py::arg("x"), "Numerically stable softmax of a vector");
  m.def("log_softmax",
        [](const std::vector<double>& x) { return log_softmax(x); }, py::arg("x"));
  m.def("sigmoid",
        [](const DoubleArray& a) { return matrix_to_numpy(sigmoid(matrix_from_numpy(a))); },
        py::arg("a"));
  m.def("init_matrix",
        [](std::uint64_t seed, int rows, int cols, const std::string& scheme) {
          Rng rng(seed);
          const InitScheme s = scheme == "zeros" ? InitScheme::zeros
                                                 : InitScheme::uniform_scaled;
          return matrix_to_numpy(init_matrix(rng, rows, cols, s));
        },
        py::arg("seed"), py::arg("rows"), py::arg("cols"),
        py::arg("scheme") = "uniform_scaled");

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("corpus_bleu",
        [](const std::vector<std::tuple<std::string, std::string,
                                        std::vector<std::string>>>& entries,
           bool smooth) {
          return bleu(corpus_from_entries(entries), {4, smooth});
        },
        py::arg("entries"), py::arg("smooth") = false,
        "Corpus BLEU-4 on (id, hypothesis, references) tuples, 0-100");
  m.def("corpus_cider",
        [](const std::vector<std::tuple<std::string, std::string,
                                        std::vector<std::string>>>& entries) {
          return cider(corpus_from_entries(entries));
        },
        py::arg("entries"), "Corpus CIDEr on (id, hypothesis, references) tuples");
  m.def("evaluate_files", &evaluate_files, py::arg("hyp_path"),
        py::arg("ref_path"),
        py::arg("metrics") = std::vector<std::string>{"bleu", "cider"});

  m.def("make_toy_dataset",
        [](const std::string& out_dir, int n, std::uint64_t seed, int frames_min,
           int frames_max, int feature_dim) {
          Rng rng(seed);
          ToyDatasetSpec spec;
          spec.n_videos = n;
          spec.j_min = frames_min;
          spec.j_max = frames_max;
          spec.feature_dim = feature_dim;
          ToyDatasetPaths paths = make_toy_dataset(rng, spec, out_dir);
          py::dict out;
          out["manifest"] = paths.manifest;
          out["train_captions"] = paths.train_captions;
          out["val_captions"] = paths.val_captions;
          out["test_captions"] = paths.test_captions;
          return out;
        },
        py::arg("out_dir"), py::arg("n") = 10, py::arg("seed") = 1,
        py::arg("frames_min") = 30, py::arg("frames_max") = 78,
        py::arg("feature_dim") = 16);

  py::class_<PyModel>(m, "Model")
      .def_property_readonly("vocab_size",
                             [](const PyModel& s) { return s.model.vocab.size(); })
      .def_property_readonly("feature_dim",
                             [](const PyModel& s) { return s.model.params.dims.feature_dim; })
      .def_property_readonly("stride", [](const PyModel& s) { return s.model.stride; })
      .def_property_readonly(
          "cell_variant",
          [](const PyModel& s) { return std::string(to_string(s.model.variant)); })
      .def("caption", &PyModel::caption_array, py::arg("frames"),
           py::arg("beam_width") = 10, py::arg("max_len") = 30,
           py::arg("length_norm") = false,
           "Caption a raw J×d frame-feature array")
      .def("hypotheses", &PyModel::hypotheses_array, py::arg("frames"),
           py::arg("beam_width") = 10, py::arg("max_len") = 30,
           py::arg("length_norm") = false,
           "(logprob, caption) pairs, best first")
      .def("encode", &PyModel::encode_array, py::arg("frames"),
           "Fused encoder output for a raw frame-feature array")
      .def("sentence_loss", &PyModel::loss_array, py::arg("frames"),
           py::arg("caption"),
           "Teacher-forced mean negative log-likelihood of a caption")
      .def("caption_file",
           [](const PyModel& s, const std::string& path, int beam_width,
              int max_len, bool length_norm) {
             const auto id = path.substr(path.find_last_of('/') + 1);
             return caption(s.model, read_feature_file(path, id),
                            {beam_width, max_len, length_norm});
           },
           py::arg("path"), py::arg("beam_width") = 10, py::arg("max_len") = 30,
           py::arg("length_norm") = false)
      .def("save", [](const PyModel& s, const std::string& path) {
        save_checkpoint(path, s.model);
      });

  m.def("load_model",
        [](const std::string& path) { return PyModel{load_checkpoint(path)}; },
        py::arg("path"));

  m.def("train",
        [](const std::string& train_captions, const std::string& val_captions,
           const std::string& features_manifest, const py::dict& options) {
          TrainingConfig cfg = config_from_kwargs(options);
          FeatureMap features = load_features(features_manifest);
          Vocabulary vocab = build_vocab(train_captions, cfg.min_count);
          Dataset train_set = load_dataset("train", train_captions, features,
                                           vocab, cfg.stride);
          Dataset val_set = load_dataset("val", val_captions, features, vocab,
                                         cfg.stride);
          TrainResult result = train(cfg, train_set, val_set, vocab);
          py::dict summary;
          summary["best_bleu"] = result.best_bleu;
          summary["updates"] = result.updates;
          summary["log"] = result.log_text;
          return py::make_tuple(PyModel{std::move(result.best)}, summary);
        },
        py::arg("train_captions"), py::arg("val_captions"),
        py::arg("features_manifest"), py::arg("options") = py::dict(),
        "Returns (model, summary) after the full training protocol");

  m.def("write_feature_file",
        [](const std::string& path, const std::string& video_id,
           const DoubleArray& frames) {
          write_feature_file(path, {video_id, matrix_from_numpy(frames)});
        },
        py::arg("path"), py::arg("video_id"), py::arg("frames"));
  m.def("read_feature_file",
        [](const std::string& path) {
          return matrix_to_numpy(read_feature_file(path, "<file>").frames);
        },
        py::arg("path"));
}
