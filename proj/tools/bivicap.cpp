#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "bivicap/config.hpp"
#include "bivicap/data.hpp"
#include "bivicap/inference.hpp"
#include "bivicap/metrics.hpp"
#include "bivicap/trainer.hpp"

namespace fs = std::filesystem;
using namespace bivicap;

namespace {

struct CommonArgs {
  std::string config_path;
  ConfigFile file;

  void load_file() {
    if (!config_path.empty()) file = ConfigFile::load(config_path);
  }
};

// flag > config-file > built-in default
template <typename T>
void resolve(const CLI::Option* opt, const ConfigFile& file, const char* key, T& target) {
  if (opt != nullptr && opt->count() > 0) return;
  if (!file.has(key)) return;
  if constexpr (std::is_same_v<T, std::string>)
    target = file.get_string(key, target);
  else if constexpr (std::is_same_v<T, bool>)
    target = file.get_bool(key, target);
  else if constexpr (std::is_floating_point_v<T>)
    target = static_cast<T>(file.get_double(key, target));
  else
    target = static_cast<T>(file.get_int(key, static_cast<long>(target)));
}

struct TrainingFlags {
  TrainingConfig cfg;
  std::string cell_variant = "paper";
  std::string init_state = "mean";
  std::map<std::string, CLI::Option*> opts;

  void add_options(CLI::App* cmd) {
    opts["batch_size"] = cmd->add_option("--batch-size", cfg.batch_size,
                                         "Mini-batch size")->capture_default_str();
    opts["eval_every"] = cmd->add_option("--eval-every", cfg.eval_every,
                                         "Updates between validation evaluations")
                             ->capture_default_str();
    opts["patience"] = cmd->add_option("--patience", cfg.patience,
                                       "Non-improving evaluations before stopping")
                           ->capture_default_str();
    opts["stride"] = cmd->add_option("--stride", cfg.stride,
                                     "Frame subsampling stride")->capture_default_str();
    opts["val_beam_width"] = cmd->add_option("--val-beam-width", cfg.val_beam_width,
                                             "Beam width for validation decoding")
                                 ->capture_default_str();
    opts["max_caption_len"] = cmd->add_option("--max-caption-len", cfg.max_caption_len,
                                              "Decoding length limit")
                                  ->capture_default_str();
    opts["seed"] = cmd->add_option("--seed", cfg.seed, "Seed for all randomness")
                       ->capture_default_str();
    opts["embed_dim"] = cmd->add_option("--embed-dim", cfg.embed_dim,
                                        "Word embedding size m")->capture_default_str();
    opts["enc_hidden"] = cmd->add_option("--enc-hidden", cfg.enc_hidden,
                                         "Encoder hidden size D per direction")
                             ->capture_default_str();
    opts["dec_hidden"] = cmd->add_option("--dec-hidden", cfg.dec_hidden,
                                         "Decoder hidden size H")->capture_default_str();
    opts["attn_dim"] = cmd->add_option("--attn-dim", cfg.attn_dim,
                                       "Attention size A (0 = decoder hidden size)")
                           ->capture_default_str();
    opts["readout_dim"] = cmd->add_option("--readout-dim", cfg.readout_dim,
                                          "Readout size R (0 = embedding size)")
                              ->capture_default_str();
    opts["min_count"] = cmd->add_option("--min-count", cfg.min_count,
                                        "Vocabulary frequency threshold")
                            ->capture_default_str();
    opts["max_updates"] = cmd->add_option("--max-updates", cfg.max_updates,
                                          "Hard update cap (0 = early stopping only)")
                              ->capture_default_str();
    opts["grad_clip"] = cmd->add_option("--grad-clip", cfg.grad_clip,
                                        "Max gradient norm (0 = off)")
                            ->capture_default_str();
    opts["threads"] = cmd->add_option("--threads", cfg.threads,
                                      "Worker threads per batch")->capture_default_str();
    opts["cell_variant"] = cmd->add_option("--cell-variant", cell_variant,
                                           "LSTM output: paper (h=o*c) or standard "
                                           "(h=o*tanh(c))")
                               ->check(CLI::IsMember({"paper", "standard"}))
                               ->capture_default_str();
    opts["init_state"] = cmd->add_option("--init-state", init_state,
                                         "Decoder start state: mean or zero")
                             ->check(CLI::IsMember({"mean", "zero"}))
                             ->capture_default_str();
  }

  void finalize(const ConfigFile& file) {
    resolve(opts["batch_size"], file, "training.batch_size", cfg.batch_size);
    resolve(opts["eval_every"], file, "training.eval_every", cfg.eval_every);
    resolve(opts["patience"], file, "training.patience", cfg.patience);
    resolve(opts["stride"], file, "training.stride", cfg.stride);
    resolve(opts["val_beam_width"], file, "training.val_beam_width", cfg.val_beam_width);
    resolve(opts["max_caption_len"], file, "training.max_caption_len", cfg.max_caption_len);
    resolve(opts["seed"], file, "training.seed", cfg.seed);
    resolve(opts["min_count"], file, "training.min_count", cfg.min_count);
    resolve(opts["max_updates"], file, "training.max_updates", cfg.max_updates);
    resolve(opts["grad_clip"], file, "training.grad_clip", cfg.grad_clip);
    resolve(opts["threads"], file, "training.threads", cfg.threads);
    resolve(opts["embed_dim"], file, "model.embed_dim", cfg.embed_dim);
    resolve(opts["enc_hidden"], file, "model.enc_hidden", cfg.enc_hidden);
    resolve(opts["dec_hidden"], file, "model.dec_hidden", cfg.dec_hidden);
    resolve(opts["attn_dim"], file, "model.attn_dim", cfg.attn_dim);
    resolve(opts["readout_dim"], file, "model.readout_dim", cfg.readout_dim);
    resolve(opts["cell_variant"], file, "model.cell_variant", cell_variant);
    resolve(opts["init_state"], file, "model.init_state", init_state);
    cfg.cell_variant = cell_variant_from_string(cell_variant);
    cfg.init_state = init_state_from_string(init_state);
  }
};

struct DataFlags {
  std::string train_captions, val_captions, manifest, out_dir = "out";
  CLI::Option *o_train = nullptr, *o_val = nullptr, *o_manifest = nullptr,
              *o_out = nullptr;

  void add_options(CLI::App* cmd) {
    o_train = cmd->add_option("--train-captions", train_captions,
                              "Training captions TSV (id TAB text)");
    o_val = cmd->add_option("--val-captions", val_captions,
                            "Validation captions TSV");
    o_manifest = cmd->add_option("--features-manifest", manifest,
                                 "Feature manifest (id TAB path)");
    o_out = cmd->add_option("--out-dir", out_dir, "Output directory")
                ->capture_default_str();
  }

  void finalize(const ConfigFile& file) {
    resolve(o_train, file, "data.train_captions", train_captions);
    resolve(o_val, file, "data.val_captions", val_captions);
    resolve(o_manifest, file, "data.features_manifest", manifest);
    resolve(o_out, file, "data.out_dir", out_dir);
    if (train_captions.empty() || val_captions.empty() || manifest.empty())
      throw std::runtime_error("missing data paths: need --train-captions, "
                               "--val-captions and --features-manifest (flags or "
                               "config file)");
  }
};

struct LoadedData {
  Vocabulary vocab;
  Dataset train_set, val_set;
};

LoadedData load_training_data(const DataFlags& data, const TrainingConfig& cfg) {
  LoadedData out;
  FeatureMap features = load_features(data.manifest);
  out.vocab = build_vocab(data.train_captions, cfg.min_count);
  out.train_set = load_dataset("train", data.train_captions, features, out.vocab,
                               cfg.stride);
  out.val_set = load_dataset("val", data.val_captions, features, out.vocab,
                             cfg.stride);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int cmd_train(CommonArgs& common, TrainingFlags& flags, DataFlags& data) {
  common.load_file();
  flags.finalize(common.file);
  data.finalize(common.file);

  LoadedData loaded = load_training_data(data, flags.cfg);
  TrainResult result = train(flags.cfg, loaded.train_set, loaded.val_set,
                             loaded.vocab);

  fs::create_directories(data.out_dir);
  const fs::path dir(data.out_dir);
  save_checkpoint((dir / "best.ckpt").string(), result.best);
  write_text((dir / "train.log").string(), result.log_text);
  std::printf("best validation BLEU: %.2f\n", result.best_bleu);
  std::printf("checkpoint: %s\n", (dir / "best.ckpt").string().c_str());
  return 0;
}

bool looks_like_feature_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  return in.read(magic, 4) && std::string_view(magic, 4) == "VDFQ";
}

int cmd_caption(const std::string& model_path, const std::string& features_path,
                int beam_width, int max_len, bool greedy, bool length_norm,
                int top_k, const std::string& top_k_file) {
  TrainedModel model = load_checkpoint(model_path);
  CaptionOptions opts;
  opts.beam_width = greedy ? 1 : beam_width;
  opts.max_len = max_len;
  opts.length_norm = length_norm;

  FeatureMap features;
  if (looks_like_feature_file(features_path)) {
    const std::string id = fs::path(features_path).stem().string();
    features.emplace(id, read_feature_file(features_path, id));
  } else {
    features = load_features(features_path);
  }

  std::string topk_text;
  for (const auto& [id, seq] : features) {
    auto hyps = caption_hypotheses(model, seq, opts);
    std::printf("%s\t%s\n", id.c_str(),
                detokenize(model.vocab, hyps.front().tokens).c_str());
    if (top_k > 0)
      topk_text += format_hypotheses_tsv(model.vocab, hyps, top_k, id);
  }
  if (top_k > 0) write_text(top_k_file, topk_text);
  return 0;
}

int cmd_evaluate(const std::string& hyp_path, const std::string& ref_path,
                 const std::string& metric_list) {
  std::vector<std::string> metrics;
  std::string cur;
  for (char ch : metric_list + ",") {
    if (ch == ',') {
      if (!cur.empty()) metrics.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  auto scores = evaluate_files(hyp_path, ref_path, metrics);
  std::fputs(format_metric_report(scores).c_str(), stdout);
  return 0;
}

int cmd_search(CommonArgs& common, TrainingFlags& flags, DataFlags& data,
               int trials, double scale, const CLI::Option* o_trials,
               const CLI::Option* o_scale) {
  common.load_file();
  flags.finalize(common.file);
  data.finalize(common.file);
  resolve(o_trials, common.file, "search.trials", trials);
  resolve(o_scale, common.file, "search.scale", scale);

  SearchRanges ranges;
  auto read_range = [&](const char* key, HyperRange& r) {
    auto pair = common.file.get_range(key, {r.lo, r.hi});
    r = {pair.first, pair.second};
  };
  read_range("search.embed_range", ranges.embed_dim);
  read_range("search.dec_hidden_range", ranges.dec_hidden);
  read_range("search.enc_hidden_range", ranges.enc_hidden);
  ranges = ranges.scaled(scale);

  LoadedData loaded = load_training_data(data, flags.cfg);
  auto outcomes = random_search(flags.cfg, ranges, trials, loaded.train_set,
                                loaded.val_set, loaded.vocab);

  fs::create_directories(data.out_dir);
  const fs::path dir(data.out_dir);
  std::string summary = "trial\tembed_dim\tdec_hidden\tenc_hidden\tval_bleu\n";
  for (const auto& outcome : outcomes) {
    char tag[32];
    std::snprintf(tag, sizeof(tag), "trial_%03d", outcome.trial);
    write_text((dir / (std::string(tag) + ".log")).string(),
               outcome.result.log_text);
    save_checkpoint((dir / (std::string(tag) + ".ckpt")).string(),
                    outcome.result.best);
    char row[160];
    std::snprintf(row, sizeof(row), "%d\t%d\t%d\t%d\t%.4f\n", outcome.trial,
                  outcome.hypers.embed_dim, outcome.hypers.dec_hidden,
                  outcome.hypers.enc_hidden, outcome.best_bleu);
    summary += row;
  }
  write_text((dir / "summary.tsv").string(), summary);
  std::fputs(summary.c_str(), stdout);
  return 0;
}

int cmd_make_toy(const std::string& out_dir, int n, std::uint64_t seed,
                 int frames_min, int frames_max, int feature_dim) {
  Rng rng(seed);
  ToyDatasetSpec spec;
  spec.n_videos = n;
  spec.j_min = frames_min;
  spec.j_max = frames_max;
  spec.feature_dim = feature_dim;
  ToyDatasetPaths paths = make_toy_dataset(rng, spec, out_dir);
  std::printf("manifest\t%s\n", paths.manifest.c_str());
  std::printf("train\t%s\n", paths.train_captions.c_str());
  std::printf("val\t%s\n", paths.val_captions.c_str());
  std::printf("test\t%s\n", paths.test_captions.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video captioning: bidirectional recurrent encoder, soft-attention "
               "decoder, beam search, BLEU/CIDEr evaluation"};
  app.require_subcommand(1);

  CommonArgs common;
  TrainingFlags train_flags, search_flags;
  DataFlags train_data, search_data;

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a captioning model");
  train_cmd->add_option("--config", common.config_path, "YAML config file");
  train_data.add_options(train_cmd);
  train_flags.add_options(train_cmd);

  // caption
  auto* caption_cmd = app.add_subcommand("caption", "Generate captions");
  std::string model_path, features_path, top_k_file = "hypotheses.tsv";
  int beam_width = 10, max_len = 30, top_k = 0;
  bool greedy = false, length_norm = false;
  caption_cmd->add_option("--model", model_path, "Checkpoint file")->required();
  caption_cmd->add_option("--features", features_path,
                          "Feature file or manifest")->required();
  caption_cmd->add_option("--beam-width", beam_width, "Beam width")
      ->capture_default_str();
  caption_cmd->add_option("--max-len", max_len, "Length limit")
      ->capture_default_str();
  caption_cmd->add_flag("--greedy", greedy, "Greedy decoding (beam width 1)");
  caption_cmd->add_flag("--length-norm", length_norm,
                        "Rank hypotheses by per-token log-probability");
  caption_cmd->add_option("--top-k", top_k,
                          "Also dump the k best hypotheses per video");
  caption_cmd->add_option("--top-k-file", top_k_file,
                          "TSV path for the --top-k dump")->capture_default_str();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score hypotheses against references");
  std::string hyp_path, ref_path, metric_list = "bleu,cider";
  eval_cmd->add_option("--hyp", hyp_path, "Hypotheses TSV (one per id)")->required();
  eval_cmd->add_option("--refs", ref_path, "References TSV (ids may repeat)")->required();
  eval_cmd->add_option("--metrics", metric_list, "Comma-separated metric names")
      ->capture_default_str();

  // search
  auto* search_cmd = app.add_subcommand("search", "Random hyperparameter search");
  int trials = 10;
  double scale = 1.0;
  search_cmd->add_option("--config", common.config_path, "YAML config file");
  search_data.add_options(search_cmd);
  search_flags.add_options(search_cmd);
  auto* o_trials = search_cmd->add_option("--trials", trials, "Number of trials")
                       ->capture_default_str();
  auto* o_scale = search_cmd->add_option("--scale", scale,
                                         "Scale factor on the sampling ranges")
                      ->capture_default_str();

  // make-toy
  auto* toy_cmd = app.add_subcommand("make-toy", "Generate a synthetic dataset");
  std::string toy_out = "toy";
  int toy_n = 10, frames_min = 30, frames_max = 78, toy_dim = 16;
  std::uint64_t toy_seed = 1;
  toy_cmd->add_option("--out-dir", toy_out, "Output directory")->capture_default_str();
  toy_cmd->add_option("--n", toy_n, "Number of videos")->capture_default_str();
  toy_cmd->add_option("--seed", toy_seed, "Generator seed")->capture_default_str();
  toy_cmd->add_option("--frames-min", frames_min, "Min raw frame count")
      ->capture_default_str();
  toy_cmd->add_option("--frames-max", frames_max, "Max raw frame count")
      ->capture_default_str();
  toy_cmd->add_option("--feature-dim", toy_dim, "Feature dimension")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(common, train_flags, train_data);
    if (caption_cmd->parsed())
      return cmd_caption(model_path, features_path, beam_width, max_len, greedy,
                         length_norm, top_k, top_k_file);
    if (eval_cmd->parsed()) return cmd_evaluate(hyp_path, ref_path, metric_list);
    if (search_cmd->parsed())
      return cmd_search(common, search_flags, search_data, trials, scale,
                        o_trials, o_scale);
    if (toy_cmd->parsed())
      return cmd_make_toy(toy_out, toy_n, toy_seed, frames_min, frames_max, toy_dim);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
