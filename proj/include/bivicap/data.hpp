#pragma once

#include <map>
#include <string>
#include <vector>

#include "bivicap/encoder.hpp"
#include "bivicap/rng.hpp"

namespace bivicap {

/// Bidirectional token↔id map. Ids 0–3 are reserved: pad, bos, eos, unk.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  Vocabulary();
  /// Rebuild from a full ordered token list (checkpoint load).
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(id_to_token_.size()); }
  /// Token id, or unk for out-of-vocabulary tokens.
  int id(const std::string& token) const;
  const std::string& token(int id) const;
  bool contains(const std::string& token) const;
  static bool is_special(int id) { return id >= 0 && id <= kUnk; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  /// bos … eos wrapping included.
  std::vector<int> encode_caption(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  const std::vector<std::string>& tokens() const { return id_to_token_; }

 private:
  void append(const std::string& token);
  std::map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

/// Tokens with corpus frequency >= min_count, ordered by (frequency desc,
/// token asc) after the specials. Throws on an empty/unreadable file.
Vocabulary build_vocab(const std::string& caption_file, int min_count = 1);

// --- caption files: `video_id TAB caption text`, repeated ids allowed ---

struct CaptionRecord {
  std::string video_id;
  std::string text;
};
std::vector<CaptionRecord> read_caption_file(const std::string& path);

// --- feature files: magic "VDFQ", version u32=1, J u32, d u32,
//     then J·d float32 little-endian row-major ---

FrameFeatureSequence read_feature_file(const std::string& path,
                                       const std::string& video_id);
void write_feature_file(const std::string& path, const FrameFeatureSequence& seq);

using FeatureMap = std::map<std::string, FrameFeatureSequence>;

/// Manifest lines are `video_id TAB relative_path`; relative paths resolve
/// against $BIVICAP_DATA_DIR when set, else the manifest's directory.
FeatureMap load_features(const std::string& manifest_path);

/// Per-frame concatenation of two feature sets covering the same videos.
FeatureMap concat_feature_sets(const FeatureMap& a, const FeatureMap& b);

// --- datasets ---

struct DatasetEntry {
  std::string video_id;
  FrameFeatureSequence features;          // subsampled
  std::vector<std::vector<int>> captions; // encoded, bos…eos wrapped
};

struct Dataset {
  std::string split_name;
  std::vector<DatasetEntry> entries;

  std::size_t caption_count() const;
};

/// Joins a caption file with loaded features, encodes with the vocabulary and
/// applies frame subsampling once. Every caption id must be resolvable.
Dataset load_dataset(const std::string& split_name, const std::string& caption_file,
                     const FeatureMap& features, const Vocabulary& vocab,
                     int stride);

// --- synthetic toy data for desk-scale runs ---

struct ToyDatasetSpec {
  int n_videos = 10;
  int j_min = 30;
  int j_max = 78;
  int feature_dim = 16;
  std::vector<std::string> caption_pool;  // empty → default pool
};

struct ToyDatasetPaths {
  std::string manifest;
  std::string train_captions;
  std::string val_captions;
  std::string test_captions;
};

std::vector<std::string> default_caption_pool();

/// Gaussian feature sequences with captions assigned round-robin from the
/// pool, written in the standard formats under out_dir.
ToyDatasetPaths make_toy_dataset(Rng& rng, const ToyDatasetSpec& spec,
                                 const std::string& out_dir);

}  // namespace bivicap
