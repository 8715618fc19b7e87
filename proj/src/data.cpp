#include "bivicap/data.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "bivicap/metrics.hpp"

namespace fs = std::filesystem;

namespace bivicap {

Vocabulary::Vocabulary() {
  for (const char* tok : {"<pad>", "<bos>", "<eos>", "<unk>"}) append(tok);
}

void Vocabulary::append(const std::string& token) {
  token_to_id_.emplace(token, size());
  id_to_token_.push_back(token);
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  if (tokens.size() < 4 ||
      !std::equal(v.id_to_token_.begin(), v.id_to_token_.end(), tokens.begin()))
    throw std::runtime_error("Vocabulary: token list does not start with the "
                             "reserved specials");
  for (std::size_t i = 4; i < tokens.size(); ++i) {
    if (v.token_to_id_.count(tokens[i]))
      throw std::runtime_error("Vocabulary: duplicate token '" + tokens[i] + "'");
    v.append(tokens[i]);
  }
  return v;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw std::out_of_range("Vocabulary: id " + std::to_string(id) +
                            " outside [0, " + std::to_string(size()) + ")");
  return id_to_token_[id];
}

bool Vocabulary::contains(const std::string& token) const {
  return token_to_id_.count(token) > 0;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<int> Vocabulary::encode_caption(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size() + 2);
  ids.push_back(kBos);
  for (const auto& t : tokens) ids.push_back(id(t));
  ids.push_back(kEos);
  return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(token(id));
  return out;
}

std::vector<CaptionRecord> read_caption_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open caption file: " + path);
  std::vector<CaptionRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("malformed caption line (no TAB) in " + path +
                               ": " + line);
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

Vocabulary build_vocab(const std::string& caption_file, int min_count) {
  auto records = read_caption_file(caption_file);
  if (records.empty())
    throw std::runtime_error("build_vocab: no captions in " + caption_file);
  std::map<std::string, std::int64_t> counts;
  for (const auto& rec : records)
    for (const auto& tok : tokenize(rec.text)) ++counts[tok];

  std::vector<std::pair<std::string, std::int64_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  std::vector<std::string> tokens = vocab.tokens();
  for (const auto& [tok, cnt] : items)
    if (cnt >= min_count) tokens.push_back(tok);
  return Vocabulary::from_tokens(tokens);
}

namespace {

constexpr char kFeatureMagic[4] = {'V', 'D', 'F', 'Q'};
constexpr std::uint32_t kFeatureVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error("truncated feature file: " + path);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

// float32 little-endian payload
void write_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

float read_f32(std::istream& in, const std::string& path) {
  const std::uint32_t bits = read_u32(in, path);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

FrameFeatureSequence read_feature_file(const std::string& path,
                                       const std::string& video_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open feature file: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kFeatureMagic, 4) != 0)
    throw std::runtime_error("bad feature-file magic in " + path);
  const auto version = read_u32(in, path);
  if (version != kFeatureVersion)
    throw std::runtime_error("unsupported feature-file version " +
                             std::to_string(version) + " in " + path);
  const auto j_count = read_u32(in, path);
  const auto dim = read_u32(in, path);
  if (j_count == 0 || dim == 0)
    throw std::runtime_error("degenerate feature shape " + std::to_string(j_count) +
                             "x" + std::to_string(dim) + " in " + path);
  Matrix frames(static_cast<int>(j_count), static_cast<int>(dim));
  for (std::size_t i = 0; i < frames.size(); ++i)
    frames[i] = static_cast<double>(read_f32(in, path));
  if (!frames.all_finite())
    throw std::runtime_error("non-finite feature values in " + path);
  return {video_id, std::move(frames)};
}

void write_feature_file(const std::string& path, const FrameFeatureSequence& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write feature file: " + path);
  out.write(kFeatureMagic, 4);
  write_u32(out, kFeatureVersion);
  write_u32(out, static_cast<std::uint32_t>(seq.frame_count()));
  write_u32(out, static_cast<std::uint32_t>(seq.feature_dim()));
  for (std::size_t i = 0; i < seq.frames.size(); ++i)
    write_f32(out, static_cast<float>(seq.frames[i]));
  if (!out) throw std::runtime_error("short write to feature file: " + path);
}

FeatureMap load_features(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);

  fs::path root;
  if (const char* env = std::getenv("BIVICAP_DATA_DIR"); env && *env)
    root = env;
  else
    root = fs::path(manifest_path).parent_path();

  FeatureMap features;
  std::string line;
  int feature_dim = -1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("malformed manifest line (no TAB) in " +
                               manifest_path + ": " + line);
    const std::string id = line.substr(0, tab);
    fs::path rel = line.substr(tab + 1);
    const fs::path full = rel.is_absolute() ? rel : root / rel;
    if (features.count(id))
      throw std::runtime_error("duplicate video id '" + id + "' in manifest " +
                               manifest_path);
    auto seq = read_feature_file(full.string(), id);
    if (feature_dim < 0) feature_dim = seq.feature_dim();
    if (seq.feature_dim() != feature_dim)
      throw std::runtime_error("inconsistent feature dim in manifest " +
                               manifest_path + ": '" + id + "' has d=" +
                               std::to_string(seq.feature_dim()) + ", expected " +
                               std::to_string(feature_dim));
    features.emplace(id, std::move(seq));
  }
  if (features.empty())
    throw std::runtime_error("empty manifest: " + manifest_path);
  return features;
}

FeatureMap concat_feature_sets(const FeatureMap& a, const FeatureMap& b) {
  std::vector<std::string> only_a, only_b;
  for (const auto& [id, _] : a)
    if (!b.count(id)) only_a.push_back(id);
  for (const auto& [id, _] : b)
    if (!a.count(id)) only_b.push_back(id);
  if (!only_a.empty() || !only_b.empty()) {
    std::string msg = "concat_feature_sets: id sets differ:";
    for (const auto& id : only_a) msg += " '" + id + "' missing from second;";
    for (const auto& id : only_b) msg += " '" + id + "' missing from first;";
    throw std::runtime_error(msg);
  }

  FeatureMap out;
  for (const auto& [id, seq_a] : a) {
    const auto& seq_b = b.at(id);
    if (seq_a.frame_count() != seq_b.frame_count())
      throw std::runtime_error("concat_feature_sets: frame counts differ for '" +
                               id + "': " + std::to_string(seq_a.frame_count()) +
                               " vs " + std::to_string(seq_b.frame_count()));
    const int d_a = seq_a.feature_dim(), d_b = seq_b.feature_dim();
    Matrix frames(seq_a.frame_count(), d_a + d_b);
    for (int j = 0; j < seq_a.frame_count(); ++j) {
      auto row = frames.row(j);
      auto ra = seq_a.frames.row(j);
      auto rb = seq_b.frames.row(j);
      std::copy(ra.begin(), ra.end(), row.begin());
      std::copy(rb.begin(), rb.end(), row.begin() + d_a);
    }
    out.emplace(id, FrameFeatureSequence{id, std::move(frames)});
  }
  return out;
}

std::size_t Dataset::caption_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.captions.size();
  return n;
}

Dataset load_dataset(const std::string& split_name, const std::string& caption_file,
                     const FeatureMap& features, const Vocabulary& vocab,
                     int stride) {
  auto records = read_caption_file(caption_file);
  if (records.empty())
    throw std::runtime_error("load_dataset: no captions in " + caption_file);

  std::map<std::string, std::vector<std::vector<int>>> captions_by_id;
  for (const auto& rec : records) {
    if (!features.count(rec.video_id))
      throw std::runtime_error("load_dataset: video id '" + rec.video_id +
                               "' from " + caption_file +
                               " is missing from the feature manifest");
    captions_by_id[rec.video_id].push_back(
        vocab.encode_caption(tokenize(rec.text)));
  }

  Dataset ds;
  ds.split_name = split_name;
  for (auto& [id, captions] : captions_by_id) {
    DatasetEntry entry;
    entry.video_id = id;
    entry.features = subsample(features.at(id), stride);
    entry.captions = std::move(captions);
    ds.entries.push_back(std::move(entry));
  }
  return ds;
}

std::vector<std::string> default_caption_pool() {
  return {
      "a man plays a guitar",
      "a dog runs across the yard",
      "a woman slices an onion",
      "a cat jumps onto the table",
      "two boys kick a ball",
      "a girl rides a horse",
      "a chef cooks some pasta",
      "a bird sings on a branch",
      "a monkey climbs a tree",
      "a truck drives down the road",
      "a baby laughs at the camera",
      "a player throws the basketball",
      "an old man feeds the pigeons",
      "a train crosses a long bridge",
      "a diver swims near the reef",
      "a painter covers the wall",
  };
}

ToyDatasetPaths make_toy_dataset(Rng& rng, const ToyDatasetSpec& spec,
                                 const std::string& out_dir) {
  if (spec.n_videos < 1)
    throw std::invalid_argument("make_toy_dataset: n_videos must be >= 1");
  if (spec.j_min < 1 || spec.j_max < spec.j_min)
    throw std::invalid_argument("make_toy_dataset: bad frame-count range");
  if (spec.feature_dim < 1)
    throw std::invalid_argument("make_toy_dataset: feature_dim must be >= 1");

  const auto pool = spec.caption_pool.empty() ? default_caption_pool()
                                              : spec.caption_pool;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  const fs::path feat_dir = dir / "features";
  fs::create_directories(feat_dir);

  std::ofstream manifest(dir / "features.manifest");
  std::ofstream captions(dir / "captions.tsv");
  if (!manifest || !captions)
    throw std::runtime_error("make_toy_dataset: cannot write under " + out_dir);

  for (int i = 0; i < spec.n_videos; ++i) {
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "toy%04d", i);
    const std::string id(idbuf);
    const int frames = static_cast<int>(rng.uniform_int(spec.j_min, spec.j_max));
    Matrix m(frames, spec.feature_dim);
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = rng.gaussian();
    const std::string rel = "features/" + id + ".vdfq";
    write_feature_file((dir / rel).string(), {id, std::move(m)});
    manifest << id << '\t' << rel << '\n';
    captions << id << '\t' << pool[i % pool.size()] << '\n';
  }
  manifest.close();
  captions.close();

  // train/val/test reuse the same captions at toy scale
  ToyDatasetPaths paths;
  paths.manifest = (dir / "features.manifest").string();
  paths.train_captions = (dir / "train.tsv").string();
  paths.val_captions = (dir / "val.tsv").string();
  paths.test_captions = (dir / "test.tsv").string();
  for (const auto& split : {paths.train_captions, paths.val_captions, paths.test_captions})
    fs::copy_file(dir / "captions.tsv", split, fs::copy_options::overwrite_existing);
  fs::remove(dir / "captions.tsv");
  return paths;
}

}  // namespace bivicap
