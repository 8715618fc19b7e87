#include "bivicap/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bivicap {

namespace {

constexpr char kMagic[4] = {'B', 'V', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error("truncated checkpoint: " + what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& in, const std::string& what) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    throw std::runtime_error("truncated checkpoint: " + what);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

const char* to_string(CellVariant v) {
  return v == CellVariant::paper ? "paper" : "standard";
}

CellVariant cell_variant_from_string(const std::string& s) {
  if (s == "paper") return CellVariant::paper;
  if (s == "standard") return CellVariant::standard;
  throw std::invalid_argument("unknown cell variant '" + s +
                              "' (valid: paper, standard)");
}

const char* to_string(InitStateMode m) {
  return m == InitStateMode::mean ? "mean" : "zero";
}

InitStateMode init_state_from_string(const std::string& s) {
  if (s == "mean") return InitStateMode::mean;
  if (s == "zero") return InitStateMode::zero;
  throw std::invalid_argument("unknown init-state mode '" + s +
                              "' (valid: mean, zero)");
}

void save_checkpoint(std::ostream& out, const TrainedModel& model) {
  out.write(kMagic, 4);
  write_u32(out, kVersion);

  std::uint32_t count = 0;
  model.params.for_each_tensor([&](const std::string&, const Matrix&) { ++count; });
  write_u32(out, count);

  model.params.for_each_tensor([&](const std::string& name, const Matrix& m) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, 2);  // rank
    write_u32(out, static_cast<std::uint32_t>(m.rows()));
    write_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (std::size_t i = 0; i < m.size(); ++i) write_f64(out, m[i]);
  });

  const ModelDims& d = model.params.dims;
  nlohmann::json meta{
      {"dims",
       {{"feature_dim", d.feature_dim},
        {"enc_hidden", d.enc_hidden},
        {"dec_hidden", d.dec_hidden},
        {"embed_dim", d.embed_dim},
        {"attn_dim", d.attn_dim},
        {"readout_dim", d.readout_dim},
        {"vocab_size", d.vocab_size}}},
      {"cell_variant", to_string(model.variant)},
      {"init_state", to_string(model.init_state)},
      {"stride", model.stride},
      {"vocab", model.vocab.tokens()},
  };
  const std::string text = meta.dump();
  write_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("short write while saving checkpoint");
}

void save_checkpoint(const std::string& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  save_checkpoint(out, model);
}

TrainedModel load_checkpoint(std::istream& in, const std::string& what) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("bad checkpoint magic in " + what);
  const auto version = read_u32(in, what);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version) + " in " + what);
  const auto count = read_u32(in, what);

  std::map<std::string, Matrix> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_u32(in, what);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len))
      throw std::runtime_error("truncated checkpoint: " + what);
    const auto rank = read_u32(in, what);
    if (rank != 2)
      throw std::runtime_error("unexpected tensor rank " + std::to_string(rank) +
                               " for '" + name + "' in " + what);
    const auto rows = read_u32(in, what);
    const auto cols = read_u32(in, what);
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = read_f64(in, what);
    tensors.emplace(std::move(name), std::move(m));
  }

  const auto meta_len = read_u32(in, what);
  std::string text(meta_len, '\0');
  if (!in.read(text.data(), meta_len))
    throw std::runtime_error("truncated checkpoint metadata: " + what);
  nlohmann::json meta = nlohmann::json::parse(text);

  ModelDims dims;
  const auto& jd = meta.at("dims");
  dims.feature_dim = jd.at("feature_dim").get<int>();
  dims.enc_hidden = jd.at("enc_hidden").get<int>();
  dims.dec_hidden = jd.at("dec_hidden").get<int>();
  dims.embed_dim = jd.at("embed_dim").get<int>();
  dims.attn_dim = jd.at("attn_dim").get<int>();
  dims.readout_dim = jd.at("readout_dim").get<int>();
  dims.vocab_size = jd.at("vocab_size").get<int>();

  TrainedModel model;
  model.params = ModelParams::zeros(dims);
  model.params.for_each_tensor([&](const std::string& name, Matrix& m) {
    auto it = tensors.find(name);
    if (it == tensors.end())
      throw std::runtime_error("checkpoint " + what + " is missing tensor '" +
                               name + "'");
    if (!m.same_shape(it->second))
      throw std::runtime_error("checkpoint " + what + " tensor '" + name +
                               "' has shape " + it->second.shape_str() +
                               ", expected " + m.shape_str());
    m = std::move(it->second);
  });

  model.vocab = Vocabulary::from_tokens(meta.at("vocab").get<std::vector<std::string>>());
  if (model.vocab.size() != dims.vocab_size)
    throw std::runtime_error("checkpoint " + what + " vocabulary size " +
                             std::to_string(model.vocab.size()) +
                             " disagrees with dims.vocab_size " +
                             std::to_string(dims.vocab_size));
  model.variant = cell_variant_from_string(meta.at("cell_variant").get<std::string>());
  model.init_state = init_state_from_string(meta.at("init_state").get<std::string>());
  model.stride = meta.at("stride").get<int>();
  return model;
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  return load_checkpoint(in, path);
}

std::string checkpoint_bytes(const TrainedModel& model) {
  std::ostringstream out(std::ios::binary);
  save_checkpoint(out, model);
  return out.str();
}

}  // namespace bivicap
