#include "tgclstm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "tgclstm/errors.hpp"

namespace tgclstm {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'T', 'G', 'C', 'L', 'S', 'T', 'M', 'C'};

std::uint64_t fnv1a(const std::vector<char>& bytes, std::size_t count) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < count; ++i) {
    h ^= static_cast<unsigned char>(bytes[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

class Writer {
 public:
  template <typename T>
  void pod(const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void matrix(const Matrix& m) {
    pod<std::uint64_t>(m.rows());
    pod<std::uint64_t>(m.cols());
    const char* p = reinterpret_cast<const char*>(m.values().data());
    bytes_.insert(bytes_.end(), p, p + m.size() * sizeof(double));
  }
  std::vector<char>& bytes() { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<char>& bytes, std::size_t end, std::string source)
      : bytes_(bytes), end_(end), source_(std::move(source)) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  Matrix matrix() {
    const auto rows = pod<std::uint64_t>();
    const auto cols = pod<std::uint64_t>();
    if (cols != 0 && rows > (end_ - pos_) / sizeof(double) / cols) corrupt("matrix overruns file");
    std::vector<double> values(rows * cols);
    need(values.size() * sizeof(double));
    std::memcpy(values.data(), bytes_.data() + pos_, values.size() * sizeof(double));
    pos_ += values.size() * sizeof(double);
    return Matrix(rows, cols, std::move(values));
  }
  bool done() const { return pos_ == end_; }
  [[noreturn]] void corrupt(const std::string& why) const {
    throw FormatError("corrupt checkpoint " + source_ + ": " + why);
  }

 private:
  void need(std::size_t n) const {
    if (n > end_ - pos_) corrupt("truncated");
  }
  const std::vector<char>& bytes_;
  std::size_t pos_ = 0;
  std::size_t end_;
  std::string source_;
};

struct ParsedCheckpoint {
  ModelStructure structure;
  CheckpointMetadata metadata;
  struct Entry {
    std::string name;
    Matrix value;
    Matrix rms;
  };
  std::vector<Entry> params;
};

ParsedCheckpoint parse(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string source = path.string();
  if (bytes.size() < sizeof(kMagic) + sizeof(std::uint64_t) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("corrupt checkpoint " + source + ": bad magic or truncated");
  }
  const std::size_t body_end = bytes.size() - sizeof(std::uint64_t);
  std::uint64_t stored_hash = 0;
  std::memcpy(&stored_hash, bytes.data() + body_end, sizeof(stored_hash));

  Reader r(bytes, body_end, source);
  for (std::size_t i = 0; i < sizeof(kMagic); ++i) r.pod<char>();
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint " + source + " has version " + std::to_string(version) +
                      ", expected " + std::to_string(kCheckpointVersion));
  }
  if (fnv1a(bytes, body_end) != stored_hash) r.corrupt("checksum mismatch (truncated or modified)");

  ParsedCheckpoint out;
  const auto kind = r.pod<std::uint32_t>();
  if (kind > static_cast<std::uint32_t>(ModelKind::kLsgcLstm)) r.corrupt("unknown model kind");
  out.structure.kind = static_cast<ModelKind>(kind);
  out.structure.nodes = r.pod<std::uint64_t>();
  out.structure.order = r.pod<std::int32_t>();
  for (auto n = r.pod<std::uint64_t>(); n > 0; --n) {
    std::string key = r.str();
    out.metadata[std::move(key)] = r.str();
  }
  for (auto n = r.pod<std::uint64_t>(); n > 0; --n) out.structure.hop_masks.push_back(r.matrix());
  if (r.pod<std::uint8_t>() != 0) out.structure.laplacian = r.matrix();
  for (auto n = r.pod<std::uint64_t>(); n > 0; --n) {
    ParsedCheckpoint::Entry e;
    e.name = r.str();
    e.value = r.matrix();
    e.rms = r.matrix();
    if (!e.value.same_shape(e.rms)) r.corrupt("parameter " + e.name + " has mismatched state");
    out.params.push_back(std::move(e));
  }
  if (!r.done()) r.corrupt("trailing bytes");
  return out;
}

void restore(const ParsedCheckpoint& ckpt, Forecaster& model, const std::string& source) {
  if (ckpt.structure.kind != model.kind()) {
    throw ShapeError("checkpoint " + source + " holds a " +
                     std::string(model_kind_name(ckpt.structure.kind)) + " model, not " +
                     std::string(model_kind_name(model.kind())));
  }
  if (ckpt.structure.nodes != model.nodes()) {
    throw ShapeError("checkpoint " + source + " was trained on " +
                     std::to_string(ckpt.structure.nodes) + " nodes, model has " +
                     std::to_string(model.nodes()));
  }
  if (ckpt.structure.hop_masks != model.structure().hop_masks ||
      ckpt.structure.laplacian != model.structure().laplacian) {
    throw ShapeError("checkpoint " + source + " was built on a different graph");
  }
  auto params = model.parameters();
  if (params.size() != ckpt.params.size()) {
    throw ShapeError("checkpoint " + source + " has " + std::to_string(ckpt.params.size()) +
                     " parameters, model has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = ckpt.params[i];
    if (e.name != params[i]->name || !e.value.same_shape(params[i]->value)) {
      throw ShapeError("checkpoint " + source + ": parameter " + e.name + " (" +
                       shape_string(e.value) + ") does not match " + params[i]->name + " (" +
                       shape_string(params[i]->value) + ")");
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i]->value = ckpt.params[i].value;
    params[i]->rms = ckpt.params[i].rms;
    params[i]->zero_grad();
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Forecaster& model,
                     const CheckpointMetadata& metadata) {
  const ModelStructure& s = model.structure();
  Writer w;
  for (char c : kMagic) w.pod(c);
  w.pod<std::uint32_t>(kCheckpointVersion);
  w.pod<std::uint32_t>(static_cast<std::uint32_t>(s.kind));
  w.pod<std::uint64_t>(s.nodes);
  w.pod<std::int32_t>(s.order);
  w.pod<std::uint64_t>(metadata.size());
  for (const auto& [k, v] : metadata) {
    w.str(k);
    w.str(v);
  }
  w.pod<std::uint64_t>(s.hop_masks.size());
  for (const auto& m : s.hop_masks) w.matrix(m);
  w.pod<std::uint8_t>(s.laplacian.empty() ? 0 : 1);
  if (!s.laplacian.empty()) w.matrix(s.laplacian);
  const auto params = model.parameters();
  w.pod<std::uint64_t>(params.size());
  for (const Parameter* p : params) {
    w.str(p->name);
    w.matrix(p->value);
    w.matrix(p->rms);
  }
  w.pod<std::uint64_t>(fnv1a(w.bytes(), w.bytes().size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw FormatError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  ParsedCheckpoint ckpt = parse(path);
  try {
    ckpt.structure.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError("corrupt checkpoint " + path.string() + ": " + e.what());
  }
  auto model = make_forecaster(ckpt.structure, 0);
  restore(ckpt, *model, path.string());
  return {std::move(model), std::move(ckpt.metadata)};
}

CheckpointMetadata load_checkpoint_into(const std::filesystem::path& path, Forecaster& model) {
  ParsedCheckpoint ckpt = parse(path);
  restore(ckpt, model, path.string());
  return std::move(ckpt.metadata);
}

}  // namespace tgclstm
