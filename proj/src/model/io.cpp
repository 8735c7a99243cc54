// SPDX-License-Identifier: Apache-2.0
#include "deepauto/model/io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <zlib.h>

#include "deepauto/error.hpp"

namespace deepauto::model {
namespace {

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

constexpr char kMagic[4] = {'D', 'A', 'U', 'T'};

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw FormatError(FormatError::Kind::truncated, "model file is truncated");
  }
  std::string_view b_;
  std::size_t pos_ = 0;
};

nn::Tensor2 column_of(const std::vector<double>& v) { return nn::Tensor2::column(v); }

}  // namespace

std::string save_model(const ModelBundle& bundle) {
  bundle.config.validate();
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kModelFormatVersion);
  const std::string cfg = to_json(bundle.config).dump();  // nlohmann::json objects keep sorted keys
  put<std::uint64_t>(out, cfg.size());
  out += cfg;

  std::vector<nn::ConstNamedTensor> tensors = bundle.params.named();
  std::vector<double> constant(bundle.scaler.constant.begin(), bundle.scaler.constant.end());
  const nn::Tensor2 smin = column_of(bundle.scaler.min), smax = column_of(bundle.scaler.max),
                    sconst = column_of(constant);
  tensors.push_back({"scaler.min", &smin});
  tensors.push_back({"scaler.max", &smax});
  tensors.push_back({"scaler.constant", &sconst});

  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out += t.name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.tensor->rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.tensor->cols()));
    out.append(reinterpret_cast<const char*>(t.tensor->data()), t.tensor->size() * sizeof(double));
  }
  put<std::uint32_t>(out, crc32_of(out));
  return out;
}

namespace {

/// True when the header and tensor records exactly fill `body`.
bool layout_complete(std::string_view body) {
  try {
    Reader r(body.substr(8));
    r.take(r.get<std::uint64_t>());
    const auto count = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
      r.take(r.get<std::uint16_t>());
      const auto rows = r.get<std::uint32_t>();
      const auto cols = r.get<std::uint32_t>();
      const std::uint64_t n = static_cast<std::uint64_t>(rows) * cols;
      if (n > r.remaining() / sizeof(double)) return false;
      r.take(n * sizeof(double));
    }
    return r.remaining() == 0;
  } catch (const FormatError&) {
    return false;
  }
}

}  // namespace

ModelBundle load_model(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError(FormatError::Kind::bad_magic, "not a model file (bad magic)");
  Reader head(bytes.substr(4));
  const auto version = head.get<std::uint32_t>();
  if (version != kModelFormatVersion)
    throw FormatError(FormatError::Kind::bad_version, "unsupported model format version " + std::to_string(version));
  if (bytes.size() < 12) throw FormatError(FormatError::Kind::truncated, "model file is truncated");
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  std::uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  if (crc32_of(body) != stored) {
    // a cut-short file fails the checksum too; it is reported as truncation
    // when its layout cannot be walked to the end
    if (!layout_complete(body)) throw FormatError(FormatError::Kind::truncated, "model file is truncated");
    throw FormatError(FormatError::Kind::checksum, "model file checksum mismatch");
  }

  Reader r(body.substr(8));
  const auto cfg_len = r.get<std::uint64_t>();
  ModelBundle b;
  try {
    b.config = config_from_json(nlohmann::json::parse(r.take(cfg_len)));
    b.params = DeepAutoParams::zeros(b.config);
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(FormatError::Kind::bad_content, std::string("invalid stored config: ") + e.what());
  }

  std::map<std::string, nn::Tensor2, std::less<>> stored_tensors;
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint16_t>();
    std::string name(r.take(name_len));
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    if (n > r.remaining() / sizeof(double)) throw FormatError(FormatError::Kind::truncated, "tensor data cut short");
    nn::Tensor2 t(rows, cols);
    std::memcpy(t.data(), r.take(n * sizeof(double)).data(), n * sizeof(double));
    if (!stored_tensors.emplace(std::move(name), std::move(t)).second)
      throw FormatError(FormatError::Kind::bad_content, "duplicate tensor name");
  }
  if (r.remaining() != 0) throw FormatError(FormatError::Kind::bad_content, "trailing bytes after tensors");

  for (auto& nt : b.params.named()) {
    auto it = stored_tensors.find(nt.name);
    if (it == stored_tensors.end()) throw FormatError(FormatError::Kind::bad_content, "missing tensor " + nt.name);
    if (!it->second.same_shape(*nt.tensor))
      throw FormatError(FormatError::Kind::bad_content, "tensor " + nt.name + " has shape " +
                                                            shape_string(it->second) + ", config implies " +
                                                            shape_string(*nt.tensor));
    *nt.tensor = std::move(it->second);
    stored_tensors.erase(it);
  }
  auto take_scaler = [&](const char* name) {
    auto it = stored_tensors.find(name);
    if (it == stored_tensors.end() || it->second.cols() != 1 || it->second.rows() != b.config.base_channels())
      throw FormatError(FormatError::Kind::bad_content, std::string("missing or malformed ") + name);
    std::vector<double> v(it->second.begin(), it->second.end());
    stored_tensors.erase(it);
    return v;
  };
  b.scaler.min = take_scaler("scaler.min");
  b.scaler.max = take_scaler("scaler.max");
  for (double c : take_scaler("scaler.constant")) b.scaler.constant.push_back(c != 0.0 ? 1 : 0);
  if (!stored_tensors.empty())
    throw FormatError(FormatError::Kind::bad_content, "unexpected tensor " + stored_tensors.begin()->first);
  return b;
}

void save_model_file(const std::string& path, const ModelBundle& bundle) {
  const std::string bytes = save_model(bundle);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

ModelBundle load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

}  // namespace deepauto::model
