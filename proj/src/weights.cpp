#include "ust/weights.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

namespace ust {
namespace {

static_assert(std::endian::native == std::endian::little, "weight I/O assumes a little-endian host");

constexpr char kMagic[4] = {'W', 'C', 'T', 'W'};
constexpr std::uint8_t kDtypeF32 = 0;

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n)
      throw FormatError(std::string("truncated weight file while reading ") + what, pos_);
  }

  template <typename T>
  T read(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  const std::uint8_t* take(std::size_t n, const char* what) {
    need(n, what);
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::size_t WeightTensor::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::uint32_t d) { return a * d; });
}

void WeightStore::add(std::string name, WeightTensor tensor) {
  if (tensor.data.size() != tensor.element_count())
    throw InvalidArgument("WeightStore: tensor " + name + " data does not match its shape");
  tensors_.insert_or_assign(std::move(name), std::move(tensor));
}

const WeightTensor& WeightStore::at(const std::string& name) const {
  const auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ConfigurationError("weight tensor not found: " + name);
  return it->second;
}

Preprocessing WeightStore::preprocessing() const {
  Preprocessing p;
  if (const auto it = metadata_.find("mean"); it != metadata_.end()) {
    std::istringstream in(it->second);
    for (float& m : p.mean)
      if (!(in >> m)) throw ConfigurationError("metadata 'mean' must hold three numbers");
  }
  if (const auto it = metadata_.find("scale"); it != metadata_.end()) {
    std::istringstream in(it->second);
    if (!(in >> p.scale) || p.scale == 0.0f) throw ConfigurationError("metadata 'scale' must be a nonzero number");
  }
  if (const auto it = metadata_.find("channel_order"); it != metadata_.end()) {
    if (it->second == "bgr")
      p.bgr = true;
    else if (it->second != "rgb")
      throw ConfigurationError("metadata 'channel_order' must be rgb or bgr, got " + it->second);
  }
  return p;
}

std::uint32_t crc32(const std::uint8_t* data, std::size_t size, std::uint32_t seed) {
  uLong crc = seed;
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = ::crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string format_metadata(const std::map<std::string, std::string>& metadata) {
  std::string out;
  for (const auto& [k, v] : metadata) out += k + ": " + v + "\n";
  return out;
}

std::map<std::string, std::string> parse_metadata(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    out[trim(line.substr(0, colon))] = trim(line.substr(colon + 1));
  }
  return out;
}

WeightStore parse_weights(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  const std::uint8_t* magic = r.take(4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic, expected \"WCTW\"", 0);

  const std::size_t version_offset = r.offset();
  const auto version = r.read<std::uint32_t>("version");
  if (version != kWeightFormatVersion)
    throw FormatError("unsupported weight format version " + std::to_string(version) +
                          " (supported versions: " + std::to_string(kWeightFormatVersion) + ")",
                      version_offset);

  WeightStore store;
  const auto meta_len = r.read<std::uint32_t>("metadata length");
  const std::uint8_t* meta = r.take(meta_len, "metadata");
  store.metadata() = parse_metadata(std::string(reinterpret_cast<const char*>(meta), meta_len));

  const auto count = r.read<std::uint32_t>("tensor count");
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::size_t tensor_offset = r.offset();
    const auto name_len = r.read<std::uint16_t>("tensor name length");
    const std::uint8_t* name_bytes = r.take(name_len, "tensor name");
    std::string name(reinterpret_cast<const char*>(name_bytes), name_len);

    const std::size_t dtype_offset = r.offset();
    const auto dtype = r.read<std::uint8_t>("dtype");
    if (dtype != kDtypeF32)
      throw FormatError("tensor " + name + ": unsupported dtype " + std::to_string(dtype), dtype_offset);
    const auto rank = r.read<std::uint8_t>("rank");

    WeightTensor tensor;
    tensor.shape.resize(rank);
    for (auto& d : tensor.shape) d = r.read<std::uint32_t>("dimension");

    std::size_t elements = 1;
    for (auto d : tensor.shape) {
      if (d != 0 && elements > r.remaining() / d)
        throw FormatError("tensor " + name + ": shape exceeds file size", tensor_offset);
      elements *= d;
    }
    const std::size_t data_offset = r.offset();
    const std::size_t nbytes = elements * sizeof(float);
    const std::uint8_t* data = r.take(nbytes, "tensor data");
    const auto stored_crc = r.read<std::uint32_t>("tensor checksum");
    if (crc32(data, nbytes) != stored_crc)
      throw FormatError("tensor " + name + ": checksum mismatch", data_offset);

    tensor.data.resize(elements);
    std::memcpy(tensor.data.data(), data, nbytes);
    if (store.contains(name)) throw FormatError("duplicate tensor name " + name, tensor_offset);
    store.add(std::move(name), std::move(tensor));
  }

  const std::size_t trailer_offset = r.offset();
  const auto file_crc = r.read<std::uint32_t>("file checksum");
  if (crc32(bytes.data(), trailer_offset) != file_crc) throw FormatError("file checksum mismatch", trailer_offset);
  if (r.remaining() != 0) throw FormatError("trailing bytes after file checksum", r.offset());
  return store;
}

WeightStore load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weight file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return parse_weights(bytes);
}

std::vector<std::uint8_t> serialize_weights(const WeightStore& store) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put<std::uint32_t>(out, kWeightFormatVersion);
  const std::string meta = format_metadata(store.metadata());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(store.tensors().size()));
  for (const auto& [name, tensor] : store.tensors()) {
    if (name.size() > 0xFFFF) throw InvalidArgument("tensor name too long: " + name);
    if (tensor.shape.size() > 0xFF) throw InvalidArgument("tensor rank too large: " + name);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put<std::uint8_t>(out, kDtypeF32);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(tensor.shape.size()));
    for (auto d : tensor.shape) put<std::uint32_t>(out, d);
    const auto* data = reinterpret_cast<const std::uint8_t*>(tensor.data.data());
    const std::size_t nbytes = tensor.data.size() * sizeof(float);
    out.insert(out.end(), data, data + nbytes);
    put<std::uint32_t>(out, crc32(data, nbytes));
  }
  put<std::uint32_t>(out, crc32(out.data(), out.size()));
  return out;
}

void save_weights(const WeightStore& store, const std::filesystem::path& path) {
  const auto bytes = serialize_weights(store);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ust
