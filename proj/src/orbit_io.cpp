#include "joinlab/orbit_io.hpp"

#include <cstring>
#include <fstream>

namespace joinlab {

namespace {

constexpr char kMagic[4] = {'J', 'L', 'A', 'B'};
constexpr uint16_t kVersion = 1;

struct Writer {
  std::vector<uint8_t> buf;
  void raw(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    buf.insert(buf.end(), b, b + n);
  }
  template <class T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    raw(&v, sizeof(T));
  }
};

struct Reader {
  const std::vector<uint8_t>& buf;
  size_t pos = 0;
  void raw(void* p, size_t n) {
    if (pos + n > buf.size()) throw CacheError("truncated dataset cache");
    std::memcpy(p, buf.data() + pos, n);
    pos += n;
  }
  template <class T>
  T get() {
    T v;
    raw(&v, sizeof(T));
    return v;
  }
};

}  // namespace

std::vector<uint8_t> serialize_dataset(const OrbitDataset& data) {
  Writer w;
  w.raw(kMagic, 4);
  w.put<uint16_t>(kVersion);
  const int k = data.k();
  const size_t n = data.size();
  w.put<uint16_t>(static_cast<uint16_t>(k));
  w.put<uint16_t>(static_cast<uint16_t>(data.rep.rank));
  w.put<uint16_t>(static_cast<uint16_t>(data.max_word_length));
  w.put<double>(data.t_cap);
  w.put<uint64_t>(n);
  for (int i = 0; i < k; ++i)
    w.put<uint8_t>(static_cast<uint8_t>(data.rep.factors[i].kind));
  w.put<uint8_t>(data.bits_per_letter);

  for (int i = 0; i < k; ++i) w.raw(data.mu[i].data(), n * sizeof(double));
  w.raw(data.norm.data(), n * sizeof(double));
  w.raw(data.lox.data(), n);
  for (int i = 0; i < k; ++i) {
    const int dim = boundary_dim(data.rep.factors[i].kind);
    for (size_t j = 0; j < n; ++j)
      w.raw(data.xi[i][j].data(), dim * sizeof(double));
  }
  for (size_t j = 0; j < n; ++j) {
    w.put<uint8_t>(data.word_length[j]);
    const size_t bytes =
        (static_cast<size_t>(data.word_length[j]) * data.bits_per_letter + 7) / 8;
    w.raw(data.word_blob.data() + data.word_offset[j], bytes);
  }
  return std::move(w.buf);
}

OrbitDataset deserialize_dataset(const std::vector<uint8_t>& bytes,
                                 const RepresentationSpec& rep) {
  Reader r{bytes};
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw CacheError("bad magic bytes");
  if (r.get<uint16_t>() != kVersion) throw CacheError("unsupported cache version");
  const int k = r.get<uint16_t>();
  const int rank = r.get<uint16_t>();
  if (k != rep.k() || rank != rep.rank)
    throw CacheError("cache header does not match the representation");
  OrbitDataset ds;
  ds.rep = rep;
  ds.max_word_length = r.get<uint16_t>();
  ds.t_cap = r.get<double>();
  const size_t n = r.get<uint64_t>();
  for (int i = 0; i < k; ++i) {
    const auto kind = static_cast<FactorKind>(r.get<uint8_t>());
    if (kind != rep.factors[i].kind)
      throw CacheError("cache factor kind does not match the representation");
  }
  ds.bits_per_letter = r.get<uint8_t>();

  ds.mu.assign(k, std::vector<double>(n));
  for (int i = 0; i < k; ++i) r.raw(ds.mu[i].data(), n * sizeof(double));
  ds.norm.resize(n);
  r.raw(ds.norm.data(), n * sizeof(double));
  ds.lox.resize(n);
  r.raw(ds.lox.data(), n);
  ds.xi.assign(k, std::vector<Eigen::Vector3d>(n, Eigen::Vector3d::Zero()));
  for (int i = 0; i < k; ++i) {
    const int dim = boundary_dim(rep.factors[i].kind);
    for (size_t j = 0; j < n; ++j) r.raw(ds.xi[i][j].data(), dim * sizeof(double));
  }
  ds.word_length.resize(n);
  ds.word_offset.resize(n);
  for (size_t j = 0; j < n; ++j) {
    ds.word_length[j] = r.get<uint8_t>();
    const size_t bytes =
        (static_cast<size_t>(ds.word_length[j]) * ds.bits_per_letter + 7) / 8;
    ds.word_offset[j] = static_cast<uint32_t>(ds.word_blob.size());
    const size_t off = ds.word_blob.size();
    ds.word_blob.resize(off + bytes);
    r.raw(ds.word_blob.data() + off, bytes);
  }
  if (r.pos != bytes.size()) throw CacheError("trailing bytes in dataset cache");
  return ds;
}

void save_dataset(const std::string& path, const OrbitDataset& data) {
  const auto bytes = serialize_dataset(data);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CacheError("cannot open cache file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CacheError("short write on cache file: " + path);
}

OrbitDataset load_dataset(const std::string& path, const RepresentationSpec& rep) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw CacheError("cannot open cache file: " + path);
  const auto size = static_cast<size_t>(in.tellg());
  in.seekg(0);
  std::vector<uint8_t> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw CacheError("short read on cache file: " + path);
  return deserialize_dataset(bytes, rep);
}

std::string dataset_fingerprint(const OrbitDataset& data) {
  const auto bytes = serialize_dataset(data);
  const uint64_t h = fnv1a(bytes.data(), bytes.size());
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return std::string(hex);
}

}  // namespace joinlab
