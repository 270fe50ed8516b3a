#include "bkuq/kernel_cache.hpp"

#include "bkuq/common.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace bkuq {

namespace {

constexpr char kMagic[8] = {'B', 'K', 'U', 'Q', 'K', 'R', 'N', '1'};
constexpr std::size_t kHeaderBytes = 8 + 4 + 8 + 8 + 8;

template <class T> void put_le(std::vector<unsigned char>& buf, T v) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t b = 0; b < sizeof(T); ++b) buf.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xff));
}

template <class T> T get_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) v |= static_cast<T>(p[b]) << (8 * b);
  return v;
}

} // namespace

std::filesystem::path cache_file(const std::filesystem::path& dir, std::uint64_t grid_hash,
                                 std::uint64_t model_hash, int order) {
  char name[96];
  std::snprintf(name, sizeof name, "%016llx_%016llx_k%d.bkq", static_cast<unsigned long long>(grid_hash),
                static_cast<unsigned long long>(model_hash), order);
  return dir / name;
}

void write_kernel_cache(const std::filesystem::path& file, std::uint64_t grid_hash, std::uint64_t model_hash,
                        const Eigen::MatrixXd& K) {
  if (K.rows() != K.cols()) throw CacheError("kernel cache: matrix must be square");
  const std::uint64_t n = static_cast<std::uint64_t>(K.rows());
  std::vector<unsigned char> buf;
  buf.reserve(kHeaderBytes + n * n * 8);
  buf.insert(buf.end(), kMagic, kMagic + 8);
  put_le<std::uint32_t>(buf, kCacheVersion);
  put_le<std::uint64_t>(buf, grid_hash);
  put_le<std::uint64_t>(buf, model_hash);
  put_le<std::uint64_t>(buf, n);
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < n; ++j)
      put_le<std::uint64_t>(buf, std::bit_cast<std::uint64_t>(K(static_cast<Eigen::Index>(i),
                                                                  static_cast<Eigen::Index>(j))));
  const auto tmp = std::filesystem::path(file.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CacheError("kernel cache: cannot write " + tmp.string());
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!os) throw CacheError("kernel cache: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

CacheHeader read_cache_header(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw CacheError("kernel cache: cannot open " + file.string());
  unsigned char h[kHeaderBytes];
  is.read(reinterpret_cast<char*>(h), kHeaderBytes);
  if (is.gcount() != static_cast<std::streamsize>(kHeaderBytes))
    throw CacheError("kernel cache: corrupt header (file too short) in " + file.string());
  if (std::memcmp(h, kMagic, 8) != 0) throw CacheError("kernel cache: bad magic bytes in " + file.string());
  CacheHeader hd;
  hd.version = get_le<std::uint32_t>(h + 8);
  hd.grid_hash = get_le<std::uint64_t>(h + 12);
  hd.model_hash = get_le<std::uint64_t>(h + 20);
  hd.nodes = get_le<std::uint64_t>(h + 28);
  if (hd.version != kCacheVersion) throw CacheError("kernel cache: unsupported format version in " + file.string());
  const auto expect = kHeaderBytes + hd.nodes * hd.nodes * 8;
  if (hd.nodes == 0 || std::filesystem::file_size(file) != expect)
    throw CacheError("kernel cache: corrupt file (length does not match node count) " + file.string());
  return hd;
}

std::optional<Eigen::MatrixXd> read_kernel_cache(const std::filesystem::path& file, std::uint64_t grid_hash,
                                                 std::uint64_t model_hash) {
  const CacheHeader hd = read_cache_header(file);
  if (hd.grid_hash != grid_hash || hd.model_hash != model_hash) return std::nullopt;
  std::ifstream is(file, std::ios::binary);
  is.seekg(static_cast<std::streamoff>(kHeaderBytes));
  const std::uint64_t n = hd.nodes;
  std::vector<unsigned char> data(n * n * 8);
  is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (is.gcount() != static_cast<std::streamsize>(data.size()))
    throw CacheError("kernel cache: truncated payload in " + file.string());
  Eigen::MatrixXd K(n, n);
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < n; ++j)
      K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::bit_cast<double>(get_le<std::uint64_t>(data.data() + (i * n + j) * 8));
  return K;
}

} // namespace bkuq
