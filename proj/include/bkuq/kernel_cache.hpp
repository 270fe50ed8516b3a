#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>

namespace bkuq {

// Binary kernel-matrix cache:
//   8 bytes  magic "BKUQKRN1"
//   u32      format version
//   u64      grid-descriptor hash
//   u64      model-descriptor hash
//   u64      node count N
//   N*N f64  row-major, little-endian
inline constexpr std::uint32_t kCacheVersion = 1;

std::filesystem::path cache_file(const std::filesystem::path& dir, std::uint64_t grid_hash,
                                 std::uint64_t model_hash, int order);

void write_kernel_cache(const std::filesystem::path& file, std::uint64_t grid_hash, std::uint64_t model_hash,
                        const Eigen::MatrixXd& K);

// Returns nullopt when the hashes differ from the expected ones; throws
// CacheError on a corrupt or truncated file.
std::optional<Eigen::MatrixXd> read_kernel_cache(const std::filesystem::path& file, std::uint64_t grid_hash,
                                                 std::uint64_t model_hash);

struct CacheHeader {
  std::uint32_t version = 0;
  std::uint64_t grid_hash = 0;
  std::uint64_t model_hash = 0;
  std::uint64_t nodes = 0;
};

// Reads and validates only the header (including the expected file length).
CacheHeader read_cache_header(const std::filesystem::path& file);

} // namespace bkuq
