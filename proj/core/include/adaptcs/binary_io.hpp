#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "adaptcs/dense_matrix.hpp"
#include "adaptcs/hop_channels.hpp"
#include "adaptcs/sparse_matrix.hpp"
#include "adaptcs/svd.hpp"

namespace adaptcs {

/// Little-endian primitives. Readers throw ParseError on truncated input.
namespace io {

void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_string(std::ostream& out, const std::string& s);
void write_dense(std::ostream& out, const DenseMatrix& m);
void write_sparse(std::ostream& out, const SparseMatrix& m);

std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in);
DenseMatrix read_dense(std::istream& in);
SparseMatrix read_sparse(std::istream& in);

/// Reads 4 bytes and throws ParseError unless they equal magic.
void expect_magic(std::istream& in, const char (&magic)[5], const std::string& what);

}  // namespace io

inline constexpr std::uint32_t kHopCacheVersion = 1;
inline constexpr std::uint32_t kSvdCacheVersion = 1;

/// "AHOP" | version u32 | graph hash u64 | K u32 | mode u32 | count u32 | count CSR blocks.
/// Each CSR block: rows u64, cols u64, nnz u64, offsets u64[rows+1], cols u32[nnz],
/// values f64[nnz].
void save_hop_cache(const std::filesystem::path& path, const std::vector<SparseMatrix>& operators,
                    std::uint64_t graph_hash, int k_max, MaskMode mode);
/// nullopt when the file is missing or was written for a different key.
std::optional<std::vector<SparseMatrix>> load_hop_cache(const std::filesystem::path& path,
                                                        std::uint64_t graph_hash, int k_max,
                                                        MaskMode mode);

/// "ASVD" | version u32 | r u32 | graph hash u64 | seed u64 | rows u64 | cols u64 |
/// sigma f64[r] | u f64[rows*r] | v f64[cols*r], matrices row-major.
void save_svd_cache(const std::filesystem::path& path, const SvdFactors& f,
                    std::uint64_t graph_hash, std::uint64_t seed);
std::optional<SvdFactors> load_svd_cache(const std::filesystem::path& path,
                                         std::uint64_t graph_hash, std::size_t r,
                                         std::uint64_t seed);

}  // namespace adaptcs
