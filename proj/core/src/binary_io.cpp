#include "adaptcs/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "adaptcs/errors.hpp"

namespace adaptcs {
namespace io {
namespace {

template <typename T>
void write_le(std::ostream& out, T v) {
  unsigned char buf[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), sizeof buf);
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) {
    throw ParseError("binary stream", 0, "unexpected end of data");
  }
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
  return v;
}

// Guards against absurd sizes from corrupt headers before allocating.
void check_count(std::uint64_t count, std::uint64_t limit, const char* what) {
  if (count > limit) throw ParseError("binary stream", 0, std::string("implausible ") + what);
}

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v); }
void write_f64(std::ostream& out, double v) { write_le(out, std::bit_cast<std::uint64_t>(v)); }

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_dense(std::ostream& out, const DenseMatrix& m) {
  write_u64(out, m.rows());
  write_u64(out, m.cols());
  for (double v : m.values()) write_f64(out, v);
}

void write_sparse(std::ostream& out, const SparseMatrix& m) {
  write_u64(out, m.rows());
  write_u64(out, m.cols());
  write_u64(out, m.nnz());
  for (std::size_t o : m.row_offsets()) write_u64(out, o);
  for (Index c : m.col_indices()) write_u32(out, c);
  for (double v : m.values()) write_f64(out, v);
}

std::uint32_t read_u32(std::istream& in) { return read_le<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return read_le<std::uint64_t>(in); }
double read_f64(std::istream& in) { return std::bit_cast<double>(read_le<std::uint64_t>(in)); }

std::string read_string(std::istream& in) {
  const std::uint64_t n = read_u64(in);
  check_count(n, 1ULL << 32, "string length");
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw ParseError("binary stream", 0, "unexpected end of data");
  }
  return s;
}

DenseMatrix read_dense(std::istream& in) {
  const std::uint64_t rows = read_u64(in);
  const std::uint64_t cols = read_u64(in);
  check_count(rows, 1ULL << 32, "row count");
  check_count(cols, 1ULL << 32, "column count");
  check_count(rows * cols, 1ULL << 34, "matrix size");
  std::vector<double> vals(rows * cols);
  for (double& v : vals) v = read_f64(in);
  return DenseMatrix(rows, cols, std::move(vals));
}

SparseMatrix read_sparse(std::istream& in) {
  const std::uint64_t rows = read_u64(in);
  const std::uint64_t cols = read_u64(in);
  const std::uint64_t nnz = read_u64(in);
  check_count(rows, 1ULL << 32, "row count");
  check_count(cols, 1ULL << 32, "column count");
  check_count(nnz, 1ULL << 36, "nnz");
  std::vector<std::size_t> offsets(rows + 1);
  for (auto& o : offsets) o = read_u64(in);
  std::vector<Index> idx(nnz);
  for (auto& c : idx) c = read_u32(in);
  std::vector<double> vals(nnz);
  for (auto& v : vals) v = read_f64(in);
  try {
    return SparseMatrix(rows, cols, std::move(offsets), std::move(idx), std::move(vals));
  } catch (const InvalidInput& e) {
    throw ParseError("binary stream", 0, std::string("corrupt CSR block: ") + e.what());
  }
}

void expect_magic(std::istream& in, const char (&magic)[5], const std::string& what) {
  char buf[4] = {};
  if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw ParseError(what, 0, std::string("missing magic '") + magic + "'");
  }
}

}  // namespace io

void save_hop_cache(const std::filesystem::path& path, const std::vector<SparseMatrix>& operators,
                    std::uint64_t graph_hash, int k_max, MaskMode mode) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write("AHOP", 4);
  io::write_u32(out, kHopCacheVersion);
  io::write_u64(out, graph_hash);
  io::write_u32(out, static_cast<std::uint32_t>(k_max));
  io::write_u32(out, mode == MaskMode::hard ? 0U : 1U);
  io::write_u32(out, static_cast<std::uint32_t>(operators.size()));
  for (const auto& op : operators) io::write_sparse(out, op);
  if (!out) throw ValidationError("failed writing " + path.string());
}

std::optional<std::vector<SparseMatrix>> load_hop_cache(const std::filesystem::path& path,
                                                        std::uint64_t graph_hash, int k_max,
                                                        MaskMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  io::expect_magic(in, "AHOP", path.string());
  const std::uint32_t version = io::read_u32(in);
  if (version != kHopCacheVersion) {
    throw ParseError(path.string(), 0, "unsupported AHOP version " + std::to_string(version));
  }
  if (io::read_u64(in) != graph_hash) return std::nullopt;
  if (io::read_u32(in) != static_cast<std::uint32_t>(k_max)) return std::nullopt;
  if (io::read_u32(in) != (mode == MaskMode::hard ? 0U : 1U)) return std::nullopt;
  const std::uint32_t count = io::read_u32(in);
  if (count != static_cast<std::uint32_t>(k_max) + 1) {
    throw ParseError(path.string(), 0, "operator count does not match K");
  }
  std::vector<SparseMatrix> ops;
  for (std::uint32_t i = 0; i < count; ++i) ops.push_back(io::read_sparse(in));
  return ops;
}

void save_svd_cache(const std::filesystem::path& path, const SvdFactors& f,
                    std::uint64_t graph_hash, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write("ASVD", 4);
  io::write_u32(out, kSvdCacheVersion);
  io::write_u32(out, static_cast<std::uint32_t>(f.rank()));
  io::write_u64(out, graph_hash);
  io::write_u64(out, seed);
  io::write_u64(out, f.u.rows());
  io::write_u64(out, f.v.rows());
  for (double s : f.sigma) io::write_f64(out, s);
  for (double v : f.u.values()) io::write_f64(out, v);
  for (double v : f.v.values()) io::write_f64(out, v);
  if (!out) throw ValidationError("failed writing " + path.string());
}

std::optional<SvdFactors> load_svd_cache(const std::filesystem::path& path,
                                         std::uint64_t graph_hash, std::size_t r,
                                         std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  io::expect_magic(in, "ASVD", path.string());
  const std::uint32_t version = io::read_u32(in);
  if (version != kSvdCacheVersion) {
    throw ParseError(path.string(), 0, "unsupported ASVD version " + std::to_string(version));
  }
  if (io::read_u32(in) != r) return std::nullopt;
  if (io::read_u64(in) != graph_hash) return std::nullopt;
  if (io::read_u64(in) != seed) return std::nullopt;
  const std::uint64_t rows = io::read_u64(in);
  const std::uint64_t cols = io::read_u64(in);
  if (rows > (1ULL << 32) || cols > (1ULL << 32)) throw ParseError(path.string(), 0, "implausible shape");
  SvdFactors f;
  f.sigma.resize(r);
  for (double& s : f.sigma) s = io::read_f64(in);
  f.u = DenseMatrix(rows, r);
  for (double& v : f.u.values()) v = io::read_f64(in);
  f.v = DenseMatrix(cols, r);
  for (double& v : f.v.values()) v = io::read_f64(in);
  return f;
}

}  // namespace adaptcs
