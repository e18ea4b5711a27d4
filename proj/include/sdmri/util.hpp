#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdmri {

/// Numeric failure in a solver or factorization. CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input (mesh file, config, persisted container). Exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failure. Exit code 4.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Sha256 = std::array<std::uint8_t, 32>;

Sha256 sha256_bytes(std::span<const std::uint8_t> data);
Sha256 sha256_string(const std::string& text);
Sha256 sha256_file(const std::string& path);
std::string to_hex(const Sha256& digest);

/// Deterministic pairwise-tree summation. The reduction tree depends only on
/// the element count, so the result is independent of thread count.
double pairwise_sum(std::span<const double> values);

/// Serial reference for pairwise_sum: plain left-to-right accumulation.
/// Kept for tests and benchmarks; not bit-compatible with pairwise_sum.
double sequential_sum(std::span<const double> values);

/// Runs fn(i) for i in [0, n) over OpenMP threads. Each index writes only its
/// own outputs, so results do not depend on the schedule. threads == 0 keeps
/// the runtime default.
void parallel_for_index(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_g17(double v);

/// Atomically replaces `path` with `content` (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace sdmri
