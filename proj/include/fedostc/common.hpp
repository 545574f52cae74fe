#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fedostc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using AdjMat = Eigen::MatrixXi;

/// Error codes for every failure mode the library reports.
enum class Errc {
  non_square,
  non_binary_entry,
  negative_distance,
  asymmetric_input,
  shape_mismatch,
  wrong_length,
  length_mismatch,
  cache_mismatch,
  zero_epsilon,
  empty_neighbor_set,
  out_of_range_input,
  layout_mismatch,
  missing_client_state,
  buffer_corruption,
  nonfinite_gradient,
  data_exhausted,
  warmup_too_small,
  misalignment,
  ragged_rows,
  empty_file,
  all_missing_column,
  too_short,
  empty_input,
  bad_config,
  tolerance_exceeded,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

/// Derives an independent seed for a named random stream of a run.
uint64_t mix_seed(uint64_t base, uint64_t stream);

/// Deterministic uniform double generator. Draws are canonical 53-bit
/// doubles so sequences do not depend on the standard library's
/// distribution implementation.
class UniformRng {
 public:
  explicit UniformRng(uint64_t seed);

  /// Uniform draw from [0, 1).
  double next();
  /// Uniform draw from [lo, hi).
  double range(double lo, double hi);
  /// Uniform integer from [0, n).
  uint64_t below(uint64_t n);

 private:
  uint64_t state_;
};

}  // namespace fedostc
