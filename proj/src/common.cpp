#include "fedostc/common.hpp"

namespace fedostc {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::non_square: return "NonSquare";
    case Errc::non_binary_entry: return "NonBinaryEntry";
    case Errc::negative_distance: return "NegativeDistance";
    case Errc::asymmetric_input: return "AsymmetricInput";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::wrong_length: return "WrongLength";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::cache_mismatch: return "CacheMismatch";
    case Errc::zero_epsilon: return "ZeroEpsilon";
    case Errc::empty_neighbor_set: return "EmptyNeighborSet";
    case Errc::out_of_range_input: return "OutOfRangeInput";
    case Errc::layout_mismatch: return "LayoutMismatch";
    case Errc::missing_client_state: return "MissingClientState";
    case Errc::buffer_corruption: return "BufferCorruption";
    case Errc::nonfinite_gradient: return "NonfiniteGradient";
    case Errc::data_exhausted: return "DataExhausted";
    case Errc::warmup_too_small: return "WarmupTooSmall";
    case Errc::misalignment: return "Misalignment";
    case Errc::ragged_rows: return "RaggedRows";
    case Errc::empty_file: return "EmptyFile";
    case Errc::all_missing_column: return "AllMissingColumn";
    case Errc::too_short: return "TooShort";
    case Errc::empty_input: return "Empty";
    case Errc::bad_config: return "BadConfig";
    case Errc::tolerance_exceeded: return "ToleranceExceeded";
  }
  return "UnknownError";
}

namespace {

// splitmix64; full 64-bit period, passes BigCrush when used as a stream.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

uint64_t mix_seed(uint64_t base, uint64_t stream) {
  uint64_t s = base ^ (0xd1b54a32d192ed03ULL * (stream + 1));
  uint64_t a = splitmix64(s);
  uint64_t b = splitmix64(s);
  return a ^ (b << 1);
}

UniformRng::UniformRng(uint64_t seed) : state_(seed) {
  // Warm the state so nearby seeds diverge immediately.
  splitmix64(state_);
}

double UniformRng::next() {
  return static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
}

double UniformRng::range(double lo, double hi) { return lo + (hi - lo) * next(); }

uint64_t UniformRng::below(uint64_t n) {
  if (n == 0) return 0;
  auto v = static_cast<uint64_t>(next() * static_cast<double>(n));
  return v >= n ? n - 1 : v;
}

}  // namespace fedostc
