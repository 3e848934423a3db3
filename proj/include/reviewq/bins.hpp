#pragma once

#include <string>

namespace reviewq {

/// Tercile cut points for one numeric factor. Values equal to a cut fall
/// into the lower bin.
struct CutPair {
  double lower_cut = 0.0;
  double upper_cut = 0.0;

  bool operator==(const CutPair &) const = default;
};

inline constexpr const char *kNearestRankTercile = "nearest-rank-tercile";

struct BinThresholds {
  CutPair age_minutes;
  CutPair size_lines;
  CutPair revision_count;
  std::string method = kNearestRankTercile;

  bool operator==(const BinThresholds &) const = default;
};

} // namespace reviewq
