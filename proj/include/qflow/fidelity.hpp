#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "qflow/error.hpp"

namespace qflow {

// Fidelity of a Werner state with respect to the target Bell pair, in (0.5, 1].
class FidelityTarget {
 public:
  explicit FidelityTarget(double f) : f_(f) {
    if (!(f > 0.5 && f <= 1.0)) {
      throw InputError("fidelity " + std::to_string(f) + " outside (0.5, 1]");
    }
  }
  double value() const { return f_; }

 private:
  double f_;
};

// Werner mixing weight w with F = (1 + 3w) / 4; restricted to (1/3, 1] so
// the corresponding fidelity exceeds 0.5.
class WernerParameter {
 public:
  explicit WernerParameter(double w) : w_(w) {
    if (!(w > 1.0 / 3.0 && w <= 1.0)) {
      throw InputError("Werner parameter " + std::to_string(w) + " outside (1/3, 1]");
    }
  }
  double value() const { return w_; }

 private:
  double w_;
};

inline WernerParameter fidelity_to_werner(FidelityTarget f) {
  return WernerParameter((4.0 * f.value() - 1.0) / 3.0);
}

inline double werner_to_fidelity(double w) { return (1.0 + 3.0 * w) / 4.0; }

// Noise-free swap of two Werner pairs: the weights multiply. The product may
// drop below 1/3, so it is returned as a plain weight.
inline double swap_compose(double w1, double w2) { return w1 * w2; }

// Fidelity of a pair delivered over `path_len` elementary links joined by
// path_len - 1 swaps: (1 + 3 w^len) / 4.
inline double end_to_end_fidelity(WernerParameter w, std::size_t path_len) {
  if (path_len == 0) throw InputError("path length must be at least 1");
  return werner_to_fidelity(std::pow(w.value(), static_cast<double>(path_len)));
}

inline constexpr std::size_t kUnboundedLength = std::numeric_limits<std::size_t>::max();

// Longest path whose end-to-end fidelity still reaches `target` when every
// link has fidelity `elementary`: floor(log w_target / log w_elem).
// Returns 0 when not even one link suffices (target above elementary) and
// kUnboundedLength when elementary pairs are perfect. Log ratios within 1e-9
// of an integer are snapped to it before flooring.
inline std::size_t length_bound(FidelityTarget target, FidelityTarget elementary) {
  const double wt = (4.0 * target.value() - 1.0) / 3.0;
  const double we = (4.0 * elementary.value() - 1.0) / 3.0;
  if (we >= 1.0) return kUnboundedLength;
  if (target.value() > elementary.value()) return 0;
  const double ratio = std::log(wt) / std::log(we);
  const double nearest = std::round(ratio);
  const double snapped = std::abs(ratio - nearest) <= 1e-9 ? nearest : std::floor(ratio);
  if (snapped < 0) return 0;
  return static_cast<std::size_t>(snapped);
}

}  // namespace qflow
