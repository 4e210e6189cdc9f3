#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qboost/common.hpp"

namespace qboost {

enum class WeightKind { distribution, subnormalized };

inline constexpr double kWeightTolerance = 1e-12;

// Nonnegative weights over a training set. A distribution sums to one; a
// sub-normalized vector sums to at most one.
class WeightVector {
 public:
  WeightVector() = default;

  WeightVector(std::vector<double> w, WeightKind kind) : w_(std::move(w)), kind_(kind) {
    validate();
  }

  static WeightVector uniform(std::size_t m) {
    detail::require(m > 0, "uniform weights need at least one entry");
    return WeightVector(std::vector<double>(m, 1.0 / static_cast<double>(m)),
                        WeightKind::distribution);
  }

  // Normalizes arbitrary nonnegative weights into a distribution.
  static WeightVector normalize(std::span<const double> w) {
    const double s = detail::compensated_sum(w);
    if (!(s > 0.0) || !std::isfinite(s)) throw DegenerateError("cannot normalize weights with sum " + std::to_string(s));
    std::vector<double> out(w.begin(), w.end());
    for (double& x : out) x /= s;
    return WeightVector(std::move(out), WeightKind::distribution);
  }

  std::size_t size() const { return w_.size(); }
  bool empty() const { return w_.empty(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const { return w_; }
  WeightKind kind() const { return kind_; }

  double sum() const { return detail::compensated_sum(w_); }

  WeightVector normalized() const { return normalize(w_); }

  // Same weights, relabelled as sub-normalized (always valid for a distribution).
  WeightVector as_subnormalized() const { return WeightVector(w_, WeightKind::subnormalized); }

 private:
  void validate() const {
    for (double x : w_) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidArgument("weights must be finite and nonnegative");
    }
    const double s = sum();
    if (kind_ == WeightKind::distribution && std::abs(s - 1.0) > kWeightTolerance) {
      throw InvalidArgument("distribution weights sum to " + std::to_string(s));
    }
    if (kind_ == WeightKind::subnormalized && s > 1.0 + kWeightTolerance) {
      throw InvalidArgument("sub-normalized weights sum to " + std::to_string(s) + " > 1");
    }
  }

  std::vector<double> w_;
  WeightKind kind_ = WeightKind::distribution;
};

}  // namespace qboost
