#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace qboost {

// Labels are always -1 or +1.
using Label = int;

inline constexpr double kPi = std::numbers::pi;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// alpha_from_eps at eps in {0, 1}.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class WeakLearningViolation : public Error {
 public:
  WeakLearningViolation(int round, double eps)
      : Error("weak-learning violation at round " + std::to_string(round) +
              ": weighted error " + std::to_string(eps) + " >= 1/2"),
        round_(round),
        eps_(eps) {}

  int round() const { return round_; }
  double eps() const { return eps_; }

 private:
  int round_;
  double eps_;
};

class LearnerFailure : public Error {
 public:
  using Error::Error;
};

class AmplificationFailure : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Every random operation takes an explicit 64-bit engine (std::mt19937_64 in
// practice). Bit-reproducibility relies on not going through the
// implementation-defined std:: distributions.
template <class G>
concept Rng64 = std::uniform_random_bit_generator<std::remove_reference_t<G>> &&
                (std::remove_reference_t<G>::min() == 0) &&
                (std::remove_reference_t<G>::max() == std::numeric_limits<std::uint64_t>::max());

using DefaultRng = std::mt19937_64;

namespace detail {

// Uniform double in [0, 1) with 53 random bits.
template <Rng64 G>
double uniform01(G& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) by rejection; n > 0.
template <Rng64 G>
std::uint64_t uniform_below(G& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return r % n;
}

template <Rng64 G>
bool bernoulli(G& rng, double p) {
  return uniform01(rng) < p;
}

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

inline void require(bool cond, const std::string& message) {
  if (!cond) throw InvalidArgument(message);
}

}  // namespace detail
}  // namespace qboost
