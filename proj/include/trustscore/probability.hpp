#pragma once

#include <algorithm>
#include <span>

#include "common.hpp"

namespace trust {

// Binary class distribution; p_untrustworthy is derived so the two always
// sum to one.
class ProbEstimate {
 public:
  constexpr ProbEstimate() = default;
  explicit ProbEstimate(double p_trust) : p_(std::clamp(p_trust, 0.0, 1.0)) {}

  double p_trustworthy() const { return p_; }
  double p_untrustworthy() const { return 1.0 - p_; }

  bool operator==(const ProbEstimate&) const = default;

 private:
  double p_ = 0.5;
};

inline double accuracy(std::span<const Label> predictions, std::span<const Label> truth) {
  if (predictions.size() != truth.size())
    throw invalid_argument("accuracy: prediction and truth lengths differ");
  if (predictions.empty()) throw invalid_argument("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

}  // namespace trust
