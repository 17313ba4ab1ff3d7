#pragma once

#include <vector>

namespace bcfuse {

// Ordered thresholds partitioning the latent normal scale into L categories,
// stored together with their unconstrained log-increment parameterization.
//
// expanded() has L+1 entries: [-inf, 0, t2, ..., t_{L-1}, +inf] with the
// first finite cutoff pinned at 0 for identifiability. raw() has L-2 entries;
// expanded[y] = expanded[y-1] + exp(raw[y-2]) for y = 2..L-1.
class CutoffVector {
 public:
  CutoffVector() = default;

  static CutoffVector from_raw(std::vector<double> raw);
  static CutoffVector from_expanded(const std::vector<double>& expanded);

  const std::vector<double>& raw() const { return raw_; }
  const std::vector<double>& expanded() const { return expanded_; }

  int categories() const { return static_cast<int>(expanded_.size()) - 1; }

  // boundaries of the cell for 1-based category y
  double lower(int y) const { return expanded_[y - 1]; }
  double upper(int y) const { return expanded_[y]; }

 private:
  std::vector<double> raw_;
  std::vector<double> expanded_;
};

// raw log-increments -> full cutoff vector (length = raw.size() + 3)
std::vector<double> expand_cutoffs(const std::vector<double>& raw);

// inverse of expand_cutoffs; expects [-inf, 0, ..., +inf], strictly increasing
std::vector<double> contract_cutoffs(const std::vector<double>& expanded);

} // namespace bcfuse
