#include "bcfuse/cutoffs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bcfuse {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::vector<double> expand_cutoffs(const std::vector<double>& raw) {
  for (double r : raw) {
    if (!std::isfinite(r)) throw std::invalid_argument("expand_cutoffs: raw increments must be finite");
  }
  std::vector<double> out(raw.size() + 3);
  out[0] = -kInf;
  out[1] = 0.0;
  for (std::size_t j = 0; j < raw.size(); ++j) out[j + 2] = out[j + 1] + std::exp(raw[j]);
  out.back() = kInf;
  return out;
}

std::vector<double> contract_cutoffs(const std::vector<double>& expanded) {
  if (expanded.size() < 3) throw std::invalid_argument("contract_cutoffs: need at least 3 entries");
  if (!(expanded.front() == -kInf && expanded.back() == kInf)) {
    throw std::invalid_argument("contract_cutoffs: endpoints must be -inf/+inf");
  }
  if (expanded[1] != 0.0) throw std::invalid_argument("contract_cutoffs: first finite cutoff must be 0");
  std::vector<double> raw(expanded.size() - 3);
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double inc = expanded[j + 2] - expanded[j + 1];
    if (!(inc > 0.0)) throw std::invalid_argument("contract_cutoffs: cutoffs must be strictly increasing");
    raw[j] = std::log(inc);
  }
  return raw;
}

CutoffVector CutoffVector::from_raw(std::vector<double> raw) {
  CutoffVector cv;
  cv.expanded_ = expand_cutoffs(raw);
  cv.raw_ = std::move(raw);
  return cv;
}

CutoffVector CutoffVector::from_expanded(const std::vector<double>& expanded) {
  CutoffVector cv;
  cv.raw_ = contract_cutoffs(expanded);
  cv.expanded_ = expanded;
  return cv;
}

} // namespace bcfuse
