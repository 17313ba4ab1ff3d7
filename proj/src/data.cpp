#include "bcfuse/data.hpp"

#include <cmath>
#include <stdexcept>

namespace bcfuse {

int Dataset::n_images() const {
  int n = 0;
  for (const auto& s : sequences) n += static_cast<int>(s.images.size());
  return n;
}

int Dataset::n_annotations() const {
  int n = 0;
  for (const auto& s : sequences)
    for (const auto& im : s.images)
      if (im.annotation) ++n;
  return n;
}

int Dataset::n_confidences() const {
  int n = 0;
  for (const auto& s : sequences)
    for (const auto& im : s.images)
      if (im.confidence) ++n;
  return n;
}

void Dataset::validate(double simplex_tol) const {
  if (L < 2) throw std::runtime_error("dataset: L must be at least 2");
  for (const auto& s : sequences) {
    if (s.images.empty()) throw std::runtime_error("dataset: sequence " + s.id + " has no images");
    if (static_cast<int>(s.x.size()) != p)
      throw std::runtime_error("dataset: sequence " + s.id + " covariate length != p");
    if (s.true_y && (*s.true_y < 1 || *s.true_y > L))
      throw std::runtime_error("dataset: sequence " + s.id + " true_y outside 1..L");
    for (const auto& im : s.images) {
      if (!im.annotation && !im.confidence)
        throw std::runtime_error("dataset: image " + im.id + " of sequence " + s.id +
                                 " carries neither an annotation nor a confidence vector");
      if (static_cast<int>(im.u.size()) != q)
        throw std::runtime_error("dataset: image " + im.id + " quality covariate length != q");
      if (im.annotation) {
        if (im.annotation->score < 1 || im.annotation->score > L)
          throw std::runtime_error("dataset: image " + im.id + " annotation score outside 1..L");
        if (im.annotation->annotator < 1 || im.annotation->annotator > A)
          throw std::runtime_error("dataset: image " + im.id + " annotator outside 1..A");
      }
      if (im.confidence) {
        if (static_cast<int>(im.confidence->size()) != L)
          throw std::runtime_error("dataset: image " + im.id + " confidence length != L");
        double sum = 0.0;
        for (double c : *im.confidence) {
          if (!(c >= 0.0)) throw std::runtime_error("dataset: image " + im.id + " negative confidence entry");
          sum += c;
        }
        if (std::fabs(sum - 1.0) > simplex_tol)
          throw std::runtime_error("dataset: image " + im.id + " confidence row does not sum to 1");
      }
    }
  }
}

} // namespace bcfuse
