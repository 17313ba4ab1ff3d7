#pragma once

#include <optional>
#include <string>
#include <vector>

namespace bcfuse {

struct Annotation {
  int score = 0;      // 1..L
  int annotator = 0;  // 1..A
};

struct Image {
  std::string id;
  std::vector<double> u; // image-quality covariates, length q (may be empty)
  std::optional<Annotation> annotation;
  std::optional<std::vector<double>> confidence; // length L, simplex
};

// A burst of images of one individual; the unit carrying one latent score.
struct Sequence {
  std::string id;
  std::vector<double> x; // covariates, length p
  std::vector<Image> images;
  std::optional<int> true_y; // simulation ground truth only
};

struct Dataset {
  int L = 0;
  int p = 0;
  int q = 0;
  int A = 0; // number of annotators
  std::vector<Sequence> sequences;

  int n_sequences() const { return static_cast<int>(sequences.size()); }
  int n_images() const;
  int n_annotations() const;
  int n_confidences() const;

  // checks the structural invariants: L >= 2, every image observed at least
  // once, scores/annotators in range, confidence rows on the simplex within
  // tol. Throws std::runtime_error with the offending sequence/image id.
  void validate(double simplex_tol = 1e-9) const;
};

} // namespace bcfuse
