// Shared builders for small synthetic datasets and moderate random states.
#pragma once

#include <string>
#include <vector>

#include "bcfuse/data.hpp"
#include "bcfuse/model.hpp"
#include "bcfuse/prior.hpp"
#include "bcfuse/rng.hpp"

namespace testdata {

using namespace bcfuse;

// random state with all parameters in a numerically comfortable range,
// nu_tilde valid inside its cell
inline ParamState moderate_state(int L, int p, int q, int A, Rng& rng) {
  ParamState s;
  s.beta0 = rng.normal() * 0.8;
  s.beta.resize(p);
  for (auto& b : s.beta) b = rng.normal() * 0.5;
  std::vector<double> raw(L - 2);
  for (auto& v : raw) v = -0.8 + 1.6 * rng.uniform();
  s.theta = CutoffVector::from_raw(raw);
  s.phi.resize(L);
  s.nu_tilde.resize(L);
  s.nu.assign(A, std::vector<double>(L, 0.0));
  s.alpha.resize(L);
  for (int y = 1; y <= L; ++y) {
    for (auto& v : raw) v = -0.8 + 1.6 * rng.uniform();
    s.phi[y - 1] = CutoffVector::from_raw(raw);
    const double lo = s.phi[y - 1].lower(y), hi = s.phi[y - 1].upper(y);
    const double flo = std::max(lo, hi - 3.0), fhi = std::min(hi, lo + 3.0);
    s.nu_tilde[y - 1] = flo + rng.uniform() * (fhi - flo);
    for (int a = 0; a < A; ++a) s.nu[a][y - 1] = s.nu_tilde[y - 1] + 0.3 * rng.normal();
    std::vector<double> conc(L, 2.0);
    conc[y - 1] = 6.0;
    s.alpha[y - 1] = rng.dirichlet(conc);
  }
  s.omega0 = rng.normal() * 0.4;
  s.omega.resize(q);
  for (auto& w : s.omega) w = rng.normal() * 0.4;
  return s;
}

// small dataset with a mix of annotated and confidence-scored images
inline Dataset toy_dataset(int N, int L, int p, int q, int A, Rng& rng, double ann_prob = 0.5,
                           double conf_prob = 0.9, int max_r = 3) {
  Dataset d;
  d.L = L;
  d.p = p;
  d.q = q;
  d.A = A;
  for (int i = 0; i < N; ++i) {
    Sequence seq;
    seq.id = "s" + std::to_string(i + 1);
    seq.x.resize(p);
    for (auto& v : seq.x) v = rng.normal();
    seq.true_y = 1 + rng.uniform_int(L);
    const int r = 1 + rng.uniform_int(max_r);
    for (int k = 0; k < r; ++k) {
      Image im;
      im.id = seq.id + "_i" + std::to_string(k + 1);
      im.u.resize(q);
      for (auto& v : im.u) v = rng.normal();
      const bool ann = rng.uniform() < ann_prob;
      const bool conf = rng.uniform() < conf_prob || !ann;
      if (ann) im.annotation = Annotation{1 + rng.uniform_int(L), 1 + rng.uniform_int(A)};
      if (conf) {
        std::vector<double> conc(L, 1.0);
        conc[*seq.true_y - 1] = 4.0;
        im.confidence = zeta_adjust(rng.dirichlet(conc), 1e-12);
      }
      seq.images.push_back(std::move(im));
    }
    d.sequences.push_back(std::move(seq));
  }
  return d;
}

inline std::vector<int> random_y(int N, int L, Rng& rng) {
  std::vector<int> y(N);
  for (auto& v : y) v = 1 + rng.uniform_int(L);
  return y;
}

} // namespace testdata
