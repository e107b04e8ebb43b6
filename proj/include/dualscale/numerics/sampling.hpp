#pragma once

#include <cstddef>
#include <vector>

#include "dualscale/numerics/hermitian.hpp"
#include "dualscale/numerics/rng.hpp"

namespace dualscale {

/// CN(0, cov) sampler. The eigendecomposition square root is computed once;
/// each draw is one matrix-vector product.
class ComplexGaussianSampler {
 public:
  explicit ComplexGaussianSampler(const HermitianMatrix& cov) : root_(psd_sqrt(cov)) {}

  Eigen::Index dim() const noexcept { return root_.rows(); }

  CVector draw(RngStream& rng) const {
    CVector z(root_.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.complex_normal();
    return root_ * z;
  }

  void draw_into(RngStream& rng, CVector& out, CVector& scratch) const {
    scratch.resize(root_.cols());
    for (Eigen::Index i = 0; i < scratch.size(); ++i) scratch(i) = rng.complex_normal();
    out.noalias() = root_ * scratch;
  }

  const CMatrix& root() const noexcept { return root_; }

 private:
  CMatrix root_;
};

inline std::vector<CVector> sample_complex_gaussian(const HermitianMatrix& cov, RngStream& rng,
                                                    std::size_t count) {
  const ComplexGaussianSampler sampler(cov);
  std::vector<CVector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.draw(rng));
  return out;
}

}  // namespace dualscale
