#pragma once

#include <utility>

#include "errors.hpp"
#include "linalg.hpp"

namespace mbc {

/// Single-particle unitary on the external modes: U† a†_{pα} U = Σ_m U_{pm} a†_{mα}.
class ExternalUnitary {
public:
  static constexpr double kTolerance = 1e-10;

  explicit ExternalUnitary(CMatrix entries) : u_(std::move(entries)) {
    detail::require(u_.rows() == u_.cols() && u_.rows() > 0, "unitary must be a nonempty square matrix");
    detail::require(unitarity_defect(u_) < kTolerance, "matrix is not unitary");
  }

  static ExternalUnitary identity(int d) { return ExternalUnitary(CMatrix::Identity(d, d)); }

  int dim() const { return static_cast<int>(u_.rows()); }
  const CMatrix& matrix() const { return u_; }
  complex operator()(int row, int col) const { return u_(row, col); }

private:
  CMatrix u_;
};

}  // namespace mbc
