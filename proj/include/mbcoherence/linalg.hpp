#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace mbc {

using complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Permanent by Ryser's formula, visiting column subsets in Gray-code order so
/// each step updates the row sums with a single column.
inline complex permanent(const CMatrix& a) {
  detail::require(a.rows() == a.cols(), "permanent: matrix must be square");
  const int n = static_cast<int>(a.rows());
  if (n == 0) return 1.0;
  detail::require(n <= 30, "permanent: matrix too large");

  std::vector<complex> row_sums(n, 0.0);
  complex total = 0.0;
  std::uint64_t gray = 0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < count; ++step) {
    const std::uint64_t next = step ^ (step >> 1);
    const std::uint64_t flipped = next ^ gray;
    const int col = __builtin_ctzll(flipped);
    const bool added = (next & flipped) != 0;
    for (int i = 0; i < n; ++i) row_sums[i] += added ? a(i, col) : -a(i, col);
    gray = next;

    complex prod = 1.0;
    for (int i = 0; i < n; ++i) prod *= row_sums[i];
    const int subset_size = __builtin_popcountll(gray);
    total += ((n - subset_size) % 2 == 0) ? prod : -prod;
  }
  return total;
}

inline complex determinant(const CMatrix& a) {
  detail::require(a.rows() == a.cols(), "determinant: matrix must be square");
  if (a.rows() == 0) return 1.0;
  return a.partialPivLu().determinant();
}

/// max |(U^† U - 1)_{ij}|
inline double unitarity_defect(const CMatrix& u) {
  const CMatrix id = CMatrix::Identity(u.rows(), u.cols());
  return (u.adjoint() * u - id).cwiseAbs().maxCoeff();
}

/// Principal submatrix on the given (sorted) index set.
inline CMatrix principal_submatrix(const CMatrix& a, const std::vector<int>& idx) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  CMatrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) out(i, j) = a(idx[i], idx[j]);
  return out;
}

}  // namespace mbc
