#pragma once

// Small dense kernel for ridge-regularized least squares: Gram matrices with
// a Sherman-Morrison maintained inverse, quadratic widths, p-norms and
// element medians. Everything is templated on the scalar type; the rest of
// the library instantiates it with double.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "htlb/error.hpp"

namespace htlb {

/// Regularized Gram matrix A = I + sum x x^T together with its inverse.
template <typename Scalar>
struct Gram {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix a;
  Matrix a_inv;
  std::size_t n_updates = 0;

  Eigen::Index dim() const { return a.rows(); }
};

using GramState = Gram<double>;

namespace detail {

template <typename Scalar>
constexpr Scalar unit_ball_slack() {
  return Scalar(1e-12);
}

// Every this many rank-one updates a debug build re-inverts A directly.
inline constexpr std::size_t kInverseAuditPeriod = 1000;

template <typename Scalar>
Scalar max_abs_diff(const typename Gram<Scalar>::Matrix& lhs,
                    const typename Gram<Scalar>::Matrix& rhs) {
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

}  // namespace detail

template <typename Scalar = double>
Gram<Scalar> gram_init(Eigen::Index dim) {
  if (dim < 1) {
    throw Error(Errc::invalid_dimension, "gram_init: dimension must be positive");
  }
  Gram<Scalar> g;
  g.a = Gram<Scalar>::Matrix::Identity(dim, dim);
  g.a_inv = Gram<Scalar>::Matrix::Identity(dim, dim);
  return g;
}

/// In-place rank-one update A += x x^T, A^{-1} updated by Sherman-Morrison.
template <typename Scalar, typename Derived>
void gram_update_inplace(Gram<Scalar>& g, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != g.dim()) {
    throw Error(Errc::invalid_dimension, "gram_update: vector length " + std::to_string(x.size()) +
                                             " does not match dimension " +
                                             std::to_string(g.dim()));
  }
  const typename Gram<Scalar>::Vector xv = x.template cast<Scalar>();
  if (xv.norm() > Scalar(1) + detail::unit_ball_slack<Scalar>()) {
    throw Error(Errc::invalid_parameter, "gram_update: feature vector outside the unit ball");
  }
  const typename Gram<Scalar>::Vector ax = g.a_inv * xv;
  const Scalar denom = Scalar(1) + xv.dot(ax);
  g.a.noalias() += xv * xv.transpose();
  g.a_inv.noalias() -= (ax * ax.transpose()) / denom;
  ++g.n_updates;

#ifndef NDEBUG
  if (g.n_updates % detail::kInverseAuditPeriod == 0) {
    const typename Gram<Scalar>::Matrix direct = g.a.inverse();
    assert(detail::max_abs_diff<Scalar>(direct, g.a_inv) < Scalar(1e-8));
  }
#endif
}

template <typename Scalar, typename Derived>
Gram<Scalar> gram_update(Gram<Scalar> g, const Eigen::MatrixBase<Derived>& x) {
  gram_update_inplace(g, x);
  return g;
}

/// sqrt(x^T A^{-1} x). Radicands in [-1e-12, 0) are rounding noise and clamp to 0.
template <typename Scalar, typename Derived>
Scalar quad_width(const Gram<Scalar>& g, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != g.dim()) {
    throw Error(Errc::invalid_dimension, "quad_width: dimension mismatch");
  }
  const Scalar radicand = x.dot(g.a_inv * x);
  if (radicand < Scalar(-1e-12)) {
    throw Error(Errc::numeric_degeneracy, "quad_width: negative quadratic form");
  }
  return std::sqrt(std::max(radicand, Scalar(0)));
}

/// ||v||_p = (sum |v_i|^p)^{1/p}, p >= 1.
template <typename Derived>
typename Derived::Scalar p_norm(const Eigen::MatrixBase<Derived>& v,
                                typename Derived::Scalar p) {
  using Scalar = typename Derived::Scalar;
  if (!(p >= Scalar(1))) {
    throw Error(Errc::invalid_parameter, "p_norm: p must be >= 1");
  }
  if (v.size() == 0) return Scalar(0);
  if (p == Scalar(1)) return v.template lpNorm<1>();
  if (p == Scalar(2)) return v.norm();
  const Scalar scale = v.cwiseAbs().maxCoeff();
  if (scale == Scalar(0)) return Scalar(0);
  Scalar acc(0);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    acc += std::pow(std::abs(v(i)) / scale, p);
  }
  return scale * std::pow(acc, Scalar(1) / p);
}

template <typename Scalar>
struct MedianResult {
  Scalar value;
  std::size_t index;
};

/// Element of rank floor((n-1)/2) in a stable ascending order, with its
/// position in the input. Always a member of the input, never an average.
template <typename Scalar>
MedianResult<Scalar> lower_median(std::span<const Scalar> values) {
  if (values.empty()) {
    throw Error(Errc::empty_input, "lower_median: empty input");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto rank = static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  // Ordering by (value, index) reproduces a stable sort.
  std::nth_element(order.begin(), order.begin() + rank, order.end(),
                   [&](std::size_t lhs, std::size_t rhs) {
                     if (values[lhs] != values[rhs]) return values[lhs] < values[rhs];
                     return lhs < rhs;
                   });
  const std::size_t at = order[static_cast<std::size_t>(rank)];
  return {values[at], at};
}

template <typename Scalar>
MedianResult<Scalar> lower_median(const std::vector<Scalar>& values) {
  return lower_median(std::span<const Scalar>(values));
}

template <typename Derived>
MedianResult<typename Derived::Scalar> lower_median(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> flat = values.derived().reshaped();
  return lower_median(std::span<const Scalar>(flat.data(), static_cast<std::size_t>(flat.size())));
}

}  // namespace htlb
