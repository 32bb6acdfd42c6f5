#pragma once

// Periodic sample-grid model of L^2(R^d) and of the Hilbert-Schmidt
// operators on it.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sis/error.hpp"

namespace sis {

using cplx = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// q samples per axis on the window [0, W)^d, wrapped periodically.
/// q must be a multiple of W so that a unit translation is a cyclic shift
/// by q/W samples.
class GridSpace {
 public:
  GridSpace(int d, int window, int samples) : d_(d), window_(window), samples_(samples) {
    if (d < 0) throw InputError("GridSpace: d must be >= 0");
    if (window < 1 || samples < 1) throw InputError("GridSpace: W and q must be positive");
    if (samples % window != 0)
      throw InputError("GridSpace: q=" + std::to_string(samples) +
                       " is not a multiple of W=" + std::to_string(window));
    dim_ = 1;
    for (int i = 0; i < d; ++i) dim_ *= static_cast<std::size_t>(samples);
  }

  int d() const { return d_; }
  int window() const { return window_; }
  int samples() const { return samples_; }
  double spacing() const { return static_cast<double>(window_) / samples_; }
  /// Samples per unit length.
  int per_unit() const { return samples_ / window_; }
  /// q^d, or 1 when d = 0.
  std::size_t dim() const { return dim_; }
  /// Grid cell volume spacing^d.
  double cell() const { return std::pow(spacing(), d_); }

  /// Multi-index of flat sample i, axis 0 most significant.
  std::vector<int> unflatten(std::size_t i) const {
    std::vector<int> idx(static_cast<std::size_t>(d_));
    for (int a = d_ - 1; a >= 0; --a) {
      idx[static_cast<std::size_t>(a)] = static_cast<int>(i % static_cast<std::size_t>(samples_));
      i /= static_cast<std::size_t>(samples_);
    }
    return idx;
  }
  std::size_t flatten(const std::vector<int>& idx) const {
    std::size_t i = 0;
    for (int a = 0; a < d_; ++a) {
      int v = idx[static_cast<std::size_t>(a)] % samples_;
      if (v < 0) v += samples_;
      i = i * static_cast<std::size_t>(samples_) + static_cast<std::size_t>(v);
    }
    return i;
  }
  /// Coordinates t of flat sample i.
  std::vector<double> point(std::size_t i) const {
    auto idx = unflatten(i);
    std::vector<double> t(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) t[a] = idx[a] * spacing();
    return t;
  }

  friend bool operator==(const GridSpace&, const GridSpace&) = default;

 private:
  int d_;
  int window_;
  int samples_;
  std::size_t dim_;
};

inline void require_shape(const GridSpace& space, const Operator& a, const char* what) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  if (a.rows() != n || a.cols() != n)
    throw LayoutError(std::string(what) + ": operator shape " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " does not match model dimension " +
                     std::to_string(n));
}

/// Hilbert-Schmidt pairing trace(B^* A) times the grid cell volume.
inline cplx hs_inner(const GridSpace& space, const Operator& a, const Operator& b) {
  require_shape(space, a, "hs_inner");
  require_shape(space, b, "hs_inner");
  // trace(B^* A) = sum_ij conj(B_ij) A_ij
  return (b.conjugate().cwiseProduct(a)).sum() * space.cell();
}

inline double hs_norm(const GridSpace& space, const Operator& a) {
  require_shape(space, a, "hs_norm");
  return std::sqrt(a.squaredNorm() * space.cell());
}

/// Grid L^2 norm of a sample vector.
inline double grid_norm(const GridSpace& space, const Vec& u) {
  return std::sqrt(u.squaredNorm() * space.cell());
}

/// The operator u (x) v^*. The sqrt(cell) factor makes its HS norm equal
/// grid_norm(u) * grid_norm(v) under hs_inner's normalization.
inline Operator rank_one(const GridSpace& space, const Vec& u, const Vec& v) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  if (u.size() != n || v.size() != n)
    throw InputError("rank_one: vector length does not match model dimension " + std::to_string(n));
  return std::sqrt(space.cell()) * (u * v.adjoint());
}

}  // namespace sis
