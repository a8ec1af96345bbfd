#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pcsc {

/// Uniform periodic grid on [0,1)^d with N points per axis, carrying the
/// complex dimension n used in every conformal exponent. Points are stored
/// row-major: axis 0 varies slowest, axis d-1 fastest.
class TorusGrid {
 public:
  static constexpr int kMaxDim = 4;

  TorusGrid(int d, int N, int n);

  int dim() const noexcept { return d_; }
  int points_per_axis() const noexcept { return N_; }
  int complex_dim() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }
  double spacing() const noexcept { return 1.0 / N_; }
  double cell_volume() const noexcept;

  /// Multi-index of flat point `i`.
  std::array<int, kMaxDim> index(std::size_t i) const;
  /// Coordinates x_k = i_k / N of flat point `i` (unused axes are 0).
  std::array<double, kMaxDim> coords(std::size_t i) const;

  bool operator==(const TorusGrid&) const = default;

 private:
  int d_;
  int N_;
  int n_;
  std::size_t size_;
};

/// Real grid function. Values are finite; arithmetic is pointwise.
class ScalarField {
 public:
  explicit ScalarField(const TorusGrid& grid, double value = 0.0);
  ScalarField(const TorusGrid& grid, Eigen::VectorXd values);

  static ScalarField sample(
      const TorusGrid& grid,
      const std::function<double(std::span<const double>)>& fn);

  const TorusGrid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::VectorXd& values() noexcept { return values_; }
  auto array() const { return values_.array(); }
  std::size_t size() const noexcept { return grid_.size(); }

  double operator[](std::size_t i) const { return values_[Eigen::Index(i)]; }
  double& operator[](std::size_t i) { return values_[Eigen::Index(i)]; }

  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }
  double sup_norm() const { return values_.cwiseAbs().maxCoeff(); }
  /// Grid mean, equal to the flat integral since the torus has unit volume.
  double mean() const { return values_.mean(); }
  /// Root-mean-square, i.e. the flat L2 norm.
  double l2_norm() const;
  bool all_finite() const { return values_.allFinite(); }

  ScalarField map(const std::function<double(double)>& fn) const;
  ScalarField exp() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(const ScalarField& o);
  ScalarField& operator+=(double s);
  ScalarField& operator*=(double s);

 private:
  TorusGrid grid_;
  Eigen::VectorXd values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator/(const ScalarField& a, const ScalarField& b);
ScalarField operator+(ScalarField a, double s);
ScalarField operator+(double s, ScalarField a);
ScalarField operator-(ScalarField a, double s);
ScalarField operator-(double s, ScalarField a);
ScalarField operator*(ScalarField a, double s);
ScalarField operator*(double s, ScalarField a);
ScalarField operator-(ScalarField a);

/// One-form with one scalar component per grid axis.
class OneFormField {
 public:
  explicit OneFormField(const TorusGrid& grid);
  explicit OneFormField(std::vector<ScalarField> components);

  const TorusGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return grid_.dim(); }
  const ScalarField& operator[](int axis) const { return components_.at(std::size_t(axis)); }
  ScalarField& operator[](int axis) { return components_.at(std::size_t(axis)); }

  double sup_norm() const;

  OneFormField& operator+=(const OneFormField& o);
  OneFormField& operator*=(double s);
  OneFormField& operator*=(const ScalarField& w);

 private:
  TorusGrid grid_;
  std::vector<ScalarField> components_;
};

OneFormField operator+(OneFormField a, const OneFormField& b);
OneFormField operator*(double s, OneFormField a);
OneFormField operator*(const ScalarField& w, OneFormField a);

void require_same_grid(const TorusGrid& a, const TorusGrid& b);

}  // namespace pcsc
