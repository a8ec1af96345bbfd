#include "pcsc/grid.hpp"

#include "pcsc/errors.hpp"

#include <cmath>
#include <string>

namespace pcsc {

TorusGrid::TorusGrid(int d, int N, int n) : d_(d), N_(N), n_(n), size_(1) {
  if (d < 1 || d > kMaxDim) {
    throw Error(ErrorCode::InvalidArgument,
                "grid dimension d must be in [1, 4], got " + std::to_string(d));
  }
  if (N < 8 || (N & (N - 1)) != 0) {
    throw Error(ErrorCode::InvalidArgument,
                "points per axis N must be a power of two >= 8, got " +
                    std::to_string(N));
  }
  if (n < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "complex dimension n must be >= 2, got " + std::to_string(n));
  }
  for (int k = 0; k < d; ++k) size_ *= std::size_t(N);
}

double TorusGrid::cell_volume() const noexcept {
  return std::pow(spacing(), d_);
}

std::array<int, TorusGrid::kMaxDim> TorusGrid::index(std::size_t i) const {
  std::array<int, kMaxDim> idx{};
  for (int k = d_ - 1; k >= 0; --k) {
    idx[std::size_t(k)] = int(i % std::size_t(N_));
    i /= std::size_t(N_);
  }
  return idx;
}

std::array<double, TorusGrid::kMaxDim> TorusGrid::coords(std::size_t i) const {
  const auto idx = index(i);
  std::array<double, kMaxDim> x{};
  for (int k = 0; k < d_; ++k) x[std::size_t(k)] = idx[std::size_t(k)] * spacing();
  return x;
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b) {
  if (!(a == b)) throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(const TorusGrid& grid, double value)
    : grid_(grid), values_(Eigen::VectorXd::Constant(Eigen::Index(grid.size()), value)) {}

ScalarField::ScalarField(const TorusGrid& grid, Eigen::VectorXd values)
    : grid_(grid), values_(std::move(values)) {
  if (std::size_t(values_.size()) != grid_.size()) {
    throw Error(ErrorCode::GridMismatch,
                "value count " + std::to_string(values_.size()) +
                    " does not match grid size " + std::to_string(grid_.size()));
  }
}

ScalarField ScalarField::sample(
    const TorusGrid& grid, const std::function<double(std::span<const double>)>& fn) {
  ScalarField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.coords(i);
    f[i] = fn(std::span<const double>(x.data(), std::size_t(grid.dim())));
  }
  return f;
}

double ScalarField::l2_norm() const {
  return std::sqrt(values_.squaredNorm() / double(values_.size()));
}

ScalarField ScalarField::map(const std::function<double(double)>& fn) const {
  ScalarField out(grid_);
  for (Eigen::Index i = 0; i < values_.size(); ++i) out.values_[i] = fn(values_[i]);
  return out;
}

ScalarField ScalarField::exp() const {
  return ScalarField(grid_, values_.array().exp().matrix());
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_);
  values_ += o.values_;
  return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_);
  values_ -= o.values_;
  return *this;
}
ScalarField& ScalarField::operator*=(const ScalarField& o) {
  require_same_grid(grid_, o.grid_);
  values_.array() *= o.values_.array();
  return *this;
}
ScalarField& ScalarField::operator+=(double s) {
  values_.array() += s;
  return *this;
}
ScalarField& ScalarField::operator*=(double s) {
  values_ *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid());
  return ScalarField(a.grid(), (a.array() / b.array()).matrix());
}
ScalarField operator+(ScalarField a, double s) { return a += s; }
ScalarField operator+(double s, ScalarField a) { return a += s; }
ScalarField operator-(ScalarField a, double s) { return a += -s; }
ScalarField operator-(double s, ScalarField a) { a *= -1.0; return a += s; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator-(ScalarField a) { return a *= -1.0; }

// ---------------------------------------------------------------------------

OneFormField::OneFormField(const TorusGrid& grid)
    : grid_(grid), components_(std::size_t(grid.dim()), ScalarField(grid)) {}

OneFormField::OneFormField(std::vector<ScalarField> components)
    : grid_(components.empty() ? throw Error(ErrorCode::InvalidArgument,
                                             "one-form needs at least one component")
                               : components.front().grid()),
      components_(std::move(components)) {
  if (int(components_.size()) != grid_.dim()) {
    throw Error(ErrorCode::InvalidArgument,
                "one-form needs exactly d = " + std::to_string(grid_.dim()) +
                    " components, got " + std::to_string(components_.size()));
  }
  for (const auto& c : components_) require_same_grid(grid_, c.grid());
}

double OneFormField::sup_norm() const {
  double m = 0.0;
  for (const auto& c : components_) m = std::max(m, c.sup_norm());
  return m;
}

OneFormField& OneFormField::operator+=(const OneFormField& o) {
  require_same_grid(grid_, o.grid_);
  for (std::size_t k = 0; k < components_.size(); ++k) components_[k] += o.components_[k];
  return *this;
}
OneFormField& OneFormField::operator*=(double s) {
  for (auto& c : components_) c *= s;
  return *this;
}
OneFormField& OneFormField::operator*=(const ScalarField& w) {
  for (auto& c : components_) c *= w;
  return *this;
}

OneFormField operator+(OneFormField a, const OneFormField& b) { return a += b; }
OneFormField operator*(double s, OneFormField a) { return a *= s; }
OneFormField operator*(const ScalarField& w, OneFormField a) { return a *= w; }

}  // namespace pcsc
