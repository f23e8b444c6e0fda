#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace mcm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Real matrix whose cells may be absent. Absent cells carry no value: reading
// one through at() yields std::nullopt. Storage for absent cells is kept at 0
// so whole-matrix views (filled_zero()) are well defined.
class MaskedMatrix {
 public:
  MaskedMatrix() = default;
  MaskedMatrix(Eigen::Index rows, Eigen::Index cols)
      : values_(Matrix::Zero(rows, cols)), observed_(Mask::Constant(rows, cols, false)) {}
  explicit MaskedMatrix(Matrix full)
      : values_(std::move(full)), observed_(Mask::Constant(values_.rows(), values_.cols(), true)) {}

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

  bool observed(Eigen::Index i, Eigen::Index j) const { return observed_(i, j); }
  std::optional<double> at(Eigen::Index i, Eigen::Index j) const {
    if (!observed_(i, j)) return std::nullopt;
    return values_(i, j);
  }
  // Caller guarantees observed(i, j).
  double value(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }

  void set(Eigen::Index i, Eigen::Index j, double v) {
    values_(i, j) = v;
    observed_(i, j) = true;
  }
  void clear(Eigen::Index i, Eigen::Index j) {
    values_(i, j) = 0.0;
    observed_(i, j) = false;
  }

  const Mask& mask() const { return observed_; }
  // Absent cells read as 0.
  const Matrix& filled_zero() const { return values_; }

  std::size_t absent_in_column(Eigen::Index j) const {
    return static_cast<std::size_t>(observed_.rows() - observed_.col(j).count());
  }
  std::size_t absent_count() const {
    return static_cast<std::size_t>(observed_.size() - observed_.count());
  }

  MaskedMatrix select_rows(std::span<const std::size_t> idx) const {
    MaskedMatrix out(static_cast<Eigen::Index>(idx.size()), cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto src = static_cast<Eigen::Index>(idx[r]);
      out.values_.row(static_cast<Eigen::Index>(r)) = values_.row(src);
      out.observed_.row(static_cast<Eigen::Index>(r)) = observed_.row(src);
    }
    return out;
  }

  friend bool operator==(const MaskedMatrix& a, const MaskedMatrix& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.observed_ == b.observed_ && a.values_ == b.values_;
  }

 private:
  Matrix values_;
  Mask observed_;
};

template <class T>
std::vector<T> take(std::span<const T> v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

inline Vector take(const Vector& v, std::span<const std::size_t> idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) out(static_cast<Eigen::Index>(r)) = v(static_cast<Eigen::Index>(idx[r]));
  return out;
}

}  // namespace mcm
