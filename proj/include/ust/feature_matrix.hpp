#pragma once

#include <Eigen/Dense>

#include "ust/tensor.hpp"

namespace ust {

// Vectorized feature map: C rows (channels) by N columns (spatial samples),
// with the per-row mean cached at construction.
template <typename Scalar>
class BasicFeatureMatrix {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicFeatureMatrix() = default;

  explicit BasicFeatureMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.cols() < 1) throw InvalidArgument("FeatureMatrix: needs at least one sample");
    // Accumulate in double: the mean feeds centering for the covariance.
    mean_ = values_.template cast<double>().rowwise().mean().template cast<Scalar>();
  }

  Index channels() const noexcept { return values_.rows(); }
  Index samples() const noexcept { return values_.cols(); }

  const Matrix& values() const noexcept { return values_; }
  const Vector& mean() const noexcept { return mean_; }

  // Rvalue access lets callers steal the storage without a copy.
  Matrix release() && { return std::move(values_); }

  friend bool operator==(const BasicFeatureMatrix& a, const BasicFeatureMatrix& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  Matrix values_;
  Vector mean_;
};

using FeatureMatrix = BasicFeatureMatrix<float>;

template <typename Scalar>
BasicFeatureMatrix<Scalar> to_feature_matrix(const Tensor3<Scalar>& t) {
  if (t.empty()) throw InvalidArgument("to_feature_matrix: empty tensor");
  return BasicFeatureMatrix<Scalar>(t.matrix());
}

template <typename Scalar>
BasicFeatureMatrix<Scalar> to_feature_matrix(Tensor3<Scalar>&& t) {
  if (t.empty()) throw InvalidArgument("to_feature_matrix: empty tensor");
  return BasicFeatureMatrix<Scalar>(std::move(t.matrix()));
}

template <typename Scalar>
Tensor3<Scalar> from_feature_matrix(const BasicFeatureMatrix<Scalar>& m, Index height, Index width) {
  if (height * width != m.samples())
    throw InvalidArgument("from_feature_matrix: " + std::to_string(height) + "x" +
                          std::to_string(width) + " does not match " +
                          std::to_string(m.samples()) + " columns");
  return Tensor3<Scalar>(height, width, m.values());
}

template <typename Scalar>
Tensor3<Scalar> from_feature_matrix(BasicFeatureMatrix<Scalar>&& m, Index height, Index width) {
  if (height * width != m.samples())
    throw InvalidArgument("from_feature_matrix: " + std::to_string(height) + "x" +
                          std::to_string(width) + " does not match " +
                          std::to_string(m.samples()) + " columns");
  return Tensor3<Scalar>(height, width, std::move(m).release());
}

}  // namespace ust
