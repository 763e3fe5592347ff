#pragma once

#include <Eigen/Dense>

namespace asymkit::ridge {

using Matrix = Eigen::MatrixXd;

enum class Form { primal, dual };

/// Dual (kernel) form when there are more features than samples.
constexpr Form preferred_form(Eigen::Index n_samples, Eigen::Index n_features) {
  return n_features > n_samples ? Form::dual : Form::primal;
}

/// Weights (features x targets) from (XᵀX + λI) W = XᵀY.
Matrix fit_primal(const Matrix& x, const Matrix& y, double lambda);

/// Weights Xᵀ(XXᵀ + λI)⁻¹Y.
Matrix fit_dual(const Matrix& x, const Matrix& y, double lambda);

/// Picks the form from the shape of x.
Matrix fit(const Matrix& x, const Matrix& y, double lambda);

/// Ridge solver for one training set and many penalties. The smaller Gram
/// matrix (XᵀX or XXᵀ) is eigendecomposed once, after which each λ costs a
/// rescale and two products.
class Solver {
 public:
  Solver(const Matrix& x, const Matrix& y);

  Form form() const { return form_; }

  Matrix weights(double lambda) const;

  /// x_new * weights(lambda), without forming the weights in dual form.
  Matrix predict(const Matrix& x_new, double lambda) const;

 private:
  Form form_;
  Matrix x_;
  Eigen::VectorXd eigenvalues_;
  Matrix eigenvectors_;
  Matrix projected_;  // eigenvectorsᵀ · (XᵀY or Y)
};

}  // namespace asymkit::ridge
