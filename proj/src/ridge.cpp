#include "asymkit/ridge.hpp"

#include <cmath>
#include <string>

#include "asymkit/error.hpp"

namespace asymkit::ridge {

namespace {

void check_inputs(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows())
    throw ValidationError("ridge: design has " + std::to_string(x.rows()) + " rows, targets have " +
                          std::to_string(y.rows()));
  if (x.rows() == 0 || x.cols() == 0) throw ValidationError("ridge: empty design");
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ValidationError("ridge penalty must be positive and finite");
}

}  // namespace

Matrix fit_primal(const Matrix& x, const Matrix& y, double lambda) {
  check_inputs(x, y);
  check_lambda(lambda);
  Matrix gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  return gram.llt().solve(x.transpose() * y);
}

Matrix fit_dual(const Matrix& x, const Matrix& y, double lambda) {
  check_inputs(x, y);
  check_lambda(lambda);
  Matrix kernel = x * x.transpose();
  kernel.diagonal().array() += lambda;
  return x.transpose() * kernel.llt().solve(y);
}

Matrix fit(const Matrix& x, const Matrix& y, double lambda) {
  return preferred_form(x.rows(), x.cols()) == Form::dual ? fit_dual(x, y, lambda)
                                                          : fit_primal(x, y, lambda);
}

Solver::Solver(const Matrix& x, const Matrix& y) : form_(preferred_form(x.rows(), x.cols())), x_(x) {
  check_inputs(x, y);
  const Matrix gram = form_ == Form::dual ? Matrix(x * x.transpose()) : Matrix(x.transpose() * x);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw Error("ridge: eigendecomposition failed");
  eigenvalues_ = eig.eigenvalues().cwiseMax(0.0);
  eigenvectors_ = eig.eigenvectors();
  projected_ = form_ == Form::dual ? Matrix(eigenvectors_.transpose() * y)
                                   : Matrix(eigenvectors_.transpose() * (x.transpose() * y));
}

Matrix Solver::weights(double lambda) const {
  check_lambda(lambda);
  const Eigen::VectorXd shrink = (eigenvalues_.array() + lambda).inverse();
  const Matrix coef = eigenvectors_ * (shrink.asDiagonal() * projected_);
  return form_ == Form::dual ? Matrix(x_.transpose() * coef) : coef;
}

Matrix Solver::predict(const Matrix& x_new, double lambda) const {
  check_lambda(lambda);
  if (x_new.cols() != x_.cols()) throw ValidationError("ridge: feature count mismatch at prediction");
  const Eigen::VectorXd shrink = (eigenvalues_.array() + lambda).inverse();
  const Matrix coef = eigenvectors_ * (shrink.asDiagonal() * projected_);
  if (form_ == Form::dual) return (x_new * x_.transpose()) * coef;
  return x_new * coef;
}

}  // namespace asymkit::ridge
