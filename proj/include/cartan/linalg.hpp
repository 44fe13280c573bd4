#ifndef CARTAN_LINALG_HPP
#define CARTAN_LINALG_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "cartan/errors.hpp"

namespace cartan {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double kConditionGuard = 1e12;

// Inverse with a 1-norm condition estimate; throws SingularMetric when the
// estimate exceeds the guard (Randers tensors degenerate as gamma -> 0).
inline Mat guarded_inverse(const Mat& a, double guard = kConditionGuard) {
  Eigen::PartialPivLU<Mat> lu(a);
  Mat inv = lu.inverse();
  const double norm_a = a.cwiseAbs().colwise().sum().maxCoeff();
  const double norm_inv = inv.cwiseAbs().colwise().sum().maxCoeff();
  const double cond = norm_a * norm_inv;
  if (!std::isfinite(cond) || cond > guard) throw SingularMetric(cond);
  return inv;
}

// Max |A - A^dagger| entry: 0 for an exactly Hermitian matrix.
inline double hermiticity_residual(const Mat& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

// Smallest eigenvalue of the Hermitian part.
inline double min_eigenvalue(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()));
  return es.eigenvalues().minCoeff();
}

inline double max_abs(const Mat& a) {
  return a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
}
inline double max_abs(const Vec& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

// Rank-3 coefficient block: `mats[k](j, i)` holds the component with
// second lower index k, first lower index j, upper index i -- the index
// ordering of the defining connection coefficients, used throughout.
using Tensor3 = std::vector<Mat>;

inline double max_abs(const Tensor3& t) {
  double m = 0.0;
  for (const Mat& a : t) m = std::max(m, max_abs(a));
  return m;
}

}  // namespace cartan

#endif
