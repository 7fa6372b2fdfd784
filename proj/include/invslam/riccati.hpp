#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "invslam/model.hpp"
#include "invslam/observers.hpp"

namespace invslam {

/// Covariance P with the fixed tuning pair (M state noise, N measurement noise).
struct RiccatiState
{
  Matrix P;
  Matrix M;
  Matrix N;
};

/// Raised when P leaves the positive semidefinite cone during integration.
class RiccatiDivergence : public std::runtime_error
{
public:
  RiccatiDivergence(std::size_t step, double min_eigenvalue);
  std::size_t step() const { return step_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

private:
  std::size_t step_;
  double min_eigenvalue_;
};

constexpr double kPsdTolerance = 1e-6;

/// A P + P A^T + M - P C^T N^-1 C P. Throws std::invalid_argument if N is singular.
Matrix riccati_rhs(const Matrix& P, const Matrix& A, const Matrix& C, const Matrix& M, const Matrix& N);

/// P C^T N^-1.
Matrix gain_from_P(const Matrix& P, const Matrix& C, const Matrix& N);

/// Frobenius norm of M - P C^T N^-1 C P.
double steady_residual(const Matrix& P, const Matrix& C, const Matrix& M, const Matrix& N);

/**
 * The same residual projected onto the observable subspace range(C^T), i.e.
 * with the unobservable directions of the stationary pair (A = 0, C) removed.
 */
double steady_residual_observable(const Matrix& P, const Matrix& C, const Matrix& M, const Matrix& N);

/// Orthogonal projector onto range(C^T).
Matrix observable_projector(const Matrix& C);

/// (P + P^T) / 2.
Matrix symmetrize(const Matrix& P);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& P);

/// Supplies (A, C) at a given time.
using LinearizationSource = std::function<Linearization(double t)>;

/// Stationary mode: A = 0 and a fixed C.
LinearizationSource fixed_linearization(Matrix C);

/// Jacobians of the plant along its noiseless trajectory, sampled at half steps for RK4.
LinearizationSource trajectory_linearization(const SlamState& initial, const InputProfile& profile, double dt,
                                             std::size_t steps);

/// RK4 step of the Riccati flow followed by symmetrization.
Matrix riccati_rk4_step(const Matrix& P, const LinearizationSource& source, double t, double dt, const Matrix& M,
                        const Matrix& N);

struct RiccatiSeries
{
  std::vector<double> t;
  std::vector<Matrix> P;
  std::vector<Matrix> L;  // P C^T N^-1 at each t
};

/**
 * Propagates P over `steps` RK4 steps, emitting (P, L) at every step
 * including t = 0. Aborts with RiccatiDivergence when the smallest eigenvalue
 * of P drops below -kPsdTolerance.
 */
RiccatiSeries integrate_riccati(const RiccatiState& state, const LinearizationSource& source, double dt,
                                std::size_t steps);

}  // namespace invslam
