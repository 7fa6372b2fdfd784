#include "invslam/riccati.hpp"

#include <cmath>
#include <memory>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <fmt/format.h>

namespace invslam {

namespace {

Matrix inverse_checked(const Matrix& N)
{
  if (N.rows() != N.cols()) {
    throw std::invalid_argument("riccati: measurement tuning matrix must be square");
  }
  Eigen::FullPivLU<Matrix> lu(N);
  if (!lu.isInvertible()) {
    throw std::invalid_argument("riccati: measurement tuning matrix is singular");
  }
  return lu.inverse();
}

void check_dims(const Matrix& P, const Matrix& C, const Matrix& N)
{
  if (P.rows() != P.cols() || C.cols() != P.rows() || N.rows() != C.rows()) {
    throw std::invalid_argument(fmt::format("riccati: inconsistent shapes P {}x{}, C {}x{}, N {}x{}", P.rows(),
                                            P.cols(), C.rows(), C.cols(), N.rows(), N.cols()));
  }
}

}  // namespace

RiccatiDivergence::RiccatiDivergence(std::size_t step, double min_eigenvalue)
  : std::runtime_error(fmt::format("Riccati covariance lost positive semidefiniteness at step {} "
                                   "(min eigenvalue {:.6g})",
                                   step, min_eigenvalue)),
    step_(step),
    min_eigenvalue_(min_eigenvalue)
{}

Matrix riccati_rhs(const Matrix& P, const Matrix& A, const Matrix& C, const Matrix& M, const Matrix& N)
{
  check_dims(P, C, N);
  if (A.rows() != P.rows() || A.cols() != P.cols() || M.rows() != P.rows() || M.cols() != P.cols()) {
    throw std::invalid_argument("riccati_rhs: A and M must match P");
  }
  const Matrix Ninv = inverse_checked(N);
  const Matrix PCt = P * C.transpose();
  return A * P + P * A.transpose() + M - PCt * Ninv * PCt.transpose();
}

Matrix gain_from_P(const Matrix& P, const Matrix& C, const Matrix& N)
{
  check_dims(P, C, N);
  return P * C.transpose() * inverse_checked(N);
}

double steady_residual(const Matrix& P, const Matrix& C, const Matrix& M, const Matrix& N)
{
  check_dims(P, C, N);
  const Matrix PCt = P * C.transpose();
  return (M - PCt * inverse_checked(N) * PCt.transpose()).norm();
}

Matrix observable_projector(const Matrix& C)
{
  // Orthonormal basis of range(C^T) from a rank-revealing QR.
  Eigen::ColPivHouseholderQR<Matrix> qr(C.transpose());
  const Eigen::Index rank = qr.rank();
  const Matrix Q = qr.householderQ() * Matrix::Identity(C.cols(), rank);
  return Q * Q.transpose();
}

double steady_residual_observable(const Matrix& P, const Matrix& C, const Matrix& M, const Matrix& N)
{
  check_dims(P, C, N);
  const Matrix PCt = P * C.transpose();
  const Matrix r = M - PCt * inverse_checked(N) * PCt.transpose();
  const Matrix proj = observable_projector(C);
  return (proj * r * proj).norm();
}

Matrix symmetrize(const Matrix& P) { return 0.5 * (P + P.transpose()); }

double min_eigenvalue(const Matrix& P)
{
  Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

LinearizationSource fixed_linearization(Matrix C)
{
  const Eigen::Index dim = C.cols();
  return [C = std::move(C), dim](double) { return Linearization{Matrix::Zero(dim, dim), C}; };
}

LinearizationSource trajectory_linearization(const SlamState& initial, const InputProfile& profile, double dt,
                                             std::size_t steps)
{
  // Half-step samples so every RK4 stage lands on a stored state.
  auto states = std::make_shared<std::vector<SlamState>>(simulate_plant(initial, profile, 0.5 * dt, 2 * steps));
  return [states, profile, dt](double t) {
    const auto idx = static_cast<std::size_t>(std::llround(2.0 * t / dt));
    if (idx >= states->size()) {
      throw std::out_of_range("trajectory_linearization: t beyond sampled trajectory");
    }
    return ekf_jacobians((*states)[idx], profile.eval(t));
  };
}

Matrix riccati_rk4_step(const Matrix& P, const LinearizationSource& source, double t, double dt, const Matrix& M,
                        const Matrix& N)
{
  const auto rhs = [&](double s, const Matrix& p) {
    const Linearization lin = source(s);
    return riccati_rhs(p, lin.A, lin.C, M, N);
  };
  const Matrix k1 = rhs(t, P);
  const Matrix k2 = rhs(t + 0.5 * dt, P + 0.5 * dt * k1);
  const Matrix k3 = rhs(t + 0.5 * dt, P + 0.5 * dt * k2);
  const Matrix k4 = rhs(t + dt, P + dt * k3);
  return symmetrize(P + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

RiccatiSeries integrate_riccati(const RiccatiState& state, const LinearizationSource& source, double dt,
                                std::size_t steps)
{
  if (!(dt > 0.0)) {
    throw std::invalid_argument("integrate_riccati: dt must be positive");
  }
  RiccatiSeries out;
  out.t.reserve(steps + 1);
  out.P.reserve(steps + 1);
  out.L.reserve(steps + 1);

  Matrix P = symmetrize(state.P);
  const auto emit = [&](std::size_t k) {
    const double t = static_cast<double>(k) * dt;
    out.t.push_back(t);
    out.L.push_back(gain_from_P(P, source(t).C, state.N));
    out.P.push_back(P);
  };
  emit(0);
  for (std::size_t k = 0; k < steps; ++k) {
    P = riccati_rk4_step(P, source, static_cast<double>(k) * dt, dt, state.M, state.N);
    const double lambda = min_eigenvalue(P);
    if (lambda < -kPsdTolerance) {
      throw RiccatiDivergence(k + 1, lambda);
    }
    emit(k + 1);
  }
  return out;
}

}  // namespace invslam
