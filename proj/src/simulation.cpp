#include "invslam/simulation.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace invslam {

namespace {

template<class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};

void check_square(const Matrix& m, Eigen::Index n, const char* what)
{
  if (m.rows() != n || m.cols() != n) {
    throw std::invalid_argument(fmt::format("{} must be {}x{}, got {}x{}", what, n, n, m.rows(), m.cols()));
  }
  if (!m.allFinite()) {
    throw std::invalid_argument(fmt::format("{} has non-finite entries", what));
  }
}

}  // namespace

void validate(const ObserverConfig& cfg, std::size_t n_landmarks)
{
  const Eigen::Index dim = state_dim(n_landmarks);
  const Eigen::Index out = 2 * static_cast<Eigen::Index>(n_landmarks);
  std::visit(overloaded{
                 [&](const ConstantGain& g) {
                   if (cfg.kind == ObserverKind::Prop1) {
                     throw std::invalid_argument("prop1 observer takes per-landmark gains k, not a matrix");
                   }
                   if (g.L.rows() != dim || g.L.cols() != out) {
                     throw std::invalid_argument(
                         fmt::format("gain L must be {}x{}, got {}x{}", dim, out, g.L.rows(), g.L.cols()));
                   }
                 },
                 [&](const Prop1Gain& g) {
                   if (cfg.kind != ObserverKind::Prop1) {
                     throw std::invalid_argument("per-landmark gains k are only valid for the prop1 observer");
                   }
                   if (g.k.size() != n_landmarks) {
                     throw std::invalid_argument(
                         fmt::format("prop1 needs {} gains, got {}", n_landmarks, g.k.size()));
                   }
                   for (double k : g.k) {
                     if (!(k > 0.0) || !std::isfinite(k)) {
                       throw std::invalid_argument("prop1 gains must be positive");
                     }
                   }
                 },
                 [&](const RiccatiTuning& r) {
                   if (cfg.kind != ObserverKind::Ekf && cfg.kind != ObserverKind::Iekf) {
                     throw std::invalid_argument(
                         fmt::format("Riccati gains are only defined for ekf and iekf, not {}", to_string(cfg.kind)));
                   }
                   check_square(r.M, dim, "M");
                   check_square(r.N, out, "N");
                   check_square(r.P0, dim, "P0");
                 },
             },
             cfg.gain);
}

SlamRate observer_rate(const ObserverConfig& cfg, const Estimate& est, const Inputs& input,
                       const Observations& obs, const Matrix& gain)
{
  switch (cfg.kind) {
    case ObserverKind::Ekf: return ekf_step(est, input, obs, gain);
    case ObserverKind::InvariantizedEkf: return invariantized_step(est, input, obs, gain);
    case ObserverKind::Prop1: return prop1_step(est, input, obs, std::get<Prop1Gain>(cfg.gain).k);
    case ObserverKind::Iekf: return iekf_step(est, input, obs, gain);
  }
  throw std::logic_error("observer_rate: unhandled observer kind");
}

ClosedLoop::ClosedLoop(SlamState truth, Estimate estimate, InputProfile profile, ObserverConfig cfg,
                       NoiseConfig noise, double dt)
  : truth_(std::move(truth)),
    estimate_(std::move(estimate)),
    profile_(std::move(profile)),
    cfg_(std::move(cfg)),
    noise_(noise),
    dt_(dt)
{
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw std::invalid_argument("ClosedLoop: dt must be positive");
  }
  if (truth_.landmarks.size() != estimate_.landmarks.size()) {
    throw std::invalid_argument("ClosedLoop: estimate and truth have different landmark counts");
  }
  if (!truth_.all_finite() || !estimate_.all_finite()) {
    throw std::invalid_argument("ClosedLoop: non-finite initial state");
  }
  validate(cfg_, truth_.landmarks.size());
  if (const auto* r = std::get_if<RiccatiTuning>(&cfg_.gain)) {
    P_ = symmetrize(r->P0);
    if (cfg_.kind == ObserverKind::Iekf) {
      iekf_c_ = iekf_output_matrix(truth_.landmarks.size());
    }
  }
}

Linearization ClosedLoop::linearization_at(const Estimate& est, const Inputs& input) const
{
  if (cfg_.kind == ObserverKind::Iekf) {
    return {Matrix::Zero(est.dim(), est.dim()), iekf_c_};
  }
  return ekf_jacobians(est, input);
}

Matrix ClosedLoop::gain_at(const Estimate& est, const Inputs& input, const Matrix* P) const
{
  return std::visit(overloaded{
                        [&](const ConstantGain& g) -> Matrix { return g.L; },
                        [&](const Prop1Gain& g) -> Matrix { return prop1_gain_matrix(g.k); },
                        [&](const RiccatiTuning& r) -> Matrix {
                          return -gain_from_P(*P, linearization_at(est, input).C, r.N);
                        },
                    },
                    cfg_.gain);
}

Matrix ClosedLoop::applied_gain() const
{
  return gain_at(estimate_, profile_.eval(time()), P_ ? &*P_ : nullptr);
}

Vector ClosedLoop::pack() const
{
  const Eigen::Index dim = truth_.dim();
  const Eigen::Index cov = P_ ? dim * dim : 0;
  Vector y(2 * dim + cov);
  y.head(dim) = truth_.to_vector();
  y.segment(dim, dim) = estimate_.to_vector();
  if (P_) {
    y.tail(cov) = P_->reshaped();
  }
  return y;
}

void ClosedLoop::unpack(const Vector& y)
{
  const Eigen::Index dim = truth_.dim();
  truth_ = SlamState::from_vector(y.head(dim));
  estimate_ = SlamState::from_vector(y.segment(dim, dim));
  if (P_) {
    P_ = symmetrize(y.tail(dim * dim).reshaped(dim, dim));
  }
}

void ClosedLoop::step()
{
  const Eigen::Index dim = truth_.dim();
  const Observations noise = measurement_noise(observe(truth_), noise_, step_);
  const RiccatiTuning* tuning = std::get_if<RiccatiTuning>(&cfg_.gain);

  const auto rhs = [&](double t, const Vector& y) {
    const SlamState truth = SlamState::from_vector(y.head(dim));
    const Estimate est = SlamState::from_vector(y.segment(dim, dim));
    const Inputs input = profile_.eval(t);

    Observations z = observe(truth);
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] += noise[i];
    }

    Vector dy(y.size());
    dy.head(dim) = dynamics(truth, input).to_vector();
    if (tuning != nullptr) {
      const Matrix P = y.tail(dim * dim).reshaped(dim, dim);
      const Linearization lin = linearization_at(est, input);
      const Matrix gain = -gain_from_P(P, lin.C, tuning->N);
      dy.segment(dim, dim) = observer_rate(cfg_, est, input, z, gain).to_vector();
      dy.tail(dim * dim) = riccati_rhs(P, lin.A, lin.C, tuning->M, tuning->N).reshaped();
    } else {
      dy.segment(dim, dim) = observer_rate(cfg_, est, input, z, gain_at(est, input, nullptr)).to_vector();
    }
    return dy;
  };

  const Vector next = rk4_step(rhs, time(), pack(), dt_);
  if (!next.allFinite()) {
    throw std::runtime_error(fmt::format("non-finite state at step {}", step_ + 1));
  }
  unpack(next);
  ++step_;
  if (P_) {
    const double lambda = min_eigenvalue(*P_);
    if (lambda < -kPsdTolerance) {
      throw RiccatiDivergence(step_, lambda);
    }
  }
}

}  // namespace invslam
