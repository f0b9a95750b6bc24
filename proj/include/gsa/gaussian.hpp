#pragma once

// Exact Sobol' games for models with Gaussian inputs: linear models via
// Gaussian conditioning, the analytic toy cases with their published
// reference allocations, and the Ishigami function under Gaussian inputs.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsa/allocations.hpp"
#include "gsa/coalition.hpp"
#include "gsa/errors.hpp"

namespace gsa {

namespace detail {

inline std::vector<int> member_indices(Mask m) {
  std::vector<int> out;
  for (; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}

inline Eigen::MatrixXd block(const Eigen::MatrixXd& s, const std::vector<int>& rows,
                             const std::vector<int>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = s(rows[r], cols[c]);
  return out;
}

inline Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = v(idx[k]);
  return out;
}

inline void check_covariance(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) throw ContractError("covariance must be square");
  if (!sigma.allFinite()) throw ContractError("covariance has non-finite entries");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ContractError("covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw LinearAlgebraError("covariance is not positive definite");
}

}  // namespace detail

/// Y = beta' X with X ~ N(mu, sigma).
class GaussianLinearModel {
 public:
  GaussianLinearModel(Eigen::VectorXd beta, Eigen::VectorXd mu, Eigen::MatrixXd sigma)
      : beta_(std::move(beta)), mu_(std::move(mu)), sigma_(std::move(sigma)) {
    if (beta_.size() != mu_.size() || sigma_.rows() != beta_.size()) {
      throw ContractError("beta, mu and sigma disagree on dimension");
    }
    check_players(static_cast<int>(beta_.size()));
    if (!beta_.allFinite() || !mu_.allFinite()) throw ContractError("non-finite model parameter");
    detail::check_covariance(sigma_);
  }

  int dimension() const { return static_cast<int>(beta_.size()); }
  const Eigen::VectorXd& beta() const { return beta_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }

  double output_variance() const { return beta_.dot(sigma_ * beta_); }

  double operator()(std::span<const double> x) const {
    double y = 0.0;
    for (int k = 0; k < dimension(); ++k) y += beta_(k) * x[static_cast<std::size_t>(k)];
    return y;
  }

 private:
  Eigen::VectorXd beta_;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
};

/// Var(E[Y | X_A]) = c' S_AA c with c = beta_A + S_AA^{-1} S_{A,Abar} beta_Abar.
inline double conditional_explained_variance(const GaussianLinearModel& model, Coalition a) {
  if (a.players() != model.dimension()) throw ContractError("coalition/model dimension mismatch");
  if (a.is_empty()) return 0.0;
  const std::vector<int> in = a.members();
  const std::vector<int> out = a.complement().members();
  const Eigen::MatrixXd s_aa = detail::block(model.sigma(), in, in);
  Eigen::VectorXd c = detail::gather(model.beta(), in);
  if (!out.empty()) {
    Eigen::LLT<Eigen::MatrixXd> llt(s_aa);
    if (llt.info() != Eigen::Success) throw LinearAlgebraError("singular conditioning block");
    const Eigen::VectorXd cross = detail::block(model.sigma(), in, out) * detail::gather(model.beta(), out);
    c += llt.solve(cross);
  }
  return c.dot(s_aa * c);
}

inline double closed_sobol(const GaussianLinearModel& model, Coalition a) {
  const double total = model.output_variance();
  if (!(total > 0.0)) throw DegenerateGameError("Gaussian linear model has zero output variance");
  if (a.bits() == full_mask(model.dimension())) return 1.0;
  return std::clamp(conditional_explained_variance(model, a) / total, 0.0, 1.0);
}

/// S^T_A = 1 - S^clos_{complement of A}.
inline double total_sobol(const GaussianLinearModel& model, Coalition a) {
  return std::clamp(1.0 - closed_sobol(model, a.complement()), 0.0, 1.0);
}

inline GameTable closed_index_table(const GaussianLinearModel& model) {
  return GameTable::from_function(model.dimension(),
                                  [&](Coalition a) { return closed_sobol(model, a); });
}

inline GameTable total_index_table(const GaussianLinearModel& model) {
  return GameTable::from_function(model.dimension(),
                                  [&](Coalition a) { return total_sobol(model, a); });
}

// ---------------------------------------------------------------------------
// Toy cases

enum class ToyCase {
  ExogenousLinear,    // Y = X1 + X2, corr(X1, X3) = rho
  UnbalancedLinear,   // Y = X1 + beta X2 + X3, corr(X2, X3) = rho
  InteractionLinear,  // Y = X1 + (1 - alpha) X2 + X1 X2, corr(X1, X2) = rho
  ShapleyJoke,        // Y = X1, corr(X1, X2) = rho
};

struct ToyCaseId {
  ToyCase kind = ToyCase::ExogenousLinear;
  double rho = 0.0;
  double beta = 1.0;   // UnbalancedLinear only
  double alpha = 0.0;  // InteractionLinear only
};

inline int toycase_players(ToyCase kind) {
  switch (kind) {
    case ToyCase::ExogenousLinear:
    case ToyCase::UnbalancedLinear: return 3;
    case ToyCase::InteractionLinear:
    case ToyCase::ShapleyJoke: return 2;
  }
  return 0;
}

inline void check_toycase(const ToyCaseId& id) {
  if (!(id.rho > -1.0 && id.rho < 1.0)) throw ContractError("rho must lie in (-1, 1)");
  if (!std::isfinite(id.beta)) throw ContractError("beta must be finite");
  if (!(id.alpha >= 0.0 && id.alpha <= 1.0)) throw ContractError("alpha must lie in [0, 1]");
}

/// Gaussian linear model behind a linear toy case. The interaction case is
/// not linear and has no such model.
inline GaussianLinearModel toycase_model(const ToyCaseId& id) {
  check_toycase(id);
  const double r = id.rho;
  switch (id.kind) {
    case ToyCase::ExogenousLinear: {
      Eigen::Matrix3d s;
      s << 1, 0, r, 0, 1, 0, r, 0, 1;
      return {Eigen::Vector3d(1, 1, 0), Eigen::Vector3d::Zero(), s};
    }
    case ToyCase::UnbalancedLinear: {
      Eigen::Matrix3d s;
      s << 1, 0, 0, 0, 1, r, 0, r, 1;
      return {Eigen::Vector3d(1, id.beta, 1), Eigen::Vector3d::Zero(), s};
    }
    case ToyCase::ShapleyJoke: {
      Eigen::Matrix2d s;
      s << 1, r, r, 1;
      return {Eigen::Vector2d(1, 0), Eigen::Vector2d::Zero(), s};
    }
    case ToyCase::InteractionLinear: break;
  }
  throw ContractError("interaction toy case has no linear model");
}

/// Y = X1 + b X2 + c X1 X2 with standard bivariate normal inputs of
/// correlation rho. Conditioning on one input leaves the other Gaussian
/// with variance 1 - rho^2, so
///   E[Var(Y | X2)] = (1 - rho^2)(1 + c^2),
///   E[Var(Y | X1)] = (1 - rho^2)(b^2 + c^2),
///   Var(Y)         = 1 + b^2 + 2 b rho + c^2 (1 + rho^2).
struct InteractionModel {
  double b = 1.0;
  double c = 1.0;
  double rho = 0.0;

  double operator()(std::span<const double> x) const { return x[0] + b * x[1] + c * x[0] * x[1]; }
  double variance() const { return 1.0 + b * b + 2.0 * b * rho + c * c * (1.0 + rho * rho); }
  double residual_given_x2() const { return (1.0 - rho * rho) * (1.0 + c * c); }
  double residual_given_x1() const { return (1.0 - rho * rho) * (b * b + c * c); }

  GameTable total_index_table() const {
    const double v = variance();
    return GameTable(2, {0.0, residual_given_x2() / v, residual_given_x1() / v, 1.0});
  }
};

/// Total-index game of a toy case.
inline GameTable toycase_game(const ToyCaseId& id) {
  check_toycase(id);
  if (id.kind == ToyCase::InteractionLinear) {
    return InteractionModel{1.0 - id.alpha, 1.0, id.rho}.total_index_table();
  }
  return total_index_table(toycase_model(id));
}

struct ReferenceAllocations {
  Allocation shapley;
  Allocation pme;
};

/// Published closed forms for the Shapley effects and PME of each toy case.
inline ReferenceAllocations toycase_reference_allocations(const ToyCaseId& id) {
  check_toycase(id);
  const double r = id.rho;
  std::vector<double> sh;
  std::vector<double> pme;
  switch (id.kind) {
    case ToyCase::ExogenousLinear:
      sh = {0.5 - r * r / 4.0, 0.5, r * r / 4.0};
      pme = {0.5, 0.5, 0.0};
      break;
    case ToyCase::UnbalancedLinear: {
      const double b = id.beta;
      const double v = 2.0 + b * b + 2.0 * r * b;
      const double q = 1.0 + b * b + 2.0 * r * b;
      sh = {1.0 / v, (b * b + b * r + 0.5 * r * r * (1.0 - b * b)) / v,
            (1.0 + b * r - 0.5 * r * r * (1.0 - b * b)) / v};
      pme = {1.0 / v, b * b * q / (1.0 + b * b) / v, q / (1.0 + b * b) / v};
      break;
    }
    case ToyCase::InteractionLinear: {
      const double a = 1.0 - id.alpha;
      const double v = 2.0 + a * a + 2.0 * a * r + r * r;
      sh = {(3.0 + r * r * a * a + 2.0 * r * a) / (2.0 * v),
            (1.0 + 2.0 * r * r + (2.0 - r * r) * a * a + 2.0 * r * a) / (2.0 * v)};
      pme = {2.0 / (3.0 + a * a), (a * a + 1.0) / (3.0 + a * a)};
      break;
    }
    case ToyCase::ShapleyJoke:
      sh = {1.0 - r * r / 2.0, r * r / 2.0};
      pme = {1.0, 0.0};
      break;
  }
  ReferenceAllocations out;
  out.shapley.shares = std::move(sh);
  out.shapley.total = 1.0;
  out.shapley.method = AllocationMethod::Shapley;
  out.pme.shares = std::move(pme);
  out.pme.total = 1.0;
  out.pme.method = AllocationMethod::PME;
  return out;
}

// ---------------------------------------------------------------------------
// Ishigami function with X ~ N(0, s^2 I) except cov(X1, X4) = rho,
// s = pi/3. X4 does not enter the model.

/// Closed-index game (4 players) in closed form. With f = sin(X1)(1 + 0.1 X3^4)
/// and g = 7 sin^2(X2) independent, and E[f] = 0,
///   Var(E[Y | X_B]) = Var(E[g | X_B]) + E[E[sin X1 | X_B]^2] E[E[h | X_B]^2]
/// where h = 1 + 0.1 X3^4. Conditioning X1 on X4 gives
/// E[sin X1 | X4] = sin(m) exp(-s2 (1 - r^2) / 2), m = (rho/s2) X4, r = rho/s2.
inline GameTable ishigami_closed_index_table(double rho) {
  const double s2 = (std::numbers::pi / 3.0) * (std::numbers::pi / 3.0);
  if (!(std::abs(rho) < s2)) throw ContractError("Ishigami covariance is not positive definite");
  const double r = rho / s2;
  const double s4 = s2 * s2;
  const double var_sin2 = ((1.0 + std::exp(-8.0 * s2)) / 2.0 - std::exp(-4.0 * s2)) / 4.0;
  const double var_g = 49.0 * var_sin2;
  const double sin1_sq = (1.0 - std::exp(-2.0 * s2)) / 2.0;
  const double sin1_given4_sq = std::exp(-s2 * (1.0 - r * r)) * (1.0 - std::exp(-2.0 * r * r * s2)) / 2.0;
  const double h_sq = 1.0 + 0.2 * 3.0 * s4 + 0.01 * 105.0 * s4 * s4;
  const double h_mean_sq = (1.0 + 0.3 * s4) * (1.0 + 0.3 * s4);
  auto explained = [&](Mask b) {
    const double g = (b & 0b0010) ? var_g : 0.0;
    const double s = (b & 0b0001) ? sin1_sq : ((b & 0b1000) ? sin1_given4_sq : 0.0);
    const double h = (b & 0b0100) ? h_sq : h_mean_sq;
    return g + s * h;
  };
  const double total = explained(0b0111);
  return GameTable::from_function(4, [&](Coalition a) {
    if (a.is_empty()) return 0.0;
    return std::clamp(explained(a.bits()) / total, 0.0, 1.0);
  });
}

inline GameTable ishigami_total_index_table(double rho) { return dual(ishigami_closed_index_table(rho)); }

}  // namespace gsa
