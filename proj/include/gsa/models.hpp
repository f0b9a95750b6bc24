#pragma once

// Benchmark models and their input laws: the Ishigami function with
// Gaussian inputs, the four-segment robot arm with copula-coupled angles and
// nested lengths, and a Gaussian law that can sample any conditional
// X_A | X_Abar.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "gsa/coalition.hpp"
#include "gsa/dataset.hpp"
#include "gsa/errors.hpp"
#include "gsa/gaussian.hpp"
#include "gsa/random.hpp"

namespace gsa {

/// sin(x1) + 7 sin^2(x2) + 0.1 x3^4 sin(x1); x4 is ignored.
inline double ishigami(std::span<const double> x) {
  const double s1 = std::sin(x[0]);
  const double s2 = std::sin(x[1]);
  const double x3sq = x[2] * x[2];
  return s1 + 7.0 * s2 * s2 + 0.1 * x3sq * x3sq * s1;
}

/// Distance from the origin to the tip of a planar arm whose i-th segment
/// has length L_i and absolute angle A_1 + ... + A_i.
inline double robot_arm(std::span<const double> lengths, std::span<const double> angles) {
  double u = 0.0;
  double v = 0.0;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    cumulative += angles[i];
    u += lengths[i] * std::cos(cumulative);
    v += lengths[i] * std::sin(cumulative);
  }
  return std::sqrt(u * u + v * v);
}

/// Robot arm on a data row laid out (A1, A2, A3, A4, L1, L2, L3, L4).
inline double robot_arm_row(std::span<const double> x) {
  return robot_arm(x.subspan(4, 4), x.subspan(0, 4));
}

/// X_A | X_Abar = x for a Gaussian law, precomputed for one coalition A.
class GaussianConditional {
 public:
  GaussianConditional(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, Coalition a)
      : d_(a.players()), in_(a.members()), out_(a.complement().members()) {
    mu_in_ = detail::gather(mu, in_);
    mu_out_ = detail::gather(mu, out_);
    const Eigen::MatrixXd s_in = detail::block(sigma, in_, in_);
    if (out_.empty()) {
      gain_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(in_.size()), 0);
      cov_ = s_in;
    } else {
      const Eigen::MatrixXd s_out = detail::block(sigma, out_, out_);
      const Eigen::MatrixXd s_cross = detail::block(sigma, in_, out_);
      Eigen::LLT<Eigen::MatrixXd> llt_out(s_out);
      if (llt_out.info() != Eigen::Success) throw LinearAlgebraError("singular conditioning block");
      chol_out_ = llt_out.matrixL();
      gain_ = llt_out.solve(s_cross.transpose()).transpose();
      cov_ = s_in - gain_ * s_cross.transpose();
      cov_ = 0.5 * (cov_ + cov_.transpose());
    }
    if (!in_.empty()) {
      Eigen::LLT<Eigen::MatrixXd> llt_in(cov_);
      if (llt_in.info() != Eigen::Success) {
        throw LinearAlgebraError("conditional covariance is not positive definite");
      }
      chol_in_ = llt_in.matrixL();
    }
  }

  int dimension() const { return d_; }
  const std::vector<int>& free_players() const { return in_; }
  const std::vector<int>& fixed_players() const { return out_; }

  Eigen::VectorXd conditional_mean(const Eigen::VectorXd& x_out) const {
    if (out_.empty()) return mu_in_;
    return mu_in_ + gain_ * (x_out - mu_out_);
  }
  const Eigen::MatrixXd& conditional_covariance() const { return cov_; }

  /// One draw of X_Abar from its marginal law.
  Eigen::VectorXd sample_conditioning(Rng& rng) const {
    Eigen::VectorXd z(static_cast<Eigen::Index>(out_.size()));
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = rng.normal();
    return mu_out_ + chol_out_ * z;
  }

  /// n draws of X_A | X_Abar = x_out, as an n x |A| matrix.
  SampleMatrix sample_free(const Eigen::VectorXd& x_out, std::size_t n, Rng& rng) const {
    const Eigen::VectorXd mean = conditional_mean(x_out);
    const auto k = static_cast<Eigen::Index>(in_.size());
    SampleMatrix draws(static_cast<Eigen::Index>(n), k);
    Eigen::VectorXd z(k);
    for (Eigen::Index r = 0; r < draws.rows(); ++r) {
      for (Eigen::Index c = 0; c < k; ++c) z(c) = rng.normal();
      draws.row(r) = (mean + chol_in_ * z).transpose();
    }
    return draws;
  }

  /// n full d-dimensional rows: fixed coordinates set to x_out, free ones
  /// drawn conditionally.
  SampleMatrix complete(const Eigen::VectorXd& x_out, std::size_t n, Rng& rng) const {
    const SampleMatrix free = sample_free(x_out, n, rng);
    SampleMatrix rows(static_cast<Eigen::Index>(n), d_);
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      for (std::size_t k = 0; k < out_.size(); ++k) rows(r, out_[k]) = x_out(static_cast<Eigen::Index>(k));
      for (std::size_t k = 0; k < in_.size(); ++k) rows(r, in_[k]) = free(r, static_cast<Eigen::Index>(k));
    }
    return rows;
  }

 private:
  int d_;
  std::vector<int> in_;
  std::vector<int> out_;
  Eigen::VectorXd mu_in_;
  Eigen::VectorXd mu_out_;
  Eigen::MatrixXd gain_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_in_;
  Eigen::MatrixXd chol_out_;
};

/// X ~ N(mu, sigma); joint and conditional sampler.
class GaussianLaw {
 public:
  GaussianLaw(Eigen::VectorXd mu, Eigen::MatrixXd sigma) : mu_(std::move(mu)), sigma_(std::move(sigma)) {
    if (mu_.size() != sigma_.rows()) throw ContractError("mean and covariance disagree on dimension");
    detail::check_covariance(sigma_);
    chol_ = Eigen::LLT<Eigen::MatrixXd>(sigma_).matrixL();
  }

  explicit GaussianLaw(const GaussianLinearModel& model) : GaussianLaw(model.mu(), model.sigma()) {}

  int dimension() const { return static_cast<int>(mu_.size()); }
  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }

  SampleMatrix sample(std::size_t n, Rng& rng) const {
    const Eigen::Index d = mu_.size();
    SampleMatrix out(static_cast<Eigen::Index>(n), d);
    Eigen::VectorXd z(d);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (Eigen::Index c = 0; c < d; ++c) z(c) = rng.normal();
      out.row(r) = (mu_ + chol_ * z).transpose();
    }
    return out;
  }

  GaussianConditional conditional(Coalition a) const { return GaussianConditional(mu_, sigma_, a); }

 private:
  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd chol_;
};

inline SampleMatrix sample_gaussian(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                    std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return GaussianLaw(mu, sigma).sample(n, rng);
}

/// n draws of X_A given X_Abar = x_bar (coordinates of Abar in ascending
/// player order), as an n x |A| matrix.
inline SampleMatrix sample_conditional_gaussian(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                                Coalition a, const Eigen::VectorXd& x_bar,
                                                std::size_t n, std::uint64_t seed) {
  const GaussianConditional cond(mu, sigma, a);
  if (x_bar.size() != static_cast<Eigen::Index>(cond.fixed_players().size())) {
    throw ContractError("conditioning vector length differs from |complement of A|");
  }
  Rng rng(seed);
  return cond.sample_free(x_bar, n, rng);
}

/// Ishigami inputs: N(0, (pi/3)^2 I) with cov(X1, X4) = rho, |rho| <= 0.99.
struct IshigamiConfig {
  double rho = 0.0;

  static constexpr double sd() { return std::numbers::pi / 3.0; }

  Eigen::MatrixXd covariance() const {
    if (!(std::abs(rho) <= 0.99)) throw ContractError("Ishigami rho must satisfy |rho| <= 0.99");
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(4, 4) * (sd() * sd());
    s(0, 3) = s(3, 0) = rho;
    return s;
  }

  GaussianLaw law() const { return GaussianLaw(Eigen::VectorXd::Zero(4), covariance()); }
};

/// Robot-arm input law. Angles: uniform on [0, 2 pi], coupled by a Gaussian
/// copula with equal pairwise correlation. Lengths: L1 ~ U(0, 1) and
/// L_i ~ U(0, L_{i-1}), drawn as running products of independent uniforms.
struct RobotInputLaw {
  double angle_copula_corr = 0.95;

  Eigen::MatrixXd copula_correlation() const {
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(4, 4, angle_copula_corr);
    r.diagonal().setOnes();
    return r;
  }

  /// n x 8 matrix, columns (A1..A4, L1..L4).
  SampleMatrix sample(std::size_t n, Rng& rng) const {
    const Eigen::MatrixXd r = copula_correlation();
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    if (llt.info() != Eigen::Success) throw LinearAlgebraError("copula correlation is not positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();
    SampleMatrix out(static_cast<Eigen::Index>(n), 8);
    Eigen::Vector4d z;
    for (Eigen::Index row = 0; row < out.rows(); ++row) {
      for (int c = 0; c < 4; ++c) z(c) = rng.normal();
      const Eigen::Vector4d g = chol * z;
      for (int c = 0; c < 4; ++c) out(row, c) = 2.0 * std::numbers::pi * normal_cdf(g(c));
      double length = 1.0;
      for (int c = 0; c < 4; ++c) {
        length *= rng.uniform();
        out(row, 4 + c) = length;
      }
    }
    return out;
  }
};

inline SampleMatrix sample_robot_inputs(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw ContractError("sample_robot_inputs needs n >= 1");
  Rng rng(seed);
  return RobotInputLaw{}.sample(n, rng);
}

/// Robot-arm inputs with the model output attached.
inline DataSet robot_dataset(std::size_t n, std::uint64_t seed) {
  SampleMatrix x = sample_robot_inputs(n, seed);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) y(r) = robot_arm_row({x.row(r).data(), 8});
  return DataSet(std::move(x), std::move(y));
}

}  // namespace gsa
