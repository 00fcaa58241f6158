#pragma once

// Closed-form quantities of the free-space heat kernel
//   p_t(z) = (2 pi kappa t)^{-1/2} exp(-z^2 / (2 kappa t))
// and the Gaussian moment formulas built on them.

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sheatlab {

struct KernelParams {
  double kappa{1.0};
  double t{1.0};

  void validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("kernel: kappa must be > 0");
    if (!(t > 0.0)) throw std::invalid_argument("kernel: t must be > 0");
  }
};

inline double kernel_value(const KernelParams& params, double z) {
  params.validate();
  const double var = params.kappa * params.t;
  return std::exp(-z * z / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

/// ||p_t||^2 in L^2(R) = (4 pi kappa t)^{-1/2}.
inline double kernel_l2_norm_sq(const KernelParams& params) {
  params.validate();
  return 1.0 / std::sqrt(4.0 * std::numbers::pi * params.kappa * params.t);
}

/// int_0^t ||p_s||^2 ds = sqrt(t / (pi kappa)). Defined at t = 0 (value 0).
inline double kernel_l2_time_integral(const KernelParams& params) {
  if (!(params.kappa > 0.0)) throw std::invalid_argument("kernel: kappa must be > 0");
  if (!(params.t >= 0.0)) throw std::invalid_argument("kernel: t must be >= 0");
  return std::sqrt(params.t / (std::numbers::pi * params.kappa));
}

/// E[Z^{2k}] for Z ~ N(0, variance): variance^k (2k)! / (k! 2^k) = variance^k (2k-1)!!.
inline double gaussian_even_moment(double variance, int k) {
  if (k < 1) throw std::invalid_argument("gaussian_even_moment: k must be >= 1");
  if (!(variance >= 0.0)) throw std::invalid_argument("gaussian_even_moment: variance must be >= 0");
  double m = 1.0;
  for (int j = 1; j <= k; ++j) m *= variance * (2.0 * j - 1.0);
  return m;
}

/// mu_t = (2/e) eps0^2 sqrt(t / (pi kappa)), the growth scale of the lower
/// moment bound E|u_t(x)|^{2k} >~ (mu_t k)^k.
inline double mu_t(double eps0, const KernelParams& params) {
  if (!(eps0 > 0.0)) throw std::invalid_argument("mu_t: eps0 must be > 0");
  params.validate();
  return 2.0 / std::numbers::e * eps0 * eps0 * kernel_l2_time_integral(params);
}

}  // namespace sheatlab
