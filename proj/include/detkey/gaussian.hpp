#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

// Numerical evaluation of the Gaussian mutual-information lower bound
//
//   value = E_K log2(1 + k^2 P / sZ)
//         - 1/2 E_XA log2(1 + xa^2 sK / sZ)
//         - 1/2 E_XB log2(1 + xb^2 sK / sZ)
//         + 1/2 E_XA,XB log2(1 + xa^2 xb^2 sK^2 / ((xa^2+xb^2) sK sZ + sZ^2))
//
// with K ~ N(0, sK), X_A, X_B ~ N(0, P), in bits. Both a Monte Carlo
// estimator and an adaptive-quadrature evaluator are provided so each can
// serve as the other's oracle.

namespace detkey::gaussian {

struct GaussianParams {
  double p = 1.0;           // input power P
  double sigma_k_sq = 1.0;  // channel-gain variance
  double sigma_z_sq = 1.0;  // noise variance

  void validate() const;  // throws std::invalid_argument
};

enum class Method { MonteCarlo, Quadrature };

struct BoundEstimate {
  double value = 0.0;
  double std_error = 0.0;  // Monte Carlo only, 0 for quadrature
  std::array<double, 4> terms{};  // value = terms[0]-terms[1]-terms[2]+terms[3]
  Method method = Method::Quadrature;

  // the bound may be negative; a key rate is not
  double value_clamped() const { return value > 0.0 ? value : 0.0; }
};

// Thrown when quadrature fails to reach the tolerance within its evaluation
// budget; carries the best estimate reached.
struct QuadratureError : std::runtime_error {
  BoundEstimate best;
  explicit QuadratureError(const BoundEstimate& best_so_far);
};

// Deterministic in (seed, n_samples): samples come from a counter generator,
// partial sums are combined in fixed-size chunks, so any worker count
// produces bit-identical results.
BoundEstimate theorem1_mc(const GaussianParams& params, std::uint64_t n_samples,
                          std::uint64_t seed, int workers = 1);

// Adaptive Simpson on [0, 10] standard deviations (even integrands, the tail
// beyond contributes < 1e-20 relative), nested for the two-dimensional term.
// rel_tol must lie in (0, 1e-2].
BoundEstimate theorem1_quadrature(const GaussianParams& params, double rel_tol);

// 1/4 min(log2 snr_a, log2 snr_b), clamped at zero.
double pilot_rate_gaussian(double snr_a, double snr_b);

// 1/4 (min(log2 snr_a, log2 snr_b) - min(log2 snr_e1, log2 snr_e2)),
// clamped at zero.
double static_secure_rate_gaussian(double snr_a, double snr_b, double snr_e1,
                                   double snr_e2);

// "p,sigma_k_sq,sigma_z_sq,method,value,std_error,term1,term2,term3,term4"
std::string bound_csv_header();
std::string bound_csv_row(const GaussianParams& params, const BoundEstimate& est);

}  // namespace detkey::gaussian
