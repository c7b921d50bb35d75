#include "detkey/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "detkey/numfmt.hpp"
#include "detkey/rng.hpp"

namespace detkey::gaussian {

namespace {

// ===== Shared integrand pieces =====

// log2(1 + k^2 P / sZ) as a function of the gain draw
double f_gain(double k, const GaussianParams& g) {
  return std::log2(1.0 + k * k * g.p / g.sigma_z_sq);
}

// 1/2 log2(1 + x^2 sK / sZ) as a function of one input draw
double f_input(double x, const GaussianParams& g) {
  return 0.5 * std::log2(1.0 + x * x * g.sigma_k_sq / g.sigma_z_sq);
}

// 1/2 log2(1 + xa^2 xb^2 sK^2 / ((xa^2+xb^2) sK sZ + sZ^2))
double f_cross(double xa, double xb, const GaussianParams& g) {
  const double xa2 = xa * xa, xb2 = xb * xb;
  const double num = xa2 * xb2 * g.sigma_k_sq * g.sigma_k_sq;
  const double den =
      (xa2 + xb2) * g.sigma_k_sq * g.sigma_z_sq + g.sigma_z_sq * g.sigma_z_sq;
  return 0.5 * std::log2(1.0 + num / den);
}

// ===== Monte Carlo =====

// Counter lanes for the three independent Gaussian streams.
constexpr std::uint64_t kLaneGain = 10;
constexpr std::uint64_t kLaneInputA = 11;
constexpr std::uint64_t kLaneInputB = 12;

constexpr std::uint64_t kChunk = 65536;

// Box-Muller from two counter words. u1 is shifted into (0, 1] so the log
// never sees zero.
double normal_draw(std::uint64_t seed, std::uint64_t lane, std::uint64_t i) {
  const std::uint64_t w1 = rng::counter_word(seed, lane, i, 0);
  const std::uint64_t w2 = rng::counter_word(seed, lane, i, 1);
  const double u1 = static_cast<double>((w1 >> 11) + 1) * 0x1p-53;
  const double u2 = static_cast<double>(w2 >> 11) * 0x1p-53;
  constexpr double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

struct ChunkSums {
  double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
  double v = 0.0, v2 = 0.0;
};

ChunkSums run_chunk(const GaussianParams& g, std::uint64_t seed,
                    std::uint64_t first, std::uint64_t last) {
  const double s_k = std::sqrt(g.sigma_k_sq);
  const double s_x = std::sqrt(g.p);
  ChunkSums out;
  for (std::uint64_t i = first; i < last; ++i) {
    const double k = s_k * normal_draw(seed, kLaneGain, i);
    const double xa = s_x * normal_draw(seed, kLaneInputA, i);
    const double xb = s_x * normal_draw(seed, kLaneInputB, i);
    const double f1 = f_gain(k, g);
    const double f2 = f_input(xa, g);
    const double f3 = f_input(xb, g);
    const double f4 = f_cross(xa, xb, g);
    const double v = f1 - f2 - f3 + f4;
    out.t1 += f1;
    out.t2 += f2;
    out.t3 += f3;
    out.t4 += f4;
    out.v += v;
    out.v2 += v * v;
  }
  return out;
}

// ===== Adaptive Simpson =====

constexpr double kTailSd = 10.0;  // integration cutoff in standard deviations
constexpr long kEvalBudget = 40'000'000;
constexpr int kMaxDepth = 48;

double std_normal_pdf(double t) {
  constexpr double inv_sqrt_2pi = 0.39894228040143267793994605993438;
  return inv_sqrt_2pi * std::exp(-0.5 * t * t);
}

struct QuadCtx {
  long evals = 0;
  bool exceeded = false;
};

template <typename F>
double simpson(F&& f, double a, double b, double fa, double fm, double fb) {
  (void)f;
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adapt(F&& f, double a, double b, double fa, double fm, double fb,
             double whole, double eps, int depth, QuadCtx& ctx) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  ctx.evals += 2;
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  if (depth <= 0 || ctx.evals > kEvalBudget) {
    ctx.exceeded = true;
    return left + right + delta / 15.0;
  }
  return adapt(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1, ctx) +
         adapt(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1, ctx);
}

// Coarse fixed-panel Simpson, used only to set the absolute tolerance scale.
template <typename F>
double rough_simpson(F&& f, double a, double b, int panels, QuadCtx& ctx) {
  const double h = (b - a) / panels;
  double acc = 0.0;
  double fl = f(a);
  ctx.evals += 1;
  for (int i = 0; i < panels; ++i) {
    const double l = a + i * h;
    const double fm = f(l + 0.5 * h);
    const double fr = f(l + h);
    ctx.evals += 2;
    acc += h / 6.0 * (fl + 4.0 * fm + fr);
    fl = fr;
  }
  return acc;
}

template <typename F>
double integrate(F&& f, double a, double b, double eps_abs, QuadCtx& ctx) {
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  ctx.evals += 3;
  const double whole = simpson(f, a, m, fa, fm, fb);
  return adapt(f, a, b, fa, fm, fb, whole, eps_abs, kMaxDepth, ctx);
}

// The bound is a difference of terms, so each term aims a factor below the
// requested tolerance to keep the combined value inside it.
constexpr double kTermSlack = 0.25;

// E[g(|Z|) form] for an even integrand: 2 int_0^tail pdf(t) h(t) dt.
template <typename F>
double half_line(F&& h, double rel_tol, QuadCtx& ctx) {
  auto f = [&](double t) { return std_normal_pdf(t) * h(t); };
  const double rough = rough_simpson(f, 0.0, kTailSd, 128, ctx);
  const double eps = std::max(std::abs(rough) * rel_tol * kTermSlack, 1e-300);
  return 2.0 * integrate(f, 0.0, kTailSd, eps, ctx);
}

}  // namespace

// ===== Public API =====

void GaussianParams::validate() const {
  if (!std::isfinite(p) || p <= 0.0)
    throw std::invalid_argument("gaussian: p must be finite and > 0");
  if (!std::isfinite(sigma_k_sq) || sigma_k_sq < 0.0)
    throw std::invalid_argument("gaussian: sigma_k_sq must be finite and >= 0");
  if (!std::isfinite(sigma_z_sq) || sigma_z_sq <= 0.0)
    throw std::invalid_argument("gaussian: sigma_z_sq must be finite and > 0");
}

QuadratureError::QuadratureError(const BoundEstimate& best_so_far)
    : std::runtime_error("quadrature did not converge within its budget"),
      best(best_so_far) {}

BoundEstimate theorem1_mc(const GaussianParams& params, std::uint64_t n_samples,
                          std::uint64_t seed, int workers) {
  params.validate();
  if (n_samples < 1)
    throw std::invalid_argument("gaussian: n_samples must be >= 1");
  if (workers < 1) throw std::invalid_argument("gaussian: workers must be >= 1");

  BoundEstimate est;
  est.method = Method::MonteCarlo;
  if (params.sigma_k_sq == 0.0) return est;  // all terms vanish identically

  const std::uint64_t n_chunks = (n_samples + kChunk - 1) / kChunk;
  std::vector<ChunkSums> chunks(n_chunks);
  const int n_threads =
      static_cast<int>(std::min<std::uint64_t>(workers, n_chunks));
  if (n_threads <= 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c)
      chunks[c] = run_chunk(params, seed, c * kChunk,
                            std::min(n_samples, (c + 1) * kChunk));
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t c = w; c < n_chunks; c += n_threads)
          chunks[c] = run_chunk(params, seed, c * kChunk,
                                std::min(n_samples, (c + 1) * kChunk));
      });
    }
    for (auto& t : pool) t.join();
  }

  // Merge in chunk order so the result does not depend on the worker count.
  ChunkSums tot;
  for (const ChunkSums& c : chunks) {
    tot.t1 += c.t1;
    tot.t2 += c.t2;
    tot.t3 += c.t3;
    tot.t4 += c.t4;
    tot.v += c.v;
    tot.v2 += c.v2;
  }

  const double n = static_cast<double>(n_samples);
  est.terms = {tot.t1 / n, tot.t2 / n, tot.t3 / n, tot.t4 / n};
  est.value = est.terms[0] - est.terms[1] - est.terms[2] + est.terms[3];
  if (n_samples >= 2) {
    const double mean = tot.v / n;
    const double var = std::max(0.0, (tot.v2 - n * mean * mean) / (n - 1.0));
    est.std_error = std::sqrt(var / n);
  } else {
    est.std_error = std::numeric_limits<double>::infinity();
  }
  return est;
}

BoundEstimate theorem1_quadrature(const GaussianParams& params, double rel_tol) {
  params.validate();
  if (!std::isfinite(rel_tol) || rel_tol <= 0.0 || rel_tol > 1e-2)
    throw std::invalid_argument("gaussian: rel_tol must lie in (0, 1e-2]");

  BoundEstimate est;
  est.method = Method::Quadrature;
  if (params.sigma_k_sq == 0.0) return est;  // all terms vanish identically

  QuadCtx ctx;
  const GaussianParams& g = params;
  const double s_k = std::sqrt(g.sigma_k_sq);
  const double s_x = std::sqrt(g.p);

  est.terms[0] =
      half_line([&](double t) { return f_gain(s_k * t, g); }, rel_tol, ctx);
  est.terms[1] =
      half_line([&](double t) { return f_input(s_x * t, g); }, rel_tol, ctx);
  est.terms[2] = est.terms[1];  // X_A and X_B share one distribution

  // Two-dimensional term: outer adaptive pass over one input, inner adaptive
  // pass over the other. Even in each variable, so the positive quadrant
  // carries a factor of 4.
  {
    auto plane = [&](double s, double t) {
      return std_normal_pdf(s) * std_normal_pdf(t) *
             f_cross(s_x * s, s_x * t, g);
    };
    auto rough_inner = [&](double s) {
      return rough_simpson([&](double t) { return plane(s, t); }, 0.0, kTailSd,
                           32, ctx);
    };
    const double rough = rough_simpson(rough_inner, 0.0, kTailSd, 32, ctx);
    const double eps_outer =
        std::max(std::abs(rough) * rel_tol * kTermSlack, 1e-300);
    const double eps_inner = eps_outer / (4.0 * kTailSd);
    auto inner = [&](double s) {
      return integrate([&](double t) { return plane(s, t); }, 0.0, kTailSd,
                       eps_inner, ctx);
    };
    est.terms[3] = 4.0 * integrate(inner, 0.0, kTailSd, eps_outer, ctx);
  }

  est.value = est.terms[0] - est.terms[1] - est.terms[2] + est.terms[3];
  if (ctx.exceeded) throw QuadratureError(est);
  return est;
}

double pilot_rate_gaussian(double snr_a, double snr_b) {
  if (!std::isfinite(snr_a) || snr_a <= 0.0 || !std::isfinite(snr_b) ||
      snr_b <= 0.0)
    throw std::invalid_argument("gaussian: snr values must be finite and > 0");
  const double r = 0.25 * std::min(std::log2(snr_a), std::log2(snr_b));
  return r > 0.0 ? r : 0.0;
}

double static_secure_rate_gaussian(double snr_a, double snr_b, double snr_e1,
                                   double snr_e2) {
  if (!std::isfinite(snr_e1) || snr_e1 <= 0.0 || !std::isfinite(snr_e2) ||
      snr_e2 <= 0.0)
    throw std::invalid_argument("gaussian: snr values must be finite and > 0");
  if (!std::isfinite(snr_a) || snr_a <= 0.0 || !std::isfinite(snr_b) ||
      snr_b <= 0.0)
    throw std::invalid_argument("gaussian: snr values must be finite and > 0");
  const double legit = std::min(std::log2(snr_a), std::log2(snr_b));
  const double eve = std::min(std::log2(snr_e1), std::log2(snr_e2));
  const double r = 0.25 * (legit - eve);
  return r > 0.0 ? r : 0.0;
}

std::string bound_csv_header() {
  return "p,sigma_k_sq,sigma_z_sq,method,value,std_error,term1,term2,term3,"
         "term4";
}

std::string bound_csv_row(const GaussianParams& params,
                          const BoundEstimate& est) {
  std::string out;
  out += num_g12(params.p);
  out += ',';
  out += num_g12(params.sigma_k_sq);
  out += ',';
  out += num_g12(params.sigma_z_sq);
  out += ',';
  out += est.method == Method::MonteCarlo ? "mc" : "quad";
  out += ',';
  out += num_g12(est.value);
  out += ',';
  out += num_g12(est.std_error);
  for (double t : est.terms) {
    out += ',';
    out += num_g12(t);
  }
  return out;
}

}  // namespace detkey::gaussian
