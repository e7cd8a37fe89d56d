#pragma once

/**
 * @file numerics.hpp
 * @brief Scalar special functions, deterministic quadrature, and a complex
 *        Hermitian eigensolver — the numerical floor everything else stands on.
 *
 * Design notes:
 *  - All series are summed until the next term falls below 1e-16 of the
 *    running partial sum, i.e. to full double precision.
 *  - Quadrature is composite trapezoidal with fixed, caller-visible steps so
 *    that every run of the same configuration is bit-identical. Refinement is
 *    done by halving the step, never by adaptive subdivision.
 *  - Entropies are accumulated in nats and converted to the requested base
 *    once, at the boundary.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cvqkd {

inline constexpr double pi = 3.141592653589793238462643383279502884;

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/**
 * @brief Generalized exponential: the lacunary series
 *        sum_{n>=0} x^(nd+k) / (nd+k)!  for 0 <= k < d.
 *
 * For d=1,k=0 this is exp(x); for d=2 it is cosh(x) (k=0) or sinh(x) (k=1).
 * @throws std::domain_error for x < 0, d == 0 or k >= d.
 */
inline double gen_exp(unsigned d, unsigned k, double x) {
  if (d == 0) throw std::domain_error("gen_exp: d must be a positive integer");
  if (k >= d) throw std::domain_error("gen_exp: require k < d");
  if (x < 0.0 || !std::isfinite(x))
    throw std::domain_error("gen_exp: require finite x >= 0");
  if (x == 0.0) return k == 0 ? 1.0 : 0.0;

  // Leading term x^k / k!.
  double term = 1.0;
  for (unsigned j = 1; j <= k; ++j) term *= x / static_cast<double>(j);
  double sum = term;
  unsigned n = k;
  while (true) {
    for (unsigned j = 1; j <= d; ++j) term *= x / static_cast<double>(n + j);
    n += d;
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

/**
 * @brief Modified Bessel function of the first kind I_n(x) for integer
 *        order n >= 0 and x >= 0, via its ascending power series.
 * @throws std::domain_error for x < 0.
 */
inline double bessel_i(unsigned n, double x) {
  if (x < 0.0 || !std::isfinite(x))
    throw std::domain_error("bessel_i: require finite x >= 0");
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;

  const double h = 0.5 * x;
  double term = 1.0;  // (x/2)^n / n!
  for (unsigned j = 1; j <= n; ++j) term *= h / static_cast<double>(j);
  // The leading factor underflows for orders far beyond x; every later term
  // is a positive multiple of it, so the sum is zero to double precision.
  if (term == 0.0) return 0.0;
  double sum = term;
  const double h2 = h * h;
  unsigned m = 0;
  while (true) {
    term *= h2 / (static_cast<double>(m + 1) * static_cast<double>(m + 1 + n));
    ++m;
    sum += term;
    // The second test matters in the subnormal range, where 1e-16 * sum
    // itself underflows to zero and the relative test could never fire.
    if (term < 1e-16 * sum || term == 0.0) break;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/**
 * @brief Step sizes and truncation radius for outcome-space integrals.
 *
 * A radial_limit of 0 means "let the caller derive a limit from the state
 * parameters" (mean displacement plus eight standard deviations); any
 * positive value overrides that heuristic, mirroring the fixed-limit knob of
 * the original implementation.
 */
struct QuadratureSpec {
  double step = 0.01;          ///< grid step along a quadrature axis
  double radial_limit = 0.0;   ///< 0 = auto; otherwise explicit truncation
  double angular_step = 0.04;  ///< angular grid step (radians), planar only
};

/// @throws std::invalid_argument if the spec cannot drive an integral.
inline void validate(const QuadratureSpec& spec, bool planar) {
  if (!(spec.step > 0.0))
    throw std::invalid_argument("QuadratureSpec: step must be > 0");
  if (spec.radial_limit < 0.0)
    throw std::invalid_argument("QuadratureSpec: radial_limit must be >= 0");
  if (spec.radial_limit > 0.0 && !(spec.step < spec.radial_limit))
    throw std::invalid_argument("QuadratureSpec: step must be < radial_limit");
  if (planar && !(spec.angular_step > 0.0))
    throw std::invalid_argument("QuadratureSpec: angular_step must be > 0");
}

namespace detail {

/// Number of trapezoid intervals covering [lo, hi] at (at most) `step`.
inline std::size_t trapezoid_intervals(double lo, double hi, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("quadrature step must be > 0");
  if (!(hi > lo)) throw std::invalid_argument("quadrature range must be non-empty");
  const double raw = (hi - lo) / step;
  // Snap to an integer interval count so the endpoints are hit exactly;
  // the small epsilon keeps e.g. 2.0/0.1 from rounding up to 21 intervals.
  auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  return std::max<std::size_t>(n, 1);
}

/**
 * @brief Deterministic, optionally multi-threaded sum of f(i) for
 *        i in [0, n): fixed-size chunks are reduced independently and the
 *        partial sums folded in chunk order, so the result does not depend
 *        on the number of worker threads.
 */
template <typename IndexFn>
double chunked_sum(std::size_t n, unsigned threads, IndexFn&& f) {
  constexpr std::size_t chunk = 4096;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(n_chunks, 0.0);

  auto run_chunk = [&](std::size_t c) {
    const std::size_t lo = c * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += f(i);
    partial[c] = s;
  };

  if (threads <= 1 || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(n_chunks));
    std::size_t next = 0;
    std::vector<std::size_t> starts(workers);
    // Static round-robin assignment keeps the partition independent of timing.
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) starts[w] = next++;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < n_chunks; c += workers) run_chunk(c);
      });
    }
    for (auto& t : pool) t.join();
  }

  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace detail

/**
 * @brief Composite trapezoidal estimate of the integral of f over [lo, hi].
 *
 * The interval count is snapped so both endpoints are sampled exactly; a
 * constant integrand is therefore integrated exactly.
 */
template <typename F>
double integrate_line(F&& f, double lo, double hi, double step) {
  const std::size_t n = detail::trapezoid_intervals(lo, hi, step);
  const double h = (hi - lo) / static_cast<double>(n);
  double sum = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i < n; ++i) sum += f(lo + h * static_cast<double>(i));
  return sum * h;
}

/**
 * @brief Trapezoidal estimate of the polar-coordinate integral
 *        ∫∫ f(r, phi) · r · dr · dphi over r in [0, radial_limit] and
 *        phi in [angular_lo, angular_hi].
 *
 * The area Jacobian r is applied internally; callers supply the bare
 * density f(r, phi).
 */
template <typename F>
double integrate_polar(F&& f, double radial_limit, double angular_lo,
                       double angular_hi, const QuadratureSpec& spec) {
  if (!(radial_limit > 0.0))
    throw std::invalid_argument("integrate_polar: radial_limit must be > 0");
  const std::size_t nr = detail::trapezoid_intervals(0.0, radial_limit, spec.step);
  const double hr = radial_limit / static_cast<double>(nr);
  const std::size_t na =
      detail::trapezoid_intervals(angular_lo, angular_hi, spec.angular_step);
  const double ha = (angular_hi - angular_lo) / static_cast<double>(na);

  double sum = 0.0;
  for (std::size_t j = 0; j <= na; ++j) {
    const double phi = angular_lo + ha * static_cast<double>(j);
    // Radial trapezoid of f(r, phi) * r; the r = 0 node has zero weight
    // through the Jacobian, so start at i = 1.
    double col = 0.5 * f(radial_limit, phi) * radial_limit;
    for (std::size_t i = 1; i < nr; ++i) {
      const double r = hr * static_cast<double>(i);
      col += f(r, phi) * r;
    }
    col *= hr;
    sum += (j == 0 || j == na) ? 0.5 * col : col;
  }
  return sum * ha;
}

// ---------------------------------------------------------------------------
// Hermitian eigenproblem
// ---------------------------------------------------------------------------

/// Dense complex matrix in row-major order, expected Hermitian.
struct HermitianMatrix {
  std::size_t dim = 0;
  std::vector<Complex> a;  ///< dim*dim entries, row-major

  HermitianMatrix() = default;
  explicit HermitianMatrix(std::size_t n) : dim(n), a(n * n, Complex{0.0, 0.0}) {}

  Complex& operator()(std::size_t i, std::size_t j) { return a[i * dim + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return a[i * dim + j]; }
};

/// Eigenvalues sorted in descending order.
using HermitianSpectrum = std::vector<double>;

/**
 * @brief Eigenvalues of a Hermitian matrix via cyclic complex Jacobi
 *        rotations, sorted descending.
 *
 * Each rotation annihilates one off-diagonal pair exactly; sweeps repeat
 * until the off-diagonal Frobenius norm falls below 1e-12 of the full
 * Frobenius norm (at most 100 sweeps).
 *
 * @throws std::invalid_argument if the input deviates from Hermitian
 *         symmetry by more than 1e-12 in any entry.
 * @throws std::runtime_error if the sweep limit is exhausted.
 */
inline HermitianSpectrum hermitian_eigenvalues(const HermitianMatrix& m) {
  const std::size_t n = m.dim;
  if (n == 0) throw std::invalid_argument("hermitian_eigenvalues: empty matrix");
  if (m.a.size() != n * n)
    throw std::invalid_argument("hermitian_eigenvalues: storage/dim mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const Complex d = m(i, j) - std::conj(m(j, i));
      if (std::abs(d) > 1e-12)
        throw std::invalid_argument(
            "hermitian_eigenvalues: matrix is not Hermitian within 1e-12");
    }
  }
  if (n == 1) return {m(0, 0).real()};

  std::vector<Complex> w(m.a);  // working copy
  auto at = [&](std::size_t i, std::size_t j) -> Complex& { return w[i * n + j]; };

  double frob = 0.0;
  for (const Complex& z : w) frob += std::norm(z);
  frob = std::sqrt(frob);
  const double tol = 1e-12 * frob;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * std::norm(at(i, j));
    return std::sqrt(s);
  };

  bool converged = frob == 0.0 || off_norm() <= tol;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex g = at(p, q);
        const double ag = std::abs(g);
        if (ag == 0.0) continue;
        const double alpha = at(p, p).real();
        const double beta = at(q, q).real();
        // Rotation J with J_pp = c, J_pq = s e^{i theta}, J_qp = -s e^{-i theta},
        // J_qq = c zeroes (p,q) when 2 phi = atan2(2|g|, beta - alpha).
        const double phi = 0.5 * std::atan2(2.0 * ag, beta - alpha);
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        const Complex eit = g / ag;  // e^{i theta}
        const Complex se = s * eit;

        for (std::size_t i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const Complex aip = at(i, p);
          const Complex aiq = at(i, q);
          const Complex nip = c * aip - std::conj(se) * aiq;
          const Complex niq = se * aip + c * aiq;
          at(i, p) = nip;
          at(p, i) = std::conj(nip);
          at(i, q) = niq;
          at(q, i) = std::conj(niq);
        }
        const double app = c * c * alpha - 2.0 * c * s * ag + s * s * beta;
        const double aqq = s * s * alpha + 2.0 * c * s * ag + c * c * beta;
        at(p, p) = Complex{app, 0.0};
        at(q, q) = Complex{aqq, 0.0};
        at(p, q) = Complex{0.0, 0.0};
        at(q, p) = Complex{0.0, 0.0};
      }
    }
    converged = off_norm() <= tol;
  }
  if (!converged)
    throw std::runtime_error(
        "hermitian_eigenvalues: Jacobi sweeps did not converge (residual " +
        std::to_string(off_norm()) + ")");

  HermitianSpectrum ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = at(i, i).real();
  std::sort(ev.begin(), ev.end(), std::greater<double>());
  return ev;
}

// ---------------------------------------------------------------------------
// Entropy
// ---------------------------------------------------------------------------

/**
 * @brief Shannon/von Neumann entropy -sum lambda log_base(lambda) of a
 *        probability spectrum.
 *
 * Rounding dust in [-1e-10, 0) is clamped to zero before the sum check;
 * anything more negative, or a total straying from 1 by more than 1e-6,
 * is rejected rather than silently renormalized.
 */
inline double entropy_of_spectrum(const HermitianSpectrum& spectrum, unsigned base) {
  if (base < 2) throw std::invalid_argument("entropy_of_spectrum: base must be >= 2");
  double sum = 0.0;
  double h_nats = 0.0;
  for (double lambda : spectrum) {
    if (lambda < -1e-10)
      throw std::invalid_argument(
          "entropy_of_spectrum: eigenvalue " + std::to_string(lambda) +
          " below -1e-10");
    if (lambda < 0.0) lambda = 0.0;
    sum += lambda;
    if (lambda > 0.0) h_nats -= lambda * std::log(lambda);
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument(
        "entropy_of_spectrum: eigenvalues sum to " + std::to_string(sum) +
        ", expected 1 within 1e-6");
  return h_nats / std::log(static_cast<double>(base));
}

namespace detail {

/// Entropy in nats of a nonnegative weight vector already known to sum to ~1.
/// Internal hot-path variant of entropy_of_spectrum without validation.
inline double entropy_nats_unchecked(const double* p, std::size_t n) {
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

}  // namespace detail

}  // namespace cvqkd
