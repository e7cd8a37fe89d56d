#pragma once

/**
 * @file infotheory.hpp
 * @brief Information-theoretic quantities of the protocol: the eavesdropper's
 *        Holevo bounds for direct and reverse reconciliation, and the
 *        receiver's mutual information.
 *
 * The eavesdropper collects the reflected beam-splitter port, so she holds
 * one of d pure states on a ring of radius sqrt(1-eta)|alpha|. Diagonalizing
 * their uniform mixture is a discrete Fourier transform of the overlap
 * sequence <e_0|e_k>; the resulting weights |c_l|^2 drive everything else.
 *
 * All entropic quantities are returned in base d (one "dit" = one perfectly
 * distinguishable ring symbol).
 */

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "likelihood.hpp"
#include "numerics.hpp"
#include "states.hpp"

namespace cvqkd {

/// Which party's string is the reconciliation reference.
enum class ReconciliationMode { Direct, Reverse };

/// Weights |c_l|^2 of the orthogonal decomposition of Eve's uniform mixture.
struct EveCoefficients {
  std::vector<double> magnitude_sq;  ///< d entries, nonnegative, summing to 1
};

/**
 * @brief Overlap <e_0|e_k> of the eavesdropper's states k and 0 on her ring
 *        of radius sqrt(1-eta)|alpha|.
 *
 * For coherent signals this is exp(-(1-eta)|alpha|^2 (1 - e^{i 2 pi k/d}));
 * squeezed signals pick up a modified magnitude and the same style of phase,
 * both delegated to squeezed_overlap.
 */
inline Complex eve_overlap(const Constellation& c, double eta, unsigned k) {
  validate(c);
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("eve_overlap: eta must lie in [0, 1]");
  if (k >= c.d) throw std::out_of_range("eve_overlap: k must lie in [0, d)");
  const double radius = std::sqrt(1.0 - eta) * c.amplitude;
  const Complex e0{radius, 0.0};
  const Complex ek = std::polar(radius, 2.0 * pi * k / static_cast<double>(c.d));
  // <e_0|e_k> is the overlap functional with e_k on the ket side.
  return squeezed_overlap(ek, e0, c.squeeze_r);
}

/**
 * @brief Weights |c_l|^2 from the inverse discrete Fourier transform of the
 *        overlap sequence: c_l = (1/d) sum_k e^{-i 2 pi k l / d} <e_0|e_k>.
 *
 * The transform of a valid overlap sequence is real and nonnegative up to
 * rounding; dust in [-1e-10, 0) is clamped to zero.
 *
 * @throws std::runtime_error when the decomposition fails: an imaginary
 *         residue >= 1e-10, a weight below -1e-10 (the symmetric-state
 *         ansatz genuinely breaks down there, which happens for some strongly
 *         squeezed rings), or a total straying from 1 by more than 1e-8.
 */
inline EveCoefficients eve_coefficients(const Constellation& c, double eta) {
  const unsigned d = c.d;
  std::vector<Complex> ov(d);
  for (unsigned k = 0; k < d; ++k) ov[k] = eve_overlap(c, eta, k);

  EveCoefficients out;
  out.magnitude_sq.resize(d);
  double sum = 0.0;
  for (unsigned l = 0; l < d; ++l) {
    Complex cl{0.0, 0.0};
    for (unsigned k = 0; k < d; ++k) {
      const double arg = -2.0 * pi * static_cast<double>(k) *
                         static_cast<double>(l) / static_cast<double>(d);
      cl += std::polar(1.0, arg) * ov[k];
    }
    cl /= static_cast<double>(d);
    if (std::abs(cl.imag()) >= 1e-10)
      throw std::runtime_error(
          "eve_coefficients: imaginary residue " + std::to_string(cl.imag()) +
          " in weight " + std::to_string(l));
    double w = cl.real();
    if (w < -1e-10)
      throw std::runtime_error(
          "eve_coefficients: weight " + std::to_string(l) + " = " +
          std::to_string(w) +
          " is negative; the symmetric decomposition does not exist for "
          "these ring parameters");
    if (w < 0.0) w = 0.0;
    out.magnitude_sq[l] = w;
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-8)
    throw std::runtime_error("eve_coefficients: weights sum to " +
                             std::to_string(sum) + ", expected 1 within 1e-8");
  return out;
}

/**
 * @brief Holevo bound for direct reconciliation, base d:
 *        the entropy of Eve's uniform mixture, -sum_l |c_l|^2 log_d |c_l|^2.
 */
inline double chi_direct(const Constellation& c, double eta) {
  const EveCoefficients ec = eve_coefficients(c, eta);
  return entropy_of_spectrum(ec.magnitude_sq, c.d);
}

namespace detail {

/**
 * @brief Reusable machinery for the reverse-reconciliation bound at a fixed
 *        ring and transmittance: ring weights, their square roots, the
 *        circulant phase table, and scratch space for the conditional
 *        density matrix.
 *
 * The conditional state of the eavesdropper given the receiver's outcome has
 * entries rho_{n,m} = |c_n||c_m| sigma_{(n-m) mod d} with
 * sigma_k = sum_l e^{-i 2 pi k (l+1) / d} u_l, where u is the posterior over
 * ring symbols. (The l+1 offset is a pure relabeling; any fixed offset gives
 * the same spectrum.)
 */
struct ReverseEngine {
  unsigned d = 2;
  std::vector<double> cmag;     ///< |c_l|
  std::vector<Complex> phase;   ///< phase[k*d + l] = e^{-i 2 pi k (l+1) / d}
  double chi_dr = 0.0;          ///< direct bound, base d

  ReverseEngine(const Constellation& c, double eta) : d(c.d) {
    const EveCoefficients ec = eve_coefficients(c, eta);
    chi_dr = entropy_of_spectrum(ec.magnitude_sq, d);
    cmag.resize(d);
    for (unsigned l = 0; l < d; ++l) cmag[l] = std::sqrt(ec.magnitude_sq[l]);
    phase.resize(static_cast<std::size_t>(d) * d);
    for (unsigned k = 0; k < d; ++k)
      for (unsigned l = 0; l < d; ++l)
        phase[static_cast<std::size_t>(k) * d + l] = std::polar(
            1.0, -2.0 * pi * static_cast<double>(k) *
                     static_cast<double>(l + 1) / static_cast<double>(d));
  }

  /// Conditional density matrix for posterior weights u (u sums to 1).
  HermitianMatrix density(const double* u) const {
    std::vector<Complex> sigma(d);
    for (unsigned k = 0; k < d; ++k) {
      Complex s{0.0, 0.0};
      const Complex* row = &phase[static_cast<std::size_t>(k) * d];
      for (unsigned l = 0; l < d; ++l) s += row[l] * u[l];
      sigma[k] = s;
    }
    HermitianMatrix rho(d);
    for (unsigned n = 0; n < d; ++n) {
      for (unsigned m = 0; m < d; ++m) {
        const unsigned k = (n >= m) ? (n - m) : (n + d - m);
        rho(n, m) = cmag[n] * cmag[m] * sigma[k];
      }
    }
    return rho;
  }

  /// Entropy (base d) of the conditional state for posterior weights u.
  double conditional_entropy(const double* u) const {
    const HermitianSpectrum ev = hermitian_eigenvalues(density(u));
    return entropy_of_spectrum(ev, d);
  }
};

}  // namespace detail

/**
 * @brief Eavesdropper's conditional density matrix given a homodyne outcome,
 *        in the orthogonal ring basis.
 */
inline HermitianMatrix rr_density_matrix(const Constellation& c,
                                         const ChannelPoint& ch,
                                         HomodyneOutcome out) {
  detail::ReverseEngine eng(c, ch.eta);
  const std::vector<double> u = posterior(c, ch, out);
  return eng.density(u.data());
}

/// Dual-homodyne overload of rr_density_matrix.
inline HermitianMatrix rr_density_matrix(const Constellation& c,
                                         const ChannelPoint& ch,
                                         PolarOutcome out) {
  detail::ReverseEngine eng(c, ch.eta);
  const std::vector<double> u = posterior(c, ch, out);
  return eng.density(u.data());
}

namespace detail {

inline double chi_reverse_impl(const detail::ReverseEngine& eng,
                               const std::vector<double>& u) {
  const double chi = eng.chi_dr - eng.conditional_entropy(u.data());
  // The bound is nonnegative by construction; shave off rounding dust.
  return (chi < 0.0 && chi > -1e-9) ? 0.0 : chi;
}

}  // namespace detail

/**
 * @brief Holevo bound for reverse reconciliation at one homodyne outcome,
 *        base d: the direct bound minus the entropy of Eve's state
 *        conditioned on that outcome.
 */
inline double chi_reverse(const Constellation& c, const ChannelPoint& ch,
                          HomodyneOutcome out) {
  detail::ReverseEngine eng(c, ch.eta);
  return detail::chi_reverse_impl(eng, posterior(c, ch, out));
}

/// Dual-homodyne overload of chi_reverse.
inline double chi_reverse(const Constellation& c, const ChannelPoint& ch,
                          PolarOutcome out) {
  detail::ReverseEngine eng(c, ch.eta);
  return detail::chi_reverse_impl(eng, posterior(c, ch, out));
}

namespace detail {

/// Truncation radius for homodyne outcome integrals: peak mean + 8 sigma,
/// unless the spec carries an explicit override.
inline double line_limit(const Constellation& c, const ChannelPoint& ch,
                         const HomodyneModel& m, const QuadratureSpec& q) {
  if (q.radial_limit > 0.0) return q.radial_limit;
  return std::sqrt(ch.eta) * c.amplitude + 8.0 * m.sigma;
}

/// Truncation radius for dual-homodyne outcome integrals.
inline double polar_limit(const Constellation& c, const ChannelPoint& ch,
                          const PolarModel& m, const QuadratureSpec& q) {
  if (q.radial_limit > 0.0) return q.radial_limit;
  return std::sqrt(0.5 * ch.eta) * c.amplitude + 8.0 * m.sigma;
}

/// Hard cap for stack-allocated per-node buffers in the integration loops.
inline constexpr unsigned max_ring_size = 64;

inline void check_ring_size(unsigned d) {
  if (d > max_ring_size)
    throw std::invalid_argument("ring size d above supported maximum (64)");
}

}  // namespace detail

/**
 * @brief Mutual information I(A:B) between the ring symbol and the outcome
 *        of the chosen measurement, in base d:
 *        I = 1 - ∫ p(outcome) H_d(posterior(outcome)) d(outcome).
 *
 * Integrates over the full line (homodyne) or full plane (dual homodyne),
 * truncated at mean + 8 sigma unless the spec overrides the limit.
 */
inline double mutual_information(const Constellation& c, const ChannelPoint& ch,
                                 Scheme scheme, const QuadratureSpec& quad = {}) {
  validate(quad, scheme == Scheme::DualHomodyne);
  detail::check_ring_size(c.d);
  const double ln_d = std::log(static_cast<double>(c.d));
  double cond = 0.0;  // ∫ p * H(posterior), in nats

  if (scheme == Scheme::Homodyne) {
    detail::HomodyneModel m(c, ch);
    const double limit = detail::line_limit(c, ch, m, quad);
    cond = integrate_line(
        [&](double bx) {
          double x[detail::max_ring_size];
          double u[detail::max_ring_size];
          double psum = 0.0;
          for (unsigned k = 0; k < m.d; ++k) {
            x[k] = m.exponent(k, bx);
            psum += std::exp(-x[k]);
          }
          if (psum == 0.0 || !detail::posterior_from_exponents(x, m.d, u))
            return 0.0;
          const double p = m.prefactor * psum / static_cast<double>(m.d);
          return p * detail::entropy_nats_unchecked(u, m.d);
        },
        -limit, limit, quad.step);
  } else {
    detail::PolarModel m(c, ch);
    const double limit = detail::polar_limit(c, ch, m, quad);
    cond = integrate_polar(
        [&](double br, double phi) {
          double x[detail::max_ring_size];
          double u[detail::max_ring_size];
          double psum = 0.0;
          for (unsigned k = 0; k < m.d; ++k) {
            x[k] = m.exponent(k, br, phi);
            psum += std::exp(-x[k]);
          }
          if (psum == 0.0 || !detail::posterior_from_exponents(x, m.d, u))
            return 0.0;
          const double p = m.prefactor * psum / static_cast<double>(m.d);
          return p * detail::entropy_nats_unchecked(u, m.d);
        },
        limit, 0.0, 2.0 * pi, quad);
  }
  return 1.0 - cond / ln_d;
}

}  // namespace cvqkd
