#pragma once

/**
 * @file likelihood.hpp
 * @brief Measurement-outcome distributions at the receiver for homodyne
 *        (one quadrature) and dual-homodyne (both quadratures, polar form)
 *        detection, with optional squeezing and detector excess noise.
 *
 * Conventions:
 *  - Transmittance eta scales the mean amplitude by sqrt(eta) (homodyne) or
 *    sqrt(eta/2) (dual homodyne, which splits the signal once more).
 *  - Excess detector noise delta broadens every variance by (1 + delta); it
 *    is a property of the receiver and never touches the environment side.
 *  - Squeezing r rescales the homodyne variance to (1+delta)/(2(1+tanh r)).
 *    Dual homodyne is defined for coherent signals only (r must be 0).
 */

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "states.hpp"

namespace cvqkd {

/// Which receiver measurement the protocol uses.
enum class Scheme { Homodyne, DualHomodyne };

/// Transmission/detection operating point.
struct ChannelPoint {
  double eta = 1.0;    ///< beam-splitter transmittance in [0, 1]
  double delta = 0.0;  ///< excess detector noise, >= 0
};

/// @throws std::invalid_argument when outside the physical domain.
inline void validate(const ChannelPoint& ch) {
  if (!(ch.eta >= 0.0 && ch.eta <= 1.0))
    throw std::invalid_argument("ChannelPoint: eta must lie in [0, 1]");
  if (!(ch.delta >= 0.0))
    throw std::invalid_argument("ChannelPoint: delta must be >= 0");
}

/// Single-quadrature (homodyne) measurement outcome.
struct HomodyneOutcome {
  double beta_x = 0.0;
};

/// Dual-homodyne outcome in polar form: radius beta_r >= 0, angle phi.
struct PolarOutcome {
  double beta_r = 0.0;
  double phi = 0.0;
};

namespace detail {

/// Precomputed per-state quantities for the homodyne likelihood.
struct HomodyneModel {
  unsigned d = 2;
  std::vector<double> mean;  ///< sqrt(eta) * |alpha| * cos(2 pi k / d - chi)
  double inv_width = 1.0;    ///< (1 + tanh r) / (1 + delta)
  double prefactor = 1.0;    ///< 1 / (cosh r * sqrt(pi (1 - tanh r)(1 + delta)))
  double sigma = 0.0;        ///< standard deviation of each Gaussian branch

  HomodyneModel(const Constellation& c, const ChannelPoint& ch) {
    validate(c);
    validate(ch);
    d = c.d;
    const double t = std::tanh(c.squeeze_r);
    const double noise = 1.0 + ch.delta;
    inv_width = (1.0 + t) / noise;
    prefactor = 1.0 / (std::cosh(c.squeeze_r) * std::sqrt(pi * (1.0 - t) * noise));
    sigma = std::sqrt(noise / (2.0 * (1.0 + t)));
    const double amp = std::sqrt(ch.eta) * c.amplitude;
    mean.resize(d);
    for (unsigned k = 0; k < d; ++k)
      mean[k] = amp * std::cos(2.0 * pi * k / static_cast<double>(d) - c.axis_angle);
  }

  /// Positive exponent X_k with p_k = prefactor * exp(-X_k).
  double exponent(unsigned k, double beta_x) const {
    const double dlt = beta_x - mean[k];
    return inv_width * dlt * dlt;
  }
};

/// Precomputed per-state quantities for the dual-homodyne likelihood.
struct PolarModel {
  unsigned d = 2;
  std::vector<double> angle;  ///< 2 pi k / d - chi
  double bias = 0.0;          ///< (eta/2) |alpha|^2 / (1 + delta)
  double cross = 0.0;         ///< sqrt(2 eta) |alpha| / (1 + delta)
  double inv_noise = 1.0;     ///< 1 / (1 + delta)
  double prefactor = 1.0;     ///< 1 / (pi (1 + delta))
  double sigma = 0.0;         ///< per-axis standard deviation

  PolarModel(const Constellation& c, const ChannelPoint& ch) {
    validate(c);
    validate(ch);
    if (c.squeeze_r != 0.0)
      throw std::invalid_argument(
          "dual-homodyne likelihood is defined for coherent states only "
          "(squeeze_r must be 0)");
    d = c.d;
    const double noise = 1.0 + ch.delta;
    inv_noise = 1.0 / noise;
    bias = 0.5 * ch.eta * c.amplitude * c.amplitude / noise;
    cross = std::sqrt(2.0 * ch.eta) * c.amplitude / noise;
    prefactor = 1.0 / (pi * noise);
    sigma = std::sqrt(0.5 * noise);
    angle.resize(d);
    for (unsigned k = 0; k < d; ++k)
      angle[k] = 2.0 * pi * k / static_cast<double>(d) - c.axis_angle;
  }

  /// Positive exponent X_k with p_k = prefactor * exp(-X_k).
  double exponent(unsigned k, double beta_r, double phi) const {
    return beta_r * beta_r * inv_noise + bias -
           cross * beta_r * std::cos(angle[k] + phi);
  }
};

/**
 * @brief Normalized posterior weights from positive exponents X_k
 *        (p_k proportional to exp(-X_k)), shifted by the minimum exponent for
 *        stability.
 * @return false when every exponent is non-finite (numerically dead point).
 */
inline bool posterior_from_exponents(const double* x, std::size_t n, double* out) {
  double xmin = x[0];
  for (std::size_t k = 1; k < n; ++k) xmin = std::min(xmin, x[k]);
  if (!std::isfinite(xmin)) return false;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = std::exp(-(x[k] - xmin));
    sum += out[k];
  }
  for (std::size_t k = 0; k < n; ++k) out[k] /= sum;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Homodyne
// ---------------------------------------------------------------------------

/**
 * @brief Conditional density p(beta_x | state k): a Gaussian centred at
 *        sqrt(eta) |alpha| cos(2 pi k / d - chi) with variance
 *        (1 + delta) / (2 (1 + tanh r)).
 * @throws std::out_of_range for k >= d.
 */
inline double p_bx_given_k(const Constellation& c, const ChannelPoint& ch,
                           unsigned k, HomodyneOutcome out) {
  detail::HomodyneModel m(c, ch);
  if (k >= m.d) throw std::out_of_range("p_bx_given_k: k must lie in [0, d)");
  return m.prefactor * std::exp(-m.exponent(k, out.beta_x));
}

/// Mixture density p(beta_x) = (1/d) sum_k p(beta_x | k).
inline double p_bx(const Constellation& c, const ChannelPoint& ch,
                   HomodyneOutcome out) {
  detail::HomodyneModel m(c, ch);
  double s = 0.0;
  for (unsigned k = 0; k < m.d; ++k) s += std::exp(-m.exponent(k, out.beta_x));
  return m.prefactor * s / static_cast<double>(m.d);
}

// ---------------------------------------------------------------------------
// Dual homodyne
// ---------------------------------------------------------------------------

/**
 * @brief Conditional density p(beta_r, phi | state k) for dual-homodyne
 *        detection of a coherent signal: a unit-total-mass planar Gaussian of
 *        per-axis variance (1 + delta)/2 centred at sqrt(eta/2) alpha_k,
 *        expressed in polar coordinates (density per d beta_r d phi divided
 *        by the Jacobian beta_r, i.e. per unit area).
 * @throws std::invalid_argument for squeezed constellations.
 * @throws std::out_of_range for k >= d.
 */
inline double p_polar_given_k(const Constellation& c, const ChannelPoint& ch,
                              unsigned k, PolarOutcome out) {
  detail::PolarModel m(c, ch);
  if (k >= m.d) throw std::out_of_range("p_polar_given_k: k must lie in [0, d)");
  if (!(out.beta_r >= 0.0))
    throw std::invalid_argument("p_polar_given_k: beta_r must be >= 0");
  return m.prefactor * std::exp(-m.exponent(k, out.beta_r, out.phi));
}

/// Mixture density p(beta_r, phi) = (1/d) sum_k p(beta_r, phi | k).
inline double p_polar(const Constellation& c, const ChannelPoint& ch,
                      PolarOutcome out) {
  detail::PolarModel m(c, ch);
  if (!(out.beta_r >= 0.0))
    throw std::invalid_argument("p_polar: beta_r must be >= 0");
  double s = 0.0;
  for (unsigned k = 0; k < m.d; ++k)
    s += std::exp(-m.exponent(k, out.beta_r, out.phi));
  return m.prefactor * s / static_cast<double>(m.d);
}

// ---------------------------------------------------------------------------
// Posteriors
// ---------------------------------------------------------------------------

/**
 * @brief Posterior probabilities p(k | beta_x) over the d states, computed in
 *        shifted log space so extreme outcomes stay finite.
 * @throws std::runtime_error when the outcome lies in a numerically dead
 *         region where every branch underflows.
 */
inline std::vector<double> posterior(const Constellation& c,
                                     const ChannelPoint& ch,
                                     HomodyneOutcome out) {
  detail::HomodyneModel m(c, ch);
  std::vector<double> x(m.d), post(m.d);
  for (unsigned k = 0; k < m.d; ++k) x[k] = m.exponent(k, out.beta_x);
  if (!detail::posterior_from_exponents(x.data(), m.d, post.data()))
    throw std::runtime_error(
        "posterior: outcome beta_x = " + std::to_string(out.beta_x) +
        " lies in a numerically dead region");
  return post;
}

/// Posterior probabilities p(k | beta_r, phi); see the homodyne overload.
inline std::vector<double> posterior(const Constellation& c,
                                     const ChannelPoint& ch,
                                     PolarOutcome out) {
  detail::PolarModel m(c, ch);
  if (!(out.beta_r >= 0.0))
    throw std::invalid_argument("posterior: beta_r must be >= 0");
  std::vector<double> x(m.d), post(m.d);
  for (unsigned k = 0; k < m.d; ++k) x[k] = m.exponent(k, out.beta_r, out.phi);
  if (!detail::posterior_from_exponents(x.data(), m.d, post.data()))
    throw std::runtime_error(
        "posterior: outcome (beta_r = " + std::to_string(out.beta_r) +
        ", phi = " + std::to_string(out.phi) +
        ") lies in a numerically dead region");
  return post;
}

}  // namespace cvqkd
