#pragma once

/**
 * @file states.hpp
 * @brief Phase-symmetric constellations of coherent / squeezed states and
 *        their overlaps.
 *
 * A constellation places d states of equal amplitude at equally spaced
 * phase-space angles 2*pi*k/d - chi (the common offset chi rotates the whole
 * ring relative to the measurement axis). A lossy channel of transmittance
 * eta splits each amplitude between the receiver (factor sqrt(eta)) and the
 * environment (factor sqrt(1-eta)); overlaps of the environment-side states
 * are what bound the leaked information.
 */

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

#include "numerics.hpp"

namespace cvqkd {

using ComplexAmplitude = std::complex<double>;

/**
 * @brief A d-fold phase-symmetric ring of states.
 *
 * squeeze_r is the squeezing parameter applied identically to every state
 * along its displacement direction: r > 0 narrows the measured quadrature,
 * r = 0 is the coherent case.
 */
struct Constellation {
  unsigned d = 2;          ///< number of states, >= 2
  double amplitude = 0.0;  ///< common displacement magnitude, >= 0
  double axis_angle = 0.0; ///< chi: rotation of the ring against the axis
  double squeeze_r = 0.0;  ///< common squeezing parameter
};

/// @throws std::invalid_argument when the ring parameters are unusable.
inline void validate(const Constellation& c) {
  if (c.d < 2) throw std::invalid_argument("Constellation: d must be >= 2");
  if (!(c.amplitude >= 0.0))
    throw std::invalid_argument("Constellation: amplitude must be >= 0");
  if (!std::isfinite(c.axis_angle) || !std::isfinite(c.squeeze_r))
    throw std::invalid_argument("Constellation: parameters must be finite");
}

/**
 * @brief Complex amplitude of ring member k: amplitude * e^{i(2 pi k / d - chi)}.
 * @throws std::out_of_range for k >= d.
 */
inline ComplexAmplitude constellation_point(const Constellation& c, unsigned k) {
  validate(c);
  if (k >= c.d)
    throw std::out_of_range("constellation_point: k must lie in [0, d)");
  const double angle = 2.0 * pi * static_cast<double>(k) / static_cast<double>(c.d) -
                       c.axis_angle;
  return std::polar(c.amplitude, angle);
}

/**
 * @brief Overlap <b|a> of two coherent states:
 *        exp(-(|a|^2 + |b|^2)/2 + a * conj(b)).
 *
 * Magnitude is at most 1, with equality only for a == b.
 */
inline Complex coherent_overlap(ComplexAmplitude a, ComplexAmplitude b) {
  const Complex expo =
      -0.5 * (std::norm(a) + std::norm(b)) + a * std::conj(b);
  return std::exp(expo);
}

/**
 * @brief Overlap <S(r) e_b | S(r) e_a> of two equally squeezed displaced
 *        states with displacement amplitudes e_a and e_b.
 *
 * The symplectic phase exp(-(e_b conj(e_a) - e_a conj(e_b))/2) survives the
 * squeezing unchanged; the magnitude is exp(-|beta|^2 / 2) with
 * beta = (e_a - e_b) cosh r + conj(e_a - e_b) sinh r.
 *
 * At r = 0 this routes through coherent_overlap so the coherent and squeezed
 * code paths agree bit for bit.
 */
inline Complex squeezed_overlap(ComplexAmplitude e_a, ComplexAmplitude e_b,
                                double r) {
  if (r == 0.0) return coherent_overlap(e_a, e_b);
  const Complex diff = e_a - e_b;
  const Complex beta = diff * std::cosh(r) + std::conj(diff) * std::sinh(r);
  // Purely imaginary symplectic phase, matching the r = 0 convention
  // exp(+i Im(e_a conj(e_b))).
  const Complex phase = -0.5 * (e_b * std::conj(e_a) - e_a * std::conj(e_b));
  return std::exp(phase - Complex{0.5 * std::norm(beta), 0.0});
}

/**
 * @brief Amplitude split by a beam splitter of transmittance eta:
 *        (transmitted, reflected) = (sqrt(eta) a, sqrt(1 - eta) a).
 * @throws std::invalid_argument for eta outside [0, 1].
 */
inline std::pair<ComplexAmplitude, ComplexAmplitude> beamsplit(
    ComplexAmplitude a, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("beamsplit: eta must lie in [0, 1]");
  return {std::sqrt(eta) * a, std::sqrt(1.0 - eta) * a};
}

}  // namespace cvqkd
