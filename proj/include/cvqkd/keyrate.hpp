#pragma once

/**
 * @file keyrate.hpp
 * @brief Secure key rates: pointwise gain, outcome-space integration with
 *        optional postselection, amplitude optimization, and transmittance
 *        sweeps.
 *
 * The pointwise gain of an outcome is
 *     g = 1 - f(e_eff) * H_d(A|B) - chi,
 * all in base d: one unit is a perfectly shared ring symbol. H_d(A|B) is the
 * entropy of the sender posterior at that outcome, e_eff = 1 - max_k
 * posterior_k its effective error weight, f the reconciliation-efficiency
 * model, and chi the eavesdropper's Holevo bound (direct: outcome
 * independent; reverse: reduced by the entropy of her conditional state).
 *
 * The secure rate integrates p(outcome) * g over the full outcome space —
 * line for homodyne, plane for dual homodyne. With postselection only
 * positive-gain outcomes are kept, so the rate is nonnegative by
 * construction. Folding symmetric outcome regions is deliberately not used
 * for the production path; it exists only as a cross-check in the tests.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "infotheory.hpp"
#include "likelihood.hpp"
#include "numerics.hpp"
#include "states.hpp"

namespace cvqkd {

// ---------------------------------------------------------------------------
// Protocol description
// ---------------------------------------------------------------------------

/**
 * @brief Reconciliation-efficiency model f(e): the multiple of the Shannon
 *        limit the error-correction step actually spends at error weight e.
 *
 * Ideal reconciliation is f == 1; the linear model is f(e) = a + b e,
 * required to satisfy f >= 1 on e in [0, 1/2].
 */
class ECModel {
 public:
  ECModel() = default;  ///< ideal: f == 1

  static ECModel ideal() { return ECModel(); }

  /// @throws std::invalid_argument if a + b e dips below 1 on [0, 1/2].
  static ECModel linear(double a, double b) {
    if (!(a >= 1.0) || !(a + 0.5 * b >= 1.0))
      throw std::invalid_argument(
          "ECModel: linear efficiency must stay >= 1 on [0, 1/2]");
    ECModel m;
    m.a_ = a;
    m.b_ = b;
    return m;
  }

  double efficiency(double e) const { return a_ + b_ * e; }
  bool is_ideal() const { return a_ == 1.0 && b_ == 0.0; }

 private:
  double a_ = 1.0;
  double b_ = 0.0;
};

/// How the signal amplitude is chosen at each transmittance.
struct AmplitudePolicy {
  bool optimize = false;        ///< search for the best amplitude per point
  double max_amplitude = 12.0;  ///< initial upper edge of the search window
};

/// Complete description of one protocol evaluation.
struct ProtocolParams {
  Constellation constellation;
  ChannelPoint channel;
  Scheme scheme = Scheme::Homodyne;
  ReconciliationMode mode = ReconciliationMode::Direct;
  bool postselection = true;
  ECModel ec;
  QuadratureSpec quad;
  AmplitudePolicy amplitude;
};

/// @throws std::invalid_argument for inconsistent protocol parameters.
inline void validate(const ProtocolParams& p) {
  validate(p.constellation);
  validate(p.channel);
  validate(p.quad, p.scheme == Scheme::DualHomodyne);
  detail::check_ring_size(p.constellation.d);
  if (p.scheme == Scheme::DualHomodyne && p.constellation.squeeze_r != 0.0)
    throw std::invalid_argument(
        "dual homodyne supports coherent signals only (squeeze_r must be 0)");
  if (!(p.amplitude.max_amplitude >= 0.0))
    throw std::invalid_argument("AmplitudePolicy: max_amplitude must be >= 0");
}

// ---------------------------------------------------------------------------
// Ring rotation presets
// ---------------------------------------------------------------------------

/// Named choices for the ring rotation chi against the measurement axis.
enum class PhasePreset { None, Global, Local };

/**
 * @brief Ring rotation for a named preset: None is 0; Global and Local
 *        balance the error exposure of the ring states globally or between
 *        phase-space neighbours.
 */
inline double phase_preset(unsigned d, PhasePreset preset) {
  if (d < 2) throw std::invalid_argument("phase_preset: d must be >= 2");
  const double step = 2.0 * pi / static_cast<double>(d);
  switch (preset) {
    case PhasePreset::None:
      return 0.0;
    case PhasePreset::Global:
      return std::atan((1.0 - std::cos(step)) / (2.0 + std::sin(step)));
    case PhasePreset::Local:
      return std::atan((1.0 - std::cos(step)) / (3.0 * std::sin(step)));
  }
  throw std::invalid_argument("phase_preset: unknown preset");
}

/// Convert a base-d rate into bits per signal.
inline double to_bits(double gain_base_d, unsigned d) {
  return gain_base_d * std::log2(static_cast<double>(d));
}

// ---------------------------------------------------------------------------
// Gain engine
// ---------------------------------------------------------------------------

namespace detail {

/// Per-protocol constants hoisted out of the outcome loops.
struct GainEngine {
  unsigned d;
  double ln_d;
  bool reverse;
  bool chi_dr_negligible;  ///< skip per-node eigensolves when chi_dr ~ 0
  ReverseEngine eve;
  const ECModel& ec;

  GainEngine(const ProtocolParams& p)
      : d(p.constellation.d),
        ln_d(std::log(static_cast<double>(p.constellation.d))),
        reverse(p.mode == ReconciliationMode::Reverse),
        chi_dr_negligible(false),
        eve(p.constellation, p.channel.eta),
        ec(p.ec) {
    // At chi_dr below 1e-14 the conditional entropy is bounded by the same
    // amount, so the reverse bound equals the direct bound to within 1e-14
    // and the per-node diagonalization can be skipped.
    chi_dr_negligible = eve.chi_dr < 1e-14;
  }

  /// Gain of one outcome given its posterior weights u over ring symbols.
  double gain(const double* u) const {
    double emax = u[0];
    for (unsigned k = 1; k < d; ++k) emax = std::max(emax, u[k]);
    const double h = entropy_nats_unchecked(u, d) / ln_d;
    const double e_eff = 1.0 - emax;
    double chi = eve.chi_dr;
    if (reverse && !chi_dr_negligible) {
      chi -= eve.conditional_entropy(u);
      if (chi < 0.0 && chi > -1e-9) chi = 0.0;
    }
    return 1.0 - ec.efficiency(e_eff) * h - chi;
  }
};

}  // namespace detail

/**
 * @brief Gain of a single homodyne outcome,
 *        1 - f(e_eff) H_d(A|B) - chi, in base d.
 *
 * Postselection does not enter here; this is the bare integrand the secure
 * rate filters and integrates.
 */
inline double pointwise_gain(const ProtocolParams& p, HomodyneOutcome out) {
  validate(p);
  if (p.scheme != Scheme::Homodyne)
    throw std::invalid_argument(
        "pointwise_gain: homodyne outcome requires the homodyne scheme");
  detail::GainEngine eng(p);
  const std::vector<double> u = posterior(p.constellation, p.channel, out);
  return eng.gain(u.data());
}

/// Dual-homodyne overload of pointwise_gain.
inline double pointwise_gain(const ProtocolParams& p, PolarOutcome out) {
  validate(p);
  if (p.scheme != Scheme::DualHomodyne)
    throw std::invalid_argument(
        "pointwise_gain: polar outcome requires the dual-homodyne scheme");
  detail::GainEngine eng(p);
  const std::vector<double> u = posterior(p.constellation, p.channel, out);
  return eng.gain(u.data());
}

/**
 * @brief Secure key rate G in base d: the outcome-space integral of
 *        p(outcome) * gain(outcome).
 *
 * With postselection enabled only positive-gain outcomes contribute and the
 * result is clamped to be nonnegative; without it the full signed integral
 * is returned (and may well be negative).
 *
 * @param threads worker threads for the quadrature; any value yields
 *        bit-identical results (fixed-chunk deterministic reduction).
 */
inline double secure_key_rate(const ProtocolParams& p, unsigned threads = 1) {
  validate(p);
  detail::GainEngine eng(p);
  const bool ps = p.postselection;
  const unsigned d = p.constellation.d;

  double rate = 0.0;
  if (p.scheme == Scheme::Homodyne) {
    detail::HomodyneModel m(p.constellation, p.channel);
    const double limit = detail::line_limit(p.constellation, p.channel, m, p.quad);
    const std::size_t n = detail::trapezoid_intervals(-limit, limit, p.quad.step);
    const double h = 2.0 * limit / static_cast<double>(n);
    rate = detail::chunked_sum(n + 1, threads, [&](std::size_t i) {
      const double bx = -limit + h * static_cast<double>(i);
      double x[detail::max_ring_size];
      double u[detail::max_ring_size];
      double psum = 0.0;
      for (unsigned k = 0; k < d; ++k) {
        x[k] = m.exponent(k, bx);
        psum += std::exp(-x[k]);
      }
      if (psum == 0.0 || !detail::posterior_from_exponents(x, d, u)) return 0.0;
      double g = eng.gain(u);
      if (ps && g <= 0.0) return 0.0;
      const double w = (i == 0 || i == n) ? 0.5 * h : h;
      const double pdens = m.prefactor * psum / static_cast<double>(d);
      return w * pdens * g;
    });
  } else {
    detail::PolarModel m(p.constellation, p.channel);
    const double limit = detail::polar_limit(p.constellation, p.channel, m, p.quad);
    const std::size_t nr = detail::trapezoid_intervals(0.0, limit, p.quad.step);
    const double hr = limit / static_cast<double>(nr);
    const std::size_t na =
        detail::trapezoid_intervals(0.0, 2.0 * pi, p.quad.angular_step);
    const double ha = 2.0 * pi / static_cast<double>(na);
    // Flattened grid: node index = j * (nr + 1) + i; the i = 0 column has
    // zero weight through the polar Jacobian and is skipped.
    rate = detail::chunked_sum((na + 1) * (nr + 1), threads, [&](std::size_t idx) {
      const std::size_t j = idx / (nr + 1);
      const std::size_t i = idx % (nr + 1);
      if (i == 0) return 0.0;
      const double br = hr * static_cast<double>(i);
      const double phi = ha * static_cast<double>(j);
      double x[detail::max_ring_size];
      double u[detail::max_ring_size];
      double psum = 0.0;
      for (unsigned k = 0; k < d; ++k) {
        x[k] = m.exponent(k, br, phi);
        psum += std::exp(-x[k]);
      }
      if (psum == 0.0 || !detail::posterior_from_exponents(x, d, u)) return 0.0;
      double g = eng.gain(u);
      if (ps && g <= 0.0) return 0.0;
      double w = hr * ha * br;           // Jacobian
      if (i == nr) w *= 0.5;             // radial trapezoid edge
      if (j == 0 || j == na) w *= 0.5;   // angular trapezoid edges
      const double pdens = m.prefactor * psum / static_cast<double>(d);
      return w * pdens * g;
    });
  }
  if (ps && rate < 0.0) rate = 0.0;
  return rate;
}

// ---------------------------------------------------------------------------
// Amplitude optimization
// ---------------------------------------------------------------------------

/**
 * @brief Best signal amplitude and its rate: a coarse scan of five
 *        equispaced amplitudes on [0, max], then bracketing refinement that
 *        probes +-step around the incumbent and halves the step until it
 *        drops below 0.01.
 *
 * Refinement probes are clamped to [0, max + 1]: the window edge may only be
 * exceeded by the width of one coarse step, mirroring the search bound of
 * the original implementation. A flat zero landscape returns (0, 0).
 */
inline std::pair<double, double> optimize_amplitude(const ProtocolParams& p,
                                                    unsigned threads = 1) {
  validate(p);
  const double max_amp = p.amplitude.max_amplitude;
  const double ceiling = max_amp + 1.0;
  auto rate_at = [&](double amp) {
    ProtocolParams q = p;
    q.constellation.amplitude = amp;
    return secure_key_rate(q, threads);
  };

  double best = -std::numeric_limits<double>::infinity();
  double best_amp = 0.0;
  double stepping = max_amp / 4.0;
  for (int i = 0; i < 5; ++i) {
    const double amp = static_cast<double>(i) * stepping;
    const double v = rate_at(amp);
    if (v > best) {
      best = v;
      best_amp = amp;
    }
  }
  stepping *= 0.5;
  while (true) {
    const double cur = best_amp;
    for (const double cand :
         {std::min(ceiling, std::max(0.0, cur - stepping)),
          std::min(ceiling, std::max(0.0, cur + stepping))}) {
      const double v = rate_at(cand);
      if (v > best) {
        best = v;
        best_amp = cand;
      }
    }
    stepping *= 0.5;
    if (stepping <= 0.01) break;
  }
  return {best_amp, best};
}

// ---------------------------------------------------------------------------
// Transmittance sweeps
// ---------------------------------------------------------------------------

/// One evaluated sweep point.
struct KeyRatePoint {
  double eta = 0.0;
  double alpha_opt = 0.0;   ///< amplitude used (optimized or fixed)
  double gain_base_d = 0.0;
  double gain_bits = 0.0;
};

/// Sweep entry: either a point or the error that prevented it.
struct SweepResult {
  KeyRatePoint point;
  bool ok = false;
  std::string error;
};

/**
 * @brief Evaluate the protocol across a descending transmittance grid.
 *
 * Failures are recorded per point and the sweep continues. With warm_start
 * (meaningful only when optimizing) each point's search window is re-centred
 * on the previous optimum plus one coarse margin, introducing a sequential
 * dependency along the grid; without it the points are independent and are
 * distributed across `threads` workers.
 *
 * @throws std::invalid_argument if etas is empty or not sorted descending.
 */
inline std::vector<SweepResult> sweep(const ProtocolParams& base,
                                      const std::vector<double>& etas,
                                      bool warm_start = false,
                                      unsigned threads = 1) {
  validate(base);
  if (etas.empty()) throw std::invalid_argument("sweep: empty eta grid");
  for (std::size_t i = 0; i + 1 < etas.size(); ++i)
    if (etas[i] < etas[i + 1])
      throw std::invalid_argument("sweep: etas must be sorted descending");

  const unsigned d = base.constellation.d;
  std::vector<SweepResult> results(etas.size());

  auto eval_point = [&](double eta, double window_max,
                        unsigned point_threads) -> SweepResult {
    SweepResult r;
    try {
      ProtocolParams p = base;
      p.channel.eta = eta;
      double amp = p.constellation.amplitude;
      double g = 0.0;
      if (p.amplitude.optimize) {
        p.amplitude.max_amplitude = window_max;
        std::tie(amp, g) = optimize_amplitude(p, point_threads);
      } else {
        g = secure_key_rate(p, point_threads);
      }
      r.point = KeyRatePoint{eta, amp, g, to_bits(g, d)};
      r.ok = true;
    } catch (const std::exception& e) {
      r.point.eta = eta;
      r.ok = false;
      r.error = e.what();
    }
    return r;
  };

  const bool sequential = warm_start || threads <= 1 || etas.size() == 1;
  if (sequential) {
    double window = base.amplitude.max_amplitude;
    for (std::size_t i = 0; i < etas.size(); ++i) {
      results[i] = eval_point(etas[i], window, threads);
      if (warm_start && base.amplitude.optimize && results[i].ok &&
          results[i].point.alpha_opt > 0.0)
        window = results[i].point.alpha_opt + 1.0;
    }
  } else {
    const unsigned workers =
        std::min<unsigned>(threads, static_cast<unsigned>(etas.size()));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < etas.size(); i += workers)
          results[i] = eval_point(etas[i], base.amplitude.max_amplitude, 1);
      });
    }
    for (auto& t : pool) t.join();
  }
  return results;
}

}  // namespace cvqkd
