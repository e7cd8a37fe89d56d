#pragma once

/**
 * @file mc_validate.hpp
 * @brief Monte-Carlo cross-validation of the analytic outcome densities:
 *        deterministic sampling of measurement transcripts, a histogram
 *        plug-in estimate of the symbol/outcome mutual information with a
 *        jackknife standard error, and a Kolmogorov-Smirnov distance against
 *        the analytic outcome marginal.
 *
 * Randomness is a counter-style 64-bit generator (SplitMix64) feeding a
 * Box-Muller transform. Sampling is organized in fixed-size chunks that are
 * independently seeded from (seed, chunk index), so transcripts are
 * bit-identical for a given seed regardless of how the chunks are executed
 * or merged.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "keyrate.hpp"
#include "likelihood.hpp"

namespace cvqkd {

namespace detail {

/// SplitMix64: the 64-bit finalizer-based generator of Steele, Lea & Flood.
struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; safe as a logarithm argument.
  double uniform_pos() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  /// One Box-Muller pair of independent standard normal deviates.
  std::pair<double, double> gaussian_pair() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * pi * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
  }
};

/// Samples per independently seeded chunk.
inline constexpr std::size_t mc_chunk_size = 1u << 16;

/// Generator state for one chunk of one transcript. The chunk index is
/// scrambled through the output function so chunk streams start at unrelated
/// positions of the underlying Weyl sequence; a plain arithmetic stride equal
/// to the generator's own increment would make successive chunks shifted
/// copies of one another. The scramble is a bijection of the chunk counter,
/// so distinct chunks always get distinct states.
inline SplitMix64 chunk_rng(std::uint64_t seed, std::uint64_t chunk) {
  SplitMix64 mixer{seed + (chunk + 1) * 0x9E3779B97F4A7C15ULL};
  return SplitMix64{mixer.next()};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

/// A simulated protocol run: sent ring symbols and measured outcomes.
struct Transcript {
  ProtocolParams params;
  std::uint64_t seed = 0;
  std::vector<unsigned> symbol;  ///< sender's ring index per signal
  std::vector<double> x;         ///< measured beta_x per signal
  std::vector<double> y;         ///< measured beta_y per signal (planar only)

  bool planar() const { return params.scheme == Scheme::DualHomodyne; }
  std::size_t size() const { return symbol.size(); }
};

/**
 * @brief Simulate n protocol rounds: uniform ring symbols, then Gaussian
 *        outcomes with mean sqrt(eta)|alpha|cos(2 pi k/d - chi) and variance
 *        (1+delta)/(2(1+tanh r)) for homodyne, or planar mean
 *        sqrt(eta/2) alpha_k and per-axis variance (1+delta)/2 for dual
 *        homodyne.
 *
 * Identical (params, n, seed) produce bit-identical transcripts.
 * @throws std::invalid_argument for n < 1 or invalid parameters.
 */
inline Transcript sample_transcript(const ProtocolParams& p, std::size_t n,
                                    std::uint64_t seed) {
  validate(p);
  if (n < 1) throw std::invalid_argument("sample_transcript: n must be >= 1");

  Transcript t;
  t.params = p;
  t.seed = seed;
  t.symbol.resize(n);
  t.x.resize(n);
  const bool planar = p.scheme == Scheme::DualHomodyne;
  if (planar) t.y.resize(n);

  const unsigned d = p.constellation.d;
  std::vector<double> mean_x(d), mean_y(d);
  double sigma = 0.0;
  if (planar) {
    detail::PolarModel m(p.constellation, p.channel);
    sigma = m.sigma;
    const double amp = std::sqrt(0.5 * p.channel.eta) * p.constellation.amplitude;
    for (unsigned k = 0; k < d; ++k) {
      mean_x[k] = amp * std::cos(m.angle[k]);
      mean_y[k] = amp * std::sin(m.angle[k]);
    }
  } else {
    detail::HomodyneModel m(p.constellation, p.channel);
    sigma = m.sigma;
    mean_x = m.mean;
  }

  const std::size_t n_chunks =
      (n + detail::mc_chunk_size - 1) / detail::mc_chunk_size;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    detail::SplitMix64 rng = detail::chunk_rng(seed, c);
    const std::size_t lo = c * detail::mc_chunk_size;
    const std::size_t hi = std::min(n, lo + detail::mc_chunk_size);
    for (std::size_t i = lo; i < hi; ++i) {
      const double uk = rng.uniform();
      const auto k = std::min<unsigned>(
          d - 1, static_cast<unsigned>(uk * static_cast<double>(d)));
      const auto [z0, z1] = rng.gaussian_pair();
      t.symbol[i] = k;
      t.x[i] = mean_x[k] + sigma * z0;
      if (planar) t.y[i] = mean_y[k] + sigma * z1;
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Empirical mutual information
// ---------------------------------------------------------------------------

/// Plug-in estimate with a jackknife standard error, in base d.
struct MutualInformationEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

namespace detail {

/// Outcome histogram range along one axis: mean peak + 8 sigma.
inline double transcript_axis_limit(const Transcript& t) {
  const auto& p = t.params;
  if (t.planar()) {
    PolarModel m(p.constellation, p.channel);
    return std::sqrt(0.5 * p.channel.eta) * p.constellation.amplitude +
           8.0 * m.sigma;
  }
  HomodyneModel m(p.constellation, p.channel);
  return std::sqrt(p.channel.eta) * p.constellation.amplitude + 8.0 * m.sigma;
}

/// Plug-in mutual information (base d) of a joint count table, leaving out
/// `remove` observations from cell (k0, b0).
inline double plugin_mi(const std::vector<std::uint64_t>& joint,
                        const std::vector<std::uint64_t>& row,
                        const std::vector<std::uint64_t>& col, unsigned d,
                        std::size_t n_cells, std::uint64_t n, unsigned k0,
                        std::size_t b0, std::uint64_t remove) {
  const double nn = static_cast<double>(n - remove);
  double mi = 0.0;
  for (unsigned k = 0; k < d; ++k) {
    const double rk =
        static_cast<double>(row[k] - (k == k0 ? remove : 0));
    if (rk == 0.0) continue;
    for (std::size_t b = 0; b < n_cells; ++b) {
      std::uint64_t c = joint[k * n_cells + b];
      if (k == k0 && b == b0) c -= remove;
      if (c == 0) continue;
      const double cb =
          static_cast<double>(col[b] - (b == b0 && k0 < d ? remove : 0));
      const double nj = static_cast<double>(c);
      mi += nj * std::log(nj * nn / (rk * cb));
    }
  }
  return mi / (nn * std::log(static_cast<double>(d)));
}

}  // namespace detail

/**
 * @brief Histogram plug-in estimate of I(symbol : outcome) in base d, with a
 *        delete-one jackknife standard error (leave-one-out values grouped
 *        by histogram cell).
 *
 * Outcomes are binned on [-L, L] per axis with L = mean peak + 8 sigma;
 * `bins` counts bins per axis (so planar transcripts use bins^2 cells).
 * @throws std::invalid_argument for bins < 16.
 */
inline MutualInformationEstimate empirical_mutual_information(
    const Transcript& t, unsigned bins) {
  if (bins < 16)
    throw std::invalid_argument(
        "empirical_mutual_information: bins must be >= 16");
  const std::size_t n = t.size();
  if (n < 2)
    throw std::invalid_argument(
        "empirical_mutual_information: need at least 2 samples");
  const unsigned d = t.params.constellation.d;
  const bool planar = t.planar();
  const double limit = detail::transcript_axis_limit(t);
  const double inv_w = static_cast<double>(bins) / (2.0 * limit);

  auto axis_bin = [&](double v) -> std::size_t {
    const double pos = (v + limit) * inv_w;
    if (pos <= 0.0) return 0;
    auto b = static_cast<std::size_t>(pos);
    return std::min<std::size_t>(b, bins - 1);  // clip tails into edge bins
  };

  const std::size_t n_cells =
      planar ? static_cast<std::size_t>(bins) * bins : bins;
  std::vector<std::uint64_t> joint(d * n_cells, 0), row(d, 0), col(n_cells, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t b = axis_bin(t.x[i]);
    if (planar) b = b * bins + axis_bin(t.y[i]);
    ++joint[t.symbol[i] * n_cells + b];
    ++row[t.symbol[i]];
    ++col[b];
  }

  const double value =
      detail::plugin_mi(joint, row, col, d, n_cells, n, d, 0, 0);

  // Delete-one jackknife: the leave-one-out estimate is identical for all
  // samples in the same (symbol, cell) pair, so iterate occupied cells.
  double mean_loo = 0.0;
  std::vector<std::pair<std::size_t, double>> loo;  // (count, leave-one-out MI)
  loo.reserve(256);
  for (unsigned k = 0; k < d; ++k) {
    for (std::size_t b = 0; b < n_cells; ++b) {
      const std::uint64_t c = joint[k * n_cells + b];
      if (c == 0) continue;
      const double v = detail::plugin_mi(joint, row, col, d, n_cells, n, k, b, 1);
      loo.emplace_back(static_cast<std::size_t>(c), v);
      mean_loo += static_cast<double>(c) * v;
    }
  }
  mean_loo /= static_cast<double>(n);
  double var = 0.0;
  for (const auto& [c, v] : loo)
    var += static_cast<double>(c) * (v - mean_loo) * (v - mean_loo);
  var *= static_cast<double>(n - 1) / static_cast<double>(n);

  return {value, std::sqrt(var)};
}

// ---------------------------------------------------------------------------
// Distribution check
// ---------------------------------------------------------------------------

/**
 * @brief Two-sided Kolmogorov-Smirnov distance between the transcript's
 *        beta_x marginal and its analytic mixture-of-Gaussians CDF.
 */
inline double ks_distance(const Transcript& t) {
  const std::size_t n = t.size();
  const unsigned d = t.params.constellation.d;
  std::vector<double> mean(d);
  double sigma = 0.0;
  if (t.planar()) {
    detail::PolarModel m(t.params.constellation, t.params.channel);
    sigma = m.sigma;
    const double amp = std::sqrt(0.5 * t.params.channel.eta) *
                       t.params.constellation.amplitude;
    for (unsigned k = 0; k < d; ++k) mean[k] = amp * std::cos(m.angle[k]);
  } else {
    detail::HomodyneModel m(t.params.constellation, t.params.channel);
    sigma = m.sigma;
    mean = m.mean;
  }
  const double inv = 1.0 / (sigma * std::sqrt(2.0));

  auto cdf = [&](double v) {
    double s = 0.0;
    for (unsigned k = 0; k < d; ++k)
      s += 0.5 * (1.0 + std::erf((v - mean[k]) * inv));
    return s / static_cast<double>(d);
  };

  std::vector<double> xs(t.x);
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(xs[i]);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    ks = std::max({ks, std::abs(f - hi), std::abs(f - lo)});
  }
  return ks;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/**
 * @brief Write the transcript as CSV with header `k,beta_x[,beta_y]` and LF
 *        line endings; doubles carry 17 significant digits so a round-trip
 *        is lossless.
 */
inline void to_csv(const Transcript& t, std::ostream& os) {
  const bool planar = t.planar();
  os << (planar ? "k,beta_x,beta_y\n" : "k,beta_x\n");
  char buf[96];
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (planar)
      std::snprintf(buf, sizeof buf, "%u,%.17g,%.17g\n", t.symbol[i], t.x[i],
                    t.y[i]);
    else
      std::snprintf(buf, sizeof buf, "%u,%.17g\n", t.symbol[i], t.x[i]);
    os << buf;
  }
}

}  // namespace cvqkd
