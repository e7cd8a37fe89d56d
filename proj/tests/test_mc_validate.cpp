// Tests for the Monte Carlo cross-check: deterministic transcript sampling,
// the plug-in mutual-information estimator with jackknife errors, the
// Kolmogorov-Smirnov marginal check, and CSV export.

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <cvqkd/infotheory.hpp>
#include <cvqkd/keyrate.hpp>
#include <cvqkd/mc_validate.hpp>

using namespace cvqkd;

namespace {

ProtocolParams binary_params(double eta, double amplitude) {
  ProtocolParams p;
  p.constellation = Constellation{2, amplitude, 0.0, 0.0};
  p.channel = ChannelPoint{eta, 0.0};
  p.scheme = Scheme::Homodyne;
  return p;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  std::size_t n = 0;
};

Moments conditional_moments(const Transcript& t, unsigned k) {
  Moments m;
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.symbol[i] != k) continue;
    sum += t.x[i];
    ++m.n;
  }
  m.mean = sum / static_cast<double>(m.n);
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.symbol[i] != k) continue;
    const double d = t.x[i] - m.mean;
    ss += d * d;
  }
  m.var = ss / static_cast<double>(m.n - 1);
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Transcript sampling
// ---------------------------------------------------------------------------

TEST(SampleTranscript, ShapeAndSymbolRange) {
  ProtocolParams p = binary_params(0.9, 1.0);
  p.constellation.d = 4;
  const Transcript t = sample_transcript(p, 1000, 7);
  EXPECT_EQ(t.size(), 1000u);
  EXPECT_EQ(t.x.size(), 1000u);
  EXPECT_TRUE(t.y.empty());
  EXPECT_FALSE(t.planar());
  for (unsigned k : t.symbol) EXPECT_LT(k, 4u);

  p.scheme = Scheme::DualHomodyne;
  const Transcript u = sample_transcript(p, 500, 7);
  EXPECT_TRUE(u.planar());
  EXPECT_EQ(u.y.size(), 500u);
}

TEST(SampleTranscript, SameSeedIsBitIdentical) {
  ProtocolParams p = binary_params(0.8, 1.2);
  const Transcript a = sample_transcript(p, 40000, 42);
  const Transcript b = sample_transcript(p, 40000, 42);
  EXPECT_EQ(a.symbol, b.symbol);
  EXPECT_EQ(a.x, b.x);
  const Transcript c = sample_transcript(p, 40000, 43);
  EXPECT_NE(a.x, c.x);
}

// Chunked counter-based seeding gives the prefix property: extending a run
// never changes the samples already drawn.
TEST(SampleTranscript, LongerRunsExtendShorterOnes) {
  ProtocolParams p = binary_params(0.8, 1.2);
  const std::size_t chunk = detail::mc_chunk_size;
  const Transcript a = sample_transcript(p, chunk + 1, 5);
  const Transcript b = sample_transcript(p, chunk + 500, 5);
  for (std::size_t i : {std::size_t{0}, chunk - 1, chunk}) {
    EXPECT_EQ(a.symbol[i], b.symbol[i]) << i;
    EXPECT_EQ(a.x[i], b.x[i]) << i;
  }
}

TEST(SampleTranscript, HomodyneConditionalMomentsMatchTheModel) {
  // eta = 0.81, |alpha| = 1: conditional mean sqrt(eta) = 0.9, variance 1/2.
  const Transcript t = sample_transcript(binary_params(0.81, 1.0), 1000000, 11);
  const Moments m0 = conditional_moments(t, 0);
  const Moments m1 = conditional_moments(t, 1);
  EXPECT_GT(m0.n, 490000u);
  EXPECT_NEAR(m0.mean, 0.9, 0.003);
  EXPECT_NEAR(m1.mean, -0.9, 0.003);
  EXPECT_NEAR(m0.var, 0.5, 0.005);
  EXPECT_NEAR(m1.var, 0.5, 0.005);
}

TEST(SampleTranscript, DetectorNoiseAndSqueezingScaleTheVariance) {
  ProtocolParams p = binary_params(1.0, 0.0);
  p.channel.delta = 0.5;
  p.constellation.squeeze_r = 0.4;
  const Transcript t = sample_transcript(p, 400000, 3);
  const double expected = (1.0 + 0.5) / (2.0 * (1.0 + std::tanh(0.4)));
  const Moments m = conditional_moments(t, 0);
  EXPECT_NEAR(m.var, expected, 0.01);
}

TEST(SampleTranscript, DualHomodynePlanarMoments) {
  ProtocolParams p = binary_params(1.0, 1.0);
  p.scheme = Scheme::DualHomodyne;
  const Transcript t = sample_transcript(p, 400000, 9);
  // Ring point 0 sits on the positive x axis: mean (sqrt(eta/2)|alpha|, 0).
  double sx = 0.0, sy = 0.0;
  std::size_t n0 = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.symbol[i] != 0) continue;
    sx += t.x[i];
    sy += t.y[i];
    ++n0;
  }
  EXPECT_NEAR(sx / static_cast<double>(n0), std::sqrt(0.5), 0.005);
  EXPECT_NEAR(sy / static_cast<double>(n0), 0.0, 0.005);
}

TEST(SampleTranscript, RejectsEmptyRuns) {
  EXPECT_THROW(sample_transcript(binary_params(0.9, 1.0), 0, 1),
               std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Mutual-information estimator
// ---------------------------------------------------------------------------

TEST(EmpiricalMI, RejectsTooFewBinsOrSamples) {
  const Transcript t = sample_transcript(binary_params(0.9, 1.0), 100, 1);
  EXPECT_THROW(empirical_mutual_information(t, 8), std::invalid_argument);
  Transcript tiny = sample_transcript(binary_params(0.9, 1.0), 1, 1);
  EXPECT_THROW(empirical_mutual_information(tiny, 64), std::invalid_argument);
}

TEST(EmpiricalMI, VanishesWithoutSignal) {
  const Transcript t = sample_transcript(binary_params(0.9, 0.0), 200000, 2);
  const MutualInformationEstimate est = empirical_mutual_information(t, 64);
  EXPECT_LT(std::abs(est.value), 0.005);
  EXPECT_GT(est.std_error, 0.0);
}

TEST(EmpiricalMI, SaturatesForWellSeparatedStates) {
  const Transcript t = sample_transcript(binary_params(1.0, 5.0), 200000, 4);
  const MutualInformationEstimate est = empirical_mutual_information(t, 128);
  EXPECT_NEAR(est.value, 1.0, 0.002);
}

TEST(EmpiricalMI, MatchesAnalyticHomodyneValue) {
  ProtocolParams p;
  p.constellation = Constellation{4, 2.0, std::atan(1.0 / 3.0), 0.0};
  p.channel = ChannelPoint{0.8, 0.0};
  p.scheme = Scheme::Homodyne;
  const double analytic =
      mutual_information(p.constellation, p.channel, p.scheme, p.quad);
  const Transcript t = sample_transcript(p, 1000000, 1);
  const MutualInformationEstimate est = empirical_mutual_information(t, 256);
  EXPECT_NEAR(est.value, analytic, 0.01);
  EXPECT_LT(std::abs(est.value - analytic), 3.0 * est.std_error)
      << "analytic=" << analytic << " empirical=" << est.value
      << " se=" << est.std_error;
}

TEST(EmpiricalMI, MatchesAnalyticDualHomodyneValue) {
  ProtocolParams p = binary_params(0.9, 1.0);
  p.scheme = Scheme::DualHomodyne;
  const double analytic =
      mutual_information(p.constellation, p.channel, p.scheme, p.quad);
  const Transcript t = sample_transcript(p, 1000000, 1);
  const MutualInformationEstimate est = empirical_mutual_information(t, 64);
  EXPECT_NEAR(est.value, analytic, 0.01);
  EXPECT_LT(std::abs(est.value - analytic), 3.0 * est.std_error);
}

TEST(EmpiricalMI, BiasShrinksWithSampleSize) {
  ProtocolParams p = binary_params(0.8, 1.0);
  const double analytic =
      mutual_information(p.constellation, p.channel, p.scheme, p.quad);
  const Transcript small = sample_transcript(p, 10000, 6);
  const Transcript large = sample_transcript(p, 1000000, 6);
  const MutualInformationEstimate es = empirical_mutual_information(small, 128);
  const MutualInformationEstimate el = empirical_mutual_information(large, 128);
  EXPECT_LT(std::abs(el.value - analytic),
            std::abs(es.value - analytic) + 3.0 * es.std_error);
  EXPECT_LT(el.std_error, es.std_error);
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov marginal check
// ---------------------------------------------------------------------------

TEST(KsDistance, SmallForFaithfulSampling) {
  const Transcript t = sample_transcript(binary_params(0.81, 1.0), 1000000, 11);
  const double ks = ks_distance(t);
  EXPECT_GT(ks, 0.0);
  EXPECT_LT(ks, 0.002);
}

TEST(KsDistance, SmallForPlanarSampling) {
  ProtocolParams p = binary_params(0.9, 1.0);
  p.scheme = Scheme::DualHomodyne;
  const Transcript t = sample_transcript(p, 1000000, 8);
  EXPECT_LT(ks_distance(t), 0.002);
}

TEST(KsDistance, DetectsAWrongChannel) {
  // Sample at eta = 1 but relabel the transcript as eta = 0.5: the analytic
  // marginal no longer matches and the distance blows up.
  ProtocolParams p = binary_params(1.0, 1.5);
  Transcript t = sample_transcript(p, 100000, 13);
  t.params.channel.eta = 0.5;
  EXPECT_GT(ks_distance(t), 0.05);
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

TEST(ToCsv, RoundTripsLineTranscripts) {
  const Transcript t = sample_transcript(binary_params(0.9, 1.0), 3, 21);
  std::ostringstream os;
  to_csv(t, os);
  const std::string csv = os.str();
  ASSERT_EQ(csv.substr(0, 9), "k,beta_x\n");
  EXPECT_EQ(csv.find('\r'), std::string::npos);

  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);  // header
  for (std::size_t i = 0; i < t.size(); ++i) {
    ASSERT_TRUE(static_cast<bool>(std::getline(is, line)));
    const std::size_t comma = line.find(',');
    ASSERT_NE(comma, std::string::npos);
    EXPECT_EQ(std::stoul(line.substr(0, comma)), t.symbol[i]);
    // %.17g round-trips doubles exactly.
    EXPECT_EQ(std::strtod(line.c_str() + comma + 1, nullptr), t.x[i]);
  }
  EXPECT_FALSE(std::getline(is, line));
}

TEST(ToCsv, PlanarTranscriptsCarryBothAxes) {
  ProtocolParams p = binary_params(0.9, 1.0);
  p.scheme = Scheme::DualHomodyne;
  const Transcript t = sample_transcript(p, 2, 21);
  std::ostringstream os;
  to_csv(t, os);
  const std::string csv = os.str();
  ASSERT_EQ(csv.substr(0, 16), "k,beta_x,beta_y\n");
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  std::getline(is, line);
  const std::size_t c1 = line.find(',');
  const std::size_t c2 = line.find(',', c1 + 1);
  ASSERT_NE(c2, std::string::npos);
  EXPECT_EQ(std::strtod(line.c_str() + c1 + 1, nullptr), t.x[0]);
  EXPECT_EQ(std::strtod(line.c_str() + c2 + 1, nullptr), t.y[0]);
}
