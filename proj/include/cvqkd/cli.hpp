#pragma once

/**
 * @file cli.hpp
 * @brief Command-line front end: `sweep`, `point` and `validate` subcommands,
 *        plus a translator for the argument layout of the original
 *        implementation.
 *
 * All numeric output is produced through fixed printf formats from
 * deterministic computations, so identical invocations give byte-identical
 * output. Exit codes: 0 success, 1 numerical failure (naming the eta point),
 * 2 configuration error (with usage text).
 */

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "infotheory.hpp"
#include "keyrate.hpp"
#include "mc_validate.hpp"
#include "version.hpp"

namespace cvqkd {

/// Fully resolved run description produced by argument parsing.
struct RunConfig {
  enum class Command { Sweep, Point, Validate };
  Command command = Command::Sweep;
  ProtocolParams params;
  std::vector<double> etas;  ///< descending transmittance grid
  bool warm_start = false;
  unsigned threads = 1;
  bool json = false;
  std::size_t samples = 1000000;
  std::uint64_t seed = 1;
  unsigned bins = 0;  ///< 0 = scheme default (256 homodyne, 64 per axis planar)
};

namespace detail {

inline std::string fmt_g(double v, int digits = 9) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// Parse "start:stop:step" (descending) or a single value into an eta grid.
inline std::vector<double> parse_eta_grid(const std::string& s) {
  std::vector<double> parts;
  std::string token;
  std::istringstream is(s);
  while (std::getline(is, token, ':')) parts.push_back(std::stod(token));
  if (parts.size() == 1) return {parts[0]};
  if (parts.size() != 3)
    throw std::invalid_argument(
        "eta grid must be a single value or start:stop:step");
  const double start = parts[0], stop = parts[1], step = parts[2];
  if (!(step > 0.0) || start < stop)
    throw std::invalid_argument(
        "eta grid must descend: require start >= stop and step > 0");
  const auto n = static_cast<std::size_t>(
      std::floor((start - stop) / step + 1e-9));
  std::vector<double> etas(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    etas[i] = start - static_cast<double>(i) * step;
  return etas;
}

inline std::string scheme_name(Scheme s) {
  return s == Scheme::Homodyne ? "hd" : "dhd";
}

inline std::string mode_name(ReconciliationMode m) {
  return m == ReconciliationMode::Direct ? "dr" : "rr";
}

/// One-line parameter echo reproduced at the top of every report.
inline std::string params_line(const RunConfig& cfg) {
  const auto& p = cfg.params;
  std::ostringstream os;
  os << "scheme=" << scheme_name(p.scheme) << " mode=" << mode_name(p.mode)
     << " d=" << p.constellation.d << " chi=" << fmt_g(p.constellation.axis_angle, 6)
     << " squeeze=" << fmt_g(p.constellation.squeeze_r, 6)
     << " delta=" << fmt_g(p.channel.delta, 6)
     << " postselection=" << (p.postselection ? "on" : "off")
     << " ec=" << (p.ec.is_ideal() ? "ideal" : "linear")
     << " amplitude="
     << (p.amplitude.optimize ? "optimize(max=" + fmt_g(p.amplitude.max_amplitude, 6) + ")"
                              : "fixed(" + fmt_g(p.constellation.amplitude, 6) + ")")
     << " quad=" << fmt_g(p.quad.step, 6) << "/" << fmt_g(p.quad.angular_step, 6);
  if (p.quad.radial_limit > 0.0) os << "/limit=" << fmt_g(p.quad.radial_limit, 6);
  os << " warm_start=" << (cfg.warm_start ? "on" : "off")
     << " threads=" << cfg.threads;
  return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

/**
 * @brief Key-rate sweep across the configured eta grid.
 *
 * CSV rows are `eta,alpha_opt,G_base_d,G_bits` under a `#`-prefixed header;
 * --format json emits one object with a rows array instead. Failed points
 * are reported individually and turn the exit code to 1.
 */
inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<SweepResult> results;
  try {
    results = sweep(cfg.params, cfg.etas, cfg.warm_start, cfg.threads);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  bool failed = false;
  if (cfg.json) {
    nlohmann::ordered_json doc;
    doc["version"] = version;
    doc["params"] = detail::params_line(cfg);
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : results) {
      nlohmann::ordered_json row;
      row["eta"] = r.point.eta;
      if (r.ok) {
        row["alpha_opt"] = r.point.alpha_opt;
        row["gain_base_d"] = r.point.gain_base_d;
        row["gain_bits"] = r.point.gain_bits;
      } else {
        row["error"] = r.error;
        failed = true;
      }
      doc["rows"].push_back(row);
    }
    out << doc.dump(2) << "\n";
  } else {
    out << "# cvqkd-rate v" << version << ", params " << detail::params_line(cfg)
        << "\n";
    out << "eta,alpha_opt,G_base_d,G_bits\n";
    for (const auto& r : results) {
      if (r.ok) {
        out << detail::fmt_g(r.point.eta) << "," << detail::fmt_g(r.point.alpha_opt)
            << "," << detail::fmt_g(r.point.gain_base_d) << ","
            << detail::fmt_g(r.point.gain_bits) << "\n";
      } else {
        out << "# error at eta=" << detail::fmt_g(r.point.eta) << ": " << r.error
            << "\n";
        failed = true;
      }
    }
  }
  if (failed) {
    for (const auto& r : results)
      if (!r.ok)
        err << "error: numerical failure at eta=" << detail::fmt_g(r.point.eta)
            << ": " << r.error << "\n";
    return 1;
  }
  return 0;
}

/**
 * @brief Single-point report: mutual information, Holevo bound, and the key
 *        rate with and without postselection, in base d and in bits. With
 *        --optimize-amplitude the amplitude is resolved by search first and
 *        reported as an `alpha_opt` line; the breakdown is then evaluated at
 *        that amplitude.
 */
inline int cmd_point(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RunConfig c = cfg;
  if (c.etas.size() != 1) {
    err << "error: point requires a single --eta value\n";
    return 2;
  }
  c.params.channel.eta = c.etas[0];
  ProtocolParams p = c.params;
  const unsigned d = p.constellation.d;
  try {
    bool optimized = false;
    if (p.amplitude.optimize) {
      std::tie(p.constellation.amplitude, std::ignore) =
          optimize_amplitude(p, c.threads);
      p.amplitude.optimize = false;
      optimized = true;
    }
    const double i_ab =
        mutual_information(p.constellation, p.channel, p.scheme, p.quad);
    const double chi = chi_direct(p.constellation, p.channel.eta);
    ProtocolParams with_ps = p;
    with_ps.postselection = true;
    ProtocolParams no_ps = p;
    no_ps.postselection = false;
    const double g_ps = secure_key_rate(with_ps, c.threads);
    const double g_raw = secure_key_rate(no_ps, c.threads);
    out << "# cvqkd-rate v" << version << ", params " << detail::params_line(c)
        << " eta=" << detail::fmt_g(p.channel.eta) << "\n";
    if (optimized)
      out << "alpha_opt = " << detail::fmt_g(p.constellation.amplitude) << "\n";
    out << "I(A:B) (base-d) = " << detail::fmt_g(i_ab) << "\n";
    out << "chi_direct (base-d) = " << detail::fmt_g(chi) << "\n";
    out << "G with postselection (base-d) = " << detail::fmt_g(g_ps)
        << " (bits = " << detail::fmt_g(to_bits(g_ps, d)) << ")\n";
    out << "G without postselection (base-d) = " << detail::fmt_g(g_raw)
        << " (bits = " << detail::fmt_g(to_bits(g_raw, d)) << ")\n";
  } catch (const std::exception& e) {
    err << "error: numerical failure at eta=" << detail::fmt_g(c.params.channel.eta)
        << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

/**
 * @brief Monte-Carlo validation at one parameter point: the empirical mutual
 *        information must sit within 0.01 and three jackknife standard
 *        errors of the analytic value, and the outcome marginal must pass a
 *        Kolmogorov-Smirnov check.
 */
inline int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RunConfig c = cfg;
  if (c.etas.size() != 1) {
    err << "error: validate requires a single --eta value\n";
    return 2;
  }
  c.params.channel.eta = c.etas[0];
  const auto& p = c.params;
  if (c.samples < 100000)
    err << "warning: fewer than 100000 samples gives insufficient statistical "
           "power; the bands below are tuned for 1e6 samples\n";
  const unsigned bins =
      c.bins > 0 ? c.bins : (p.scheme == Scheme::DualHomodyne ? 64u : 256u);
  try {
    const double analytic =
        mutual_information(p.constellation, p.channel, p.scheme, p.quad);
    const Transcript t = sample_transcript(p, c.samples, c.seed);
    const MutualInformationEstimate est = empirical_mutual_information(t, bins);
    const double ks = ks_distance(t);
    const double diff = std::abs(est.value - analytic);
    const double ks_band =
        std::max(0.002, 2.0 / std::sqrt(static_cast<double>(c.samples)));
    const bool ok = diff <= 0.01 && diff <= 3.0 * est.std_error && ks < ks_band;

    out << "# cvqkd-rate v" << version << ", params " << detail::params_line(c)
        << " eta=" << detail::fmt_g(p.channel.eta) << " samples=" << c.samples
        << " seed=" << c.seed << " bins=" << bins << "\n";
    out << "analytic I (base-d) = " << detail::fmt_g(analytic) << "\n";
    out << "empirical I (base-d) = " << detail::fmt_g(est.value)
        << " +- " << detail::fmt_g(est.std_error) << "\n";
    out << "|delta I| = " << detail::fmt_g(diff) << " (bands: 0.01 and 3*SE = "
        << detail::fmt_g(3.0 * est.std_error) << ")\n";
    out << "KS distance = " << detail::fmt_g(ks) << " (band " << detail::fmt_g(ks_band)
        << ")\n";
    out << (ok ? "PASS" : "FAIL") << "\n";
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: numerical failure at eta=" << detail::fmt_g(c.params.channel.eta)
        << ": " << e.what() << "\n";
    return 1;
  }
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

namespace detail {

/**
 * @brief Translate the positional argument layout of the original program:
 *        `HD|DHD DR|RR d squeeze stepsize precision limit [denom] [noise] [ar]`
 *        into a sweep configuration (eta from 1 down to 0 by `stepsize`,
 *        chi = pi/denom, amplitude optimized when ar = 0, warm start on).
 */
inline RunConfig translate_compat(const std::string& args) {
  std::istringstream is(args);
  std::vector<std::string> tok;
  std::string t;
  while (is >> t) tok.push_back(t);
  if (tok.size() < 7 || tok.size() > 10)
    throw std::invalid_argument(
        "compat argument string needs 7..10 tokens: "
        "HD|DHD DR|RR d squeeze stepsize precision limit [denom] [noise] [ar]");

  auto upper = [](std::string s) {
    for (char& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return s;
  };

  RunConfig cfg;
  cfg.command = RunConfig::Command::Sweep;
  const std::string scheme = upper(tok[0]);
  if (scheme == "HD")
    cfg.params.scheme = Scheme::Homodyne;
  else if (scheme == "DHD")
    cfg.params.scheme = Scheme::DualHomodyne;
  else
    throw std::invalid_argument("compat: first token must be HD or DHD");
  const std::string mode = upper(tok[1]);
  if (mode == "DR")
    cfg.params.mode = ReconciliationMode::Direct;
  else if (mode == "RR")
    cfg.params.mode = ReconciliationMode::Reverse;
  else
    throw std::invalid_argument("compat: second token must be DR or RR");

  cfg.params.constellation.d = static_cast<unsigned>(std::stoul(tok[2]));
  cfg.params.constellation.squeeze_r = std::stod(tok[3]);
  const double stepsize = std::stod(tok[4]);
  cfg.params.quad.step = std::stod(tok[5]);
  cfg.params.quad.radial_limit = std::stod(tok[6]);
  const long denom = tok.size() > 7 ? std::stol(tok[7]) : 0;
  cfg.params.channel.delta = tok.size() > 8 ? std::stod(tok[8]) : 0.0;
  const double ar = tok.size() > 9 ? std::stod(tok[9]) : 0.0;

  cfg.params.constellation.axis_angle =
      denom == 0 ? 0.0 : pi / static_cast<double>(denom);
  if (ar == 0.0) {
    cfg.params.amplitude.optimize = true;
    cfg.params.amplitude.max_amplitude = 12.0;
  } else {
    cfg.params.amplitude.optimize = false;
    cfg.params.constellation.amplitude = ar;
  }
  cfg.params.postselection = true;
  cfg.warm_start = true;
  cfg.etas = parse_eta_grid("1.0:0.0:" + tok[4]);
  if (!(stepsize > 0.0))
    throw std::invalid_argument("compat: stepsize must be > 0");
  return cfg;
}

}  // namespace detail

/**
 * @brief Parse arguments and run the requested subcommand.
 *
 * @return 0 on success, 1 on numerical/validation failure, 2 on
 *         configuration errors (usage text goes to err).
 */
inline int run_cli(int argc, const char* const* argv, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Secure key rates of phase-symmetric continuous-variable QKD "
               "under the beam-splitter attack"};
  app.set_version_flag("--version", std::string("cvqkd-rate v") + version);

  std::string scheme = "hd";
  std::string mode = "dr";
  unsigned d = 2;
  double alpha = 1.0;
  bool optimize = false;
  double max_amp = 12.0;
  double chi = 0.0;
  std::string chi_preset;
  long chi_denom = 0;
  double squeeze = 0.0;
  double delta = 0.0;
  std::string eta_grid;
  bool postselection = true;
  std::vector<double> ec_linear;
  double quad_step = 0.01;
  double quad_angular = 0.04;
  double quad_limit = 0.0;
  unsigned threads = 1;
  bool warm_start = false;
  std::string format = "csv";
  std::size_t samples = 1000000;
  std::uint64_t seed = 1;
  unsigned bins = 0;
  std::string compat;

  app.add_option("--compat-appendix-b", compat,
                 "translate an argument string of the original program "
                 "(HD|DHD DR|RR d squeeze stepsize precision limit [denom] "
                 "[noise] [ar]) and run the equivalent sweep");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scheme", scheme, "measurement scheme: hd or dhd")
        ->check(CLI::IsMember({"hd", "dhd"}));
    cmd->add_option("--mode", mode, "reconciliation: dr or rr")
        ->check(CLI::IsMember({"dr", "rr"}));
    cmd->add_option("--d", d, "number of ring states (>= 2)");
    cmd->add_option("--alpha", alpha, "fixed signal amplitude");
    cmd->add_flag("--optimize-amplitude", optimize,
                  "search for the best amplitude per eta");
    cmd->add_option("--max-amp", max_amp, "amplitude search window edge");
    auto* o_chi = cmd->add_option("--chi", chi, "ring rotation in radians");
    auto* o_preset =
        cmd->add_option("--chi-preset", chi_preset,
                        "named ring rotation: none, global or local")
            ->check(CLI::IsMember({"none", "global", "local"}));
    auto* o_denom = cmd->add_option("--chi-denom", chi_denom,
                                    "ring rotation pi/denom (0 means 0)");
    o_chi->excludes(o_preset)->excludes(o_denom);
    o_preset->excludes(o_chi)->excludes(o_denom);
    o_denom->excludes(o_chi)->excludes(o_preset);
    cmd->add_option("--squeeze", squeeze, "squeezing parameter r");
    cmd->add_option("--delta", delta, "excess detector noise");
    cmd->add_option("--eta", eta_grid,
                    "transmittance: single value or descending start:stop:step");
    cmd->add_flag("--postselection,!--no-postselection", postselection,
                  "keep only positive-gain outcomes (default on)");
    cmd->add_option("--ec-linear", ec_linear,
                    "linear reconciliation-efficiency model: a b")
        ->expected(2);
    cmd->add_option("--quad-step", quad_step, "quadrature grid step");
    cmd->add_option("--quad-angular-step", quad_angular,
                    "angular grid step (planar)");
    cmd->add_option("--quad-radial-limit", quad_limit,
                    "override the automatic integration limit");
    cmd->add_option("--threads", threads, "worker threads");
    cmd->add_flag("--warm-start", warm_start,
                  "re-centre the amplitude window along the sweep");
    cmd->add_option("--format", format, "output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* c_sweep = app.add_subcommand("sweep", "key-rate sweep over eta");
  CLI::App* c_point = app.add_subcommand("point", "single-point report");
  CLI::App* c_validate =
      app.add_subcommand("validate", "Monte-Carlo validation at one point");
  add_common(c_sweep);
  add_common(c_point);
  add_common(c_validate);
  c_validate->add_option("--samples", samples, "Monte-Carlo sample count");
  c_validate->add_option("--seed", seed, "Monte-Carlo seed");
  c_validate->add_option("--bins", bins, "histogram bins per axis");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  RunConfig cfg;
  try {
    if (!compat.empty()) {
      cfg = detail::translate_compat(compat);
    } else {
      if (app.get_subcommands().empty())
        throw std::invalid_argument(
            "a subcommand is required: sweep, point or validate");
      CLI::App* sub = app.get_subcommands().front();
      cfg.command = sub == c_point ? RunConfig::Command::Point
                    : sub == c_validate ? RunConfig::Command::Validate
                                        : RunConfig::Command::Sweep;
      cfg.params.scheme = scheme == "dhd" ? Scheme::DualHomodyne : Scheme::Homodyne;
      cfg.params.mode =
          mode == "rr" ? ReconciliationMode::Reverse : ReconciliationMode::Direct;
      cfg.params.constellation.d = d;
      cfg.params.constellation.amplitude = alpha;
      cfg.params.constellation.squeeze_r = squeeze;
      if (!chi_preset.empty()) {
        const PhasePreset preset = chi_preset == "global" ? PhasePreset::Global
                                   : chi_preset == "local" ? PhasePreset::Local
                                                           : PhasePreset::None;
        cfg.params.constellation.axis_angle = phase_preset(d, preset);
      } else if (chi_denom != 0) {
        cfg.params.constellation.axis_angle = pi / static_cast<double>(chi_denom);
      } else {
        cfg.params.constellation.axis_angle = chi;
      }
      cfg.params.channel.delta = delta;
      cfg.params.postselection = postselection;
      if (!ec_linear.empty())
        cfg.params.ec = ECModel::linear(ec_linear[0], ec_linear[1]);
      cfg.params.quad.step = quad_step;
      cfg.params.quad.angular_step = quad_angular;
      cfg.params.quad.radial_limit = quad_limit;
      cfg.params.amplitude.optimize = optimize;
      cfg.params.amplitude.max_amplitude = max_amp;
      cfg.warm_start = warm_start;
      cfg.threads = threads;
      cfg.json = format == "json";
      cfg.samples = samples;
      cfg.seed = seed;
      cfg.bins = bins;
      if (eta_grid.empty())
        throw std::invalid_argument("--eta is required");
      cfg.etas = detail::parse_eta_grid(eta_grid);
    }

    // Reject impossible protocol combinations at parse time.
    if (cfg.params.scheme == Scheme::DualHomodyne &&
        cfg.params.constellation.squeeze_r != 0.0)
      throw std::invalid_argument(
          "dual homodyne supports coherent signals only (--squeeze must be 0)");
    ProtocolParams check = cfg.params;
    check.channel.eta = cfg.etas.empty() ? 1.0 : cfg.etas.front();
    validate(check);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  switch (cfg.command) {
    case RunConfig::Command::Point:
      return cmd_point(cfg, out, err);
    case RunConfig::Command::Validate:
      return cmd_validate(cfg, out, err);
    case RunConfig::Command::Sweep:
      break;
  }
  return cmd_sweep(cfg, out, err);
}

}  // namespace cvqkd
