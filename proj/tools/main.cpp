// Command-line front end: closed-form calculators, the Monte Carlo attack
// simulation, parameter sweeps, and reproduction of the published operating
// points with pass/fail checks.
//
// Exit codes: 0 success, 2 argument error, 3 numerical failure
// (bracketing/convergence), 4 reproduction outside tolerance.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cowattack/analytics.hpp"
#include "cowattack/bounds.hpp"
#include "cowattack/sim.hpp"
#include "cowattack/usd.hpp"

namespace {

using namespace cowattack;

constexpr std::uint64_t kDefaultSeed = 987654321;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitTolerance = 4;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Output {
  std::string path;  // empty = stdout
  std::string format = "human";
  std::string config_path;

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream file(path);
    if (!file) throw CLI::ValidationError("--out", "cannot open " + path);
    file << text;
  }
};

void add_output_options(CLI::App* cmd, Output& out) {
  cmd->add_option("--format", out.format, "Output format")
      ->check(CLI::IsMember({"human", "csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", out.path, "Write output to a file instead of stdout");
  cmd->add_option("--config", out.config_path,
                  "Config file with key=value lines; explicit flags win");
}

std::string strip(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

// key=value lines, blank lines and #-comments allowed; each entry becomes a
// --key=value argument injected ahead of the explicit flags.
std::vector<std::string> load_config_args(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::invalid_argument("cannot read config file " + path);
  std::vector<std::string> args;
  std::string line;
  while (std::getline(file, line)) {
    const std::string entry = strip(line);
    if (entry.empty() || entry.front() == '#') continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument("config: expected key=value, got: " + entry);
    args.push_back("--" + strip(entry.substr(0, eq)) + "=" +
                   strip(entry.substr(eq + 1)));
  }
  return args;
}

// Later occurrences win, so config-injected values yield to explicit flags.
void allow_overrides(CLI::App* cmd) {
  for (CLI::Option* option : cmd->get_options())
    if (option->nonpositional() && option->get_expected_min() >= 1)
      option->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

void add_protocol_options(CLI::App* cmd, ProtocolParams& params,
                          bool mu_required) {
  auto* mu = cmd->add_option("--mu", params.mu,
                             "Mean photon number per pulse, mu = |alpha|^2");
  if (mu_required)
    mu->required();
  else
    mu->capture_default_str();
  cmd->add_option("--f", params.f, "Decoy emission probability")
      ->capture_default_str();
  cmd->add_option("--mmax", params.m_max, "Attack truncation depth M_max")
      ->capture_default_str();
}

void add_channel_options(CLI::App* cmd, ChannelParams& channel) {
  cmd->add_option("--pd", channel.p_dark, "Dark-count probability per gate")
      ->capture_default_str();
  cmd->add_option("--eta-det", channel.eta_det, "Detector efficiency")
      ->capture_default_str();
  cmd->add_option("--tb", channel.t_bob, "Receiver beamsplitter transmittance")
      ->capture_default_str();
  cmd->add_option("--att", channel.att_db_km, "Fiber attenuation, dB/km")
      ->capture_default_str();
}

std::string scalar_report(const Output& out,
                          const std::vector<std::pair<std::string, double>>& kv,
                          const std::string& human) {
  if (out.format == "human") return human;
  if (out.format == "csv") {
    std::string header, row;
    for (const auto& [key, value] : kv) {
      if (!header.empty()) {
        header += ',';
        row += ',';
      }
      header += key;
      row += format_double(value);
    }
    return header + "\n" + row + "\n";
  }
  nlohmann::ordered_json j;
  for (const auto& [key, value] : kv) j[key] = std::stod(format_double(value));
  return j.dump(2) + "\n";
}

// ---- subcommand runners ----------------------------------------------------

int run_usd(const ProtocolParams& params, const Output& out) {
  const UsdSolution sol = optimal_usd(params);
  std::ostringstream human;
  human << "regime     " << to_string(sol.regime) << "\n"
        << "q_ss       " << format_double(sol.q_ss) << "\n"
        << "q_ds       " << format_double(sol.q_ds) << "\n"
        << "q_inc_s    " << format_double(1.0 - sol.q_ss) << "\n"
        << "q_inc_d    " << format_double(1.0 - sol.q_ds) << "\n"
        << "p_c        " << format_double(sol.p_c) << "\n"
        << "p(0|c)     " << format_double(sol.p_cond[0]) << "\n"
        << "p(1|c)     " << format_double(sol.p_cond[1]) << "\n"
        << "p(2|c)     " << format_double(sol.p_cond[2]) << "\n";
  if (out.format == "human") {
    out.write(human.str());
  } else if (out.format == "csv") {
    out.write(scalar_report(out,
                            {{"q_ss", sol.q_ss},
                             {"q_ds", sol.q_ds},
                             {"p_c", sol.p_c},
                             {"p0_c", sol.p_cond[0]},
                             {"p1_c", sol.p_cond[1]},
                             {"p2_c", sol.p_cond[2]}},
                            ""));
  } else {
    nlohmann::ordered_json j;
    j["regime"] = to_string(sol.regime);
    j["q_ss"] = std::stod(format_double(sol.q_ss));
    j["q_ds"] = std::stod(format_double(sol.q_ds));
    j["p_c"] = std::stod(format_double(sol.p_c));
    j["p_cond"] = {std::stod(format_double(sol.p_cond[0])),
                   std::stod(format_double(sol.p_cond[1])),
                   std::stod(format_double(sol.p_cond[2]))};
    out.write(j.dump(2) + "\n");
  }
  return kExitOk;
}

int run_gain(const ProtocolParams& params, const Output& out) {
  const double g = gain_zero(params);
  const double log10g = g > 0.0 ? std::log10(g)
                                : -std::numeric_limits<double>::infinity();
  char human[128];
  std::snprintf(human, sizeof human, "G_zero        %s\nlog10(G_zero) %.2f\n",
                format_double(g).c_str(), log10g);
  out.write(scalar_report(out, {{"g_zero", g}, {"log10_g_zero", log10g}}, human));
  return kExitOk;
}

int run_pclick(const ProtocolParams& params, std::optional<double> p1c_flag,
               int k_max, const Output& out) {
  double p1c;
  if (p1c_flag) {
    p1c = *p1c_flag;
  } else {
    p1c = optimal_usd(params).p1c();
  }
  std::ostringstream text;
  const bool human = out.format == "human";
  if (human)
    text << "p(1|c) = " << format_double(p1c) << "\n  k  p_click(k)\n";
  else
    text << "k,p_click\n";
  for (int k = 2; k <= k_max; ++k) {
    // p(1|c) = 0 only in regime R3, where no block ever clicks
    const double value = p1c > 0.0 ? p_click(k, p1c) : 0.0;
    if (human) {
      char row[64];
      std::snprintf(row, sizeof row, "%3d  %s\n", k, format_double(value).c_str());
      text << row;
    } else {
      text << k << ',' << format_double(value) << "\n";
    }
  }
  out.write(text.str());
  return kExitOk;
}

int run_simulate(const ProtocolParams& params, const SimConfig& config,
                 const Output& out) {
  const SimReport report = run_simulation(params, config);
  if (out.format == "json") {
    out.write(to_json(report) + "\n");
    return kExitOk;
  }
  if (out.format == "csv") {
    std::ostringstream text;
    text << "n_signals,clicks,gain_estimate,gain_std_error,qber_violations,"
            "monitored_pair_violations,seed,histogram\n"
         << report.n_signals << ',' << report.clicks << ','
         << format_double(report.gain_estimate) << ','
         << format_double(report.gain_std_error) << ','
         << report.qber_violations << ',' << report.monitored_pair_violations
         << ',' << report.seed << ',';
    for (std::size_t k = 0; k < report.block_length_histogram.size(); ++k)
      text << (k ? ";" : "") << report.block_length_histogram[k];
    text << "\n";
    out.write(text.str());
    return kExitOk;
  }
  std::ostringstream text;
  text << "signals                    " << report.n_signals << "\n"
       << "clicks                     " << report.clicks << "\n"
       << "gain estimate              " << format_double(report.gain_estimate)
       << "\n"
       << "gain std error             " << format_double(report.gain_std_error)
       << "\n"
       << "qber violations            " << report.qber_violations << "\n"
       << "monitored pair violations  " << report.monitored_pair_violations
       << "\n"
       << "analytic G_zero            " << format_double(gain_zero(params))
       << "\n"
       << "seed                       " << report.seed << "\n";
  out.write(text.str());
  return kExitOk;
}

int run_lzero(const ChannelParams& channel, const ProtocolParams& params,
              const Output& out) {
  const double km = l_zero(channel, params);
  char human[96];
  std::snprintf(human, sizeof human, "L_zero  %.2f km\n", km);
  out.write(scalar_report(out, {{"l_zero_km", km}}, human));
  return kExitOk;
}

int run_mumax(double eta, const ProtocolParams& params, const Output& out) {
  const double mu = mu_max(eta, params.f, params.m_max);
  out.write(scalar_report(out, {{"eta", eta}, {"mu_max", mu}},
                          "mu_max  " + format_double(mu) + "\n"));
  return kExitOk;
}

int run_rupp(double eta, const ProtocolParams& params, const Output& out) {
  const double rate = r_upp(eta, params.f, params.m_max);
  out.write(scalar_report(out, {{"eta", eta}, {"r_upp", rate}},
                          "R_upp  " + format_double(rate) + "\n"));
  return kExitOk;
}

int run_sweep(const std::string& what, double from, double to, int points,
              const ProtocolParams& params, const Output& out) {
  std::ostringstream text;
  if (what == "mumax") {
    write_mu_max_sweep(text, from, to, points, params.f, params.m_max);
  } else if (what == "rupp") {
    write_r_upp_sweep(text, from, to, points, params.f, params.m_max);
  } else {  // gain: linear sweep over mu
    text << "mu,g_zero\n";
    for (int i = 0; i < points; ++i) {
      const double mu = from + (to - from) * i / (points - 1);
      ProtocolParams p = params;
      p.mu = mu;
      text << format_double(mu) << ',' << format_double(gain_zero(p)) << "\n";
    }
  }
  out.write(text.str());
  return kExitOk;
}

// ---- reproduction of the published operating points ------------------------

struct ReproCheck {
  std::string label;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string unit;

  bool pass() const { return std::abs(value - expected) <= tolerance; }
};

int report_checks(const std::vector<ReproCheck>& checks,
                  const std::vector<std::string>& notes, const Output& out) {
  std::ostringstream text;
  bool all_pass = true;
  for (const auto& check : checks) {
    const bool ok = check.pass();
    all_pass = all_pass && ok;
    char line[160];
    std::snprintf(line, sizeof line, "%-38s %10.4f  expected %.4f +/- %g %s  [%s]\n",
                  check.label.c_str(), check.value, check.expected,
                  check.tolerance, check.unit.c_str(), ok ? "PASS" : "FAIL");
    text << line;
  }
  for (const auto& note : notes) text << note << "\n";
  text << (all_pass ? "PASS" : "FAIL") << "\n";
  out.write(text.str());
  return all_pass ? kExitOk : kExitTolerance;
}

int run_reproduce(const std::string& target, const Output& out) {
  const ChannelParams channel_mu006{4.38e-7, 0.22, 0.9, 16.9 / 104.0};
  const ChannelParams channel_mu01{1.3e-8, 0.27, 0.9, 34.1 / 203.0};
  const ChannelParams channel_std{2e-8, 0.77, 0.9, 0.2};

  if (target == "table3") {
    const ProtocolParams low{0.06, 0.155, 10};
    const ProtocolParams high{0.1, 0.155, 10};
    return report_checks(
        {{"log10(G_zero), mu=0.06", std::log10(gain_zero(low)), -2.62, 0.01, ""},
         {"L_zero, mu=0.06", l_zero(channel_mu006, low), 47.0, 1.0, "km"},
         {"log10(G_zero), mu=0.1", std::log10(gain_zero(high)), -2.19, 0.01, ""},
         {"L_zero, mu=0.1", l_zero(channel_mu01, high), 38.0, 1.0, "km"}},
        {"reference attack (documented, not computed): log10(G_zero) = -3.8, "
         "L_zero = 120 km at mu = 0.06; -3.3, 105 km at mu = 0.1"},
        out);
  }
  if (target == "table4") {
    return report_checks({{"L_zero, standard fiber",
                           l_zero(channel_std, {0.5, 0.1, 10}), 22.60, 0.05,
                           "km"}},
                         {}, out);
  }
  if (target == "fig6") {
    const double f = 0.155;
    const double eta = 1e-4;
    const double ratio = mu_max(eta, f, 10) / eta;
    const double asymptote = (1.0 + f) / ((1.0 - f) * (1.0 - f));
    std::ostringstream sweep;
    write_mu_max_sweep(sweep, 1e-4, 1e-2, 21, f, 10);
    out.write(sweep.str());
    return report_checks(
        {{"mu_max/eta at eta=1e-4 (rel. to limit)", ratio / asymptote, 1.0,
          0.05, ""}},
        {}, out);
  }
  if (target == "fig7") {
    const double f = 0.155;
    std::ostringstream sweep;
    write_r_upp_sweep(sweep, 1e-4, 1e-2, 21, f, 10);
    out.write(sweep.str());
    std::vector<double> lx, ly;
    const int points = 21;
    for (int i = 0; i < points; ++i) {
      const double eta = 1e-4 * std::pow(10.0, 2.0 * i / (points - 1));
      lx.push_back(std::log10(eta));
      ly.push_back(std::log10(r_upp(eta, f, 10)));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < points; ++i) {
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    const double slope =
        (points * sxy - sx * sy) / (points * sxx - sx * sx);
    return report_checks({{"log-log slope of R_upp vs eta", slope, 2.0, 0.05, ""}},
                         {}, out);
  }
  throw CLI::ValidationError("reproduce",
                             "unknown target (table3|table4|fig6|fig7)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-error attack toolkit for coherent-one-way QKD"};
  app.require_subcommand(1);

  // usd
  ProtocolParams usd_params;
  Output usd_out;
  auto* usd_cmd = app.add_subcommand(
      "usd", "Optimal unambiguous-discrimination probabilities");
  add_protocol_options(usd_cmd, usd_params, true);
  add_output_options(usd_cmd, usd_out);

  // gain
  ProtocolParams gain_params;
  Output gain_out;
  auto* gain_cmd =
      app.add_subcommand("gain", "Zero-error attack gain G_zero");
  add_protocol_options(gain_cmd, gain_params, true);
  add_output_options(gain_cmd, gain_out);

  // pclick
  ProtocolParams pclick_params;
  Output pclick_out;
  double pclick_p1c = -1.0;
  int pclick_kmax = 10;
  auto* pclick_cmd = app.add_subcommand(
      "pclick", "Expected clicks per k-block, k = 2..kmax");
  add_protocol_options(pclick_cmd, pclick_params, false);
  auto* p1c_opt = pclick_cmd->add_option(
      "--p1c", pclick_p1c, "Use this p(1|c) instead of deriving it from mu, f");
  pclick_cmd->add_option("--kmax", pclick_kmax, "Largest block size tabulated")
      ->capture_default_str()
      ->check(CLI::Range(2, 1000000));
  add_output_options(pclick_cmd, pclick_out);

  // simulate
  ProtocolParams sim_params;
  Output sim_out;
  SimConfig sim_config{1000000, kDefaultSeed, 1};
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Monte Carlo run of the full attack pipeline");
  add_protocol_options(sim_cmd, sim_params, true);
  sim_cmd->add_option("--n", sim_config.n, "Signals to simulate (>= 10^4)")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim_config.seed, "Simulation seed")
      ->capture_default_str();
  sim_cmd
      ->add_option("--segments", sim_config.segments,
                   "Independently seeded parallel segments")
      ->capture_default_str();
  add_output_options(sim_cmd, sim_out);

  // lzero
  ProtocolParams lzero_params;
  ChannelParams lzero_channel;
  Output lzero_out;
  auto* lzero_cmd = app.add_subcommand(
      "lzero", "Distance where the expected gain meets G_zero");
  add_protocol_options(lzero_cmd, lzero_params, true);
  add_channel_options(lzero_cmd, lzero_channel);
  add_output_options(lzero_cmd, lzero_out);

  // mumax
  ProtocolParams mumax_params;
  Output mumax_out;
  double mumax_eta = 0.0;
  auto* mumax_cmd = app.add_subcommand(
      "mumax", "Largest intensity with G_zero below the expected gain");
  mumax_cmd->add_option("--eta", mumax_eta, "Overall system transmittance")
      ->required();
  add_protocol_options(mumax_cmd, mumax_params, false);
  add_output_options(mumax_cmd, mumax_out);

  // rupp
  ProtocolParams rupp_params;
  Output rupp_out;
  double rupp_eta = 0.0;
  auto* rupp_cmd =
      app.add_subcommand("rupp", "Key-rate upper bound (1-f) eta mu_max");
  rupp_cmd->add_option("--eta", rupp_eta, "Overall system transmittance")
      ->required();
  add_protocol_options(rupp_cmd, rupp_params, false);
  add_output_options(rupp_cmd, rupp_out);

  // sweep
  ProtocolParams sweep_params;
  Output sweep_out;
  std::string sweep_what;
  double sweep_from = 1e-4, sweep_to = 1e-2;
  int sweep_points = 21;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "CSV sweep: mumax/rupp over eta (log), gain over mu (linear)");
  sweep_cmd->add_option("what", sweep_what, "Quantity to sweep")
      ->required()
      ->check(CLI::IsMember({"mumax", "rupp", "gain"}));
  sweep_cmd->add_option("--from", sweep_from, "Sweep start")
      ->capture_default_str();
  sweep_cmd->add_option("--to", sweep_to, "Sweep end")->capture_default_str();
  sweep_cmd->add_option("--points", sweep_points, "Number of points")
      ->capture_default_str()
      ->check(CLI::Range(2, 100000));
  add_protocol_options(sweep_cmd, sweep_params, false);
  add_output_options(sweep_cmd, sweep_out);

  // reproduce
  Output repro_out;
  std::string repro_target;
  auto* repro_cmd = app.add_subcommand(
      "reproduce",
      "Recompute a published operating point and check it against tolerance");
  repro_cmd->add_option("target", repro_target, "table3|table4|fig6|fig7")
      ->required()
      ->check(CLI::IsMember({"table3", "table4", "fig6", "fig7"}));
  add_output_options(repro_cmd, repro_out);

  for (CLI::App* cmd :
       {usd_cmd, gain_cmd, pclick_cmd, sim_cmd, lzero_cmd, mumax_cmd, rupp_cmd,
        sweep_cmd, repro_cmd})
    allow_overrides(cmd);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size())
        config_path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0)
        config_path = args[i].substr(9);
    }
    if (!config_path.empty() && !args.empty() && args.front().front() != '-') {
      const auto config_args = load_config_args(config_path);
      args.insert(args.begin() + 1, config_args.begin(), config_args.end());
    }
    std::reverse(args.begin(), args.end());  // CLI11 parses a reversed vector
    app.parse(args);

    if (usd_cmd->parsed()) return run_usd(usd_params, usd_out);
    if (gain_cmd->parsed()) return run_gain(gain_params, gain_out);
    if (pclick_cmd->parsed())
      return run_pclick(pclick_params,
                        p1c_opt->count() ? std::optional<double>(pclick_p1c)
                                         : std::nullopt,
                        pclick_kmax, pclick_out);
    if (sim_cmd->parsed()) return run_simulate(sim_params, sim_config, sim_out);
    if (lzero_cmd->parsed())
      return run_lzero(lzero_channel, lzero_params, lzero_out);
    if (mumax_cmd->parsed()) return run_mumax(mumax_eta, mumax_params, mumax_out);
    if (rupp_cmd->parsed()) return run_rupp(rupp_eta, rupp_params, rupp_out);
    if (sweep_cmd->parsed())
      return run_sweep(sweep_what, sweep_from, sweep_to, sweep_points,
                       sweep_params, sweep_out);
    if (repro_cmd->parsed()) return run_reproduce(repro_target, repro_out);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
