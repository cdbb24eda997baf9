#include "cowattack/sim.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <stdexcept>

#include <json.hpp>

#include "cowattack/rng.hpp"

namespace cowattack {

const char* to_string(SignalKind s) {
  switch (s) {
    case SignalKind::Bit0: return "bit0";
    case SignalKind::Bit1: return "bit1";
    case SignalKind::Decoy: return "decoy";
    case SignalKind::Vacuum: return "vacuum";
  }
  return "?";
}

std::optional<SubBlock> best_subblock(std::span<const SignalKind> block) {
  const std::size_t k = block.size();
  if (k == 0) throw std::invalid_argument("best_subblock requires a nonempty block");
  for (SignalKind s : block)
    if (s == SignalKind::Vacuum)
      throw std::invalid_argument("blocks contain identified signals only");

  // Only the boundary conditions constrain a range, so the longest valid
  // range is [smallest valid first, largest valid last].
  const std::size_t none = k;
  std::size_t first = none;
  for (std::size_t a = 0; a < k; ++a) {
    if (block[a] == SignalKind::Bit1 ||
        (a > 0 && block[a - 1] == SignalKind::Bit0)) {
      first = a;
      break;
    }
  }
  std::size_t last = none;
  for (std::size_t b = k; b-- > 0;) {
    if (block[b] == SignalKind::Bit0 ||
        (b + 1 < k && block[b + 1] == SignalKind::Bit1)) {
      last = b;
      break;
    }
  }
  if (first == none || last == none || first > last) return std::nullopt;
  return SubBlock{first, last};
}

std::vector<SignalKind> generate_stream(const ProtocolParams& params,
                                        std::size_t n, std::uint64_t seed) {
  validate(params);
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  std::mt19937_64 gen(seed);
  const double p_bit = (1.0 - params.f) / 2.0;
  std::vector<SignalKind> stream(n);
  for (auto& s : stream) {
    const double u = uniform_unit(gen);
    s = u < p_bit               ? SignalKind::Bit0
        : u < 2.0 * p_bit       ? SignalKind::Bit1
                                : SignalKind::Decoy;
  }
  return stream;
}

std::vector<MeasureOutcome> measure_stream(std::span<const SignalKind> stream,
                                           const UsdSolution& usd,
                                           std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<MeasureOutcome> outcomes(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const SignalKind s = stream[i];
    if (s == SignalKind::Vacuum)
      throw std::invalid_argument("source streams never contain vacuum signals");
    const double q = s == SignalKind::Decoy ? usd.q_ds : usd.q_ss;
    if (uniform_unit(gen) < q)
      outcomes[i] = MeasureOutcome{s, true};
    else
      outcomes[i] = MeasureOutcome{SignalKind::Vacuum, false};
  }
  return outcomes;
}

EveResult eve_transform(std::span<const MeasureOutcome> outcomes, int m_max) {
  if (m_max < 2) throw std::invalid_argument("m_max must be >= 2");
  const std::size_t n = outcomes.size();

  EveResult result;
  result.transmitted.assign(n, SignalKind::Vacuum);
  std::vector<SignalKind> run;
  run.reserve(static_cast<std::size_t>(m_max));
  std::size_t block_start = 0;

  const auto flush = [&](std::size_t end) {
    if (run.size() >= 2) {
      if (const auto sub = best_subblock(run)) {
        for (std::size_t i = sub->first; i <= sub->last; ++i)
          result.transmitted[block_start + i] = run[i];
      }
    }
    result.blocks.push_back(BlockRecord{
        block_start, static_cast<std::uint32_t>(run.size()),
        static_cast<std::uint32_t>(end - block_start)});
    run.clear();
    block_start = end;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const MeasureOutcome& outcome = outcomes[i];
    if (outcome.conclusive) {
      if (outcome.kind == SignalKind::Vacuum)
        throw std::invalid_argument("conclusive outcome lacks an identified signal");
      run.push_back(outcome.kind);
      if (static_cast<int>(run.size()) == m_max) {
        // Truncation: the next signal is replaced unconditionally and its
        // outcome is consumed; counting restarts after it.
        const std::size_t end = std::min(i + 2, n);
        flush(end);
        i = end - 1;
      }
    } else {
      flush(i + 1);
    }
  }
  if (!run.empty()) flush(n);  // stream ended mid-run
  return result;
}

namespace {

bool pulse_occupied(std::span<const SignalKind> signals, std::size_t pulse) {
  const SignalKind s = signals[pulse / 2];
  return pulse % 2 == 0 ? first_pulse_occupied(s) : second_pulse_occupied(s);
}

}  // namespace

BobTally bob_count(std::span<const SignalKind> transmitted,
                   std::span<const SignalKind> alice_stream,
                   std::uint64_t seed) {
  if (transmitted.size() != alice_stream.size())
    throw std::invalid_argument("transmitted and source streams differ in length");
  std::mt19937_64 gen(seed);

  BobTally tally;
  tally.bits.assign(transmitted.size(), -1);
  for (std::size_t i = 0; i < transmitted.size(); ++i) {
    const SignalKind sent = transmitted[i];
    if (sent == SignalKind::Vacuum) continue;  // untrusted devices: no click
    ++tally.clicks;
    int bit;
    switch (sent) {
      case SignalKind::Bit0: bit = 0; break;
      case SignalKind::Bit1: bit = 1; break;
      default: bit = uniform_unit(gen) < 0.5 ? 0 : 1; break;  // double click
    }
    tally.bits[i] = static_cast<std::int8_t>(bit);
    const SignalKind original = alice_stream[i];
    if (original == SignalKind::Bit0 || original == SignalKind::Bit1) {
      const int alice_bit = original == SignalKind::Bit1 ? 1 : 0;
      if (bit != alice_bit) ++tally.qber_violations;
    }
  }

  // Monitoring line: an adjacent pulse pair prepared occupied-occupied by
  // Alice must not arrive with exactly one pulse occupied.
  const std::size_t pulses = 2 * transmitted.size();
  for (std::size_t p = 0; p + 1 < pulses; ++p) {
    if (!pulse_occupied(alice_stream, p) || !pulse_occupied(alice_stream, p + 1))
      continue;
    const bool got_first = pulse_occupied(transmitted, p);
    const bool got_second = pulse_occupied(transmitted, p + 1);
    if (got_first != got_second) ++tally.monitored_pair_violations;
  }
  return tally;
}

namespace {

void finalize_report(SimReport& report) {
  report.gain_estimate = report.n_signals == 0
                             ? 0.0
                             : static_cast<double>(report.clicks) /
                                   static_cast<double>(report.n_signals);
  const auto& t = report.tallies;
  report.gain_std_error = 0.0;
  if (t.blocks >= 2 && t.sum_l > 0.0) {
    // Ratio estimator G = sum_c / sum_l over i.i.d. blocks: the variance of
    // the residuals c_i - G l_i propagates through the mean block length.
    const double blocks = static_cast<double>(t.blocks);
    const double ratio = t.sum_c / t.sum_l;
    const double mean_l = t.sum_l / blocks;
    const double ss =
        t.sum_cc - 2.0 * ratio * t.sum_cl + ratio * ratio * t.sum_ll;
    const double var = std::max(0.0, ss / (blocks - 1.0));
    report.gain_std_error = std::sqrt(var / blocks) / mean_l;
  }
}

}  // namespace

SimReport run_segment(const ProtocolParams& params, std::size_t n,
                      std::uint64_t seed) {
  validate(params);
  const UsdSolution usd = optimal_usd(params);
  const auto stream = generate_stream(params, n, derive_seed(seed, 0));
  const auto outcomes = measure_stream(stream, usd, derive_seed(seed, 1));
  const auto eve = eve_transform(outcomes, params.m_max);
  const auto tally = bob_count(eve.transmitted, stream, derive_seed(seed, 2));

  SimReport report;
  report.n_signals = n;
  report.clicks = tally.clicks;
  report.qber_violations = tally.qber_violations;
  report.monitored_pair_violations = tally.monitored_pair_violations;
  report.seed = seed;
  report.block_length_histogram.assign(static_cast<std::size_t>(params.m_max) + 1, 0);
  for (const BlockRecord& block : eve.blocks) {
    ++report.block_length_histogram[block.conclusive];
    std::uint64_t clicks = 0;
    for (std::size_t i = block.start; i < block.start + block.length; ++i)
      clicks += eve.transmitted[i] != SignalKind::Vacuum;
    const double c = static_cast<double>(clicks);
    const double l = static_cast<double>(block.length);
    auto& t = report.tallies;
    t.blocks += 1;
    t.sum_c += c;
    t.sum_l += l;
    t.sum_cc += c * c;
    t.sum_ll += l * l;
    t.sum_cl += c * l;
  }
  finalize_report(report);
  return report;
}

SimReport merge_reports(std::span<const SimReport> ordered) {
  if (ordered.empty()) throw std::invalid_argument("nothing to merge");
  SimReport merged;
  merged.seed = ordered.front().seed;
  merged.block_length_histogram.assign(
      ordered.front().block_length_histogram.size(), 0);
  for (const SimReport& report : ordered) {
    if (report.block_length_histogram.size() !=
        merged.block_length_histogram.size())
      throw std::invalid_argument("segment reports disagree on m_max");
    merged.n_signals += report.n_signals;
    merged.clicks += report.clicks;
    merged.qber_violations += report.qber_violations;
    merged.monitored_pair_violations += report.monitored_pair_violations;
    for (std::size_t k = 0; k < report.block_length_histogram.size(); ++k)
      merged.block_length_histogram[k] += report.block_length_histogram[k];
    merged.tallies.blocks += report.tallies.blocks;
    merged.tallies.sum_c += report.tallies.sum_c;
    merged.tallies.sum_l += report.tallies.sum_l;
    merged.tallies.sum_cc += report.tallies.sum_cc;
    merged.tallies.sum_ll += report.tallies.sum_ll;
    merged.tallies.sum_cl += report.tallies.sum_cl;
  }
  finalize_report(merged);
  return merged;
}

SimReport run_simulation(const ProtocolParams& params, const SimConfig& config) {
  validate(params);
  if (config.n < 10000) throw std::invalid_argument("n must be >= 10^4");
  if (config.segments < 1) throw std::invalid_argument("segments must be >= 1");

  const std::size_t segments = config.segments;
  const std::size_t base = config.n / segments;
  const std::size_t remainder = config.n % segments;
  const auto segment_size = [&](std::size_t i) { return base + (i < remainder); };

  std::vector<SimReport> reports;
  reports.reserve(segments);
  if (segments == 1) {
    reports.push_back(run_segment(params, config.n, derive_seed(config.seed, 0)));
  } else {
    std::vector<std::future<SimReport>> futures;
    futures.reserve(segments);
    for (std::size_t i = 0; i < segments; ++i)
      futures.push_back(std::async(std::launch::async, [&, i] {
        return run_segment(params, segment_size(i), derive_seed(config.seed, i));
      }));
    for (auto& future : futures) reports.push_back(future.get());
  }

  SimReport merged = merge_reports(reports);
  merged.seed = config.seed;
  return merged;
}

namespace {

// Round to 10 significant digits so the serialized form stays short.
double round_sig10(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace

std::string to_json(const SimReport& report) {
  nlohmann::ordered_json j;
  j["n_signals"] = report.n_signals;
  j["clicks"] = report.clicks;
  j["gain_estimate"] = round_sig10(report.gain_estimate);
  j["gain_std_error"] = round_sig10(report.gain_std_error);
  j["qber_violations"] = report.qber_violations;
  j["monitored_pair_violations"] = report.monitored_pair_violations;
  j["seed"] = report.seed;
  j["histogram"] = report.block_length_histogram;
  return j.dump(2);
}

}  // namespace cowattack
