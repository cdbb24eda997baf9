#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cowattack/signals.hpp"
#include "cowattack/types.hpp"
#include "cowattack/usd.hpp"

namespace cowattack {

// Inclusive, zero-based index range of the signals Eve keeps within a block.
struct SubBlock {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t length() const { return last - first + 1; }
  friend bool operator==(const SubBlock&, const SubBlock&) = default;
};

// Longest contiguous range of `block` that is bounded by vacuum pulses on
// both sides once everything outside it is replaced with vacuum signals:
//   left boundary   block[a] is Bit1 (first pulse vacuum), or a > 0 and
//                   block[a-1] is Bit0 (its second pulse is vacuum);
//   right boundary  block[b] is Bit0, or b+1 < k and block[b+1] is Bit1.
// Positions adjacent to the block (an inconclusive signal, or nothing at the
// stream edge) are never trusted, so a = 0 requires Bit1 and b = k-1
// requires Bit0. Returns nullopt when no valid range exists. The longest
// valid range is unique, so the smallest-first-index tie rule never fires.
std::optional<SubBlock> best_subblock(std::span<const SignalKind> block);

// Alice's signal stream: Bit0 and Bit1 each with probability (1-f)/2, Decoy
// with probability f. Deterministic for a fixed seed.
std::vector<SignalKind> generate_stream(const ProtocolParams& params,
                                        std::size_t n, std::uint64_t seed);

// Eve's signal-by-signal measurement. A bit signal is identified with
// probability q_ss, a decoy with q_ds; conclusive results never misidentify.
std::vector<MeasureOutcome> measure_stream(std::span<const SignalKind> stream,
                                           const UsdSolution& usd,
                                           std::uint64_t seed);

struct BlockRecord {
  std::size_t start = 0;         // index of the first signal of the block
  std::uint32_t conclusive = 0;  // k, the consecutive conclusive results
  std::uint32_t length = 0;      // signals in the block, incl. the trailing one
};

struct EveResult {
  std::vector<SignalKind> transmitted;
  std::vector<BlockRecord> blocks;
};

// Eve's block post-processing. Runs of k consecutive conclusive results are
// cut by an inconclusive result (k < m_max) or unconditionally at k = m_max,
// in which case the following signal is replaced with vacuum regardless of
// its outcome. For k >= 2 the best sub-block is resent unmodified (the
// amplified resend clicks with unit probability, so only occupancy matters);
// everything else becomes vacuum. Output length equals input length.
EveResult eve_transform(std::span<const MeasureOutcome> outcomes, int m_max);

struct BobTally {
  std::uint64_t clicks = 0;
  std::uint64_t qber_violations = 0;
  std::uint64_t monitored_pair_violations = 0;
  std::vector<std::int8_t> bits;  // decoded bit per signal, -1 when no click
};

// Bob's data line plus the structural monitoring-line check. Every non-vacuum
// transmitted signal clicks exactly once (double clicks on a decoy are
// randomly assigned a bit). qber_violations counts clicks decoding to the
// wrong bit where Alice sent a bit signal. monitored_pair_violations counts
// adjacent pulse pairs that Alice prepared both occupied but that arrive with
// exactly one of the two occupied -- the only configuration that could fire
// the minus port of the monitoring interferometer.
BobTally bob_count(std::span<const SignalKind> transmitted,
                   std::span<const SignalKind> alice_stream,
                   std::uint64_t seed);

struct SimConfig {
  std::size_t n = 0;         // signals, >= 10^4
  std::uint64_t seed = 0;
  unsigned segments = 1;     // independently seeded parallel segments
};

struct SimReport {
  std::uint64_t n_signals = 0;
  std::uint64_t clicks = 0;
  double gain_estimate = 0.0;   // clicks / n_signals
  double gain_std_error = 0.0;  // ratio-estimator standard error over blocks
  std::uint64_t qber_violations = 0;
  std::uint64_t monitored_pair_violations = 0;
  std::vector<std::uint64_t> block_length_histogram;  // count per run length k
  std::uint64_t seed = 0;

  // Block-level moments behind gain_std_error; merged by summation. c is the
  // click count and l the length in signals of one block.
  struct Tallies {
    std::uint64_t blocks = 0;
    double sum_c = 0.0, sum_l = 0.0;
    double sum_cc = 0.0, sum_ll = 0.0, sum_cl = 0.0;
  } tallies;
};

// Full pipeline over one independently seeded stream. Stream, measurement and
// receiver randomness use derive_seed(seed, 0..2). A trailing run cut short
// by the end of the stream is post-processed under the same rule; the effect
// on the gain is O(1/n).
SimReport run_segment(const ProtocolParams& params, std::size_t n,
                      std::uint64_t seed);

// Summation merge of segment reports; deterministic given the order. The
// merged seed is taken from the first report.
SimReport merge_reports(std::span<const SimReport> ordered);

// Splits n over `segments` streams (segment i seeded derive_seed(seed, i)),
// runs them in parallel, and merges in segment order, so the result is a
// deterministic function of (n, seed, segments). Requires n >= 10^4.
SimReport run_simulation(const ProtocolParams& params, const SimConfig& config);

// Flat JSON object with keys n_signals, clicks, gain_estimate,
// gain_std_error, qber_violations, monitored_pair_violations, seed and
// histogram (array of per-k block counts). Reals carry 10 significant digits.
std::string to_json(const SimReport& report);

}  // namespace cowattack
