#pragma once

#include <array>
#include <vector>

#include "cowattack/types.hpp"

namespace cowattack {

// Distribution of the number k of consecutive conclusive results in one block
// of Eve's post-processing. k in {0, 1} are the all-vacuum blocks, k in
// [2, m_max) terminate on an inconclusive result, and k = m_max terminates
// unconditionally. A block of k conclusive results spans k + 1 signals.
struct BlockDistribution {
  int m_max = 2;
  std::vector<double> probs;  // index k in [0, m_max]

  double p_vacuum(int k) const;  // k in {0, 1}
  double p_signal(int k) const;  // k in [2, m_max]
  double total() const;
  double mean_length() const;  // sum over k of (k + 1) probs[k]
};

BlockDistribution block_distribution(double p_c, int m_max);

// Expected block length in signals, (1 - p_c^{m_max+1}) / (1 - p_c). Equals
// BlockDistribution::mean_length().
double avg_block_length(double p_c, int m_max);

// Expected number of data-line clicks produced by a block of k >= 2
// conclusive results, as a function of p1c = p(1|conclusive) in (0, 1/2].
// Closed form; at p1c = 1/2 it reduces to k - 1.
double p_click(int k, double p1c);

// Same, conditioned on the first conclusive signal of the block being phi_j
// (`first` in {0, 1, 2}). Evaluated by the recursions, which stay finite at
// p1c = 1/2 where the corresponding closed forms are singular; the limits
// there are k - 1/2 (j = 1) and k - 3/2 (j = 0).
double p_click_given_first(int k, int first, double p1c);

// Exhaustive oracle for p_click: enumerates every length-k block over
// {phi0, phi1, phi2}, applies the sub-block rule, and weights each block by
// the product of its conditional probabilities. Independent of the closed
// form. Restricted to k <= 9 (3^k enumeration).
double brute_force_p_click(int k, const std::array<double, 3>& p_cond);

// Maximum data-line gain achievable by the zero-error attack at the given
// source parameters. Zero when nothing is ever conclusive and in regime R3,
// where only decoys are identified and no block yields a resendable
// sub-block.
double gain_zero(const ProtocolParams& params);

}  // namespace cowattack
