#include "cowattack/analytics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cowattack/sim.hpp"
#include "cowattack/usd.hpp"

namespace cowattack {

namespace {

void check_p1c(double p1c) {
  if (!(p1c > 0.0 && p1c <= 0.5))
    throw std::invalid_argument("p(1|c) must lie in (0, 1/2]");
}

void check_block_args(double p_c, int m_max) {
  if (!(p_c >= 0.0 && p_c < 1.0))
    throw std::invalid_argument("p_c must lie in [0, 1)");
  if (m_max < 2) throw std::invalid_argument("m_max must be >= 2");
}

// Recursion for the expected clicks of a general k-block, anchored at
// p_click(1) = 0; one step reproduces the k = 2 value 4 p1c^2.
double p_click_recursive(int k, double p1c) {
  const double r = 1.0 - 2.0 * p1c;
  double value = 0.0;
  double r_pow = r;
  for (int i = 2; i <= k; ++i) {
    r_pow *= r;
    value = 2.0 * i * p1c + r_pow - 1.0 + r * value;
  }
  return value;
}

}  // namespace

double BlockDistribution::p_vacuum(int k) const {
  if (k < 0 || k > 1) throw std::invalid_argument("vacuum blocks have k in {0, 1}");
  return probs[static_cast<std::size_t>(k)];
}

double BlockDistribution::p_signal(int k) const {
  if (k < 2 || k > m_max)
    throw std::invalid_argument("signal blocks have k in [2, m_max]");
  return probs[static_cast<std::size_t>(k)];
}

double BlockDistribution::total() const {
  double sum = 0.0;
  for (double p : probs) sum += p;
  return sum;
}

double BlockDistribution::mean_length() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k)
    sum += static_cast<double>(k + 1) * probs[k];
  return sum;
}

BlockDistribution block_distribution(double p_c, int m_max) {
  check_block_args(p_c, m_max);
  BlockDistribution dist;
  dist.m_max = m_max;
  dist.probs.resize(static_cast<std::size_t>(m_max) + 1);
  double pc_pow = 1.0;
  for (int k = 0; k < m_max; ++k) {
    dist.probs[static_cast<std::size_t>(k)] = pc_pow * (1.0 - p_c);
    pc_pow *= p_c;
  }
  dist.probs[static_cast<std::size_t>(m_max)] = pc_pow;  // no (1 - p_c) factor
  return dist;
}

double avg_block_length(double p_c, int m_max) {
  check_block_args(p_c, m_max);
  double pc_pow = p_c;  // p_c^{m_max+1}, by iterative multiplication
  for (int i = 0; i < m_max; ++i) pc_pow *= p_c;
  return (1.0 - pc_pow) / (1.0 - p_c);
}

double p_click(int k, double p1c) {
  if (k < 2) throw std::invalid_argument("p_click requires k >= 2");
  check_p1c(p1c);
  const double r = 1.0 - 2.0 * p1c;
  return (-1.0 + (k + 1) * p1c + std::pow(r, k) * (1.0 + (k - 1) * p1c)) / p1c;
}

double p_click_given_first(int k, int first, double p1c) {
  if (k < 2) throw std::invalid_argument("p_click_given_first requires k >= 2");
  check_p1c(p1c);
  const double r = 1.0 - 2.0 * p1c;
  switch (first) {
    case 0:
    case 1: {
      // per-step click terms 2i-1 (first = Bit1) or 2i-3 (first = Bit0),
      // anchored at p_click(1|j) = 0
      const int offset = first == 1 ? 1 : 3;
      double value = 0.0;
      for (int i = 2; i <= k; ++i) value = p1c * (2 * i - offset) + r * value;
      return value;
    }
    case 2:
      // a leading decoy is always replaced: the block reduces to k - 1
      return p_click_recursive(k - 1, p1c);
    default:
      throw std::invalid_argument("first must be 0, 1 or 2");
  }
}

double brute_force_p_click(int k, const std::array<double, 3>& p_cond) {
  if (k < 2 || k > 9)
    throw std::invalid_argument("brute_force_p_click supports 2 <= k <= 9");
  for (double p : p_cond)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("conditional probabilities must lie in [0, 1]");

  std::vector<int> digits(static_cast<std::size_t>(k), 0);
  std::vector<SignalKind> block(static_cast<std::size_t>(k));
  double expected = 0.0;
  while (true) {
    double weight = 1.0;
    for (int i = 0; i < k; ++i) {
      block[static_cast<std::size_t>(i)] =
          static_cast<SignalKind>(digits[static_cast<std::size_t>(i)]);
      weight *= p_cond[static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])];
    }
    if (weight > 0.0) {
      if (const auto sub = best_subblock(block))
        expected += weight * static_cast<double>(sub->length());
    }
    int pos = 0;
    while (pos < k && ++digits[static_cast<std::size_t>(pos)] == 3)
      digits[static_cast<std::size_t>(pos++)] = 0;
    if (pos == k) break;
  }
  return expected;
}

double gain_zero(const ProtocolParams& params) {
  const UsdSolution sol = optimal_usd(params);
  const double pc = sol.p_c;
  const double p1c = sol.p_cond[1];
  // Nothing conclusive, or only decoys conclusive (regime R3): no block ever
  // contains a resendable sub-block.
  if (pc <= 0.0 || p1c <= 0.0) return 0.0;
  // Mathematically pc < 1 for finite mu, but the rounded value saturates for
  // large intensities; every block then runs to full depth.
  if (pc >= 1.0)
    return p_click(params.m_max, p1c) / (params.m_max + 1.0);

  double clicks_avg = 0.0;
  double pc_pow = pc * pc;  // pc^k, iterative multiplication
  for (int k = 2; k < params.m_max; ++k) {
    clicks_avg += pc_pow * (1.0 - pc) * p_click(k, p1c);
    pc_pow *= pc;
  }
  clicks_avg += pc_pow * p_click(params.m_max, p1c);  // pc_pow = pc^{m_max}
  const double pc_m1 = pc_pow * pc;                   // pc^{m_max+1}
  return (1.0 - pc) / (1.0 - pc_m1) * clicks_avg;
}

}  // namespace cowattack
