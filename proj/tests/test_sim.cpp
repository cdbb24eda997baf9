#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "cowattack/analytics.hpp"
#include "cowattack/rng.hpp"
#include "cowattack/sim.hpp"
#include "cowattack/usd.hpp"
#include "support/oracles.hpp"

using namespace cowattack;

namespace {

constexpr SignalKind B0 = SignalKind::Bit0;
constexpr SignalKind B1 = SignalKind::Bit1;
constexpr SignalKind DC = SignalKind::Decoy;
constexpr SignalKind VA = SignalKind::Vacuum;

std::vector<SignalKind> digits_to_block(unsigned code, std::size_t len) {
  std::vector<SignalKind> block(len);
  for (std::size_t i = 0; i < len; ++i) {
    block[i] = static_cast<SignalKind>(code % 3);
    code /= 3;
  }
  return block;
}

}  // namespace

TEST_CASE("sub-block selection") {
  SUBCASE("bit1 followed by bit0 is kept whole") {
    const std::vector<SignalKind> block{B1, B0};
    CHECK(best_subblock(block) == SubBlock{0, 1});
  }
  SUBCASE("bit0 followed by bit1 is dropped") {
    const std::vector<SignalKind> block{B0, B1};
    CHECK_FALSE(best_subblock(block).has_value());
  }
  SUBCASE("decoys between bit1 and bit0 are all kept") {
    const std::vector<SignalKind> block{B1, DC, DC, DC, B0};
    CHECK(best_subblock(block) == SubBlock{0, 4});
  }
  SUBCASE("interior bit1 bounded by its successor") {
    const std::vector<SignalKind> block{DC, B1, B1};
    CHECK(best_subblock(block) == SubBlock{1, 1});
  }
  SUBCASE("no usable right boundary") {
    const std::vector<SignalKind> block{B1, DC};
    CHECK_FALSE(best_subblock(block).has_value());
  }
  SUBCASE("vacuum and empty inputs are rejected") {
    const std::vector<SignalKind> bad{B1, VA};
    CHECK_THROWS_AS(best_subblock(bad), std::invalid_argument);
    CHECK_THROWS_AS(best_subblock(std::vector<SignalKind>{}),
                    std::invalid_argument);
  }
}

TEST_CASE("sub-block selection matches the exhaustive scan up to length 6") {
  for (std::size_t len = 1; len <= 6; ++len) {
    unsigned total = 1;
    for (std::size_t i = 0; i < len; ++i) total *= 3;
    for (unsigned code = 0; code < total; ++code) {
      const auto block = digits_to_block(code, len);
      const auto got = best_subblock(block);
      const auto want = oracles::best_subblock(block);
      CAPTURE(code);
      CAPTURE(len);
      REQUIRE(got.has_value() == want.has_value());
      if (got) {
        CHECK(*got == *want);
        CHECK(oracles::valid_subblock(block, *got));
      }
    }
  }
}

TEST_CASE("sub-block selection matches the exhaustive scan on random long blocks") {
  std::mt19937_64 gen(90125);
  std::uniform_int_distribution<int> pick_len(7, 12);
  std::uniform_int_distribution<int> pick_kind(0, 2);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<SignalKind> block(static_cast<std::size_t>(pick_len(gen)));
    for (auto& s : block) s = static_cast<SignalKind>(pick_kind(gen));
    const auto got = best_subblock(block);
    const auto want = oracles::best_subblock(block);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      CHECK(*got == *want);
      CHECK(oracles::valid_subblock(block, *got));
    }
  }
}

TEST_CASE("stream generation") {
  const ProtocolParams params{0.06, 0.155, 10};
  SUBCASE("deterministic for a fixed seed") {
    const auto a = generate_stream(params, 5000, 42);
    const auto b = generate_stream(params, 5000, 42);
    CHECK(a == b);
    const auto c = generate_stream(params, 5000, 43);
    CHECK(a != c);
  }
  SUBCASE("decoy-dominated limit") {
    const auto stream = generate_stream({0.5, 0.999, 10}, 10000, 1);
    std::size_t decoys = 0;
    for (SignalKind s : stream) decoys += s == DC;
    CHECK(decoys >= 9900);
  }
  SUBCASE("empirical frequencies within five sigma") {
    const std::size_t n = 1000000;
    const auto stream = generate_stream(params, n, 7);
    std::array<std::size_t, 3> counts{};
    for (SignalKind s : stream) ++counts[static_cast<std::size_t>(s)];
    const double f = params.f;
    const double sigma_d = std::sqrt(f * (1.0 - f) / n);
    CHECK(std::abs(static_cast<double>(counts[2]) / n - f) < 5.0 * sigma_d);
    const double p_bit = (1.0 - f) / 2.0;
    const double sigma_b = std::sqrt(p_bit * (1.0 - p_bit) / n);
    CHECK(std::abs(static_cast<double>(counts[0]) / n - p_bit) < 5.0 * sigma_b);
    CHECK(std::abs(static_cast<double>(counts[1]) / n - p_bit) < 5.0 * sigma_b);
  }
  SUBCASE("rejects empty requests") {
    CHECK_THROWS_AS(generate_stream(params, 0, 1), std::invalid_argument);
  }
}

TEST_CASE("measurement outcomes") {
  SUBCASE("regime-1 decoys are never identified") {
    const UsdSolution sol = optimal_usd({0.06, 0.155, 10});
    const std::vector<SignalKind> stream(1000, DC);
    for (const auto& o : measure_stream(stream, sol, 5))
      CHECK_FALSE(o.conclusive);
  }
  SUBCASE("unit success probabilities identify everything") {
    UsdSolution sure;
    sure.q_ss = 1.0;
    sure.q_ds = 1.0;
    const std::vector<SignalKind> stream{B0, B1, DC, B1};
    const auto outcomes = measure_stream(stream, sure, 5);
    for (std::size_t i = 0; i < stream.size(); ++i) {
      CHECK(outcomes[i].conclusive);
      CHECK(outcomes[i].kind == stream[i]);
    }
  }
  SUBCASE("conclusive fraction near p_c and identifications never wrong") {
    const ProtocolParams params{0.06, 0.155, 10};
    const UsdSolution sol = optimal_usd(params);
    const std::size_t n = 1000000;
    const auto stream = generate_stream(params, n, 11);
    const auto outcomes = measure_stream(stream, sol, 12);
    std::size_t conclusive = 0;
    std::size_t bits = 0, bits_conclusive = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (outcomes[i].conclusive) {
        ++conclusive;
        CHECK(outcomes[i].kind == stream[i]);
      } else {
        CHECK(outcomes[i].kind == VA);
      }
      if (stream[i] != DC) {
        ++bits;
        bits_conclusive += outcomes[i].conclusive;
      }
    }
    const double sigma = std::sqrt(sol.p_c * (1.0 - sol.p_c) / n);
    CHECK(std::abs(static_cast<double>(conclusive) / n - sol.p_c) < 5.0 * sigma);
    const double sigma_bits =
        std::sqrt(sol.q_ss * (1.0 - sol.q_ss) / static_cast<double>(bits));
    CHECK(std::abs(static_cast<double>(bits_conclusive) / bits - sol.q_ss) <
          5.0 * sigma_bits);
  }
  SUBCASE("vacuum input is rejected") {
    const UsdSolution sol = optimal_usd({0.06, 0.155, 10});
    const std::vector<SignalKind> bad{B0, VA};
    CHECK_THROWS_AS(measure_stream(bad, sol, 1), std::invalid_argument);
  }
}

TEST_CASE("block post-processing") {
  const auto conclusive = [](SignalKind s) { return MeasureOutcome{s, true}; };
  const MeasureOutcome inconclusive{};

  SUBCASE("all-inconclusive input turns into vacuum") {
    const std::vector<MeasureOutcome> outcomes(5, inconclusive);
    const EveResult result = eve_transform(outcomes, 10);
    CHECK(result.transmitted == std::vector<SignalKind>(5, VA));
    CHECK(result.blocks.size() == 5);
  }
  SUBCASE("identified bit1-bit0 pair is resent") {
    const std::vector<MeasureOutcome> outcomes{conclusive(B1), conclusive(B0),
                                               inconclusive};
    const EveResult result = eve_transform(outcomes, 10);
    CHECK(result.transmitted == std::vector<SignalKind>{B1, B0, VA});
    REQUIRE(result.blocks.size() == 1);
    CHECK(result.blocks[0].conclusive == 2);
    CHECK(result.blocks[0].length == 3);
  }
  SUBCASE("identified bit0-bit1 pair is suppressed") {
    const std::vector<MeasureOutcome> outcomes{conclusive(B0), conclusive(B1),
                                               inconclusive};
    const EveResult result = eve_transform(outcomes, 10);
    CHECK(result.transmitted == std::vector<SignalKind>(3, VA));
  }
  SUBCASE("truncation consumes the following signal") {
    const std::vector<MeasureOutcome> outcomes{
        conclusive(B1), conclusive(B0), conclusive(B1), inconclusive};
    const EveResult result = eve_transform(outcomes, 2);
    // run of 2 hits m_max; position 2 is replaced unconditionally even though
    // it was conclusive, and the final inconclusive forms its own block
    CHECK(result.transmitted == std::vector<SignalKind>{B1, B0, VA, VA});
    REQUIRE(result.blocks.size() == 2);
    CHECK(result.blocks[0].conclusive == 2);
    CHECK(result.blocks[0].length == 3);
    CHECK(result.blocks[1].conclusive == 0);
    CHECK(result.blocks[1].length == 1);
  }
  SUBCASE("trailing run at the stream end is still post-processed") {
    const std::vector<MeasureOutcome> outcomes{inconclusive, conclusive(B1),
                                               conclusive(B0)};
    const EveResult result = eve_transform(outcomes, 10);
    CHECK(result.transmitted == std::vector<SignalKind>{VA, B1, B0});
    REQUIRE(result.blocks.size() == 2);
    CHECK(result.blocks[1].conclusive == 2);
    CHECK(result.blocks[1].length == 2);
  }
  SUBCASE("preservation and block-coverage properties") {
    const ProtocolParams params{0.8, 0.3, 6};
    const UsdSolution sol = optimal_usd(params);
    const auto stream = generate_stream(params, 100000, 3);
    const auto outcomes = measure_stream(stream, sol, 4);
    const EveResult result = eve_transform(outcomes, params.m_max);
    REQUIRE(result.transmitted.size() == stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
      const SignalKind t = result.transmitted[i];
      CHECK((t == VA || t == stream[i]));
    }
    std::size_t covered = 0;
    for (const BlockRecord& block : result.blocks) {
      CHECK(block.start == covered);
      CHECK(block.conclusive <= static_cast<std::uint32_t>(params.m_max));
      covered += block.length;
    }
    CHECK(covered == stream.size());
  }
}

TEST_CASE("receiver counting and structural checks") {
  SUBCASE("vacuum never clicks") {
    const std::vector<SignalKind> nothing(4, VA);
    const BobTally tally = bob_count(nothing, nothing, 1);
    CHECK(tally.clicks == 0);
    CHECK(tally.qber_violations == 0);
    CHECK(tally.monitored_pair_violations == 0);
    for (auto b : tally.bits) CHECK(b == -1);
  }
  SUBCASE("faithfully resent pair clicks twice without violations") {
    const std::vector<SignalKind> pair{B1, B0};
    const BobTally tally = bob_count(pair, pair, 1);
    CHECK(tally.clicks == 2);
    CHECK(tally.qber_violations == 0);
    CHECK(tally.monitored_pair_violations == 0);
    CHECK(tally.bits[0] == 1);
    CHECK(tally.bits[1] == 0);
  }
  SUBCASE("breaking a monitored pair is detected") {
    const std::vector<SignalKind> transmitted{VA, DC};
    const std::vector<SignalKind> alice{DC, DC};
    const BobTally tally = bob_count(transmitted, alice, 1);
    CHECK(tally.monitored_pair_violations == 1);
  }
  SUBCASE("flipped bit is a QBER violation") {
    const std::vector<SignalKind> transmitted{B1};
    const std::vector<SignalKind> alice{B0};
    CHECK(bob_count(transmitted, alice, 1).qber_violations == 1);
    CHECK(bob_count(alice, alice, 1).qber_violations == 0);
  }
  SUBCASE("decoy clicks are not bit-compared when the source sent a decoy") {
    const std::vector<SignalKind> decoy{DC};
    const BobTally tally = bob_count(decoy, decoy, 9);
    CHECK(tally.clicks == 1);
    CHECK(tally.qber_violations == 0);
    CHECK((tally.bits[0] == 0 || tally.bits[0] == 1));
  }
  SUBCASE("length mismatch is rejected") {
    const std::vector<SignalKind> a{B0}, b{B0, B1};
    CHECK_THROWS_AS(bob_count(a, b, 1), std::invalid_argument);
  }
}

TEST_CASE("simulation reports") {
  const ProtocolParams params{0.06, 0.155, 10};

  SUBCASE("bit-for-bit reproducible") {
    const SimConfig config{20000, 987654321, 1};
    const SimReport a = run_simulation(params, config);
    const SimReport b = run_simulation(params, config);
    CHECK(a.clicks == b.clicks);
    CHECK(a.gain_estimate == b.gain_estimate);
    CHECK(a.gain_std_error == b.gain_std_error);
    CHECK(a.block_length_histogram == b.block_length_histogram);
    CHECK(to_json(a) == to_json(b));
  }
  SUBCASE("segmented run equals the ordered merge of its segments") {
    const SimConfig config{30001, 555, 3};
    const SimReport whole = run_simulation(params, config);
    std::vector<SimReport> parts;
    const std::size_t sizes[3] = {10001, 10000, 10000};
    std::size_t offset = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      parts.push_back(run_segment(params, sizes[i], derive_seed(555, i)));
      offset += sizes[i];
    }
    REQUIRE(offset == config.n);
    SimReport merged = merge_reports(parts);
    CHECK(merged.n_signals == whole.n_signals);
    CHECK(merged.clicks == whole.clicks);
    CHECK(merged.gain_estimate == whole.gain_estimate);
    CHECK(merged.gain_std_error == whole.gain_std_error);
    CHECK(merged.block_length_histogram == whole.block_length_histogram);
  }
  SUBCASE("gain matches the closed form within five standard errors") {
    for (double mu : {0.06, 0.1}) {
      CAPTURE(mu);
      const ProtocolParams point{mu, 0.155, 10};
      const SimReport report = run_simulation(point, {1000000, 2024, 1});
      CHECK(report.qber_violations == 0);
      CHECK(report.monitored_pair_violations == 0);
      CHECK(report.gain_estimate ==
            doctest::Approx(static_cast<double>(report.clicks) /
                            report.n_signals));
      REQUIRE(report.gain_std_error > 0.0);
      CHECK(std::abs(report.gain_estimate - gain_zero(point)) <
            5.0 * report.gain_std_error);
    }
  }
  SUBCASE("block-length histogram follows the block distribution") {
    // The second setting has p_c ~ 0.66, so the unconditional truncation bin
    // k = m_max is heavily populated and its p_c^{m_max} probability is
    // exercised, not just the geometric body.
    const ProtocolParams settings[] = {{0.06, 0.155, 10}, {1.5, 0.155, 6}};
    for (const ProtocolParams& point : settings) {
      CAPTURE(point.mu);
      const SimReport report = run_simulation(point, {1000000, 31337, 1});
      std::uint64_t blocks = 0;
      for (auto c : report.block_length_histogram) blocks += c;
      const BlockDistribution dist =
          block_distribution(optimal_usd(point).p_c, point.m_max);
      // pool the tail where expected counts drop below 5
      std::vector<double> expected;
      std::vector<double> observed;
      double exp_tail = 0.0, obs_tail = 0.0;
      for (std::size_t k = 0; k < dist.probs.size(); ++k) {
        const double e = dist.probs[k] * static_cast<double>(blocks);
        const double o = static_cast<double>(report.block_length_histogram[k]);
        if (e >= 5.0) {
          expected.push_back(e);
          observed.push_back(o);
        } else {
          exp_tail += e;
          obs_tail += o;
        }
      }
      if (exp_tail > 0.0) {
        expected.push_back(exp_tail);
        observed.push_back(obs_tail);
      }
      double chi2 = 0.0;
      for (std::size_t i = 0; i < expected.size(); ++i) {
        const double d = observed[i] - expected[i];
        chi2 += d * d / expected[i];
      }
      const int df = static_cast<int>(expected.size()) - 1;
      CHECK(chi2 < oracles::chi2_quantile_999(df));
    }
  }
  SUBCASE("json serialization carries the report") {
    const SimReport report = run_simulation(params, {10000, 77, 1});
    const std::string json = to_json(report);
    CHECK(json.find("\"n_signals\": 10000") != std::string::npos);
    CHECK(json.find("\"seed\": 77") != std::string::npos);
    CHECK(json.find("\"histogram\"") != std::string::npos);
    CHECK(json.find("\"gain_estimate\"") != std::string::npos);
    CHECK(json.find("\"qber_violations\": 0") != std::string::npos);
    CHECK(json.find("\"monitored_pair_violations\": 0") != std::string::npos);
  }
  SUBCASE("small runs are rejected") {
    CHECK_THROWS_AS(run_simulation(params, {9999, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(run_simulation(params, {10000, 1, 0}), std::invalid_argument);
  }
}

TEST_CASE("zero-error property over random settings") {
  // 25 settings here; the acceptance suite runs the full 200-point sweep.
  std::mt19937_64 gen(424242);
  std::uniform_real_distribution<double> pick_mu(1e-3, 1.0);
  std::uniform_real_distribution<double> pick_f(1e-3, 0.9);
  std::uniform_int_distribution<int> pick_m(2, 12);
  for (int trial = 0; trial < 25; ++trial) {
    const ProtocolParams params{pick_mu(gen), pick_f(gen), pick_m(gen)};
    CAPTURE(params.mu);
    CAPTURE(params.f);
    CAPTURE(params.m_max);
    const SimReport report = run_simulation(params, {20000, gen(), 1});
    CHECK(report.qber_violations == 0);
    CHECK(report.monitored_pair_violations == 0);
  }
}
