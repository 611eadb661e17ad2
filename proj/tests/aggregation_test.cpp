#include "secagg/aggregation.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "secagg/wire.hpp"
#include "test_util.hpp"

namespace secagg {
namespace {

using testing::Gen;

ProtocolParams params_for(int S, int n, int d, int k = 64) {
  CalibrationInputs in;
  in.S = S;
  in.n = n;
  in.d = d;
  in.k = k;
  in.beta = 0.01;
  return calibrate(in).params;
}

struct Population {
  std::vector<ClientSubmission> submissions;
  RealVector honest_sum;
};

Population honest_population(const ProtocolParams& p, int n, std::uint64_t seed) {
  Gen gen(seed);
  Population pop;
  pop.honest_sum = RealVector(p.d);
  for (int j = 0; j < n; ++j) {
    const RealVector x = gen.unit_ball(p.d);
    pop.honest_sum += x;
    pop.submissions.push_back(
        submission_from_bundle(share_vector(x, p.S, p.sigma_ss, gen.seed(), "h" + std::to_string(j))));
  }
  return pop;
}

TEST(ClientBehaviorTest, ParseRoundTrip) {
  for (auto b : {ClientBehavior::honest, ClientBehavior::norm_inflating,
                 ClientBehavior::inconsistent_shares, ClientBehavior::partial_send}) {
    EXPECT_EQ(parse_client_behavior(to_string(b)), b);
  }
  EXPECT_ERROR_CODE(parse_client_behavior("sneaky"), ErrorCode::invalid_parameter);
}

TEST(ValidityTest, SizeThreshold) {
  EXPECT_TRUE(validity_check(5, 10, 0.5));
  EXPECT_FALSE(validity_check(4, 10, 0.5));
  const std::vector<ClientId> four{"a", "b", "c", "d"};
  EXPECT_FALSE(size_threshold(0.5)(four, 10));
  EXPECT_TRUE(size_threshold(0.4)(four, 10));
  EXPECT_ERROR_CODE(size_threshold(0.0), ErrorCode::invalid_parameter);
}

TEST(AggregationTest, HonestSumIsExactUpToRounding) {
  for (int S : {2, 3}) {
    const ProtocolParams p = params_for(S, 10, 16);
    const Population pop = honest_population(p, 10, 51);
    const AggregationRun run = run_aggregation(pop.submissions, p, 7);
    ASSERT_FALSE(run.result.aborted);
    EXPECT_EQ(run.result.accepted.size(), 10u);
    EXPECT_EQ(run.result.reached_all.size(), 10u);
    ASSERT_TRUE(run.result.sum);
    EXPECT_LT(distance(*run.result.sum, pop.honest_sum), 1e-9);
  }
}

TEST(AggregationTest, RoundStructure) {
  const int S = 3;
  const int n = 4;
  const ProtocolParams p = params_for(S, n, 8, 32);
  const Population pop = honest_population(p, n, 52);
  const AggregationRun run = run_aggregation(pop.submissions, p, 7);
  std::vector<int> per_round(5, 0);
  for (const Message& m : run.transcript.messages) ++per_round.at(m.round);
  EXPECT_EQ(per_round[0], n * S);
  EXPECT_EQ(per_round[1], S - 1);
  EXPECT_EQ(per_round[2], S - 1);
  EXPECT_EQ(per_round[3], S - 1);
  EXPECT_EQ(per_round[4], S - 1);
}

TEST(AggregationTest, LargeAdversaryIsExcludedAndLeavesSumUnchanged) {
  const ProtocolParams p = params_for(2, 6, 16);
  Population pop = honest_population(p, 5, 53);
  const AggregationRun clean = run_aggregation(pop.submissions, p, 9);
  pop.submissions.push_back(
      submission_from_bundle(share_vector(RealVector(16, 10 * p.rho), 2, p.sigma_ss, 1, "evil"),
                             ClientBehavior::norm_inflating));
  const AggregationRun dirty = run_aggregation(pop.submissions, p, 9);
  EXPECT_FALSE(dirty.result.accepted_contains("evil"));
  EXPECT_EQ(dirty.result.accepted, clean.result.accepted);
  EXPECT_EQ(robustness_delta(dirty.result, clean.result), 0.0);
}

TEST(AggregationTest, PartialSendLeavesJ) {
  const ProtocolParams p = params_for(3, 4, 8);
  Population pop = honest_population(p, 3, 54);
  ClientSubmission partial =
      submission_from_bundle(share_vector(RealVector(8), 3, p.sigma_ss, 1, "p"), ClientBehavior::partial_send);
  partial.payloads[1].reset();
  pop.submissions.push_back(partial);
  const AggregationRun run = run_aggregation(pop.submissions, p, 9);
  EXPECT_EQ(run.result.reached_all.size(), 3u);
  EXPECT_FALSE(run.result.accepted_contains("p"));
  EXPECT_FALSE(run.result.per_client_outcomes.contains("p"));
  EXPECT_LT(distance(*run.result.sum, pop.honest_sum), 1e-9);
}

TEST(AggregationTest, WrongDimensionShareIsDropped) {
  const ProtocolParams p = params_for(2, 3, 8);
  Population pop = honest_population(p, 2, 55);
  ClientSubmission odd = submission_from_bundle(share_vector(RealVector(8), 2, p.sigma_ss, 1, "odd"));
  odd.payloads[0] = RealVector(7);
  pop.submissions.push_back(odd);
  const AggregationRun run = run_aggregation(pop.submissions, p, 9);
  EXPECT_EQ(run.result.reached_all.size(), 2u);
  EXPECT_LT(distance(*run.result.sum, pop.honest_sum), 1e-9);
}

TEST(AggregationTest, DuplicateIdsAreRejected) {
  const ProtocolParams p = params_for(2, 2, 4);
  Population pop = honest_population(p, 2, 56);
  pop.submissions[1].client_id = pop.submissions[0].client_id;
  EXPECT_ERROR_CODE(run_aggregation(pop.submissions, p, 1), ErrorCode::duplicate_client_id);
}

TEST(AggregationTest, ValidityFailureAborts) {
  const ProtocolParams p = params_for(2, 5, 8);
  Population pop = honest_population(p, 2, 57);
  for (int j = 0; j < 3; ++j) {
    pop.submissions.push_back(submission_from_bundle(
        share_vector(RealVector(8, 10 * p.rho), 2, p.sigma_ss, 10 + j, "bad" + std::to_string(j)),
        ClientBehavior::norm_inflating));
  }
  AggregationOptions options;
  options.validity = size_threshold(0.5);
  const AggregationRun run = run_aggregation(pop.submissions, p, 3, options);
  EXPECT_TRUE(run.result.aborted);
  EXPECT_FALSE(run.result.sum);
  for (const Message& m : run.transcript.messages) EXPECT_NE(m.kind, MessageKind::partial_sum);
  EXPECT_ERROR_CODE(robustness_delta(run.result, run.result), ErrorCode::aborted_input);
}

TEST(AggregationTest, OutputNoiseIsAddedPerVerifier) {
  const ProtocolParams p = params_for(3, 4, 8);
  const Population pop = honest_population(p, 4, 58);
  AggregationOptions options;
  options.output_noise_sigma = 1.0;
  const AggregationRun a = run_aggregation(pop.submissions, p, 3, options);
  const AggregationRun b = run_aggregation(pop.submissions, p, 3, options);
  EXPECT_EQ(*a.result.sum, *b.result.sum);
  EXPECT_GT(distance(*a.result.sum, pop.honest_sum), 1e-6);
}

TEST(AggregationTest, HonestPartiesAreIsolatedFromAdversaryBehaviour) {
  const ProtocolParams p = params_for(3, 6, 8, 32);
  Population base = honest_population(p, 5, 59);
  const ShareBundle adv = share_vector(RealVector(8, 3.0), 3, p.sigma_ss, 1, "adv");
  Population a = base;
  a.submissions.push_back(submission_from_bundle(adv, ClientBehavior::norm_inflating));
  Population b = base;
  ClientSubmission partial = submission_from_bundle(adv, ClientBehavior::partial_send);
  partial.payloads[2].reset();
  b.submissions.push_back(partial);
  const AggregationRun ra = run_aggregation(a.submissions, p, 4);
  const AggregationRun rb = run_aggregation(b.submissions, p, 4);
  for (int j = 0; j < 5; ++j) {
    const ClientId id = "h" + std::to_string(j);
    EXPECT_EQ(ra.result.per_client_outcomes.at(id).v_norm, rb.result.per_client_outcomes.at(id).v_norm);
  }
}

TEST(AggregationTest, DeterministicTranscript) {
  const ProtocolParams p = params_for(2, 5, 8);
  const Population pop = honest_population(p, 5, 60);
  EXPECT_EQ(run_aggregation(pop.submissions, p, 11).transcript.digest(),
            run_aggregation(pop.submissions, p, 11).transcript.digest());
}

TEST(AggregationTest, EmptyPopulation) {
  const ProtocolParams p = params_for(2, 1, 4);
  const AggregationRun run = run_aggregation({}, p, 1);
  EXPECT_FALSE(run.result.aborted);
  EXPECT_EQ(*run.result.sum, RealVector(4));
}

TEST(AggregationTest, VerifierZeroWModeWorks) {
  const ProtocolParams p = params_for(2, 3, 8);
  const Population pop = honest_population(p, 3, 61);
  AggregationOptions options;
  options.w_mode = WMode::verifier0;
  const AggregationRun run = run_aggregation(pop.submissions, p, 5, options);
  EXPECT_EQ(run.result.accepted.size(), 3u);
}

}  // namespace
}  // namespace secagg
