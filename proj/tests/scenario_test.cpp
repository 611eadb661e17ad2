#include "secagg/scenario.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "test_util.hpp"

namespace secagg {
namespace {

using testing::Gen;

Scenario small_scenario() {
  Scenario s;
  s.calibration.S = 2;
  s.calibration.k = 32;
  s.calibration.d = 16;
  s.calibration.beta = 0.05;
  s.honest = 6;
  return s;
}

Scenario random_scenario(Gen& gen) {
  Scenario s;
  s.calibration.S = gen.integer(2, 5);
  s.calibration.k = gen.integer(20, 200);
  s.calibration.d = gen.integer(1, 300);
  s.calibration.eps = gen.log_uniform(0.1, 10);
  s.calibration.delta = gen.log_uniform(1e-9, 0.1);
  s.calibration.eps_ss = gen.log_uniform(0.1, 10);
  s.calibration.delta_ss = gen.log_uniform(1e-9, 0.1);
  s.calibration.beta = gen.log_uniform(1e-3, 0.1);
  s.threshold_mode = gen.integer(0, 1) ? ThresholdMode::exact_cdf : ThresholdMode::tail_bound;
  s.session_calibrated = gen.integer(0, 1) == 1;
  s.w_mode = gen.integer(0, 1) ? WMode::shared : WMode::verifier0;
  if (gen.integer(0, 1)) s.trunc_B = gen.real(10, 500);
  s.quant_step = gen.log_uniform(1e-3, 1);
  if (gen.integer(0, 1)) s.output_noise_sigma = gen.real(0.1, 5);
  s.honest = gen.integer(1, 30);
  s.honest_norm = gen.real(0, 1);
  s.norm_inflating = gen.integer(0, 3);
  s.inconsistent_shares = gen.integer(0, 3);
  s.partial_send = gen.integer(0, 3);
  s.adversary_norm = gen.real(0, 20);
  s.adversary_norm_in_rho = gen.integer(0, 1) == 1;
  s.adversary_pattern = static_cast<MassPattern>(gen.integer(0, 2));
  if (gen.integer(0, 1)) s.validity_threshold = gen.real(0.01, 1);
  s.coalition.clear();
  for (int i = 0; i < s.calibration.S - 1; ++i) {
    if (gen.integer(0, 1)) s.coalition.insert(gen.integer(0, s.calibration.S - 1));
  }
  if (static_cast<int>(s.coalition.size()) >= s.calibration.S) s.coalition = {1};
  s.trials = gen.integer(1, 100000);
  s.calibration.n = s.n();
  return s;
}

TEST(ScenarioConfigTest, RoundTripsLosslessly) {
  Gen gen(71);
  for (int trial = 0; trial < 200; ++trial) {
    const Scenario s = random_scenario(gen);
    std::stringstream text;
    write_scenario(text, s);
    const Scenario back = parse_scenario(text);
    EXPECT_EQ(back, s) << text.str();
  }
}

TEST(ScenarioConfigTest, ParsesScientificNotationAndDefaults) {
  std::stringstream in(
      "schema = secagg-scenario/1\n"
      "[protocol]\nS = 3\nd = 10\nk = 64\neps = 1\ndelta = 1e-5\nbeta = 1E-2\n"
      "[clients]\nhonest = 4\nnorm_inflating = 1\n");
  const Scenario s = parse_scenario(in);
  EXPECT_EQ(s.calibration.S, 3);
  EXPECT_EQ(s.calibration.delta, 1e-5);
  EXPECT_EQ(s.calibration.beta, 1e-2);
  EXPECT_EQ(s.calibration.eps_ss, 1.0);
  EXPECT_EQ(s.n(), 5);
  EXPECT_EQ(s.coalition, VerifierSet{1});
  EXPECT_EQ(s.w_mode, WMode::shared);
}

TEST(ScenarioConfigTest, RejectsBadFiles) {
  auto parse = [](const std::string& text) {
    std::stringstream in(text);
    return parse_scenario(in);
  };
  EXPECT_ERROR_CODE(parse("[protocol]\nS = 2\n"), ErrorCode::config_invalid);
  EXPECT_ERROR_CODE(parse("schema = secagg-scenario/9\n"), ErrorCode::config_invalid);
  EXPECT_ERROR_CODE(parse("schema = secagg-scenario/1\n[protocol]\nSS = 2\n"), ErrorCode::config_invalid);
  EXPECT_ERROR_CODE(parse("schema = secagg-scenario/1\n[protocol]\nS = two\n"), ErrorCode::config_invalid);
  EXPECT_ERROR_CODE(parse("schema = secagg-scenario/1\n[session]\ncoalition = 0,1\n"),
                    ErrorCode::config_invalid);
  EXPECT_ERROR_CODE(parse("schema = secagg-scenario/1\n[extra]\na = 1\n"), ErrorCode::config_invalid);
  EXPECT_ERROR_CODE(parse("schema = secagg-scenario/1\n[protocol]\nw_mode = nobody\n"),
                    ErrorCode::config_invalid);
  EXPECT_ERROR_CODE(load_scenario("/nonexistent/scenario.ini"), ErrorCode::config_invalid);
}

TEST(ScenarioTest, ValidateChecksCoalitionAndCounts) {
  Scenario s = small_scenario();
  EXPECT_NO_THROW(s.validate());
  s.coalition = {0, 1};
  EXPECT_ERROR_CODE(s.validate(), ErrorCode::scenario_invalid);
  s = small_scenario();
  s.honest = 0;
  EXPECT_ERROR_CODE(s.validate(), ErrorCode::scenario_invalid);
  s = small_scenario();
  s.validity_threshold = 1.5;
  EXPECT_ERROR_CODE(s.validate(), ErrorCode::scenario_invalid);
}

TEST(ClientNoncesTest, UniqueHexAndStable) {
  const std::vector<ClientId> ids = client_nonces(5, 500);
  const std::set<ClientId> unique(ids.begin(), ids.end());
  EXPECT_EQ(unique.size(), 500u);
  for (const ClientId& id : ids) {
    EXPECT_EQ(id.size(), 16u);
    EXPECT_EQ(id.find_first_not_of("0123456789abcdef"), std::string::npos);
  }
  const std::vector<ClientId> prefix = client_nonces(5, 10);
  EXPECT_TRUE(std::equal(prefix.begin(), prefix.end(), ids.begin()));
}

TEST(RunScenarioTest, HonestRunAcceptsEveryone) {
  const Scenario s = small_scenario();
  const ProtocolParams p = calibrate_scenario(s).params;
  const ScenarioRun run = run_scenario(s, p, 42);
  EXPECT_EQ(run.result.accepted.size(), 6u);
  EXPECT_LT(distance(*run.result.sum, run.accepted_input_sum()), 1e-9);
  for (const ClientRecord& c : run.clients) EXPECT_NEAR(c.input.norm(), 1.0, 1e-12);
  EXPECT_EQ(run.transcript.master_seed, 42u);
}

TEST(RunScenarioTest, SameSeedSameTranscript) {
  Scenario s = small_scenario();
  s.norm_inflating = 1;
  s.partial_send = 1;
  const ProtocolParams p = calibrate_scenario(s).params;
  EXPECT_EQ(run_scenario(s, p, 42).transcript.digest(), run_scenario(s, p, 42).transcript.digest());
  EXPECT_NE(run_scenario(s, p, 42).transcript.digest(), run_scenario(s, p, 43).transcript.digest());
}

TEST(RunScenarioTest, RemovingAdversariesKeepsHonestClientsUnchanged) {
  Scenario s = small_scenario();
  s.norm_inflating = 2;
  s.inconsistent_shares = 1;
  const ProtocolParams p = calibrate_scenario(s).params;
  const ScenarioRun with = run_scenario(s, p, 8);
  const ScenarioRun without = run_scenario(s.without_adversaries(), p, 8);
  for (int j = 0; j < s.honest; ++j) {
    EXPECT_EQ(with.clients[j].id, without.clients[j].id);
    EXPECT_EQ(with.clients[j].input, without.clients[j].input);
    EXPECT_EQ(with.clients[j].share_sum, without.clients[j].share_sum);
  }
}

TEST(RunScenarioTest, AdversaryShapes) {
  Scenario s = small_scenario();
  s.honest = 2;
  s.norm_inflating = 1;
  s.inconsistent_shares = 1;
  s.partial_send = 1;
  s.adversary_norm = 2.0;
  s.adversary_pattern = MassPattern::concentrated;
  const ProtocolParams p = calibrate_scenario(s).params;
  const ScenarioRun run = run_scenario(s, p, 3);
  ASSERT_EQ(run.clients.size(), 5u);
  EXPECT_EQ(run.clients[2].behavior, ClientBehavior::norm_inflating);
  EXPECT_NEAR(run.clients[2].share_sum.norm(), 2.0 * p.rho, 1e-9 * p.rho);
  EXPECT_NEAR(run.clients[2].share_sum[0], 2.0 * p.rho, 1e-9 * p.rho);
  EXPECT_EQ(run.clients[3].behavior, ClientBehavior::inconsistent_shares);
  EXPECT_NEAR(distance(run.clients[3].share_sum, run.clients[3].input), 2.0 * p.rho, 1e-9 * p.rho);
  EXPECT_EQ(run.clients[4].behavior, ClientBehavior::partial_send);
  EXPECT_EQ(run.result.reached_all.size(), 4u);
}

TEST(RunScenarioTest, ParamsMustMatch) {
  const Scenario s = small_scenario();
  ProtocolParams p = calibrate_scenario(s).params;
  p.d = 3;
  EXPECT_ERROR_CODE(run_scenario(s, p, 1), ErrorCode::scenario_invalid);
}

TEST(CommunicationTest, PredictionMatchesTranscript) {
  Gen gen(72);
  for (int trial = 0; trial < 20; ++trial) {
    Scenario s;
    s.calibration.S = gen.integer(2, 4);
    s.calibration.k = gen.integer(20, 64);
    s.calibration.d = gen.integer(1, 64);
    s.calibration.beta = 0.05;
    s.honest = gen.integer(1, 12);
    if (gen.integer(0, 1)) s.trunc_B = gen.real(50, 40000);
    s.quant_step = gen.log_uniform(0.01, 1);
    const ProtocolParams p = calibrate_scenario(s).params;
    const ScenarioRun run = run_scenario(s, p, gen.seed());
    const CommunicationPrediction pred =
        predict_communication(p, s.n(), 16, run.result.accepted.size());
    const TrafficSummary t = traffic(run.transcript);
    EXPECT_EQ(t.client_to_server_bytes, pred.client_to_server);
    EXPECT_EQ(t.inter_server_bytes, pred.inter_server);
  }
}

TEST(CommunicationTest, HandComputedHonestShape) {
  // n = 10, S = 2, d = 64, 16-byte ids: each share is 2 + 16 + 1 + 4 + 8 * 64 = 535 bytes.
  Scenario s;
  s.calibration.S = 2;
  s.calibration.k = 32;
  s.calibration.d = 64;
  s.calibration.beta = 0.05;
  s.honest = 10;
  const ProtocolParams p = calibrate_scenario(s).params;
  const CommunicationPrediction pred = predict_communication(p, 10, 16, 10);
  EXPECT_EQ(pred.client_to_server, 10u * 2 * 535);
  // W: 8 + 8 * 32 * 64; replies: 4 + 10 * (18 + 4 + 256); J*: 4 + 10 * 18; partial sum: 4 + 512.
  EXPECT_EQ(pred.inter_server, (8u + 16384) + (4 + 2780) + (4 + 180) + 516);
}

}  // namespace
}  // namespace secagg
