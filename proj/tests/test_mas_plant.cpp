#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ptc/errors.hpp"
#include "ptc/gain_synthesis.hpp"
#include "ptc/mas_plant.hpp"
#include "ptc/pencil_linalg.hpp"
#include "support/test_support.hpp"

using namespace ptc;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using ptc::test::code_of;
using ptc::test::uniform;

namespace {

ClosedLoop preset_loop(Protocol protocol, double b = 3.0) {
  const ManipulatorPreset p = manipulator_preset();
  return ClosedLoop{p.fleet, p.topology, p.feedback_gain, p.observer_gain, GainSchedule::exact(2.0, b, 2), protocol};
}

SystemMatrices preset_system() {
  const ManipulatorPreset p = manipulator_preset();
  return build_system_matrices(2, p.topology, p.feedback_gain, p.observer_gain, p.fleet.follower_growth_rates());
}

FleetState random_state(std::mt19937_64& rng, int agents, int order) {
  return {ptc::test::random_matrix(rng, agents, order) * 3.0, ptc::test::random_matrix(rng, agents, order) * 3.0};
}

double rel_gap(const VectorXd& a, const VectorXd& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace

TEST_CASE("preset fleet") {
  const ManipulatorPreset p = manipulator_preset();
  REQUIRE(p.fleet.agents.size() == 5);
  CHECK(p.fleet.followers() == 4);
  CHECK(p.fleet.max_follower_sensitivity() == Catch::Approx(0.09));
  const FleetState s = initial_state(p.fleet);
  for (int k = 0; k < 5; ++k) {
    CHECK(s.x(k, 0) == k);
    CHECK(s.x(k, 1) == k);
  }
  CHECK(evaluate_sensitivity(p.fleet.agents[0], 0.3) == 1.0);
  CHECK(evaluate_sensitivity(p.fleet.agents[2], M_PI / 20.0) == Catch::Approx(1.09));
  CHECK(evaluate_sensitivity(p.fleet.agents[4], M_PI / 20.0) == Catch::Approx(0.91));
  REQUIRE(p.fleet.follower_growth_rates());
}

TEST_CASE("manipulator drift by hand") {
  const Nonlinearity f = manipulator_drift({10.0, 1.6, 1.3, 0.8});
  const VectorXd out = f(0.0, VectorXd{{5.0, 2.0}});
  CHECK(out(0) == 0.0);
  CHECK(out(1) == Catch::Approx(-1.6 * 2.0 / 10.0 - 1.3 * 9.8 * 0.8 * std::sin(0.5)));
}

TEST_CASE("declared growth rates bound every agent's own increments") {
  const ManipulatorPreset p = manipulator_preset();
  std::mt19937_64 rng(21);
  for (const AgentModel& agent : p.fleet.agents) {
    const VectorXd& rho = *agent.growth_rates;
    for (int trial = 0; trial < 500; ++trial) {
      const VectorXd x = ptc::test::random_matrix(rng, 2, 1) * 20.0;
      const VectorXd y = ptc::test::random_matrix(rng, 2, 1) * 20.0;
      const VectorXd df = evaluate_drift(agent, 0.0, x) - evaluate_drift(agent, 0.0, y);
      CHECK(std::abs(df(0)) <= rho(0) * std::abs(x(0) - y(0)) + 1e-12);
      CHECK(std::abs(df(1)) <= rho(0) * std::abs(x(0) - y(0)) + rho(1) * std::abs(x(1) - y(1)) + 1e-12);
    }
  }
}

TEST_CASE("cross-agent increments are bounded only at the leader's rest point") {
  const ManipulatorPreset p = manipulator_preset();
  const AgentModel& leader = p.fleet.agents[0];
  std::mt19937_64 rng(22);
  for (std::size_t k = 1; k < p.fleet.agents.size(); ++k) {
    const VectorXd& rho = *p.fleet.agents[k].growth_rates;
    for (int trial = 0; trial < 200; ++trial) {
      const VectorXd x = ptc::test::random_matrix(rng, 2, 1) * 20.0;
      const VectorXd df = evaluate_drift(p.fleet.agents[k], 0.0, x) - evaluate_drift(leader, 0.0, VectorXd::Zero(2));
      CHECK(std::abs(df(1)) <= rho(0) * std::abs(x(0)) + rho(1) * std::abs(x(1)) + 1e-12);
    }
  }
  // Identical states, different parameters: the increment is not zero.
  const VectorXd same{{8.0, 0.0}};
  const VectorXd df = evaluate_drift(p.fleet.agents[1], 0.0, same) - evaluate_drift(leader, 0.0, same);
  CHECK(std::abs(df(1)) > 1.0);
}

TEST_CASE("per-agent input equals the stacked compact form") {
  std::mt19937_64 rng(30);
  for (Protocol protocol : {Protocol::StateFeedback, Protocol::OutputFeedback}) {
    const ClosedLoop loop = preset_loop(protocol);
    const SystemMatrices sys = preset_system();
    for (int trial = 0; trial < 100; ++trial) {
      const FleetState s = random_state(rng, 5, 2);
      const double t = uniform(rng, 0.0, 1.9);
      const VectorXd u = control_inputs(loop, t, s);
      const VectorXd eta = scaled_coordinates(loop, t, s).primary;
      CHECK(u(0) == 0.0);
      for (int k = 1; k <= 4; ++k) {
        const MatrixXd gamma_k = linalg::kron(row_of_lbar(loop.topology, k), loop.feedback_gain);
        const double compact = -(gamma_k * eta)(0);
        CHECK(std::abs(u(k) - compact) <= 1e-10 * std::max(1.0, std::abs(compact)));
      }
    }
  }
}

TEST_CASE("observer reproduces the plant when the estimate is exact and the sensor nominal") {
  const Eigen::RowVectorXd g{{2.0, 2.0}};
  const GainSchedule sched = GainSchedule::exact(1.0, 2.0, 2);
  const VectorXd x{{0.7, -1.2}};
  const VectorXd rate = observer_step_rhs(x, 0.4, x(0), g, sched, 0.5);
  CHECK(rate(0) == Catch::Approx(-1.2));
  CHECK(rate(1) == Catch::Approx(0.4));
  // Innovation weights r^2 / r^i on the first measurement mismatch.
  const VectorXd off = observer_step_rhs(x, 0.4, x(0) + 1.0, g, sched, 0.5);
  const double r = sched.r(0.5);
  CHECK(off(0) - rate(0) == Catch::Approx(2.0 * r));
  CHECK(off(1) - rate(1) == Catch::Approx(2.0 * r * r));
}

TEST_CASE("compact rates equal chain-rule rates") {
  std::mt19937_64 rng(40);
  const SystemMatrices sys = preset_system();
  for (Protocol protocol : {Protocol::StateFeedback, Protocol::OutputFeedback}) {
    const ClosedLoop loop = preset_loop(protocol);
    for (int trial = 0; trial < 100; ++trial) {
      const FleetState s = random_state(rng, 5, 2);
      const double t = uniform(rng, 0.0, 1.99);
      const auto compact = compact_rates(loop, sys, t, s);
      const auto chain = chain_rule_rates(loop, t, s);
      CHECK(rel_gap(compact.primary, chain.primary) <= 1e-10);
      if (protocol == Protocol::OutputFeedback) CHECK(rel_gap(compact.observer_error, chain.observer_error) <= 1e-10);
    }
  }
}

TEST_CASE("the nominal observer-error form is exact only for a nominal sensor") {
  std::mt19937_64 rng(41);
  const SystemMatrices sys = preset_system();
  ClosedLoop loop = preset_loop(Protocol::OutputFeedback);
  const FleetState s = random_state(rng, 5, 2);
  const double t = 0.37;
  const auto chain = chain_rule_rates(loop, t, s);
  const auto nominal = compact_rates(loop, sys, t, s, ObserverErrorForm::NominalSensor);
  CHECK(rel_gap(nominal.observer_error, chain.observer_error) > 1e-6);

  for (auto& agent : loop.fleet.agents) agent.sensitivity = nullptr;
  const auto chain_nominal = chain_rule_rates(loop, t, s);
  const auto compact_nominal = compact_rates(loop, sys, t, s, ObserverErrorForm::NominalSensor);
  CHECK(rel_gap(compact_nominal.observer_error, chain_nominal.observer_error) <= 1e-10);
}

TEST_CASE("open loop: followers ignore each other") {
  const ClosedLoop loop = preset_loop(Protocol::OpenLoop);
  const FleetState s = initial_state(loop.fleet);
  const VectorXd u = control_inputs(loop, 0.5, s);
  CHECK(u.cwiseAbs().maxCoeff() == 0.0);
  const FleetState d = fleet_rhs(loop, 0.5, s);
  CHECK(d.x_hat.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.x(2, 0) == s.x(2, 1));
}

TEST_CASE("control index errors") {
  const ClosedLoop loop = preset_loop(Protocol::StateFeedback);
  const FleetState s = initial_state(loop.fleet);
  CHECK(code_of([&] { consensus_control(0, s.x, loop.topology, loop.feedback_gain, loop.schedule, 0.0); }) ==
        ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { consensus_control(5, s.x, loop.topology, loop.feedback_gain, loop.schedule, 0.0); }) ==
        ErrorCode::IndexOutOfRange);
}
