#include "outsync/closedloop.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "outsync/errors.h"
#include "test_support.h"

namespace outsync {
namespace {

using testing::OracleSpectralRadius;

class ExampleLoop : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    scenario_ = new Scenario(testing::ExampleScenario());
    controllers_ = new ControllerSet(
        Synthesize(*scenario_, Collect(*scenario_, ExcitationConfig{42, 6}), SynthesisMode::kData));
  }
  static void TearDownTestSuite() {
    delete scenario_;
    delete controllers_;
  }
  const Scenario& s() const { return *scenario_; }
  const ControllerSet& c() const { return *controllers_; }

  static Scenario* scenario_;
  static ControllerSet* controllers_;
};

Scenario* ExampleLoop::scenario_ = nullptr;
ControllerSet* ExampleLoop::controllers_ = nullptr;

double MaxNorm(const std::vector<double>& v, int from) {
  double m = 0.0;
  for (size_t k = from; k < v.size(); ++k) m = std::max(m, v[k]);
  return m;
}

TEST_F(ExampleLoop, ZeroStateStaysZero) {
  const Trajectory tr = outsync::Run(s(), c(), SimState::Zero(s()), 50);
  ASSERT_EQ(tr.size(), 50);
  for (const auto& st : tr.states()) {
    EXPECT_EQ(st.x0.norm(), 0.0);
    for (const auto& x : st.x) EXPECT_EQ(x.norm(), 0.0);
    for (const auto& z : st.z) EXPECT_EQ(z.norm(), 0.0);
  }
}

TEST_F(ExampleLoop, ExactInitializationIsInvariant) {
  SimState init = SimState::Zero(s());
  init.x0 << 0.3, -1.2;
  for (int i = 0; i < s().n_agents(); ++i) {
    init.z[i] = init.x0;
    init.x[i] = c().agents[i].pi * init.x0;
  }
  const Trajectory tr = outsync::Run(s(), c(), init, 300);
  for (const auto& series : ComputeNormSeries(tr)) {
    EXPECT_LE(MaxNorm(series.delta, 0), 1e-12);
    EXPECT_LE(MaxNorm(series.eps, 0), 1e-9);
    EXPECT_LE(MaxNorm(series.e, 0), 1e-6);
  }
}

TEST_F(ExampleLoop, ExosystemNormIsPreserved) {
  SimState init = SimState::Zero(s());
  init.x0 << 1.0, 2.0;
  const Trajectory tr = outsync::Run(s(), c(), init, 200);
  for (const auto& st : tr.states()) EXPECT_NEAR(st.x0.norm(), std::sqrt(5.0), 1e-10);
}

TEST_F(ExampleLoop, RandomInitialConditionsSynchronize) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Trajectory tr = outsync::Run(s(), c(), RandomInitialState(s(), seed), 2000);
    const ConvergenceMetrics m = ComputeMetrics(tr, 100);
    EXPECT_LE(m.max_e_tail(), 1e-6) << seed;
  }
}

TEST_F(ExampleLoop, SignalsMatchDefinitions) {
  const Trajectory tr = outsync::Run(s(), c(), RandomInitialState(s(), 9), 5);
  const SimState& st = tr.states()[3];
  const StepSignals sig = tr.SignalsAt(3);
  EXPECT_TRUE(sig.y0.isApprox(s().exo.r * st.x0));
  for (int i = 0; i < s().n_agents(); ++i) {
    const AgentModel& a = s().agents[i];
    const AgentController& k = c().agents[i];
    const VectorXd u = k.k * st.x[i] + (k.gamma - k.k * k.pi) * st.z[i];
    VectorXd y = a.c() * st.x[i] + a.d() * u;
    if (a.is_leader()) y += *a.f() * sig.y0;
    EXPECT_LE((sig.agents[i].u - u).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((sig.agents[i].y - y).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((sig.agents[i].e - (y - sig.y0)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((sig.agents[i].eps - (st.x[i] - k.pi * st.z[i])).cwiseAbs().maxCoeff(), 1e-12);
  }
}

// Stacked estimate errors evolve autonomously: leaders with S + L R, the
// follower block with I (x) S - (I + D)^-1 L_ff (x) H R.
TEST_F(ExampleLoop, EstimateErrorsFollowMatrixPowers) {
  const int n = s().n_agents();
  const int nl = s().graph.n_leaders;
  const int nf = n - nl;
  const int q = s().exo.state_dim();
  const MatrixXd& adj = s().graph.adjacency;
  MatrixXd coupling = MatrixXd::Zero(nf, nf);
  for (int i = 0; i < nf; ++i) {
    const double deg = adj.row(nl + i).sum();
    for (int j = 0; j < nf; ++j) coupling(i, j) = -adj(nl + i, nl + j);
    coupling(i, i) += deg;
    coupling.row(i) /= 1.0 + deg;
  }
  const MatrixXd hr = c().observer_h * s().exo.r;
  MatrixXd mf = MatrixXd::Zero(nf * q, nf * q);
  for (int i = 0; i < nf; ++i) {
    mf.block(i * q, i * q, q, q) = s().exo.s;
    for (int j = 0; j < nf; ++j) mf.block(i * q, j * q, q, q) -= coupling(i, j) * hr;
  }
  const MatrixXd ml = s().exo.s + c().observer_l * s().exo.r;

  const Trajectory tr = outsync::Run(s(), c(), RandomInitialState(s(), 4), 40);
  VectorXd df0(nf * q);
  for (int i = 0; i < nf; ++i) df0.segment(i * q, q) = tr.states()[0].z[nl + i] - tr.states()[0].x0;
  MatrixXd pf = MatrixXd::Identity(nf * q, nf * q);
  MatrixXd pl = MatrixXd::Identity(q, q);
  for (int t = 0; t < tr.size(); ++t) {
    const SimState& st = tr.states()[t];
    const VectorXd expect_f = pf * df0;
    for (int i = 0; i < nf; ++i) {
      EXPECT_LE((st.z[nl + i] - st.x0 - expect_f.segment(i * q, q)).cwiseAbs().maxCoeff(), 1e-9)
          << "t=" << t;
    }
    for (int i = 0; i < nl; ++i) {
      const VectorXd expect = pl * (tr.states()[0].z[i] - tr.states()[0].x0);
      EXPECT_LE((st.z[i] - st.x0 - expect).cwiseAbs().maxCoeff(), 1e-9) << "t=" << t;
    }
    pf = (mf * pf).eval();
    pl = (ml * pl).eval();
  }
  EXPECT_LT(OracleSpectralRadius(mf), 1.0);
  // The optimum sits on a repeated eigenvalue, where solvers agree to ~sqrt(eps).
  EXPECT_NEAR(OracleSpectralRadius(mf), *c().observer_h_radius, 1e-7);
}

TEST_F(ExampleLoop, LeaderEstimateDecayMatchesObserverRadius) {
  const Trajectory tr = outsync::Run(s(), c(), RandomInitialState(s(), 5), 400);
  const ConvergenceMetrics m = ComputeMetrics(tr, 50);
  const double rho = OracleSpectralRadius(s().exo.s + c().observer_l * s().exo.r);
  for (int i = 0; i < s().graph.n_leaders; ++i) {
    EXPECT_GT(m.agents[i].delta.decay, 0.0);
    EXPECT_LE(m.agents[i].delta.decay, 2.0 * rho);
    EXPECT_GE(m.agents[i].delta.decay, 0.5 * rho);
  }
}

TEST_F(ExampleLoop, Superposition) {
  const SimState a = RandomInitialState(s(), 11);
  const SimState b = RandomInitialState(s(), 12);
  SimState sum = a;
  sum.x0 = 2.0 * a.x0 - b.x0;
  for (int i = 0; i < s().n_agents(); ++i) {
    sum.x[i] = 2.0 * a.x[i] - b.x[i];
    sum.z[i] = 2.0 * a.z[i] - b.z[i];
  }
  const Trajectory ta = outsync::Run(s(), c(), a, 30);
  const Trajectory tb = outsync::Run(s(), c(), b, 30);
  const Trajectory ts = outsync::Run(s(), c(), sum, 30);
  for (int t = 0; t < 30; ++t) {
    for (int i = 0; i < s().n_agents(); ++i) {
      const VectorXd expect = 2.0 * ta.states()[t].x[i] - tb.states()[t].x[i];
      EXPECT_LE((ts.states()[t].x[i] - expect).cwiseAbs().maxCoeff(),
                1e-9 * std::max(1.0, expect.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_F(ExampleLoop, RunRejectsBadArguments) {
  EXPECT_THROW(outsync::Run(s(), c(), SimState::Zero(s()), 0), std::invalid_argument);
  SimState bad = SimState::Zero(s());
  bad.x.pop_back();
  EXPECT_THROW(outsync::Run(s(), c(), bad, 3), DimensionError);
  bad = SimState::Zero(s());
  bad.z[1] = VectorXd::Zero(3);
  EXPECT_THROW(Step(s(), c(), bad), DimensionError);
}

TEST_F(ExampleLoop, SingleStepRun) {
  const SimState init = RandomInitialState(s(), 3);
  const Trajectory tr = outsync::Run(s(), c(), init, 1);
  ASSERT_EQ(tr.size(), 1);
  EXPECT_EQ(tr.states()[0].x0, init.x0);
  EXPECT_EQ(ComputeNormSeries(tr)[0].e.size(), 1u);
}

TEST_F(ExampleLoop, RandomInitialStateIsSeeded) {
  const SimState a = RandomInitialState(s(), 7);
  const SimState b = RandomInitialState(s(), 7);
  const SimState d = RandomInitialState(s(), 8);
  EXPECT_EQ(a.x0, b.x0);
  EXPECT_EQ(a.x[4], b.x[4]);
  EXPECT_NE(a.x0, d.x0);
}

TEST(IsolatedFollower, EstimateRunsOpenLoop) {
  // A follower with no neighbours propagates z+ = S z.
  Scenario s = testing::ExampleScenario();
  s.graph.adjacency.row(4).setZero();
  ControllerSet c = Synthesize(testing::ExampleScenario(), {}, SynthesisMode::kModel);
  SimState st = RandomInitialState(s, 1);
  for (int t = 0; t < 20; ++t) {
    const SimState next = Step(s, c, st);
    EXPECT_LE((next.z[4] - s.exo.s * st.z[4]).cwiseAbs().maxCoeff(), 1e-14);
    st = next;
  }
}

TEST(Metrics, ZeroAndGeometricSeries) {
  NormSeries zero;
  zero.e.assign(100, 0.0);
  zero.delta = zero.eps = zero.e;
  ConvergenceMetrics m = ComputeMetrics({zero}, 10);
  EXPECT_EQ(m.agents[0].e.tail_max, 0.0);
  EXPECT_EQ(m.agents[0].e.decay, 0.0);
  EXPECT_EQ(m.max_e_tail(), 0.0);

  NormSeries half;
  for (int k = 0; k < 60; ++k) half.e.push_back(std::pow(0.5, k));
  half.delta = half.eps = half.e;
  m = ComputeMetrics({half}, 5);
  EXPECT_NEAR(m.agents[0].e.decay, 0.5, 1e-9);
  EXPECT_DOUBLE_EQ(m.agents[0].e.tail_max, std::pow(0.5, 55));

  EXPECT_THROW(ComputeMetrics({half}, 0), std::invalid_argument);
  EXPECT_THROW(ComputeMetrics({half}, 61), std::invalid_argument);
  EXPECT_NO_THROW(ComputeMetrics({half}, 60));
}

TEST(Metrics, DecayIgnoresRoundoffFloor) {
  std::vector<double> v;
  for (int k = 0; k < 200; ++k) v.push_back(std::max(std::pow(0.7, k), 1e-16));
  EXPECT_NEAR(EstimateDecay(v), 0.7, 1e-6);
  EXPECT_EQ(EstimateDecay({}), 0.0);
  EXPECT_EQ(EstimateDecay({1.0}), 0.0);
}

TEST(Metrics, GrowingSeriesReportsGrowth) {
  std::vector<double> v;
  for (int k = 0; k < 50; ++k) v.push_back(std::pow(1.1, k));
  EXPECT_NEAR(EstimateDecay(v), 1.1, 1e-9);
}

}  // namespace
}  // namespace outsync
