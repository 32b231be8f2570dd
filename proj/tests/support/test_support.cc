#include "test_support.h"

#include <cmath>
#include <numbers>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "outsync/errors.h"
#include "outsync/informativity.h"

namespace outsync::testing {

namespace {

MatrixXd M(int rows, int cols, std::initializer_list<double> values) {
  MatrixXd m(rows, cols);
  auto it = values.begin();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = *it++;
  }
  return m;
}

}  // namespace

Scenario ExampleScenario() {
  Scenario s;
  const double sn = std::sin(0.2);
  const double cs = std::cos(0.2);
  s.exo.s = M(2, 2, {sn, cs, -cs, sn});
  s.exo.r = M(1, 2, {-1, 1});
  s.agents.push_back(AgentModel::Leader(
      M(3, 3, {0, 1, -1, 1, 0, 1, 2, 0, 1}), M(3, 3, {1, 0, 0, 0, -1, 1, 1, 0, 2}),
      M(1, 3, {1, 0, 1}), M(1, 3, {1, 2, 3}), M(3, 1, {2, -1, 1}), M(1, 1, {5})));
  s.agents.push_back(AgentModel::Leader(M(2, 2, {0, 2, 0, 3}), M(2, 1, {1, 1}),
                                        M(1, 2, {2, 1}), M(1, 1, {3}),
                                        M(2, 1, {2, -1}), M(1, 1, {3})));
  s.agents.push_back(AgentModel::Follower(M(2, 2, {1, 1, 10, 3}), M(2, 1, {3, 2}),
                                          M(1, 2, {1, 1}), M(1, 1, {6})));
  s.agents.push_back(AgentModel::Follower(M(3, 3, {2, 1, 4, 1, 3, 5, 0, 0, 4}),
                                          M(3, 1, {5, 5, 5}), M(1, 3, {1, 2, 3}),
                                          M(1, 1, {3})));
  s.agents.push_back(AgentModel::Follower(
      M(3, 3, {2, 1, 3, 1, 2, 4, 0, 0, 4}), M(3, 3, {1, 3, 1, 5, -3, 6, 0, 5, -1}),
      M(1, 3, {1, 2, 1}), M(1, 3, {3, 6, -1})));
  s.graph = ExampleGraph();
  return s;
}

NetworkGraph ExampleGraph() {
  // Edges j -> i among agents: 1->2, 1->3, 1->4, 2->4, 3->1, 3->5, 5->2, 5->4.
  NetworkGraph g;
  g.n_leaders = 2;
  g.adjacency = MatrixXd::Zero(5, 5);
  const int edges[][2] = {{1, 2}, {1, 3}, {1, 4}, {2, 4}, {3, 1}, {3, 5}, {5, 2}, {5, 4}};
  for (const auto& e : edges) g.adjacency(e[1] - 1, e[0] - 1) = 1.0;
  return g;
}

PrintedGains ExamplePrintedGains() {
  PrintedGains p;
  p.l = M(2, 1, {-0.5719, -0.4692});
  p.h = M(2, 1, {0.1987, -0.9801});
  p.k = {M(3, 3, {0.7908, 0.1046, 0.5590, -0.1677, 0.2658, 0.0935, -1.3346, 0.0327,
                  -0.8135}),
         M(1, 2, {-0.0001, -2.8999}), M(1, 2, {-1.0303, -0.5076}),
         M(1, 3, {-2.4279, 0.7161, -0.0281}),
         M(3, 3, {3.5372, 1.1530, -1.7219, -0.6923, -0.2701, -0.5844, -3.4587,
                  -1.3458, 0.4763})};
  p.pi = {M(3, 2, {9.4737, -0.7312, -0.8750, 3.8708, 0.0693, -3.3919}),
          M(2, 2, {0.3327, 3.4521, -1.0572, 1.1880}),
          M(2, 2, {0.0399, 0.2869, 0.4135, -1.0947}),
          M(3, 2, {-0.7908, 0.3916, 0.6203, 1.4994, -2.8368, -1.0040}),
          M(3, 2, {0.2158, 0.0351, -0.4961, 0.1923, 0.1232, -0.1110})};
  p.gamma = {M(3, 2, {5.5430, -0.1230, 4.3996, -3.3488, -10.1109, 1.6856}),
             M(1, 2, {0.7972, -3.3640}), M(1, 2, {-0.2422, 0.3013}),
             M(1, 2, {2.3536, 0.2073}),
             M(3, 2, {0.0329, 0.0156, -0.0861, 0.1020, -0.0710, -0.0326})};
  return p;
}

MatrixXd RandomMatrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

ExoSystem RandomRotationExo(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.1, std::numbers::pi - 0.1);
  const double th = angle(rng);
  ExoSystem e;
  e.s.resize(2, 2);
  e.s << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
  e.r = RandomMatrix(rng, 1, 2);
  return e;
}

NetworkGraph RandomRootedGraph(std::mt19937_64& rng, int n_agents, int n_leaders,
                               double density) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.2, 2.0);
  NetworkGraph g;
  g.n_leaders = n_leaders;
  g.adjacency = MatrixXd::Zero(n_agents, n_agents);
  for (int i = n_leaders; i < n_agents; ++i) {
    std::uniform_int_distribution<int> parent(0, i - 1);
    g.adjacency(i, parent(rng)) = weight(rng);
  }
  for (int i = 0; i < n_agents; ++i) {
    for (int j = 0; j < n_agents; ++j) {
      if (i != j && g.adjacency(i, j) == 0.0 && unit(rng) < density) {
        g.adjacency(i, j) = weight(rng);
      }
    }
  }
  return g;
}

Scenario RandomFeasibleScenario(std::mt19937_64& rng, int max_state, int max_agents) {
  std::uniform_int_distribution<int> agents_dist(2, max_agents);
  std::uniform_int_distribution<int> state_dist(1, max_state);
  std::uniform_int_distribution<int> input_dist(1, 2);
  Scenario s;
  s.exo = RandomRotationExo(rng);
  const int n = agents_dist(rng);
  std::uniform_int_distribution<int> leaders_dist(1, n - 1);
  const int nl = leaders_dist(rng);
  for (int i = 0; i < n; ++i) {
    const int ni = state_dist(rng);
    const int mi = input_dist(rng);
    MatrixXd a = RandomMatrix(rng, ni, ni);
    MatrixXd b = RandomMatrix(rng, ni, mi);
    MatrixXd c = RandomMatrix(rng, 1, ni);
    MatrixXd d = RandomMatrix(rng, 1, mi);
    if (i < nl) {
      s.agents.push_back(AgentModel::Leader(a, b, c, d, RandomMatrix(rng, ni, 1),
                                            RandomMatrix(rng, 1, 1)));
    } else {
      s.agents.push_back(AgentModel::Follower(a, b, c, d));
    }
  }
  s.graph = RandomRootedGraph(rng, n, nl);
  return s;
}

std::pair<MatrixXd, MatrixXd> RandomUnstabilizablePair(std::mt19937_64& rng, int n,
                                                       int m) {
  const int k = std::uniform_int_distribution<int>(1, n - 1)(rng);
  MatrixXd a = MatrixXd::Zero(n, n);
  a.topLeftCorner(n - k, n - k) = RandomMatrix(rng, n - k, n - k);
  MatrixXd bad = RandomMatrix(rng, k, k);
  bad *= 1.5 / std::max(OracleSpectralRadius(bad), 1e-3);
  a.bottomRightCorner(k, k) = bad;
  a.topRightCorner(n - k, k) = RandomMatrix(rng, n - k, k);
  MatrixXd b = MatrixXd::Zero(n, m);
  b.topRows(n - k) = RandomMatrix(rng, n - k, m);
  const MatrixXd t = RandomMatrix(rng, n, n) + 3.0 * MatrixXd::Identity(n, n);
  return {t * a * t.inverse(), t * b};
}

DataRecord CollectAgent(const AgentModel& a, const ExoSystem& exo, std::uint64_t seed,
                        int horizon) {
  Scenario s;
  s.exo = exo;
  if (a.is_leader()) {
    s.agents = {a};
    s.graph = NetworkGraph{1, MatrixXd::Zero(1, 1)};
  } else {
    const int p = exo.output_dim();
    s.agents = {AgentModel::Leader(MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1),
                                   MatrixXd::Ones(p, 1), MatrixXd::Zero(p, 1),
                                   MatrixXd::Zero(1, p), MatrixXd::Zero(p, p)),
                a};
    s.graph = NetworkGraph{1, MatrixXd::Zero(2, 2)};
    s.graph.adjacency(1, 0) = 1.0;
  }
  return Collect(s, ExcitationConfig{seed, horizon}).back();
}

DataRecord MakeRecord(AgentRole role, MatrixXd xp, MatrixXd xf, MatrixXd up,
                      MatrixXd yp, MatrixXd y0p) {
  DataRecord r;
  r.role = role;
  r.horizon = static_cast<int>(xp.cols());
  r.xp = std::move(xp);
  r.xf = std::move(xf);
  r.up = std::move(up);
  r.yp = std::move(yp);
  r.y0p = std::move(y0p);
  return r;
}

std::vector<std::complex<double>> Eigenvalues2x2(const MatrixXd& m) {
  const double tr = m(0, 0) + m(1, 1);
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4 * det));
  return {(tr + disc) / 2.0, (tr - disc) / 2.0};
}

MatrixXd OracleMinNormSolve(const MatrixXd& coeff, const MatrixXd& rhs) {
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(coeff);
  cod.setThreshold(1e-10);
  return cod.solve(rhs);
}

double OracleStateResidual(const AgentModel& a, const ExoSystem& exo,
                           const MatrixXd& pi, const MatrixXd& gamma) {
  MatrixXd lhs = a.a() * pi + a.b() * gamma;
  if (a.is_leader()) lhs += *a.e() * exo.r;
  return (lhs - pi * exo.s).cwiseAbs().maxCoeff();
}

double OracleOutputResidual(const AgentModel& a, const ExoSystem& exo,
                            const MatrixXd& pi, const MatrixXd& gamma) {
  MatrixXd lhs = a.c() * pi + a.d() * gamma;
  if (a.is_leader()) lhs += *a.f() * exo.r;
  return (lhs - exo.r).cwiseAbs().maxCoeff();
}

double OracleSpectralRadius(const MatrixXd& m) {
  Eigen::ComplexEigenSolver<MatrixXcd> es(m.cast<std::complex<double>>());
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::string DataDir() { return OUTSYNC_TEST_DATA_DIR; }
std::string CliPath() { return OUTSYNC_TEST_CLI_PATH; }

Verdicts Characterize(const DataRecord& r, std::mt19937_64& rng) {
  const StabilizationData sd = BuildStabData(r);
  Verdicts v{};
  v.pbh = PbhStabilizable(sd.g, sd.f);
  MatrixXd theta;
  try {
    theta = StabilizingFeedback(sd.g, sd.f);
    v.riccati = true;
  } catch (const DesignError&) {
    v.riccati = false;
  }
  const int k = static_cast<int>(sd.psi.rows());
  if (v.riccati) {
    MatrixXd q = MatrixXd::Zero(sd.horizon(), k);
    q.leftCols(sd.state_dim) = theta;
    const MatrixXd w = RightInverseFromTheta(sd, q);
    v.witness = OracleSpectralRadius(r.xf * w) < 1.0 - 1e-6 &&
                (r.xp * w - MatrixXd::Identity(sd.state_dim, sd.state_dim)).norm() < 1e-6;
  } else {
    v.witness = false;
    for (int trial = 0; trial < 200 && !v.witness; ++trial) {
      const MatrixXd w = RightInverseFromTheta(sd, RandomMatrix(rng, sd.horizon(), k));
      v.witness = OracleSpectralRadius(r.xf * w) < 1.0 - 1e-6;
    }
  }
  return v;
}

AgentModel RandomAgent(std::mt19937_64& rng, AgentRole role, bool stabilizable) {
  const int n = std::uniform_int_distribution<int>(2, 4)(rng);
  const int m = std::uniform_int_distribution<int>(1, 2)(rng);
  MatrixXd a, b;
  if (stabilizable) {
    a = RandomMatrix(rng, n, n, 1.2);
    b = RandomMatrix(rng, n, m);
  } else {
    std::tie(a, b) = RandomUnstabilizablePair(rng, n, m);
  }
  const MatrixXd c = RandomMatrix(rng, 1, n);
  const MatrixXd d = RandomMatrix(rng, 1, m);
  if (role == AgentRole::kLeader) {
    return AgentModel::Leader(a, b, c, d, RandomMatrix(rng, n, 1), RandomMatrix(rng, 1, 1));
  }
  return AgentModel::Follower(a, b, c, d);
}

}  // namespace outsync::testing
