#include "outsync/netgraph.h"

#include <deque>
#include <stdexcept>
#include <vector>

namespace outsync {

void NetworkGraph::Validate() const {
  if (adjacency.rows() != adjacency.cols()) {
    throw std::invalid_argument("adjacency matrix must be square");
  }
  if (n_agents() < 1) throw std::invalid_argument("graph has no agents");
  if (n_leaders < 1 || n_leaders > n_agents()) {
    throw std::invalid_argument("n_leaders must lie in [1, N]");
  }
  if (!adjacency.allFinite()) {
    throw std::invalid_argument("adjacency has non-finite weights");
  }
  if ((adjacency.array() < 0.0).any()) {
    throw std::invalid_argument("adjacency weights must be nonnegative");
  }
  if (adjacency.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    throw std::invalid_argument("adjacency diagonal must be zero");
  }
}

MatrixXd LaplacianPartition::Assemble() const {
  const Eigen::Index nl = ll.rows();
  const Eigen::Index nf = ff.rows();
  MatrixXd out(nl + nf, nl + nf);
  out.topLeftCorner(nl, nl) = ll;
  out.topRightCorner(nl, nf) = lf;
  out.bottomLeftCorner(nf, nl) = fl;
  out.bottomRightCorner(nf, nf) = ff;
  return out;
}

MatrixXd LaplacianPartition::AssembleExtended() const {
  const MatrixXd inner = Assemble();
  const Eigen::Index n = inner.rows();
  MatrixXd out = MatrixXd::Zero(n + 1, n + 1);
  out.bottomRightCorner(n, n) = inner;
  // Unit-weight exosystem edges into every leader raise its in-degree by one.
  for (int i = 0; i < n_leaders; ++i) {
    out(i + 1, 0) = -1.0;
    out(i + 1, i + 1) += 1.0;
  }
  return out;
}

LaplacianPartition BuildPartition(const NetworkGraph& g) {
  g.Validate();
  const int nl = g.n_leaders;
  const int nf = g.n_followers();
  LaplacianPartition p;
  p.n_leaders = nl;
  p.in_degrees = g.adjacency.rowwise().sum();
  const MatrixXd lap = MatrixXd(p.in_degrees.asDiagonal()) - g.adjacency;
  p.ll = lap.topLeftCorner(nl, nl);
  p.lf = lap.topRightCorner(nl, nf);
  p.fl = lap.bottomLeftCorner(nf, nl);
  p.ff = lap.bottomRightCorner(nf, nf);
  return p;
}

bool HasRootedSpanningTree(const NetworkGraph& g) {
  g.Validate();
  const int n = g.n_agents();
  std::vector<bool> seen(n, false);
  std::deque<int> queue;
  for (int i = 0; i < g.n_leaders; ++i) {
    seen[i] = true;
    queue.push_back(i);
  }
  while (!queue.empty()) {
    const int j = queue.front();
    queue.pop_front();
    for (int i = 0; i < n; ++i) {
      if (!seen[i] && g.adjacency(i, j) > 0.0) {
        seen[i] = true;
        queue.push_back(i);
      }
    }
  }
  for (bool s : seen) {
    if (!s) return false;
  }
  return true;
}

FollowerCoupling ComputeFollowerCoupling(const LaplacianPartition& p) {
  const Eigen::Index nf = p.ff.rows();
  if (nf < 1) throw std::invalid_argument("follower coupling needs followers");
  const VectorXd scale =
      (VectorXd::Ones(nf) + p.in_degrees.tail(nf)).cwiseInverse();
  FollowerCoupling c;
  c.matrix = scale.asDiagonal() * p.ff;
  c.spectrum = ComputeSpectrum(c.matrix);
  return c;
}

bool SatisfiesCouplingDiskCondition(const Spectrum& spectrum,
                                    const Tolerances& tol) {
  for (const auto& lambda : spectrum.eigenvalues) {
    if (std::abs(lambda) <= tol.rank_rel) return false;
    if (std::abs(lambda - 1.0) >= 1.0) return false;
  }
  return true;
}

}  // namespace outsync
