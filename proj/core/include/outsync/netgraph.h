#pragma once

#include "outsync/matops.h"

namespace outsync {

/// Directed weighted graph among the N agents. Entry (i, j) of the adjacency
/// matrix is the weight of the edge j -> i (agent i listens to agent j).
/// Agents 0 .. n_leaders-1 are leaders and receive a unit-weight edge from the
/// exosystem node, which is implicit and never stored.
struct NetworkGraph {
  int n_leaders = 0;
  MatrixXd adjacency;

  int n_agents() const { return static_cast<int>(adjacency.rows()); }
  int n_followers() const { return n_agents() - n_leaders; }

  /// Throws std::invalid_argument on a non-square or negative adjacency, a
  /// nonzero diagonal, or n_leaders outside [1, N].
  void Validate() const;
};

/// Laplacian L = diag(d) - A split into leader/follower blocks.
struct LaplacianPartition {
  int n_leaders = 0;
  VectorXd in_degrees;
  MatrixXd ll, lf, fl, ff;

  /// The full N x N Laplacian.
  MatrixXd Assemble() const;
  /// The (N+1) x (N+1) Laplacian of the graph extended with the exosystem
  /// node 0 in the first row/column.
  MatrixXd AssembleExtended() const;
};

LaplacianPartition BuildPartition(const NetworkGraph& g);

/// True iff every agent is reachable from the exosystem node, i.e. the
/// extended graph has a directed spanning tree rooted at the exosystem.
bool HasRootedSpanningTree(const NetworkGraph& g);

/// (I + D_f)^-1 L_ff and its spectrum.
struct FollowerCoupling {
  MatrixXd matrix;
  Spectrum spectrum;
};

FollowerCoupling ComputeFollowerCoupling(const LaplacianPartition& p);

/// Every coupling eigenvalue is nonzero (modulus > rank_rel) and lies in the
/// open disk |z - 1| < 1.
bool SatisfiesCouplingDiskCondition(const Spectrum& spectrum,
                                    const Tolerances& tol = {});

}  // namespace outsync
