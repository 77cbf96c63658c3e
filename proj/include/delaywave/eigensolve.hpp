#pragma once

#include <span>
#include <vector>

#include "delaywave/core.hpp"

namespace delaywave {

/// Symmetric sparse matrix in CSR form (full pattern stored).
struct SparseMat {
  int n = 0;
  std::vector<int> rowptr, col;
  std::vector<double> val;

  void multiply(std::span<const double> x, std::span<double> y) const;
};

class SparseBuilder {
 public:
  explicit SparseBuilder(int n) : n_(n), rows_(n) {}
  void add(int i, int j, double v);
  SparseMat compress() const;

 private:
  int n_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
};

// Jacobi-preconditioned conjugate gradients for SPD systems.
// Returns the iteration count, or -1 if the tolerance was not reached.
int solve_cg(const SparseMat& A, std::span<const double> b,
             std::span<double> x, double rel_tol = 1e-13,
             int max_iters = -1);

/// Largest eigenvalue of the pencil A x = mu K x with K SPD and A
/// symmetric positive semidefinite, by power iteration on K^{-1} A.
/// Deterministic (fixed internal seed).
double top_generalized_eigenvalue(const SparseMat& K, const SparseMat& A,
                                  double rel_tol = 1e-12,
                                  int max_iters = 4000);

/// P1 matrices on (0, length) with the node at x = 0 eliminated
/// (Dirichlet): stiffness K, mass M, and the feedback-end boundary
/// matrix B (a single unit entry at the last node).
struct IntervalMatrices {
  SparseMat K, M, B;
};
IntervalMatrices assemble_interval(int nx, double length);

/// Q1 matrices on the rectangle grid with Dirichlet-edge nodes
/// eliminated: stiffness K, domain mass M, and the boundary mass B over
/// the feedback edges.
struct RectangleMatrices {
  SparseMat K, M, B;
  std::vector<int> free_of_node;  // full-grid node -> free index or -1
};
RectangleMatrices assemble_rectangle(const Grid2D& g);

}  // namespace delaywave
