#include "delaywave/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace delaywave {

void SparseMat::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int p = rowptr[i]; p < rowptr[i + 1]; ++p) s += val[p] * x[col[p]];
    y[i] = s;
  }
}

void SparseBuilder::add(int i, int j, double v) {
  if (v == 0.0) return;
  for (auto& [c, x] : rows_[i]) {
    if (c == j) {
      x += v;
      return;
    }
  }
  rows_[i].emplace_back(j, v);
}

SparseMat SparseBuilder::compress() const {
  SparseMat m;
  m.n = n_;
  m.rowptr.resize(n_ + 1, 0);
  std::size_t nnz = 0;
  for (const auto& r : rows_) nnz += r.size();
  m.col.reserve(nnz);
  m.val.reserve(nnz);
  for (int i = 0; i < n_; ++i) {
    auto r = rows_[i];
    std::sort(r.begin(), r.end());
    for (const auto& [c, x] : r) {
      m.col.push_back(c);
      m.val.push_back(x);
    }
    m.rowptr[i + 1] = static_cast<int>(m.col.size());
  }
  return m;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

int solve_cg(const SparseMat& A, std::span<const double> b, std::span<double> x,
             double rel_tol, int max_iters) {
  const int n = A.n;
  if (max_iters < 0) max_iters = 10 * n + 100;
  std::vector<double> diag(n, 1.0);
  for (int i = 0; i < n; ++i)
    for (int p = A.rowptr[i]; p < A.rowptr[i + 1]; ++p)
      if (A.col[p] == i && A.val[p] != 0.0) diag[i] = A.val[p];

  std::vector<double> r(n), z(n), q(n), pvec(n);
  std::fill(x.begin(), x.end(), 0.0);
  std::copy(b.begin(), b.end(), r.begin());
  const double bnorm = std::sqrt(dot(r, r));
  if (bnorm == 0.0) return 0;
  for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  std::copy(z.begin(), z.end(), pvec.begin());
  double rz = dot(r, z);
  for (int it = 1; it <= max_iters; ++it) {
    A.multiply(pvec, q);
    const double alpha = rz / dot(pvec, q);
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * pvec[i];
      r[i] -= alpha * q[i];
    }
    if (std::sqrt(dot(r, r)) <= rel_tol * bnorm) return it;
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) pvec[i] = z[i] + beta * pvec[i];
  }
  return -1;
}

double top_generalized_eigenvalue(const SparseMat& K, const SparseMat& A,
                                  double rel_tol, int max_iters) {
  const int n = K.n;
  if (n == 0 || A.n != n)
    throw std::invalid_argument("top_generalized_eigenvalue: size mismatch");

  std::vector<double> x(n), y(n), z(n);
  // deterministic start vector
  unsigned long long s = 88172645463325252ull;
  for (int i = 0; i < n; ++i) {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    x[i] = static_cast<double>(s % 2097152) / 2097152.0 + 0.5;
  }

  double mu_prev = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    A.multiply(x, y);
    const double num = dot(x, y);
    K.multiply(x, z);
    const double den = dot(x, z);
    if (!(den > 0.0))
      throw std::runtime_error("top_generalized_eigenvalue: K not positive");
    const double mu = num / den;
    if (it > 2 && std::abs(mu - mu_prev) <= rel_tol * std::abs(mu) + 1e-300)
      return mu;
    mu_prev = mu;
    if (solve_cg(K, y, z) < 0)
      throw std::runtime_error("top_generalized_eigenvalue: CG stagnated");
    const double norm = std::sqrt(std::max(dot(z, z), 1e-300));
    for (int i = 0; i < n; ++i) x[i] = z[i] / norm;
  }
  throw std::runtime_error("top_generalized_eigenvalue: no convergence");
}

IntervalMatrices assemble_interval(int nx, double length) {
  if (nx < 3) throw std::invalid_argument("assemble_interval: nx too small");
  const int nfree = nx - 1;  // node 0 eliminated
  const double h = length / static_cast<double>(nx - 1);
  SparseBuilder kb(nfree), mb(nfree), bb(nfree);
  for (int e = 0; e < nx - 1; ++e) {
    const int a = e - 1, b = e;  // free indices of nodes e, e+1
    const double ke = 1.0 / h;
    const double me = h / 6.0;
    if (a >= 0) {
      kb.add(a, a, ke);
      mb.add(a, a, 2.0 * me);
      kb.add(a, b, -ke);
      kb.add(b, a, -ke);
      mb.add(a, b, me);
      mb.add(b, a, me);
    }
    kb.add(b, b, ke);
    mb.add(b, b, 2.0 * me);
  }
  bb.add(nfree - 1, nfree - 1, 1.0);
  return {kb.compress(), mb.compress(), bb.compress()};
}

RectangleMatrices assemble_rectangle(const Grid2D& g) {
  const int nx = g.nx, ny = g.ny;
  const double hx = g.dx, hy = g.dy;

  const auto node_is_dirichlet = [&](int i, int j) {
    return (i == 0 && g.left == EdgeKind::dirichlet) ||
           (i == nx - 1 && g.right == EdgeKind::dirichlet) ||
           (j == 0 && g.bottom == EdgeKind::dirichlet) ||
           (j == ny - 1 && g.top == EdgeKind::dirichlet);
  };

  RectangleMatrices out;
  out.free_of_node.assign(static_cast<std::size_t>(nx) * ny, -1);
  int nfree = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (!node_is_dirichlet(i, j)) out.free_of_node[g.idx(i, j)] = nfree++;

  // Q1 element matrices by 2x2 Gauss quadrature on [0,hx] x [0,hy].
  double Ke[4][4] = {}, Me[4][4] = {};
  {
    const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    for (double px : gp) {
      for (double py : gp) {
        const double N[4] = {(1 - px) * (1 - py), px * (1 - py), px * py,
                             (1 - px) * py};
        const double dNdx[4] = {-(1 - py) / hx, (1 - py) / hx, py / hx,
                                -py / hx};
        const double dNdy[4] = {-(1 - px) / hy, -px / hy, px / hy,
                                (1 - px) / hy};
        const double w = 0.25 * hx * hy;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            Ke[a][b] += w * (dNdx[a] * dNdx[b] + dNdy[a] * dNdy[b]);
            Me[a][b] += w * N[a] * N[b];
          }
      }
    }
  }

  SparseBuilder kb(nfree), mb(nfree), bb(nfree);
  for (int j = 0; j < ny - 1; ++j) {
    for (int i = 0; i < nx - 1; ++i) {
      const int nodes[4] = {static_cast<int>(g.idx(i, j)),
                            static_cast<int>(g.idx(i + 1, j)),
                            static_cast<int>(g.idx(i + 1, j + 1)),
                            static_cast<int>(g.idx(i, j + 1))};
      for (int a = 0; a < 4; ++a) {
        const int fa = out.free_of_node[nodes[a]];
        if (fa < 0) continue;
        for (int b = 0; b < 4; ++b) {
          const int fb = out.free_of_node[nodes[b]];
          if (fb < 0) continue;
          kb.add(fa, fb, Ke[a][b]);
          mb.add(fa, fb, Me[a][b]);
        }
      }
    }
  }

  // boundary mass over feedback edges (linear edge elements)
  const auto edge_mass = [&](auto&& node_at, int count, double h) {
    for (int e = 0; e < count - 1; ++e) {
      const int n0 = node_at(e), n1 = node_at(e + 1);
      const int f0 = out.free_of_node[n0], f1 = out.free_of_node[n1];
      const double me = h / 6.0;
      if (f0 >= 0) bb.add(f0, f0, 2.0 * me);
      if (f1 >= 0) bb.add(f1, f1, 2.0 * me);
      if (f0 >= 0 && f1 >= 0) {
        bb.add(f0, f1, me);
        bb.add(f1, f0, me);
      }
    }
  };
  if (g.left == EdgeKind::feedback)
    edge_mass([&](int j) { return static_cast<int>(g.idx(0, j)); }, ny, hy);
  if (g.right == EdgeKind::feedback)
    edge_mass([&](int j) { return static_cast<int>(g.idx(nx - 1, j)); }, ny, hy);
  if (g.bottom == EdgeKind::feedback)
    edge_mass([&](int i) { return static_cast<int>(g.idx(i, 0)); }, nx, hx);
  if (g.top == EdgeKind::feedback)
    edge_mass([&](int i) { return static_cast<int>(g.idx(i, ny - 1)); }, nx, hx);

  out.K = kb.compress();
  out.M = mb.compress();
  out.B = bb.compress();
  return out;
}

}  // namespace delaywave
