#include "wkam/potential.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace wkam {

namespace {

// least-squares control displacement: w = (sigma^t sigma)^{-1} sigma^t e
struct NodeFrame {
  int d, r;
  const double* sig;   // d x r row-major
  const double* bbar;  // r
  double bnorm;
  double ginv[64];  // r x r

  void factor() {
    double g[64];
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += sig[i * r + a] * sig[i * r + b];
        g[a * r + b] = s;
      }
    // invert g by Gauss-Jordan with partial pivoting (r <= 8)
    double inv[64];
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) inv[a * r + b] = (a == b) ? 1.0 : 0.0;
    for (int col = 0; col < r; ++col) {
      int piv = col;
      for (int row = col + 1; row < r; ++row)
        if (std::fabs(g[row * r + col]) > std::fabs(g[piv * r + col])) piv = row;
      if (piv != col)
        for (int b = 0; b < r; ++b) {
          std::swap(g[piv * r + b], g[col * r + b]);
          std::swap(inv[piv * r + b], inv[col * r + b]);
        }
      double den = g[col * r + col];
      for (int b = 0; b < r; ++b) {
        g[col * r + b] /= den;
        inv[col * r + b] /= den;
      }
      for (int row = 0; row < r; ++row) {
        if (row == col) continue;
        double f = g[row * r + col];
        if (f == 0.0) continue;
        for (int b = 0; b < r; ++b) {
          g[row * r + b] -= f * g[col * r + b];
          inv[row * r + b] -= f * inv[col * r + b];
        }
      }
    }
    std::copy(inv, inv + r * r, ginv);
  }

  // returns |sigma w - e| (out-of-plane residual)
  double solve(const double* e, double* w) const {
    double rhs[8];
    for (int a = 0; a < r; ++a) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += sig[i * r + a] * e[i];
      rhs[a] = s;
    }
    for (int a = 0; a < r; ++a) {
      double s = 0.0;
      for (int b = 0; b < r; ++b) s += ginv[a * r + b] * rhs[b];
      w[a] = s;
    }
    double res = 0.0;
    for (int i = 0; i < d; ++i) {
      double fit = 0.0;
      for (int a = 0; a < r; ++a) fit += sig[i * r + a] * w[a];
      double diff = fit - e[i];
      res += diff * diff;
    }
    return std::sqrt(res);
  }

  double edge_cost(const double* w) const {
    double wn = 0.0, wb = 0.0;
    for (int a = 0; a < r; ++a) {
      wn += w[a] * w[a];
      wb += w[a] * bbar[a];
    }
    double c = 0.5 * (std::sqrt(wn) * bnorm - wb);
    return c > 0.0 ? c : 0.0;
  }

  double wnorm(const double* w) const {
    double wn = 0.0;
    for (int a = 0; a < r; ++a) wn += w[a] * w[a];
    return std::sqrt(wn);
  }
};

std::vector<std::vector<int>> lattice_offsets(int d, int reach, int l1cap) {
  std::vector<std::vector<int>> out;
  std::vector<int> v(static_cast<std::size_t>(d), -reach);
  for (;;) {
    int l1 = 0;
    for (int c : v) l1 += std::abs(c);
    if (l1 > 0 && l1 <= l1cap) out.push_back(v);
    int j = d - 1;
    while (j >= 0 && v[static_cast<std::size_t>(j)] == reach) {
      v[static_cast<std::size_t>(j)] = -reach;
      --j;
    }
    if (j < 0) break;
    ++v[static_cast<std::size_t>(j)];
  }
  return out;
}

std::vector<std::vector<double>> control_directions(int r) {
  std::vector<std::vector<double>> dirs;
  for (int k = 0; k < r; ++k)
    for (double s : {1.0, -1.0}) {
      std::vector<double> u(static_cast<std::size_t>(r), 0.0);
      u[static_cast<std::size_t>(k)] = s;
      dirs.push_back(u);
    }
  if (r > 1) {
    double inv = 1.0 / std::sqrt(static_cast<double>(r));
    for (unsigned mask = 0; mask < (1u << r); ++mask) {
      std::vector<double> u(static_cast<std::size_t>(r));
      for (int k = 0; k < r; ++k)
        u[static_cast<std::size_t>(k)] = (mask >> k & 1u) ? inv : -inv;
      dirs.push_back(u);
    }
  }
  return dirs;
}

}  // namespace

ControlGraph build_control_graph(const SRStructure& S, const PeriodicGrid& grid,
                                 const ControlGraphSpec& spec) {
  const int d = S.dim(), r = S.rank();
  const std::size_t n = grid.size();
  if (n > (std::size_t{1} << 31)) throw std::invalid_argument("grid too large for u32 node ids");

  // node coordinates as SoA, then batch-evaluate the frame and drift fields
  std::vector<std::vector<double>> coords(static_cast<std::size_t>(d),
                                          std::vector<double>(n));
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t rem = idx;
    for (int j = d - 1; j >= 0; --j) {
      int nj = grid.dims[static_cast<std::size_t>(j)];
      coords[static_cast<std::size_t>(j)][idx] =
          grid.spacing[static_cast<std::size_t>(j)] * static_cast<double>(rem % nj);
      rem /= static_cast<std::size_t>(nj);
    }
  }
  std::vector<const double*> vars;
  for (auto& c : coords) vars.push_back(c.data());

  std::vector<std::vector<double>> sig_f(static_cast<std::size_t>(d) * r);
  for (std::size_t e = 0; e < sig_f.size(); ++e) {
    sig_f[e].resize(n);
    simd::eval_batch(S.sigma_programs()[e], vars.data(), sig_f[e].data(), n);
  }
  std::vector<std::vector<double>> bb_f(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k) {
    bb_f[static_cast<std::size_t>(k)].resize(n);
    simd::eval_batch(S.bbar_programs()[static_cast<std::size_t>(k)], vars.data(),
                     bb_f[static_cast<std::size_t>(k)].data(), n);
  }

  const double dmax = grid.max_spacing();
  double rung_max = 0.0;
  for (double rho : spec.rungs) rung_max = std::max(rung_max, rho);
  const double bmax = S.max_drift_norm();
  const double h_base = spec.step_scale * dmax;  // nominal reach of one edge
  const double slack = spec.lattice_slack * dmax;

  auto offsets_list = lattice_offsets(d, spec.lattice_reach, spec.lattice_l1);
  auto dirs = control_directions(r);

  std::vector<std::uint8_t> node_forbidden(n, 0);
  for (std::size_t f : spec.forbidden)
    if (f < n) node_forbidden[f] = 1;

  ControlGraph g;
  g.grid = grid;
  g.h = h_base / std::max(1.0, bmax + rung_max);
  g.offsets.resize(n + 1, 0);

  struct Edge {
    std::uint32_t to;
    double wa, wc;
  };
  std::vector<Edge> scratch;
  std::vector<Edge> kept;
  std::vector<double> sig_x(static_cast<std::size_t>(d) * r), bb_x(static_cast<std::size_t>(r));
  std::vector<double> disp(static_cast<std::size_t>(d)), target(static_cast<std::size_t>(d));
  std::vector<double> w(static_cast<std::size_t>(r)), xi(static_cast<std::size_t>(r));
  std::vector<int> tc(static_cast<std::size_t>(d));

  // first pass counts, second pass fills; edges are regenerated cheaply
  std::vector<Edge> all_edges;
  all_edges.reserve(n * (offsets_list.size() + dirs.size() * spec.rungs.size() + 1) / 2);

  for (std::size_t idx = 0; idx < n; ++idx) {
    g.offsets[idx] = all_edges.size();
    if (node_forbidden[idx]) continue;
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < r; ++k)
        sig_x[static_cast<std::size_t>(i) * r + k] = sig_f[static_cast<std::size_t>(i) * r + k][idx];
    for (int k = 0; k < r; ++k) bb_x[static_cast<std::size_t>(k)] = bb_f[static_cast<std::size_t>(k)][idx];
    NodeFrame frame{d, r, sig_x.data(), bb_x.data(), 0.0, {}};
    double bn = 0.0;
    for (int k = 0; k < r; ++k) bn += bb_x[static_cast<std::size_t>(k)] * bb_x[static_cast<std::size_t>(k)];
    frame.bnorm = std::sqrt(bn);
    frame.factor();

    auto node_coords = grid.coords_of(idx);
    scratch.clear();

    auto try_snapped = [&](const double* xi_ctrl, double h_edge, bool drift) {
      for (int i = 0; i < d; ++i) {
        double v = 0.0;
        for (int k = 0; k < r; ++k) v += sig_x[static_cast<std::size_t>(i) * r + k] * xi_ctrl[k];
        target[static_cast<std::size_t>(i)] =
            coords[static_cast<std::size_t>(i)][idx] + h_edge * v;
      }
      for (int i = 0; i < d; ++i)
        target[static_cast<std::size_t>(i)] = grid.geometry.wrap1(target[static_cast<std::size_t>(i)], i);
      std::size_t to = grid.nearest_node(target);
      if (to == idx || node_forbidden[to]) return;
      for (int i = 0; i < d; ++i)
        disp[static_cast<std::size_t>(i)] = grid.geometry.min_image1(
            grid.point_of(to)[static_cast<std::size_t>(i)] - coords[static_cast<std::size_t>(i)][idx], i);
      frame.solve(disp.data(), w.data());
      double wa = drift ? 0.0 : frame.edge_cost(w.data());
      scratch.push_back({static_cast<std::uint32_t>(to), wa, frame.wnorm(w.data())});
    };

    // drift edge, cost 0 by construction
    double h_drift = h_base / std::max(1.0, frame.bnorm);
    try_snapped(bb_x.data(), h_drift, true);

    // drift-relative control ladder
    for (const auto& u : dirs)
      for (double rho : spec.rungs) {
        double speed = 0.0;
        for (int k = 0; k < r; ++k) {
          xi[static_cast<std::size_t>(k)] = bb_x[static_cast<std::size_t>(k)] + rho * u[static_cast<std::size_t>(k)];
          speed += xi[static_cast<std::size_t>(k)] * xi[static_cast<std::size_t>(k)];
        }
        double h_edge = h_base / std::max(1.0, std::sqrt(speed));
        try_snapped(xi.data(), h_edge, false);
      }

    // axis-lattice offsets, admissible when nearly horizontal
    for (const auto& v : offsets_list) {
      for (int j = 0; j < d; ++j)
        tc[static_cast<std::size_t>(j)] =
            grid.wrap_coord(node_coords[static_cast<std::size_t>(j)] + v[static_cast<std::size_t>(j)], j);
      std::size_t to = grid.index_of(tc);
      if (to == idx || node_forbidden[to]) continue;
      for (int j = 0; j < d; ++j)
        disp[static_cast<std::size_t>(j)] =
            grid.spacing[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(j)];
      double res = frame.solve(disp.data(), w.data());
      if (res > slack) continue;
      scratch.push_back({static_cast<std::uint32_t>(to), frame.edge_cost(w.data()),
                         frame.wnorm(w.data())});
    }

    // dedupe, keep cheapest
    std::sort(scratch.begin(), scratch.end(), [](const Edge& a, const Edge& b) {
      return a.to != b.to ? a.to < b.to : a.wa < b.wa;
    });
    kept.clear();
    for (const Edge& e : scratch) {
      if (!kept.empty() && kept.back().to == e.to) {
        kept.back().wa = std::min(kept.back().wa, e.wa);
        kept.back().wc = std::min(kept.back().wc, e.wc);
      } else {
        kept.push_back(e);
      }
    }
    for (const Edge& e : kept) all_edges.push_back(e);
  }
  g.offsets[n] = all_edges.size();

  g.targets.resize(all_edges.size());
  g.w_action.resize(all_edges.size());
  g.w_cc.resize(all_edges.size());
  for (std::size_t i = 0; i < all_edges.size(); ++i) {
    g.targets[i] = all_edges[i].to;
    g.w_action[i] = all_edges[i].wa;
    g.w_cc[i] = all_edges[i].wc;
  }

  // strong connectivity: forward and backward reachability from node 0
  {
    std::vector<std::uint8_t> fwd(n, 0);
    std::vector<std::uint32_t> stack{0};
    fwd[0] = 1;
    while (!stack.empty()) {
      std::uint32_t u = stack.back();
      stack.pop_back();
      for (std::uint64_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
        std::uint32_t v = g.targets[e];
        if (!fwd[v]) {
          fwd[v] = 1;
          stack.push_back(v);
        }
      }
    }
    // reverse adjacency by counting sort
    std::vector<std::uint32_t> rev_cnt(n + 1, 0);
    for (std::uint32_t t : g.targets) ++rev_cnt[t + 1];
    for (std::size_t i = 0; i < n; ++i) rev_cnt[i + 1] += rev_cnt[i];
    std::vector<std::uint32_t> rev(g.targets.size());
    {
      std::vector<std::uint32_t> fill(rev_cnt.begin(), rev_cnt.end() - 1);
      for (std::size_t u = 0; u < n; ++u)
        for (std::uint64_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e)
          rev[fill[g.targets[e]]++] = static_cast<std::uint32_t>(u);
    }
    std::vector<std::uint8_t> bwd(n, 0);
    stack.assign(1, 0);
    bwd[0] = 1;
    while (!stack.empty()) {
      std::uint32_t u = stack.back();
      stack.pop_back();
      for (std::uint32_t e = rev_cnt[u]; e < rev_cnt[u + 1]; ++e) {
        std::uint32_t v = rev[e];
        if (!bwd[v]) {
          bwd[v] = 1;
          stack.push_back(v);
        }
      }
    }
    g.strongly_connected = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (node_forbidden[i]) continue;
      if (!fwd[i]) {
        g.strongly_connected = false;
        g.offending = {0, i};
        break;
      }
      if (!bwd[i]) {
        g.strongly_connected = false;
        g.offending = {i, 0};
        break;
      }
    }
  }
  return g;
}

std::vector<std::uint32_t> snap_nodes(const PeriodicGrid& grid,
                                      const std::vector<Point>& points, double radius) {
  const int d = grid.geometry.d;
  std::vector<std::uint32_t> out;
  std::vector<int> base(static_cast<std::size_t>(d)), off(static_cast<std::size_t>(d)),
      cur(static_cast<std::size_t>(d));
  for (const Point& p : points) {
    std::vector<int> half(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      base[static_cast<std::size_t>(j)] = static_cast<int>(
          std::floor(p[static_cast<std::size_t>(j)] / grid.spacing[static_cast<std::size_t>(j)]));
      half[static_cast<std::size_t>(j)] = static_cast<int>(
          std::ceil(radius / grid.spacing[static_cast<std::size_t>(j)])) + 1;
    }
    std::fill(off.begin(), off.end(), 0);
    for (int j = 0; j < d; ++j) off[static_cast<std::size_t>(j)] = -half[static_cast<std::size_t>(j)];
    for (;;) {
      for (int j = 0; j < d; ++j)
        cur[static_cast<std::size_t>(j)] =
            grid.wrap_coord(base[static_cast<std::size_t>(j)] + off[static_cast<std::size_t>(j)], j);
      std::size_t idx = grid.index_of(cur);
      Point q = grid.point_of(idx);
      if (grid.geometry.distance(q, p) <= radius) out.push_back(static_cast<std::uint32_t>(idx));
      int j = d - 1;
      while (j >= 0 && off[static_cast<std::size_t>(j)] == half[static_cast<std::size_t>(j)]) {
        off[static_cast<std::size_t>(j)] = -half[static_cast<std::size_t>(j)];
        --j;
      }
      if (j < 0) break;
      ++off[static_cast<std::size_t>(j)];
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

using HeapItem = std::pair<double, std::uint32_t>;

struct DijkstraState {
  std::vector<double> dist;
  std::vector<std::uint8_t> done;
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<HeapItem>> heap;
};

void init_dijkstra(DijkstraState& st, std::size_t n,
                   const std::vector<std::uint32_t>& sources,
                   const std::vector<std::uint8_t>* forbidden) {
  st.dist.assign(n, kUnreachable);
  st.done.assign(n, 0);
  for (std::uint32_t s : sources) {
    if (forbidden && (*forbidden)[s]) continue;
    st.dist[s] = 0.0;
    st.heap.push({0.0, s});
  }
}

}  // namespace

std::vector<double> shortest_paths(const ControlGraph& g,
                                   const std::vector<std::uint32_t>& sources,
                                   EdgeWeight weight,
                                   const std::vector<std::uint8_t>* forbidden) {
  const std::vector<double>& w = weight == EdgeWeight::action ? g.w_action : g.w_cc;
  DijkstraState st;
  init_dijkstra(st, g.node_count(), sources, forbidden);
  while (!st.heap.empty()) {
    auto [du, u] = st.heap.top();
    st.heap.pop();
    if (st.done[u]) continue;
    st.done[u] = 1;
    for (std::uint64_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
      std::uint32_t v = g.targets[e];
      if (st.done[v] || (forbidden && (*forbidden)[v])) continue;
      double nd = du + w[e];
      if (nd < st.dist[v]) {
        st.dist[v] = nd;
        st.heap.push({nd, v});
      }
    }
  }
  return std::move(st.dist);
}

std::vector<double> shortest_to_groups(const ControlGraph& g,
                                       const std::vector<std::uint32_t>& sources,
                                       const std::vector<std::vector<std::uint32_t>>& groups,
                                       EdgeWeight weight,
                                       const std::vector<std::uint8_t>* forbidden) {
  const std::vector<double>& w = weight == EdgeWeight::action ? g.w_action : g.w_cc;
  std::vector<std::int32_t> group_of(g.node_count(), -1);
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (std::uint32_t nd : groups[gi]) group_of[nd] = static_cast<std::int32_t>(gi);
  std::vector<double> result(groups.size(), kUnreachable);
  std::size_t remaining = 0;
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    if (!groups[gi].empty()) ++remaining;

  DijkstraState st;
  init_dijkstra(st, g.node_count(), sources, forbidden);
  while (!st.heap.empty() && remaining > 0) {
    auto [du, u] = st.heap.top();
    st.heap.pop();
    if (st.done[u]) continue;
    st.done[u] = 1;
    std::int32_t gi = group_of[u];
    if (gi >= 0 && result[static_cast<std::size_t>(gi)] == kUnreachable) {
      result[static_cast<std::size_t>(gi)] = du;
      --remaining;
    }
    for (std::uint64_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
      std::uint32_t v = g.targets[e];
      if (st.done[v] || (forbidden && (*forbidden)[v])) continue;
      double nd = du + w[e];
      if (nd < st.dist[v]) {
        st.dist[v] = nd;
        st.heap.push({nd, v});
      }
    }
  }
  return result;
}

GridField potential_from_set(const SRStructure& S, const PeriodicGrid& grid,
                             const ControlGraphSpec& spec, const ControlGraph& g,
                             const std::vector<Point>& source) {
  (void)S;
  if (source.empty()) throw std::invalid_argument("source set is empty");
  auto sources = snap_nodes(grid, source, spec.snap_radius(grid));
  if (sources.empty()) throw std::invalid_argument("source set snaps to no grid node");
  GridField f(grid, "potential");
  f.values = shortest_paths(g, sources, EdgeWeight::action);
  return f;
}

namespace {

void check_disjoint(const PeriodicGrid& grid, const ControlGraphSpec& spec,
                    const std::vector<std::vector<Point>>& classes) {
  double lim = 2.0 * spec.snap_radius(grid);
  for (std::size_t i = 0; i < classes.size(); ++i)
    for (std::size_t j = i + 1; j < classes.size(); ++j) {
      double dmin = kUnreachable;
      for (const Point& p : classes[i])
        for (const Point& q : classes[j])
          dmin = std::min(dmin, grid.geometry.distance(p, q));
      if (dmin <= lim)
        throw std::invalid_argument("classes " + std::to_string(i + 1) + " and " +
                                    std::to_string(j + 1) +
                                    " overlap within twice the snap radius");
    }
}

}  // namespace

std::vector<std::vector<double>> potential_matrix(
    const ControlGraph& g, const ControlGraphSpec& spec,
    const std::vector<std::vector<Point>>& classes) {
  const std::size_t m = classes.size();
  check_disjoint(g.grid, spec, classes);
  double radius = spec.snap_radius(g.grid);
  std::vector<std::vector<std::uint32_t>> sets(m);
  for (std::size_t i = 0; i < m; ++i) sets[i] = snap_nodes(g.grid, classes[i], radius);
  std::vector<std::vector<double>> phi(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    auto row = shortest_to_groups(g, sets[i], sets);
    for (std::size_t j = 0; j < m; ++j) phi[i][j] = (i == j) ? 0.0 : row[j];
  }
  return phi;
}

std::vector<std::vector<double>> restricted_potential_matrix(
    const ControlGraph& g, const ControlGraphSpec& spec,
    const std::vector<std::vector<Point>>& classes) {
  const std::size_t m = classes.size();
  check_disjoint(g.grid, spec, classes);
  double radius = spec.snap_radius(g.grid);
  std::vector<std::vector<std::uint32_t>> sets(m);
  for (std::size_t i = 0; i < m; ++i) sets[i] = snap_nodes(g.grid, classes[i], radius);
  std::vector<std::vector<double>> phi(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      std::vector<std::uint8_t> forbidden(g.node_count(), 0);
      for (std::size_t l = 0; l < m; ++l) {
        if (l == i || l == j) continue;
        for (std::uint32_t nd : sets[l]) forbidden[nd] = 1;
      }
      auto res = shortest_to_groups(g, sets[i], {sets[j]}, EdgeWeight::action, &forbidden);
      phi[i][j] = res[0];
    }
  return phi;
}

double peierls_barrier(const ControlGraph& g, const ControlGraphSpec& spec,
                       const std::vector<std::vector<Point>>& classes,
                       const std::vector<GridField>& class_fields, const Point& x,
                       const Point& y) {
  if (classes.empty()) throw std::invalid_argument("peierls_barrier needs at least one class");
  double radius = spec.snap_radius(g.grid);
  std::vector<std::vector<std::uint32_t>> sets(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i)
    sets[i] = snap_nodes(g.grid, classes[i], radius);
  auto to_classes = shortest_to_groups(g, {static_cast<std::uint32_t>(g.grid.nearest_node(x))}, sets);
  std::size_t ynode = g.grid.nearest_node(y);
  double best = kUnreachable;
  for (std::size_t i = 0; i < classes.size(); ++i)
    best = std::min(best, to_classes[i] + class_fields[i].values[ynode]);
  return best;
}

double cc_distance(const ControlGraph& g, const Point& x, const Point& y) {
  std::uint32_t from = static_cast<std::uint32_t>(g.grid.nearest_node(x));
  std::uint32_t to = static_cast<std::uint32_t>(g.grid.nearest_node(y));
  auto res = shortest_to_groups(g, {from}, {{to}}, EdgeWeight::cc);
  return res[0];
}

std::vector<double> cc_distance_field(const ControlGraph& g, const Point& x) {
  std::uint32_t from = static_cast<std::uint32_t>(g.grid.nearest_node(x));
  return shortest_paths(g, {from}, EdgeWeight::cc);
}

}  // namespace wkam
