#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wkam/grid.hpp"
#include "wkam/srgeom.hpp"

namespace wkam {

// Discretization of the action minimization as a shortest-path problem.
// Edges are generated per node from (a) the drift control, cost 0, (b) a
// drift-relative control ladder xi = bbar(x) + rho*u snapped to the nearest
// node, and (c) axis-lattice offsets. Non-drift edges are charged the
// time-optimized action of their achieved control displacement w = sigma^+(y-x):
//   cost = (|w| ||b||_D - w.bbar)/2,
// which is exact for frozen coefficients and keeps snapping from buying free
// progress. The cc weight of an edge is |w| (unit-speed traversal time).
struct ControlGraphSpec {
  double step_scale = 3.0;  // h = step_scale * max spacing / max(1, max ||bbar||)
  std::vector<double> rungs = {0.25, 0.5, 1.0, 2.0};
  int lattice_reach = 2;       // axis offsets up to +-lattice_reach
  int lattice_l1 = 3;          // sum |v_j| cap for lattice offsets
  double lattice_slack = 0.75; // admissible in-plane residual, in max-spacing units
  double snap_radius_cells = 1.5;  // class membership radius, in max-spacing units
  std::vector<std::size_t> forbidden;  // node ids excluded from the graph

  double snap_radius(const PeriodicGrid& grid) const {
    return snap_radius_cells * grid.max_spacing();
  }
};

struct ControlGraph {
  PeriodicGrid grid;
  double h = 0.0;
  std::vector<std::uint64_t> offsets;  // size n+1
  std::vector<std::uint32_t> targets;
  std::vector<double> w_action;
  std::vector<double> w_cc;

  bool strongly_connected = false;
  std::pair<std::size_t, std::size_t> offending{0, 0};  // disconnected witness

  std::size_t node_count() const { return grid.size(); }
  std::size_t edge_count() const { return targets.size(); }
};

ControlGraph build_control_graph(const SRStructure& S, const PeriodicGrid& grid,
                                 const ControlGraphSpec& spec);

// Nodes within the snap radius of any of the given points.
std::vector<std::uint32_t> snap_nodes(const PeriodicGrid& grid,
                                      const std::vector<Point>& points,
                                      double radius);

enum class EdgeWeight { action, cc };

// Multi-source Dijkstra over the chosen weight; unreachable nodes get +inf.
// `forbidden` (optional bitmask, one byte per node) removes nodes entirely.
std::vector<double> shortest_paths(const ControlGraph& g,
                                   const std::vector<std::uint32_t>& sources,
                                   EdgeWeight weight = EdgeWeight::action,
                                   const std::vector<std::uint8_t>* forbidden = nullptr);

// Early-exit variant: returns the distance at the first finalized node of each
// group (= min over the group, by Dijkstra order).
std::vector<double> shortest_to_groups(const ControlGraph& g,
                                       const std::vector<std::uint32_t>& sources,
                                       const std::vector<std::vector<std::uint32_t>>& groups,
                                       EdgeWeight weight = EdgeWeight::action,
                                       const std::vector<std::uint8_t>* forbidden = nullptr);

// Mane potential from a source set, as a field over all nodes.
GridField potential_from_set(const SRStructure& S, const PeriodicGrid& grid,
                             const ControlGraphSpec& spec, const ControlGraph& g,
                             const std::vector<Point>& source);

// Pairwise class potentials Phi(K_i, K_j); diagonal zero.
std::vector<std::vector<double>> potential_matrix(
    const ControlGraph& g, const ControlGraphSpec& spec,
    const std::vector<std::vector<Point>>& classes);

// Class potentials restricted to paths avoiding every other class
// (+inf when disconnected).
std::vector<std::vector<double>> restricted_potential_matrix(
    const ControlGraph& g, const ControlGraphSpec& spec,
    const std::vector<std::vector<Point>>& classes);

// Peierls barrier h(x,y) chained through the static classes:
// min_i Phi(x,K_i) + Phi(K_i,y). `class_fields` are potential_from_set fields
// of each class on the same grid.
double peierls_barrier(const ControlGraph& g, const ControlGraphSpec& spec,
                       const std::vector<std::vector<Point>>& classes,
                       const std::vector<GridField>& class_fields, const Point& x,
                       const Point& y);

// Approximate Carnot-Caratheodory distance (unit-speed shortest path).
double cc_distance(const ControlGraph& g, const Point& x, const Point& y);

// cc distances from one point to every node.
std::vector<double> cc_distance_field(const ControlGraph& g, const Point& x);

struct DisconnectedError : std::runtime_error {
  std::size_t from, to;
  DisconnectedError(std::size_t a, std::size_t b)
      : std::runtime_error("control graph is not strongly connected (" +
                           std::to_string(a) + " -> " + std::to_string(b) +
                           "); refine the grid or the control set"),
        from(a),
        to(b) {}
};

}  // namespace wkam
