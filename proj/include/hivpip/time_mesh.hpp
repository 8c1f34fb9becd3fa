// time_mesh.hpp
//
// Partition of the time interval [0,T] into cells J_k = (t_{k-1}, t_k],
// with local bisection refinement and transfer of piecewise-constant
// fields between nested meshes. Meshes are immutable; refinement
// returns a new mesh whose node set is a superset of its parent's.

#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "hivpip/linalg.hpp"

namespace hivpip {

// One value per cell (piecewise-constant field, e.g. the control eta
// or the residual).
using CellField = std::vector<double>;

class TimeMesh {
public:
  static TimeMesh uniform(double t_end, std::size_t n_cells);

  // Bisects every marked cell at its midpoint. Unmarked cells are kept,
  // so the result is nested in *this. Duplicate indices are allowed.
  TimeMesh refine(std::span<const std::size_t> marked) const;

  std::size_t cell_count() const { return nodes_.size() - 1; }
  std::size_t node_count() const { return nodes_.size(); }
  double node(std::size_t i) const { return nodes_[i]; }
  const std::vector<double>& nodes() const { return nodes_; }
  double t_end() const { return nodes_.back(); }
  int level() const { return level_; }

  double width(std::size_t k) const { return nodes_[k + 1] - nodes_[k]; }
  double cell_midpoint(std::size_t k) const {
    return 0.5 * (nodes_[k] + nodes_[k + 1]);
  }

  // Index k with t in (t_k, t_{k+1}]; t = 0 maps to cell 0.
  // Throws std::invalid_argument outside [0, T].
  std::size_t cell_containing(double t) const;

  // True when every node of `coarser` is (up to rounding) a node of *this.
  bool is_refinement_of(const TimeMesh& coarser) const;

private:
  TimeMesh(std::vector<double> nodes, int level);

  std::vector<double> nodes_;
  int level_ = 0;
};

// Piecewise-constant injection of a cell field from a mesh onto a
// nested refinement of it. Exact: each destination cell inherits the
// value of the unique source cell containing it.
CellField transfer_cell_field(const TimeMesh& src_mesh, const CellField& field,
                              const TimeMesh& dst_mesh);

// Piecewise-linear evaluation of a per-node field at time t in [0,T].
// Value must support v+v and double*v.
template <class Value>
Value interpolate_nodal(const TimeMesh& mesh, std::span<const Value> values,
                        double t) {
  if (values.size() != mesh.node_count())
    throw std::invalid_argument("interpolate_nodal: field/mesh size mismatch");
  const std::size_t k = mesh.cell_containing(t);
  const double w = (t - mesh.node(k)) / mesh.width(k);
  return (1.0 - w) * values[k] + w * values[k + 1];
}

// One node time per line, plain decimal.
void write_mesh(const TimeMesh& mesh, std::ostream& out);

}  // namespace hivpip
