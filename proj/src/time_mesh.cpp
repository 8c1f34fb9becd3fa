#include "hivpip/time_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace hivpip {

namespace {

// Node coincidence tolerance, relative to T. Bisection midpoints are
// copied bit-exactly into child meshes, so this only has to absorb
// rounding in externally constructed node sets.
double node_tol(const TimeMesh& mesh) {
  return 1e-12 * std::max(1.0, mesh.t_end());
}

}  // namespace

TimeMesh::TimeMesh(std::vector<double> nodes, int level)
    : nodes_(std::move(nodes)), level_(level) {
  if (nodes_.size() < 2) throw std::invalid_argument("TimeMesh: need >= 1 cell");
  if (nodes_.front() != 0.0)
    throw std::invalid_argument("TimeMesh: first node must be 0");
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
    if (!(nodes_[i] < nodes_[i + 1]))
      throw std::invalid_argument("TimeMesh: nodes must strictly increase");
}

TimeMesh TimeMesh::uniform(double t_end, std::size_t n_cells) {
  if (!(t_end > 0.0))
    throw std::invalid_argument("TimeMesh::uniform: t_end must be positive");
  if (n_cells < 1)
    throw std::invalid_argument("TimeMesh::uniform: need at least one cell");
  std::vector<double> nodes(n_cells + 1);
  for (std::size_t i = 0; i <= n_cells; ++i)
    nodes[i] = t_end * static_cast<double>(i) / static_cast<double>(n_cells);
  nodes.back() = t_end;
  return TimeMesh(std::move(nodes), 0);
}

TimeMesh TimeMesh::refine(std::span<const std::size_t> marked) const {
  std::vector<bool> split(cell_count(), false);
  for (std::size_t k : marked) {
    if (k >= cell_count())
      throw std::invalid_argument("TimeMesh::refine: cell index out of range");
    split[k] = true;
  }
  std::vector<double> nodes;
  nodes.reserve(node_count() + marked.size());
  for (std::size_t k = 0; k < cell_count(); ++k) {
    nodes.push_back(nodes_[k]);
    if (split[k]) nodes.push_back(cell_midpoint(k));
  }
  nodes.push_back(nodes_.back());
  return TimeMesh(std::move(nodes), level_ + 1);
}

std::size_t TimeMesh::cell_containing(double t) const {
  const double tol = node_tol(*this);
  if (t < -tol || t > t_end() + tol)
    throw std::invalid_argument("TimeMesh::cell_containing: t outside [0,T]");
  t = std::clamp(t, 0.0, t_end());
  // first node >= t; cell (t_{k}, t_{k+1}] owns its right endpoint
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
  if (i == 0) return 0;
  return i - 1;
}

bool TimeMesh::is_refinement_of(const TimeMesh& coarser) const {
  const double tol = node_tol(*this);
  std::size_t j = 0;
  for (double t : coarser.nodes()) {
    while (j < nodes_.size() && nodes_[j] < t - tol) ++j;
    if (j == nodes_.size() || std::abs(nodes_[j] - t) > tol) return false;
  }
  return true;
}

CellField transfer_cell_field(const TimeMesh& src_mesh, const CellField& field,
                              const TimeMesh& dst_mesh) {
  if (field.size() != src_mesh.cell_count())
    throw std::invalid_argument("transfer_cell_field: field/mesh mismatch");
  if (!dst_mesh.is_refinement_of(src_mesh))
    throw std::invalid_argument("transfer_cell_field: meshes are not nested");
  CellField out(dst_mesh.cell_count());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = field[src_mesh.cell_containing(dst_mesh.cell_midpoint(k))];
  return out;
}

void write_mesh(const TimeMesh& mesh, std::ostream& out) {
  char buf[64];
  for (double t : mesh.nodes()) {
    std::snprintf(buf, sizeof buf, "%.17g\n", t);
    out << buf;
  }
}

}  // namespace hivpip
