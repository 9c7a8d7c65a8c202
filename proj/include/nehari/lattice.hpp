#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nehari {

using Index = std::int64_t;
using Coords = std::vector<Index>;

/// Real-valued function on the vertices of a box, row-major vertex order.
using Field = Eigen::VectorXd;

enum class Boundary { DirichletZero, Torus };

std::string_view to_string(Boundary bc);
Boundary boundary_from_string(std::string_view name);

/// One of the 2N neighbor slots of a vertex. `inside == false` marks the
/// zero-valued exterior of a Dirichlet box; `vertex` is then -1.
struct NeighborSlot {
  Index vertex;
  bool inside;
};

struct Edge {
  Index a;
  Index b;
};

/// Finite truncation of Z^N. Immutable after construction.
///
/// Vertices are indexed row-major: the last axis varies fastest. Neighbor
/// slots are ordered (-e_1, +e_1, -e_2, +e_2, ...). Each unordered edge is
/// stored once; under DirichletZero every out-of-box slot of a vertex is
/// recorded as a boundary half-edge to a phantom vertex carrying 0.
class LatticeBox {
 public:
  LatticeBox(std::vector<Index> sides, Boundary bc);

  int dim() const { return static_cast<int>(sides_.size()); }
  const std::vector<Index>& sides() const { return sides_; }
  Boundary boundary() const { return bc_; }
  Index vertex_count() const { return vertex_count_; }

  Index index_of(std::span<const Index> coords) const;
  Coords coords_of(Index v) const;

  std::span<const NeighborSlot> neighbors(Index v) const;

  const std::vector<Edge>& edges() const { return edges_; }
  /// Interior endpoint of each boundary half-edge (empty on a torus).
  const std::vector<Index>& half_edges() const { return half_edges_; }

  bool operator==(const LatticeBox& other) const {
    return sides_ == other.sides_ && bc_ == other.bc_;
  }

 private:
  std::vector<Index> sides_;
  std::vector<Index> strides_;
  Boundary bc_;
  Index vertex_count_ = 1;
  std::vector<NeighborSlot> slots_;
  std::vector<Edge> edges_;
  std::vector<Index> half_edges_;
};

/// Shorthand matching the (dim, sides, bc) form used by configs.
LatticeBox build_box(int dim, std::vector<Index> sides, Boundary bc);

/// Returns v with v(x) = u(x + k*T) on a torus.
Field translate_field(const LatticeBox& box, const Field& u,
                      std::span<const Index> k, Index period);

}  // namespace nehari
