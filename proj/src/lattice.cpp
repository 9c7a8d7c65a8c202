#include "nehari/lattice.hpp"

#include <stdexcept>

namespace nehari {

namespace {

Index wrap(Index x, Index n) {
  Index r = x % n;
  return r < 0 ? r + n : r;
}

}  // namespace

std::string_view to_string(Boundary bc) {
  return bc == Boundary::Torus ? "torus" : "dirichlet-zero";
}

Boundary boundary_from_string(std::string_view name) {
  if (name == "torus") return Boundary::Torus;
  if (name == "dirichlet-zero" || name == "dirichlet") return Boundary::DirichletZero;
  throw std::invalid_argument("unknown boundary condition '" + std::string(name) +
                              "' (expected torus or dirichlet-zero)");
}

LatticeBox::LatticeBox(std::vector<Index> sides, Boundary bc)
    : sides_(std::move(sides)), bc_(bc) {
  if (sides_.empty()) throw std::invalid_argument("box dimension must be >= 1");
  for (Index L : sides_) {
    if (L < 1) throw std::invalid_argument("box sides must be >= 1");
    if (bc_ == Boundary::Torus && L < 3)
      throw std::invalid_argument("torus sides must be >= 3");
  }
  const int n = dim();
  strides_.assign(n, 1);
  for (int i = n - 1; i >= 0; --i) {
    strides_[i] = vertex_count_;
    vertex_count_ *= sides_[i];
  }

  slots_.reserve(static_cast<std::size_t>(vertex_count_ * 2 * n));
  Coords c(n, 0);
  for (Index v = 0; v < vertex_count_; ++v) {
    for (int i = 0; i < n; ++i) {
      for (int dir : {-1, +1}) {
        Index y = c[i] + dir;
        if (bc_ == Boundary::Torus) {
          y = wrap(y, sides_[i]);
        } else if (y < 0 || y >= sides_[i]) {
          slots_.push_back({-1, false});
          half_edges_.push_back(v);
          continue;
        }
        const Index w = v + (y - c[i]) * strides_[i];
        slots_.push_back({w, true});
        // the +e_i slot owns the unordered edge; on a torus with L >= 3
        // the wrap-around pair is only reached from one side this way
        if (dir == +1) edges_.push_back({v, w});
      }
    }
    for (int i = n - 1; i >= 0; --i) {
      if (++c[i] < sides_[i]) break;
      c[i] = 0;
    }
  }
}

Index LatticeBox::index_of(std::span<const Index> coords) const {
  if (static_cast<int>(coords.size()) != dim())
    throw std::invalid_argument("coordinate length does not match box dimension");
  Index v = 0;
  for (int i = 0; i < dim(); ++i) {
    if (coords[i] < 0 || coords[i] >= sides_[i])
      throw std::out_of_range("coordinate outside box");
    v += coords[i] * strides_[i];
  }
  return v;
}

Coords LatticeBox::coords_of(Index v) const {
  if (v < 0 || v >= vertex_count_) throw std::out_of_range("invalid vertex index");
  Coords c(dim());
  for (int i = 0; i < dim(); ++i) {
    c[i] = v / strides_[i];
    v -= c[i] * strides_[i];
  }
  return c;
}

std::span<const NeighborSlot> LatticeBox::neighbors(Index v) const {
  if (v < 0 || v >= vertex_count_) throw std::out_of_range("invalid vertex index");
  const std::size_t deg = 2 * static_cast<std::size_t>(dim());
  return {slots_.data() + v * deg, deg};
}

LatticeBox build_box(int dim, std::vector<Index> sides, Boundary bc) {
  if (dim < 1) throw std::invalid_argument("box dimension must be >= 1");
  if (static_cast<int>(sides.size()) != dim)
    throw std::invalid_argument("sides length does not match dimension");
  return LatticeBox(std::move(sides), bc);
}

Field translate_field(const LatticeBox& box, const Field& u,
                      std::span<const Index> k, Index period) {
  if (box.boundary() != Boundary::Torus)
    throw std::invalid_argument("translation requires a torus box");
  if (u.size() != box.vertex_count())
    throw std::invalid_argument("field length does not match box");
  if (static_cast<int>(k.size()) != box.dim())
    throw std::invalid_argument("shift length does not match box dimension");
  if (period < 1) throw std::invalid_argument("period must be positive");

  Field out(u.size());
  Coords src(box.dim());
  for (Index v = 0; v < box.vertex_count(); ++v) {
    Coords c = box.coords_of(v);
    for (int i = 0; i < box.dim(); ++i)
      src[i] = wrap(c[i] + wrap(k[i] * period, box.sides()[i]), box.sides()[i]);
    out[v] = u[box.index_of(src)];
  }
  return out;
}

}  // namespace nehari
