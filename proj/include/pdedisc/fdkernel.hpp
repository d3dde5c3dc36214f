#pragma once

// Second-order central finite differences for the building blocks used by
// the forward model, the adjoint equation, the gradient and the dictionary
// baseline: iterated derivatives of monomial fields and the derivative of a
// monomial with respect to one component.

#include <array>
#include <span>
#include <vector>

#include "pdedisc/core.hpp"

namespace pdedisc {

// One 1D central stencil, weights in index space (scale by 1/dx^order).
struct Stencil {
  int order = 0;
  std::vector<int> offsets;
  std::vector<double> weights;
  int radius() const { return offsets.empty() ? 0 : -offsets.front(); }
};

inline constexpr int kMaxDerivOrder = 6;

// Widths 1,3,3,5,5,7,7 for orders 0..6.
inline const Stencil& central_stencil(int order) {
  static const std::array<Stencil, kMaxDerivOrder + 1> table = {{
      {0, {0}, {1.0}},
      {1, {-1, 0, 1}, {-0.5, 0.0, 0.5}},
      {2, {-1, 0, 1}, {1.0, -2.0, 1.0}},
      {3, {-2, -1, 0, 1, 2}, {-0.5, 1.0, 0.0, -1.0, 0.5}},
      {4, {-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}},
      {5, {-3, -2, -1, 0, 1, 2, 3}, {-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5}},
      {6, {-3, -2, -1, 0, 1, 2, 3}, {1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0}},
  }};
  if (order < 0 || order > kMaxDerivOrder)
    throw std::invalid_argument("central_stencil: unsupported derivative order");
  return table[size_t(order)];
}

// StencilTable per spec: scaled weights for one (order, axis) pair.
struct StencilTable {
  std::vector<int> offsets;
  std::vector<double> weights;  // units 1/dx^order
};

inline StencilTable stencil_for(int order, double dx) {
  const Stencil& s = central_stencil(order);
  StencilTable t;
  t.offsets = s.offsets;
  t.weights.reserve(s.weights.size());
  const double scale = 1.0 / detail::ipow(dx, order);
  for (double w : s.weights) t.weights.push_back(w * scale);
  return t;
}

namespace detail {

// Visit every node: linear index plus the per-axis index tuple.
template <typename Fn>
void for_each_node(const Grid& g, Fn&& fn) {
  std::vector<int> idx(size_t(g.dim()), 0);
  const size_t total = g.node_count();
  for (size_t k = 0; k < total; ++k) {
    fn(k, idx);
    for (int a = g.dim() - 1; a >= 0; --a) {
      if (++idx[size_t(a)] < g.dims[size_t(a)]) break;
      idx[size_t(a)] = 0;
    }
  }
}

inline std::vector<size_t> strides(const Grid& g) {
  const int n = g.dim();
  std::vector<size_t> s(n, 1);
  for (int a = n - 2; a >= 0; --a) s[a] = s[a + 1] * size_t(g.dims[a + 1]);
  return s;
}

// Apply a 1D stencil along one axis of an n-D nodal array.
inline void apply_axis_stencil(std::span<const double> in, std::span<double> out,
                               const Grid& g, int axis, int order) {
  const Stencil& st = central_stencil(order);
  if (order == 0) {
    std::copy(in.begin(), in.end(), out.begin());
    return;
  }
  const int len = g.dims[axis];
  if (len < int(st.offsets.size()))
    throw std::invalid_argument("apply_derivative: grid too small for stencil");
  const auto str = strides(g);
  const size_t sa = str[axis];
  const size_t block = sa * size_t(len);
  const size_t total = g.node_count();
  const double denom = ipow(g.spacing[axis], order);
  const int r = st.radius();
  const bool periodic = (g.boundary == Boundary::Periodic);

  for (size_t hi = 0; hi < total; hi += block) {
    for (size_t lo = 0; lo < sa; ++lo) {
      const double* u = in.data() + hi + lo;
      double* v = out.data() + hi + lo;
      // interior: no boundary handling needed
      for (int i = r; i < len - r; ++i) {
        double acc = 0.0;
        for (size_t k = 0; k < st.offsets.size(); ++k)
          acc += st.weights[k] * u[size_t(i + st.offsets[k]) * sa];
        v[size_t(i) * sa] = acc / denom;
      }
      // edges
      for (int side = 0; side < 2; ++side) {
        const int begin = side == 0 ? 0 : std::max(r, len - r);
        const int end = side == 0 ? std::min(r, len) : len;
        for (int i = begin; i < end; ++i) {
          double acc = 0.0;
          for (size_t k = 0; k < st.offsets.size(); ++k) {
            int j = i + st.offsets[k];
            if (periodic) {
              j %= len;
              if (j < 0) j += len;
            } else if (j < 0 || j >= len) {
              continue;  // zero padding
            }
            acc += st.weights[k] * u[size_t(j) * sa];
          }
          v[size_t(i) * sa] = acc / denom;
        }
      }
    }
  }
}

}  // namespace detail

// Pointwise product of components raised to powers: f1^p1 * ... * fN^pN.
inline std::vector<double> monomial_field(const Field& f, std::span<const int> p) {
  if (int(p.size()) != f.n_components)
    throw std::invalid_argument("monomial_field: power length != n_components");
  const size_t nodes = f.grid.node_count();
  std::vector<double> out(nodes, 1.0);
  for (int c = 0; c < f.n_components; ++c) {
    const int pc = p[c];
    if (pc == 0) continue;
    auto fc = f.component(c);
    if (pc == 1) {
      for (size_t k = 0; k < nodes; ++k) out[k] *= fc[k];
    } else {
      for (size_t k = 0; k < nodes; ++k) out[k] *= detail::ipow(fc[k], pc);
    }
  }
  return out;
}

// Iterated per-axis central differences, composed in ascending axis order.
inline std::vector<double> apply_derivative(std::span<const double> u, const Grid& g,
                                            std::span<const int> d) {
  if (int(d.size()) != g.dim())
    throw std::invalid_argument("apply_derivative: multi-index length != grid dim");
  std::vector<double> cur(u.begin(), u.end());
  std::vector<double> next(u.size());
  for (int axis = 0; axis < g.dim(); ++axis) {
    if (d[axis] == 0) continue;
    detail::apply_axis_stencil(cur, next, g, axis, d[axis]);
    std::swap(cur, next);
  }
  return cur;
}

// d(f^p)/df_i evaluated from the factored form p_i * f1^p1 ... f_i^{p_i-1} ... ,
// never by dividing by f_i.
inline std::vector<double> power_derivative(const Field& f, std::span<const int> p, int i) {
  if (int(p.size()) != f.n_components)
    throw std::invalid_argument("power_derivative: power length != n_components");
  if (i < 0 || i >= f.n_components)
    throw std::invalid_argument("power_derivative: component index out of range");
  const size_t nodes = f.grid.node_count();
  if (p[i] == 0) return std::vector<double>(nodes, 0.0);
  std::vector<int> q(p.begin(), p.end());
  q[i] -= 1;
  std::vector<double> out = monomial_field(f, q);
  const double pi = double(p[i]);
  for (double& x : out) x *= pi;
  return out;
}

}  // namespace pdedisc
