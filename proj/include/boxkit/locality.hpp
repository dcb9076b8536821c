#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "boxkit/box.hpp"
#include "boxkit/errors.hpp"
#include "boxkit/rational.hpp"
#include "boxkit/simplex.hpp"

namespace boxkit {

inline constexpr std::size_t default_vertex_cap = 1'000'000;

inline Int local_vertex_count(int x_size, int y_size, int a_size, int b_size) {
  Int count(1);
  for (int i = 0; i < x_size; ++i) count *= a_size;
  for (int i = 0; i < y_size; ++i) count *= b_size;
  return count;
}

/// All |A|^|X| * |B|^|Y| deterministic local boxes, in lexicographic order of
/// the response tuples (f_A(0),...,f_A(|X|-1)), then (f_B(0),...,f_B(|Y|-1)).
/// The first vertex is the all-zero responder.
inline std::vector<BipartiteBox> enumerate_local_vertices(int x_size, int y_size, int a_size, int b_size,
                                                          std::size_t cap = default_vertex_cap) {
  const Int count = local_vertex_count(x_size, y_size, a_size, b_size);
  if (count > cap) {
    throw cap_exceeded_error("local vertex count " + count.str() + " exceeds cap " + std::to_string(cap) +
                             "; raise the cap to enumerate this polytope");
  }

  std::vector<BipartiteBox> vertices;
  vertices.reserve(count.convert_to<std::size_t>());

  std::vector<int> f_a(x_size, 0);
  const auto advance = [](std::vector<int>& digits, int base) {
    for (std::size_t i = digits.size(); i-- > 0;) {
      if (++digits[i] < base) return true;
      digits[i] = 0;
    }
    return false;
  };

  do {
    std::vector<int> f_b(y_size, 0);
    do {
      vertices.push_back(make_local_deterministic_box(x_size, y_size, a_size, b_size, f_a, f_b));
    } while (advance(f_b, b_size));
  } while (advance(f_a, a_size));

  return vertices;
}

struct LocalityVerdict {
  bool is_local = false;
  // Vertex ids refer to the lexicographic enumeration order above.
  std::vector<std::pair<std::size_t, Rational>> decomposition;
  std::string separating_report;
};

/// Local-polytope membership by exact LP feasibility: does some convex
/// combination of the deterministic vertices reproduce the box entrywise?
/// Any decomposition found is re-verified by direct mixture recomputation
/// before it is returned.
inline LocalityVerdict is_local(const BipartiteBox& box, std::size_t vertex_cap = default_vertex_cap) {
  const ValidationReport validity = check_box_invariants(box);
  if (!validity.ok()) {
    throw std::invalid_argument("is_local requires a valid no-signalling box; run check_box_invariants first");
  }

  const std::vector<BipartiteBox> vertices =
      enumerate_local_vertices(box.x_size(), box.y_size(), box.a_size(), box.b_size(), vertex_cap);

  const std::size_t entries = box.table().size();
  std::vector<std::vector<Rational>> rows(entries + 1, std::vector<Rational>(vertices.size(), Rational(0)));
  std::vector<Rational> rhs(entries + 1, Rational(0));
  for (std::size_t e = 0; e < entries; ++e) {
    for (std::size_t v = 0; v < vertices.size(); ++v) rows[e][v] = vertices[v].table()[e];
    rhs[e] = box.table()[e];
  }
  for (std::size_t v = 0; v < vertices.size(); ++v) rows[entries][v] = 1;
  rhs[entries] = 1;

  const FeasibilityResult lp = solve_nonnegative_system(std::move(rows), std::move(rhs));

  LocalityVerdict verdict;
  if (!lp.feasible) {
    verdict.is_local = false;
    verdict.separating_report = "no convex combination of the " + std::to_string(vertices.size()) +
                                " deterministic local vertices reproduces the box (phase-1 residual " +
                                to_fraction_string(lp.residual) + ")";
    return verdict;
  }

  Rational weight_sum(0);
  std::vector<BipartiteBox> used;
  std::vector<Rational> used_weights;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const Rational& w = lp.solution[v];
    if (w == 0) continue;
    if (w < 0) throw std::logic_error("locality LP returned a negative weight");
    verdict.decomposition.emplace_back(v, w);
    used.push_back(vertices[v]);
    used_weights.push_back(w);
    weight_sum += w;
  }
  if (weight_sum != 1) throw std::logic_error("locality LP weights do not sum to 1");
  if (convex_mixture(used, used_weights) != box) {
    throw std::logic_error("locality LP decomposition failed entrywise re-verification");
  }
  verdict.is_local = true;
  return verdict;
}

/// Probability, over uniform binary inputs, that a XOR b = x AND y.
/// Defined for binary alphabets only. The classical (local) maximum is 3/4;
/// no-signalling boxes reach the algebraic maximum 1. Quantum strategies top
/// out at (2+sqrt(2))/4, about 0.8536 -- a reference constant only, nothing
/// in this library computes it.
inline Rational chsh_success_probability(const BipartiteBox& box) {
  if (box.x_size() != 2 || box.y_size() != 2 || box.a_size() != 2 || box.b_size() != 2) {
    throw std::invalid_argument("CHSH is defined for binary alphabets only");
  }
  Rational sum(0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          if ((a ^ b) == (x & y)) sum += box.at(x, y, a, b);
  return sum / 4;
}

struct LocalChshBound {
  Rational value;
  std::size_t vertex_id = 0;  // lexicographically first maximizing vertex
};

/// Maximum CHSH success probability over the 16 deterministic local boxes.
inline LocalChshBound max_local_chsh() {
  const std::vector<BipartiteBox> vertices = enumerate_local_vertices(2, 2, 2, 2);
  LocalChshBound best{Rational(-1), 0};
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const Rational value = chsh_success_probability(vertices[v]);
    if (value > best.value) best = LocalChshBound{value, v};
  }
  return best;
}

}  // namespace boxkit
