#pragma once

#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "boxkit/box.hpp"
#include "boxkit/rational.hpp"

namespace boxkit {

namespace detail {

// Mixed-radix indexing of outcome tuples z = (z_0,...,z_{k-1}), first
// coordinate most significant: rank(z) = (..(z_0*s_1 + z_1)*s_2 + ..) + z_{k-1}.
struct OutcomeSpace {
  std::vector<int> sizes;
  std::size_t total = 1;
  std::vector<std::size_t> prefix_counts;       // prefix_counts[i] = prod_{j<i} sizes[j]
  std::vector<std::vector<int>> digits;         // digits[rank][i]
  std::vector<std::vector<std::size_t>> prefix_ranks;  // prefix_ranks[rank][i] = rank of z_{<i}

  explicit OutcomeSpace(std::vector<int> sizes_in) : sizes(std::move(sizes_in)) {
    prefix_counts.resize(sizes.size() + 1, 1);
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (sizes[i] < 1) throw std::invalid_argument("outcome alphabet sizes must be positive");
      prefix_counts[i + 1] = prefix_counts[i] * sizes[i];
    }
    total = prefix_counts[sizes.size()];
    if (total > (std::size_t{1} << 24)) {
      throw std::invalid_argument("joint outcome space too large to tabulate");
    }
    digits.assign(total, std::vector<int>(sizes.size(), 0));
    prefix_ranks.assign(total, std::vector<std::size_t>(sizes.size() + 1, 0));
    for (std::size_t r = 0; r < total; ++r) {
      std::size_t rest = r;
      for (std::size_t i = sizes.size(); i-- > 0;) {
        digits[r][i] = static_cast<int>(rest % sizes[i]);
        rest /= sizes[i];
      }
      for (std::size_t i = 0; i < sizes.size(); ++i) {
        prefix_ranks[r][i + 1] = prefix_ranks[r][i] * sizes[i] + digits[r][i];
      }
    }
  }
};

}  // namespace detail

/// An ordered collection of shared resource boxes; a strategy consumes each
/// box exactly once, in this fixed order.
struct ResourceSet {
  std::vector<BipartiteBox> boxes;

  std::vector<int> alice_output_sizes() const {
    std::vector<int> sizes;
    sizes.reserve(boxes.size());
    for (const auto& box : boxes) sizes.push_back(box.a_size());
    return sizes;
  }

  std::vector<int> bob_output_sizes() const {
    std::vector<int> sizes;
    sizes.reserve(boxes.size());
    for (const auto& box : boxes) sizes.push_back(box.b_size());
    return sizes;
  }

  std::size_t alice_outcome_count() const {
    std::size_t total = 1;
    for (const auto& box : boxes) total *= static_cast<std::size_t>(box.a_size());
    return total;
  }

  std::size_t bob_outcome_count() const {
    std::size_t total = 1;
    for (const auto& box : boxes) total *= static_cast<std::size_t>(box.b_size());
    return total;
  }

  bool operator==(const ResourceSet&) const = default;
};

inline void validate_resource_set(const ResourceSet& resources, bool require_uniform_outputs) {
  for (std::size_t i = 0; i < resources.boxes.size(); ++i) {
    if (!check_box_invariants(resources.boxes[i]).ok()) {
      throw std::invalid_argument("resource box " + std::to_string(i) + " violates box invariants");
    }
    if (require_uniform_outputs && !is_uniform_output_box(resources.boxes[i])) {
      throw std::invalid_argument("resource box " + std::to_string(i) +
                                  " does not have uniform outputs, which this operation requires");
    }
  }
}

/// A deterministic two-party protocol. Party-local functions, no internal
/// randomness, no communication:
///   - box i's Alice-side input is g_A^i(x, z_A^{<i}); with adaptive=false the
///     prior outputs z_A^{<i} are ignored and each table is indexed by x alone;
///   - Alice's final output is F_A(x, z_A), Bob's is F_B(y, z_B).
/// Function tables are stored flat in canonical domain order: outer index x
/// (resp. y), inner index the mixed-radix rank of the outcome tuple, first
/// box most significant.
struct WiringStrategy {
  int x_size = 2;
  int y_size = 2;
  int a_size = 0;  // target output alphabet sizes
  int b_size = 0;
  bool adaptive = false;
  std::vector<std::vector<int>> alice_box_inputs;  // [box][domain index]
  std::vector<std::vector<int>> bob_box_inputs;
  std::vector<int> alice_output;  // [x * |Z_A| + rank(z_A)]
  std::vector<int> bob_output;    // [y * |Z_B| + rank(z_B)]

  bool operator==(const WiringStrategy&) const = default;
};

inline void validate_strategy(const WiringStrategy& strategy, const ResourceSet& resources) {
  const std::size_t n = resources.boxes.size();
  if (strategy.alice_box_inputs.size() != n || strategy.bob_box_inputs.size() != n) {
    throw std::invalid_argument("strategy wires " + std::to_string(strategy.alice_box_inputs.size()) +
                                " boxes, resource set has " + std::to_string(n));
  }
  if (strategy.x_size < 1 || strategy.y_size < 1 || strategy.a_size < 1 || strategy.b_size < 1) {
    throw std::invalid_argument("strategy alphabet sizes must be positive");
  }

  std::size_t alice_prefix = 1, bob_prefix = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t alice_domain = strategy.adaptive ? strategy.x_size * alice_prefix : strategy.x_size;
    const std::size_t bob_domain = strategy.adaptive ? strategy.y_size * bob_prefix : strategy.y_size;
    if (strategy.alice_box_inputs[i].size() != alice_domain || strategy.bob_box_inputs[i].size() != bob_domain) {
      throw std::invalid_argument("strategy wiring table for box " + std::to_string(i) + " has the wrong domain");
    }
    for (int v : strategy.alice_box_inputs[i]) {
      if (v < 0 || v >= resources.boxes[i].x_size()) {
        throw std::invalid_argument("strategy wires box " + std::to_string(i) + " with an out-of-range input");
      }
    }
    for (int v : strategy.bob_box_inputs[i]) {
      if (v < 0 || v >= resources.boxes[i].y_size()) {
        throw std::invalid_argument("strategy wires box " + std::to_string(i) + " with an out-of-range input");
      }
    }
    alice_prefix *= static_cast<std::size_t>(resources.boxes[i].a_size());
    bob_prefix *= static_cast<std::size_t>(resources.boxes[i].b_size());
  }

  if (strategy.alice_output.size() != strategy.x_size * alice_prefix ||
      strategy.bob_output.size() != strategy.y_size * bob_prefix) {
    throw std::invalid_argument("strategy output table has the wrong domain");
  }
  for (int v : strategy.alice_output) {
    if (v < 0 || v >= strategy.a_size) throw std::invalid_argument("strategy output value out of alphabet range");
  }
  for (int v : strategy.bob_output) {
    if (v < 0 || v >= strategy.b_size) throw std::invalid_argument("strategy output value out of alphabet range");
  }
}

/// The exact box a strategy induces: for each input pair, sum the product of
/// the resources' conditional probabilities over every joint outcome
/// trajectory and accumulate onto (F_A(x,z_A), F_B(y,z_B)).
///
/// The result is verified, not assumed: per-input normalization must come out
/// exactly 1, and the induced table must pass every box invariant (a local
/// wiring of no-signalling boxes cannot signal).
inline BipartiteBox induced_box(const WiringStrategy& strategy, const ResourceSet& resources) {
  validate_resource_set(resources, /*require_uniform_outputs=*/false);
  validate_strategy(strategy, resources);

  const detail::OutcomeSpace alice_space(resources.alice_output_sizes());
  const detail::OutcomeSpace bob_space(resources.bob_output_sizes());
  const std::size_t n = resources.boxes.size();

  std::vector<Rational> table(static_cast<std::size_t>(strategy.x_size) * strategy.y_size * strategy.a_size *
                                  strategy.b_size,
                              Rational(0));
  const auto table_index = [&](int x, int y, int a, int b) {
    return ((static_cast<std::size_t>(x) * strategy.y_size + y) * strategy.a_size + a) * strategy.b_size + b;
  };

  for (int x = 0; x < strategy.x_size; ++x) {
    for (int y = 0; y < strategy.y_size; ++y) {
      Rational input_total(0);
      for (std::size_t za = 0; za < alice_space.total; ++za) {
        for (std::size_t zb = 0; zb < bob_space.total; ++zb) {
          Rational weight(1);
          for (std::size_t i = 0; i < n && weight != 0; ++i) {
            const std::size_t a_dom = strategy.adaptive
                                          ? static_cast<std::size_t>(x) * alice_space.prefix_counts[i] +
                                                alice_space.prefix_ranks[za][i]
                                          : static_cast<std::size_t>(x);
            const std::size_t b_dom = strategy.adaptive
                                          ? static_cast<std::size_t>(y) * bob_space.prefix_counts[i] +
                                                bob_space.prefix_ranks[zb][i]
                                          : static_cast<std::size_t>(y);
            weight *= resources.boxes[i].at(strategy.alice_box_inputs[i][a_dom], strategy.bob_box_inputs[i][b_dom],
                                            alice_space.digits[za][i], bob_space.digits[zb][i]);
          }
          if (weight == 0) continue;
          const int a = strategy.alice_output[static_cast<std::size_t>(x) * alice_space.total + za];
          const int b = strategy.bob_output[static_cast<std::size_t>(y) * bob_space.total + zb];
          table[table_index(x, y, a, b)] += weight;
          input_total += weight;
        }
      }
      if (input_total != 1) {
        throw std::logic_error("induced box failed exact normalization at input (" + std::to_string(x) + "," +
                               std::to_string(y) + ")");
      }
    }
  }

  BipartiteBox box(strategy.x_size, strategy.y_size, strategy.a_size, strategy.b_size, std::move(table));
  if (!check_box_invariants(box).ok()) {
    throw std::logic_error("induced box violates no-signalling; wiring evaluation is buggy");
  }
  return box;
}

/// Output distribution of one flat table under uniformly distributed outcome
/// strings: p(out|in) = |{z : table(in, z) = out}| / z_count.
inline MarginalTable counting_marginal(const std::vector<int>& output_table, int input_size, std::size_t z_count,
                                       int output_size, Party side) {
  if (output_table.size() != static_cast<std::size_t>(input_size) * z_count) {
    throw std::invalid_argument("counting_marginal: table does not match the declared domain");
  }
  MarginalTable marginal{side, input_size, output_size, {}};
  marginal.table.assign(static_cast<std::size_t>(input_size) * output_size, Rational(0));
  for (int input = 0; input < input_size; ++input) {
    std::vector<std::size_t> counts(output_size, 0);
    for (std::size_t z = 0; z < z_count; ++z) ++counts[output_table[static_cast<std::size_t>(input) * z_count + z]];
    for (int out = 0; out < output_size; ++out) {
      marginal.table[static_cast<std::size_t>(input) * output_size + out] = Rational(counts[out], z_count);
    }
  }
  return marginal;
}

/// Per-party marginals of a strategy over uniform-output resources, computed
/// by exact preimage counting. Uniform outputs make every outcome string
/// equally likely -- including under adaptive wirings, where each box's
/// outcome stays uniform no matter which input the prior outcomes selected --
/// so counting is exact. The counting tables are cross-checked against the
/// marginals of the induced box and any mismatch is reported as an internal
/// error.
inline std::pair<MarginalTable, MarginalTable> strategy_marginals(const WiringStrategy& strategy,
                                                                  const ResourceSet& resources) {
  validate_resource_set(resources, /*require_uniform_outputs=*/true);
  validate_strategy(strategy, resources);

  const std::size_t za = resources.alice_outcome_count();
  const std::size_t zb = resources.bob_outcome_count();
  MarginalTable alice = counting_marginal(strategy.alice_output, strategy.x_size, za, strategy.a_size, Party::alice);
  MarginalTable bob = counting_marginal(strategy.bob_output, strategy.y_size, zb, strategy.b_size, Party::bob);

  const auto [induced_alice, induced_bob] = marginals_of_box(induced_box(strategy, resources));
  if (alice != induced_alice || bob != induced_bob) {
    throw std::logic_error("counting marginals disagree with induced-box marginals; wiring evaluation is buggy");
  }
  return {std::move(alice), std::move(bob)};
}

struct MarginalCondition {
  int x = 0;
  int y = 0;
  int shift = 0;  // x*y mod p
  bool satisfied = false;
  std::optional<int> violating_output;  // first q with p_B(q|y) != p_A((q - shift) mod p | x)
};

struct ConditionReport {
  std::vector<MarginalCondition> conditions;
  bool forces_uniform = false;

  bool all_satisfied() const {
    for (const auto& c : conditions) {
      if (!c.satisfied) return false;
    }
    return true;
  }
};

/// Necessary marginal conditions for perfectly simulating the mod-p box:
/// for every input pair, p_B(q|y) = p_A((q - xy) mod p | x) for all q.
/// When all four hold, combining them forces p_B(q|1) = p_B(q+1|1)
/// cyclically, i.e. Bob's marginal on input 1 must be uniform -- the lever
/// that rules out resource sets whose outcome-string count p does not divide.
inline ConditionReport check_marginal_conditions(const MarginalTable& p_a, const MarginalTable& p_b, int p) {
  if (p < 2) throw std::invalid_argument("marginal conditions require p >= 2");
  if (p_a.input_size != 2 || p_b.input_size != 2 || p_a.output_size != p || p_b.output_size != p) {
    throw std::invalid_argument("marginal conditions expect binary-input tables with " + std::to_string(p) +
                                " outputs");
  }

  ConditionReport report;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      MarginalCondition condition{x, y, (x * y) % p, true, std::nullopt};
      for (int q = 0; q < p; ++q) {
        const int shifted = ((q - condition.shift) % p + p) % p;
        if (p_b.at(y, q) != p_a.at(x, shifted)) {
          condition.satisfied = false;
          condition.violating_output = q;
          break;
        }
      }
      report.conditions.push_back(condition);
    }
  }

  report.forces_uniform = report.all_satisfied();
  if (report.forces_uniform) {
    // The chain of the four conditions collapses to cyclic shift invariance.
    for (int q = 0; q < p; ++q) {
      if (p_b.at(1, q) != p_b.at(1, (q + 1) % p)) {
        throw std::logic_error("marginal conditions all hold but Bob's input-1 marginal is not shift invariant");
      }
    }
  }
  return report;
}

/// Can a function from a product set of the given sizes onto {0..p-1} have
/// equal preimage counts? True iff p divides the product.
inline bool can_marginal_be_uniform(const std::vector<int>& sizes, int p) {
  if (p < 2) throw std::invalid_argument("can_marginal_be_uniform requires p >= 2");
  Int product(1);
  for (int s : sizes) {
    if (s < 1) throw std::invalid_argument("alphabet sizes must be >= 1");
    product *= s;
  }
  return product % p == 0;
}

namespace detail {

inline int mod_inverse(int value, int modulus) {
  // Extended Euclid; value and modulus are coprime by the caller's check.
  int r0 = modulus, r1 = ((value % modulus) + modulus) % modulus;
  int t0 = 0, t1 = 1;
  while (r1 != 0) {
    const int q = r0 / r1;
    r0 -= q * r1;
    std::swap(r0, r1);
    t0 -= q * t1;
    std::swap(t0, t1);
  }
  return ((t0 % modulus) + modulus) % modulus;
}

}  // namespace detail

/// Wires one mod-p box and one mod-q box (gcd(p,q)=1) into a perfect mod-pq
/// box: both boxes get the raw inputs, and each party combines its two
/// outputs into the unique residue mod pq with those remainders. Both
/// component congruences b_i - a_i = xy then lift to b - a = xy mod pq.
inline std::pair<WiringStrategy, ResourceSet> compose_crt(int p, int q) {
  if (p < 2 || q < 2) throw std::invalid_argument("compose_crt requires p, q >= 2");
  if (std::gcd(p, q) != 1) {
    throw std::invalid_argument("compose_crt requires coprime moduli, got gcd(" + std::to_string(p) + "," +
                                std::to_string(q) + ") != 1");
  }

  ResourceSet resources{{make_modp_box(p), make_modp_box(q)}};
  const int r = p * q;
  const int p_inverse_mod_q = detail::mod_inverse(p, q);

  const auto crt_combine = [&](int u, int v) {
    // unique residue mod pq congruent to u mod p and v mod q
    const int k = ((v - u) % q + q) % q * p_inverse_mod_q % q;
    return (u + p * k) % r;
  };

  WiringStrategy strategy;
  strategy.x_size = 2;
  strategy.y_size = 2;
  strategy.a_size = r;
  strategy.b_size = r;
  strategy.adaptive = false;
  strategy.alice_box_inputs = {{0, 1}, {0, 1}};  // feed x (resp. y) straight through
  strategy.bob_box_inputs = {{0, 1}, {0, 1}};

  const std::size_t z_total = static_cast<std::size_t>(p) * q;
  strategy.alice_output.resize(2 * z_total);
  strategy.bob_output.resize(2 * z_total);
  for (int input = 0; input < 2; ++input) {
    for (int u = 0; u < p; ++u) {
      for (int v = 0; v < q; ++v) {
        const std::size_t rank = static_cast<std::size_t>(u) * q + v;
        strategy.alice_output[input * z_total + rank] = crt_combine(u, v);
        strategy.bob_output[input * z_total + rank] = crt_combine(u, v);
      }
    }
  }
  return {std::move(strategy), std::move(resources)};
}

}  // namespace boxkit
