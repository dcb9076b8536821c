#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "boxkit/box.hpp"
#include "boxkit/errors.hpp"
#include "boxkit/rational.hpp"
#include "boxkit/wiring.hpp"

namespace boxkit {

inline constexpr std::size_t default_search_cap = 1'000'000'000;

/// equation_only scores a strategy by Pr[(b - a) mod p = x*y]; exact_box
/// additionally demands the induced box reproduce the target table entrywise.
enum class SearchMode { equation_only, exact_box };

inline std::string search_mode_name(SearchMode mode) {
  return mode == SearchMode::equation_only ? "equation" : "exact";
}

struct FidelityMetrics {
  Rational equation_success_avg;    // mean over input pairs of Pr[(b-a) mod p = xy]
  Rational equation_success_worst;  // min over input pairs
  Rational tv_distance_to_target;   // max over input pairs of (1/2) sum |p_sim - p_target|

  bool operator==(const FidelityMetrics&) const = default;
};

/// Metrics of an already-computed box against a target with equal square
/// output alphabets (p = |A| = |B|).
inline FidelityMetrics fidelity_of_box(const BipartiteBox& sim, const BipartiteBox& target) {
  if (target.a_size() != target.b_size()) {
    throw std::invalid_argument("fidelity metrics need a target with equal output alphabets");
  }
  if (sim.x_size() != target.x_size() || sim.y_size() != target.y_size() || sim.a_size() != target.a_size() ||
      sim.b_size() != target.b_size()) {
    throw std::invalid_argument("fidelity metrics need matching box shapes");
  }
  const int p = target.a_size();

  FidelityMetrics metrics{Rational(0), Rational(2), Rational(0)};
  for (int x = 0; x < sim.x_size(); ++x) {
    for (int y = 0; y < sim.y_size(); ++y) {
      Rational success(0), deviation(0);
      for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) {
          if (((b - a) % p + p) % p == (x * y) % p) success += sim.at(x, y, a, b);
          const Rational diff = sim.at(x, y, a, b) - target.at(x, y, a, b);
          deviation += diff < 0 ? -diff : diff;
        }
      }
      metrics.equation_success_avg += success;
      metrics.equation_success_worst = std::min(metrics.equation_success_worst, success);
      metrics.tv_distance_to_target = std::max(metrics.tv_distance_to_target, Rational(deviation / 2));
    }
  }
  metrics.equation_success_avg /= sim.x_size() * sim.y_size();
  return metrics;
}

inline FidelityMetrics evaluate_strategy(const WiringStrategy& strategy, const ResourceSet& resources,
                                         const BipartiteBox& target) {
  return fidelity_of_box(induced_box(strategy, resources), target);
}

inline bool is_prime(long long n) {
  if (n < 2) return false;
  for (long long d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

/// Smallest prime strictly larger than every listed output size; the mod-p
/// box for that prime is then out of reach of the listed resources.
inline int prime_escalation(const std::vector<int>& output_sizes) {
  if (output_sizes.empty()) throw std::invalid_argument("prime_escalation needs at least one size");
  int largest = 0;
  for (int s : output_sizes) {
    if (s < 2) throw std::invalid_argument("prime_escalation sizes must be >= 2");
    largest = std::max(largest, s);
  }
  int candidate = largest + 1;
  while (!is_prime(candidate)) ++candidate;
  return candidate;
}

/// Pure divisibility certificate of impossibility: a perfect simulation of the
/// mod-p box forces uniform p-ary marginals on both sides, so the product of
/// each side's resource output sizes must be divisible by p. When neither
/// product is, no strategy -- over any number of wirings -- can be perfect.
inline bool impossibility_precheck(int target_p, const ResourceSet& resources) {
  if (!is_prime(target_p)) {
    throw std::invalid_argument("impossibility_precheck requires a prime modulus, got " + std::to_string(target_p));
  }
  validate_resource_set(resources, /*require_uniform_outputs=*/true);
  return !can_marginal_be_uniform(resources.alice_output_sizes(), target_p) &&
         !can_marginal_be_uniform(resources.bob_output_sizes(), target_p);
}

/// Geometry of the strategy space for one (resources, target shape, adaptive)
/// choice, with the canonical mixed-radix ordinal layout:
///   ordinal = ((wa * wb_count + wb) * fa_count + fa) * fb_count + fb
/// where wa/wb rank the per-box input-wiring tables (box 0 most significant,
/// domain cell 0 most significant within a table) and fa/fb rank the output
/// tables (domain cell 0 most significant, digits base |A| resp. |B|).
struct StrategySpace {
  int x_size = 2, y_size = 2, a_size = 0, b_size = 0;
  bool adaptive = false;
  std::vector<std::size_t> alice_domains, bob_domains;  // wiring-table domain per box
  std::vector<int> alice_bases, bob_bases;              // wiring-table codomain per box
  std::size_t alice_z_count = 1, bob_z_count = 1;       // |Z_A|, |Z_B|
  std::size_t fa_cells = 0, fb_cells = 0;
  Int wa_count, wb_count, fa_count, fb_count;
  Int combo_count, prefix_count, total;  // prefix = (combo, fa); total = strategies
};

inline StrategySpace make_strategy_space(const ResourceSet& resources, int x_size, int y_size, int a_size, int b_size,
                                         bool adaptive) {
  if (x_size < 1 || y_size < 1 || a_size < 1 || b_size < 1) {
    throw std::invalid_argument("strategy space needs positive alphabet sizes");
  }
  StrategySpace s;
  s.x_size = x_size;
  s.y_size = y_size;
  s.a_size = a_size;
  s.b_size = b_size;
  s.adaptive = adaptive;
  s.wa_count = 1;
  s.wb_count = 1;

  std::size_t a_prefix = 1, b_prefix = 1;
  for (const auto& box : resources.boxes) {
    const std::size_t a_domain = adaptive ? static_cast<std::size_t>(x_size) * a_prefix : x_size;
    const std::size_t b_domain = adaptive ? static_cast<std::size_t>(y_size) * b_prefix : y_size;
    s.alice_domains.push_back(a_domain);
    s.bob_domains.push_back(b_domain);
    s.alice_bases.push_back(box.x_size());
    s.bob_bases.push_back(box.y_size());
    s.wa_count *= boost::multiprecision::pow(Int(box.x_size()), static_cast<unsigned>(a_domain));
    s.wb_count *= boost::multiprecision::pow(Int(box.y_size()), static_cast<unsigned>(b_domain));
    a_prefix *= static_cast<std::size_t>(box.a_size());
    b_prefix *= static_cast<std::size_t>(box.b_size());
  }
  s.alice_z_count = a_prefix;
  s.bob_z_count = b_prefix;
  s.fa_cells = static_cast<std::size_t>(x_size) * a_prefix;
  s.fb_cells = static_cast<std::size_t>(y_size) * b_prefix;
  s.fa_count = boost::multiprecision::pow(Int(a_size), static_cast<unsigned>(s.fa_cells));
  s.fb_count = boost::multiprecision::pow(Int(b_size), static_cast<unsigned>(s.fb_cells));
  s.combo_count = s.wa_count * s.wb_count;
  s.prefix_count = s.combo_count * s.fa_count;
  s.total = s.prefix_count * s.fb_count;
  return s;
}

inline Int count_strategy_space(const ResourceSet& resources, int x_size, int y_size, int a_size, int b_size,
                                bool adaptive) {
  return make_strategy_space(resources, x_size, y_size, a_size, b_size, adaptive).total;
}

namespace detail {

inline std::vector<int> decode_digits(Int value, std::size_t cells, int base) {
  std::vector<int> digits(cells, 0);
  for (std::size_t c = cells; c-- > 0;) {
    digits[c] = static_cast<int>(value % base);
    value /= base;
  }
  if (value != 0) throw std::invalid_argument("digit rank out of range");
  return digits;
}

inline Int encode_digits(const std::vector<int>& digits, int base) {
  Int value(0);
  for (int d : digits) value = value * base + d;
  return value;
}

inline std::vector<std::vector<int>> decode_wiring(Int value, const std::vector<std::size_t>& domains,
                                                   const std::vector<int>& bases) {
  std::vector<std::vector<int>> tables(domains.size());
  for (std::size_t i = domains.size(); i-- > 0;) {
    tables[i].assign(domains[i], 0);
    for (std::size_t c = domains[i]; c-- > 0;) {
      tables[i][c] = static_cast<int>(value % bases[i]);
      value /= bases[i];
    }
  }
  if (value != 0) throw std::invalid_argument("wiring rank out of range");
  return tables;
}

inline Int encode_wiring(const std::vector<std::vector<int>>& tables, const std::vector<int>& bases) {
  Int value(0);
  for (std::size_t i = 0; i < tables.size(); ++i) {
    for (int d : tables[i]) value = value * bases[i] + d;
  }
  return value;
}

}  // namespace detail

inline WiringStrategy strategy_from_ordinal(Int ordinal, const ResourceSet& resources, const StrategySpace& space) {
  if (ordinal < 0 || ordinal >= space.total) {
    throw std::invalid_argument("strategy ordinal " + ordinal.str() + " outside space of size " + space.total.str());
  }
  const Int fb = ordinal % space.fb_count;
  ordinal /= space.fb_count;
  const Int fa = ordinal % space.fa_count;
  ordinal /= space.fa_count;
  const Int wb = ordinal % space.wb_count;
  const Int wa = ordinal / space.wb_count;

  WiringStrategy strategy;
  strategy.x_size = space.x_size;
  strategy.y_size = space.y_size;
  strategy.a_size = space.a_size;
  strategy.b_size = space.b_size;
  strategy.adaptive = space.adaptive;
  strategy.alice_box_inputs = detail::decode_wiring(wa, space.alice_domains, space.alice_bases);
  strategy.bob_box_inputs = detail::decode_wiring(wb, space.bob_domains, space.bob_bases);
  strategy.alice_output = detail::decode_digits(fa, space.fa_cells, space.a_size);
  strategy.bob_output = detail::decode_digits(fb, space.fb_cells, space.b_size);
  validate_strategy(strategy, resources);
  return strategy;
}

inline WiringStrategy strategy_from_ordinal(const Int& ordinal, const ResourceSet& resources, int x_size, int y_size,
                                            int a_size, int b_size, bool adaptive) {
  return strategy_from_ordinal(ordinal, resources,
                               make_strategy_space(resources, x_size, y_size, a_size, b_size, adaptive));
}

inline Int ordinal_of_strategy(const WiringStrategy& strategy, const ResourceSet& resources) {
  validate_strategy(strategy, resources);
  const StrategySpace space = make_strategy_space(resources, strategy.x_size, strategy.y_size, strategy.a_size,
                                                  strategy.b_size, strategy.adaptive);
  const Int wa = detail::encode_wiring(strategy.alice_box_inputs, space.alice_bases);
  const Int wb = detail::encode_wiring(strategy.bob_box_inputs, space.bob_bases);
  const Int fa = detail::encode_digits(strategy.alice_output, space.a_size);
  const Int fb = detail::encode_digits(strategy.bob_output, space.b_size);
  return ((wa * space.wb_count + wb) * space.fa_count + fa) * space.fb_count + fb;
}

struct SearchOptions {
  SearchMode mode = SearchMode::equation_only;
  bool adaptive = false;
  bool prune = true;
  std::size_t cap = default_search_cap;
  unsigned workers = 0;  // 0 = hardware concurrency
};

struct SearchCertificate {
  SearchCertificate(BipartiteBox target_in, ResourceSet resources_in)
      : target(std::move(target_in)), resources(std::move(resources_in)) {}

  BipartiteBox target;
  ResourceSet resources;
  SearchMode mode = SearchMode::equation_only;
  bool adaptive = false;
  bool prune = true;
  std::string method;  // "exhaustive" | "factorized" | "divisibility"
  std::string enumeration_order = "canonical lexicographic";
  Int space_size;
  Int visited;       // strategies evaluated directly
  Int pruned_count;  // space_size - visited
  std::optional<bool> precheck_impossible;  // divisibility verdict, when the resources allow it
  std::optional<Int> perfect_ordinal;
  std::optional<WiringStrategy> perfect_strategy;
  std::optional<Int> best_ordinal;
  std::optional<WiringStrategy> best_strategy;
  std::optional<FidelityMetrics> best_metrics;
};

namespace detail {

struct SearchAccumulator {
  bool has_best = false;
  Int best_score;
  Rational best_tv;  // exact mode only
  Int best_ordinal;
  std::optional<Int> perfect_ordinal;
  Int visited = 0;

  // Candidates must arrive in ascending ordinal order; ties keep the earlier
  // one, so the winner is the canonically first optimum.
  void consider(const Int& score, const Rational* tv, const Int& ordinal, bool perfect, SearchMode mode) {
    bool better = false;
    if (!has_best || score > best_score) {
      better = true;
    } else if (score == best_score && mode == SearchMode::exact_box && tv != nullptr && *tv < best_tv) {
      better = true;
    }
    if (better) {
      has_best = true;
      best_score = score;
      if (tv != nullptr) best_tv = *tv;
      best_ordinal = ordinal;
    }
    if (perfect && !perfect_ordinal) perfect_ordinal = ordinal;
  }

  // Merge a later-range accumulator into this one.
  void absorb(const SearchAccumulator& later, SearchMode mode) {
    visited += later.visited;
    if (later.has_best) {
      consider(later.best_score, mode == SearchMode::exact_box ? &later.best_tv : nullptr, later.best_ordinal, false,
               mode);
    }
    if (!perfect_ordinal && later.perfect_ordinal) perfect_ordinal = later.perfect_ordinal;
  }
};

/// Shared read-only state plus the per-range enumeration kernels. All
/// probability weights are integer numerators over one global denominator, so
/// the hot loops never touch rational arithmetic.
struct SearchEngine {
  const ResourceSet& resources;
  const BipartiteBox& target;
  const StrategySpace& space;
  SearchMode mode;
  OutcomeSpace alice_space, bob_space;
  Int denom;          // common denominator of every trajectory weight
  Int perfect_score;  // x_size * y_size * denom

  SearchEngine(const ResourceSet& resources_in, const BipartiteBox& target_in, const StrategySpace& space_in,
               SearchMode mode_in)
      : resources(resources_in),
        target(target_in),
        space(space_in),
        mode(mode_in),
        alice_space(resources_in.alice_output_sizes()),
        bob_space(resources_in.bob_output_sizes()),
        denom(1) {
    for (const auto& box : resources.boxes) {
      Int box_denom(1);
      for (const auto& entry : box.table()) box_denom = boost::multiprecision::lcm(box_denom, Int(denominator(entry)));
      denom *= box_denom;
    }
    perfect_score = Int(space.x_size) * space.y_size * denom;
  }

  std::size_t num_index(int x, int y, std::size_t za, std::size_t zb) const {
    return ((static_cast<std::size_t>(x) * space.y_size + y) * alice_space.total + za) * bob_space.total + zb;
  }

  // Trajectory-weight numerators for one wiring combo.
  void load_combo_weights(const std::vector<std::vector<int>>& alice_tables,
                          const std::vector<std::vector<int>>& bob_tables, std::vector<Int>& num) const {
    num.assign(static_cast<std::size_t>(space.x_size) * space.y_size * alice_space.total * bob_space.total, Int(0));
    for (int x = 0; x < space.x_size; ++x) {
      for (int y = 0; y < space.y_size; ++y) {
        for (std::size_t za = 0; za < alice_space.total; ++za) {
          for (std::size_t zb = 0; zb < bob_space.total; ++zb) {
            Rational weight(1);
            for (std::size_t i = 0; i < resources.boxes.size() && weight != 0; ++i) {
              const std::size_t a_dom =
                  space.adaptive ? static_cast<std::size_t>(x) * alice_space.prefix_counts[i] +
                                       alice_space.prefix_ranks[za][i]
                                 : static_cast<std::size_t>(x);
              const std::size_t b_dom = space.adaptive ? static_cast<std::size_t>(y) * bob_space.prefix_counts[i] +
                                                             bob_space.prefix_ranks[zb][i]
                                                       : static_cast<std::size_t>(y);
              weight *= resources.boxes[i].at(alice_tables[i][a_dom], bob_tables[i][b_dom], alice_space.digits[za][i],
                                              bob_space.digits[zb][i]);
            }
            const Rational scaled = weight * denom;
            if (denominator(scaled) != 1) {
              throw std::logic_error("trajectory weight does not divide the common denominator");
            }
            num[num_index(x, y, za, zb)] = Int(numerator(scaled));
          }
        }
      }
    }
  }

  // gains[(y * |Z_B| + zb) * p + w] = total weight of trajectories on which
  // Bob outputting w at (y, zb) satisfies the equation, given Alice's table.
  void load_gains(const std::vector<Int>& num, const std::vector<int>& fa_digits, std::vector<Int>& gains) const {
    const int p = space.a_size;
    gains.assign(static_cast<std::size_t>(space.y_size) * bob_space.total * p, Int(0));
    for (int x = 0; x < space.x_size; ++x) {
      for (int y = 0; y < space.y_size; ++y) {
        for (std::size_t za = 0; za < alice_space.total; ++za) {
          const int w_base = (fa_digits[static_cast<std::size_t>(x) * alice_space.total + za] + x * y) % p;
          for (std::size_t zb = 0; zb < bob_space.total; ++zb) {
            const Int& n = num[num_index(x, y, za, zb)];
            if (n != 0) gains[(static_cast<std::size_t>(y) * bob_space.total + zb) * p + w_base] += n;
          }
        }
      }
    }
  }

  Rational tv_of_buckets(const std::vector<Int>& bucket) const {
    const int p = space.a_size;
    Rational worst(0);
    for (int x = 0; x < space.x_size; ++x) {
      for (int y = 0; y < space.y_size; ++y) {
        Rational deviation(0);
        for (int a = 0; a < p; ++a) {
          for (int b = 0; b < p; ++b) {
            const std::size_t idx = ((static_cast<std::size_t>(x) * space.y_size + y) * p + a) * p + b;
            const Rational diff = Rational(bucket[idx], denom) - target.at(x, y, a, b);
            deviation += diff < 0 ? -diff : diff;
          }
        }
        worst = std::max(worst, Rational(deviation / 2));
      }
    }
    return worst;
  }

  // Enumerate the half-open prefix range [lo, hi); a prefix is a (wiring
  // combo, Alice output table) pair in canonical order. With factorize set,
  // each prefix contributes its exact Bob best response; otherwise every Bob
  // table is scored explicitly.
  SearchAccumulator run_range(std::size_t lo, std::size_t hi, bool factorize) const {
    SearchAccumulator acc;
    const int p = space.a_size;
    const std::size_t fa_count = space.fa_count.convert_to<std::size_t>();
    const std::size_t wb_count = space.wb_count.convert_to<std::size_t>();

    std::vector<Int> num, gains, bucket;
    std::vector<int> fb_digits;
    std::size_t loaded_combo = static_cast<std::size_t>(-1);
    std::vector<std::vector<int>> alice_tables, bob_tables;

    for (std::size_t prefix = lo; prefix < hi; ++prefix) {
      const std::size_t fa_index = prefix % fa_count;
      const std::size_t combo = prefix / fa_count;
      if (combo != loaded_combo) {
        alice_tables = decode_wiring(Int(combo / wb_count), space.alice_domains, space.alice_bases);
        bob_tables = decode_wiring(Int(combo % wb_count), space.bob_domains, space.bob_bases);
        load_combo_weights(alice_tables, bob_tables, num);
        loaded_combo = combo;
      }
      const std::vector<int> fa_digits = decode_digits(Int(fa_index), space.fa_cells, p);
      load_gains(num, fa_digits, gains);

      if (factorize) {
        // Per-cell argmax with smallest-output ties: the lexicographically
        // least Bob table attaining the maximum score for this prefix.
        Int score(0);
        fb_digits.assign(space.fb_cells, 0);
        for (std::size_t cell = 0; cell < space.fb_cells; ++cell) {
          const Int* cell_gains = &gains[cell * p];
          int best_w = 0;
          for (int w = 1; w < p; ++w) {
            if (cell_gains[w] > cell_gains[best_w]) best_w = w;
          }
          fb_digits[cell] = best_w;
          score += cell_gains[best_w];
        }
        const Int ordinal = Int(prefix) * space.fb_count + encode_digits(fb_digits, space.b_size);
        acc.consider(score, nullptr, ordinal, score == perfect_score, mode);
        acc.visited += 1;
      } else {
        fb_digits.assign(space.fb_cells, 0);
        const Int prefix_base = Int(prefix) * space.fb_count;
        Int fb_rank(0);
        do {
          Int score(0);
          for (std::size_t cell = 0; cell < space.fb_cells; ++cell) score += gains[cell * p + fb_digits[cell]];

          bool perfect = false;
          if (mode == SearchMode::exact_box) {
            bucket.assign(static_cast<std::size_t>(space.x_size) * space.y_size * p * p, Int(0));
            for (int x = 0; x < space.x_size; ++x) {
              for (int y = 0; y < space.y_size; ++y) {
                for (std::size_t za = 0; za < alice_space.total; ++za) {
                  const int a = fa_digits[static_cast<std::size_t>(x) * alice_space.total + za];
                  for (std::size_t zb = 0; zb < bob_space.total; ++zb) {
                    const int b = fb_digits[static_cast<std::size_t>(y) * bob_space.total + zb];
                    bucket[((static_cast<std::size_t>(x) * space.y_size + y) * p + a) * p + b] +=
                        num[num_index(x, y, za, zb)];
                  }
                }
              }
            }
            const Rational tv = tv_of_buckets(bucket);
            perfect = tv == 0;
            acc.consider(score, &tv, prefix_base + fb_rank, perfect, mode);
          } else {
            perfect = score == perfect_score;
            acc.consider(score, nullptr, prefix_base + fb_rank, perfect, mode);
          }
          acc.visited += 1;
          ++fb_rank;
        } while ([&] {
          for (std::size_t c = space.fb_cells; c-- > 0;) {
            if (++fb_digits[c] < space.b_size) return true;
            fb_digits[c] = 0;
          }
          return false;
        }());
      }
    }
    return acc;
  }
};

}  // namespace detail

/// Certify by enumeration whether any deterministic strategy over the given
/// resources simulates the target (a 2-input box with square output alphabet,
/// the mod-p family's shape). Strategies are ranked by average equation
/// success; ties go to the canonically first strategy, in exact-box mode with
/// an intermediate smaller-TV tie-break so a perfect reproduction outranks
/// equation-only lookalikes.
///
/// prune + equation mode uses the exact Bob-best-response factorization: for
/// a fixed wiring combo and Alice table the score is separable per (y, z_B)
/// cell, so the best Bob table is computed directly instead of enumerated.
/// The factorized run provably reports the same best strategy, metrics, and
/// perfect-strategy verdict as the plain enumeration -- it prunes work, never
/// candidates. In exact-box mode pruning has no factorization and falls back
/// to plain enumeration.
///
/// When the work exceeds the cap but the divisibility precheck already rules
/// out perfection (uniform resources whose side products p does not divide),
/// a "divisibility" certificate is returned: perfect absent, no best metrics.
/// Whenever the gate fires AND the space is enumerated, the two verdicts are
/// cross-checked and any disagreement is an internal error.
inline SearchCertificate exhaustive_search(const BipartiteBox& target, const ResourceSet& resources,
                                           const SearchOptions& options = {}) {
  if (!check_box_invariants(target).ok()) {
    throw std::invalid_argument("search target must be a valid no-signalling box");
  }
  if (target.x_size() != 2 || target.y_size() != 2) {
    throw std::invalid_argument("search targets are 2-input boxes (the mod-p family's shape)");
  }
  if (target.a_size() != target.b_size() || target.a_size() < 2) {
    throw std::invalid_argument("search targets need equal output alphabets of size >= 2");
  }
  validate_resource_set(resources, /*require_uniform_outputs=*/false);

  const int p = target.a_size();
  const StrategySpace space =
      make_strategy_space(resources, target.x_size(), target.y_size(), target.a_size(), target.b_size(),
                          options.adaptive);

  SearchCertificate cert{target, resources};
  cert.mode = options.mode;
  cert.adaptive = options.adaptive;
  cert.prune = options.prune;
  cert.space_size = space.total;

  const bool factorize = options.prune && options.mode == SearchMode::equation_only;

  bool all_uniform = true;
  for (const auto& box : resources.boxes) {
    if (!is_uniform_output_box(box)) all_uniform = false;
  }
  if (options.prune && options.mode == SearchMode::equation_only && all_uniform) {
    cert.precheck_impossible = !can_marginal_be_uniform(resources.alice_output_sizes(), p) ||
                               !can_marginal_be_uniform(resources.bob_output_sizes(), p);
  }

  const Int work = factorize ? space.prefix_count : space.total;
  if (work > options.cap) {
    if (cert.precheck_impossible == true) {
      cert.method = "divisibility";
      cert.visited = 0;
      cert.pruned_count = space.total;
      return cert;
    }
    throw cap_exceeded_error("strategy space of size " + space.total.str() + " needs " + work.str() +
                             " evaluations, above the cap of " + std::to_string(options.cap) +
                             "; raise the cap or use --precheck-only where applicable");
  }

  const detail::SearchEngine engine(resources, target, space, options.mode);
  const std::size_t prefixes = space.prefix_count.convert_to<std::size_t>();

  unsigned workers = options.workers != 0 ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(prefixes, 1)));

  detail::SearchAccumulator merged;
  if (workers <= 1) {
    merged = engine.run_range(0, prefixes, factorize);
  } else {
    std::vector<detail::SearchAccumulator> parts(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t lo = prefixes * w / workers;
      const std::size_t hi = prefixes * (w + 1) / workers;
      threads.emplace_back([&engine, &parts, w, lo, hi, factorize] { parts[w] = engine.run_range(lo, hi, factorize); });
    }
    for (auto& t : threads) t.join();
    merged = parts[0];
    for (unsigned w = 1; w < workers; ++w) merged.absorb(parts[w], options.mode);
  }

  cert.method = factorize ? "factorized" : "exhaustive";
  cert.visited = merged.visited;
  cert.pruned_count = space.total - merged.visited;
  if (factorize ? merged.visited != space.prefix_count : merged.visited != space.total) {
    throw std::logic_error("enumeration visited " + merged.visited.str() + " strategies, expected " +
                           (factorize ? space.prefix_count : space.total).str());
  }

  if (merged.has_best) {
    cert.best_ordinal = merged.best_ordinal;
    cert.best_strategy = strategy_from_ordinal(merged.best_ordinal, resources, space);
    cert.best_metrics = evaluate_strategy(*cert.best_strategy, resources, target);
    // The integer fast path and the rational induced-box path must agree.
    if (cert.best_metrics->equation_success_avg !=
        Rational(merged.best_score, Int(space.x_size) * space.y_size * engine.denom)) {
      throw std::logic_error("fast-path score disagrees with induced-box metrics");
    }
    if (options.mode == SearchMode::exact_box && cert.best_metrics->tv_distance_to_target != merged.best_tv) {
      throw std::logic_error("fast-path TV distance disagrees with induced-box metrics");
    }
  }

  if (merged.perfect_ordinal) {
    cert.perfect_ordinal = merged.perfect_ordinal;
    cert.perfect_strategy = strategy_from_ordinal(*merged.perfect_ordinal, resources, space);
    const FidelityMetrics metrics = evaluate_strategy(*cert.perfect_strategy, resources, target);
    const bool verified = options.mode == SearchMode::equation_only ? metrics.equation_success_worst == 1
                                                                    : metrics.tv_distance_to_target == 0;
    if (!verified) throw std::logic_error("perfect candidate failed re-verification");
  }

  if (cert.precheck_impossible == true && cert.perfect_strategy.has_value()) {
    throw std::logic_error("divisibility argument contradicted by an enumerated perfect strategy");
  }
  return cert;
}

}  // namespace boxkit
