// Acceptance gate: nine end-to-end criteria, one PASS/FAIL line each.
// Everything is exact rational arithmetic; "golden" values are frozen
// regression constants established by the library's own exhaustive runs.

#include <chrono>
#include <cstddef>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "boxkit/boxkit.hpp"

namespace {

using namespace boxkit;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void expect(Outcome& outcome, bool condition, const std::string& message) {
  if (!condition && outcome.pass) {
    outcome.pass = false;
    outcome.detail = message;
  }
}

// One mod-p resource; both parties feed their input through and report the
// outcome embedded into a (possibly larger) target alphabet.
WiringStrategy passthrough_wiring(int p, int target_size) {
  WiringStrategy s;
  s.a_size = target_size;
  s.b_size = target_size;
  s.alice_box_inputs = {{0, 1}};
  s.bob_box_inputs = {{0, 1}};
  s.alice_output.resize(2 * p);
  s.bob_output.resize(2 * p);
  for (int input = 0; input < 2; ++input)
    for (int z = 0; z < p; ++z) {
      s.alice_output[input * p + z] = z;
      s.bob_output[input * p + z] = z;
    }
  return s;
}

// Shared across criteria: 9 reuses 4's run, 6 reuses 5's.
std::optional<SearchCertificate> one_box_certificate;
std::optional<SearchCertificate> two_box_certificate;

Outcome criterion_1_modp_constructors() {
  Outcome outcome;
  for (std::size_t p : {2, 3, 5, 7, 11}) {
    const BipartiteBox box = make_modp_box(p);
    const ValidationReport report = check_box_invariants(box);
    expect(outcome, report.nonnegative, "p=" + std::to_string(p) + ": negative entry");
    expect(outcome, report.normalized, "p=" + std::to_string(p) + ": normalization failed");
    expect(outcome, report.no_signalling_alice_to_bob && report.no_signalling_bob_to_alice,
           "p=" + std::to_string(p) + ": signalling detected");
    expect(outcome, is_uniform_output_box(box), "p=" + std::to_string(p) + ": marginals not uniform");
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t a = 0; a < p; ++a)
          for (std::size_t b = 0; b < p; ++b) {
            const bool hit = (b + p - a) % p == ((x * y) % p);
            expect(outcome, box.at(x, y, a, b) == (hit ? Rational(1, p) : Rational(0)),
                   "p=" + std::to_string(p) + ": wrong entry at (" + std::to_string(x) + "," + std::to_string(y) +
                       "," + std::to_string(a) + "," + std::to_string(b) + ")");
          }
  }
  return outcome;
}

Outcome criterion_2_chsh_bounds() {
  Outcome outcome;
  const std::vector<BipartiteBox> vertices = enumerate_local_vertices(2, 2, 2, 2);
  expect(outcome, vertices.size() == 16, "expected 16 deterministic vertices");
  for (const BipartiteBox& v : vertices) {
    expect(outcome, chsh_success_probability(v) <= Rational(3, 4), "a deterministic vertex exceeds 3/4");
  }
  const LocalChshBound bound = max_local_chsh();
  expect(outcome, bound.value == Rational(3, 4),
         "deterministic maximum is " + to_fraction_string(bound.value) + ", expected 3/4");
  expect(outcome, chsh_success_probability(make_modp_box(2)) == 1, "the binary box must reach success 1");
  return outcome;
}

Outcome criterion_3_locality_lp() {
  Outcome outcome;
  expect(outcome, !is_local(make_modp_box(2)).is_local, "the binary box must be nonlocal");
  expect(outcome, !is_local(make_modp_box(3)).is_local, "the three-output box must be nonlocal");

  const std::vector<BipartiteBox> vertices = enumerate_local_vertices(2, 2, 2, 2);
  std::mt19937 rng(31337);
  for (int trial = 0; trial < 100 && outcome.pass; ++trial) {
    const std::size_t support = 1 + rng() % vertices.size();
    std::vector<BipartiteBox> parts;
    std::vector<Rational> weights;
    std::vector<Int> raw;
    Int total(0);
    for (std::size_t i = 0; i < support; ++i) {
      parts.push_back(vertices[rng() % vertices.size()]);
      raw.emplace_back(1 + rng() % 997);
      total += raw.back();
    }
    for (const Int& r : raw) weights.emplace_back(r, total);
    const BipartiteBox mix = convex_mixture(parts, weights);

    const LocalityVerdict verdict = is_local(mix);
    expect(outcome, verdict.is_local, "trial " + std::to_string(trial) + ": mixture reported nonlocal");
    if (!verdict.is_local) break;
    std::vector<BipartiteBox> found;
    std::vector<Rational> found_weights;
    for (const auto& [vertex_id, weight] : verdict.decomposition) {
      found.push_back(vertices.at(vertex_id));
      found_weights.push_back(weight);
    }
    expect(outcome, convex_mixture(found, found_weights) == mix,
           "trial " + std::to_string(trial) + ": decomposition does not re-verify entrywise");
  }
  return outcome;
}

Outcome criterion_4_one_box_exhaustive() {
  Outcome outcome;
  const ResourceSet resources{{make_modp_box(2)}};
  const BipartiteBox target = make_modp_box(3);

  const Int expected_count = count_strategy_space(resources, 2, 2, 3, 3, false);
  expect(outcome, expected_count == 104976, "strategy count is " + expected_count.str() + ", expected 104976");

  SearchOptions options;
  options.prune = false;  // the full, unpruned enumeration
  const SearchCertificate cert = exhaustive_search(target, resources, options);
  expect(outcome, cert.method == "exhaustive", "expected the plain enumeration, got " + cert.method);
  expect(outcome, cert.visited == expected_count,
         "visited " + cert.visited.str() + " strategies, expected " + expected_count.str());
  expect(outcome, !cert.perfect_ordinal.has_value(), "found a perfect strategy; impossibility violated");
  expect(outcome, cert.best_metrics.has_value(), "no best strategy recorded");
  if (cert.best_metrics) {
    // Frozen golden optimum: the passthrough embedding of the binary box.
    expect(outcome, cert.best_metrics->equation_success_avg == Rational(7, 8),
           "best average is " + to_fraction_string(cert.best_metrics->equation_success_avg) + ", golden value 7/8");
    expect(outcome, cert.best_ordinal == Int(33625),
           "best ordinal is " + cert.best_ordinal->str() + ", golden value 33625");
  }

  // Hand-built witness, replayed: it must reach the recorded optimum.
  const WiringStrategy witness = passthrough_wiring(2, 3);
  const FidelityMetrics witness_metrics = evaluate_strategy(witness, resources, target);
  expect(outcome, witness_metrics.equation_success_avg == Rational(7, 8), "witness strategy does not reach 7/8");
  expect(outcome, cert.best_metrics && witness_metrics.equation_success_avg == cert.best_metrics->equation_success_avg,
         "witness and best-found strategies disagree");
  expect(outcome, ordinal_of_strategy(witness, resources) == 33625, "witness does not sit at the golden ordinal");

  if (outcome.pass) one_box_certificate = cert;
  return outcome;
}

Outcome criterion_5_two_box_pruned() {
  Outcome outcome;
  const ResourceSet resources{{make_modp_box(2), make_modp_box(2)}};
  const BipartiteBox target = make_modp_box(3);

  SearchOptions options;  // pruning on: the best-response factorization
  const SearchCertificate cert = exhaustive_search(target, resources, options);
  expect(outcome, cert.method == "factorized", "expected the factorized run, got " + cert.method);
  expect(outcome, cert.space_size == Int("11019960576"),
         "space size " + cert.space_size.str() + ", expected 11019960576");
  expect(outcome, cert.visited == Int(1679616), "visited " + cert.visited.str() + ", expected 1679616");
  expect(outcome, !cert.perfect_ordinal.has_value(), "found a perfect strategy; impossibility violated");
  expect(outcome, cert.best_metrics.has_value(), "no best strategy recorded");
  if (cert.best_metrics) {
    // Frozen goldens: two binary boxes do no better than one.
    expect(outcome, cert.best_metrics->equation_success_avg == Rational(7, 8),
           "best average is " + to_fraction_string(cert.best_metrics->equation_success_avg) + ", golden value 7/8");
    expect(outcome, cert.best_metrics->equation_success_worst == Rational(1, 2),
           "best worst-case is " + to_fraction_string(cert.best_metrics->equation_success_worst) +
               ", golden value 1/2");
    expect(outcome, cert.best_ordinal == Int(737175097),
           "best ordinal is " + cert.best_ordinal->str() + ", golden value 737175097");
  }

  // Soundness cross-check of the factorization: 10^5 randomly sampled
  // strategies, evaluated directly through the induced box, must contain no
  // perfect strategy and nothing better than the reported optimum.
  const StrategySpace space = make_strategy_space(resources, 2, 2, 3, 3, false);
  const unsigned long long total = space.total.convert_to<unsigned long long>();
  std::mt19937_64 rng(20260816);
  std::uniform_int_distribution<unsigned long long> pick(0, total - 1);
  for (int sample = 0; sample < 100000 && outcome.pass; ++sample) {
    const Int ordinal(pick(rng));
    const WiringStrategy strategy = strategy_from_ordinal(ordinal, resources, space);
    const FidelityMetrics metrics = evaluate_strategy(strategy, resources, target);
    expect(outcome, metrics.equation_success_worst < 1,
           "sample at ordinal " + ordinal.str() + " is perfect; the factorized run missed it");
    expect(outcome, metrics.equation_success_avg <= Rational(7, 8),
           "sample at ordinal " + ordinal.str() + " beats the reported optimum");
  }

  if (outcome.pass) two_box_certificate = cert;
  return outcome;
}

Outcome criterion_6_precheck_vs_search() {
  Outcome outcome;

  // p = 3, one binary box.
  const ResourceSet one{{make_modp_box(2)}};
  expect(outcome, impossibility_precheck(3, one), "precheck must rule out p=3 with one binary box");
  const SearchCertificate cert_one = exhaustive_search(make_modp_box(3), one);
  expect(outcome, !cert_one.perfect_ordinal.has_value(), "search found a perfect strategy the precheck ruled out");

  // p = 3, two binary boxes: reuse the criterion-5 run.
  const ResourceSet two{{make_modp_box(2), make_modp_box(2)}};
  expect(outcome, impossibility_precheck(3, two), "precheck must rule out p=3 with two binary boxes");
  expect(outcome, two_box_certificate.has_value(), "criterion 5 run unavailable for the two-box comparison");
  if (two_box_certificate) {
    expect(outcome, !two_box_certificate->perfect_ordinal.has_value(),
           "two-box search found a perfect strategy the precheck ruled out");
  }

  // p = 5, one binary box: small enough to enumerate outright.
  expect(outcome, impossibility_precheck(5, one), "precheck must rule out p=5 with one binary box");
  const SearchCertificate cert_p5 = exhaustive_search(make_modp_box(5), one);
  expect(outcome, cert_p5.method == "factorized", "p=5 one-box search should enumerate, got " + cert_p5.method);
  expect(outcome, !cert_p5.perfect_ordinal.has_value(), "p=5 search found a perfect strategy");

  // p = 5, binary + three-output boxes: too large to enumerate, so the search
  // itself must conclude via the divisibility argument.
  const ResourceSet mixed{{make_modp_box(2), make_modp_box(3)}};
  expect(outcome, impossibility_precheck(5, mixed), "precheck must rule out p=5 with {2,3}-output boxes");
  const SearchCertificate cert_mixed = exhaustive_search(make_modp_box(5), mixed);
  expect(outcome, cert_mixed.method == "divisibility",
         "oversized p=5 search should certify by divisibility, got " + cert_mixed.method);
  expect(outcome, !cert_mixed.perfect_ordinal.has_value(), "divisibility certificate carries a perfect strategy");
  return outcome;
}

Outcome criterion_7_divisibility_oracle() {
  Outcome outcome;

  // All multisets of alphabet sizes (>= 2) with product <= 64, plus {1}.
  std::vector<std::vector<int>> size_sets{{1}};
  std::vector<int> current;
  const std::function<void(int, int)> extend = [&](int smallest, int product) {
    for (int s = smallest; product * s <= 64; ++s) {
      current.push_back(s);
      size_sets.push_back(current);
      extend(s, product * s);
      current.pop_back();
    }
  };
  extend(2, 1);

  for (const auto& sizes : size_sets) {
    long long product = 1;
    for (int s : sizes) product *= s;
    for (int p = 2; p <= 13 && outcome.pass; ++p) {
      // Independent oracle 1: divisibility by repeated subtraction.
      long long rest = product;
      while (rest > 0) rest -= p;
      const bool divisible = rest == 0;
      const bool claimed = can_marginal_be_uniform(sizes, p);
      expect(outcome, claimed == divisible,
             "product " + std::to_string(product) + ", p " + std::to_string(p) + ": library says " +
                 (claimed ? "possible" : "impossible") + ", subtraction oracle disagrees");

      // Independent oracle 2: genuine brute force over all output functions,
      // where that stays feasible.
      double functions = 1;
      for (long long i = 0; i < product && functions <= 2e6; ++i) functions *= p;
      if (functions > 2e6) continue;
      bool found = false;
      const auto count = static_cast<unsigned long long>(functions);
      for (unsigned long long code = 0; code < count && !found; ++code) {
        std::vector<long long> preimages(p, 0);
        unsigned long long rest_code = code;
        for (long long i = 0; i < product; ++i) {
          ++preimages[rest_code % p];
          rest_code /= p;
        }
        found = true;
        for (int out = 0; out < p; ++out) found = found && preimages[out] * p == product;
      }
      expect(outcome, claimed == found,
             "product " + std::to_string(product) + ", p " + std::to_string(p) +
                 ": function-enumeration oracle disagrees with the library");
    }
    if (!outcome.pass) break;
  }
  return outcome;
}

Outcome criterion_8_crt_composition() {
  Outcome outcome;
  const std::vector<std::pair<int, int>> pairs{{2, 3}, {3, 5}, {2, 5}, {3, 7}};
  for (const auto& [p, q] : pairs) {
    const auto [strategy, resources] = compose_crt(p, q);
    const BipartiteBox composed = induced_box(strategy, resources);
    expect(outcome, composed == make_modp_box(static_cast<std::size_t>(p) * q),
           "composition (" + std::to_string(p) + "," + std::to_string(q) + ") is not entrywise exact");
  }
  return outcome;
}

Outcome criterion_9_marginal_contradiction() {
  Outcome outcome;
  expect(outcome, one_box_certificate.has_value(), "criterion 4 run unavailable");
  if (one_box_certificate) {
    expect(outcome, !one_box_certificate->perfect_ordinal.has_value(),
           "criterion 4 recorded a perfect strategy; nothing to contradict");
  }

  // With one binary resource every strategy's counting marginals are among
  // the 81 x 81 output-table pairs below (wirings do not move marginals), and
  // all their denominators divide 2, hence are coprime to 3. Every single
  // pair must violate at least one of the four simulation conditions; with
  // criterion 4's zero-perfect result this certifies that no strategy
  // satisfies all four conditions while winning the congruence with
  // probability 1.
  for (int fa = 0; fa < 81 && outcome.pass; ++fa) {
    std::vector<int> alice_table(4);
    int rest = fa;
    for (int cell = 3; cell >= 0; --cell) {
      alice_table[cell] = rest % 3;
      rest /= 3;
    }
    const MarginalTable p_a = counting_marginal(alice_table, 2, 2, 3, Party::alice);
    for (const Rational& value : p_a.table) {
      expect(outcome, denominator(value) == 1 || denominator(value) == 2,
             "a counting marginal has a denominator not coprime to 3");
    }
    for (int fb = 0; fb < 81; ++fb) {
      std::vector<int> bob_table(4);
      rest = fb;
      for (int cell = 3; cell >= 0; --cell) {
        bob_table[cell] = rest % 3;
        rest /= 3;
      }
      const MarginalTable p_b = counting_marginal(bob_table, 2, 2, 3, Party::bob);
      const ConditionReport report = check_marginal_conditions(p_a, p_b, 3);
      expect(outcome, !report.all_satisfied(),
             "output tables " + std::to_string(fa) + "/" + std::to_string(fb) +
                 " satisfy all four conditions; the counting argument would fail");
      if (!outcome.pass) break;
    }
  }
  return outcome;
}

struct Criterion {
  int id;
  const char* label;
  double limit_seconds;  // 0 = no stated limit
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "exact mod-p construction and validation, p in {2,3,5,7,11}", 1.0, criterion_1_modp_constructors},
      {2, "deterministic CHSH maximum 3/4; the binary box reaches 1", 1.0, criterion_2_chsh_bounds},
      {3, "locality LP: nonlocal boxes rejected, 100 vertex mixtures certified", 30.0, criterion_3_locality_lp},
      {4, "one binary resource: all 104,976 strategies, zero perfect, best 7/8", 10.0, criterion_4_one_box_exhaustive},
      {5, "two binary resources, factorized: zero perfect, best 7/8, sampled cross-check", 600.0,
       criterion_5_two_box_pruned},
      {6, "divisibility precheck agrees with every completed search", 0.0, criterion_6_precheck_vs_search},
      {7, "uniform-marginal divisibility oracle vs brute force, products <= 64, p <= 13", 0.0,
       criterion_7_divisibility_oracle},
      {8, "coprime wiring composition is entrywise exact: (2,3),(3,5),(2,5),(3,7)", 30.0, criterion_8_crt_composition},
      {9, "every one-box marginal pair violates a simulation condition", 0.0, criterion_9_marginal_contradiction},
  };

  int passed = 0;
  for (const Criterion& criterion : criteria) {
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.pass && criterion.limit_seconds > 0 && seconds > criterion.limit_seconds) {
      outcome.pass = false;
      outcome.detail = "exceeded the " + std::to_string(criterion.limit_seconds) + " s budget";
    }

    std::ostringstream line;
    line << (outcome.pass ? "PASS" : "FAIL") << " criterion " << criterion.id << " [" << std::fixed;
    line.precision(2);
    line << seconds << " s";
    if (criterion.limit_seconds > 0) {
      line.precision(0);
      line << " / " << criterion.limit_seconds << " s";
    }
    line << "] " << criterion.label;
    if (!outcome.pass) line << " -- " << outcome.detail;
    std::cout << line.str() << std::endl;
    if (outcome.pass) ++passed;
  }

  std::cout << "acceptance: " << passed << "/" << criteria.size() << " criteria passed" << std::endl;
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
