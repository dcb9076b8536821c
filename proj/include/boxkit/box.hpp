#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "boxkit/rational.hpp"

namespace boxkit {

enum class Party { alice, bob };

inline const char* party_name(Party side) { return side == Party::alice ? "alice" : "bob"; }

/// One party's conditional output distribution p(output | input).
struct MarginalTable {
  Party side = Party::alice;
  int input_size = 0;
  int output_size = 0;
  std::vector<Rational> table;  // input-major: table[input * output_size + output]

  const Rational& at(int input, int output) const {
    return table[static_cast<std::size_t>(input) * output_size + output];
  }

  bool is_uniform() const {
    const Rational u(1, output_size);
    for (const Rational& p : table) {
      if (p != u) return false;
    }
    return true;
  }

  bool operator==(const MarginalTable&) const = default;
};

/// A bipartite conditional distribution p(a,b|x,y) over finite alphabets
/// {0..|X|-1} x {0..|Y|-1} -> {0..|A|-1} x {0..|B|-1}, stored dense.
///
/// Construction fixes the table; instances are immutable and safe to share
/// across concurrent readers. Structural shape is enforced here; the
/// distribution invariants (nonnegativity, normalization, no-signalling)
/// are checked separately by check_box_invariants so that defective tables
/// can still be loaded and diagnosed.
class BipartiteBox {
 public:
  BipartiteBox(int x_size, int y_size, int a_size, int b_size, std::vector<Rational> table)
      : x_size_(x_size), y_size_(y_size), a_size_(a_size), b_size_(b_size), table_(std::move(table)) {
    if (x_size_ < 1 || y_size_ < 1 || a_size_ < 1 || b_size_ < 1) {
      throw std::invalid_argument("box alphabet sizes must be positive");
    }
    const std::size_t expected = static_cast<std::size_t>(x_size_) * y_size_ * a_size_ * b_size_;
    if (table_.size() != expected) {
      throw std::invalid_argument("box table has " + std::to_string(table_.size()) + " entries, expected " +
                                  std::to_string(expected));
    }
  }

  int x_size() const { return x_size_; }
  int y_size() const { return y_size_; }
  int a_size() const { return a_size_; }
  int b_size() const { return b_size_; }

  std::size_t index(int x, int y, int a, int b) const {
    return ((static_cast<std::size_t>(x) * y_size_ + y) * a_size_ + a) * b_size_ + b;
  }

  const Rational& at(int x, int y, int a, int b) const { return table_[index(x, y, a, b)]; }

  const std::vector<Rational>& table() const { return table_; }

  bool operator==(const BipartiteBox&) const = default;

 private:
  int x_size_;
  int y_size_;
  int a_size_;
  int b_size_;
  std::vector<Rational> table_;
};

/// Builds a box by evaluating `entry(x, y, a, b)` over the full index range.
inline BipartiteBox make_box(int x_size, int y_size, int a_size, int b_size,
                             const std::function<Rational(int, int, int, int)>& entry) {
  std::vector<Rational> table;
  table.reserve(static_cast<std::size_t>(x_size) * y_size * a_size * b_size);
  for (int x = 0; x < x_size; ++x)
    for (int y = 0; y < y_size; ++y)
      for (int a = 0; a < a_size; ++a)
        for (int b = 0; b < b_size; ++b) table.push_back(entry(x, y, a, b));
  return BipartiteBox(x_size, y_size, a_size, b_size, std::move(table));
}

/// The mod-p nonlocal box: binary inputs, outputs in {0..p-1},
/// p(a,b|x,y) = 1/p when (b - a) mod p = x*y and 0 otherwise.
inline BipartiteBox make_modp_box(int p) {
  if (p < 2) throw std::invalid_argument("mod-p box requires p >= 2, got " + std::to_string(p));
  const Rational inv_p(1, p);
  return make_box(2, 2, p, p, [&](int x, int y, int a, int b) {
    const int residue = ((b - a) % p + p) % p;
    return residue == x * y ? inv_p : Rational(0);
  });
}

/// Deterministic local box: p(a,b|x,y) = 1 iff a = f_a(x) and b = f_b(y).
inline BipartiteBox make_local_deterministic_box(int x_size, int y_size, int a_size, int b_size,
                                                 const std::vector<int>& f_a, const std::vector<int>& f_b) {
  if (static_cast<int>(f_a.size()) != x_size || static_cast<int>(f_b.size()) != y_size) {
    throw std::invalid_argument("deterministic box: output functions must be total on the input alphabets");
  }
  for (int v : f_a) {
    if (v < 0 || v >= a_size) throw std::invalid_argument("deterministic box: f_a value out of alphabet range");
  }
  for (int v : f_b) {
    if (v < 0 || v >= b_size) throw std::invalid_argument("deterministic box: f_b value out of alphabet range");
  }
  return make_box(x_size, y_size, a_size, b_size, [&](int x, int y, int a, int b) {
    return (a == f_a[x] && b == f_b[y]) ? Rational(1) : Rational(0);
  });
}

struct EntryIndex {
  int x = 0, y = 0, a = 0, b = 0;
};

struct NormalizationWitness {
  int x = 0, y = 0;
  Rational sum;
};

/// Witness of a no-signalling violation: the receiver's marginal
/// p(receiver_output | receiver_input) differs between the two sender inputs.
struct SignallingWitness {
  int receiver_input = 0;
  int receiver_output = 0;
  int sender_input_one = 0;
  int sender_input_two = 0;
};

struct ValidationReport {
  bool nonnegative = true;
  std::optional<EntryIndex> negative_entry;

  bool normalized = true;
  std::optional<NormalizationWitness> abnormal_input;

  bool no_signalling_alice_to_bob = true;  // Bob's marginal must not depend on x
  std::optional<SignallingWitness> alice_to_bob_witness;

  bool no_signalling_bob_to_alice = true;  // Alice's marginal must not depend on y
  std::optional<SignallingWitness> bob_to_alice_witness;

  bool ok() const {
    return nonnegative && normalized && no_signalling_alice_to_bob && no_signalling_bob_to_alice;
  }
};

/// Checks every distribution invariant, recording the first violating index per check.
inline ValidationReport check_box_invariants(const BipartiteBox& box) {
  ValidationReport report;

  for (int x = 0; x < box.x_size() && report.nonnegative; ++x)
    for (int y = 0; y < box.y_size() && report.nonnegative; ++y)
      for (int a = 0; a < box.a_size() && report.nonnegative; ++a)
        for (int b = 0; b < box.b_size() && report.nonnegative; ++b)
          if (box.at(x, y, a, b) < 0) {
            report.nonnegative = false;
            report.negative_entry = EntryIndex{x, y, a, b};
          }

  for (int x = 0; x < box.x_size() && report.normalized; ++x)
    for (int y = 0; y < box.y_size() && report.normalized; ++y) {
      Rational sum(0);
      for (int a = 0; a < box.a_size(); ++a)
        for (int b = 0; b < box.b_size(); ++b) sum += box.at(x, y, a, b);
      if (sum != 1) {
        report.normalized = false;
        report.abnormal_input = NormalizationWitness{x, y, sum};
      }
    }

  // Bob's marginal for fixed (y, b) must be identical across all x.
  for (int y = 0; y < box.y_size() && report.no_signalling_alice_to_bob; ++y)
    for (int b = 0; b < box.b_size() && report.no_signalling_alice_to_bob; ++b) {
      Rational reference(0);
      for (int a = 0; a < box.a_size(); ++a) reference += box.at(0, y, a, b);
      for (int x = 1; x < box.x_size(); ++x) {
        Rational sum(0);
        for (int a = 0; a < box.a_size(); ++a) sum += box.at(x, y, a, b);
        if (sum != reference) {
          report.no_signalling_alice_to_bob = false;
          report.alice_to_bob_witness = SignallingWitness{y, b, 0, x};
          break;
        }
      }
    }

  for (int x = 0; x < box.x_size() && report.no_signalling_bob_to_alice; ++x)
    for (int a = 0; a < box.a_size() && report.no_signalling_bob_to_alice; ++a) {
      Rational reference(0);
      for (int b = 0; b < box.b_size(); ++b) reference += box.at(x, 0, a, b);
      for (int y = 1; y < box.y_size(); ++y) {
        Rational sum(0);
        for (int b = 0; b < box.b_size(); ++b) sum += box.at(x, y, a, b);
        if (sum != reference) {
          report.no_signalling_bob_to_alice = false;
          report.bob_to_alice_witness = SignallingWitness{x, a, 0, y};
          break;
        }
      }
    }

  return report;
}

/// Extracts p_A(a|x) and p_B(b|y). Well-defined only for no-signalling boxes;
/// a signalling table is rejected with the violated direction named.
inline std::pair<MarginalTable, MarginalTable> marginals_of_box(const BipartiteBox& box) {
  const ValidationReport report = check_box_invariants(box);
  if (!report.no_signalling_bob_to_alice) {
    const auto& w = *report.bob_to_alice_witness;
    throw std::runtime_error("box signals from Bob to Alice: p_A(" + std::to_string(w.receiver_output) + "|" +
                             std::to_string(w.receiver_input) + ") differs between y=" +
                             std::to_string(w.sender_input_one) + " and y=" + std::to_string(w.sender_input_two));
  }
  if (!report.no_signalling_alice_to_bob) {
    const auto& w = *report.alice_to_bob_witness;
    throw std::runtime_error("box signals from Alice to Bob: p_B(" + std::to_string(w.receiver_output) + "|" +
                             std::to_string(w.receiver_input) + ") differs between x=" +
                             std::to_string(w.sender_input_one) + " and x=" + std::to_string(w.sender_input_two));
  }

  MarginalTable alice{Party::alice, box.x_size(), box.a_size(), {}};
  alice.table.resize(static_cast<std::size_t>(box.x_size()) * box.a_size(), Rational(0));
  for (int x = 0; x < box.x_size(); ++x)
    for (int a = 0; a < box.a_size(); ++a) {
      Rational sum(0);
      for (int b = 0; b < box.b_size(); ++b) sum += box.at(x, 0, a, b);
      alice.table[static_cast<std::size_t>(x) * box.a_size() + a] = sum;
    }

  MarginalTable bob{Party::bob, box.y_size(), box.b_size(), {}};
  bob.table.resize(static_cast<std::size_t>(box.y_size()) * box.b_size(), Rational(0));
  for (int y = 0; y < box.y_size(); ++y)
    for (int b = 0; b < box.b_size(); ++b) {
      Rational sum(0);
      for (int a = 0; a < box.a_size(); ++a) sum += box.at(0, y, a, b);
      bob.table[static_cast<std::size_t>(y) * box.b_size() + b] = sum;
    }

  return {std::move(alice), std::move(bob)};
}

/// True iff every marginal entry equals 1/|A| (Alice) resp. 1/|B| (Bob).
inline bool is_uniform_output_box(const BipartiteBox& box) {
  const auto [alice, bob] = marginals_of_box(box);
  return alice.is_uniform() && bob.is_uniform();
}

/// Entrywise convex combination of boxes with identical alphabets.
inline BipartiteBox convex_mixture(const std::vector<BipartiteBox>& boxes, const std::vector<Rational>& weights) {
  if (boxes.empty() || boxes.size() != weights.size()) {
    throw std::invalid_argument("mixture requires one weight per box");
  }
  Rational total(0);
  for (const Rational& w : weights) {
    if (w < 0) throw std::invalid_argument("mixture weights must be nonnegative");
    total += w;
  }
  if (total != 1) throw std::invalid_argument("mixture weights must sum to 1 exactly");

  const BipartiteBox& first = boxes.front();
  for (const BipartiteBox& box : boxes) {
    if (box.x_size() != first.x_size() || box.y_size() != first.y_size() || box.a_size() != first.a_size() ||
        box.b_size() != first.b_size()) {
      throw std::invalid_argument("mixture requires identical alphabets");
    }
  }

  std::vector<Rational> table(first.table().size(), Rational(0));
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (weights[i] == 0) continue;
    const auto& entries = boxes[i].table();
    for (std::size_t k = 0; k < table.size(); ++k) table[k] += weights[i] * entries[k];
  }
  return BipartiteBox(first.x_size(), first.y_size(), first.a_size(), first.b_size(), std::move(table));
}

}  // namespace boxkit
