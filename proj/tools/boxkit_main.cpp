// boxkit -- exact tools for bipartite no-signalling boxes: construction,
// validation, locality testing, wiring composition, and exhaustive
// impossibility searches. All probabilities are exact rationals end to end.
//
// Exit codes: 0 pass/completed, 1 negative verdict, 2 input error,
// 3 resource cap exceeded.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boxkit/boxkit.hpp"

namespace {

using namespace boxkit;

constexpr int exit_pass = 0;
constexpr int exit_negative = 1;
constexpr int exit_input_error = 2;
constexpr int exit_cap = 3;

long long parse_integer(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed " + what + ": '" + text + "'");
  }
  if (used != text.size()) throw std::invalid_argument("malformed " + what + ": '" + text + "'");
  return value;
}

BipartiteBox parse_box_spec(const std::string& token) {
  if (token.rfind("modp", 0) == 0 && token.size() > 4) {
    return make_modp_box(static_cast<int>(parse_integer(token.substr(4), "modulus")));
  }
  if (token.rfind("file:", 0) == 0) return load_box_file(token.substr(5));
  throw std::invalid_argument("malformed box spec '" + token + "': expected modpK or file:PATH");
}

BipartiteBox parse_target_spec(const std::vector<std::string>& tokens) {
  if (tokens.size() == 2 && tokens[0] == "modp") {
    return make_modp_box(static_cast<int>(parse_integer(tokens[1], "modulus")));
  }
  if (tokens.size() == 1) return parse_box_spec(tokens[0]);
  throw std::invalid_argument("malformed target spec: expected 'modp P', 'modpP', or 'file:PATH'");
}

ResourceSet parse_resource_list(const std::string& list) {
  ResourceSet resources;
  if (list.empty()) return resources;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = list.find(',', start);
    const std::string token = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (token.empty()) throw std::invalid_argument("malformed resource list: empty entry");
    resources.boxes.push_back(parse_box_spec(token));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return resources;
}

std::size_t search_cap_default() {
  if (const char* env = std::getenv("BOXKIT_CAP")) {
    const long long value = parse_integer(env, "BOXKIT_CAP value");
    if (value < 1) throw std::invalid_argument("BOXKIT_CAP must be a positive integer");
    return static_cast<std::size_t>(value);
  }
  return default_search_cap;
}

void emit(const Json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    save_json_file(out_path, j);
  }
}

// ---- reports ----

Json entry_to_json(const EntryIndex& e) { return Json{{"x", e.x}, {"y", e.y}, {"a", e.a}, {"b", e.b}}; }

Json validation_report_to_json(const ValidationReport& report) {
  Json j{{"nonnegative", report.nonnegative},
         {"normalized", report.normalized},
         {"no_signalling_alice_to_bob", report.no_signalling_alice_to_bob},
         {"no_signalling_bob_to_alice", report.no_signalling_bob_to_alice},
         {"ok", report.ok()}};
  if (report.negative_entry) j["negative_entry"] = entry_to_json(*report.negative_entry);
  if (report.abnormal_input) {
    j["abnormal_input"] = Json{{"x", report.abnormal_input->x},
                               {"y", report.abnormal_input->y},
                               {"sum", to_fraction_string(report.abnormal_input->sum)}};
  }
  const auto witness_json = [](const SignallingWitness& w) {
    return Json{{"receiver_input", w.receiver_input},
                {"receiver_output", w.receiver_output},
                {"sender_input_one", w.sender_input_one},
                {"sender_input_two", w.sender_input_two}};
  };
  if (report.alice_to_bob_witness) j["alice_to_bob_witness"] = witness_json(*report.alice_to_bob_witness);
  if (report.bob_to_alice_witness) j["bob_to_alice_witness"] = witness_json(*report.bob_to_alice_witness);
  return j;
}

void print_validation_report(const ValidationReport& report) {
  std::cout << "nonnegativity: " << (report.nonnegative ? "pass" : "FAIL") << '\n';
  if (report.negative_entry) {
    const auto& e = *report.negative_entry;
    std::cout << "  negative entry at (x=" << e.x << ", y=" << e.y << ", a=" << e.a << ", b=" << e.b << ")\n";
  }
  std::cout << "normalization: " << (report.normalized ? "pass" : "FAIL") << '\n';
  if (report.abnormal_input) {
    std::cout << "  entries for input (x=" << report.abnormal_input->x << ", y=" << report.abnormal_input->y
              << ") sum to " << to_fraction_string(report.abnormal_input->sum) << '\n';
  }
  const auto print_witness = [](const char* label, const SignallingWitness& w, const char* sender) {
    std::cout << "  " << label << ": marginal at (input=" << w.receiver_input << ", output=" << w.receiver_output
              << ") changes when " << sender << "'s input moves " << w.sender_input_one << " -> " << w.sender_input_two
              << '\n';
  };
  std::cout << "no-signalling Alice->Bob: " << (report.no_signalling_alice_to_bob ? "pass" : "FAIL") << '\n';
  if (report.alice_to_bob_witness) print_witness("witness", *report.alice_to_bob_witness, "Alice");
  std::cout << "no-signalling Bob->Alice: " << (report.no_signalling_bob_to_alice ? "pass" : "FAIL") << '\n';
  if (report.bob_to_alice_witness) print_witness("witness", *report.bob_to_alice_witness, "Bob");
}

Json marginal_to_json(const MarginalTable& marginal) {
  Json rows = Json::array();
  for (int input = 0; input < marginal.input_size; ++input) {
    Json row = Json::array();
    for (int out = 0; out < marginal.output_size; ++out) row.push_back(to_fraction_string(marginal.at(input, out)));
    rows.push_back(std::move(row));
  }
  return rows;
}

void print_metrics(const FidelityMetrics& metrics) {
  std::cout << "equation success: avg " << to_fraction_string(metrics.equation_success_avg) << ", worst "
            << to_fraction_string(metrics.equation_success_worst) << '\n'
            << "tv distance to target: " << to_fraction_string(metrics.tv_distance_to_target) << '\n';
}

// ---- subcommand runners ----

int run_box(const BipartiteBox& box, bool validate, const std::string& out_path) {
  emit(box_to_json(box), out_path);
  if (!validate) return exit_pass;
  const ValidationReport report = check_box_invariants(box);
  print_validation_report(report);
  if (!report.ok()) return exit_negative;
  std::cout << "uniform outputs: " << (is_uniform_output_box(box) ? "yes" : "no") << '\n';
  return exit_pass;
}

int run_check_nosignal(const BipartiteBox& box, bool json_mode) {
  const ValidationReport report = check_box_invariants(box);
  if (json_mode) {
    std::cout << validation_report_to_json(report).dump(2) << '\n';
  } else {
    print_validation_report(report);
  }
  return report.ok() ? exit_pass : exit_negative;
}

int run_check_local(const BipartiteBox& box, bool json_mode, std::size_t vertex_cap) {
  const LocalityVerdict verdict = is_local(box, vertex_cap);
  if (json_mode) {
    Json decomposition = Json::array();
    for (const auto& [vertex_id, weight] : verdict.decomposition) {
      decomposition.push_back(Json{{"vertex_id", vertex_id}, {"weight", to_fraction_string(weight)}});
    }
    std::cout << Json{{"is_local", verdict.is_local},
                      {"decomposition", std::move(decomposition)},
                      {"separating_report", verdict.separating_report}}
                     .dump(2)
              << '\n';
  } else if (verdict.is_local) {
    std::cout << "local: convex combination of " << verdict.decomposition.size() << " deterministic vertices\n";
    for (const auto& [vertex_id, weight] : verdict.decomposition) {
      std::cout << "  vertex " << vertex_id << " weight " << to_fraction_string(weight) << '\n';
    }
  } else {
    std::cout << "nonlocal: " << verdict.separating_report << '\n';
  }
  return verdict.is_local ? exit_pass : exit_negative;
}

int run_check_uniform(const BipartiteBox& box, bool json_mode) {
  if (!check_box_invariants(box).ok()) {
    throw std::invalid_argument("box violates distribution invariants; run 'check nosignal' for the report");
  }
  const bool uniform = is_uniform_output_box(box);
  const auto [alice, bob] = marginals_of_box(box);
  if (json_mode) {
    std::cout << Json{{"uniform", uniform}, {"alice_marginal", marginal_to_json(alice)},
                      {"bob_marginal", marginal_to_json(bob)}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << "uniform outputs: " << (uniform ? "yes" : "no") << '\n';
  }
  return uniform ? exit_pass : exit_negative;
}

int run_check_chsh(const BipartiteBox& box, bool json_mode) {
  const Rational value = chsh_success_probability(box);
  if (json_mode) {
    std::cout << Json{{"chsh_success_probability", to_fraction_string(value)}}.dump(2) << '\n';
  } else {
    std::cout << to_fraction_string(value) << '\n';
  }
  return exit_pass;
}

int run_search(const BipartiteBox& target, const ResourceSet& resources, const SearchOptions& options,
               bool precheck_only, bool json_mode, const std::string& out_path) {
  if (precheck_only) {
    const int p = target.a_size();
    const bool impossible = impossibility_precheck(p, resources);
    Int alice_product(1), bob_product(1);
    for (const auto& box : resources.boxes) {
      alice_product *= box.a_size();
      bob_product *= box.b_size();
    }
    if (json_mode) {
      std::cout << Json{{"precheck_impossible", impossible},
                        {"p", p},
                        {"alice_output_product", alice_product.str()},
                        {"bob_output_product", bob_product.str()}}
                       .dump(2)
                << '\n';
    } else if (impossible) {
      std::cout << "provably impossible (divisibility): the products of the resources' output sizes (A-side "
                << alice_product.str() << ", B-side " << bob_product.str() << ") share no factor with p = " << p
                << ", so no strategy can make the marginals uniform\n";
    } else {
      std::cout << "precheck inconclusive: p = " << p << " divides an output-size product; enumeration required\n";
    }
    return impossible ? exit_pass : exit_negative;
  }

  const SearchCertificate cert = exhaustive_search(target, resources, options);
  if (!out_path.empty()) save_json_file(out_path, certificate_to_json(cert));
  if (json_mode) {
    std::cout << certificate_to_json(cert).dump(2) << '\n';
    return exit_pass;
  }

  std::cout << "space size: " << cert.space_size.str() << '\n'
            << "visited: " << cert.visited.str() << '\n'
            << "pruned: " << cert.pruned_count.str() << " (method: " << cert.method << ")\n";
  if (cert.precheck_impossible) {
    std::cout << "divisibility precheck: " << (*cert.precheck_impossible ? "impossible" : "inconclusive") << '\n';
  }
  std::cout << "perfect: " << (cert.perfect_strategy ? "YES" : "NO") << '\n';
  if (cert.perfect_ordinal) std::cout << "perfect ordinal: " << cert.perfect_ordinal->str() << '\n';
  if (cert.best_metrics) {
    std::cout << "best ordinal: " << cert.best_ordinal->str() << '\n'
              << "best equation success: avg " << to_fraction_string(cert.best_metrics->equation_success_avg)
              << ", worst " << to_fraction_string(cert.best_metrics->equation_success_worst) << '\n'
              << "best tv distance: " << to_fraction_string(cert.best_metrics->tv_distance_to_target) << '\n';
  } else if (cert.method == "divisibility") {
    std::cout << "provably impossible (divisibility): the products of the resources' output sizes share no factor "
                 "with p = "
              << target.a_size() << "; space too large to enumerate under the cap\n";
  }
  return exit_pass;
}

int run_compose(int p, int q, const std::string& out_path, bool json_mode) {
  const auto [strategy, resources] = compose_crt(p, q);
  const BipartiteBox composed = induced_box(strategy, resources);
  const BipartiteBox expected = make_modp_box(p * q);
  if (composed != expected) throw std::logic_error("composed box disagrees with the direct mod-pq construction");

  const std::string verification =
      "verified exact: composed box equals the mod-" + std::to_string(p * q) + " box entrywise";
  if (!out_path.empty()) {
    save_box_file(out_path, composed);
    std::cout << verification << '\n';
  } else if (json_mode) {
    std::cout << Json{{"box", box_to_json(composed)}, {"strategy", strategy_to_json(strategy)},
                      {"verified_exact", true}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << box_to_json(composed).dump(2) << '\n';
    std::cerr << verification << '\n';
  }
  return exit_pass;
}

int run_replay(const std::string& strategy_path, const ResourceSet& resources, const BipartiteBox& target,
               bool json_mode) {
  const Json j = load_json_file(strategy_path);
  WiringStrategy strategy = [&] {
    if (j.contains("alice_output")) return strategy_from_json(j);
    if (j.contains("best_strategy") || j.contains("perfect_strategy")) {
      const SearchCertificate cert = certificate_from_json(j);
      if (cert.perfect_strategy) return *cert.perfect_strategy;
      if (cert.best_strategy) return *cert.best_strategy;
      throw std::invalid_argument(strategy_path + ": certificate carries no strategy to replay");
    }
    throw std::invalid_argument(strategy_path + ": neither a strategy file nor a certificate with a strategy");
  }();

  const FidelityMetrics metrics = evaluate_strategy(strategy, resources, target);
  if (json_mode) {
    std::cout << metrics_to_json(metrics).dump(2) << '\n';
  } else {
    print_metrics(metrics);
    std::cout << "perfect reproduction: " << (metrics.tv_distance_to_target == 0 ? "YES" : "NO") << '\n';
  }
  return exit_pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact tools for bipartite no-signalling boxes"};
  app.require_subcommand(1);

  // box
  auto* box_cmd = app.add_subcommand("box", "construct a box or load one from a file");
  box_cmd->require_subcommand(1);
  int box_p = 0;
  std::string box_path, box_out;
  bool box_validate = false;
  auto* box_modp = box_cmd->add_subcommand("modp", "the box with b - a = xy (mod p), uniform over solutions");
  box_modp->add_option("p", box_p, "modulus, p >= 2")->required();
  auto* box_local_det = box_cmd->add_subcommand("local-det", "deterministic local box from an f_a/f_b spec file");
  box_local_det->add_option("spec", box_path, "JSON file with x_size, y_size, a_size, b_size, f_a, f_b")->required();
  auto* box_from_file = box_cmd->add_subcommand("from-file", "re-emit a box file (structural parse)");
  box_from_file->add_option("path", box_path, "box JSON file")->required();
  for (auto* sub : {box_modp, box_local_det, box_from_file}) {
    sub->add_option("--out", box_out, "write the box here instead of stdout");
    sub->add_flag("--validate", box_validate, "run the distribution invariants and the uniform-output check");
  }

  // check
  auto* check_cmd = app.add_subcommand("check", "validate or measure a box file");
  check_cmd->require_subcommand(1);
  std::string check_path;
  bool check_json = false;
  std::size_t vertex_cap = default_vertex_cap;
  auto* check_nosignal = check_cmd->add_subcommand("nosignal", "distribution and no-signalling invariants");
  auto* check_local = check_cmd->add_subcommand("local", "membership in the local polytope (exact LP)");
  check_local->add_option("--cap", vertex_cap, "largest vertex count to enumerate");
  auto* check_uniform = check_cmd->add_subcommand("uniform", "are both parties' outputs uniformly distributed?");
  auto* check_chsh = check_cmd->add_subcommand("chsh", "success probability at the CHSH game (binary alphabets)");
  for (auto* sub : {check_nosignal, check_local, check_uniform, check_chsh}) {
    sub->add_option("path", check_path, "box JSON file")->required();
    sub->add_flag("--json", check_json, "emit the report as JSON");
  }

  // search
  auto* search_cmd = app.add_subcommand("search", "exhaustive strategy search against a target box");
  std::vector<std::string> target_tokens;
  std::string resource_list, search_out, mode_name = "equation";
  bool adaptive = false, no_prune = false, precheck_only = false, search_json = false;
  unsigned workers = 0;
  std::size_t search_cap = 0;
  search_cmd->add_option("--target", target_tokens, "target box: 'modp P', 'modpP', or 'file:PATH'")
      ->required()
      ->expected(1, 2);
  search_cmd->add_option("--resources", resource_list, "comma-separated resource boxes: modpK or file:PATH");
  search_cmd->add_option("--mode", mode_name, "equation: score Pr[(b-a) mod p = xy]; exact: also match the table")
      ->check(CLI::IsMember({"equation", "exact"}));
  search_cmd->add_flag("--adaptive", adaptive, "box inputs may depend on earlier outputs on the same side");
  search_cmd->add_flag("--no-prune", no_prune, "plain enumeration, no best-response factorization");
  auto* cap_opt = search_cmd->add_option("--cap", search_cap, "largest number of evaluations to allow");
  search_cmd->add_option("--workers", workers, "parallel workers (default: logical cores)");
  search_cmd->add_flag("--precheck-only", precheck_only, "only the divisibility impossibility precheck, no search");
  search_cmd->add_option("--out", search_out, "write the certificate JSON here");
  search_cmd->add_flag("--json", search_json, "print the certificate as JSON");

  // compose
  auto* compose_cmd = app.add_subcommand("compose", "wire mod-p and mod-q boxes into the mod-pq box (coprime p,q)");
  int compose_p = 0, compose_q = 0;
  std::string compose_out;
  bool compose_json = false;
  compose_cmd->add_option("p", compose_p, "first modulus")->required();
  compose_cmd->add_option("q", compose_q, "second modulus (coprime to p)")->required();
  compose_cmd->add_option("--out", compose_out, "write the composed box here");
  compose_cmd->add_flag("--json", compose_json, "emit box, strategy, and verification as JSON");

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "re-evaluate a stored strategy against a target");
  std::string replay_strategy, replay_resources;
  std::vector<std::string> replay_target;
  bool replay_json = false;
  replay_cmd->add_option("--strategy", replay_strategy, "strategy JSON, or a certificate carrying one")->required();
  replay_cmd->add_option("--resources", replay_resources, "comma-separated resource boxes: modpK or file:PATH");
  replay_cmd->add_option("--target", replay_target, "target box: 'modp P', 'modpP', or 'file:PATH'")
      ->required()
      ->expected(1, 2);
  replay_cmd->add_flag("--json", replay_json, "emit the metrics as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_pass : exit_input_error;
  }

  try {
    if (box_modp->parsed()) return run_box(make_modp_box(box_p), box_validate, box_out);
    if (box_local_det->parsed()) {
      return run_box(local_det_box_from_json(load_json_file(box_path)), box_validate, box_out);
    }
    if (box_from_file->parsed()) return run_box(load_box_file(box_path), box_validate, box_out);

    if (check_nosignal->parsed()) return run_check_nosignal(load_box_file(check_path), check_json);
    if (check_local->parsed()) return run_check_local(load_box_file(check_path), check_json, vertex_cap);
    if (check_uniform->parsed()) return run_check_uniform(load_box_file(check_path), check_json);
    if (check_chsh->parsed()) return run_check_chsh(load_box_file(check_path), check_json);

    if (search_cmd->parsed()) {
      SearchOptions options;
      options.mode = mode_name == "exact" ? SearchMode::exact_box : SearchMode::equation_only;
      options.adaptive = adaptive;
      options.prune = !no_prune;
      options.cap = cap_opt->count() > 0 ? search_cap : search_cap_default();
      options.workers = workers;
      return run_search(parse_target_spec(target_tokens), parse_resource_list(resource_list), options, precheck_only,
                        search_json, search_out);
    }

    if (compose_cmd->parsed()) return run_compose(compose_p, compose_q, compose_out, compose_json);

    if (replay_cmd->parsed()) {
      return run_replay(replay_strategy, parse_resource_list(replay_resources), parse_target_spec(replay_target),
                        replay_json);
    }
  } catch (const cap_exceeded_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_cap;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_input_error;
  }
  return exit_input_error;
}
