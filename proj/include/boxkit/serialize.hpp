#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "boxkit/box.hpp"
#include "boxkit/search.hpp"
#include "boxkit/wiring.hpp"

namespace boxkit {

using Json = nlohmann::json;

namespace detail {

inline const Json& require_field(const Json& j, const char* name) {
  if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
  const auto it = j.find(name);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + name + "'");
  return *it;
}

inline void require_format(const Json& j) {
  const Json& f = require_field(j, "format");
  if (!f.is_number_integer() || f.get<long long>() != 1) {
    throw std::invalid_argument("field 'format' must be the integer 1");
  }
}

inline int require_size(const Json& j, const char* name) {
  const Json& f = require_field(j, name);
  if (!f.is_number_integer() || f.get<long long>() < 1 || f.get<long long>() > 1'000'000) {
    throw std::invalid_argument(std::string("field '") + name + "' must be a positive integer");
  }
  return static_cast<int>(f.get<long long>());
}

inline bool require_bool(const Json& j, const char* name) {
  const Json& f = require_field(j, name);
  if (!f.is_boolean()) throw std::invalid_argument(std::string("field '") + name + "' must be a boolean");
  return f.get<bool>();
}

inline std::string require_string(const Json& j, const char* name) {
  const Json& f = require_field(j, name);
  if (!f.is_string()) throw std::invalid_argument(std::string("field '") + name + "' must be a string");
  return f.get<std::string>();
}

inline Int int_from_json(const Json& j, const char* name) { return Int(require_string(j, name)); }

inline std::vector<int> int_array_from_json(const Json& f, const std::string& label) {
  if (!f.is_array()) throw std::invalid_argument("field '" + label + "' must be an array");
  std::vector<int> values;
  values.reserve(f.size());
  for (const Json& v : f) {
    if (!v.is_number_integer()) throw std::invalid_argument("field '" + label + "' must hold integers");
    values.push_back(static_cast<int>(v.get<long long>()));
  }
  return values;
}

}  // namespace detail

inline Json box_to_json(const BipartiteBox& box) {
  Json table = Json::array();
  for (int x = 0; x < box.x_size(); ++x) {
    Json per_x = Json::array();
    for (int y = 0; y < box.y_size(); ++y) {
      Json per_y = Json::array();
      for (int a = 0; a < box.a_size(); ++a) {
        Json per_a = Json::array();
        for (int b = 0; b < box.b_size(); ++b) per_a.push_back(to_fraction_string(box.at(x, y, a, b)));
        per_y.push_back(std::move(per_a));
      }
      per_x.push_back(std::move(per_y));
    }
    table.push_back(std::move(per_x));
  }
  return Json{{"format", 1},
              {"x_size", box.x_size()},
              {"y_size", box.y_size()},
              {"a_size", box.a_size()},
              {"b_size", box.b_size()},
              {"table", std::move(table)}};
}

/// Structural parse only: shapes and fraction syntax are enforced here, the
/// probabilistic invariants belong to check_box_invariants (files violating
/// them must stay loadable so the validators have something to report on).
inline BipartiteBox box_from_json(const Json& j) {
  detail::require_format(j);
  const int x_size = detail::require_size(j, "x_size");
  const int y_size = detail::require_size(j, "y_size");
  const int a_size = detail::require_size(j, "a_size");
  const int b_size = detail::require_size(j, "b_size");

  const Json& table = detail::require_field(j, "table");
  std::vector<Rational> entries;
  entries.reserve(static_cast<std::size_t>(x_size) * y_size * a_size * b_size);
  if (!table.is_array() || table.size() != static_cast<std::size_t>(x_size)) {
    throw std::invalid_argument("field 'table' must be an array of length x_size");
  }
  for (int x = 0; x < x_size; ++x) {
    const Json& per_x = table[x];
    if (!per_x.is_array() || per_x.size() != static_cast<std::size_t>(y_size)) {
      throw std::invalid_argument("table[" + std::to_string(x) + "] must be an array of length y_size");
    }
    for (int y = 0; y < y_size; ++y) {
      const Json& per_y = per_x[y];
      if (!per_y.is_array() || per_y.size() != static_cast<std::size_t>(a_size)) {
        throw std::invalid_argument("table[" + std::to_string(x) + "][" + std::to_string(y) +
                                    "] must be an array of length a_size");
      }
      for (int a = 0; a < a_size; ++a) {
        const Json& per_a = per_y[a];
        if (!per_a.is_array() || per_a.size() != static_cast<std::size_t>(b_size)) {
          throw std::invalid_argument("table[" + std::to_string(x) + "][" + std::to_string(y) + "][" +
                                      std::to_string(a) + "] must be an array of length b_size");
        }
        for (int b = 0; b < b_size; ++b) {
          const Json& cell = per_a[b];
          if (!cell.is_string()) {
            throw std::invalid_argument("table[" + std::to_string(x) + "][" + std::to_string(y) + "][" +
                                        std::to_string(a) + "][" + std::to_string(b) +
                                        "] must be a \"num/den\" string");
          }
          entries.push_back(parse_fraction(cell.get<std::string>()));
        }
      }
    }
  }
  return BipartiteBox(x_size, y_size, a_size, b_size, std::move(entries));
}

inline Json strategy_to_json(const WiringStrategy& strategy) {
  Json alice_tables = Json::array(), bob_tables = Json::array();
  for (const auto& t : strategy.alice_box_inputs) alice_tables.push_back(t);
  for (const auto& t : strategy.bob_box_inputs) bob_tables.push_back(t);
  return Json{{"format", 1},
              {"x_size", strategy.x_size},
              {"y_size", strategy.y_size},
              {"a_size", strategy.a_size},
              {"b_size", strategy.b_size},
              {"adaptive", strategy.adaptive},
              {"alice_box_inputs", std::move(alice_tables)},
              {"bob_box_inputs", std::move(bob_tables)},
              {"alice_output", strategy.alice_output},
              {"bob_output", strategy.bob_output}};
}

inline WiringStrategy strategy_from_json(const Json& j) {
  detail::require_format(j);
  WiringStrategy strategy;
  strategy.x_size = detail::require_size(j, "x_size");
  strategy.y_size = detail::require_size(j, "y_size");
  strategy.a_size = detail::require_size(j, "a_size");
  strategy.b_size = detail::require_size(j, "b_size");
  strategy.adaptive = detail::require_bool(j, "adaptive");

  const auto read_tables = [&](const char* name) {
    const Json& f = detail::require_field(j, name);
    if (!f.is_array()) throw std::invalid_argument(std::string("field '") + name + "' must be an array of arrays");
    std::vector<std::vector<int>> tables;
    tables.reserve(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      tables.push_back(detail::int_array_from_json(f[i], std::string(name) + "[" + std::to_string(i) + "]"));
    }
    return tables;
  };
  strategy.alice_box_inputs = read_tables("alice_box_inputs");
  strategy.bob_box_inputs = read_tables("bob_box_inputs");
  strategy.alice_output = detail::int_array_from_json(detail::require_field(j, "alice_output"), "alice_output");
  strategy.bob_output = detail::int_array_from_json(detail::require_field(j, "bob_output"), "bob_output");
  return strategy;
}

inline Json metrics_to_json(const FidelityMetrics& metrics) {
  return Json{{"equation_success_avg", to_fraction_string(metrics.equation_success_avg)},
              {"equation_success_worst", to_fraction_string(metrics.equation_success_worst)},
              {"tv_distance_to_target", to_fraction_string(metrics.tv_distance_to_target)}};
}

inline FidelityMetrics metrics_from_json(const Json& j) {
  return FidelityMetrics{parse_fraction(detail::require_string(j, "equation_success_avg")),
                         parse_fraction(detail::require_string(j, "equation_success_worst")),
                         parse_fraction(detail::require_string(j, "tv_distance_to_target"))};
}

inline Json certificate_to_json(const SearchCertificate& cert) {
  Json resources = Json::array();
  for (const auto& box : cert.resources.boxes) resources.push_back(box_to_json(box));
  Json j{{"format", 1},
         {"target", box_to_json(cert.target)},
         {"resources", std::move(resources)},
         {"mode", search_mode_name(cert.mode)},
         {"adaptive", cert.adaptive},
         {"prune", cert.prune},
         {"method", cert.method},
         {"enumeration_order", cert.enumeration_order},
         {"space_size", cert.space_size.str()},
         {"visited", cert.visited.str()},
         {"pruned_count", cert.pruned_count.str()}};
  if (cert.precheck_impossible) j["precheck_impossible"] = *cert.precheck_impossible;
  if (cert.perfect_ordinal) j["perfect_ordinal"] = cert.perfect_ordinal->str();
  if (cert.perfect_strategy) j["perfect_strategy"] = strategy_to_json(*cert.perfect_strategy);
  if (cert.best_ordinal) j["best_ordinal"] = cert.best_ordinal->str();
  if (cert.best_strategy) j["best_strategy"] = strategy_to_json(*cert.best_strategy);
  if (cert.best_metrics) j["best_metrics"] = metrics_to_json(*cert.best_metrics);
  return j;
}

inline SearchCertificate certificate_from_json(const Json& j) {
  detail::require_format(j);
  const Json& resources_json = detail::require_field(j, "resources");
  if (!resources_json.is_array()) throw std::invalid_argument("field 'resources' must be an array");
  ResourceSet resources;
  for (const Json& r : resources_json) resources.boxes.push_back(box_from_json(r));

  SearchCertificate cert{box_from_json(detail::require_field(j, "target")), std::move(resources)};
  const std::string mode = detail::require_string(j, "mode");
  if (mode == "equation") {
    cert.mode = SearchMode::equation_only;
  } else if (mode == "exact") {
    cert.mode = SearchMode::exact_box;
  } else {
    throw std::invalid_argument("field 'mode' must be \"equation\" or \"exact\"");
  }
  cert.adaptive = detail::require_bool(j, "adaptive");
  cert.prune = detail::require_bool(j, "prune");
  cert.method = detail::require_string(j, "method");
  cert.enumeration_order = detail::require_string(j, "enumeration_order");
  cert.space_size = detail::int_from_json(j, "space_size");
  cert.visited = detail::int_from_json(j, "visited");
  cert.pruned_count = detail::int_from_json(j, "pruned_count");
  if (j.contains("precheck_impossible")) cert.precheck_impossible = detail::require_bool(j, "precheck_impossible");
  if (j.contains("perfect_ordinal")) cert.perfect_ordinal = detail::int_from_json(j, "perfect_ordinal");
  if (j.contains("perfect_strategy")) cert.perfect_strategy = strategy_from_json(j["perfect_strategy"]);
  if (j.contains("best_ordinal")) cert.best_ordinal = detail::int_from_json(j, "best_ordinal");
  if (j.contains("best_strategy")) cert.best_strategy = strategy_from_json(j["best_strategy"]);
  if (j.contains("best_metrics")) cert.best_metrics = metrics_from_json(j["best_metrics"]);
  return cert;
}

/// Input file for `box local-det`: output functions of the inputs alone.
inline BipartiteBox local_det_box_from_json(const Json& j) {
  detail::require_format(j);
  const int x_size = detail::require_size(j, "x_size");
  const int y_size = detail::require_size(j, "y_size");
  const int a_size = detail::require_size(j, "a_size");
  const int b_size = detail::require_size(j, "b_size");
  const std::vector<int> f_a = detail::int_array_from_json(detail::require_field(j, "f_a"), "f_a");
  const std::vector<int> f_b = detail::int_array_from_json(detail::require_field(j, "f_b"), "f_b");
  return make_local_deterministic_box(x_size, y_size, a_size, b_size, f_a, f_b);
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::invalid_argument("write failed: " + path);
}

inline BipartiteBox load_box_file(const std::string& path) {
  const Json j = load_json_file(path);
  try {
    return box_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline void save_box_file(const std::string& path, const BipartiteBox& box) { save_json_file(path, box_to_json(box)); }

}  // namespace boxkit
