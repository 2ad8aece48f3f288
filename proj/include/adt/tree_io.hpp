#pragma once

// JSON serialization of filtered trees.
//
//   {
//     "config": {"N": 2, "d": 1, "p": "1"},
//     "value_decimals": 12,
//     "root_children": [{"id": "a", "prob": "1"}],
//     "nodes": [{"id": "a", "time": 1, "value": ["0"], "info": "",
//                "children": [{"id": "b", "prob": "1/2"}, ...]}, ...]
//   }
//
// Values are decimal strings rounded to `value_decimals` fractional digits;
// a value written as "a/b" is taken exactly. Probabilities are "a/b" strings.

#include <deque>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"

#include "adt/process.hpp"

namespace adt {

using Json = nlohmann::ordered_json;

inline constexpr int kDefaultValueDecimals = 12;

// Exact decimal digits of q if its expansion terminates within max_digits.
inline std::optional<std::string> exact_decimal(const Rational& q, int max_digits = kDefaultValueDecimals) {
  Integer den = denominator_of(q);
  int twos = 0;
  int fives = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++twos;
  }
  while (den % 5 == 0) {
    den /= 5;
    ++fives;
  }
  if (den != 1 || std::max(twos, fives) > max_digits) return std::nullopt;
  return to_decimal_string(q, std::max(twos, fives));
}

inline std::string value_component_string(const Rational& q) {
  if (auto s = exact_decimal(q)) return *s;
  return to_string(q);
}

namespace detail {

template <class T>
T required(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kMalformedDocument, std::string("missing field '") + key + "' in " + where);
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kMalformedDocument, std::string("field '") + key + "' has the wrong type in " + where);
  }
}

inline Rational json_rational(const Json& j, const std::string& where) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number()) return parse_rational(j.dump());
  throw Error(ErrorCode::kMalformedDocument, "expected a rational in " + where);
}

inline Rational json_value_component(const Json& j, int decimals, const std::string& where) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s.find('/') != std::string::npos) return parse_rational(s);
    return parse_decimal(s, decimals);
  }
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number()) return parse_decimal(j.dump(), decimals);
  throw Error(ErrorCode::kMalformedDocument, "expected a decimal string in " + where);
}

}  // namespace detail

inline MetricConfig config_from_json(const Json& j) {
  MetricConfig config;
  config.N = detail::required<int>(j, "N", "config");
  config.d = detail::required<int>(j, "d", "config");
  if (!j.contains("p")) throw Error(ErrorCode::kMalformedDocument, "missing field 'p' in config");
  config.p = Order{detail::json_rational(j.at("p"), "config.p")};
  try {
    config.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
  return config;
}

inline Json config_to_json(const MetricConfig& config) {
  return Json{{"N", config.N}, {"d", config.d}, {"p", to_string(config.p.value)}};
}

// Parses and validates a tree document. `decimals_override` (e.g. from the
// environment) takes precedence over the document's `value_decimals`.
inline FilteredTree load_tree(const Json& doc, std::optional<int> decimals_override = std::nullopt) {
  if (!doc.is_object()) throw Error(ErrorCode::kMalformedDocument, "tree document must be a JSON object");
  if (!doc.contains("config")) throw Error(ErrorCode::kMalformedDocument, "missing field 'config'");
  MetricConfig config = config_from_json(doc.at("config"));
  int decimals = kDefaultValueDecimals;
  if (doc.contains("value_decimals")) decimals = detail::required<int>(doc, "value_decimals", "document");
  if (decimals_override) decimals = *decimals_override;
  if (decimals < 0) throw Error(ErrorCode::kMalformedDocument, "value_decimals must be nonnegative");

  if (!doc.contains("nodes") || !doc.at("nodes").is_array()) {
    throw Error(ErrorCode::kMalformedDocument, "missing array 'nodes'");
  }
  if (!doc.contains("root_children") || !doc.at("root_children").is_array()) {
    throw Error(ErrorCode::kMalformedDocument, "missing array 'root_children'");
  }

  std::map<std::string, const Json*> by_id;
  for (const Json& n : doc.at("nodes")) {
    auto id = detail::required<std::string>(n, "id", "node");
    if (!by_id.emplace(id, &n).second) throw Error(ErrorCode::kInvalidTree, "duplicate node id '" + id + "'");
  }

  TreeBuilder builder(config);
  std::map<std::string, NodeIndex> placed;
  std::deque<std::pair<NodeIndex, const Json*>> queue;  // (parent index, child list)
  queue.emplace_back(kRoot, &doc.at("root_children"));
  while (!queue.empty()) {
    auto [parent, list] = queue.front();
    queue.pop_front();
    std::string parent_id = parent == kRoot ? "<root>" : builder.node(parent).id;
    if (!list->is_array()) throw Error(ErrorCode::kMalformedDocument, "children of node " + parent_id + " is not an array");
    for (const Json& edge : *list) {
      auto id = detail::required<std::string>(edge, "id", "child of node " + parent_id);
      if (!edge.contains("prob")) throw Error(ErrorCode::kMalformedDocument, "missing 'prob' on edge to " + id);
      Rational prob = detail::json_rational(edge.at("prob"), "edge to " + id);
      auto it = by_id.find(id);
      if (it == by_id.end()) throw Error(ErrorCode::kInvalidTree, "node " + parent_id + " references unknown node '" + id + "'");
      if (placed.count(id)) throw Error(ErrorCode::kInvalidTree, "node '" + id + "' has more than one parent");
      const Json& n = *it->second;
      int expected_time = parent == kRoot ? 1 : builder.node(parent).time + 1;
      int time = detail::required<int>(n, "time", "node " + id);
      if (time != expected_time) {
        throw Error(ErrorCode::kInvalidTree, "node '" + id + "' declares time " + std::to_string(time) +
                                                 " but sits at depth " + std::to_string(expected_time));
      }
      if (time > config.N) throw Error(ErrorCode::kInvalidTree, "non-uniform depth: node '" + id + "' below time N");
      if (!n.contains("value") || !n.at("value").is_array()) {
        throw Error(ErrorCode::kMalformedDocument, "node '" + id + "' lacks a value array");
      }
      Value value;
      for (const Json& c : n.at("value")) value.push_back(detail::json_value_component(c, decimals, "node " + id));
      std::string info = n.contains("info") ? detail::required<std::string>(n, "info", "node " + id) : "";
      NodeIndex index = builder.add(parent, std::move(value), std::move(prob), std::move(info), id);
      placed.emplace(id, index);
      if (n.contains("children")) {
        queue.emplace_back(index, &n.at("children"));
      } else {
        static const Json kEmpty = Json::array();
        queue.emplace_back(index, &kEmpty);
      }
    }
    if (parent != kRoot && list->empty() && builder.node(parent).time < config.N) {
      throw Error(ErrorCode::kInvalidTree, "non-uniform depth: leaf '" + parent_id + "' at time " +
                                               std::to_string(builder.node(parent).time) + " < N");
    }
  }
  for (const auto& [id, n] : by_id) {
    if (!placed.count(id)) throw Error(ErrorCode::kInvalidTree, "node '" + id + "' is unreachable from the root");
  }
  return std::move(builder).build();
}

inline FilteredTree load_tree_string(const std::string& text, std::optional<int> decimals_override = std::nullopt) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, std::string("JSON parse error: ") + e.what());
  }
  return load_tree(doc, decimals_override);
}

inline Json edges_to_json(const FilteredTree& tree, const std::vector<Edge>& edges) {
  Json out = Json::array();
  for (const Edge& e : edges) out.push_back(Json{{"id", tree.node(e.child).id}, {"prob", to_string(e.prob)}});
  return out;
}

inline Json tree_to_json(const FilteredTree& tree) {
  Json nodes = Json::array();
  for (const Node& n : tree.nodes()) {
    Json value = Json::array();
    for (const Rational& q : n.value) value.push_back(value_component_string(q));
    nodes.push_back(Json{{"id", n.id},
                         {"time", n.time},
                         {"value", value},
                         {"info", n.info},
                         {"children", edges_to_json(tree, n.children)}});
  }
  return Json{{"config", config_to_json(tree.config())},
              {"root_children", edges_to_json(tree, tree.root_children())},
              {"nodes", nodes}};
}

}  // namespace adt
