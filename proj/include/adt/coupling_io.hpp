#pragma once

// JSON documents for path couplings: both marginal trees plus support
// triples (left leaf id, right leaf id, weight "a/b").

#include <map>
#include <optional>
#include <string>

#include "adt/couplings.hpp"
#include "adt/tree_io.hpp"

namespace adt {

inline Json coupling_to_json(const PathCoupling& pi) {
  Json support = Json::array();
  for (const auto& e : pi.support) {
    support.push_back(Json{{"left", pi.left.node(e.left).id},
                           {"right", pi.right.node(e.right).id},
                           {"weight", to_string(e.weight)}});
  }
  return Json{{"left", tree_to_json(pi.left)}, {"right", tree_to_json(pi.right)}, {"support", support}};
}

inline PathCoupling load_coupling(const Json& doc, std::optional<int> decimals_override = std::nullopt) {
  if (!doc.is_object() || !doc.contains("left") || !doc.contains("right") || !doc.contains("support") ||
      !doc.at("support").is_array()) {
    throw Error(ErrorCode::kMalformedDocument, "coupling document needs 'left', 'right' and a 'support' array");
  }
  PathCoupling pi{load_tree(doc.at("left"), decimals_override), load_tree(doc.at("right"), decimals_override), {}};
  require_same_config(pi.left.config(), pi.right.config());
  auto index = [](const FilteredTree& tree) {
    std::map<std::string, NodeIndex> out;
    for (NodeIndex leaf : tree.leaves()) out[tree.node(leaf).id] = leaf;
    return out;
  };
  auto left = index(pi.left);
  auto right = index(pi.right);
  for (const Json& entry : doc.at("support")) {
    auto l = detail::required<std::string>(entry, "left", "support entry");
    auto r = detail::required<std::string>(entry, "right", "support entry");
    if (!left.count(l)) throw Error(ErrorCode::kMalformedDocument, "support references unknown left leaf '" + l + "'");
    if (!right.count(r)) throw Error(ErrorCode::kMalformedDocument, "support references unknown right leaf '" + r + "'");
    if (!entry.contains("weight")) throw Error(ErrorCode::kMalformedDocument, "support entry lacks 'weight'");
    pi.support.push_back({left[l], right[r], detail::json_rational(entry.at("weight"), "support entry")});
  }
  pi.validate();
  return pi;
}

inline PathCoupling load_coupling_string(const std::string& text, std::optional<int> decimals_override = std::nullopt) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedDocument, std::string("JSON parse error: ") + e.what());
  }
  return load_coupling(doc, decimals_override);
}

}  // namespace adt
