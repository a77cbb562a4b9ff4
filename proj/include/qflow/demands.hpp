#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qflow/error.hpp"
#include "qflow/fidelity.hpp"
#include "qflow/topology.hpp"

namespace qflow {

// A demand as written in a demand document: either a fidelity target or an
// explicit maximum path length.
struct DemandSpec {
  struct MaxLength {
    std::size_t hops;
  };
  std::string source;
  std::string destination;
  std::variant<double, MaxLength> requirement;
};

struct Demand {
  NodeIndex source;
  NodeIndex destination;
  std::optional<double> target_fidelity;
  // Maximum number of elementary links; 0 exactly when the demand is
  // infeasible (its target exceeds the elementary fidelity).
  std::size_t length_bound;

  bool feasible() const { return length_bound > 0; }
};

class DemandSet {
 public:
  explicit DemandSet(std::vector<Demand> demands) : demands_(std::move(demands)) {
    if (demands_.empty()) throw InputError("demand set is empty");
  }

  std::size_t size() const { return demands_.size(); }
  const Demand& operator[](std::size_t i) const { return demands_.at(i); }
  const std::vector<Demand>& demands() const { return demands_; }

  std::size_t l_max() const {
    std::size_t l = 0;
    for (const auto& d : demands_) l = std::max(l, d.length_bound);
    return l;
  }

 private:
  std::vector<Demand> demands_;
};

// Turns fidelity targets into hop bounds against g's elementary fidelity.
// Bounds are capped at |V| - 1: no simple path is longer, and any longer walk
// is dominated by the simple path it contains. Order is preserved.
inline DemandSet reduce_demands(const std::vector<DemandSpec>& raw, const NetworkGraph& g) {
  const std::size_t cap = g.num_nodes() > 0 ? g.num_nodes() - 1 : 0;
  const FidelityTarget elementary(g.elementary_fidelity());
  std::vector<Demand> out;
  out.reserve(raw.size());
  for (const auto& spec : raw) {
    Demand d{g.require_node(spec.source), g.require_node(spec.destination), std::nullopt, 0};
    if (d.source == d.destination) {
      throw InputError("demand source and destination coincide ('" + spec.source + "')");
    }
    if (const double* f = std::get_if<double>(&spec.requirement)) {
      d.target_fidelity = *f;
      d.length_bound = length_bound(FidelityTarget(*f), elementary);
    } else {
      const auto hops = std::get<DemandSpec::MaxLength>(spec.requirement).hops;
      if (hops == 0) throw InputError("demand max_length must be positive");
      d.length_bound = hops;
    }
    d.length_bound = std::min(d.length_bound, cap);
    out.push_back(d);
  }
  return DemandSet(std::move(out));
}

// Schema: [ {"source", "destination", "target_fidelity"} |
//           {"source", "destination", "max_length"} ]
inline std::vector<DemandSpec> parse_demands(const nlohmann::json& doc) {
  if (!doc.is_array()) throw InputError("demands: document must be an array");
  std::vector<DemandSpec> out;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("source") || !item.contains("destination")) {
      throw InputError("demands: entries need 'source' and 'destination'");
    }
    DemandSpec spec{detail::json_id(item.at("source"), "demand source"),
                    detail::json_id(item.at("destination"), "demand destination"), 0.0};
    const bool has_f = item.contains("target_fidelity");
    const bool has_l = item.contains("max_length");
    if (has_f == has_l) {
      throw InputError("demands: give exactly one of 'target_fidelity' or 'max_length'");
    }
    if (has_f) {
      if (!item.at("target_fidelity").is_number()) throw InputError("demands: target_fidelity must be a number");
      spec.requirement = item.at("target_fidelity").get<double>();
    } else {
      const auto& l = item.at("max_length");
      if (!l.is_number_integer() || l.get<std::int64_t>() < 1) {
        throw InputError("demands: max_length must be a positive integer");
      }
      spec.requirement = DemandSpec::MaxLength{static_cast<std::size_t>(l.get<std::int64_t>())};
    }
    out.push_back(std::move(spec));
  }
  return out;
}

}  // namespace qflow
