#include "opfgrad/case.hpp"

#include "opfgrad/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace opfgrad {

using json = nlohmann::ordered_json;

namespace {

void check_length(const Eigen::VectorXd& v, int n, const std::string& what) {
  if (v.size() != n)
    throw InvalidInput(what + ": expected length " + std::to_string(n) + ", got " +
                       std::to_string(v.size()));
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// --- schema helpers -------------------------------------------------------

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "/" + key, "missing field");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
  return v.get<int>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& path) {
  if (!v.is_array()) throw SchemaError(path, "expected an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = as_number(v[i], path + "/" + std::to_string(i));
  return out;
}

json to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

CaseFile parse_native(const json& doc) {
  const std::string name =
      doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : "";
  const double mva = doc.contains("mva_base") ? as_number(doc["mva_base"], "/mva_base") : 100.0;
  const int n_gen = as_int(require(doc, "generators", ""), "/generators");
  const int n_load = as_int(require(doc, "loads", ""), "/loads");
  if (n_gen < 1) throw SchemaError("/generators", "must be at least 1");
  if (n_load < 1) throw SchemaError("/loads", "must be at least 1");

  const json& edges_json = require(doc, "edges", "");
  if (!edges_json.is_array()) throw SchemaError("/edges", "expected an array");
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < edges_json.size(); ++k) {
    const std::string p = "/edges/" + std::to_string(k);
    const json& e = edges_json[k];
    Edge edge{as_int(require(e, "from", p), p + "/from"), as_int(require(e, "to", p), p + "/to"),
              as_number(require(e, "b", p), p + "/b")};
    if (!(edge.susceptance > 0.0)) throw SchemaError(p + "/b", "susceptance must be positive");
    edges.push_back(edge);
  }
  if (edges.empty()) throw InvalidInput("network is disconnected (no edges)");

  CapacityLimits limits{as_vector(require(doc, "sg_max", ""), "/sg_max"),
                        as_vector(require(doc, "sg_min", ""), "/sg_min"),
                        as_vector(require(doc, "p_max", ""), "/p_max"),
                        as_vector(require(doc, "p_min", ""), "/p_min")};
  std::vector<std::string> labels;
  if (doc.contains("bus_labels")) {
    const json& l = doc["bus_labels"];
    if (!l.is_array()) throw SchemaError("/bus_labels", "expected an array of strings");
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (!l[i].is_string())
        throw SchemaError("/bus_labels/" + std::to_string(i), "expected a string");
      labels.push_back(l[i].get<std::string>());
    }
  } else {
    for (int i = 1; i <= n_gen + n_load; ++i) labels.push_back(std::to_string(i));
  }

  CaseFile c{name,
             mva,
             PowerNetwork(n_gen, n_load, std::move(edges)),
             as_vector(require(doc, "cost", ""), "/cost"),
             std::move(limits),
             as_vector(require(doc, "load", ""), "/load"),
             std::move(labels)};
  c.validate();
  return c;
}

RawCase parse_raw(const json& doc) {
  RawCase raw;
  raw.name = doc.contains("name") && doc["name"].is_string() ? doc["name"].get<std::string>() : "";
  if (doc.contains("mva_base")) raw.mva_base = as_number(doc["mva_base"], "/mva_base");
  const json& buses = doc["buses"];
  if (!buses.is_array()) throw SchemaError("/buses", "expected an array");
  for (std::size_t k = 0; k < buses.size(); ++k) {
    const std::string p = "/buses/" + std::to_string(k);
    const json& b = buses[k];
    RawBus bus;
    bus.id = as_int(require(b, "id", p), p + "/id");
    if (b.contains("gen")) {
      const json& g = b["gen"];
      bus.gen = RawGenerator{as_number(require(g, "cost", p + "/gen"), p + "/gen/cost"),
                             as_number(require(g, "min", p + "/gen"), p + "/gen/min"),
                             as_number(require(g, "max", p + "/gen"), p + "/gen/max")};
    }
    if (b.contains("load")) bus.load = as_number(b["load"], p + "/load");
    raw.buses.push_back(bus);
  }
  const json& branches = require(doc, "branches", "");
  if (!branches.is_array()) throw SchemaError("/branches", "expected an array");
  for (std::size_t k = 0; k < branches.size(); ++k) {
    const std::string p = "/branches/" + std::to_string(k);
    const json& e = branches[k];
    raw.branches.push_back(RawBranch{as_int(require(e, "from", p), p + "/from"),
                                     as_int(require(e, "to", p), p + "/to"),
                                     as_number(require(e, "b", p), p + "/b"),
                                     as_number(require(e, "p_min", p), p + "/p_min"),
                                     as_number(require(e, "p_max", p), p + "/p_max")});
  }
  return raw;
}

}  // namespace

void CapacityLimits::validate(int n_gen, int n_edge) const {
  check_length(sg_max, n_gen, "sg_max");
  check_length(sg_min, n_gen, "sg_min");
  check_length(p_max, n_edge, "p_max");
  check_length(p_min, n_edge, "p_min");
  if (!all_finite(sg_max) || !all_finite(sg_min) || !all_finite(p_max) || !all_finite(p_min))
    throw InvalidInput("capacity limits must be finite");
  for (int i = 0; i < n_gen; ++i) {
    if (sg_min[i] < 0.0)
      throw InvalidInput("sg_min[" + std::to_string(i + 1) + "] must be nonnegative");
    if (!(sg_max[i] > sg_min[i]))
      throw InvalidInput("sg_max[" + std::to_string(i + 1) + "] must exceed sg_min");
  }
  for (int e = 0; e < n_edge; ++e)
    if (!(p_max[e] > p_min[e]))
      throw InvalidInput("p_max[" + std::to_string(e + 1) + "] must exceed p_min");
}

Eigen::VectorXd CapacityLimits::stacked() const {
  Eigen::VectorXd xi(2 * sg_max.size() + 2 * p_max.size());
  xi << sg_max, sg_min, p_max, p_min;
  return xi;
}

void validate_cost(const Eigen::VectorXd& cost, int n_gen) {
  check_length(cost, n_gen, "cost");
  if (!all_finite(cost)) throw InvalidInput("cost must be finite");
  if ((cost.array() < 0.0).any()) throw InvalidInput("cost must be nonnegative");
}

void validate_load(const Eigen::VectorXd& load, int n_load) {
  check_length(load, n_load, "load");
  if (!all_finite(load)) throw InvalidInput("load must be finite");
  if ((load.array() <= 0.0).any()) throw InvalidInput("load must be positive");
}

void CaseFile::validate() const {
  validate_cost(cost, network.n_gen());
  limits.validate(network.n_gen(), network.n_edge());
  validate_load(base_load, network.n_load());
  if (static_cast<int>(bus_labels.size()) != network.n_bus())
    throw InvalidInput("bus_labels: expected length " + std::to_string(network.n_bus()));
}

CaseFile split_composite_buses(const RawCase& raw, double split_susceptance) {
  if (!(split_susceptance > 0.0)) throw InvalidInput("split susceptance must be positive");
  std::map<int, int> position;
  for (std::size_t k = 0; k < raw.buses.size(); ++k) {
    if (!position.emplace(raw.buses[k].id, static_cast<int>(k)).second)
      throw InvalidInput("duplicate bus id " + std::to_string(raw.buses[k].id));
  }

  // Connectivity is checked on the raw graph before any rewiring.
  std::vector<Edge> raw_edges;
  for (const auto& br : raw.branches) {
    auto a = position.find(br.from);
    auto b = position.find(br.to);
    if (a == position.end() || b == position.end())
      throw InvalidInput("branch references unknown bus");
    raw_edges.push_back(Edge{a->second + 1, b->second + 1, br.susceptance});
  }
  if (!is_connected(static_cast<int>(raw.buses.size()), raw_edges))
    throw InvalidInput("raw case is disconnected");

  const int n_raw = static_cast<int>(raw.buses.size());
  std::vector<int> gen_index(n_raw, -1);   // internal generator bus (1-based)
  std::vector<int> load_index(n_raw, -1);  // internal load bus (1-based)
  std::vector<std::string> gen_labels, load_labels;
  std::vector<double> cost, sg_min, sg_max, load;
  int n_gen = 0;
  for (int k = 0; k < n_raw; ++k) {
    const RawBus& b = raw.buses[k];
    if (!b.gen) continue;
    gen_index[k] = ++n_gen;
    gen_labels.push_back(std::to_string(b.id) + (b.load ? "g" : ""));
    cost.push_back(b.gen->cost);
    sg_min.push_back(b.gen->sg_min);
    sg_max.push_back(b.gen->sg_max);
  }
  int n_load = 0;
  for (int k = 0; k < n_raw; ++k) {
    const RawBus& b = raw.buses[k];
    if (b.gen && !b.load) continue;
    load_index[k] = ++n_load;
    load_labels.push_back(std::to_string(b.id));
    load.push_back(b.load ? *b.load : kTransitBusLoad);
  }
  auto internal = [&](int k) {
    return load_index[k] > 0 ? n_gen + load_index[k] : gen_index[k];
  };

  std::vector<Edge> edges;
  std::vector<double> p_min, p_max;
  for (std::size_t e = 0; e < raw.branches.size(); ++e) {
    const auto& br = raw.branches[e];
    edges.push_back(Edge{internal(raw_edges[e].from - 1), internal(raw_edges[e].to - 1),
                         br.susceptance});
    p_min.push_back(br.p_min);
    p_max.push_back(br.p_max);
  }
  for (int k = 0; k < n_raw; ++k) {
    const RawBus& b = raw.buses[k];
    if (!(b.gen && b.load)) continue;
    // The tie carries exactly the generator output, so +-(sg_max + 1) never binds.
    const double cap = b.gen->sg_max + 1.0;
    edges.push_back(Edge{gen_index[k], n_gen + load_index[k], split_susceptance});
    p_min.push_back(-cap);
    p_max.push_back(cap);
  }

  auto vec = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  std::vector<std::string> labels = gen_labels;
  labels.insert(labels.end(), load_labels.begin(), load_labels.end());
  CaseFile c{raw.name,
             raw.mva_base,
             PowerNetwork(n_gen, n_load, std::move(edges)),
             vec(cost),
             CapacityLimits{vec(sg_max), vec(sg_min), vec(p_max), vec(p_min)},
             vec(load),
             std::move(labels)};
  c.validate();
  return c;
}

CaseFile parse_case(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("", "expected a JSON object");
  if (doc.contains("buses")) return split_composite_buses(parse_raw(doc));
  return parse_native(doc);
}

CaseFile load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open case file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str());
}

std::string serialize_case(const CaseFile& c) {
  json doc;
  doc["name"] = c.name;
  doc["mva_base"] = c.mva_base;
  doc["generators"] = c.network.n_gen();
  doc["loads"] = c.network.n_load();
  json edges = json::array();
  for (const auto& e : c.network.edges())
    edges.push_back(json{{"from", e.from}, {"to", e.to}, {"b", e.susceptance}});
  doc["edges"] = std::move(edges);
  doc["cost"] = to_json(c.cost);
  doc["sg_max"] = to_json(c.limits.sg_max);
  doc["sg_min"] = to_json(c.limits.sg_min);
  doc["p_max"] = to_json(c.limits.p_max);
  doc["p_min"] = to_json(c.limits.p_min);
  doc["load"] = to_json(c.base_load);
  doc["bus_labels"] = c.bus_labels;
  return doc.dump(2) + "\n";
}

void save_case(const CaseFile& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write case file " + path.string());
  out << serialize_case(c);
}

}  // namespace opfgrad
