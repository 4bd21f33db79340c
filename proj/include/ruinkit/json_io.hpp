#ifndef RUINKIT_JSON_IO_HPP
#define RUINKIT_JSON_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "ruinkit/domain.hpp"
#include "ruinkit/errors.hpp"
#include "ruinkit/graph.hpp"

namespace ruinkit {

using nlohmann::json;

// {"vertices":[{"id":..,"pi":..,"coords":[..]?}],"edges":[{"u":..,"v":..,"mu":..}]}
inline json graph_to_json(const WeightedGraph& g) {
  json vertices = json::array();
  for (int v = 0; v < g.size(); ++v) {
    json jv{{"id", g.ids[v]}, {"pi", g.pi[v]}};
    if (g.coord_dim > 0) {
      json c = json::array();
      for (int x : g.coords_of(v)) c.push_back(x);
      jv["coords"] = c;
    }
    if (!g.patch_border.empty() && g.patch_border[v]) jv["border"] = true;
    vertices.push_back(jv);
  }
  json edges = json::array();
  for (int v = 0; v < g.size(); ++v) {
    auto nb = g.neighbors(v);
    auto mw = g.neighbor_mu(v);
    for (size_t e = 0; e < nb.size(); ++e) {
      if (nb[e] < v) continue;  // canonical order, stored once
      edges.push_back(json{{"u", g.ids[v]}, {"v", g.ids[nb[e]]}, {"mu", mw[e]}});
    }
  }
  return json{{"vertices", vertices}, {"edges", edges}};
}

inline WeightedGraph graph_from_json(const json& j) {
  require(j.contains("vertices") && j.contains("edges"), errc::bad_input,
          "graph JSON needs 'vertices' and 'edges'");
  GraphBuilder b;
  std::vector<int> border_pending;
  for (const auto& jv : j.at("vertices")) {
    std::vector<int> coords;
    if (jv.contains("coords"))
      for (const auto& c : jv.at("coords")) coords.push_back(c.get<int>());
    int idx = b.add_vertex(jv.at("id").get<VertexId>(), jv.at("pi").get<double>(), coords);
    if (jv.value("border", false)) b.set_border(idx);
  }
  for (const auto& je : j.at("edges")) {
    b.add_edge_by_id(je.at("u").get<VertexId>(), je.at("v").get<VertexId>(),
                     je.at("mu").get<double>());
  }
  return b.build();
}

inline json domain_to_json(const Domain& d) {
  json u = json::array(), boundary = json::array();
  for (int v : d.u) u.push_back(d.graph->ids[v]);
  for (int v : d.outer_boundary) boundary.push_back(d.graph->ids[v]);
  return json{{"U", u}, {"boundary", boundary}};
}

inline Domain domain_from_json(const WeightedGraph& g, const json& j) {
  require(j.contains("U"), errc::bad_input, "domain JSON needs 'U'");
  std::vector<int> u;
  for (const auto& id : j.at("U")) u.push_back(g.index_of(id.get<VertexId>()));
  return build_domain(g, u);
}

}  // namespace ruinkit

#endif
