#include "gridlay/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gridlay {

using json = nlohmann::json;

Graph::Graph(std::vector<Node> nodes, const std::vector<std::pair<std::string, std::string>>& edges)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size()) {
    for (NodeIndex i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        if (!(n.w > 0.0) || !(n.h > 0.0) || !std::isfinite(n.w) || !std::isfinite(n.h)) {
            throw ValidationError(ValidationError::Kind::NonpositiveDimension,
                                  "node '" + n.id + "' has nonpositive dimension");
        }
        if (!index_.emplace(n.id, i).second) {
            throw ValidationError(ValidationError::Kind::DuplicateId, "duplicate node id '" + n.id + "'");
        }
    }
    std::set<std::pair<NodeIndex, NodeIndex>> seen;
    edges_.reserve(edges.size());
    for (const auto& [a, b] : edges) {
        auto ia = index_.find(a);
        auto ib = index_.find(b);
        if (ia == index_.end() || ib == index_.end()) {
            const std::string& missing = ia == index_.end() ? a : b;
            throw ValidationError(ValidationError::Kind::DanglingEndpoint,
                                  "edge endpoint '" + missing + "' is not a node");
        }
        NodeIndex u = ia->second, v = ib->second;
        if (u == v) {
            throw ValidationError(ValidationError::Kind::SelfLoop, "self-loop on '" + a + "'");
        }
        if (!seen.emplace(std::min(u, v), std::max(u, v)).second) {
            throw ValidationError(ValidationError::Kind::DuplicateEdge, "duplicate edge " + a + "-" + b);
        }
        edges_.emplace_back(u, v);
        adjacency_[u].push_back(v);
        adjacency_[v].push_back(u);
    }
}

bool Graph::adjacent(NodeIndex a, NodeIndex b) const {
    const auto& nb = adjacency_.at(a);
    return std::find(nb.begin(), nb.end(), b) != nb.end();
}

NodeIndex Graph::index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) {
        throw ValidationError(ValidationError::Kind::UnknownNode, "unknown node id '" + std::string(id) + "'");
    }
    return it->second;
}

bool Graph::contains(std::string_view id) const { return index_.count(std::string(id)) != 0; }

bool LayoutState::finite() const {
    auto ok = [](double v) { return std::isfinite(v); };
    return x.size() == y.size() && std::all_of(x.begin(), x.end(), ok) && std::all_of(y.begin(), y.end(), ok);
}

GridSpec::GridSpec(double spacing) : tau(spacing) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw Error("grid spacing must be positive");
}

namespace {

std::string id_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw ParseError("node id must be a string");
}

Graph graph_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
        throw ParseError("graph document needs a \"nodes\" array");
    }
    std::vector<Node> nodes;
    nodes.reserve(doc["nodes"].size());
    for (const auto& jn : doc["nodes"]) {
        if (!jn.is_object() || !jn.contains("id") || !jn.contains("w") || !jn.contains("h")) {
            throw ParseError("node entries need id, w and h");
        }
        if (!jn["w"].is_number() || !jn["h"].is_number()) throw ParseError("node w/h must be numbers");
        Node n;
        n.id = id_text(jn["id"]);
        n.w = jn["w"].get<double>();
        n.h = jn["h"].get<double>();
        if (jn.contains("tags")) {
            if (!jn["tags"].is_array()) throw ParseError("tags must be an array of strings");
            for (const auto& t : jn["tags"]) {
                if (!t.is_string()) throw ParseError("tags must be an array of strings");
                n.tags.push_back(t.get<std::string>());
            }
        }
        nodes.push_back(std::move(n));
    }
    std::vector<std::pair<std::string, std::string>> edges;
    if (doc.contains("edges")) {
        if (!doc["edges"].is_array()) throw ParseError("\"edges\" must be an array");
        for (const auto& je : doc["edges"]) {
            if (!je.is_array() || je.size() != 2) throw ParseError("edges are [id,id] pairs");
            edges.emplace_back(id_text(je[0]), id_text(je[1]));
        }
    }
    return Graph(std::move(nodes), edges);
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

Graph load_graph(std::istream& source, GraphFormat format) {
    std::stringstream buf;
    buf << source.rdbuf();
    return load_graph_string(buf.str(), format);
}

Graph load_graph_string(std::string_view text, GraphFormat /*format*/) { return graph_from_json(parse_json(text)); }

Graph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return load_graph(in);
}

std::string serialize_graph(const Graph& g) {
    json doc;
    doc["nodes"] = json::array();
    for (const Node& n : g.nodes()) {
        json jn = {{"id", n.id}, {"w", n.w}, {"h", n.h}};
        if (!n.tags.empty()) jn["tags"] = n.tags;
        doc["nodes"].push_back(std::move(jn));
    }
    doc["edges"] = json::array();
    for (const auto& [u, v] : g.edges()) doc["edges"].push_back({g.node(u).id, g.node(v).id});
    return doc.dump();
}

std::string serialize_positions(const Graph& g, const LayoutState& s) {
    json pos = json::object();
    for (NodeIndex i = 0; i < g.size(); ++i) pos[g.node(i).id] = {s.x[i], s.y[i]};
    return json{{"positions", pos}}.dump();
}

LayoutState parse_positions(const Graph& g, std::string_view text) {
    json doc = parse_json(text);
    if (!doc.is_object() || !doc.contains("positions") || !doc["positions"].is_object()) {
        throw ParseError("positions document needs a \"positions\" object");
    }
    LayoutState s(g.size());
    std::vector<bool> seen(g.size(), false);
    for (const auto& [id, xy] : doc["positions"].items()) {
        NodeIndex i = g.index_of(id);
        if (!xy.is_array() || xy.size() != 2 || !xy[0].is_number() || !xy[1].is_number()) {
            throw ParseError("position of '" + id + "' must be [x,y]");
        }
        s.x[i] = xy[0].get<double>();
        s.y[i] = xy[1].get<double>();
        seen[i] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw ParseError("positions missing for some nodes");
    return s;
}

IdealDistances shortest_path_distances(const Graph& g, double ideal_edge) {
    const std::size_t n = g.size();
    IdealDistances d(n, ideal_edge);
    std::vector<int> hops(n);
    std::deque<NodeIndex> queue;
    for (NodeIndex src = 0; src < n; ++src) {
        std::fill(hops.begin(), hops.end(), -1);
        hops[src] = 0;
        queue.assign(1, src);
        while (!queue.empty()) {
            NodeIndex u = queue.front();
            queue.pop_front();
            for (NodeIndex v : g.neighbours(u)) {
                if (hops[v] < 0) {
                    hops[v] = hops[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for (NodeIndex v = 0; v < n; ++v) {
            if (hops[v] >= 0) d.at(src, v) = ideal_edge * hops[v];
        }
    }
    return d;
}

double closest_grid_coordinate(double z, double tau) {
    double lo = std::floor(z / tau) * tau;
    double hi = lo + tau;
    double dlo = z - lo, dhi = hi - z;
    double best;
    if (dlo < dhi) {
        best = lo;
    } else if (dhi < dlo) {
        best = hi;
    } else if (std::abs(lo) != std::abs(hi)) {
        best = std::abs(lo) < std::abs(hi) ? lo : hi;
    } else {
        best = std::max(lo, hi);
    }
    return best == 0.0 ? 0.0 : best;  // no negative zero
}

Point closest_grid_point(Point p, const GridSpec& grid) {
    return {closest_grid_coordinate(p.x, grid.tau), closest_grid_coordinate(p.y, grid.tau)};
}

}  // namespace gridlay
