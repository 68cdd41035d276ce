#pragma once

#include <cmath>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "amod/common/csv.hpp"
#include "amod/common/error.hpp"

namespace amod::net {

struct Node {
    int id;
    double x, y;  // planar coordinates, km
};

struct Link {
    int from, to;
    double length_km;
};

// Directed road network. Node ids are dense 0..V-1 and the graph is strongly
// connected; both properties are enforced on construction.
class RoadGraph {
  public:
    RoadGraph(std::vector<Node> nodes, std::vector<Link> links)
        : nodes_(std::move(nodes)), links_(std::move(links)) {
        validate();
        out_.assign(nodes_.size(), {});
        for (std::size_t i = 0; i < links_.size(); ++i) out_[links_[i].from].push_back(static_cast<int>(i));
    }

    int node_count() const { return static_cast<int>(nodes_.size()); }
    int link_count() const { return static_cast<int>(links_.size()); }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Link>& links() const { return links_; }
    const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    const std::vector<int>& out_links(int node_id) const { return out_[static_cast<std::size_t>(node_id)]; }

    void save(const std::string& nodes_path, const std::string& links_path) const {
        std::ostringstream ns;
        ns << "id,x,y\n";
        for (const auto& n : nodes_) ns << n.id << "," << fmt_double(n.x) << "," << fmt_double(n.y) << "\n";
        write_file_atomic(nodes_path, ns.str());
        std::ostringstream ls;
        ls << "from,to,length_km\n";
        for (const auto& l : links_) ls << l.from << "," << l.to << "," << fmt_double(l.length_km) << "\n";
        write_file_atomic(links_path, ls.str());
    }

  private:
    void validate() const {
        if (nodes_.empty()) throw ConfigError("graph has no nodes");
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (nodes_[i].id != static_cast<int>(i))
                throw ConfigError("node ids must be dense 0..V-1, got id " + std::to_string(nodes_[i].id) +
                                  " at position " + std::to_string(i));
            if (!std::isfinite(nodes_[i].x) || !std::isfinite(nodes_[i].y))
                throw ConfigError("node " + std::to_string(i) + " has non-finite coordinates");
        }
        const int n = static_cast<int>(nodes_.size());
        for (const auto& l : links_) {
            if (l.from < 0 || l.from >= n || l.to < 0 || l.to >= n)
                throw LoadError(LoadErrc::dangling_endpoint,
                                "link " + std::to_string(l.from) + "->" + std::to_string(l.to) +
                                    " references a missing node");
            if (l.from == l.to) throw ConfigError("self-loop at node " + std::to_string(l.from));
            if (!(l.length_km > 0.0))
                throw LoadError(LoadErrc::nonpositive_length, "link " + std::to_string(l.from) + "->" +
                                                                  std::to_string(l.to) + " has non-positive length");
        }
        if (!strongly_connected())
            throw LoadError(LoadErrc::disconnected, "graph is not strongly connected");
    }

    bool strongly_connected() const {
        const int n = static_cast<int>(nodes_.size());
        auto reach_all = [&](bool reversed) {
            std::vector<std::vector<int>> adj(n);
            for (const auto& l : links_) {
                if (reversed)
                    adj[l.to].push_back(l.from);
                else
                    adj[l.from].push_back(l.to);
            }
            std::vector<char> seen(n, 0);
            std::queue<int> q;
            q.push(0);
            seen[0] = 1;
            int count = 1;
            while (!q.empty()) {
                int v = q.front();
                q.pop();
                for (int w : adj[v]) {
                    if (!seen[w]) {
                        seen[w] = 1;
                        ++count;
                        q.push(w);
                    }
                }
            }
            return count == n;
        };
        return reach_all(false) && reach_all(true);
    }

    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::vector<std::vector<int>> out_;
};

// rows x cols lattice, bidirectional links between 4-neighbors
inline RoadGraph generate_grid_network(int rows, int cols, double spacing_km) {
    if (rows < 2 || cols < 2) throw ConfigError("grid needs rows >= 2 and cols >= 2");
    if (!(spacing_km > 0.0)) throw ConfigError("grid spacing must be positive");
    std::vector<Node> nodes;
    nodes.reserve(static_cast<std::size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            nodes.push_back({r * cols + c, c * spacing_km, r * spacing_km});
    std::vector<Link> links;
    auto id = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) {
                links.push_back({id(r, c), id(r, c + 1), spacing_km});
                links.push_back({id(r, c + 1), id(r, c), spacing_km});
            }
            if (r + 1 < rows) {
                links.push_back({id(r, c), id(r + 1, c), spacing_km});
                links.push_back({id(r + 1, c), id(r, c), spacing_km});
            }
        }
    }
    return RoadGraph(std::move(nodes), std::move(links));
}

inline RoadGraph load_network(const std::string& nodes_path, const std::string& links_path) {
    CsvTable nt = read_csv(nodes_path);
    if (nt.header != std::vector<std::string>{"id", "x", "y"})
        throw LoadError(LoadErrc::parse, nodes_path + ": expected header id,x,y");
    std::vector<Node> nodes;
    nodes.reserve(nt.rows.size());
    for (const auto& row : nt.rows)
        nodes.push_back({static_cast<int>(csv_long(row[0], nodes_path)), csv_double(row[1], nodes_path),
                         csv_double(row[2], nodes_path)});

    CsvTable lt = read_csv(links_path);
    if (lt.header != std::vector<std::string>{"from", "to", "length_km"})
        throw LoadError(LoadErrc::parse, links_path + ": expected header from,to,length_km");
    std::vector<Link> links;
    links.reserve(lt.rows.size());
    for (const auto& row : lt.rows)
        links.push_back({static_cast<int>(csv_long(row[0], links_path)), static_cast<int>(csv_long(row[1], links_path)),
                         csv_double(row[2], links_path)});
    return RoadGraph(std::move(nodes), std::move(links));
}

}  // namespace amod::net
