#include "scrubplan/graph.h"

#include <algorithm>
#include <json.hpp>
#include <tuple>

namespace scrubplan {

std::vector<int> CellGraph::primary_inputs() const
{
    std::vector<int> out;
    for (int v = 0; v < num_nodes; ++v)
        if (in_edges[v].empty())
            out.push_back(v);
    return out;
}

std::vector<int> CellGraph::primary_outputs() const
{
    std::vector<int> out;
    for (int v = 0; v < num_nodes; ++v)
        if (out_edges[v].empty())
            out.push_back(v);
    return out;
}

CellGraph CellGraph::from_edges(int num_nodes, std::vector<Edge> edges)
{
    std::sort(edges.begin(), edges.end(), [](const Edge &a, const Edge &b) {
        return std::tie(a.src, a.dst, a.dst_pin) < std::tie(b.src, b.dst, b.dst_pin);
    });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    CellGraph g;
    g.num_nodes = num_nodes;
    g.edges = std::move(edges);
    g.out_edges.resize(num_nodes);
    g.in_edges.resize(num_nodes);
    for (size_t e = 0; e < g.edges.size(); ++e) {
        g.out_edges[g.edges[e].src].push_back(int(e));
        g.in_edges[g.edges[e].dst].push_back(int(e));
    }
    return g;
}

CellGraph build_graph(const MappedNetlist &n)
{
    return CellGraph::from_edges(int(n.cells.size()), n.edges());
}

std::vector<bool> find_cyclic_set(const CellGraph &g)
{
    // Iterative Tarjan.
    const int n = g.num_nodes;
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<int> stack;
    std::vector<int> comp_size;
    struct Frame
    {
        int v;
        size_t next;
    };
    std::vector<Frame> call;
    int counter = 0;
    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0)
            continue;
        call.push_back({root, 0});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame &f = call.back();
            const auto &outs = g.out_edges[f.v];
            if (f.next < outs.size()) {
                int w = g.edges[outs[f.next++]].dst;
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
                continue;
            }
            int v = f.v;
            call.pop_back();
            if (!call.empty())
                low[call.back().v] = std::min(low[call.back().v], low[v]);
            if (low[v] == index[v]) {
                int id = int(comp_size.size());
                comp_size.push_back(0);
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = id;
                    ++comp_size[id];
                } while (w != v);
            }
        }
    }
    std::vector<bool> cyclic(n, false);
    for (int v = 0; v < n; ++v)
        cyclic[v] = comp_size[comp[v]] >= 2;
    for (const auto &e : g.edges)
        if (e.src == e.dst)
            cyclic[e.src] = true;
    return cyclic;
}

int Classification::count_cyclic() const
{
    return int(std::count(cyclic.begin(), cyclic.end(), true));
}

int Classification::count_critical_nodes() const
{
    return int(std::count(critical_nodes.begin(), critical_nodes.end(), true));
}

int Classification::count_critical_edges() const
{
    return int(std::count(critical_edges.begin(), critical_edges.end(), true));
}

Classification classify(const CellGraph &g)
{
    Classification c;
    c.cyclic = find_cyclic_set(g);
    c.critical_nodes = c.cyclic;
    std::vector<int> queue;
    for (int v = 0; v < g.num_nodes; ++v)
        if (c.cyclic[v])
            queue.push_back(v);
    for (size_t head = 0; head < queue.size(); ++head)
        for (int e : g.in_edges[queue[head]]) {
            int u = g.edges[e].src;
            if (!c.critical_nodes[u]) {
                c.critical_nodes[u] = true;
                queue.push_back(u);
            }
        }
    c.critical_edges.resize(g.edges.size());
    for (size_t e = 0; e < g.edges.size(); ++e)
        c.critical_edges[e] = c.critical_nodes[g.edges[e].dst];
    return c;
}

std::string classification_report_json(const MappedNetlist &n, const CellGraph &g, const Classification &c)
{
    using nlohmann::json;
    // Critical nodes that no path from a source node reaches: these are
    // critical under the reach-a-cycle rule but would not be under a rule that
    // only admits paths starting at a primary input.
    std::vector<bool> from_source(g.num_nodes, false);
    std::vector<int> queue = g.primary_inputs();
    for (int v : queue)
        from_source[v] = true;
    for (size_t head = 0; head < queue.size(); ++head)
        for (int e : g.out_edges[queue[head]]) {
            int w = g.edges[e].dst;
            if (!from_source[w]) {
                from_source[w] = true;
                queue.push_back(w);
            }
        }
    int off_path = 0;
    for (int v = 0; v < g.num_nodes; ++v)
        off_path += c.critical_nodes[v] && !from_source[v];

    json cells = json::array();
    for (size_t i = 0; i < n.cells.size(); ++i)
        cells.push_back({{"name", n.cells[i].name},
                         {"kind", to_string(n.cells[i].kind)},
                         {"cyclic", bool(c.cyclic[i])},
                         {"critical", bool(c.critical_nodes[i])}});
    json nets = json::array();
    for (const auto &net : n.nets) {
        int sinks = 0, critical = 0;
        for (const auto &s : net.sinks) {
            if (s.pin == kClockPin)
                continue;
            ++sinks;
            critical += c.critical_nodes[s.cell];
        }
        nets.push_back({{"name", net.name}, {"sinks", sinks}, {"critical_sinks", critical}, {"critical", critical > 0}});
    }
    json summary = {
            {"nodes", g.num_nodes},
            {"edges", g.edges.size()},
            {"cyclic_nodes", c.count_cyclic()},
            {"critical_nodes", c.count_critical_nodes()},
            {"critical_edges", c.count_critical_edges()},
            {"essential_nodes", g.num_nodes},
            {"essential_edges", g.edges.size()},
            {"critical_rule", "reaches-cycle"},
            {"critical_not_on_source_path", off_path},
            {"unknown_init_flipflops", n.unknown_init_count()},
    };
    json report = {{"design", n.name}, {"summary", summary}, {"cells", cells}, {"nets", nets}};
    return report.dump(2) + "\n";
}

} // namespace scrubplan
