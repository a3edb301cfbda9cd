// Test helpers and independent oracles. Nothing here calls into the code
// paths it is used to check.
#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scrubplan/blif.h"
#include "scrubplan/graph.h"
#include "scrubplan/prng.h"

namespace testsupport {

inline std::string source_path(const std::string &rel) { return std::string(SCRUBPLAN_SOURCE_DIR) + "/" + rel; }

inline std::string slurp(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline const std::vector<std::string> &benchmark_names()
{
    static const std::vector<std::string> names = {"c17",   "c432",   "c499",   "c880",    "c1908",
                                                   "s27",   "s13207", "s38417", "s38584.1"};
    return names;
}

// Cycle interpreter straight over the unmapped covers. Each cycle settles
// the gates by memoised recursion, samples outputs, then loads latches.
class CoverInterpreter
{
  public:
    explicit CoverInterpreter(const scrubplan::Netlist &n) : n_(n)
    {
        for (size_t g = 0; g < n.gates.size(); ++g)
            gate_of_[n.gates[g].output] = int(g);
        for (size_t l = 0; l < n.latches.size(); ++l)
            latch_of_[n.latches[l].output] = int(l);
        state_.resize(n.latches.size());
        reset();
    }

    void reset()
    {
        for (size_t l = 0; l < n_.latches.size(); ++l)
            state_[l] = n_.latches[l].init == 1;
    }

    std::vector<std::uint8_t> step(const std::vector<std::uint8_t> &in)
    {
        values_.clear();
        for (size_t i = 0; i < n_.inputs.size(); ++i)
            values_[n_.inputs[i]] = in[i] != 0;
        std::vector<std::uint8_t> out;
        for (const auto &o : n_.outputs)
            out.push_back(value(o));
        std::vector<bool> next(n_.latches.size());
        for (size_t l = 0; l < n_.latches.size(); ++l)
            next[l] = value(n_.latches[l].input);
        state_ = next;
        return out;
    }

  private:
    bool value(const std::string &net)
    {
        if (auto it = values_.find(net); it != values_.end())
            return it->second;
        bool v = false;
        if (auto l = latch_of_.find(net); l != latch_of_.end()) {
            v = state_[l->second];
        } else {
            const auto &g = n_.gates.at(gate_of_.at(net));
            v = cover_value(g);
        }
        values_[net] = v;
        return v;
    }

    bool cover_value(const scrubplan::SopGate &g)
    {
        if (g.cover.empty())
            return false;
        bool any = false;
        for (const auto &row : g.cover) {
            bool match = true;
            for (size_t i = 0; i < row.cube.size() && match; ++i)
                if (row.cube[i] != '-')
                    match = value(g.inputs[i]) == (row.cube[i] == '1');
            if (match) {
                any = true;
                break;
            }
        }
        return g.cover.front().value ? any : !any;
    }

    const scrubplan::Netlist &n_;
    std::map<std::string, int> gate_of_, latch_of_;
    std::vector<bool> state_;
    std::map<std::string, bool> values_;
};

// Brute-force cycle membership: enumerate every simple cycle by DFS from its
// smallest node and mark the nodes on it.
inline std::vector<bool> brute_force_cyclic(int n, const std::vector<std::pair<int, int>> &edges)
{
    std::vector<std::set<int>> adj(n);
    for (auto [a, b] : edges)
        adj[a].insert(b);
    std::vector<bool> on_cycle(n, false);
    std::vector<int> path;
    std::vector<bool> in_path(n, false);
    std::function<void(int, int)> dfs = [&](int start, int v) {
        for (int w : adj[v]) {
            if (w == start) {
                for (int p : path)
                    on_cycle[p] = true;
            } else if (w > start && !in_path[w]) {
                in_path[w] = true;
                path.push_back(w);
                dfs(start, w);
                path.pop_back();
                in_path[w] = false;
            }
        }
    };
    for (int s = 0; s < n; ++s) {
        path = {s};
        in_path.assign(n, false);
        in_path[s] = true;
        dfs(s, s);
    }
    return on_cycle;
}

// Nodes with a directed path (possibly empty) into a cycle node.
inline std::vector<bool> brute_force_critical(int n, const std::vector<std::pair<int, int>> &edges)
{
    const auto cyc = brute_force_cyclic(n, edges);
    std::vector<bool> crit(n, false);
    for (int s = 0; s < n; ++s) {
        std::vector<bool> seen(n, false);
        std::vector<int> stack = {s};
        seen[s] = true;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            if (cyc[v]) {
                crit[s] = true;
                break;
            }
            for (auto [a, b] : edges)
                if (a == v && !seen[b]) {
                    seen[b] = true;
                    stack.push_back(b);
                }
        }
    }
    return crit;
}

struct RandomGraph
{
    int n = 0;
    std::vector<std::pair<int, int>> edges;
};

// Random digraph on 1..max_nodes nodes, self loops allowed, no parallel edges.
inline RandomGraph random_graph(scrubplan::Prng &rng, int max_nodes)
{
    RandomGraph g;
    g.n = 1 + int(rng.below(max_nodes));
    const double density = 0.05 + 0.25 * rng.unit();
    for (int a = 0; a < g.n; ++a)
        for (int b = 0; b < g.n; ++b)
            if (rng.unit() < density)
                g.edges.push_back({a, b});
    return g;
}

inline scrubplan::CellGraph to_cell_graph(const RandomGraph &g)
{
    std::vector<scrubplan::Edge> e;
    for (auto [a, b] : g.edges)
        e.push_back({a, b, 0});
    return scrubplan::CellGraph::from_edges(g.n, e);
}

} // namespace testsupport
