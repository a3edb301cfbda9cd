// Directed cell graph and essential/critical classification.
//
// A node is critical when it lies on a directed cycle or has a directed path
// into one; every net feeding a critical node is critical as well. All nodes
// and edges of a design are essential.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scrubplan/mapped_netlist.h"

namespace scrubplan {

struct CellGraph
{
    int num_nodes = 0;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> out_edges; // node -> edge indices
    std::vector<std::vector<int>> in_edges;

    // Nodes without in-edges / without out-edges.
    std::vector<int> primary_inputs() const;
    std::vector<int> primary_outputs() const;

    // Builds a graph from raw edges (used by tests on synthetic graphs).
    static CellGraph from_edges(int num_nodes, std::vector<Edge> edges);
};

CellGraph build_graph(const MappedNetlist &n);

// Nodes lying on at least one directed cycle: members of strongly connected
// components of size >= 2 plus self-looping nodes.
std::vector<bool> find_cyclic_set(const CellGraph &g);

struct Classification
{
    std::vector<bool> cyclic;         // K
    std::vector<bool> critical_nodes; // K plus every node reaching K
    std::vector<bool> critical_edges; // parallel to CellGraph::edges

    int count_cyclic() const;
    int count_critical_nodes() const;
    int count_critical_edges() const;
};

Classification classify(const CellGraph &g);

// JSON report: per-cell and per-net flags plus summary counts.
std::string classification_report_json(const MappedNetlist &n, const CellGraph &g, const Classification &c);

} // namespace scrubplan
