#include <doctest.h>

#include <json.hpp>

#include "scrubplan/graph.h"
#include "support.h"

using namespace scrubplan;

namespace {

CellGraph graph_of(int n, std::vector<std::pair<int, int>> edges)
{
    testsupport::RandomGraph g{n, std::move(edges)};
    return testsupport::to_cell_graph(g);
}

std::vector<bool> flags(int n, std::initializer_list<int> set)
{
    std::vector<bool> v(n, false);
    for (int i : set)
        v[i] = true;
    return v;
}

MappedNetlist mapped(const std::string &blif) { return tech_map(parse_blif(blif), 6); }

} // namespace

TEST_SUITE("graph")
{
    TEST_CASE("IN -> LUT -> OUT chain")
    {
        auto m = mapped(".model c\n.inputs a\n.outputs y\n.names a y\n0 1\n.end\n");
        auto g = build_graph(m);
        CHECK(g.num_nodes == 3);
        CHECK(g.edges.size() == 2);
        REQUIRE(g.primary_inputs().size() == 1);
        REQUIRE(g.primary_outputs().size() == 1);
        CHECK(m.cells[g.primary_inputs()[0]].kind == CellKind::InputPad);
        CHECK(m.cells[g.primary_outputs()[0]].kind == CellKind::OutputPad);
    }

    TEST_CASE("net with three sinks gives three edges from the driver")
    {
        auto m = mapped(".model f\n.inputs a b\n.outputs x y z\n"
                        ".names a b x\n11 1\n.names a b y\n10 1\n.names a b z\n01 1\n.end\n");
        auto g = build_graph(m);
        const CellId a = m.inputs[0];
        CHECK(g.out_edges[a].size() == 3);
    }

    TEST_CASE("clock pin produces no edge")
    {
        auto m = mapped(".model r\n.inputs d clk\n.outputs q\n.latch d q re clk 0\n.end\n");
        auto g = build_graph(m);
        for (CellId c = 0; c < CellId(m.cells.size()); ++c)
            if (m.cells[c].kind == CellKind::FlipFlop)
                CHECK(g.in_edges[c].size() == 1);
        CHECK(g.out_edges[m.inputs[1]].empty());
    }

    TEST_CASE("acyclic graph has empty K")
    {
        auto g = graph_of(4, {{0, 1}, {1, 2}, {0, 3}, {3, 2}});
        auto c = classify(g);
        CHECK(c.count_cyclic() == 0);
        CHECK(c.count_critical_nodes() == 0);
        CHECK(c.count_critical_edges() == 0);
    }

    TEST_CASE("FF and LUT in a loop are both cyclic")
    {
        auto m = mapped(".model t\n.inputs en\n.outputs q\n.latch d q 0\n.names en q d\n01 1\n10 1\n.end\n");
        auto g = build_graph(m);
        auto c = classify(g);
        for (CellId i = 0; i < CellId(m.cells.size()); ++i) {
            const bool in_loop = m.cells[i].kind == CellKind::FlipFlop || m.cells[i].kind == CellKind::Lut;
            CHECK(c.cyclic[i] == in_loop);
        }
        // The enable pad feeds the loop, the output pad does not.
        CHECK(c.critical_nodes[m.inputs[0]]);
        CHECK_FALSE(c.critical_nodes[m.outputs[0]]);
    }

    TEST_CASE("feed-forward into a cycle")
    {
        // 0=PI, 1=a, 2=b, 3=c, 4=d, 5=PO; b <-> c cycle
        auto g = graph_of(6, {{0, 1}, {1, 2}, {2, 3}, {3, 2}, {3, 4}, {4, 5}});
        auto c = classify(g);
        CHECK(c.cyclic == flags(6, {2, 3}));
        CHECK(c.critical_nodes == flags(6, {0, 1, 2, 3}));
        for (size_t e = 0; e < g.edges.size(); ++e) {
            const bool into_critical = c.critical_nodes[g.edges[e].dst];
            CHECK(c.critical_edges[e] == into_critical);
        }
    }

    TEST_CASE("self loop is a cycle")
    {
        auto g = graph_of(3, {{0, 1}, {1, 1}, {1, 2}});
        CHECK(find_cyclic_set(g) == flags(3, {1}));
    }

    TEST_CASE("pure feed-forward pipeline has no critical nodes")
    {
        auto m = mapped(".model p\n.inputs a b\n.outputs y\n.latch a q1 0\n.latch b q2 0\n"
                        ".names q1 q2 x\n11 1\n.latch x y0 0\n.names y0 y\n1 1\n.end\n");
        auto c = classify(build_graph(m));
        CHECK(c.count_critical_nodes() == 0);
    }

    TEST_CASE("random digraphs match brute-force enumeration")
    {
        Prng rng(2024);
        for (int trial = 0; trial < 1000; ++trial) {
            auto rg = testsupport::random_graph(rng, 12);
            auto g = testsupport::to_cell_graph(rg);
            auto c = classify(g);
            REQUIRE(c.cyclic == testsupport::brute_force_cyclic(rg.n, rg.edges));
            REQUIRE(c.critical_nodes == testsupport::brute_force_critical(rg.n, rg.edges));
            for (size_t e = 0; e < g.edges.size(); ++e)
                REQUIRE(c.critical_edges[e] == bool(c.critical_nodes[g.edges[e].dst]));
        }
    }

    TEST_CASE("subset chain and monotonicity under edge insertion")
    {
        Prng rng(99);
        for (int trial = 0; trial < 300; ++trial) {
            auto rg = testsupport::random_graph(rng, 12);
            auto before = classify(testsupport::to_cell_graph(rg));
            for (int v = 0; v < rg.n; ++v)
                if (before.cyclic[v])
                    REQUIRE(before.critical_nodes[v]);
            const int a = int(rng.below(rg.n)), b = int(rng.below(rg.n));
            if (std::find(rg.edges.begin(), rg.edges.end(), std::pair{a, b}) != rg.edges.end())
                continue;
            rg.edges.push_back({a, b});
            auto after = classify(testsupport::to_cell_graph(rg));
            for (int v = 0; v < rg.n; ++v)
                if (before.critical_nodes[v])
                    REQUIRE(after.critical_nodes[v]);
        }
    }

    TEST_CASE("every FF in a benchmark cycle is critical, combinational circuits have none")
    {
        for (const auto &name : testsupport::benchmark_names()) {
            CAPTURE(name);
            auto m = tech_map(read_blif_file(testsupport::source_path("benchmarks/" + name + ".blif")), 6);
            auto c = classify(build_graph(m));
            if (m.count(CellKind::FlipFlop) == 0)
                CHECK(c.count_critical_nodes() == 0);
            for (CellId i = 0; i < CellId(m.cells.size()); ++i)
                if (c.cyclic[i])
                    CHECK(c.critical_nodes[i]);
        }
    }

    TEST_CASE("classification report counts agree")
    {
        auto m = mapped(".model t\n.inputs en\n.outputs q\n.latch d q 0\n.names en q d\n01 1\n10 1\n.end\n");
        auto g = build_graph(m);
        auto c = classify(g);
        auto j = nlohmann::json::parse(classification_report_json(m, g, c));
        CHECK(j["summary"]["nodes"] == g.num_nodes);
        CHECK(j["summary"]["cyclic_nodes"] == c.count_cyclic());
        CHECK(j["summary"]["critical_nodes"] == c.count_critical_nodes());
        CHECK(j["summary"]["critical_edges"] == c.count_critical_edges());
        CHECK(j["cells"].size() == m.cells.size());
    }
}
