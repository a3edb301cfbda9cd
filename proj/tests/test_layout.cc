#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "pipeline_cache.h"
#include "scrubplan/layout.h"

using namespace scrubplan;
using testsupport::pipeline_for;

namespace {

struct Design
{
    MappedNetlist n;
    Classification cls;
};

Design design_of(const std::string &blif)
{
    Design d;
    d.n = tech_map(parse_blif(blif), 6);
    d.cls = classify(build_graph(d.n));
    return d;
}

CellId driver_of(const MappedNetlist &n, const std::string &net)
{
    for (const auto &x : n.nets)
        if (x.name == net)
            return x.driver;
    FAIL("no net " << net);
    return -1;
}

const NetRoute *route_of(const MappedNetlist &n, const Routing &r, const std::string &net)
{
    for (const auto &x : r.nets)
        if (n.nets[x.net].name == net)
            return &x;
    return nullptr;
}

// Sum of L1 distances from block centres to the pad centroid.
double window_cost(const FabricModel &dev, int c0, int r0, int w, int h, const std::vector<TileLoc> &pads)
{
    double cx = 0, cy = 0;
    for (const auto &p : pads) {
        cx += p.column;
        cy += p.row;
    }
    cx /= double(pads.size());
    cy /= double(pads.size());
    const int rh = dev.spec().region_height;
    double cost = 0;
    for (int c = c0; c < c0 + w; ++c)
        for (int r = r0; r < r0 + h; ++r)
            cost += std::abs(c - cx) + std::abs(r * rh + (rh - 1) / 2.0 - cy);
    return cost;
}

double mask_cost(const FabricModel &dev, const RegionMask &m, const std::vector<TileLoc> &pads)
{
    double cost = 0;
    for (const auto &b : m.blocks)
        cost += window_cost(dev, b.column, b.region, 1, 1, pads);
    return cost;
}

std::vector<TileLoc> pad_tiles(const std::vector<PadSite> &pads)
{
    std::vector<TileLoc> out;
    for (const auto &p : pads)
        if (p.tile.column >= 0)
            out.push_back(p.tile);
    return out;
}

// Structural checks every routed design must satisfy.
void check_routing(const FabricModel &dev, const PlacedDesign &d)
{
    const auto tiles = d.placement.cell_tiles(d.netlist, d.packed);
    std::set<std::pair<TileLoc, int>> used;
    std::set<TileLoc> corridor(d.corridor.begin(), d.corridor.end());
    std::set<TileLoc> pad_set;
    for (const auto &p : d.placement.pads)
        if (p.tile.column >= 0)
            pad_set.insert(p.tile);
    for (const auto &r : d.routing.nets) {
        REQUIRE(!r.nodes.empty());
        CHECK(r.nodes[0].parent == -1);
        CHECK(r.nodes[0].tile == tiles[d.netlist.nets[r.net].driver]);
        for (size_t i = 0; i < r.nodes.size(); ++i) {
            const auto &node = r.nodes[i];
            REQUIRE(dev.on_device(node.tile));
            REQUIRE(node.pip >= 0);
            REQUIRE(node.pip < dev.pip_budget(node.tile.column));
            REQUIRE_MESSAGE(used.insert({node.tile, node.pip}).second, "PIP reused");
            if (i > 0) {
                REQUIRE(node.parent >= 0);
                REQUIRE(node.parent < int(i));
                const auto &pt = r.nodes[node.parent].tile;
                REQUIRE(std::abs(pt.column - node.tile.column) + std::abs(pt.row - node.tile.row) == 1);
            }
            if (d.mask && d.flow == 'c')
                REQUIRE((d.mask->contains_tile(dev, node.tile) || corridor.count(node.tile) ||
                         pad_set.count(node.tile)));
        }
        int data_sinks = 0;
        for (const auto &s : d.netlist.nets[r.net].sinks)
            data_sinks += s.pin != kClockPin;
        CHECK(int(r.sinks.size()) == data_sinks);
        for (const auto &[pin, node] : r.sinks)
            CHECK(r.nodes.at(node).tile == tiles[pin.cell]);
    }
}

} // namespace

TEST_SUITE("layout")
{
    TEST_CASE("one LUT and its flip-flop share one slice")
    {
        auto d = design_of(".model r\n.inputs a b\n.outputs q\n.names a b x\n11 1\n.latch x q 0\n.end\n");
        auto packed = pack(d.n, d.cls, FabricModel{DeviceSpec{}});
        REQUIRE(packed.size() == 1);
        CHECK(packed[0].luts.size() == 1);
        CHECK(packed[0].ffs.size() == 1);
    }

    TEST_CASE("nine unrelated LUTs need three slices")
    {
        std::string blif = ".model u\n.inputs";
        for (int i = 0; i < 18; ++i)
            blif += " i" + std::to_string(i);
        blif += "\n.outputs";
        for (int i = 0; i < 9; ++i)
            blif += " y" + std::to_string(i);
        blif += "\n";
        for (int i = 0; i < 9; ++i)
            blif += ".names i" + std::to_string(2 * i) + " i" + std::to_string(2 * i + 1) + " y" + std::to_string(i) +
                    "\n11 1\n";
        blif += ".end\n";
        auto d = design_of(blif);
        CHECK(pack(d.n, d.cls, FabricModel{DeviceSpec{}}).size() == 3);
    }

    TEST_CASE("slice counts respect the arithmetic lower bound")
    {
        FabricModel dev{DeviceSpec{}};
        for (const auto &name : testsupport::benchmark_names()) {
            CAPTURE(name);
            auto n = testsupport::load_benchmark(name);
            auto cls = classify(build_graph(n));
            auto packed = pack(n, cls, dev);
            const int luts = n.count(CellKind::Lut) + n.count(CellKind::Const0) + n.count(CellKind::Const1);
            const int ffs = n.count(CellKind::FlipFlop);
            const int bound = std::max((luts + 3) / 4, (ffs + 7) / 8);
            CHECK(int(packed.size()) >= bound);
            std::set<CellId> seen;
            int placed = 0;
            for (const auto &s : packed) {
                CHECK(s.luts.size() <= 4);
                CHECK(s.ffs.size() <= 8);
                bool crit = false;
                for (CellId c : s.luts) {
                    CHECK(seen.insert(c).second);
                    crit = crit || cls.critical_nodes[c];
                }
                for (CellId c : s.ffs) {
                    CHECK(seen.insert(c).second);
                    crit = crit || cls.critical_nodes[c];
                }
                CHECK(s.critical == crit);
                placed += int(s.luts.size() + s.ffs.size());
            }
            CHECK(placed == luts + ffs);
        }
    }

    TEST_CASE("one-block demand picks the block nearest the pads")
    {
        FabricModel dev{DeviceSpec{}};
        std::vector<TileLoc> left = {{0, 10}, {0, 12}, {0, 20}};
        auto m = choose_region(dev, 1, left);
        REQUIRE(m.blocks.size() == 1);
        CHECK(m.blocks[0] == Block{1, 0});
        std::vector<TileLoc> right = {{21, 70}, {21, 60}};
        m = choose_region(dev, 20, right);
        REQUIRE(m.blocks.size() == 1);
        CHECK(m.blocks[0] == Block{20, 1});
    }

    TEST_CASE("multi-block windows are optimal against exhaustive enumeration")
    {
        FabricModel dev{testsupport::bench_device()};
        const int cap = dev.slices_per_block();
        Prng rng(5);
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<TileLoc> pads;
            const int np = 1 + int(rng.below(8));
            for (int i = 0; i < np; ++i)
                pads.push_back({rng.below(2) ? 0 : dev.total_columns() - 1, int(rng.below(dev.spec().rows))});
            const int demand = 1 + int(rng.below(6 * cap));
            auto m = choose_region(dev, demand, pads);
            const int need = int(std::ceil(demand * 1.1 / cap - 1e-9));
            CAPTURE(demand);
            // Minimal rectangle area covering the need.
            int area = std::numeric_limits<int>::max();
            for (int w = 1; w <= dev.spec().clb_columns; ++w)
                for (int h = 1; h <= dev.regions(); ++h)
                    if (w * h >= need)
                        area = std::min(area, w * h);
            REQUIRE(int(m.blocks.size()) == area);
            REQUIRE(m.blocks.size() * cap >= demand * 1.1 - 1e-9);
            double best = std::numeric_limits<double>::max();
            for (int w = 1; w <= dev.spec().clb_columns; ++w) {
                if (area % w || area / w > dev.regions())
                    continue;
                const int h = area / w;
                for (int c0 = 1; c0 + w - 1 <= dev.spec().clb_columns; ++c0)
                    for (int r0 = 0; r0 + h <= dev.regions(); ++r0)
                        best = std::min(best, window_cost(dev, c0, r0, w, h, pads));
            }
            CHECK(mask_cost(dev, m, pads) == doctest::Approx(best));
        }
    }

    TEST_CASE("three-block demand is a contiguous minimum-distance triple")
    {
        FabricModel dev{testsupport::bench_device()};
        std::vector<TileLoc> pads = {{0, 100}, {0, 130}, {41, 115}};
        auto m = choose_region(dev, 200, pads);
        REQUIRE(m.blocks.size() == 3);
        const bool same_col = m.blocks[0].column == m.blocks[2].column && m.blocks[2].region - m.blocks[0].region == 2;
        const bool same_reg = m.blocks[0].region == m.blocks[2].region && m.blocks[2].column - m.blocks[0].column == 2;
        CHECK((same_col || same_reg));
        double best = std::numeric_limits<double>::max();
        for (int c = 1; c <= 40; ++c)
            for (int r = 0; r < 6; ++r) {
                if (c + 2 <= 40)
                    best = std::min(best, window_cost(dev, c, r, 3, 1, pads));
                if (r + 2 < 6)
                    best = std::min(best, window_cost(dev, c, r, 1, 3, pads));
            }
        CHECK(mask_cost(dev, m, pads) == doctest::Approx(best));
    }

    TEST_CASE("oversized demand throws")
    {
        FabricModel dev{DeviceSpec{}};
        CHECK_THROWS_AS(choose_region(dev, dev.total_slice_sites() + 1, {}), CapacityExceeded);
    }

    TEST_CASE("pads spread over the IOB columns")
    {
        FabricModel dev{DeviceSpec{}};
        auto n = testsupport::load_benchmark("c432");
        auto pads = assign_pads(n, dev);
        std::set<PadSite> sites;
        for (CellId c : n.inputs) {
            CHECK(pads[c].tile.column == 0);
            CHECK(sites.insert(pads[c]).second);
        }
        for (CellId c : n.outputs) {
            CHECK(pads[c].tile.column == dev.total_columns() - 1);
            CHECK(sites.insert(pads[c]).second);
        }
    }

    TEST_CASE("corridor runs from pads to the mask")
    {
        FabricModel dev{DeviceSpec{}};
        RegionMask m;
        m.add({5, 1});
        auto corr = pad_corridor(dev, m, {{0, 10}});
        // Down the IOB column to row 40, then across columns 1..4.
        std::set<TileLoc> got(corr.begin(), corr.end());
        CHECK(got.count({0, 10}));
        CHECK(got.count({0, 40}));
        for (int c = 1; c <= 4; ++c)
            CHECK(got.count({c, 40}));
        CHECK(got.size() == 31 + 4);
    }

    TEST_CASE("one slice with a one-block mask stays inside it")
    {
        auto d = design_of(".model r\n.inputs a b\n.outputs q\n.names a b x\n11 1\n.latch x q 0\n.end\n");
        FabricModel dev{DeviceSpec{}};
        auto packed = pack(d.n, d.cls, dev);
        auto pads = assign_pads(d.n, dev);
        RegionMask m;
        m.add({9, 1});
        auto p = place(d.n, packed, dev, pads, &m, {});
        REQUIRE(p.slices.size() == 1);
        CHECK(m.contains_tile(dev, p.slices[0].tile));
    }

    TEST_CASE("annealing does not lengthen wires relative to its start")
    {
        std::string blif = ".model c\n.inputs a\n.outputs y\n.names a n0\n0 1\n";
        for (int i = 1; i < 8; ++i)
            blif += ".names n" + std::to_string(i - 1) + " a n" + std::to_string(i) + "\n10 1\n";
        blif += ".names n7 y\n1 1\n.end\n";
        auto d = design_of(blif);
        FabricModel dev{DeviceSpec{}};
        auto packed = pack(d.n, d.cls, dev);
        auto pads = assign_pads(d.n, dev);
        for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
            PlaceOptions po;
            po.seed = seed;
            po.spread_initial = true;
            po.lambda = 0;
            po.moves_per_slice = 0;
            auto start = place(d.n, packed, dev, pads, nullptr, po);
            po.moves_per_slice = 200;
            auto p = place(d.n, packed, dev, pads, nullptr, po);
            REQUIRE(p.slices.size() >= 2);
            CHECK(placement_wirelength(d.n, packed, p) <= placement_wirelength(d.n, packed, start));
        }
    }

    TEST_CASE("placement is deterministic for a fixed seed")
    {
        // 80 LUTs wired as a mesh.
        std::string blif = ".model mesh\n.inputs a b\n.outputs y\n";
        const int rows = 20, cols = 4;
        auto name = [](int r, int c) { return "m" + std::to_string(r) + "_" + std::to_string(c); };
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                const std::string up = r ? name(r - 1, c) : "a";
                const std::string left = c ? name(r, c - 1) : "b";
                blif += ".names " + up + " " + left + " " + name(r, c) + "\n10 1\n01 1\n";
            }
        blif += ".names " + name(rows - 1, cols - 1) + " y\n1 1\n.end\n";
        auto d = design_of(blif);
        FabricModel dev{DeviceSpec{}};
        auto packed = pack(d.n, d.cls, dev);
        CHECK(packed.size() == 21); // 80 mesh LUTs plus the output buffer
        auto pads = assign_pads(d.n, dev);
        auto p1 = place(d.n, packed, dev, pads, nullptr, {});
        auto p2 = place(d.n, packed, dev, pads, nullptr, {});
        CHECK(p1.slices == p2.slices);
        std::set<SliceSite> sites(p1.slices.begin(), p1.slices.end());
        CHECK(sites.size() == p1.slices.size());
    }
}

TEST_SUITE("layout")
{
    struct TwoLuts
    {
        Design d;
        CellId x, y;
        std::vector<PackedSlice> packed;
        std::vector<PadSite> pads;
    };

    TwoLuts two_luts(const FabricModel &dev)
    {
        TwoLuts t{design_of(".model r\n.inputs a b\n.outputs y\n.names a b x\n11 1\n.names x b y\n10 1\n.end\n"), 0,
                  0, {}, {}};
        t.x = driver_of(t.d.n, "x");
        t.y = driver_of(t.d.n, "y");
        t.packed = {PackedSlice{{t.x}, {}, false}, PackedSlice{{t.y}, {}, false}};
        t.pads = assign_pads(t.d.n, dev);
        return t;
    }

    TEST_CASE("same-tile net takes one local PIP")
    {
        FabricModel dev{DeviceSpec{}};
        auto t = two_luts(dev);
        Placement p{{{{3, 10}, 0}, {{3, 10}, 1}}, t.pads};
        auto r = route(t.d.n, t.packed, dev, p, nullptr, {});
        const NetRoute *x = route_of(t.d.n, r, "x");
        REQUIRE(x);
        CHECK(x->nodes.size() == 1);
    }

    TEST_CASE("three hops along a row take four PIPs")
    {
        FabricModel dev{DeviceSpec{}};
        auto t = two_luts(dev);
        Placement p{{{{2, 10}, 0}, {{5, 10}, 0}}, t.pads};
        auto r = route(t.d.n, t.packed, dev, p, nullptr, {});
        const NetRoute *x = route_of(t.d.n, r, "x");
        REQUIRE(x);
        CHECK(x->nodes.size() == 4);
        PlacedDesign pd;
        pd.netlist = t.d.n;
        pd.packed = t.packed;
        pd.placement = p;
        pd.routing = r;
        pd.flow = 'a';
        check_routing(dev, pd);
    }

    TEST_CASE("mask without the connecting columns is unroutable")
    {
        FabricModel dev{DeviceSpec{}};
        auto t = two_luts(dev);
        Placement p{{{{2, 10}, 0}, {{5, 10}, 0}}, t.pads};
        RegionMask m;
        m.add({2, 0});
        m.add({5, 0});
        const auto corridor = pad_corridor(dev, m, pad_tiles(t.pads));
        CHECK_THROWS_AS(route(t.d.n, t.packed, dev, p, &m, corridor), Unroutable);
    }

    TEST_CASE("benchmark layouts satisfy placement and routing invariants")
    {
        for (const auto &name : testsupport::small_benchmarks()) {
            CAPTURE(name);
            const auto &r = pipeline_for(name);
            FabricModel dev{r.a.design.spec};
            for (char f : {'a', 'b', 'c'}) {
                CAPTURE(f);
                const auto &d = r.flow(f).design;
                std::set<SliceSite> sites;
                for (const auto &s : d.placement.slices) {
                    CHECK(sites.insert(s).second);
                    CHECK_FALSE(dev.is_iob_column(s.tile.column));
                    if (d.mask)
                        CHECK(d.mask->contains_tile(dev, s.tile));
                }
                check_routing(dev, d);
            }
            CHECK(r.b.design.placement.slices == r.c.design.placement.slices);
        }
    }

    TEST_CASE("pipeline is deterministic")
    {
        auto n = testsupport::load_benchmark("s27");
        auto a = run_pipeline(n, testsupport::bench_device(), {});
        auto b = run_pipeline(n, testsupport::bench_device(), {});
        for (char f : {'a', 'b', 'c'}) {
            CHECK(design_to_json(a.flow(f).design) == design_to_json(b.flow(f).design));
            CHECK(a.flow(f).bits.essential == b.flow(f).bits.essential);
        }
    }

    TEST_CASE("adjacent block grows the mask")
    {
        FabricModel dev{DeviceSpec{}};
        RegionMask m;
        m.add({1, 0});
        auto b = adjacent_block(dev, m);
        REQUIRE(b);
        CHECK_FALSE(m.contains(b->column, b->region));
        CHECK(std::abs(b->column - 1) + b->region == 1);
        CHECK_FALSE(adjacent_block(dev, RegionMask{}).has_value());
    }
}
