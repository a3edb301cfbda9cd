#include "scrubplan/pipeline.h"

#include <cstdio>
#include <fstream>

namespace scrubplan {

namespace {

std::vector<TileLoc> pad_tiles(const std::vector<PadSite> &pads)
{
    std::vector<TileLoc> out;
    for (const auto &p : pads)
        if (p.tile.column >= 0)
            out.push_back(p.tile);
    return out;
}

void finish_flow(FlowResult &f, const FabricModel &dev, const Classification &cls)
{
    const PlacedDesign &d = f.design;
    f.bits = classify_bits(dev, d.netlist, d.packed, d.placement, d.routing, cls);
    f.report = frame_report(dev, d.packed, d.placement, f.bits, d.mask ? &*d.mask : nullptr);
    f.wirelength = placement_wirelength(d.netlist, d.packed, d.placement);
}

void write_file(const std::filesystem::path &p, const std::string &text)
{
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out)
        throw std::runtime_error("error writing " + p.string());
}

std::string pct1(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

} // namespace

PipelineResult run_pipeline(const MappedNetlist &n, const DeviceSpec &spec, const PipelineOptions &opt)
{
    const FabricModel dev(spec);
    PipelineResult r;
    r.graph = build_graph(n);
    r.classification = classify(r.graph);

    const auto packed = pack(n, r.classification, dev);
    const auto pads = assign_pads(n, dev);
    const auto ptiles = pad_tiles(pads);

    auto base = [&](char flow) {
        PlacedDesign d;
        d.spec = spec;
        d.netlist = n;
        d.packed = packed;
        d.flow = flow;
        d.seed = opt.seed;
        return d;
    };

    // a: no constraints, slices start spread over the device.
    {
        PlacedDesign d = base('a');
        PlaceOptions po{opt.seed, 0.0, opt.moves_per_slice, true};
        d.placement = place(n, packed, dev, pads, nullptr, po);
        d.routing = route(n, packed, dev, d.placement, nullptr, {});
        r.a.design = std::move(d);
        finish_flow(r.a, dev, r.classification);
    }

    // b and c share the region and the placement.
    const RegionMask mask = choose_region(dev, int(packed.size()), ptiles, opt.region_slack);
    PlaceOptions po{opt.seed, opt.lambda, opt.moves_per_slice, false};
    const Placement placement = place(n, packed, dev, pads, &mask, po);
    {
        PlacedDesign d = base('b');
        d.placement = placement;
        d.mask = mask;
        d.routing = route(n, packed, dev, placement, nullptr, {});
        r.b.design = std::move(d);
        finish_flow(r.b, dev, r.classification);
    }
    {
        PlacedDesign d = base('c');
        d.placement = placement;
        RegionMask m = mask;
        for (;;) {
            d.corridor = pad_corridor(dev, m, ptiles);
            try {
                d.routing = route(n, packed, dev, placement, &m, d.corridor);
                break;
            } catch (const Unroutable &) {
                auto extra = adjacent_block(dev, m);
                if (!extra)
                    throw;
                m.add(*extra);
                ++r.c.mask_relaxations;
            }
        }
        d.mask = m;
        r.c.design = std::move(d);
        finish_flow(r.c, dev, r.classification);
    }

    r.params = opt.params;
    r.params.n_fr_total = dev.total_frames();
    r.figures.circuit = n.name;
    r.figures.n_e = std::int64_t(r.a.bits.n_e);
    r.figures.n_c = std::int64_t(r.a.bits.n_c);
    r.figures.n_fr_a = r.a.report.n_fr_used;
    r.figures.n_fr_b = r.b.report.n_fr_used;
    r.figures.n_fr_c = r.c.report.n_fr_used;
    r.figures.n_fr_ff = r.a.report.n_fr_ff;
    r.mttr = mttr_row(r.figures, r.params);
    return r;
}

std::string flow_comparison_csv(const std::string &circuit, const PipelineResult &r)
{
    const int a = r.a.report.n_fr_used, b = r.b.report.n_fr_used, c = r.c.report.n_fr_used;
    auto saving = [](int from, int to) { return from ? 100.0 * (from - to) / from : 0.0; };
    return "circuit,n_fr_used_a,n_fr_used_b,n_fr_used_c,delta_a_b_pct,delta_b_c_pct,n_fr_outside_mask_c\n" +
           circuit + "," + std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(c) + "," +
           pct1(saving(a, b)) + "," + pct1(saving(b, c)) + "," + std::to_string(r.c.report.n_fr_outside_mask) +
           "\n";
}

void write_artifacts(const std::filesystem::path &dir, const PipelineResult &r, char flow)
{
    std::filesystem::create_directories(dir);
    const FlowResult &f = r.flow(flow);
    const FabricModel dev(f.design.spec);
    const std::string name = f.design.netlist.name;

    write_file(dir / "design.json", design_to_json(f.design).dump(1) + "\n");
    write_file(dir / "essential.mask", write_mask(dev, f.bits, MaskKind::Essential));
    write_file(dir / "critical.mask", write_mask(dev, f.bits, MaskKind::Critical));
    write_file(dir / "frames.csv", frame_report_csv(dev, f.report));
    write_file(dir / "flows.csv", flow_comparison_csv(name, r));
    write_file(dir / "mttr.csv", mttr_table_csv({r.mttr}));

    nlohmann::json rel = {{"constants",
                           {{"t_check_ns", r.params.t_check_ns},
                            {"t_repair_e_ns", r.params.t_repair_e_ns},
                            {"t_repair_c_ns", r.params.t_repair_c_ns},
                            {"n_fr_total", r.params.n_fr_total}}},
                          {"rows",
                           {{{"circuit", r.figures.circuit},
                             {"n_e", r.figures.n_e},
                             {"n_c", r.figures.n_c},
                             {"n_fr_used", {{"a", r.figures.n_fr_a}, {"b", r.figures.n_fr_b}, {"c", r.figures.n_fr_c}}},
                             {"n_fr_ff", r.figures.n_fr_ff}}}}};
    write_file(dir / "reliability_input.json", rel.dump(2) + "\n");

    nlohmann::json flows = nlohmann::json::object();
    for (char fl : {'a', 'b', 'c'}) {
        const FlowResult &x = r.flow(fl);
        flows[std::string(1, fl)] = {{"n_fr_used", x.report.n_fr_used},
                                     {"n_fr_ff", x.report.n_fr_ff},
                                     {"n_fr_outside_mask", x.report.n_fr_outside_mask},
                                     {"n_e", x.bits.n_e},
                                     {"n_c", x.bits.n_c},
                                     {"pips", x.design.routing.pip_count()},
                                     {"wirelength", x.wirelength},
                                     {"mask_blocks", x.design.mask ? x.design.mask->blocks.size() : 0},
                                     {"mask_relaxations", x.mask_relaxations}};
    }
    const auto &cls = r.classification;
    nlohmann::json summary = {
            {"design", name},
            {"flow", std::string(1, flow)},
            {"seed", f.design.seed},
            {"device", f.design.spec.fingerprint()},
            {"cells", f.design.netlist.cells.size()},
            {"slices", f.design.packed.size()},
            {"cyclic_nodes", cls.count_cyclic()},
            {"critical_nodes", cls.count_critical_nodes()},
            {"critical_edges", cls.count_critical_edges()},
            {"unknown_init_flipflops", f.design.netlist.unknown_init_count()},
            {"flows", flows},
            {"mttr", mttr_table_json({r.mttr}, r.params)["rows"][0]},
    };
    write_file(dir / "summary.json", summary.dump(2) + "\n");
}

} // namespace scrubplan
