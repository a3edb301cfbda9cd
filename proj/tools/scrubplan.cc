// scrubplan command-line front end.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scrubplan/bitclass.h"
#include "scrubplan/blif.h"
#include "scrubplan/design_io.h"
#include "scrubplan/fabric.h"
#include "scrubplan/faultsim.h"
#include "scrubplan/graph.h"
#include "scrubplan/pipeline.h"
#include "scrubplan/reliability.h"

using namespace scrubplan;
using nlohmann::json;

namespace {

std::string read_text(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string &path, const std::string &text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

json read_json(const std::string &path)
{
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error &e) {
        throw std::runtime_error("'" + path + "' is not valid JSON: " + e.what());
    }
}

DeviceSpec load_spec(const std::string &path)
{
    if (path.empty())
        return DeviceSpec{};
    return DeviceSpec::from_json(read_json(path));
}

std::uint64_t default_seed()
{
    if (const char *env = std::getenv("SCRUBPLAN_SEED"); env && *env) {
        try {
            return std::stoull(env, nullptr, 0);
        } catch (const std::exception &) {
            throw std::runtime_error(std::string("SCRUBPLAN_SEED='") + env + "' is not an integer");
        }
    }
    return kDefaultSeed;
}

Netlist load_blif(const std::string &path)
{
    try {
        return read_blif_file(path);
    } catch (const BlifError &e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

MappedNetlist load_mapped(const std::string &path, int k) { return tech_map(load_blif(path), k); }

json netlist_stats(const Netlist &src, const MappedNetlist &m)
{
    return {{"model", src.name},
            {"inputs", src.inputs.size()},
            {"outputs", src.outputs.size()},
            {"gates", src.gates.size()},
            {"latches", src.latches.size()},
            {"nets", src.nets.size()},
            {"mapped",
             {{"luts", m.count(CellKind::Lut)},
              {"flipflops", m.count(CellKind::FlipFlop)},
              {"constants", m.count(CellKind::Const0) + m.count(CellKind::Const1)},
              {"cells", m.cells.size()},
              {"unknown_init_flipflops", m.unknown_init_count()}}}};
}

std::vector<std::pair<int, int>> select_bits(const std::vector<std::string> &spec, const FabricModel &dev,
                                             const BitClassification &bc)
{
    if (spec.empty())
        throw CLI::ValidationError("--bits", "missing bit set");
    std::string what = spec[0], arg = spec.size() > 1 ? spec[1] : "";
    if (auto sp = what.find(' '); sp != std::string::npos) {
        arg = what.substr(sp + 1);
        what = what.substr(0, sp);
    }
    if (what == "essential")
        return bc.essential.bits();
    if (what == "critical")
        return bc.critical.bits();
    std::vector<std::pair<int, int>> out;
    auto all_bits_of = [&](int column, int region) {
        for (int m = 0; m < dev.spec().frames_per_column_region; ++m) {
            int f = dev.frame_index({column, region, m});
            for (int o = 0; o < dev.spec().bits_per_frame; ++o)
                out.emplace_back(f, o);
        }
    };
    if (what == "region") {
        int col = -1, reg = -1;
        char slash = 0;
        std::istringstream is(arg);
        if (!(is >> col >> slash >> reg) || slash != '/' || col < 0 || col >= dev.total_columns() || reg < 0 ||
            reg >= dev.regions())
            throw CLI::ValidationError("--bits", "region expects COL/REG on the device, got '" + arg + "'");
        all_bits_of(col, reg);
        return out;
    }
    if (what == "all") {
        for (int c = 0; c < dev.total_columns(); ++c)
            for (int r = 0; r < dev.regions(); ++r)
                all_bits_of(c, r);
        return out;
    }
    throw CLI::ValidationError("--bits", "expected essential, critical, region COL/REG or all");
}

std::string fabric_table(const FabricModel &dev, TileLoc tile)
{
    std::string out = "resource,index,role,sub,bit,frame,offset\n";
    auto emit = [&](const char *res, int idx, const char *role, int sub, int bit, const BitAddr &b) {
        out += std::string(res) + "," + std::to_string(idx) + "," + role + "," + std::to_string(sub) + "," +
               std::to_string(bit) + "," + b.frame.str() + "," + std::to_string(b.offset) + "\n";
    };
    const auto &s = dev.spec();
    if (!dev.is_iob_column(tile.column)) {
        for (int sl = 0; sl < s.slices_per_tile; ++sl) {
            for (int l = 0; l < s.luts_per_slice; ++l)
                for (int t = 0; t < 64; ++t)
                    emit("slice", sl, "lut", l, t, dev.lut_bit(tile, sl, l, t));
            for (int f = 0; f < s.ffs_per_slice; ++f)
                emit("slice", sl, "ff", f, 0, dev.ff_bit(tile, sl, f));
        }
    } else {
        for (int p = 0; p < s.pads_per_iob_tile; ++p) {
            auto bits = dev.fmap_bits({ResourceInstance::Kind::Iob, tile, p});
            for (size_t k = 0; k < bits.size(); ++k)
                emit("iob", p, "pad", 0, int(k), bits[k]);
        }
    }
    for (int p = 0; p < dev.pip_budget(tile.column); ++p)
        emit("pip", p, "pip", 0, 0, dev.pip_bit(tile, p));
    return out;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Configuration bit classification, frame-aware floorplanning and scrubbing analysis"};
    app.require_subcommand(1);
    int lut_k = 0;

    // parse
    auto *parse = app.add_subcommand("parse", "Parse and technology-map a BLIF netlist; print statistics");
    std::string parse_in, parse_emit;
    parse->add_option("blif", parse_in, "BLIF file")->required();
    parse->add_option("--emit-blif", parse_emit, "Write the canonical BLIF rendering here");
    parse->add_option("--lut-k", lut_k, "LUT size for mapping (default: device lut_k = 6)");

    // classify
    auto *cls = app.add_subcommand("classify", "Classify cells and nets into essential and critical");
    std::string cls_in, cls_out, cls_dev;
    cls->add_option("blif", cls_in, "BLIF file")->required();
    cls->add_option("-o,--output", cls_out, "Report path (default stdout)");
    cls->add_option("--device", cls_dev, "Device spec JSON (for lut_k)");

    // run
    auto *run = app.add_subcommand("run", "Run the full pipeline and write all artifacts");
    std::string run_in, run_dev, run_out = "out", run_flow = "c";
    std::uint64_t run_seed = 0;
    PipelineOptions popt;
    run->add_option("blif", run_in, "BLIF file")->required();
    run->add_option("--device", run_dev, "Device spec JSON");
    run->add_option("--flow", run_flow, "Flow whose design and masks are written: a, b or c")
            ->check(CLI::IsMember({"a", "b", "c"}));
    auto *run_seed_opt = run->add_option("--seed", run_seed, "Placement seed (default: $SCRUBPLAN_SEED or built-in)");
    run->add_option("-o,--out", run_out, "Output directory");
    std::string run_masks;
    run->add_option("--emit-masks", run_masks, "Also write essential.mask and critical.mask to this directory");
    run->add_option("--moves-per-slice", popt.moves_per_slice, "Annealing moves per slice");
    run->add_option("--lambda", popt.lambda, "Weight of the occupied-block term in the placement cost");
    run->add_option("--t-check-ns", popt.params.t_check_ns, "Frame check time");
    run->add_option("--t-repair-e-ns", popt.params.t_repair_e_ns, "Repair time for essential upsets");
    run->add_option("--t-repair-c-ns", popt.params.t_repair_c_ns, "Repair time for critical upsets");

    // analyze
    auto *ana = app.add_subcommand("analyze", "Compute MTTR figures for scrubber types a-d");
    std::string ana_in, ana_csv = "-", ana_json;
    ana->add_option("--params", ana_in, "JSON with constants and per-design figures")->required();
    ana->add_option("--csv", ana_csv, "CSV output path (default stdout)");
    ana->add_option("--json", ana_json, "JSON output path");

    // inject
    auto *inj = app.add_subcommand("inject", "Fault-injection campaign on a placed and routed design");
    std::string inj_design, inj_out = "inject";
    std::vector<std::string> inj_bits;
    CampaignOptions copt;
    std::uint64_t inj_seed = 0;
    inj->add_option("--design", inj_design, "design.json written by run")->required();
    inj->add_option("--bits", inj_bits, "essential | critical | region COL/REG | all")->required()->expected(1, 2);
    inj->add_option("--vectors", copt.vectors, "Vectors per phase")->check(CLI::PositiveNumber);
    auto *inj_seed_opt = inj->add_option("--seed", inj_seed, "Stimulus seed");
    inj->add_option("--workers", copt.workers, "Worker threads")->check(CLI::PositiveNumber);
    inj->add_option("--repair-window", copt.repair_window, "Cycles between fault removal and phase 2");
    inj->add_option("-o,--out", inj_out, "Output directory");

    // describe-fabric
    auto *desc = app.add_subcommand("describe-fabric", "Describe the configuration bit layout");
    std::string desc_dev, desc_tile;
    desc->add_option("--device", desc_dev, "Device spec JSON");
    desc->add_option("--table", desc_tile, "Emit the full bit table of tile COL,ROW as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*parse) {
            Netlist src = load_blif(parse_in);
            MappedNetlist m = tech_map(src, lut_k ? lut_k : DeviceSpec{}.lut_k);
            std::cout << netlist_stats(src, m).dump(2) << "\n";
            if (!parse_emit.empty())
                write_text(parse_emit, write_blif(src));
        } else if (*cls) {
            MappedNetlist m = load_mapped(cls_in, load_spec(cls_dev).lut_k);
            CellGraph g = build_graph(m);
            write_text(cls_out, classification_report_json(m, g, classify(g)));
        } else if (*run) {
            popt.seed = run_seed_opt->count() ? run_seed : default_seed();
            DeviceSpec spec = load_spec(run_dev);
            MappedNetlist m = load_mapped(run_in, spec.lut_k);
            PipelineResult r = run_pipeline(m, spec, popt);
            write_artifacts(run_out, r, run_flow[0]);
            if (!run_masks.empty()) {
                const FlowResult &f = r.flow(run_flow[0]);
                const FabricModel dev(spec);
                std::filesystem::create_directories(run_masks);
                const std::filesystem::path dir(run_masks);
                write_text((dir / "essential.mask").string(), write_mask(dev, f.bits, MaskKind::Essential));
                write_text((dir / "critical.mask").string(), write_mask(dev, f.bits, MaskKind::Critical));
            }
            const auto &c = r.c.report;
            std::cerr << m.name << ": N_fr,used a=" << r.a.report.n_fr_used << " b=" << r.b.report.n_fr_used
                      << " c=" << c.n_fr_used << ", n_e=" << r.figures.n_e << " n_c=" << r.figures.n_c << "\n";
        } else if (*ana) {
            ReliabilityInput in = parse_reliability_input(read_json(ana_in));
            auto rows = mttr_table(in.rows, in.params);
            write_text(ana_csv, mttr_table_csv(rows));
            if (!ana_json.empty())
                write_text(ana_json, mttr_table_json(rows, in.params).dump(2) + "\n");
        } else if (*inj) {
            copt.seed = inj_seed_opt->count() ? inj_seed : default_seed();
            PlacedDesign d = design_from_json(read_json(inj_design));
            FabricModel dev(d.spec);
            CellGraph g = build_graph(d.netlist);
            Classification c = classify(g);
            BitClassification bc = classify_bits(dev, d.netlist, d.packed, d.placement, d.routing, c);
            auto bits = select_bits(inj_bits, dev, bc);
            FaultContext ctx(d);
            CampaignResult cr = run_campaign(ctx, std::move(bits), copt);
            StaticComparison cmp = compare_to_static(cr, bc);
            std::filesystem::create_directories(inj_out);
            write_text((std::filesystem::path(inj_out) / "campaign.csv").string(), campaign_csv(dev, cr));
            json summary = campaign_json(cr);
            summary["design"] = d.netlist.name;
            summary["comparison"] = comparison_json(dev, cmp);
            write_text((std::filesystem::path(inj_out) / "campaign.json").string(), summary.dump(2) + "\n");
            std::cerr << d.netlist.name << ": tested " << cr.bits.size() << " bits, fi_n_e=" << cr.fi_n_e
                      << " fi_n_c=" << cr.fi_n_c << ", violations " << cmp.essential_violations.size() << "/"
                      << cmp.critical_violations.size() << "\n";
            if (!cmp.essential_violations.empty() || !cmp.critical_violations.empty())
                return 2;
        } else if (*desc) {
            FabricModel dev(load_spec(desc_dev));
            if (desc_tile.empty()) {
                std::cout << describe_fabric(dev).dump(2) << "\n";
            } else {
                int col = -1, row = -1;
                char comma = 0;
                std::istringstream is(desc_tile);
                if (!(is >> col >> comma >> row) || comma != ',' || !dev.on_device({col, row}))
                    throw std::runtime_error("--table expects COL,ROW of an on-device tile");
                std::cout << fabric_table(dev, {col, row});
            }
        }
    } catch (const CLI::Error &e) {
        return app.exit(e);
    } catch (const std::exception &e) {
        std::cerr << "scrubplan: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
