#include "scrubplan/design_io.h"

#include <cstdio>

namespace scrubplan {

using nlohmann::json;

namespace {

constexpr const char *kFormat = "scrubplan-design v1";

CellKind kind_from_string(const std::string &s)
{
    for (CellKind k : {CellKind::InputPad, CellKind::OutputPad, CellKind::Lut, CellKind::FlipFlop, CellKind::Const0,
                       CellKind::Const1})
        if (s == to_string(k))
            return k;
    throw DesignFormatError("unknown cell kind '" + s + "'");
}

std::string hex64(std::uint64_t v)
{
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json tile_json(TileLoc t) { return json::array({t.column, t.row}); }

TileLoc tile_from(const json &j) { return {j.at(0).get<int>(), j.at(1).get<int>()}; }

} // namespace

json design_to_json(const PlacedDesign &d)
{
    json cells = json::array();
    for (const auto &c : d.netlist.cells) {
        json jc = {{"kind", to_string(c.kind)}, {"name", c.name}, {"inputs", c.inputs}, {"output", c.output}};
        if (c.kind == CellKind::FlipFlop) {
            jc["clock"] = c.clock;
            jc["init"] = c.init;
        }
        if (c.is_lut_like())
            jc["truth"] = hex64(c.truth);
        cells.push_back(jc);
    }
    json nets = json::array();
    for (const auto &n : d.netlist.nets)
        nets.push_back(n.name);

    json packed = json::array();
    for (const auto &s : d.packed)
        packed.push_back({{"luts", s.luts}, {"ffs", s.ffs}, {"critical", s.critical}});

    json slices = json::array();
    for (const auto &s : d.placement.slices)
        slices.push_back({s.tile.column, s.tile.row, s.slice});
    json pads = json::array();
    for (size_t c = 0; c < d.placement.pads.size(); ++c)
        if (d.placement.pads[c].tile.column >= 0)
            pads.push_back({c, d.placement.pads[c].tile.column, d.placement.pads[c].tile.row, d.placement.pads[c].pad});

    json routes = json::array();
    for (const auto &r : d.routing.nets) {
        json nodes = json::array();
        for (const auto &n : r.nodes)
            nodes.push_back({n.tile.column, n.tile.row, n.pip, n.parent});
        json sinks = json::array();
        for (const auto &[pin, node] : r.sinks)
            sinks.push_back({pin.cell, pin.pin, node});
        routes.push_back({{"net", r.net}, {"nodes", nodes}, {"sinks", sinks}});
    }

    json mask = nullptr;
    if (d.mask) {
        mask = json::array();
        for (const auto &b : d.mask->blocks)
            mask.push_back({b.column, b.region});
    }
    json corridor = json::array();
    for (const auto &t : d.corridor)
        corridor.push_back(tile_json(t));

    return {{"format", kFormat},
            {"flow", std::string(1, d.flow)},
            {"seed", d.seed},
            {"device", d.spec.to_json()},
            {"netlist",
             {{"name", d.netlist.name},
              {"cells", cells},
              {"nets", nets},
              {"inputs", d.netlist.inputs},
              {"outputs", d.netlist.outputs}}},
            {"packed", packed},
            {"placement", {{"slices", slices}, {"pads", pads}}},
            {"routing", routes},
            {"mask", mask},
            {"corridor", corridor}};
}

PlacedDesign design_from_json(const json &j)
{
    try {
        if (j.at("format").get<std::string>() != kFormat)
            throw DesignFormatError("unsupported design format '" + j.at("format").get<std::string>() + "'");
        PlacedDesign d;
        const std::string flow = j.at("flow").get<std::string>();
        if (flow.size() != 1 || flow[0] < 'a' || flow[0] > 'c')
            throw DesignFormatError("flow must be a, b or c");
        d.flow = flow[0];
        d.seed = j.at("seed").get<std::uint64_t>();
        d.spec = DeviceSpec::from_json(j.at("device"));

        const json &jn = j.at("netlist");
        MappedNetlist &n = d.netlist;
        n.name = jn.at("name").get<std::string>();
        for (const auto &name : jn.at("nets"))
            n.nets.push_back(Net{name.get<std::string>(), -1, {}});
        for (const auto &jc : jn.at("cells")) {
            Cell c;
            c.kind = kind_from_string(jc.at("kind").get<std::string>());
            c.name = jc.at("name").get<std::string>();
            c.inputs = jc.at("inputs").get<std::vector<NetId>>();
            c.output = jc.at("output").get<NetId>();
            if (c.kind == CellKind::FlipFlop) {
                c.clock = jc.at("clock").get<NetId>();
                c.init = jc.at("init").get<int>();
            }
            if (c.is_lut_like())
                c.truth = std::stoull(jc.at("truth").get<std::string>(), nullptr, 16);
            n.cells.push_back(std::move(c));
        }
        n.inputs = jn.at("inputs").get<std::vector<CellId>>();
        n.outputs = jn.at("outputs").get<std::vector<CellId>>();
        const NetId num_nets = NetId(n.nets.size());
        auto check_net = [&](NetId id) {
            if (id < -1 || id >= num_nets)
                throw DesignFormatError("net id " + std::to_string(id) + " out of range");
        };
        for (size_t c = 0; c < n.cells.size(); ++c) {
            const Cell &cell = n.cells[c];
            check_net(cell.output);
            check_net(cell.clock);
            if (cell.output >= 0)
                n.nets[cell.output].driver = CellId(c);
            for (size_t p = 0; p < cell.inputs.size(); ++p) {
                check_net(cell.inputs[p]);
                n.nets[cell.inputs[p]].sinks.push_back({CellId(c), int(p)});
            }
            if (cell.clock >= 0)
                n.nets[cell.clock].sinks.push_back({CellId(c), kClockPin});
        }
        try {
            n.validate(d.spec.lut_k);
        } catch (const std::logic_error &e) {
            throw DesignFormatError(std::string("netlist: ") + e.what());
        }

        for (const auto &js : j.at("packed"))
            d.packed.push_back({js.at("luts").get<std::vector<CellId>>(), js.at("ffs").get<std::vector<CellId>>(),
                                js.at("critical").get<bool>()});
        for (const auto &s : j.at("placement").at("slices"))
            d.placement.slices.push_back({{s.at(0).get<int>(), s.at(1).get<int>()}, s.at(2).get<int>()});
        d.placement.pads.assign(n.cells.size(), PadSite{});
        for (const auto &p : j.at("placement").at("pads")) {
            std::size_t c = p.at(0).get<std::size_t>();
            if (c >= n.cells.size())
                throw DesignFormatError("pad assignment for unknown cell");
            d.placement.pads[c] = {{p.at(1).get<int>(), p.at(2).get<int>()}, p.at(3).get<int>()};
        }
        if (d.placement.slices.size() != d.packed.size())
            throw DesignFormatError("placement and packing disagree on the slice count");

        for (const auto &jr : j.at("routing")) {
            NetRoute r;
            r.net = jr.at("net").get<NetId>();
            for (const auto &node : jr.at("nodes"))
                r.nodes.push_back({{node.at(0).get<int>(), node.at(1).get<int>()}, node.at(2).get<int>(),
                                   node.at(3).get<int>()});
            for (const auto &s : jr.at("sinks"))
                r.sinks.push_back({PinRef{s.at(0).get<int>(), s.at(1).get<int>()}, s.at(2).get<int>()});
            d.routing.nets.push_back(std::move(r));
        }
        if (!j.at("mask").is_null()) {
            RegionMask m;
            for (const auto &b : j.at("mask"))
                m.add({b.at(0).get<int>(), b.at(1).get<int>()});
            d.mask = std::move(m);
        }
        for (const auto &t : j.at("corridor"))
            d.corridor.push_back(tile_from(t));
        return d;
    } catch (const json::exception &e) {
        throw DesignFormatError(std::string("malformed design file: ") + e.what());
    }
}

} // namespace scrubplan
