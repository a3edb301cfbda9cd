#include "scrubplan/layout.h"

#include <algorithm>
#include <map>

namespace scrubplan {

namespace {

// Nets above this fanout are ignored when scoring packing affinity.
constexpr std::size_t kAffinityFanoutLimit = 64;

} // namespace

std::vector<PackedSlice> pack(const MappedNetlist &n, const Classification &c, const FabricModel &dev)
{
    const auto &spec = dev.spec();
    const int cap_lut = spec.luts_per_slice;
    const int cap_ff = spec.ffs_per_slice;
    const int num_cells = int(n.cells.size());

    std::vector<std::vector<CellId>> ffs_fed(num_cells);
    std::vector<CellId> luts;
    std::vector<CellId> ffs;
    for (CellId id = 0; id < num_cells; ++id) {
        const Cell &cell = n.cells[id];
        if (cell.is_lut_like()) {
            if (int(cell.inputs.size()) > spec.lut_k)
                throw CapacityExceeded("cell '" + cell.name + "' has more inputs than lut_k");
            luts.push_back(id);
        } else if (cell.kind == CellKind::FlipFlop) {
            ffs.push_back(id);
            CellId d = n.nets[cell.inputs[0]].driver;
            if (d >= 0 && n.cells[d].is_lut_like())
                ffs_fed[d].push_back(id);
        }
    }

    std::vector<int> slice_of(num_cells, -1);
    std::vector<PackedSlice> out;

    auto add_ffs_of = [&](int s, CellId lut) {
        for (CellId f : ffs_fed[lut])
            if (slice_of[f] < 0 && int(out[s].ffs.size()) < cap_ff) {
                out[s].ffs.push_back(f);
                slice_of[f] = s;
            }
    };
    // Unpacked LUT neighbours of a cell through its input and output nets.
    auto neighbours = [&](CellId id, auto &&visit) {
        const Cell &cell = n.cells[id];
        auto scan = [&](NetId net) {
            const Net &nt = n.nets[net];
            if (nt.sinks.size() > kAffinityFanoutLimit)
                return;
            if (nt.driver >= 0 && nt.driver != id)
                visit(nt.driver);
            for (const auto &s : nt.sinks)
                if (s.cell != id && s.pin != kClockPin)
                    visit(s.cell);
        };
        for (NetId in : cell.inputs)
            scan(in);
        if (cell.output >= 0)
            scan(cell.output);
    };

    size_t next_seed = 0;
    for (;;) {
        while (next_seed < luts.size() && slice_of[luts[next_seed]] >= 0)
            ++next_seed;
        if (next_seed == luts.size())
            break;
        const int s = int(out.size());
        out.emplace_back();
        std::map<CellId, int> gain;
        auto take = [&](CellId lut) {
            out[s].luts.push_back(lut);
            slice_of[lut] = s;
            gain.erase(lut);
            add_ffs_of(s, lut);
            auto bump = [&](CellId v) {
                if (slice_of[v] < 0 && n.cells[v].is_lut_like())
                    ++gain[v];
            };
            neighbours(lut, bump);
            for (CellId f : ffs_fed[lut])
                if (slice_of[f] == s)
                    neighbours(f, bump);
        };
        take(luts[next_seed]);
        while (int(out[s].luts.size()) < cap_lut) {
            CellId best = -1;
            int best_gain = 0;
            for (const auto &[v, g] : gain)
                if (g > best_gain) {
                    best = v;
                    best_gain = g;
                }
            if (best < 0) {
                while (next_seed < luts.size() && slice_of[luts[next_seed]] >= 0)
                    ++next_seed;
                if (next_seed == luts.size())
                    break;
                best = luts[next_seed];
            }
            take(best);
        }
    }

    // Flip-flops not yet placed next to their driver: try the driver's slice,
    // then the first slice with spare capacity, then fresh slices.
    size_t spare = 0;
    for (CellId f : ffs) {
        if (slice_of[f] >= 0)
            continue;
        CellId d = n.nets[n.cells[f].inputs[0]].driver;
        int s = d >= 0 ? slice_of[d] : -1;
        if (s < 0 || int(out[s].ffs.size()) >= cap_ff) {
            while (spare < out.size() && int(out[spare].ffs.size()) >= cap_ff)
                ++spare;
            if (spare == out.size())
                out.emplace_back();
            s = int(spare);
        }
        out[s].ffs.push_back(f);
        slice_of[f] = s;
    }

    for (auto &sl : out) {
        for (CellId id : sl.luts)
            sl.critical = sl.critical || c.critical_nodes[id];
        for (CellId id : sl.ffs)
            sl.critical = sl.critical || c.critical_nodes[id];
    }
    if (out.size() > std::size_t(dev.total_slice_sites()))
        throw CapacityExceeded("design needs " + std::to_string(out.size()) + " slices, device holds " +
                               std::to_string(dev.total_slice_sites()));
    return out;
}

} // namespace scrubplan
