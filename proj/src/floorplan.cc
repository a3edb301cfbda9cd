#include "scrubplan/layout.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <tuple>

namespace scrubplan {

bool RegionMask::contains(int column, int region) const
{
    return std::binary_search(blocks.begin(), blocks.end(), Block{column, region});
}

void RegionMask::add(Block b)
{
    auto it = std::lower_bound(blocks.begin(), blocks.end(), b);
    if (it == blocks.end() || *it != b)
        blocks.insert(it, b);
}

std::vector<PadSite> assign_pads(const MappedNetlist &n, const FabricModel &dev)
{
    const int per_tile = dev.spec().pads_per_iob_tile;
    const int side_cap = dev.spec().rows * per_tile;
    std::vector<CellId> left(n.inputs.begin(), n.inputs.end());
    std::vector<CellId> right(n.outputs.begin(), n.outputs.end());
    if (int(left.size() + right.size()) > 2 * side_cap)
        throw CapacityExceeded("design has " + std::to_string(left.size() + right.size()) + " pads, device holds " +
                               std::to_string(2 * side_cap));
    if (int(left.size()) > side_cap) {
        right.insert(right.begin(), left.begin() + side_cap, left.end());
        left.resize(side_cap);
    } else if (int(right.size()) > side_cap) {
        left.insert(left.end(), right.begin() + side_cap, right.end());
        right.resize(side_cap);
    }
    std::vector<PadSite> out(n.cells.size());
    auto spread = [&](const std::vector<CellId> &cells, int column) {
        const long long m = std::ssize(cells);
        for (long long i = 0; i < m; ++i) {
            long long slot = (2 * i + 1) * side_cap / (2 * m);
            out[cells[i]] = {{column, int(slot / per_tile)}, int(slot % per_tile)};
        }
    };
    spread(left, 0);
    spread(right, dev.total_columns() - 1);
    return out;
}

RegionMask choose_region(const FabricModel &dev, int demand, const std::vector<TileLoc> &pads, double slack)
{
    const int cols = dev.spec().clb_columns;
    const int regs = dev.regions();
    const int h = dev.spec().region_height;
    const int cap = dev.slices_per_block();
    if (demand > dev.total_slice_sites())
        throw CapacityExceeded("demand of " + std::to_string(demand) + " slices exceeds device capacity " +
                               std::to_string(dev.total_slice_sites()));
    long long need = std::llround(std::ceil(double(demand) * (1.0 + slack) / cap - 1e-9));
    need = std::clamp<long long>(need, 1, (long long)cols * regs);

    int area = std::numeric_limits<int>::max();
    for (int w = 1; w <= cols; ++w)
        for (int hh = 1; hh <= regs; ++hh)
            if (w * hh >= need)
                area = std::min(area, w * hh);

    // Centroid in doubled, pad-count-scaled integer coordinates.
    long long np = std::ssize(pads);
    long long sx = 0, sy = 0;
    for (const auto &p : pads) {
        sx += p.column;
        sy += p.row;
    }
    if (np == 0) {
        np = 1;
        sx = dev.total_columns() / 2;
        sy = dev.spec().rows / 2;
    }
    auto block_cost = [&](int c, int rg) {
        long long bx = 2LL * c * np - 2 * sx;
        long long by = (2LL * rg * h + h - 1) * np - 2 * sy;
        return std::llabs(bx) + std::llabs(by);
    };

    std::tuple<long long, int, int, int> best{std::numeric_limits<long long>::max(), 0, 0, 0};
    int best_h = 0;
    for (int w = 1; w <= cols; ++w) {
        if (area % w)
            continue;
        const int hh = area / w;
        if (hh > regs)
            continue;
        for (int c0 = 1; c0 + w - 1 <= cols; ++c0)
            for (int r0 = 0; r0 + hh - 1 < regs; ++r0) {
                long long cost = 0;
                for (int c = c0; c < c0 + w; ++c)
                    for (int rg = r0; rg < r0 + hh; ++rg)
                        cost += block_cost(c, rg);
                std::tuple<long long, int, int, int> key{cost, c0, r0, w};
                if (key < best) {
                    best = key;
                    best_h = hh;
                }
            }
    }
    RegionMask m;
    auto [cost, c0, r0, w] = best;
    for (int c = c0; c < c0 + w; ++c)
        for (int rg = r0; rg < r0 + best_h; ++rg)
            m.blocks.push_back({c, rg});
    std::sort(m.blocks.begin(), m.blocks.end());
    return m;
}

std::vector<TileLoc> pad_corridor(const FabricModel &dev, const RegionMask &mask, const std::vector<TileLoc> &pads)
{
    const int h = dev.spec().region_height;
    std::set<TileLoc> tiles;
    for (const auto &p : pads) {
        const Block *nearest = nullptr;
        int best = std::numeric_limits<int>::max();
        for (const auto &b : mask.blocks) {
            int lo = b.region * h, hi = lo + h - 1;
            int dy = p.row < lo ? lo - p.row : (p.row > hi ? p.row - hi : 0);
            int d = std::abs(p.column - b.column) + dy;
            if (d < best) {
                best = d;
                nearest = &b;
            }
        }
        if (!nearest)
            continue;
        const int lo = nearest->region * h;
        const int target_row = std::clamp(p.row, lo, lo + h - 1);
        for (int r = std::min(p.row, target_row); r <= std::max(p.row, target_row); ++r)
            tiles.insert({p.column, r});
        const int step = nearest->column > p.column ? 1 : -1;
        for (int c = p.column + step; c != nearest->column; c += step)
            tiles.insert({c, target_row});
    }
    std::vector<TileLoc> out;
    for (const auto &t : tiles)
        if (!mask.contains_tile(dev, t))
            out.push_back(t);
    return out;
}

std::optional<Block> adjacent_block(const FabricModel &dev, const RegionMask &mask)
{
    if (mask.blocks.empty())
        return std::nullopt;
    long long sc = 0, sr = 0;
    for (const auto &b : mask.blocks) {
        sc += b.column;
        sr += b.region;
    }
    const long long nb = std::ssize(mask.blocks);
    std::optional<Block> best;
    long long best_cost = 0;
    for (const auto &b : mask.blocks) {
        const Block cand[] = {{b.column - 1, b.region}, {b.column + 1, b.region}, {b.column, b.region - 1},
                              {b.column, b.region + 1}};
        for (const auto &c : cand) {
            if (c.column < 1 || c.column > dev.spec().clb_columns || c.region < 0 || c.region >= dev.regions())
                continue;
            if (mask.contains(c.column, c.region))
                continue;
            long long cost = std::llabs(c.column * nb - sc) + std::llabs(c.region * nb - sr);
            if (!best || cost < best_cost || (cost == best_cost && c < *best)) {
                best = c;
                best_cost = cost;
            }
        }
    }
    return best;
}

} // namespace scrubplan
