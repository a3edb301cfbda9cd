#include "scrubplan/layout.h"

#include <algorithm>
#include <cstdlib>
#include <map>

namespace scrubplan {

Unroutable::Unroutable(NetId net, const std::string &name)
        : std::runtime_error("net '" + name + "' is unroutable inside the allowed area"), net_(net)
{
}

std::size_t Routing::pip_count() const
{
    std::size_t n = 0;
    for (const auto &r : nets)
        n += r.nodes.size();
    return n;
}

Routing route(const MappedNetlist &n, const std::vector<PackedSlice> &packed, const FabricModel &dev,
              const Placement &p, const RegionMask *mask, const std::vector<TileLoc> &corridor)
{
    const int cols = dev.total_columns();
    const int rows = dev.spec().rows;
    const std::size_t num_tiles = std::size_t(cols) * rows;
    auto index = [rows](TileLoc t) { return std::size_t(t.column) * rows + t.row; };

    const auto cell_tile = p.cell_tiles(n, packed);
    std::vector<std::uint8_t> allowed(num_tiles, 1);
    if (mask) {
        std::fill(allowed.begin(), allowed.end(), 0);
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r)
                if (mask->contains(c, dev.region_of(r)))
                    allowed[index({c, r})] = 1;
        for (const auto &t : corridor)
            allowed[index(t)] = 1;
        for (const auto &pad : p.pads)
            if (pad.tile.column >= 0)
                allowed[index(pad.tile)] = 1;
    }
    std::vector<int> budget(num_tiles);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r)
            budget[index({c, r})] = dev.pip_budget(c);
    std::vector<int> used(num_tiles, 0);

    struct Job
    {
        NetId net;
        int fanout;
    };
    std::vector<Job> jobs;
    for (NetId id = 0; id < NetId(n.nets.size()); ++id) {
        int fanout = 0;
        for (const auto &s : n.nets[id].sinks)
            fanout += s.pin != kClockPin;
        if (fanout > 0 && n.nets[id].driver >= 0)
            jobs.push_back({id, fanout});
    }
    std::stable_sort(jobs.begin(), jobs.end(), [](const Job &a, const Job &b) { return a.fanout > b.fanout; });

    std::vector<int> node_at(num_tiles, -1);
    std::vector<unsigned> node_stamp(num_tiles, 0);
    std::vector<unsigned> seen(num_tiles, 0);
    std::vector<std::size_t> prev(num_tiles);
    std::vector<std::size_t> queue;
    unsigned net_epoch = 0, bfs_epoch = 0;

    Routing out;
    out.nets.reserve(jobs.size());
    for (const auto &job : jobs) {
        const Net &net = n.nets[job.net];
        ++net_epoch;
        NetRoute nr;
        nr.net = job.net;
        auto claim = [&](TileLoc t, int parent) {
            const std::size_t ti = index(t);
            if (used[ti] >= budget[ti])
                throw Unroutable(job.net, net.name);
            nr.nodes.push_back({t, used[ti]++, parent});
            node_at[ti] = int(nr.nodes.size()) - 1;
            node_stamp[ti] = net_epoch;
        };
        auto in_tree = [&](std::size_t ti) { return node_stamp[ti] == net_epoch; };

        const TileLoc src = cell_tile[net.driver];
        claim(src, -1);

        std::vector<TileLoc> targets;
        for (const auto &s : net.sinks)
            if (s.pin != kClockPin)
                targets.push_back(cell_tile[s.cell]);
        std::sort(targets.begin(), targets.end(), [&](TileLoc a, TileLoc b) {
            int da = std::abs(a.column - src.column) + std::abs(a.row - src.row);
            int db = std::abs(b.column - src.column) + std::abs(b.row - src.row);
            return da != db ? da < db : a < b;
        });
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

        for (const TileLoc target : targets) {
            const std::size_t goal = index(target);
            if (in_tree(goal))
                continue;
            ++bfs_epoch;
            queue.clear();
            for (const auto &node : nr.nodes) {
                std::size_t ti = index(node.tile);
                seen[ti] = bfs_epoch;
                queue.push_back(ti);
            }
            bool found = false;
            for (std::size_t head = 0; head < queue.size() && !found; ++head) {
                const std::size_t cur = queue[head];
                const int c = int(cur / rows), r = int(cur % rows);
                const TileLoc nbr[] = {{c + 1, r}, {c - 1, r}, {c, r + 1}, {c, r - 1}};
                for (const auto &t : nbr) {
                    if (!dev.on_device(t))
                        continue;
                    const std::size_t ti = index(t);
                    if (seen[ti] == bfs_epoch || !allowed[ti] || used[ti] >= budget[ti])
                        continue;
                    seen[ti] = bfs_epoch;
                    prev[ti] = cur;
                    if (ti == goal) {
                        found = true;
                        break;
                    }
                    queue.push_back(ti);
                }
            }
            if (!found)
                throw Unroutable(job.net, net.name);
            std::vector<std::size_t> path;
            for (std::size_t ti = goal; !in_tree(ti); ti = prev[ti])
                path.push_back(ti);
            int parent = node_at[prev[path.back()]];
            for (auto it = path.rbegin(); it != path.rend(); ++it) {
                claim({int(*it / rows), int(*it % rows)}, parent);
                parent = int(nr.nodes.size()) - 1;
            }
        }
        for (const auto &s : net.sinks)
            if (s.pin != kClockPin)
                nr.sinks.push_back({PinRef{s.cell, s.pin}, node_at[index(cell_tile[s.cell])]});
        out.nets.push_back(std::move(nr));
    }
    return out;
}

} // namespace scrubplan
