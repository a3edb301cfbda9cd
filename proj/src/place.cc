#include "scrubplan/layout.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scrubplan {

std::vector<TileLoc> Placement::cell_tiles(const MappedNetlist &n, const std::vector<PackedSlice> &packed) const
{
    std::vector<TileLoc> out(n.cells.size(), TileLoc{-1, -1});
    for (size_t s = 0; s < packed.size(); ++s) {
        for (CellId c : packed[s].luts)
            out[c] = slices[s].tile;
        for (CellId c : packed[s].ffs)
            out[c] = slices[s].tile;
    }
    for (size_t c = 0; c < n.cells.size() && c < pads.size(); ++c)
        if (pads[c].tile.column >= 0)
            out[c] = pads[c].tile;
    return out;
}

namespace {

constexpr std::size_t kAdjacencyFanoutLimit = 64;

// Placement nets: for each data net, the slices and fixed pad tiles on it.
struct NetTerms
{
    std::vector<int> slices;
    std::vector<TileLoc> fixed;
};

class Annealer
{
  public:
    Annealer(const FabricModel &dev, int num_slices, std::vector<NetTerms> nets, const RegionMask *mask, double lambda,
             std::uint64_t seed)
            : dev_(dev), nets_(std::move(nets)), rng_(seed),
              block_weight_(lambda * dev.spec().frames_per_column_region)
    {
        const int cols = dev.total_columns(), rows = dev.spec().rows;
        allowed_.assign(std::size_t(cols) * rows, 0);
        for (int c = 1; c <= dev.spec().clb_columns; ++c)
            for (int r = 0; r < rows; ++r)
                if (!mask || mask->contains(c, dev.region_of(r)))
                    allowed_[tile_index({c, r})] = 1;
        occupant_.assign(allowed_.size() * dev.spec().slices_per_tile, -1);
        site_.assign(num_slices, SliceSite{});
        slice_nets_.resize(num_slices);
        for (size_t e = 0; e < nets_.size(); ++e)
            for (int s : nets_[e].slices)
                slice_nets_[s].push_back(int(e));
        block_count_.assign(std::size_t(cols) * dev.regions(), 0);
        net_cost_.assign(nets_.size(), 0);
        stamp_.assign(nets_.size(), 0);
    }

    int tile_index(TileLoc t) const { return t.column * dev_.spec().rows + t.row; }
    int site_index(const SliceSite &s) const { return tile_index(s.tile) * dev_.spec().slices_per_tile + s.slice; }
    int block_index(TileLoc t) const { return t.column * dev_.regions() + dev_.region_of(t.row); }
    bool allowed(TileLoc t) const { return dev_.on_device(t) && allowed_[tile_index(t)]; }

    std::vector<SliceSite> sites_in_scan_order() const
    {
        const int h = dev_.spec().region_height;
        std::vector<SliceSite> out;
        for (int c = 1; c <= dev_.spec().clb_columns; ++c)
            for (int rg = 0; rg < dev_.regions(); ++rg)
                for (int r = rg * h; r < rg * h + h; ++r)
                    if (allowed({c, r}))
                        for (int s = 0; s < dev_.spec().slices_per_tile; ++s)
                            out.push_back({{c, r}, s});
        return out;
    }

    void put(int slice, const SliceSite &s)
    {
        site_[slice] = s;
        occupant_[site_index(s)] = slice;
        if (block_count_[block_index(s.tile)]++ == 0)
            ++blocks_used_;
    }

    // Replaces the whole placement, e.g. to restore a snapshot.
    void reset(const std::vector<SliceSite> &sites)
    {
        std::fill(occupant_.begin(), occupant_.end(), -1);
        std::fill(block_count_.begin(), block_count_.end(), 0);
        blocks_used_ = 0;
        for (int k = 0; k < int(sites.size()); ++k)
            put(k, sites[k]);
        init_costs();
    }

    void init_costs()
    {
        total_wl_ = 0;
        for (size_t e = 0; e < nets_.size(); ++e) {
            net_cost_[e] = hpwl(int(e));
            total_wl_ += net_cost_[e];
        }
    }

    std::int64_t hpwl(int e) const
    {
        int x0 = std::numeric_limits<int>::max(), x1 = -1, y0 = std::numeric_limits<int>::max(), y1 = -1;
        auto add = [&](TileLoc t) {
            x0 = std::min(x0, t.column);
            x1 = std::max(x1, t.column);
            y0 = std::min(y0, t.row);
            y1 = std::max(y1, t.row);
        };
        for (int s : nets_[e].slices)
            add(site_[s].tile);
        for (const auto &t : nets_[e].fixed)
            add(t);
        return x1 < 0 ? 0 : (x1 - x0) + (y1 - y0);
    }

    double cost() const { return double(total_wl_) + block_weight_ * blocks_used_; }

    // Proposes moving slice a to a random site within rlim tiles; returns
    // false when no legal target was found.
    bool propose(int rlim, int &a, SliceSite &target)
    {
        a = int(rng_.below(site_.size()));
        const TileLoc cur = site_[a].tile;
        for (int attempt = 0; attempt < 10; ++attempt) {
            TileLoc t{cur.column + int(rng_.below(2 * rlim + 1)) - rlim, cur.row + int(rng_.below(2 * rlim + 1)) - rlim};
            if (!allowed(t))
                continue;
            target = {t, int(rng_.below(dev_.spec().slices_per_tile))};
            return target != site_[a];
        }
        return false;
    }

    // Applies a move (swap when the target is occupied) and returns the
    // cost delta.
    double apply(int a, const SliceSite &target)
    {
        const SliceSite from = site_[a];
        const int b = occupant_[site_index(target)];
        ++epoch_;
        touched_.clear();
        auto touch = [&](int s) {
            for (int e : slice_nets_[s])
                if (stamp_[e] != epoch_) {
                    stamp_[e] = epoch_;
                    touched_.push_back(e);
                }
        };
        touch(a);
        if (b >= 0)
            touch(b);
        const long long blocks_before = blocks_used_;
        move(a, target);
        if (b >= 0)
            move(b, from);
        else
            occupant_[site_index(from)] = -1;
        occupant_[site_index(target)] = a;
        if (b >= 0)
            occupant_[site_index(from)] = b;

        std::int64_t dwl = 0;
        saved_.clear();
        for (int e : touched_) {
            std::int64_t c = hpwl(e);
            saved_.push_back(net_cost_[e]);
            dwl += c - net_cost_[e];
            net_cost_[e] = c;
        }
        total_wl_ += dwl;
        last_ = {a, b, from, target};
        return double(dwl) + block_weight_ * double(blocks_used_ - blocks_before);
    }

    void revert()
    {
        auto [a, b, from, target] = last_;
        move(a, from);
        occupant_[site_index(from)] = a;
        if (b >= 0) {
            move(b, target);
            occupant_[site_index(target)] = b;
        } else {
            occupant_[site_index(target)] = -1;
        }
        for (size_t i = 0; i < touched_.size(); ++i) {
            total_wl_ += saved_[i] - net_cost_[touched_[i]];
            net_cost_[touched_[i]] = saved_[i];
        }
    }

    Prng &rng() { return rng_; }
    const std::vector<SliceSite> &sites() const { return site_; }

  private:
    struct LastMove
    {
        int a, b;
        SliceSite from, target;
    };

    void move(int slice, const SliceSite &to)
    {
        if (--block_count_[block_index(site_[slice].tile)] == 0)
            --blocks_used_;
        site_[slice] = to;
        if (block_count_[block_index(to.tile)]++ == 0)
            ++blocks_used_;
    }

    const FabricModel &dev_;
    std::vector<NetTerms> nets_;
    Prng rng_;
    double block_weight_;
    std::vector<std::uint8_t> allowed_;
    std::vector<int> occupant_;
    std::vector<SliceSite> site_;
    std::vector<std::vector<int>> slice_nets_;
    std::vector<int> block_count_;
    long long blocks_used_ = 0;
    std::vector<std::int64_t> net_cost_;
    std::int64_t total_wl_ = 0;
    std::vector<unsigned> stamp_;
    unsigned epoch_ = 0;
    std::vector<int> touched_;
    std::vector<std::int64_t> saved_;
    LastMove last_{};
};

std::vector<NetTerms> placement_nets(const MappedNetlist &n, const std::vector<PackedSlice> &packed,
                                     const std::vector<PadSite> &pads)
{
    std::vector<int> slice_of(n.cells.size(), -1);
    for (size_t s = 0; s < packed.size(); ++s) {
        for (CellId c : packed[s].luts)
            slice_of[c] = int(s);
        for (CellId c : packed[s].ffs)
            slice_of[c] = int(s);
    }
    std::vector<NetTerms> out;
    for (const auto &net : n.nets) {
        NetTerms t;
        auto add = [&](CellId c) {
            if (c < 0)
                return;
            if (slice_of[c] >= 0)
                t.slices.push_back(slice_of[c]);
            else if (std::size_t(c) < pads.size() && pads[c].tile.column >= 0)
                t.fixed.push_back(pads[c].tile);
        };
        bool has_data_sink = false;
        for (const auto &s : net.sinks)
            if (s.pin != kClockPin) {
                has_data_sink = true;
                add(s.cell);
            }
        if (!has_data_sink)
            continue;
        add(net.driver);
        std::sort(t.slices.begin(), t.slices.end());
        t.slices.erase(std::unique(t.slices.begin(), t.slices.end()), t.slices.end());
        std::sort(t.fixed.begin(), t.fixed.end());
        t.fixed.erase(std::unique(t.fixed.begin(), t.fixed.end()), t.fixed.end());
        if (t.slices.size() + t.fixed.size() >= 2 && !t.slices.empty())
            out.push_back(std::move(t));
    }
    return out;
}

// Slices in breadth-first order over shared nets, so connected slices land
// next to each other in the initial fill.
std::vector<int> connectivity_order(int num_slices, const std::vector<NetTerms> &nets)
{
    std::vector<std::vector<int>> slice_nets(num_slices);
    for (size_t e = 0; e < nets.size(); ++e)
        if (nets[e].slices.size() <= kAdjacencyFanoutLimit)
            for (int s : nets[e].slices)
                slice_nets[s].push_back(int(e));
    std::vector<int> order;
    std::vector<std::uint8_t> seen(num_slices, 0);
    for (int root = 0; root < num_slices; ++root) {
        if (seen[root])
            continue;
        seen[root] = 1;
        size_t head = order.size();
        order.push_back(root);
        for (; head < order.size(); ++head)
            for (int e : slice_nets[order[head]])
                for (int s : nets[e].slices)
                    if (!seen[s]) {
                        seen[s] = 1;
                        order.push_back(s);
                    }
    }
    return order;
}

} // namespace

Placement place(const MappedNetlist &n, const std::vector<PackedSlice> &packed, const FabricModel &dev,
                const std::vector<PadSite> &pads, const RegionMask *mask, const PlaceOptions &opt)
{
    Placement result;
    result.pads = pads;
    const int num = int(packed.size());
    if (num == 0)
        return result;

    auto nets = placement_nets(n, packed, pads);
    const auto order = connectivity_order(num, nets);
    Annealer an(dev, num, std::move(nets), mask, opt.lambda, opt.seed);
    const auto sites = an.sites_in_scan_order();
    if (std::ssize(sites) < num)
        throw CapacityExceeded("placement needs " + std::to_string(num) + " slice sites, region offers " +
                               std::to_string(sites.size()));
    for (int k = 0; k < num; ++k) {
        std::size_t idx = opt.spread_initial ? std::size_t((long long)k * std::ssize(sites) / num) : std::size_t(k);
        an.put(order[k], sites[idx]);
    }
    an.init_costs();

    const int rmax = std::max(dev.total_columns(), dev.spec().rows);
    if (num >= 2 && opt.moves_per_slice > 0) {
        // Starting temperature from the spread of random move deltas.
        double sum = 0, sum2 = 0;
        int samples = 0;
        for (int i = 0; i < 100; ++i) {
            int a;
            SliceSite t;
            if (!an.propose(rmax, a, t))
                continue;
            double d = an.apply(a, t);
            an.revert();
            sum += d;
            sum2 += d * d;
            ++samples;
        }
        double temp = 1.0;
        if (samples > 1) {
            double mean = sum / samples;
            temp = std::sqrt(std::max(0.0, sum2 / samples - mean * mean));
        }
        if (temp <= 0)
            temp = 1.0;

        const long long total = (long long)opt.moves_per_slice * num;
        const long long stage = std::max(num, 100);
        // Geometric cooling fitted to the move budget: the final stage runs at
        // a thousandth of the starting temperature.
        const double stages = std::max(1.0, std::ceil(double(total) / double(stage)));
        const double alpha = std::pow(1e-3, 1.0 / stages);
        double rlim = rmax;
        double best_cost = an.cost();
        std::vector<SliceSite> best = an.sites();
        for (long long done = 0; done < total;) {
            long long accepted = 0, proposed = 0;
            for (long long i = 0; i < stage && done < total; ++i, ++done) {
                int a;
                SliceSite t;
                if (!an.propose(int(rlim), a, t))
                    continue;
                ++proposed;
                double d = an.apply(a, t);
                if (d <= 0 || an.rng().unit() < std::exp(-d / temp))
                    ++accepted;
                else
                    an.revert();
            }
            if (an.cost() < best_cost) {
                best_cost = an.cost();
                best = an.sites();
            }
            double rate = proposed ? double(accepted) / proposed : 0.0;
            rlim = std::clamp(rlim * (0.56 + rate), 1.0, double(rmax));
            temp *= alpha;
        }
        if (an.cost() > best_cost)
            an.reset(best);
        // Greedy tail: improving moves only.
        for (long long i = 0; i < 10LL * num; ++i) {
            int a;
            SliceSite t;
            if (!an.propose(std::max(1, int(rlim)), a, t))
                continue;
            if (an.apply(a, t) >= 0)
                an.revert();
        }
    }
    result.slices = an.sites();
    return result;
}

std::int64_t placement_wirelength(const MappedNetlist &n, const std::vector<PackedSlice> &packed, const Placement &p)
{
    std::int64_t total = 0;
    for (const auto &t : placement_nets(n, packed, p.pads)) {
        int x0 = std::numeric_limits<int>::max(), x1 = -1, y0 = std::numeric_limits<int>::max(), y1 = -1;
        auto add = [&](TileLoc l) {
            x0 = std::min(x0, l.column);
            x1 = std::max(x1, l.column);
            y0 = std::min(y0, l.row);
            y1 = std::max(y1, l.row);
        };
        for (int s : t.slices)
            add(p.slices[s].tile);
        for (const auto &f : t.fixed)
            add(f);
        total += (x1 - x0) + (y1 - y0);
    }
    return total;
}

} // namespace scrubplan
