// Packing, frame-aligned region selection, placement and routing.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "scrubplan/fabric.h"
#include "scrubplan/graph.h"
#include "scrubplan/mapped_netlist.h"
#include "scrubplan/prng.h"

namespace scrubplan {

class CapacityExceeded : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class Unroutable : public std::runtime_error
{
  public:
    Unroutable(NetId net, const std::string &name);
    NetId net() const { return net_; }

  private:
    NetId net_;
};

struct PackedSlice
{
    std::vector<CellId> luts; // LUT slot l holds luts[l] (LUT, Const0 or Const1 cells)
    std::vector<CellId> ffs;  // FF slot f holds ffs[f]
    bool critical = false;
};

std::vector<PackedSlice> pack(const MappedNetlist &n, const Classification &c, const FabricModel &dev);

// One column by one clock region: the granularity of frames.
struct Block
{
    int column = 0;
    int region = 0;

    auto operator<=>(const Block &) const = default;
};

struct RegionMask
{
    std::vector<Block> blocks; // sorted, unique

    bool contains(int column, int region) const;
    bool contains_tile(const FabricModel &dev, TileLoc t) const { return contains(t.column, dev.region_of(t.row)); }
    void add(Block b);
};

struct PadSite
{
    TileLoc tile{-1, -1};
    int pad = 0;

    auto operator<=>(const PadSite &) const = default;
};

// Inputs are spread evenly down the left IOB column and outputs down the
// right one, two pads per tile; a side that is full overflows to the other.
// Result is indexed by cell id; non-pad cells get tile.column == -1.
std::vector<PadSite> assign_pads(const MappedNetlist &n, const FabricModel &dev);

// Smallest rectangle of blocks whose capacity covers demand*(1+slack),
// nearest to the pad centroid.
RegionMask choose_region(const FabricModel &dev, int demand, const std::vector<TileLoc> &pads, double slack = 0.10);

// Tiles outside the mask that pad nets may use: from each pad, along the IOB
// column to the nearest mask block's row span, then across to the mask.
std::vector<TileLoc> pad_corridor(const FabricModel &dev, const RegionMask &mask, const std::vector<TileLoc> &pads);

struct SliceSite
{
    TileLoc tile;
    int slice = 0;

    auto operator<=>(const SliceSite &) const = default;
};

struct Placement
{
    std::vector<SliceSite> slices; // parallel to the packed slice list
    std::vector<PadSite> pads;     // indexed by cell id

    // Tile of any placed cell (slice member or pad).
    std::vector<TileLoc> cell_tiles(const MappedNetlist &n, const std::vector<PackedSlice> &packed) const;
};

struct PlaceOptions
{
    std::uint64_t seed = kDefaultSeed;
    double lambda = 8.0;
    int moves_per_slice = 200;
    // Start from slices spread evenly over all sites instead of a compact
    // scanline fill (used for the unconstrained flow).
    bool spread_initial = false;
};

Placement place(const MappedNetlist &n, const std::vector<PackedSlice> &packed, const FabricModel &dev,
                const std::vector<PadSite> &pads, const RegionMask *mask, const PlaceOptions &opt);

// Half-perimeter wirelength of all data nets for a placement.
std::int64_t placement_wirelength(const MappedNetlist &n, const std::vector<PackedSlice> &packed,
                                  const Placement &p);

struct RouteNode
{
    TileLoc tile;
    int pip = 0;
    int parent = -1; // index into NetRoute::nodes; -1 for the driver tile
};

struct NetRoute
{
    NetId net = -1;
    std::vector<RouteNode> nodes;
    // (sink pin, node index of the sink's tile)
    std::vector<std::pair<PinRef, int>> sinks;
};

struct Routing
{
    std::vector<NetRoute> nets; // in routing order

    std::size_t pip_count() const;
};

// Routes every net with data sinks. With a mask, only tiles inside the mask,
// on the corridor, or holding a pad are usable.
Routing route(const MappedNetlist &n, const std::vector<PackedSlice> &packed, const FabricModel &dev,
              const Placement &p, const RegionMask *mask, const std::vector<TileLoc> &corridor);

// A block adjacent to the mask, used to relax it after Unroutable; nullopt
// when the mask already covers the device.
std::optional<Block> adjacent_block(const FabricModel &dev, const RegionMask &mask);

} // namespace scrubplan
