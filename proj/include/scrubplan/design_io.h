// A placed and routed design and its JSON serialization.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "scrubplan/fabric.h"
#include "scrubplan/layout.h"
#include "scrubplan/mapped_netlist.h"

namespace scrubplan {

struct PlacedDesign
{
    DeviceSpec spec;
    MappedNetlist netlist;
    std::vector<PackedSlice> packed;
    Placement placement;
    Routing routing;
    std::optional<RegionMask> mask;
    std::vector<TileLoc> corridor;
    char flow = 'c';
    std::uint64_t seed = 0;
};

class DesignFormatError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

nlohmann::json design_to_json(const PlacedDesign &d);
PlacedDesign design_from_json(const nlohmann::json &j);

} // namespace scrubplan
