// Essential and critical configuration bit sets, frame accounting, and the
// text mask format.
//
// Mask file:
//   scrubmask v1 frames=<total frames> bits=<bits per frame> device=<fingerprint>
//   # optional comment lines
//   <column>/<region>/<minor> <hex>
// One line per frame holding at least one set bit, in frame-index order. The
// hex string has ceil(bits/4) digits written most significant first, so bit 0
// of the frame is the low bit of the last digit.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scrubplan/fabric.h"
#include "scrubplan/graph.h"
#include "scrubplan/layout.h"

namespace scrubplan {

class InconsistentInputs : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class MaskFormatError : public std::runtime_error
{
  public:
    MaskFormatError(int line, const std::string &msg);
    int line() const { return line_; }

  private:
    int line_;
};

class DeviceMismatch : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// An unset PIP whose accidental activation shorts two routed wires: PIP q of
// a tile joins the wires behind PIPs q-64 (victim) and q-128 (aggressor).
struct BridgePip
{
    TileLoc tile;
    int pip = 0;
    int victim_route = 0; // index into Routing::nets
    int victim_node = 0;
    int aggressor_route = 0;
    int aggressor_node = 0;
};

std::vector<BridgePip> bridge_pips(const FabricModel &dev, const Routing &routing);

// Per route, whether each node's subtree reaches a critical sink.
std::vector<std::vector<bool>> critical_route_nodes(const Routing &routing, const Classification &c);

struct BitClassification
{
    ConfigMask essential;
    ConfigMask critical;
    std::uint64_t n_e = 0;
    std::uint64_t n_c = 0;
    std::string fingerprint;
    int total_frames = 0;
};

BitClassification classify_bits(const FabricModel &dev, const MappedNetlist &n, const std::vector<PackedSlice> &packed,
                                const Placement &p, const Routing &routing, const Classification &c);

struct FrameUtilization
{
    int frame = 0;
    std::uint64_t essential = 0;
    std::uint64_t critical = 0;
};

struct FrameReport
{
    int n_fr_used = 0;
    int n_fr_ff = 0;
    // Used frames whose (column, region) lies outside the mask; 0 without a mask.
    int n_fr_outside_mask = 0;
    std::uint64_t n_e = 0;
    std::uint64_t n_c = 0;
    std::vector<FrameUtilization> frames; // essential count descending, then frame index
};

FrameReport frame_report(const FabricModel &dev, const std::vector<PackedSlice> &packed, const Placement &p,
                         const BitClassification &bc, const RegionMask *mask);

// CSV "frame,essential_bits,critical_bits", frame as column/region/minor.
std::string frame_report_csv(const FabricModel &dev, const FrameReport &r);

enum class MaskKind
{
    Essential,
    Critical,
};

std::string write_mask(const FabricModel &dev, const BitClassification &bc, MaskKind which);
std::string write_mask(const FabricModel &dev, const ConfigMask &mask, const std::vector<std::string> &comments = {});
ConfigMask read_mask(std::string_view text, const FabricModel &dev);

} // namespace scrubplan
