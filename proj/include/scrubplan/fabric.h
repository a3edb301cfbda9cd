// Abstract frame-organized FPGA fabric and its public resource-to-bit map.
//
// Geometry: columns 0 and clb_columns+1 are IOB columns, columns in between
// are CLB columns. A frame is one column wide and one clock region tall. Every
// tile owns a 64-bit slot in each of the frames_per_column_region minors of
// its (column, region); the slot of row r (within its region) starts at bit
// r*64, shifted past a reserved 32-bit word in the middle of the frame.
//
// Minors [0, routing_minors) hold PIP bits: PIP p of a tile is minor p/64,
// slot bit p%64. In IOB tiles the top pads_per_iob_tile*4 PIP positions are
// pad configuration bits instead. The remaining minors hold slice bits: each
// slice owns 64/slices_per_tile slot bits per slice minor, and its functional
// bit i (LUT l truth bit t is i = l*64+t, FF f is i = luts*64+f) sits in slice
// minor i % slice_minors at slot position i / slice_minors.
#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace scrubplan {

class InvalidSpec : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class OffDevice : public std::out_of_range
{
  public:
    using std::out_of_range::out_of_range;
};

struct DeviceSpec
{
    int clb_columns = 20;
    int rows = 80;
    int region_height = 40;
    int frames_per_column_region = 36;
    int bits_per_frame = 2592;
    int slices_per_tile = 2;
    int luts_per_slice = 4;
    int ffs_per_slice = 8;
    int lut_k = 6;
    int routing_minors = 12;
    int pads_per_iob_tile = 2;

    // Throws InvalidSpec naming the violated constraint.
    void validate() const;
    // Stable 64-bit FNV-1a fingerprint of all fields, as 16 hex digits.
    std::string fingerprint() const;

    nlohmann::json to_json() const;
    // Missing keys keep their defaults; unknown keys are rejected.
    static DeviceSpec from_json(const nlohmann::json &j);
};

struct FrameAddr
{
    int column = 0;
    int region = 0;
    int minor = 0;

    auto operator<=>(const FrameAddr &) const = default;
    std::string str() const; // "column/region/minor"
};

struct BitAddr
{
    FrameAddr frame;
    int offset = 0;

    auto operator<=>(const BitAddr &) const = default;
    std::string str() const; // "column/region/minor:offset"
};

struct TileLoc
{
    int column = 0;
    int row = 0;

    auto operator<=>(const TileLoc &) const = default;
};

struct ResourceInstance
{
    enum class Kind
    {
        Slice,
        Pip,
        Iob,
    };
    Kind kind = Kind::Slice;
    TileLoc tile;
    int index = 0; // slice within tile, PIP index, or pad within IOB tile

    auto operator<=>(const ResourceInstance &) const = default;
};

// What a single configuration bit controls.
struct ResourceBit
{
    enum class Role
    {
        LutTruth,
        FfConfig,
        Pip,
        IobConfig,
    };
    ResourceInstance resource;
    Role role = Role::Pip;
    int sub = 0;   // LUT index in the slice, FF index in the slice, or 0
    int index = 0; // truth-table index, or bit within the pad's config
};

inline constexpr int kSlotBits = 64;
inline constexpr int kReservedWordBits = 32;
inline constexpr int kPadConfigBits = 4;

class FabricModel
{
  public:
    explicit FabricModel(DeviceSpec spec);

    const DeviceSpec &spec() const { return spec_; }
    int total_columns() const { return spec_.clb_columns + 2; }
    int regions() const { return spec_.rows / spec_.region_height; }
    int total_frames() const { return total_columns() * regions() * spec_.frames_per_column_region; }
    std::uint64_t total_bits() const { return std::uint64_t(total_frames()) * spec_.bits_per_frame; }
    int slice_minors() const { return spec_.frames_per_column_region - spec_.routing_minors; }
    int slice_functional_bits() const { return spec_.luts_per_slice * 64 + spec_.ffs_per_slice; }
    int reserved_start() const { return (spec_.region_height / 2) * kSlotBits; }

    bool is_iob_column(int column) const { return column == 0 || column == total_columns() - 1; }
    bool on_device(TileLoc t) const
    {
        return t.column >= 0 && t.column < total_columns() && t.row >= 0 && t.row < spec_.rows;
    }
    int region_of(int row) const { return row / spec_.region_height; }
    // PIPs available for routing in a tile of the given column.
    int pip_budget(int column) const;
    int slices_per_block() const { return spec_.region_height * spec_.slices_per_tile; }
    int total_slice_sites() const { return spec_.clb_columns * spec_.rows * spec_.slices_per_tile; }

    int frame_index(const FrameAddr &f) const
    {
        return (f.column * regions() + f.region) * spec_.frames_per_column_region + f.minor;
    }
    FrameAddr frame_at(int index) const;
    bool valid_frame(const FrameAddr &f) const;
    // Linear bit key: frame_index * bits_per_frame + offset.
    std::uint64_t key(const BitAddr &b) const
    {
        return std::uint64_t(frame_index(b.frame)) * spec_.bits_per_frame + b.offset;
    }
    BitAddr bit_at(std::uint64_t key) const;

    BitAddr lut_bit(TileLoc tile, int slice, int lut, int tt_index) const;
    BitAddr ff_bit(TileLoc tile, int slice, int ff) const;
    BitAddr pip_bit(TileLoc tile, int pip) const;

    // fmap: configuration bits of a resource, sorted, pairwise disjoint
    // across distinct resources. Throws OffDevice.
    std::vector<BitAddr> fmap_bits(const ResourceInstance &r) const;

    // Inverse of fmap for a single bit; nullopt for reserved or unmapped bits.
    std::optional<ResourceBit> decode(const BitAddr &b) const;

  private:
    BitAddr slot_bit(TileLoc tile, int minor, int slot) const;
    void check_tile(TileLoc t) const;

    DeviceSpec spec_;
};

// Sparse set of configuration bits, one bitmap per touched frame.
class ConfigMask
{
  public:
    explicit ConfigMask(int bits_per_frame = 2592) : bits_per_frame_(bits_per_frame) {}

    void set(int frame, int offset);
    bool test(int frame, int offset) const;
    std::uint64_t count() const;
    std::uint64_t count_in(int frame) const;
    // Frame indices with at least one set bit, ascending.
    std::vector<int> frames() const;
    bool subset_of(const ConfigMask &other) const;
    void merge(const ConfigMask &other);
    // All set bits as (frame, offset) pairs in ascending order.
    std::vector<std::pair<int, int>> bits() const;

    int bits_per_frame() const { return bits_per_frame_; }
    const std::map<int, std::vector<std::uint64_t>> &words() const { return frames_; }
    std::map<int, std::vector<std::uint64_t>> &words() { return frames_; }

    friend bool operator==(const ConfigMask &a, const ConfigMask &b);

  private:
    int bits_per_frame_;
    std::map<int, std::vector<std::uint64_t>> frames_;
};

std::vector<FrameAddr> frames_of(const std::vector<BitAddr> &bits);

// Machine-readable description of the per-tile bit layout.
nlohmann::json describe_fabric(const FabricModel &dev);

} // namespace scrubplan
