#include "scrubplan/fabric.h"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <set>

namespace scrubplan {

namespace {

struct Field
{
    const char *name;
    int DeviceSpec::*member;
};

constexpr Field kFields[] = {
        {"clb_columns", &DeviceSpec::clb_columns},
        {"rows", &DeviceSpec::rows},
        {"region_height", &DeviceSpec::region_height},
        {"frames_per_column_region", &DeviceSpec::frames_per_column_region},
        {"bits_per_frame", &DeviceSpec::bits_per_frame},
        {"slices_per_tile", &DeviceSpec::slices_per_tile},
        {"luts_per_slice", &DeviceSpec::luts_per_slice},
        {"ffs_per_slice", &DeviceSpec::ffs_per_slice},
        {"lut_k", &DeviceSpec::lut_k},
        {"routing_minors", &DeviceSpec::routing_minors},
        {"pads_per_iob_tile", &DeviceSpec::pads_per_iob_tile},
};

void require(bool ok, const std::string &why)
{
    if (!ok)
        throw InvalidSpec(why);
}

} // namespace

void DeviceSpec::validate() const
{
    for (const auto &f : kFields)
        require(this->*f.member >= 1, std::string(f.name) + " must be >= 1");
    require(rows % region_height == 0, "rows must be a multiple of region_height");
    require(bits_per_frame >= region_height * kSlotBits + kReservedWordBits,
            "bits_per_frame too small: need region_height*64 + 32 (tile slots plus reserved word)");
    require(lut_k <= 6, "lut_k must be <= 6");
    require(kSlotBits % slices_per_tile == 0, "slices_per_tile must divide 64");
    require(routing_minors < frames_per_column_region, "routing_minors must leave at least one slice minor");
    const int slice_minors = frames_per_column_region - routing_minors;
    const int functional = luts_per_slice * 64 + ffs_per_slice;
    require((functional + slice_minors - 1) / slice_minors <= kSlotBits / slices_per_tile,
            "slice functional bits do not fit the slice minors");
    require(pads_per_iob_tile * kPadConfigBits < routing_minors * kSlotBits,
            "pad configuration bits exceed the IOB routing minors");
}

std::string DeviceSpec::fingerprint() const
{
    std::string text;
    for (const auto &f : kFields)
        text += std::string(f.name) + "=" + std::to_string(this->*f.member) + ";";
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json DeviceSpec::to_json() const
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto &f : kFields)
        j[f.name] = this->*f.member;
    return j;
}

DeviceSpec DeviceSpec::from_json(const nlohmann::json &j)
{
    if (!j.is_object())
        throw InvalidSpec("device spec must be a JSON object");
    DeviceSpec s;
    for (const auto &[key, value] : j.items()) {
        auto it = std::find_if(std::begin(kFields), std::end(kFields),
                               [&](const Field &f) { return key == f.name; });
        if (it == std::end(kFields))
            throw InvalidSpec("unknown device spec key '" + key + "'");
        if (!value.is_number_integer())
            throw InvalidSpec("device spec key '" + key + "' must be an integer");
        s.*(it->member) = value.get<int>();
    }
    s.validate();
    return s;
}

std::string FrameAddr::str() const
{
    return std::to_string(column) + "/" + std::to_string(region) + "/" + std::to_string(minor);
}

std::string BitAddr::str() const { return frame.str() + ":" + std::to_string(offset); }

FabricModel::FabricModel(DeviceSpec spec) : spec_(spec) { spec_.validate(); }

int FabricModel::pip_budget(int column) const
{
    const int all = spec_.routing_minors * kSlotBits;
    return is_iob_column(column) ? all - spec_.pads_per_iob_tile * kPadConfigBits : all;
}

FrameAddr FabricModel::frame_at(int index) const
{
    const int per_col = regions() * spec_.frames_per_column_region;
    FrameAddr f;
    f.column = index / per_col;
    f.region = (index % per_col) / spec_.frames_per_column_region;
    f.minor = index % spec_.frames_per_column_region;
    return f;
}

bool FabricModel::valid_frame(const FrameAddr &f) const
{
    return f.column >= 0 && f.column < total_columns() && f.region >= 0 && f.region < regions() && f.minor >= 0 &&
           f.minor < spec_.frames_per_column_region;
}

BitAddr FabricModel::bit_at(std::uint64_t key) const
{
    BitAddr b;
    b.frame = frame_at(int(key / spec_.bits_per_frame));
    b.offset = int(key % spec_.bits_per_frame);
    return b;
}

void FabricModel::check_tile(TileLoc t) const
{
    if (!on_device(t))
        throw OffDevice("tile (" + std::to_string(t.column) + "," + std::to_string(t.row) + ") is off-device");
}

BitAddr FabricModel::slot_bit(TileLoc tile, int minor, int slot) const
{
    BitAddr b;
    b.frame = {tile.column, region_of(tile.row), minor};
    int base = (tile.row % spec_.region_height) * kSlotBits + slot;
    b.offset = base >= reserved_start() ? base + kReservedWordBits : base;
    return b;
}

BitAddr FabricModel::lut_bit(TileLoc tile, int slice, int lut, int tt_index) const
{
    const int i = lut * 64 + tt_index;
    const int slot = slice * (kSlotBits / spec_.slices_per_tile) + i / slice_minors();
    return slot_bit(tile, spec_.routing_minors + i % slice_minors(), slot);
}

BitAddr FabricModel::ff_bit(TileLoc tile, int slice, int ff) const
{
    const int i = spec_.luts_per_slice * 64 + ff;
    const int slot = slice * (kSlotBits / spec_.slices_per_tile) + i / slice_minors();
    return slot_bit(tile, spec_.routing_minors + i % slice_minors(), slot);
}

BitAddr FabricModel::pip_bit(TileLoc tile, int pip) const { return slot_bit(tile, pip / kSlotBits, pip % kSlotBits); }

std::vector<BitAddr> FabricModel::fmap_bits(const ResourceInstance &r) const
{
    check_tile(r.tile);
    std::vector<BitAddr> out;
    switch (r.kind) {
    case ResourceInstance::Kind::Slice:
        if (is_iob_column(r.tile.column))
            throw OffDevice("slices do not exist in IOB columns");
        if (r.index < 0 || r.index >= spec_.slices_per_tile)
            throw OffDevice("slice index out of range");
        for (int l = 0; l < spec_.luts_per_slice; ++l)
            for (int t = 0; t < 64; ++t)
                out.push_back(lut_bit(r.tile, r.index, l, t));
        for (int f = 0; f < spec_.ffs_per_slice; ++f)
            out.push_back(ff_bit(r.tile, r.index, f));
        break;
    case ResourceInstance::Kind::Pip:
        if (r.index < 0 || r.index >= pip_budget(r.tile.column))
            throw OffDevice("PIP index out of range");
        out.push_back(pip_bit(r.tile, r.index));
        break;
    case ResourceInstance::Kind::Iob:
        if (!is_iob_column(r.tile.column))
            throw OffDevice("IOB resources exist only in IOB columns");
        if (r.index < 0 || r.index >= spec_.pads_per_iob_tile)
            throw OffDevice("pad index out of range");
        for (int k = 0; k < kPadConfigBits; ++k)
            out.push_back(pip_bit(r.tile, pip_budget(r.tile.column) + r.index * kPadConfigBits + k));
        break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<ResourceBit> FabricModel::decode(const BitAddr &b) const
{
    if (!valid_frame(b.frame) || b.offset < 0 || b.offset >= spec_.bits_per_frame)
        return std::nullopt;
    int base = b.offset;
    if (base >= reserved_start()) {
        if (base < reserved_start() + kReservedWordBits)
            return std::nullopt;
        base -= kReservedWordBits;
    }
    if (base >= spec_.region_height * kSlotBits)
        return std::nullopt;
    TileLoc tile{b.frame.column, b.frame.region * spec_.region_height + base / kSlotBits};
    const int slot = base % kSlotBits;
    ResourceBit rb;
    if (b.frame.minor < spec_.routing_minors) {
        const int pip = b.frame.minor * kSlotBits + slot;
        const int budget = pip_budget(tile.column);
        if (pip < budget) {
            rb.resource = {ResourceInstance::Kind::Pip, tile, pip};
            rb.role = ResourceBit::Role::Pip;
        } else {
            rb.resource = {ResourceInstance::Kind::Iob, tile, (pip - budget) / kPadConfigBits};
            rb.role = ResourceBit::Role::IobConfig;
            rb.index = (pip - budget) % kPadConfigBits;
        }
        return rb;
    }
    if (is_iob_column(tile.column))
        return std::nullopt;
    const int per_slice = kSlotBits / spec_.slices_per_tile;
    const int slice = slot / per_slice;
    const int i = (slot % per_slice) * slice_minors() + (b.frame.minor - spec_.routing_minors);
    if (i >= slice_functional_bits())
        return std::nullopt;
    rb.resource = {ResourceInstance::Kind::Slice, tile, slice};
    if (i < spec_.luts_per_slice * 64) {
        rb.role = ResourceBit::Role::LutTruth;
        rb.sub = i / 64;
        rb.index = i % 64;
    } else {
        rb.role = ResourceBit::Role::FfConfig;
        rb.sub = i - spec_.luts_per_slice * 64;
    }
    return rb;
}

void ConfigMask::set(int frame, int offset)
{
    auto &w = frames_[frame];
    if (w.empty())
        w.assign((bits_per_frame_ + 63) / 64, 0);
    w[offset / 64] |= std::uint64_t(1) << (offset % 64);
}

bool ConfigMask::test(int frame, int offset) const
{
    auto it = frames_.find(frame);
    return it != frames_.end() && (it->second[offset / 64] >> (offset % 64) & 1);
}

std::uint64_t ConfigMask::count_in(int frame) const
{
    auto it = frames_.find(frame);
    if (it == frames_.end())
        return 0;
    std::uint64_t n = 0;
    for (auto w : it->second)
        n += std::popcount(w);
    return n;
}

std::uint64_t ConfigMask::count() const
{
    std::uint64_t n = 0;
    for (const auto &[f, w] : frames_)
        n += count_in(f);
    return n;
}

std::vector<int> ConfigMask::frames() const
{
    std::vector<int> out;
    for (const auto &[f, w] : frames_)
        if (std::any_of(w.begin(), w.end(), [](std::uint64_t x) { return x != 0; }))
            out.push_back(f);
    return out;
}

bool ConfigMask::subset_of(const ConfigMask &other) const
{
    for (const auto &[f, w] : frames_) {
        auto it = other.frames_.find(f);
        for (size_t i = 0; i < w.size(); ++i) {
            std::uint64_t theirs = it == other.frames_.end() ? 0 : it->second[i];
            if (w[i] & ~theirs)
                return false;
        }
    }
    return true;
}

void ConfigMask::merge(const ConfigMask &other)
{
    for (const auto &[f, w] : other.frames_) {
        auto &mine = frames_[f];
        if (mine.empty())
            mine.assign(w.size(), 0);
        for (size_t i = 0; i < w.size(); ++i)
            mine[i] |= w[i];
    }
}

std::vector<std::pair<int, int>> ConfigMask::bits() const
{
    std::vector<std::pair<int, int>> out;
    for (const auto &[f, w] : frames_)
        for (size_t i = 0; i < w.size(); ++i) {
            std::uint64_t x = w[i];
            while (x) {
                int b = std::countr_zero(x);
                out.emplace_back(f, int(i * 64 + b));
                x &= x - 1;
            }
        }
    return out;
}

bool operator==(const ConfigMask &a, const ConfigMask &b)
{
    return a.bits_per_frame_ == b.bits_per_frame_ && a.bits() == b.bits();
}

std::vector<FrameAddr> frames_of(const std::vector<BitAddr> &bits)
{
    std::set<FrameAddr> s;
    for (const auto &b : bits)
        s.insert(b.frame);
    return {s.begin(), s.end()};
}

nlohmann::json describe_fabric(const FabricModel &dev)
{
    using nlohmann::json;
    const auto &s = dev.spec();
    json j;
    j["spec"] = s.to_json();
    j["fingerprint"] = s.fingerprint();
    j["total_columns"] = dev.total_columns();
    j["regions"] = dev.regions();
    j["total_frames"] = dev.total_frames();
    j["iob_columns"] = {0, dev.total_columns() - 1};
    j["frame_index"] = "(column*regions + region)*frames_per_column_region + minor";
    j["tile_slot"] = {
            {"bits", kSlotBits},
            {"offset", "row_in_region*64 + slot_bit, +32 when >= reserved_start"},
            {"reserved_start", dev.reserved_start()},
            {"reserved_bits", kReservedWordBits},
    };
    j["routing"] = {
            {"minors", json::array({0, s.routing_minors})},
            {"pip", "minor = p / 64, slot_bit = p % 64"},
            {"clb_pip_budget", dev.pip_budget(1)},
            {"iob_pip_budget", dev.pip_budget(0)},
            {"split_note", "the division of interconnect bits among minors is this model's assumption"},
    };
    j["iob"] = {
            {"pads_per_tile", s.pads_per_iob_tile},
            {"config_bits_per_pad", kPadConfigBits},
            {"pad_bit", "pip position iob_pip_budget + pad*4 + k"},
    };
    j["slice"] = {
            {"minors", json::array({s.routing_minors, s.frames_per_column_region})},
            {"functional_bits", dev.slice_functional_bits()},
            {"lut_bit", "i = lut*64 + tt_index"},
            {"ff_bit", "i = luts_per_slice*64 + ff"},
            {"placement", "minor = routing_minors + i % slice_minors, slot_bit = slice*(64/slices_per_tile) + i / "
                          "slice_minors"},
    };
    // Concrete sample rows so external tools can cross-check the formulas.
    json samples = json::array();
    auto add = [&](const char *what, BitAddr b) {
        samples.push_back({{"resource", what}, {"frame", b.frame.str()}, {"offset", b.offset}});
    };
    TileLoc t{1, std::min(3, s.rows - 1)};
    add("lut 0 tt 0 slice 0 tile (1,3)", dev.lut_bit(t, 0, 0, 0));
    if (s.luts_per_slice > 2 && s.slices_per_tile > 1)
        add("lut 2 tt 5 slice 1 tile (1,3)", dev.lut_bit(t, 1, 2, 5));
    add("ff 0 slice 0 tile (1,3)", dev.ff_bit(t, 0, 0));
    add("pip 0 tile (1,3)", dev.pip_bit(t, 0));
    j["samples"] = samples;
    return j;
}

} // namespace scrubplan
