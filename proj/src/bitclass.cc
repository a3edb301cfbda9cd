#include "scrubplan/bitclass.h"

#include <algorithm>
#include <charconv>
#include <map>

namespace scrubplan {

MaskFormatError::MaskFormatError(int line, const std::string &msg)
        : std::runtime_error("mask line " + std::to_string(line) + ": " + msg), line_(line)
{
}

std::vector<BridgePip> bridge_pips(const FabricModel &dev, const Routing &routing)
{
    struct Owner
    {
        int route, node;
    };
    std::map<TileLoc, std::vector<Owner>> by_tile;
    for (int r = 0; r < int(routing.nets.size()); ++r) {
        const auto &nodes = routing.nets[r].nodes;
        for (int k = 0; k < int(nodes.size()); ++k) {
            auto &v = by_tile[nodes[k].tile];
            if (int(v.size()) <= nodes[k].pip)
                v.resize(nodes[k].pip + 1, Owner{-1, -1});
            v[nodes[k].pip] = {r, k};
        }
    }
    std::vector<BridgePip> out;
    for (const auto &[tile, owners] : by_tile) {
        const int used = int(owners.size());
        const int budget = dev.pip_budget(tile.column);
        for (int q = std::max(used, 2 * kSlotBits); q < std::min(used + kSlotBits, budget); ++q) {
            const Owner &v = owners[q - kSlotBits];
            const Owner &a = owners[q - 2 * kSlotBits];
            if (v.route < 0 || a.route < 0 || v.route == a.route)
                continue;
            out.push_back({tile, q, v.route, v.node, a.route, a.node});
        }
    }
    return out;
}

std::vector<std::vector<bool>> critical_route_nodes(const Routing &routing, const Classification &c)
{
    std::vector<std::vector<bool>> out;
    out.reserve(routing.nets.size());
    for (const auto &r : routing.nets) {
        std::vector<bool> crit(r.nodes.size(), false);
        for (const auto &[pin, node] : r.sinks)
            if (c.critical_nodes[pin.cell])
                crit[node] = true;
        // Parents always precede their children.
        for (int k = int(r.nodes.size()) - 1; k > 0; --k)
            if (crit[k])
                crit[r.nodes[k].parent] = true;
        out.push_back(std::move(crit));
    }
    return out;
}

BitClassification classify_bits(const FabricModel &dev, const MappedNetlist &n, const std::vector<PackedSlice> &packed,
                                const Placement &p, const Routing &routing, const Classification &c)
{
    const int num_cells = int(c.critical_nodes.size());
    if (num_cells != int(n.cells.size()) || p.slices.size() != packed.size())
        throw InconsistentInputs("placement, netlist and classification refer to different designs");
    for (const auto &s : packed) {
        for (CellId id : s.luts)
            if (id < 0 || id >= num_cells)
                throw InconsistentInputs("packed slice references unknown cell " + std::to_string(id));
        for (CellId id : s.ffs)
            if (id < 0 || id >= num_cells)
                throw InconsistentInputs("packed slice references unknown cell " + std::to_string(id));
    }

    const int bpf = dev.spec().bits_per_frame;
    BitClassification bc{ConfigMask(bpf), ConfigMask(bpf), 0, 0, dev.spec().fingerprint(), dev.total_frames()};
    auto mark = [&](ConfigMask &m, const BitAddr &b) { m.set(dev.frame_index(b.frame), b.offset); };

    for (size_t s = 0; s < packed.size(); ++s) {
        bool crit = false;
        for (CellId id : packed[s].luts)
            crit = crit || c.critical_nodes[id];
        for (CellId id : packed[s].ffs)
            crit = crit || c.critical_nodes[id];
        ResourceInstance r{ResourceInstance::Kind::Slice, p.slices[s].tile, p.slices[s].slice};
        for (const auto &b : dev.fmap_bits(r)) {
            mark(bc.essential, b);
            if (crit)
                mark(bc.critical, b);
        }
    }
    const auto crit_nodes = critical_route_nodes(routing, c);
    for (size_t r = 0; r < routing.nets.size(); ++r)
        for (size_t k = 0; k < routing.nets[r].nodes.size(); ++k) {
            const auto &node = routing.nets[r].nodes[k];
            BitAddr b = dev.pip_bit(node.tile, node.pip);
            mark(bc.essential, b);
            if (crit_nodes[r][k])
                mark(bc.critical, b);
        }
    for (const auto &br : bridge_pips(dev, routing)) {
        BitAddr b = dev.pip_bit(br.tile, br.pip);
        mark(bc.essential, b);
        if (crit_nodes[br.victim_route][br.victim_node])
            mark(bc.critical, b);
    }
    bc.n_e = bc.essential.count();
    bc.n_c = bc.critical.count();
    return bc;
}

FrameReport frame_report(const FabricModel &dev, const std::vector<PackedSlice> &packed, const Placement &p,
                         const BitClassification &bc, const RegionMask *mask)
{
    FrameReport r;
    r.n_e = bc.n_e;
    r.n_c = bc.n_c;
    for (int f : bc.essential.frames()) {
        r.frames.push_back({f, bc.essential.count_in(f), bc.critical.count_in(f)});
        FrameAddr fa = dev.frame_at(f);
        if (mask && !mask->contains(fa.column, fa.region))
            ++r.n_fr_outside_mask;
    }
    r.n_fr_used = int(r.frames.size());
    std::stable_sort(r.frames.begin(), r.frames.end(),
                     [](const FrameUtilization &a, const FrameUtilization &b) { return a.essential > b.essential; });

    std::vector<int> ff_frames;
    for (size_t s = 0; s < packed.size(); ++s)
        for (size_t f = 0; f < packed[s].ffs.size(); ++f)
            ff_frames.push_back(dev.frame_index(dev.ff_bit(p.slices[s].tile, p.slices[s].slice, int(f)).frame));
    std::sort(ff_frames.begin(), ff_frames.end());
    r.n_fr_ff = int(std::unique(ff_frames.begin(), ff_frames.end()) - ff_frames.begin());
    return r;
}

std::string frame_report_csv(const FabricModel &dev, const FrameReport &r)
{
    std::string out = "frame,essential_bits,critical_bits\n";
    for (const auto &f : r.frames)
        out += dev.frame_at(f.frame).str() + "," + std::to_string(f.essential) + "," + std::to_string(f.critical) +
               "\n";
    return out;
}

std::string write_mask(const FabricModel &dev, const ConfigMask &mask, const std::vector<std::string> &comments)
{
    static constexpr char kHex[] = "0123456789abcdef";
    const int bits = dev.spec().bits_per_frame;
    const int digits = (bits + 3) / 4;
    std::string out = "scrubmask v1 frames=" + std::to_string(dev.total_frames()) + " bits=" + std::to_string(bits) +
                      " device=" + dev.spec().fingerprint() + "\n";
    for (const auto &c : comments)
        out += "# " + c + "\n";
    for (const auto &[f, words] : mask.words()) {
        if (std::all_of(words.begin(), words.end(), [](std::uint64_t w) { return w == 0; }))
            continue;
        out += dev.frame_at(f).str();
        out += ' ';
        for (int d = digits - 1; d >= 0; --d) {
            const int bit = d * 4;
            unsigned nib = unsigned(words[bit / 64] >> (bit % 64)) & 0xF;
            out += kHex[nib];
        }
        out += '\n';
    }
    return out;
}

std::string write_mask(const FabricModel &dev, const BitClassification &bc, MaskKind which)
{
    if (which == MaskKind::Essential)
        return write_mask(dev, bc.essential,
                          {"essential bits: all bits of placed slices, used PIPs, and unset PIPs bridging two "
                           "routed wires",
                           "count=" + std::to_string(bc.n_e)});
    return write_mask(dev, bc.critical,
                      {"critical bits: all bits of slices holding a critical cell, and PIPs on route segments "
                       "reaching a critical sink",
                       "count=" + std::to_string(bc.n_c)});
}

namespace {

int parse_int(std::string_view s, int line, const char *what)
{
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        throw MaskFormatError(line, std::string("bad ") + what + " '" + std::string(s) + "'");
    return v;
}

std::string_view after_prefix(std::string_view tok, std::string_view prefix, int line)
{
    if (tok.substr(0, prefix.size()) != prefix)
        throw MaskFormatError(line, "expected '" + std::string(prefix) + "...'");
    return tok.substr(prefix.size());
}

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r'))
            ++i;
        size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r')
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

} // namespace

ConfigMask read_mask(std::string_view text, const FabricModel &dev)
{
    const int bits = dev.spec().bits_per_frame;
    const int digits = (bits + 3) / 4;
    ConfigMask mask(bits);
    int line_no = 0;
    bool header = false;
    int last_frame = -1;
    while (!text.empty()) {
        size_t nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        auto tok = split_ws(line);
        if (!header) {
            if (tok.size() != 5 || tok[0] != "scrubmask" || tok[1] != "v1")
                throw MaskFormatError(line_no, "missing 'scrubmask v1' header");
            int frames = parse_int(after_prefix(tok[2], "frames=", line_no), line_no, "frame count");
            int b = parse_int(after_prefix(tok[3], "bits=", line_no), line_no, "bit count");
            std::string_view dev_hash = after_prefix(tok[4], "device=", line_no);
            if (dev_hash != dev.spec().fingerprint())
                throw DeviceMismatch("mask was written for device " + std::string(dev_hash) + ", expected " +
                                     dev.spec().fingerprint());
            if (frames != dev.total_frames() || b != bits)
                throw MaskFormatError(line_no, "frame geometry does not match the device");
            header = true;
            continue;
        }
        if (tok.empty() || tok[0].front() == '#')
            continue;
        if (tok.size() != 2)
            throw MaskFormatError(line_no, "expected '<column>/<region>/<minor> <hex>'");
        auto addr = tok[0];
        size_t s1 = addr.find('/'), s2 = addr.find('/', s1 == std::string_view::npos ? s1 : s1 + 1);
        if (s1 == std::string_view::npos || s2 == std::string_view::npos)
            throw MaskFormatError(line_no, "bad frame address '" + std::string(addr) + "'");
        FrameAddr fa{parse_int(addr.substr(0, s1), line_no, "column"),
                     parse_int(addr.substr(s1 + 1, s2 - s1 - 1), line_no, "region"),
                     parse_int(addr.substr(s2 + 1), line_no, "minor")};
        if (!dev.valid_frame(fa))
            throw MaskFormatError(line_no, "frame " + fa.str() + " is off-device");
        const int f = dev.frame_index(fa);
        if (f <= last_frame)
            throw MaskFormatError(line_no, "frames must appear once, in ascending order");
        last_frame = f;
        auto hex = tok[1];
        if (int(hex.size()) != digits)
            throw MaskFormatError(line_no, "bitmap must have " + std::to_string(digits) + " hex digits");
        for (int d = 0; d < digits; ++d) {
            char ch = hex[digits - 1 - d];
            int v;
            if (ch >= '0' && ch <= '9')
                v = ch - '0';
            else if (ch >= 'a' && ch <= 'f')
                v = ch - 'a' + 10;
            else if (ch >= 'A' && ch <= 'F')
                v = ch - 'A' + 10;
            else
                throw MaskFormatError(line_no, "bad hex digit");
            for (int k = 0; k < 4; ++k)
                if (v >> k & 1) {
                    int bit = d * 4 + k;
                    if (bit >= bits)
                        throw MaskFormatError(line_no, "bit beyond frame width");
                    mask.set(f, bit);
                }
        }
    }
    if (!header)
        throw MaskFormatError(1, "empty mask");
    return mask;
}

} // namespace scrubplan
