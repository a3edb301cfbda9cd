#include "scrubplan/mapped_netlist.h"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace scrubplan {

const char *to_string(CellKind k)
{
    switch (k) {
    case CellKind::InputPad:
        return "input";
    case CellKind::OutputPad:
        return "output";
    case CellKind::Lut:
        return "lut";
    case CellKind::FlipFlop:
        return "ff";
    case CellKind::Const0:
        return "const0";
    case CellKind::Const1:
        return "const1";
    }
    return "?";
}

std::vector<Edge> MappedNetlist::edges() const
{
    std::vector<Edge> out;
    for (const auto &net : nets)
        for (const auto &s : net.sinks)
            if (s.pin != kClockPin)
                out.push_back({net.driver, s.cell, s.pin});
    return out;
}

int MappedNetlist::count(CellKind k) const
{
    return int(std::count_if(cells.begin(), cells.end(), [k](const Cell &c) { return c.kind == k; }));
}

int MappedNetlist::unknown_init_count() const
{
    return int(std::count_if(cells.begin(), cells.end(), [](const Cell &c) {
        return c.kind == CellKind::FlipFlop && c.init != 0 && c.init != 1;
    }));
}

void MappedNetlist::validate(int max_lut_inputs) const
{
    auto fail = [](const std::string &m) { throw std::logic_error("mapped netlist: " + m); };
    std::vector<int> drivers(nets.size(), 0);
    for (size_t c = 0; c < cells.size(); ++c) {
        const Cell &cell = cells[c];
        if (cell.output >= 0) {
            if (size_t(cell.output) >= nets.size())
                fail("cell '" + cell.name + "' drives an unknown net");
            if (nets[cell.output].driver != CellId(c))
                fail("net '" + nets[cell.output].name + "' driver mismatch");
            ++drivers[cell.output];
        }
        for (NetId in : cell.inputs)
            if (in < 0 || size_t(in) >= nets.size())
                fail("cell '" + cell.name + "' reads an unknown net");
        if (cell.kind == CellKind::Lut) {
            if (int(cell.inputs.size()) > max_lut_inputs)
                fail("LUT '" + cell.name + "' exceeds " + std::to_string(max_lut_inputs) + " inputs");
            if (cell.inputs.size() < 6 && (cell.truth >> (1u << cell.inputs.size())) != 0)
                fail("LUT '" + cell.name + "' truth table wider than its inputs");
        }
        if (cell.kind == CellKind::FlipFlop && cell.inputs.size() != 1)
            fail("flip-flop '" + cell.name + "' needs exactly one data input");
        if (cell.kind == CellKind::OutputPad && cell.inputs.size() != 1)
            fail("output pad '" + cell.name + "' needs exactly one input");
    }
    for (size_t n = 0; n < nets.size(); ++n)
        if (drivers[n] != 1)
            fail("net '" + nets[n].name + "' has " + std::to_string(drivers[n]) + " drivers");
}

namespace {

// Boolean function given as a BLIF cover over `nvars` variables; variable i
// is cube position i and truth-table address bit i.
struct Cover
{
    int nvars = 0;
    std::vector<std::string> cubes;
    bool onset = true;

    bool trivially_constant(bool &value) const
    {
        if (cubes.empty()) {
            value = !onset;
            return true;
        }
        for (const auto &c : cubes)
            if (c.find_first_not_of('-') == std::string::npos) {
                value = onset;
                return true;
            }
        return false;
    }

    // Requires nvars <= 6.
    std::uint64_t truth() const
    {
        std::uint64_t on = 0;
        const unsigned size = 1u << nvars;
        for (const auto &c : cubes) {
            unsigned care = 0, val = 0;
            for (int i = 0; i < nvars; ++i) {
                if (c[i] == '-')
                    continue;
                care |= 1u << i;
                if (c[i] == '1')
                    val |= 1u << i;
            }
            for (unsigned a = 0; a < size; ++a)
                if ((a & care) == val)
                    on |= std::uint64_t(1) << a;
        }
        const std::uint64_t full = size == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << size) - 1;
        return onset ? on : (~on & full);
    }

    // Fixes the top `j` variables to the bits of `assignment`.
    Cover cofactor(int j, unsigned assignment) const
    {
        Cover r;
        r.nvars = nvars - j;
        r.onset = onset;
        for (const auto &c : cubes) {
            bool keep = true;
            for (int t = 0; t < j && keep; ++t) {
                char ch = c[r.nvars + t];
                bool bit = (assignment >> t) & 1;
                keep = ch == '-' || (ch == '1') == bit;
            }
            if (keep)
                r.cubes.push_back(c.substr(0, r.nvars));
        }
        return r;
    }
};

std::uint64_t mask_of(int nvars)
{
    return nvars >= 6 ? ~std::uint64_t(0) : (std::uint64_t(1) << (1u << nvars)) - 1;
}

class Mapper
{
  public:
    Mapper(const Netlist &src, int k) : src_(src), k_(k) {}

    MappedNetlist run()
    {
        out_.name = src_.name;
        for (const auto &[name, info] : src_.nets)
            net_of(name);
        for (const auto &in : src_.inputs) {
            CellId c = add_cell(CellKind::InputPad, in);
            out_.cells[c].output = net_of(in);
            out_.inputs.push_back(c);
        }
        for (const auto &g : src_.gates)
            map_gate(g);
        for (const auto &l : src_.latches) {
            CellId c = add_cell(CellKind::FlipFlop, l.output);
            Cell &cell = out_.cells[c];
            cell.inputs = {net_of(l.input)};
            if (!l.control.empty())
                cell.clock = net_of(l.control);
            cell.init = l.init;
            cell.output = net_of(l.output);
        }
        for (const auto &o : src_.outputs) {
            CellId c = add_cell(CellKind::OutputPad, "out:" + o);
            out_.cells[c].inputs = {net_of(o)};
            out_.outputs.push_back(c);
        }
        for (size_t c = 0; c < out_.cells.size(); ++c) {
            const Cell &cell = out_.cells[c];
            if (cell.output >= 0)
                out_.nets[cell.output].driver = CellId(c);
            for (size_t p = 0; p < cell.inputs.size(); ++p)
                out_.nets[cell.inputs[p]].sinks.push_back({CellId(c), int(p)});
            if (cell.clock >= 0)
                out_.nets[cell.clock].sinks.push_back({CellId(c), kClockPin});
        }
        return std::move(out_);
    }

  private:
    NetId net_of(const std::string &name)
    {
        auto [it, fresh] = net_ids_.emplace(name, NetId(out_.nets.size()));
        if (fresh)
            out_.nets.push_back({name, -1, {}});
        return it->second;
    }

    CellId add_cell(CellKind kind, std::string name)
    {
        Cell c;
        c.kind = kind;
        c.name = std::move(name);
        out_.cells.push_back(std::move(c));
        return CellId(out_.cells.size() - 1);
    }

    NetId fresh_net(const std::string &base)
    {
        std::string name;
        do {
            name = base + "$d" + std::to_string(counter_++);
        } while (net_ids_.count(name));
        return net_of(name);
    }

    void add_lut(NetId out, std::vector<NetId> inputs, std::uint64_t truth)
    {
        CellId c = add_cell(CellKind::Lut, out_.nets[out].name);
        Cell &cell = out_.cells[c];
        cell.inputs = std::move(inputs);
        cell.truth = truth & mask_of(int(cell.inputs.size()));
        cell.output = out;
    }

    void map_gate(const SopGate &g)
    {
        NetId out = net_of(g.output);
        if (g.inputs.empty()) {
            bool one = !g.cover.empty() && g.cover.front().value;
            CellId c = add_cell(one ? CellKind::Const1 : CellKind::Const0, g.output);
            out_.cells[c].output = out;
            out_.cells[c].truth = one ? 1 : 0;
            return;
        }
        Cover f;
        f.nvars = int(g.inputs.size());
        f.onset = g.cover.empty() ? true : g.cover.front().value;
        for (const auto &row : g.cover)
            f.cubes.push_back(row.cube);
        std::vector<NetId> ins;
        for (const auto &s : g.inputs)
            ins.push_back(net_of(s));
        realize(f, ins, out);
    }

    // Realizes `f` over `ins` so that net `out` carries it.
    void realize(const Cover &f, const std::vector<NetId> &ins, NetId out)
    {
        const int n = f.nvars;
        if (n <= k_) {
            add_lut(out, ins, f.truth());
            return;
        }
        // Multi-variable Shannon split on the highest-index variables: the
        // top LUT selects among the distinct non-constant cofactors.
        for (int j = n - k_; j < k_; ++j) {
            const int low = n - j;
            std::vector<std::uint64_t> cof(1u << j);
            for (unsigned a = 0; a < cof.size(); ++a)
                cof[a] = f.cofactor(j, a).truth();
            const std::uint64_t full = mask_of(low);
            std::vector<std::uint64_t> distinct;
            for (auto t : cof)
                if (t != 0 && t != full && std::find(distinct.begin(), distinct.end(), t) == distinct.end())
                    distinct.push_back(t);
            if (j + int(distinct.size()) > k_)
                continue;
            std::vector<NetId> low_ins(ins.begin(), ins.begin() + low);
            std::vector<NetId> top_ins(ins.begin() + low, ins.end());
            for (auto t : distinct) {
                NetId sub = fresh_net(out_.nets[out].name);
                add_lut(sub, low_ins, t);
                top_ins.push_back(sub);
            }
            const unsigned top_size = 1u << top_ins.size();
            std::uint64_t truth = 0;
            for (unsigned a = 0; a < top_size; ++a) {
                unsigned sel = a & ((1u << j) - 1);
                std::uint64_t t = cof[sel];
                bool v;
                if (t == 0)
                    v = false;
                else if (t == full)
                    v = true;
                else {
                    size_t idx = std::find(distinct.begin(), distinct.end(), t) - distinct.begin();
                    v = (a >> (j + idx)) & 1;
                }
                if (v)
                    truth |= std::uint64_t(1) << a;
            }
            add_lut(out, top_ins, truth);
            return;
        }
        // Plain Shannon step on the top variable.
        std::vector<NetId> top_ins{ins.back()};
        std::vector<NetId> rest(ins.begin(), ins.end() - 1);
        int cof_pin[2] = {-1, -1};
        bool cof_val[2] = {false, false};
        for (unsigned v = 0; v < 2; ++v) {
            Cover c = f.cofactor(1, v);
            if (c.trivially_constant(cof_val[v]))
                continue;
            NetId sub = fresh_net(out_.nets[out].name);
            realize(c, rest, sub);
            cof_pin[v] = int(top_ins.size());
            top_ins.push_back(sub);
        }
        if (int(top_ins.size()) > k_) {
            // 2-input LUTs: out = (!s & f0) | (s & f1).
            NetId lo = fresh_net(out_.nets[out].name);
            NetId hi = fresh_net(out_.nets[out].name);
            add_lut(lo, {top_ins[0], top_ins[1]}, 0b0100);
            add_lut(hi, {top_ins[0], top_ins[2]}, 0b1000);
            add_lut(out, {lo, hi}, 0b1110);
            return;
        }
        std::uint64_t truth = 0;
        for (unsigned a = 0; a < (1u << top_ins.size()); ++a) {
            unsigned sel = a & 1;
            bool v = cof_pin[sel] < 0 ? cof_val[sel] : bool((a >> cof_pin[sel]) & 1);
            if (v)
                truth |= std::uint64_t(1) << a;
        }
        add_lut(out, top_ins, truth);
    }

    const Netlist &src_;
    int k_;
    MappedNetlist out_;
    std::map<std::string, NetId> net_ids_;
    int counter_ = 0;
};

} // namespace

MappedNetlist tech_map(const Netlist &n, int k)
{
    if (k < 2 || k > 6)
        throw std::invalid_argument("tech_map: LUT size must be within [2, 6]");
    return Mapper(n, k).run();
}

} // namespace scrubplan
