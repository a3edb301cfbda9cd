#include "scrubplan/simulator.h"

#include <algorithm>
#include <string>

namespace scrubplan {

namespace {

std::string loop_message(const std::vector<CellId> &cells)
{
    return "combinational loop through " + std::to_string(cells.size()) + " cell(s) without a flip-flop";
}

} // namespace

CombinationalLoop::CombinationalLoop(std::vector<CellId> cells)
        : std::runtime_error(loop_message(cells)), cells_(std::move(cells))
{
}

CycleSimulator::CycleSimulator(const MappedNetlist &n) : netlist_(n)
{
    value_.assign(n.nets.size() + n.outputs.size(), 0);
    comb_index_.assign(n.cells.size(), -1);
    ff_index_.assign(n.cells.size(), -1);
    for (CellId c : n.inputs)
        input_nets_.push_back(n.cells[c].output);
    for (size_t c = 0; c < n.cells.size(); ++c)
        if (n.cells[c].kind == CellKind::FlipFlop) {
            ff_index_[c] = int(ffs_.size());
            ffs_.push_back(CellId(c));
        }
    ff_state_.assign(ffs_.size(), 0);
    ff_inverted_.assign(ffs_.size(), 0);
    ff_overridden_.assign(ffs_.size(), 0);
    build_order(false);
    reset();
}

void CycleSimulator::build_order(bool honour_bridges)
{
    const auto &cells = netlist_.cells;
    auto is_comb = [](const Cell &c) { return c.is_lut_like() || c.kind == CellKind::OutputPad; };

    // Extra dependencies introduced by bridged pins: the bridged net's driver
    // must settle before the reading cell.
    std::vector<std::vector<CellId>> extra(cells.size());
    if (honour_bridges)
        for (const auto &o : overrides_)
            if (o.mode == PinMode::OrWithNet)
                extra[o.cell].push_back(netlist_.nets[o.other].driver);

    std::vector<int> pending(cells.size(), 0);
    std::vector<std::vector<CellId>> fanout(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
        if (!is_comb(cells[c]))
            continue;
        auto depend = [&](CellId d) {
            if (d >= 0 && is_comb(cells[d])) {
                ++pending[c];
                fanout[d].push_back(CellId(c));
            }
        };
        for (NetId in : cells[c].inputs)
            depend(netlist_.nets[in].driver);
        for (CellId d : extra[c])
            depend(d);
    }
    std::vector<CellId> order;
    for (size_t c = 0; c < cells.size(); ++c)
        if (is_comb(cells[c]) && pending[c] == 0)
            order.push_back(CellId(c));
    for (size_t head = 0; head < order.size(); ++head)
        for (CellId s : fanout[order[head]])
            if (--pending[s] == 0)
                order.push_back(s);

    size_t comb_total = 0;
    for (const auto &c : cells)
        comb_total += is_comb(c);
    if (order.size() != comb_total) {
        if (honour_bridges)
            return; // keep the previous order; the bridge reads last cycle's value where it lags
        std::vector<CellId> stuck;
        for (size_t c = 0; c < cells.size(); ++c)
            if (is_comb(cells[c]) && pending[c] > 0)
                stuck.push_back(CellId(c));
        throw CombinationalLoop(std::move(stuck));
    }

    std::vector<std::uint8_t> flagged(cells.size(), 0);
    for (const auto &o : overrides_)
        flagged[o.cell] = 1;
    std::vector<std::uint64_t> truth(cells.size());
    for (const auto &cc : comb_)
        truth[cc.id] = cc.truth;
    const bool have_truth = !comb_.empty();

    comb_.clear();
    comb_inputs_.clear();
    out_slots_.assign(netlist_.outputs.size(), 0);
    std::vector<int> out_pos(cells.size(), -1);
    for (size_t i = 0; i < netlist_.outputs.size(); ++i)
        out_pos[netlist_.outputs[i]] = int(i);
    for (CellId c : order) {
        const Cell &cell = cells[c];
        CombCell cc;
        cc.id = c;
        cc.first_input = std::uint32_t(comb_inputs_.size());
        cc.num_inputs = std::uint8_t(cell.inputs.size());
        comb_inputs_.insert(comb_inputs_.end(), cell.inputs.begin(), cell.inputs.end());
        if (cell.kind == CellKind::OutputPad) {
            cc.truth = 0b10;
            cc.out_slot = std::uint32_t(netlist_.nets.size() + out_pos[c]);
            out_slots_[out_pos[c]] = cc.out_slot;
        } else {
            cc.truth = have_truth ? truth[c] : cell.truth;
            cc.out_slot = std::uint32_t(cell.output);
        }
        cc.overridden = flagged[c];
        comb_index_[c] = int(comb_.size());
        comb_.push_back(cc);
    }
}

void CycleSimulator::reset()
{
    std::fill(value_.begin(), value_.end(), 0);
    for (size_t i = 0; i < ffs_.size(); ++i)
        ff_state_[i] = netlist_.cells[ffs_[i]].reset_value();
}

std::uint8_t CycleSimulator::read_pin(CellId cell, int pin, NetId net) const
{
    for (const auto &o : overrides_) {
        if (o.cell != cell || o.pin != pin)
            continue;
        if (o.mode == PinMode::Zero)
            return 0;
        if (o.mode == PinMode::OrWithNet)
            return value_[net] | value_[o.other];
    }
    return value_[net];
}

void CycleSimulator::step(std::span<const std::uint8_t> inputs, std::span<std::uint8_t> outputs)
{
    for (size_t i = 0; i < input_nets_.size(); ++i)
        value_[input_nets_[i]] = inputs[i] & 1;
    for (size_t i = 0; i < ffs_.size(); ++i)
        value_[netlist_.cells[ffs_[i]].output] = ff_state_[i] ^ ff_inverted_[i];

    const NetId *ins = comb_inputs_.data();
    for (const auto &cc : comb_) {
        unsigned addr = 0;
        const NetId *p = ins + cc.first_input;
        if (!cc.overridden) {
            for (unsigned k = 0; k < cc.num_inputs; ++k)
                addr |= unsigned(value_[p[k]]) << k;
        } else {
            for (unsigned k = 0; k < cc.num_inputs; ++k)
                addr |= unsigned(read_pin(cc.id, int(k), p[k])) << k;
        }
        value_[cc.out_slot] = std::uint8_t((cc.truth >> addr) & 1);
    }
    for (size_t i = 0; i < out_slots_.size(); ++i)
        outputs[i] = value_[out_slots_[i]];

    for (size_t i = 0; i < ffs_.size(); ++i) {
        NetId d = netlist_.cells[ffs_[i]].inputs[0];
        ff_state_[i] = ff_overridden_[i] ? read_pin(ffs_[i], 0, d) : value_[d];
    }
}

void CycleSimulator::toggle_truth_bit(CellId cell, int index)
{
    int pos = comb_index_.at(cell);
    if (pos < 0 || index < 0 || index >= 64)
        throw std::invalid_argument("toggle_truth_bit: not a LUT-like cell or index out of range");
    comb_[pos].truth ^= std::uint64_t(1) << index;
}

void CycleSimulator::set_output_inverted(CellId cell, bool inverted)
{
    int pos = ff_index_.at(cell);
    if (pos < 0)
        throw std::invalid_argument("set_output_inverted: not a flip-flop");
    ff_inverted_[pos] = inverted;
}

void CycleSimulator::set_pin(PinRef pin, PinMode mode, NetId other)
{
    overrides_.push_back({pin.cell, pin.pin, mode, other});
    if (int pos = comb_index_[pin.cell]; pos >= 0)
        comb_[pos].overridden = true;
    if (int pos = ff_index_[pin.cell]; pos >= 0)
        ff_overridden_[pos] = 1;
    if (mode == PinMode::OrWithNet)
        build_order(true);
}

void CycleSimulator::clear_faults()
{
    const bool had_bridge = std::any_of(overrides_.begin(), overrides_.end(),
                                        [](const Override &o) { return o.mode == PinMode::OrWithNet; });
    overrides_.clear();
    std::fill(ff_inverted_.begin(), ff_inverted_.end(), 0);
    std::fill(ff_overridden_.begin(), ff_overridden_.end(), 0);
    for (auto &cc : comb_) {
        cc.overridden = false;
        const Cell &cell = netlist_.cells[cc.id];
        cc.truth = cell.kind == CellKind::OutputPad ? 0b10 : cell.truth;
    }
    if (had_bridge)
        build_order(false);
}

std::vector<std::vector<std::uint8_t>> eval_netlist(const MappedNetlist &n,
                                                    const std::vector<std::vector<std::uint8_t>> &inputs)
{
    CycleSimulator sim(n);
    std::vector<std::vector<std::uint8_t>> out;
    out.reserve(inputs.size());
    std::vector<std::uint8_t> o(sim.num_outputs());
    for (const auto &v : inputs) {
        if (v.size() != sim.num_inputs())
            throw std::invalid_argument("eval_netlist: input vector width mismatch");
        sim.step(v, o);
        out.push_back(o);
    }
    return out;
}

} // namespace scrubplan
