// Cycle-based two-valued simulation of a MappedNetlist.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "scrubplan/mapped_netlist.h"

namespace scrubplan {

class CombinationalLoop : public std::runtime_error
{
  public:
    explicit CombinationalLoop(std::vector<CellId> cells);
    const std::vector<CellId> &cells() const { return cells_; }

  private:
    std::vector<CellId> cells_;
};

// Per cycle: inputs are applied, combinational cells settle in topological
// order, outputs are sampled, then every flip-flop loads its data input.
// Flip-flops reset to their init value, unknown init reading as 0.
//
// The simulator also carries the fault overlays used by fault injection; with
// no overlay installed it is the golden model.
class CycleSimulator
{
  public:
    enum class PinMode : std::uint8_t
    {
        Normal,
        Zero,     // broken route: pin reads constant 0
        OrWithNet // bridged route: pin reads its net OR another net
    };

    explicit CycleSimulator(const MappedNetlist &n);

    void reset();
    void step(std::span<const std::uint8_t> inputs, std::span<std::uint8_t> outputs);

    std::size_t num_inputs() const { return input_nets_.size(); }
    std::size_t num_outputs() const { return out_slots_.size(); }

    // Flip-flop states in cell order.
    std::vector<std::uint8_t> state() const { return ff_state_; }
    // Settled value of every net after the last step, followed by one slot
    // per output pad.
    const std::vector<std::uint8_t> &values() const { return value_; }

    void toggle_truth_bit(CellId cell, int index);
    void set_output_inverted(CellId cell, bool inverted);
    void set_pin(PinRef pin, PinMode mode, NetId other = -1);
    // Removes every overlay; flip-flop state is kept.
    void clear_faults();

  private:
    struct CombCell
    {
        CellId id;
        std::uint32_t first_input; // into comb_inputs_
        std::uint8_t num_inputs;
        std::uint32_t out_slot;
        std::uint64_t truth;
        bool overridden = false;
    };
    struct Override
    {
        CellId cell;
        int pin;
        PinMode mode;
        NetId other;
    };

    void build_order(bool honour_bridges);
    std::uint8_t read_pin(CellId cell, int pin, NetId net) const;

    const MappedNetlist &netlist_;
    std::vector<std::uint8_t> value_; // per net, then one slot per output pad
    std::vector<NetId> input_nets_;
    std::vector<std::uint32_t> out_slots_;
    std::vector<CombCell> comb_;
    std::vector<NetId> comb_inputs_;
    std::vector<int> comb_index_; // cell -> position in comb_, -1 otherwise
    std::vector<CellId> ffs_;
    std::vector<std::uint8_t> ff_state_;
    std::vector<std::uint8_t> ff_inverted_;
    std::vector<std::uint8_t> ff_overridden_;
    std::vector<Override> overrides_;
    std::vector<int> ff_index_; // cell -> position in ffs_
};

// Runs the netlist from reset over `inputs` (one vector of input bits per
// cycle, port order) and returns the sampled outputs of each cycle.
std::vector<std::vector<std::uint8_t>> eval_netlist(const MappedNetlist &n,
                                                    const std::vector<std::vector<std::uint8_t>> &inputs);

} // namespace scrubplan
