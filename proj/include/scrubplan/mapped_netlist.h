// LUT/flip-flop netlist produced by technology mapping.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scrubplan/blif.h"

namespace scrubplan {

using CellId = int;
using NetId = int;

enum class CellKind
{
    InputPad,
    OutputPad,
    Lut,
    FlipFlop,
    Const0,
    Const1,
};

const char *to_string(CellKind k);

// Pin index used for the clock input of a flip-flop. Clock pins are carried
// for completeness but never produce graph edges or simulation reads.
inline constexpr int kClockPin = -1;

struct PinRef
{
    CellId cell = -1;
    int pin = 0;

    friend bool operator==(const PinRef &, const PinRef &) = default;
};

struct Cell
{
    CellKind kind = CellKind::Lut;
    std::string name;
    std::vector<NetId> inputs; // data pins only; LUT pin i is truth-table address bit i
    NetId clock = -1;          // flip-flops only
    NetId output = -1;
    std::uint64_t truth = 0; // LUT truth table, bit a = f(address a)
    int init = 0;            // flip-flop raw BLIF init (0..3)

    bool is_lut_like() const { return kind == CellKind::Lut || kind == CellKind::Const0 || kind == CellKind::Const1; }
    // Number of meaningful truth-table entries for LUT-like cells.
    int truth_size() const { return is_lut_like() ? 1 << inputs.size() : 0; }
    // Reset value used by simulation (unknown init reads as 0).
    bool reset_value() const { return init == 1; }
};

struct Net
{
    std::string name;
    CellId driver = -1;
    std::vector<PinRef> sinks; // includes clock pins (pin == kClockPin)
};

struct Edge
{
    CellId src;
    CellId dst;
    int dst_pin;

    friend bool operator==(const Edge &, const Edge &) = default;
};

struct MappedNetlist
{
    std::string name;
    std::vector<Cell> cells;
    std::vector<Net> nets;
    std::vector<CellId> inputs;  // InputPad cells in port order
    std::vector<CellId> outputs; // OutputPad cells in port order

    // One edge per (driver, data sink) pair; clock pins excluded.
    std::vector<Edge> edges() const;

    int count(CellKind k) const;
    int unknown_init_count() const;

    // Structural checks: single drivers, pin/net consistency, LUT arity and
    // truth-table size. Throws std::logic_error describing the violation.
    void validate(int max_lut_inputs) const;
};

// Maps every SopGate to a tree of LUTs with at most `k` inputs (2 <= k <= 6)
// and every latch to a FlipFlop.
MappedNetlist tech_map(const Netlist &n, int k);

} // namespace scrubplan
