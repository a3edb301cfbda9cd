// Structural BLIF front end: parsing, canonical writing and the pre-mapping
// netlist representation.
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scrubplan {

class BlifError : public std::runtime_error
{
  public:
    enum class Kind
    {
        Syntax,
        MultipleDrivers,
        UndrivenNet,
        UnsupportedDirective,
    };

    BlifError(Kind kind, int line, std::string subject, const std::string &message);

    Kind kind() const { return kind_; }
    // 1-based source line, 0 when the error is not tied to a line.
    int line() const { return line_; }
    // Net or directive name the error is about.
    const std::string &subject() const { return subject_; }

  private:
    Kind kind_;
    int line_;
    std::string subject_;
};

struct CoverRow
{
    std::string cube; // over {0,1,-}, one character per gate input
    bool value = true;
};

// One `.names` block. An empty cover is constant 0.
struct SopGate
{
    std::vector<std::string> inputs;
    std::string output;
    std::vector<CoverRow> cover;

    // Evaluates the cover. `assignment` bit i is the value of inputs[i].
    bool eval(const std::vector<bool> &assignment) const;
};

// Raw BLIF init values: 0, 1, 2 (don't care), 3 (unknown).
struct Latch
{
    std::string input;
    std::string output;
    std::string control; // clock net, ignored by analysis
    int init = 3;

    bool init_known() const { return init == 0 || init == 1; }
};

struct NetEndpoint
{
    enum class Kind
    {
        PrimaryInput,
        PrimaryOutput,
        Gate,
        Latch,
        LatchControl,
    };
    Kind kind;
    int index = 0; // gate/latch/port index
    int pin = 0;   // input position for gate sinks
};

struct NetInfo
{
    NetEndpoint driver{NetEndpoint::Kind::PrimaryInput};
    std::vector<NetEndpoint> sinks;
};

struct Netlist
{
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<SopGate> gates;
    std::vector<Latch> latches;
    std::map<std::string, NetInfo> nets;

    // Recomputes `nets` from ports, gates and latches and enforces the
    // single-driver / no-undriven-net invariants.
    void rebuild_nets();
};

Netlist parse_blif(std::string_view text);
Netlist read_blif_file(const std::string &path);

// Canonical writer: one directive per line, no continuations, latches with
// explicit `re <control> <init>` when a control net is present.
std::string write_blif(const Netlist &n);

} // namespace scrubplan
