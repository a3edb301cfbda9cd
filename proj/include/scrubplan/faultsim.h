// Single-bit configuration upset emulation on a placed and routed design.
//
// Campaign per bit: both circuits start from reset; the fault is applied and
// the stimulus runs for T cycles, any output mismatch marking the bit
// essential. The fault is then removed and the stimulus keeps running for a
// repair window without comparison, so that wrong values still in flight in
// feed-forward logic drain out. Finally only the stimulus generator is
// restarted and T more cycles are compared; a mismatch there means corrupted
// state survived the repair, and the bit is critical.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "scrubplan/bitclass.h"
#include "scrubplan/design_io.h"
#include "scrubplan/fabric.h"
#include "scrubplan/prng.h"

namespace scrubplan {

struct FaultEffect
{
    enum class Kind
    {
        NoFunctionalEffect,
        LutBitFlip,     // cell, index
        FfPolarityFlip, // cell
        RouteBreak,     // net, pins read 0
        RouteShort,     // net (victim), other (aggressor), pins read victim OR aggressor
    };
    Kind kind = Kind::NoFunctionalEffect;
    CellId cell = -1;
    int index = 0;
    NetId net = -1;
    NetId other = -1;
    std::vector<PinRef> pins;
};

const char *to_string(FaultEffect::Kind k);

// Lookup structures for decoding bits of one design.
class FaultContext
{
  public:
    explicit FaultContext(const PlacedDesign &d);

    FaultEffect decode(const BitAddr &b) const;
    const PlacedDesign &design() const { return d_; }
    const FabricModel &device() const { return dev_; }

  private:
    std::vector<PinRef> downstream_pins(int route, int node) const;

    const PlacedDesign &d_;
    FabricModel dev_;
    std::map<SliceSite, int> slice_at_;
    std::map<std::uint64_t, std::pair<int, int>> pip_owner_; // bit key -> (route, node)
    std::map<std::uint64_t, BridgePip> bridges_;
};

// Bit-sequence stimulus: cycle c's input i is bit i%64 of PRNG output
// c*words + i/64, words = ceil(inputs/64).
std::vector<std::vector<std::uint8_t>> make_stimulus(std::size_t num_inputs, std::size_t cycles, std::uint64_t seed);

enum class Verdict
{
    Benign,
    Essential,
    Critical,
};

const char *to_string(Verdict v);

struct BitResult
{
    int frame = 0;
    int offset = 0;
    Verdict verdict = Verdict::Benign;
    std::int64_t first_mismatch = -1;        // phase 1 cycle
    std::int64_t first_mismatch_repair = -1; // phase 2 cycle
};

struct CampaignOptions
{
    std::int64_t vectors = 10'000;
    std::uint64_t seed = kDefaultSeed;
    int workers = 1;
    // Cycles between removing the fault and restarting the stimulus;
    // negative selects the number of flip-flops (at least 1).
    std::int64_t repair_window = -1;
};

struct CampaignResult
{
    std::vector<BitResult> bits; // ascending (frame, offset)
    std::int64_t fi_n_e = 0;
    std::int64_t fi_n_c = 0;
    std::int64_t vectors = 0;
    std::int64_t repair_window = 0;
    std::uint64_t seed = 0;
    std::string fingerprint;
};

CampaignResult run_campaign(const FaultContext &ctx, std::vector<std::pair<int, int>> bits,
                            const CampaignOptions &opt);

// Runs the design against a second unfaulted copy over `cycles` vectors and
// returns the number of mismatching cycles.
std::int64_t zero_fault_control(const MappedNetlist &n, std::int64_t cycles, std::uint64_t seed);

std::string campaign_csv(const FabricModel &dev, const CampaignResult &r);
nlohmann::json campaign_json(const CampaignResult &r);

struct StaticComparison
{
    double essential_ratio = 1.0; // |fi_e ∩ B_e| / |fi_e|
    double critical_ratio = 1.0;
    std::int64_t fi_n_e = 0, fi_n_c = 0;
    std::uint64_t n_e = 0, n_c = 0;
    std::vector<std::pair<int, int>> essential_violations;
    std::vector<std::pair<int, int>> critical_violations;
};

StaticComparison compare_to_static(const CampaignResult &cr, const BitClassification &bc);
nlohmann::json comparison_json(const FabricModel &dev, const StaticComparison &c);

} // namespace scrubplan
