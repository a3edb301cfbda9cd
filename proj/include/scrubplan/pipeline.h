// End-to-end flow: netlist -> classification -> three layout flows -> bit
// masks -> frame reports -> MTTR figures.
//
// Flows: a) unconstrained placement and routing, b) placement confined to a
// frame-aligned region, c) placement and routing confined to that region.
// Flows b and c share one placement.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "scrubplan/bitclass.h"
#include "scrubplan/design_io.h"
#include "scrubplan/graph.h"
#include "scrubplan/reliability.h"

namespace scrubplan {

struct PipelineOptions
{
    std::uint64_t seed = kDefaultSeed;
    int moves_per_slice = 200;
    double lambda = 8.0;
    double region_slack = 0.10;
    ReliabilityParams params; // n_fr_total is replaced by the device total
};

struct FlowResult
{
    PlacedDesign design;
    BitClassification bits;
    FrameReport report;
    std::int64_t wirelength = 0;
    int mask_relaxations = 0;
};

struct PipelineResult
{
    Classification classification;
    CellGraph graph;
    FlowResult a, b, c;
    DesignFigures figures;
    ReliabilityParams params;
    MttrRow mttr;

    const FlowResult &flow(char f) const { return f == 'a' ? a : (f == 'b' ? b : c); }
};

PipelineResult run_pipeline(const MappedNetlist &n, const DeviceSpec &spec, const PipelineOptions &opt);

// CSV comparing used frames across flows, one row per design.
std::string flow_comparison_csv(const std::string &circuit, const PipelineResult &r);

// Writes design.json, essential.mask, critical.mask, frames.csv, flows.csv,
// mttr.csv, reliability_input.json and summary.json for the chosen flow.
void write_artifacts(const std::filesystem::path &dir, const PipelineResult &r, char flow);

} // namespace scrubplan
