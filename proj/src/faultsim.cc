#include "scrubplan/faultsim.h"

#include <algorithm>
#include <queue>
#include <thread>

#include "scrubplan/simulator.h"

namespace scrubplan {

const char *to_string(FaultEffect::Kind k)
{
    switch (k) {
    case FaultEffect::Kind::NoFunctionalEffect:
        return "none";
    case FaultEffect::Kind::LutBitFlip:
        return "lut_bit_flip";
    case FaultEffect::Kind::FfPolarityFlip:
        return "ff_polarity_flip";
    case FaultEffect::Kind::RouteBreak:
        return "route_break";
    case FaultEffect::Kind::RouteShort:
        return "route_short";
    }
    return "?";
}

const char *to_string(Verdict v)
{
    switch (v) {
    case Verdict::Benign:
        return "benign";
    case Verdict::Essential:
        return "essential";
    case Verdict::Critical:
        return "critical";
    }
    return "?";
}

FaultContext::FaultContext(const PlacedDesign &d) : d_(d), dev_(d.spec)
{
    for (size_t s = 0; s < d.packed.size(); ++s)
        slice_at_[d.placement.slices[s]] = int(s);
    for (size_t r = 0; r < d.routing.nets.size(); ++r)
        for (size_t k = 0; k < d.routing.nets[r].nodes.size(); ++k) {
            const auto &node = d.routing.nets[r].nodes[k];
            pip_owner_[dev_.key(dev_.pip_bit(node.tile, node.pip))] = {int(r), int(k)};
        }
    for (const auto &b : bridge_pips(dev_, d.routing))
        bridges_[dev_.key(dev_.pip_bit(b.tile, b.pip))] = b;
}

std::vector<PinRef> FaultContext::downstream_pins(int route, int node) const
{
    const auto &r = d_.routing.nets[route];
    std::vector<bool> below(r.nodes.size(), false);
    below[node] = true;
    for (size_t k = node + 1; k < r.nodes.size(); ++k)
        if (r.nodes[k].parent >= 0 && below[r.nodes[k].parent])
            below[k] = true;
    std::vector<PinRef> out;
    for (const auto &[pin, n] : r.sinks)
        if (below[n])
            out.push_back(pin);
    return out;
}

FaultEffect FaultContext::decode(const BitAddr &b) const
{
    FaultEffect fx;
    auto rb = dev_.decode(b);
    if (!rb)
        return fx;
    switch (rb->role) {
    case ResourceBit::Role::LutTruth:
    case ResourceBit::Role::FfConfig: {
        auto it = slice_at_.find(SliceSite{rb->resource.tile, rb->resource.index});
        if (it == slice_at_.end())
            return fx;
        const PackedSlice &s = d_.packed[it->second];
        if (rb->role == ResourceBit::Role::LutTruth) {
            if (rb->sub >= int(s.luts.size()))
                return fx;
            const Cell &cell = d_.netlist.cells[s.luts[rb->sub]];
            if (rb->index >= cell.truth_size())
                return fx; // address lines beyond the connected inputs are tied low
            fx.kind = FaultEffect::Kind::LutBitFlip;
            fx.cell = s.luts[rb->sub];
            fx.index = rb->index;
        } else {
            if (rb->sub >= int(s.ffs.size()))
                return fx;
            fx.kind = FaultEffect::Kind::FfPolarityFlip;
            fx.cell = s.ffs[rb->sub];
        }
        return fx;
    }
    case ResourceBit::Role::Pip: {
        const std::uint64_t key = dev_.key(b);
        if (auto it = pip_owner_.find(key); it != pip_owner_.end()) {
            fx.kind = FaultEffect::Kind::RouteBreak;
            fx.net = d_.routing.nets[it->second.first].net;
            fx.pins = downstream_pins(it->second.first, it->second.second);
            return fx;
        }
        if (auto it = bridges_.find(key); it != bridges_.end()) {
            fx.kind = FaultEffect::Kind::RouteShort;
            fx.net = d_.routing.nets[it->second.victim_route].net;
            fx.other = d_.routing.nets[it->second.aggressor_route].net;
            fx.pins = downstream_pins(it->second.victim_route, it->second.victim_node);
            return fx;
        }
        return fx;
    }
    case ResourceBit::Role::IobConfig:
        return fx;
    }
    return fx;
}

namespace {

void fill_vector(Prng &rng, std::size_t num_inputs, std::uint8_t *out)
{
    for (std::size_t base = 0; base < num_inputs; base += 64) {
        std::uint64_t word = rng.next();
        for (std::size_t i = base; i < std::min(num_inputs, base + 64); ++i)
            out[i] = std::uint8_t(word >> (i - base) & 1);
    }
    if (num_inputs == 0)
        rng.next();
}

// Settled values of every net and output slot, one packed row per cycle.
class GoldenTrace
{
  public:
    GoldenTrace(const MappedNetlist &n, const std::vector<std::vector<std::uint8_t>> &stimulus)
    {
        CycleSimulator sim(n);
        width_ = n.nets.size() + n.outputs.size();
        words_ = (width_ + 63) / 64;
        bits_.assign(words_ * stimulus.size(), 0);
        std::vector<std::uint8_t> out(sim.num_outputs());
        for (std::size_t c = 0; c < stimulus.size(); ++c) {
            sim.step(stimulus[c], out);
            const auto &v = sim.values();
            std::uint64_t *row = &bits_[c * words_];
            for (std::size_t i = 0; i < width_; ++i)
                row[i / 64] |= std::uint64_t(v[i] & 1) << (i % 64);
        }
    }

    std::uint8_t at(std::size_t cycle, std::size_t slot) const
    {
        return std::uint8_t(bits_[cycle * words_ + slot / 64] >> (slot % 64) & 1);
    }

  private:
    std::size_t width_ = 0, words_ = 0;
    std::vector<std::uint64_t> bits_;
};

// Differential simulation against the golden trace: only cells whose inputs
// differ from the golden values, and the fault sites themselves, are
// evaluated. Handles LUT flips, FF polarity flips and broken routes.
class DiffEngine
{
  public:
    DiffEngine(const MappedNetlist &n, const GoldenTrace &g) : n_(n), g_(g)
    {
        const std::size_t nc = n.cells.size();
        pos_.assign(nc, -1);
        ff_index_.assign(nc, -1);
        slot_.assign(nc, -1);
        for (size_t i = 0; i < n.outputs.size(); ++i)
            slot_[n.outputs[i]] = int(n.nets.size() + i);
        auto is_comb = [](const Cell &c) { return c.is_lut_like() || c.kind == CellKind::OutputPad; };
        std::vector<int> pending(nc, 0);
        for (size_t c = 0; c < nc; ++c) {
            const Cell &cell = n.cells[c];
            if (cell.kind == CellKind::FlipFlop) {
                ff_index_[c] = int(ffs_.size());
                ffs_.push_back(CellId(c));
            }
            if (cell.is_lut_like())
                slot_[c] = cell.output;
            if (is_comb(cell))
                for (NetId in : cell.inputs)
                    pending[c] += is_comb(n.cells[n.nets[in].driver]) ? 1 : 0;
        }
        comb_fanout_.resize(n.nets.size());
        ff_fanout_.resize(n.nets.size());
        for (size_t c = 0; c < nc; ++c) {
            const Cell &cell = n.cells[c];
            for (NetId in : cell.inputs) {
                if (is_comb(cell)) {
                    auto &v = comb_fanout_[in];
                    if (v.empty() || v.back() != CellId(c))
                        v.push_back(CellId(c));
                } else if (cell.kind == CellKind::FlipFlop) {
                    ff_fanout_[in].push_back(ff_index_[c]);
                }
            }
        }
        std::vector<CellId> order;
        for (size_t c = 0; c < nc; ++c)
            if (is_comb(n.cells[c]) && pending[c] == 0)
                order.push_back(CellId(c));
        for (size_t h = 0; h < order.size(); ++h) {
            const Cell &cell = n.cells[order[h]];
            if (cell.output < 0)
                continue;
            for (CellId s : comb_fanout_[cell.output])
                if (--pending[s] == 0)
                    order.push_back(s);
        }
        for (size_t i = 0; i < order.size(); ++i)
            pos_[order[i]] = int(i);
        order_ = std::move(order);
        diff_.assign(n.nets.size() + n.outputs.size(), 0);
        queued_.assign(nc, 0);
        ffd_.assign(ffs_.size(), 0);
        next_mark_.assign(ffs_.size(), 0);
        zero_mask_.assign(nc, 0);
    }

    void set_fault(const FaultEffect &fx)
    {
        clear_fault();
        fault_ = fx;
        if (fx.kind == FaultEffect::Kind::RouteBreak)
            for (const auto &p : fx.pins) {
                zero_mask_[p.cell] |= 1u << p.pin;
                if (std::find(zero_cells_.begin(), zero_cells_.end(), p.cell) == zero_cells_.end())
                    zero_cells_.push_back(p.cell);
            }
    }

    void clear_fault()
    {
        for (CellId c : zero_cells_)
            zero_mask_[c] = 0;
        zero_cells_.clear();
        fault_ = FaultEffect{};
    }

    void reset_state()
    {
        std::fill(ffd_.begin(), ffd_.end(), 0);
        ffd_list_.clear();
    }

    bool state_clean() const { return ffd_list_.empty(); }

    // Simulates cycles [c0, c1). With `active`, the installed fault is in
    // effect. Returns the first cycle with an output mismatch, or -1; with
    // `stop_at_mismatch` the run ends there. Without an active fault the run
    // ends as soon as no state difference remains.
    std::int64_t run(std::int64_t c0, std::int64_t c1, bool active, bool stop_at_mismatch)
    {
        std::int64_t first = -1;
        for (std::int64_t c = c0; c < c1; ++c) {
            if (!active && ffd_list_.empty())
                break;
            if (step(std::size_t(c), active) && first < 0) {
                first = c;
                if (stop_at_mismatch)
                    break;
            }
        }
        return first;
    }

  private:
    std::uint8_t faulty(std::size_t cycle, int slot) const { return g_.at(cycle, slot) ^ diff_[slot]; }

    void mark(int slot)
    {
        diff_[slot] = 1;
        touched_.push_back(slot);
    }

    void push(CellId c)
    {
        if (!queued_[c]) {
            queued_[c] = 1;
            heap_.push(pos_[c]);
        }
    }

    void push_fanout(NetId net)
    {
        for (CellId s : comb_fanout_[net])
            push(s);
    }

    bool step(std::size_t cycle, bool active)
    {
        bool mismatch = false;
        const bool inv = active && fault_.kind == FaultEffect::Kind::FfPolarityFlip;
        const int inv_ff = inv ? ff_index_[fault_.cell] : -1;
        for (int i : ffd_list_)
            if (i != inv_ff) {
                mark(n_.cells[ffs_[i]].output);
                push_fanout(n_.cells[ffs_[i]].output);
            }
        if (inv_ff >= 0 && !ffd_[inv_ff]) {
            mark(n_.cells[ffs_[inv_ff]].output);
            push_fanout(n_.cells[ffs_[inv_ff]].output);
        }
        const bool lut = active && fault_.kind == FaultEffect::Kind::LutBitFlip;
        if (lut)
            push(fault_.cell);
        if (active)
            for (CellId c : zero_cells_)
                if (pos_[c] >= 0)
                    push(c);

        while (!heap_.empty()) {
            const CellId c = order_[heap_.top()];
            heap_.pop();
            queued_[c] = 0;
            const Cell &cell = n_.cells[c];
            unsigned addr = 0;
            const unsigned zm = active ? zero_mask_[c] : 0;
            for (unsigned k = 0; k < cell.inputs.size(); ++k)
                if (!(zm >> k & 1))
                    addr |= unsigned(faulty(cycle, cell.inputs[k])) << k;
            std::uint64_t truth = cell.kind == CellKind::OutputPad ? 0b10 : cell.truth;
            if (lut && c == fault_.cell)
                truth ^= std::uint64_t(1) << fault_.index;
            const int slot = slot_[c];
            const std::uint8_t v = std::uint8_t(truth >> addr & 1);
            if (v != g_.at(cycle, slot)) {
                mark(slot);
                if (cell.kind == CellKind::OutputPad)
                    mismatch = true;
                else
                    push_fanout(slot);
            }
        }

        // Next flip-flop state differences.
        next_list_.clear();
        auto consider = [&](int i) {
            if (next_mark_[i])
                return;
            next_mark_[i] = 1;
            const CellId f = ffs_[i];
            const NetId d = n_.cells[f].inputs[0];
            std::uint8_t v = (active && (zero_mask_[f] & 1)) ? 0 : faulty(cycle, d);
            if (v != g_.at(cycle, d))
                next_list_.push_back(i);
            else
                considered_clean_.push_back(i);
        };
        for (int slot : touched_)
            if (slot < int(ff_fanout_.size()))
                for (int i : ff_fanout_[slot])
                    consider(i);
        if (active)
            for (CellId c : zero_cells_)
                if (ff_index_[c] >= 0)
                    consider(ff_index_[c]);
        for (int i : ffd_list_)
            ffd_[i] = 0;
        for (int i : next_list_) {
            ffd_[i] = 1;
            next_mark_[i] = 0;
        }
        for (int i : considered_clean_)
            next_mark_[i] = 0;
        considered_clean_.clear();
        std::sort(next_list_.begin(), next_list_.end());
        ffd_list_.swap(next_list_);

        for (int slot : touched_)
            diff_[slot] = 0;
        touched_.clear();
        return mismatch;
    }

    const MappedNetlist &n_;
    const GoldenTrace &g_;
    std::vector<int> pos_;
    std::vector<CellId> order_;
    std::vector<int> ff_index_;
    std::vector<CellId> ffs_;
    std::vector<int> slot_;
    std::vector<std::vector<CellId>> comb_fanout_;
    std::vector<std::vector<int>> ff_fanout_;
    std::vector<std::uint8_t> diff_;
    std::vector<int> touched_;
    std::vector<std::uint8_t> queued_;
    std::priority_queue<int, std::vector<int>, std::greater<int>> heap_;
    std::vector<std::uint8_t> ffd_;
    std::vector<int> ffd_list_, next_list_, considered_clean_;
    std::vector<std::uint8_t> next_mark_;
    std::vector<unsigned> zero_mask_;
    std::vector<CellId> zero_cells_;
    FaultEffect fault_;
};

// Full simulation path, used for bridged routes whose OR semantics need the
// bridge-aware evaluation order of CycleSimulator.
BitResult simulate_full(const MappedNetlist &n, const GoldenTrace &g,
                        const std::vector<std::vector<std::uint8_t>> &stim, const FaultEffect &fx, std::int64_t t,
                        std::int64_t w)
{
    BitResult r;
    CycleSimulator sim(n);
    std::vector<std::uint8_t> out(sim.num_outputs());
    const std::size_t base = n.nets.size();
    for (const auto &p : fx.pins)
        sim.set_pin(p, CycleSimulator::PinMode::OrWithNet, fx.other);
    auto compare = [&](std::size_t c) {
        for (size_t i = 0; i < out.size(); ++i)
            if (out[i] != g.at(c, base + i))
                return true;
        return false;
    };
    for (std::int64_t c = 0; c < t; ++c) {
        sim.step(stim[c], out);
        if (r.first_mismatch < 0 && compare(std::size_t(c)))
            r.first_mismatch = c;
    }
    if (r.first_mismatch < 0)
        return r;
    r.verdict = Verdict::Essential;
    sim.clear_faults();
    for (std::int64_t c = t; c < t + w; ++c)
        sim.step(stim[c], out);
    for (std::int64_t c = t + w; c < 2 * t + w; ++c) {
        sim.step(stim[c], out);
        if (compare(std::size_t(c))) {
            r.verdict = Verdict::Critical;
            r.first_mismatch_repair = c - t - w;
            break;
        }
    }
    return r;
}

} // namespace

std::vector<std::vector<std::uint8_t>> make_stimulus(std::size_t num_inputs, std::size_t cycles, std::uint64_t seed)
{
    Prng rng(seed);
    std::vector<std::vector<std::uint8_t>> out(cycles, std::vector<std::uint8_t>(num_inputs));
    for (auto &v : out)
        fill_vector(rng, num_inputs, v.data());
    return out;
}

CampaignResult run_campaign(const FaultContext &ctx, std::vector<std::pair<int, int>> bits,
                            const CampaignOptions &opt)
{
    const MappedNetlist &n = ctx.design().netlist;
    const FabricModel &dev = ctx.device();
    std::sort(bits.begin(), bits.end());
    bits.erase(std::unique(bits.begin(), bits.end()), bits.end());

    CampaignResult res;
    res.vectors = opt.vectors;
    res.seed = opt.seed;
    res.fingerprint = dev.spec().fingerprint();
    const std::int64_t num_ffs = n.count(CellKind::FlipFlop);
    res.repair_window = opt.repair_window >= 0 ? opt.repair_window : std::max<std::int64_t>(1, num_ffs);
    const std::int64_t t = opt.vectors, w = res.repair_window;

    // Stimulus: phase 1 and the repair window continue one PRNG stream;
    // phase 2 restarts it from the seed.
    auto stim = make_stimulus(n.inputs.size(), std::size_t(t + w), opt.seed);
    auto again = make_stimulus(n.inputs.size(), std::size_t(t), opt.seed);
    stim.insert(stim.end(), std::make_move_iterator(again.begin()), std::make_move_iterator(again.end()));
    const GoldenTrace golden(n, stim);

    res.bits.resize(bits.size());
    auto work = [&](int worker, int workers) {
        DiffEngine eng(n, golden);
        for (size_t i = worker; i < bits.size(); i += workers) {
            BitResult &r = res.bits[i];
            r.frame = bits[i].first;
            r.offset = bits[i].second;
            BitAddr addr{dev.frame_at(r.frame), r.offset};
            const FaultEffect fx = ctx.decode(addr);
            if (fx.kind == FaultEffect::Kind::NoFunctionalEffect)
                continue;
            if (fx.kind == FaultEffect::Kind::RouteShort) {
                BitResult full = simulate_full(n, golden, stim, fx, t, w);
                r.verdict = full.verdict;
                r.first_mismatch = full.first_mismatch;
                r.first_mismatch_repair = full.first_mismatch_repair;
                continue;
            }
            eng.reset_state();
            eng.set_fault(fx);
            r.first_mismatch = eng.run(0, t, true, false);
            eng.clear_fault();
            if (r.first_mismatch < 0)
                continue;
            r.verdict = Verdict::Essential;
            eng.run(t, t + w, false, false);
            std::int64_t m2 = eng.run(t + w, 2 * t + w, false, true);
            if (m2 >= 0) {
                r.verdict = Verdict::Critical;
                r.first_mismatch_repair = m2 - t - w;
            }
        }
    };
    const int workers = std::max(1, opt.workers);
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < workers; ++k)
            pool.emplace_back(work, k, workers);
        for (auto &th : pool)
            th.join();
    }
    for (const auto &r : res.bits) {
        res.fi_n_e += r.verdict != Verdict::Benign;
        res.fi_n_c += r.verdict == Verdict::Critical;
    }
    return res;
}

std::int64_t zero_fault_control(const MappedNetlist &n, std::int64_t cycles, std::uint64_t seed)
{
    CycleSimulator ref(n), dut(n);
    Prng rng(seed);
    std::vector<std::uint8_t> in(n.inputs.size()), a(ref.num_outputs()), b(dut.num_outputs());
    std::int64_t mismatches = 0;
    for (std::int64_t c = 0; c < cycles; ++c) {
        fill_vector(rng, in.size(), in.data());
        ref.step(in, a);
        dut.step(in, b);
        mismatches += a != b;
    }
    return mismatches;
}

std::string campaign_csv(const FabricModel &dev, const CampaignResult &r)
{
    std::string out = "bit,verdict,first_mismatch_cycle\n";
    for (const auto &b : r.bits) {
        out += BitAddr{dev.frame_at(b.frame), b.offset}.str();
        out += ',';
        out += to_string(b.verdict);
        out += ',';
        out += std::to_string(b.first_mismatch);
        out += '\n';
    }
    return out;
}

nlohmann::json campaign_json(const CampaignResult &r)
{
    std::int64_t benign = std::ssize(r.bits) - r.fi_n_e;
    std::int64_t first_sum = 0;
    for (const auto &b : r.bits)
        if (b.first_mismatch >= 0)
            first_sum += b.first_mismatch;
    return {{"bits_tested", r.bits.size()},
            {"benign", benign},
            {"fi_n_e", r.fi_n_e},
            {"fi_n_c", r.fi_n_c},
            {"vectors_per_phase", r.vectors},
            {"repair_window", r.repair_window},
            {"seed", r.seed},
            {"device", r.fingerprint},
            {"mean_first_mismatch_cycle", r.fi_n_e ? double(first_sum) / double(r.fi_n_e) : 0.0}};
}

StaticComparison compare_to_static(const CampaignResult &cr, const BitClassification &bc)
{
    if (cr.fingerprint != bc.fingerprint)
        throw DeviceMismatch("campaign device " + cr.fingerprint + " differs from classification device " +
                             bc.fingerprint);
    StaticComparison s;
    s.n_e = bc.n_e;
    s.n_c = bc.n_c;
    std::int64_t in_e = 0, in_c = 0;
    for (const auto &b : cr.bits) {
        if (b.verdict == Verdict::Benign)
            continue;
        ++s.fi_n_e;
        if (bc.essential.test(b.frame, b.offset))
            ++in_e;
        else
            s.essential_violations.emplace_back(b.frame, b.offset);
        if (b.verdict == Verdict::Critical) {
            ++s.fi_n_c;
            if (bc.critical.test(b.frame, b.offset))
                ++in_c;
            else
                s.critical_violations.emplace_back(b.frame, b.offset);
        }
    }
    s.essential_ratio = s.fi_n_e ? double(in_e) / double(s.fi_n_e) : 1.0;
    s.critical_ratio = s.fi_n_c ? double(in_c) / double(s.fi_n_c) : 1.0;
    return s;
}

nlohmann::json comparison_json(const FabricModel &dev, const StaticComparison &c)
{
    auto list = [&](const std::vector<std::pair<int, int>> &v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto &[f, o] : v)
            a.push_back(BitAddr{dev.frame_at(f), o}.str());
        return a;
    };
    return {{"fi_n_e", c.fi_n_e},
            {"fi_n_c", c.fi_n_c},
            {"static_n_e", c.n_e},
            {"static_n_c", c.n_c},
            {"essential_contained_ratio", c.essential_ratio},
            {"critical_contained_ratio", c.critical_ratio},
            {"essential_violations", list(c.essential_violations)},
            {"critical_violations", list(c.critical_violations)}};
}

} // namespace scrubplan
