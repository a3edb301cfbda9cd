// Acceptance checks, one per criterion. Each run prints a single
// "PASS <name>: ..." or "FAIL <name>: ..." line and exits non-zero on failure.
//
//   scrubplan_acceptance <criterion>
//   scrubplan_acceptance all

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "pipeline_cache.h"
#include "scrubplan/faultsim.h"

using namespace scrubplan;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kMttrToleranceUs = 2.0;
constexpr double kDeltaTolerancePct = 0.3;
constexpr double kTypeATolerance = 0.03;
constexpr double kAnalyzeBudgetSec = 1.0;
constexpr int kOracleGraphs = 1000;
constexpr int kOracleMaxNodes = 12;
constexpr double kOracleBudgetSec = 30.0;
constexpr double kFloorplanBudgetSec = 300.0;
constexpr std::int64_t kFaultVectors = 10'000;
constexpr std::int64_t kControlVectors = 100'000;
constexpr double kFaultBudgetSec = 3600.0;
constexpr double kEps = 1e-9;

struct Outcome
{
    bool pass = true;
    std::string detail;
    std::vector<std::string> failures;

    void fail(const std::string &why)
    {
        pass = false;
        failures.push_back(why);
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 1)
{
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
}

fs::path work_dir(const std::string &name)
{
    fs::path p = fs::path(SCRUBPLAN_WORK_DIR) / ("acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string &args)
{
    const std::string cmd = std::string("\"") + SCRUBPLAN_CLI + "\" " + args;
    return std::system(cmd.c_str());
}

std::vector<std::string> split_csv(const std::string &line)
{
    // Circuit names may contain commas only inside parentheses, e.g. "(204,188)-RS decoder".
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char ch : line) {
        if (ch == '(')
            ++depth;
        if (ch == ')')
            --depth;
        if (ch == ',' && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

// MTTR table as printed in the paper: a, b, c, d in microseconds, then the
// savings of d over a, b and c in percent.
struct PaperRow
{
    const char *circuit;
    double mttr[4];
    double delta[3];
};

const PaperRow kPaperTable[] = {
        {"bigkey", {27590, 6258, 5838, 3224}, {88.3, 48.5, 44.8}},
        {"diffeq", {27561, 2742, 2741, 1855}, {93.3, 32.3, 32.3}},
        {"elliptic", {27550, 2221, 2221, 1592}, {94.2, 28.3, 28.3}},
        {"frisc", {27574, 3519, 3511, 2408}, {91.3, 31.6, 31.4}},
        {"s38417", {27597, 3628, 3203, 2522}, {90.9, 30.4, 21.3}},
        {"s38584.1", {27603, 5045, 4492, 3059}, {88.9, 39.3, 31.9}},
        {"tseng", {27567, 3468, 3266, 2274}, {91.8, 34.4, 30.4}},
        {"LMS equalizer", {27693, 3748, 3748, 2616}, {90.6, 30.2, 30.2}},
        {"FPU", {27814, 5769, 6379, 5294}, {81.0, 17.0, 15.9}},
        {"AES 128-bit", {28049, 9901, 9861, 9272}, {66.9, 6.4, 6.0}},
        {"(204,188)-RS decoder", {27834, 6998, 6868, 5856}, {79.0, 16.3, 14.7}},
};

struct AnalyzeRow
{
    double mttr[4];
    double delta[3];
};

// Runs the analyze subcommand on the transcribed inputs and reads its CSV.
std::map<std::string, AnalyzeRow> run_analyze(double &elapsed, Outcome &o)
{
    const fs::path dir = work_dir("analyze");
    const fs::path csv = dir / "table4.csv";
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = run_cli("analyze --params \"" + testsupport::source_path("data/table1_table2.json") +
                           "\" --csv \"" + csv.string() + "\"");
    elapsed = seconds_since(t0);
    std::map<std::string, AnalyzeRow> rows;
    if (rc != 0) {
        o.fail("analyze exited with status " + std::to_string(rc));
        return rows;
    }
    std::istringstream in(testsupport::slurp(csv.string()));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        auto f = split_csv(line);
        if (f.size() != 8) {
            o.fail("malformed CSV line: " + line);
            continue;
        }
        AnalyzeRow r;
        for (int i = 0; i < 4; ++i)
            r.mttr[i] = std::stod(f[1 + i]);
        for (int i = 0; i < 3; ++i)
            r.delta[i] = std::stod(f[5 + i]);
        rows[f[0]] = r;
    }
    return rows;
}

Outcome table4_analytic()
{
    Outcome o;
    double elapsed = 0;
    auto rows = run_analyze(elapsed, o);
    int cells = 0, bad = 0;
    for (const auto &p : kPaperTable) {
        auto it = rows.find(p.circuit);
        if (it == rows.end()) {
            o.fail(std::string("missing row ") + p.circuit);
            continue;
        }
        for (int i = 1; i < 4; ++i) {
            ++cells;
            const double got = it->second.mttr[i];
            if (std::abs(got - p.mttr[i]) > kMttrToleranceUs + kEps) {
                ++bad;
                o.fail(std::string(p.circuit) + " type " + "abcd"[i] + ": " + fmt(got, 0) + " us vs " +
                       fmt(p.mttr[i], 0) + " us");
            }
        }
        for (int i = 0; i < 3; ++i) {
            ++cells;
            const double got = it->second.delta[i];
            if (std::abs(got - p.delta[i]) > kDeltaTolerancePct + kEps) {
                ++bad;
                o.fail(std::string(p.circuit) + " delta d-" + "abc"[i] + ": " + fmt(got) + " % vs " +
                       fmt(p.delta[i]) + " %");
            }
        }
    }
    if (elapsed >= kAnalyzeBudgetSec)
        o.fail("analyze took " + fmt(elapsed, 3) + " s");
    o.detail = std::to_string(cells - bad) + "/" + std::to_string(cells) + " cells within +-" +
               fmt(kMttrToleranceUs, 0) + " us / +-" + fmt(kDeltaTolerancePct) + " pp, " + fmt(elapsed, 3) + " s";
    return o;
}

Outcome type_a_tolerance()
{
    Outcome o;
    double elapsed = 0;
    auto rows = run_analyze(elapsed, o);
    double worst = 0;
    for (const auto &p : kPaperTable) {
        auto it = rows.find(p.circuit);
        if (it == rows.end()) {
            o.fail(std::string("missing row ") + p.circuit);
            continue;
        }
        const double rel = std::abs(it->second.mttr[0] - p.mttr[0]) / p.mttr[0];
        worst = std::max(worst, rel);
        if (rel > kTypeATolerance + kEps)
            o.fail(std::string(p.circuit) + ": " + fmt(it->second.mttr[0], 0) + " us vs " + fmt(p.mttr[0], 0) +
                   " us");
    }
    o.detail = "worst relative deviation " + fmt(100 * worst, 2) + " % (limit " + fmt(100 * kTypeATolerance, 0) +
               " %)";
    return o;
}

Outcome classification_oracle()
{
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    Prng rng(0xC1A55);
    int cyclic_graphs = 0;
    for (int i = 0; i < kOracleGraphs; ++i) {
        auto rg = testsupport::random_graph(rng, kOracleMaxNodes);
        auto g = testsupport::to_cell_graph(rg);
        auto c = classify(g);
        const auto cyc = testsupport::brute_force_cyclic(rg.n, rg.edges);
        const auto crit = testsupport::brute_force_critical(rg.n, rg.edges);
        cyclic_graphs += std::find(cyc.begin(), cyc.end(), true) != cyc.end();
        if (c.cyclic != cyc || c.critical_nodes != crit) {
            o.fail("graph " + std::to_string(i) + " differs from brute force");
            continue;
        }
        for (size_t e = 0; e < g.edges.size(); ++e)
            if (c.critical_edges[e] != crit[g.edges[e].dst]) {
                o.fail("graph " + std::to_string(i) + " edge " + std::to_string(e) + " differs");
                break;
            }
    }
    const double elapsed = seconds_since(t0);
    if (elapsed >= kOracleBudgetSec)
        o.fail("took " + fmt(elapsed, 2) + " s");
    o.detail = std::to_string(kOracleGraphs) + " graphs (" + std::to_string(cyclic_graphs) + " with cycles), " +
               fmt(elapsed, 2) + " s";
    return o;
}

Outcome bit_partition()
{
    Outcome o;
    int checked = 0;
    for (const auto &name : testsupport::benchmark_names()) {
        const auto &r = testsupport::pipeline_for(name);
        const FlowResult &c = r.c;
        const FabricModel dev{c.design.spec};
        const auto &bc = c.bits;
        if (!bc.critical.subset_of(bc.essential))
            o.fail(name + ": B_c not a subset of B_e");
        for (auto [f, off] : bc.essential.bits())
            if (!dev.decode({dev.frame_at(f), off})) {
                o.fail(name + ": essential bit " + dev.frame_at(f).str() + ":" + std::to_string(off) +
                       " is not a configuration bit");
                break;
            }
        std::vector<BitAddr> addrs;
        for (auto [f, off] : bc.essential.bits())
            addrs.push_back({dev.frame_at(f), off});
        if (int(frames_of(addrs).size()) != c.report.n_fr_used)
            o.fail(name + ": frames_of(B_e) " + std::to_string(frames_of(addrs).size()) + " != N_fr,used " +
                   std::to_string(c.report.n_fr_used));
        for (auto which : {MaskKind::Essential, MaskKind::Critical}) {
            const std::string text = write_mask(dev, bc, which);
            const ConfigMask back = read_mask(text, dev);
            if (back != (which == MaskKind::Essential ? bc.essential : bc.critical) ||
                write_mask(dev, back) != write_mask(dev, which == MaskKind::Essential ? bc.essential : bc.critical))
                o.fail(name + ": mask round trip differs");
        }
        ++checked;
    }
    o.detail = std::to_string(checked) + " benchmarks, flow c";
    return o;
}

Outcome floorplanning()
{
    Outcome o;
    int strict = 0, total = 0;
    std::ostringstream table;
    for (const auto &name : testsupport::benchmark_names()) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto &r = testsupport::pipeline_for(name);
        const double elapsed = seconds_since(t0);
        const int a = r.a.report.n_fr_used, b = r.b.report.n_fr_used, c = r.c.report.n_fr_used;
        table << " " << name << "=" << a << "/" << b << "/" << c;
        ++total;
        if (c > b)
            o.fail(name + ": N_fr,used c " + std::to_string(c) + " > b " + std::to_string(b));
        if (c > a)
            o.fail(name + ": N_fr,used c " + std::to_string(c) + " > a " + std::to_string(a));
        strict += c < a;
        if (elapsed >= kFloorplanBudgetSec)
            o.fail(name + ": pipeline took " + fmt(elapsed) + " s");

        // Utilization CSV: non-increasing essential counts summing to n_e.
        const FabricModel dev{r.c.design.spec};
        std::istringstream csv(frame_report_csv(dev, r.c.report));
        std::string line;
        std::getline(csv, line);
        std::uint64_t sum = 0, prev = ~std::uint64_t(0);
        bool ordered = true;
        while (std::getline(csv, line)) {
            auto f = split_csv(line);
            const std::uint64_t e = std::stoull(f.at(1));
            ordered = ordered && e <= prev;
            prev = e;
            sum += e;
        }
        if (!ordered)
            o.fail(name + ": utilization CSV not non-increasing");
        if (sum != r.c.bits.n_e)
            o.fail(name + ": utilization CSV sums to " + std::to_string(sum) + ", n_e " +
                   std::to_string(r.c.bits.n_e));
    }
    if (2 * strict < total)
        o.fail("strict reduction on only " + std::to_string(strict) + " of " + std::to_string(total));
    o.detail = "strict c<a on " + std::to_string(strict) + "/" + std::to_string(total) + "; a/b/c:" + table.str();
    return o;
}

// Block of the flow-c design holding the most essential bits.
Block busiest_block(const FabricModel &dev, const BitClassification &bc)
{
    std::map<Block, std::uint64_t> per;
    for (int f : bc.essential.frames()) {
        auto a = dev.frame_at(f);
        per[{a.column, a.region}] += bc.essential.count_in(f);
    }
    Block best{};
    std::uint64_t most = 0;
    for (const auto &[b, n] : per)
        if (n > most) {
            most = n;
            best = b;
        }
    return best;
}

Outcome fault_injection_soundness()
{
    Outcome o;
    struct Case
    {
        std::string name;
        bool region; // one column-by-region block instead of the essential set
    };
    const Case cases[] = {{"s27", false}, {"c432", false}, {"s13207", true}};
    std::ostringstream summary;
    int benchmarks = 0;
    for (const auto &cs : cases) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto &r = testsupport::pipeline_for(cs.name);
        const PlacedDesign &d = r.c.design;
        const FabricModel dev{d.spec};
        std::vector<std::pair<int, int>> bits;
        std::string scope = "essential";
        if (cs.region) {
            const Block b = busiest_block(dev, r.c.bits);
            scope = "block " + std::to_string(b.column) + "/" + std::to_string(b.region);
            for (int m = 0; m < d.spec.frames_per_column_region; ++m) {
                const int f = dev.frame_index({b.column, b.region, m});
                for (int off = 0; off < d.spec.bits_per_frame; ++off)
                    bits.emplace_back(f, off);
            }
        } else {
            bits = r.c.bits.essential.bits();
        }
        FaultContext ctx(d);
        CampaignOptions opt;
        opt.vectors = kFaultVectors;
        const auto cr = run_campaign(ctx, bits, opt);
        const auto cmp = compare_to_static(cr, r.c.bits);
        if (!cmp.essential_violations.empty())
            o.fail(cs.name + ": " + std::to_string(cmp.essential_violations.size()) + " essential violations");
        if (!cmp.critical_violations.empty())
            o.fail(cs.name + ": " + std::to_string(cmp.critical_violations.size()) + " critical violations");
        const bool acyclic = r.classification.count_cyclic() == 0;
        if (acyclic && cr.fi_n_c != 0)
            o.fail(cs.name + ": acyclic but fi_n_c = " + std::to_string(cr.fi_n_c));
        const std::int64_t control = zero_fault_control(d.netlist, kControlVectors, opt.seed);
        if (control != 0)
            o.fail(cs.name + ": zero-fault control mismatched on " + std::to_string(control) + " cycles");
        const double elapsed = seconds_since(t0);
        if (elapsed > kFaultBudgetSec)
            o.fail(cs.name + ": campaign took " + fmt(elapsed) + " s");
        summary << " " << cs.name << "[" << scope << (acyclic ? ", acyclic" : "") << "] bits=" << cr.bits.size()
                << " fi_e=" << cr.fi_n_e << " fi_c=" << cr.fi_n_c << " (" << fmt(elapsed) << " s);";
        ++benchmarks;
    }
    o.detail = std::to_string(benchmarks) + " benchmarks, T=" + std::to_string(kFaultVectors) + ":" + summary.str();
    return o;
}

bool same_tree(const fs::path &a, const fs::path &b, Outcome &o, const std::string &what)
{
    std::set<std::string> names;
    for (const auto &e : fs::directory_iterator(a))
        names.insert(e.path().filename().string());
    std::set<std::string> other;
    for (const auto &e : fs::directory_iterator(b))
        other.insert(e.path().filename().string());
    if (names != other || names.empty()) {
        o.fail(what + ": file sets differ");
        return false;
    }
    bool ok = true;
    for (const auto &n : names)
        if (testsupport::slurp((a / n).string()) != testsupport::slurp((b / n).string())) {
            o.fail(what + ": " + n + " differs");
            ok = false;
        }
    return ok;
}

Outcome determinism()
{
    Outcome o;
    const fs::path dir = work_dir("determinism");
    const std::string blif = testsupport::source_path("benchmarks/s27.blif");
    const std::string device = testsupport::source_path("data/device_bench.json");
    int files = 0;
    for (int i = 0; i < 2; ++i) {
        const fs::path out = dir / ("run" + std::to_string(i));
        if (run_cli("run \"" + blif + "\" --device \"" + device + "\" --seed 12345 -o \"" + out.string() + "\"") != 0)
            o.fail("run " + std::to_string(i) + " failed");
    }
    if (o.pass && same_tree(dir / "run0", dir / "run1", o, "run"))
        for (const auto &e : fs::directory_iterator(dir / "run0"))
            files += e.is_regular_file();
    const std::string design = (dir / "run0" / "design.json").string();
    for (int i = 0; i < 2; ++i) {
        const fs::path out = dir / ("inject" + std::to_string(i));
        const int rc = run_cli("inject --design \"" + design + "\" --bits essential --vectors 2000 --seed 99 -o \"" +
                               out.string() + "\"");
        if (rc != 0)
            o.fail("inject " + std::to_string(i) + " exited with " + std::to_string(rc));
    }
    if (o.pass && same_tree(dir / "inject0", dir / "inject1", o, "inject"))
        for (const auto &e : fs::directory_iterator(dir / "inject0"))
            files += e.is_regular_file();
    o.detail = std::to_string(files) + " artifacts byte-identical across two executions";
    return o;
}

const std::map<std::string, std::function<Outcome()>> &criteria()
{
    static const std::map<std::string, std::function<Outcome()>> c = {
            {"table4_analytic", table4_analytic},
            {"type_a_tolerance", type_a_tolerance},
            {"classification_oracle", classification_oracle},
            {"bit_partition", bit_partition},
            {"floorplanning", floorplanning},
            {"fault_injection_soundness", fault_injection_soundness},
            {"determinism", determinism},
    };
    return c;
}

bool report(const std::string &name, const Outcome &o)
{
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << "\n";
    for (const auto &f : o.failures)
        std::cout << "    " << f << "\n";
    return o.pass;
}

} // namespace

int main(int argc, char **argv)
{
    if (argc != 2) {
        std::cerr << "usage: scrubplan_acceptance <criterion|all>\n";
        return 64;
    }
    const std::string which = argv[1];
    bool ok = true;
    try {
        if (which == "all") {
            for (const auto &[name, fn] : criteria())
                ok = report(name, fn()) && ok;
        } else {
            auto it = criteria().find(which);
            if (it == criteria().end()) {
                std::cerr << "unknown criterion '" << which << "'\n";
                return 64;
            }
            ok = report(which, it->second());
        }
    } catch (const std::exception &e) {
        std::cout << "FAIL " << which << ": exception: " << e.what() << "\n";
        return 1;
    }
    return ok ? 0 : 1;
}
