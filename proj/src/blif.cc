#include "scrubplan/blif.h"

#include <fstream>
#include <set>
#include <sstream>

namespace scrubplan {

namespace {

const char *kind_label(BlifError::Kind k)
{
    switch (k) {
    case BlifError::Kind::Syntax:
        return "syntax error";
    case BlifError::Kind::MultipleDrivers:
        return "multiple drivers";
    case BlifError::Kind::UndrivenNet:
        return "undriven net";
    case BlifError::Kind::UnsupportedDirective:
        return "unsupported directive";
    }
    return "error";
}

std::string format_error(BlifError::Kind kind, int line, const std::string &message)
{
    std::ostringstream os;
    if (line > 0)
        os << "line " << line << ": ";
    os << kind_label(kind) << ": " << message;
    return os.str();
}

struct LogicalLine
{
    int number = 0; // line where the logical line starts
    std::vector<std::string> tokens;
};

// Splits the text into logical lines: comments stripped, `\` continuations
// joined, blank lines dropped.
std::vector<LogicalLine> tokenize(std::string_view text)
{
    std::vector<LogicalLine> out;
    LogicalLine cur;
    bool continuing = false;
    int lineno = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        std::string_view raw = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        while (!raw.empty() && (raw.back() == '\r' || raw.back() == ' ' || raw.back() == '\t'))
            raw.remove_suffix(1);
        bool cont = !raw.empty() && raw.back() == '\\';
        if (cont)
            raw.remove_suffix(1);
        if (!continuing) {
            cur = LogicalLine{};
            cur.number = lineno;
        }
        std::istringstream is{std::string(raw)};
        std::string tok;
        while (is >> tok)
            cur.tokens.push_back(tok);
        continuing = cont;
        if (!continuing && !cur.tokens.empty())
            out.push_back(std::move(cur));
        if (eol == text.size())
            break;
    }
    if (continuing && !cur.tokens.empty())
        out.push_back(std::move(cur));
    return out;
}

bool valid_cube(const std::string &s)
{
    for (char c : s)
        if (c != '0' && c != '1' && c != '-')
            return false;
    return true;
}

} // namespace

BlifError::BlifError(Kind kind, int line, std::string subject, const std::string &message)
        : std::runtime_error(format_error(kind, line, message)), kind_(kind), line_(line), subject_(std::move(subject))
{
}

bool SopGate::eval(const std::vector<bool> &assignment) const
{
    if (cover.empty())
        return false;
    // BLIF requires all rows to share one output polarity; rows of value 0
    // describe the off-set.
    const bool onset = cover.front().value;
    for (const auto &row : cover) {
        bool match = true;
        for (size_t i = 0; i < row.cube.size() && match; ++i) {
            char c = row.cube[i];
            if (c == '-')
                continue;
            match = assignment[i] == (c == '1');
        }
        if (match)
            return onset;
    }
    return !onset;
}

void Netlist::rebuild_nets()
{
    nets.clear();
    using K = NetEndpoint::Kind;
    std::map<std::string, bool> driven;
    auto drive = [&](const std::string &net, NetEndpoint ep) {
        auto [it, fresh] = driven.emplace(net, true);
        if (!fresh)
            throw BlifError(BlifError::Kind::MultipleDrivers, 0, net, "net '" + net + "' has more than one driver");
        nets[net].driver = ep;
    };
    for (size_t i = 0; i < inputs.size(); ++i)
        drive(inputs[i], {K::PrimaryInput, int(i), 0});
    for (size_t i = 0; i < gates.size(); ++i)
        drive(gates[i].output, {K::Gate, int(i), 0});
    for (size_t i = 0; i < latches.size(); ++i)
        drive(latches[i].output, {K::Latch, int(i), 0});

    auto sink = [&](const std::string &net, NetEndpoint ep) {
        if (!driven.count(net))
            throw BlifError(BlifError::Kind::UndrivenNet, 0, net, "net '" + net + "' is used but never driven");
        nets[net].sinks.push_back(ep);
    };
    for (size_t i = 0; i < gates.size(); ++i)
        for (size_t p = 0; p < gates[i].inputs.size(); ++p)
            sink(gates[i].inputs[p], {K::Gate, int(i), int(p)});
    for (size_t i = 0; i < latches.size(); ++i) {
        sink(latches[i].input, {K::Latch, int(i), 0});
        if (!latches[i].control.empty())
            sink(latches[i].control, {K::LatchControl, int(i), 0});
    }
    for (size_t i = 0; i < outputs.size(); ++i)
        sink(outputs[i], {K::PrimaryOutput, int(i), 0});
}

Netlist parse_blif(std::string_view text)
{
    using E = BlifError::Kind;
    Netlist n;
    auto lines = tokenize(text);
    bool seen_model = false;
    SopGate *open_gate = nullptr;
    std::map<std::string, int> driver_line;

    auto claim = [&](const std::string &net, int line) {
        auto [it, fresh] = driver_line.emplace(net, line);
        if (!fresh)
            throw BlifError(E::MultipleDrivers, line, net,
                            "net '" + net + "' already driven (line " + std::to_string(it->second) + ")");
    };

    size_t i = 0;
    for (; i < lines.size(); ++i) {
        const auto &ln = lines[i];
        const std::string &head = ln.tokens.front();
        if (head.front() != '.') {
            if (!open_gate)
                throw BlifError(E::Syntax, ln.number, head, "cover row outside of a .names block");
            const size_t arity = open_gate->inputs.size();
            CoverRow row;
            if (arity == 0) {
                if (ln.tokens.size() != 1 || (head != "0" && head != "1"))
                    throw BlifError(E::Syntax, ln.number, head, "constant cover row must be '0' or '1'");
                row.cube = "";
                row.value = head == "1";
            } else {
                if (ln.tokens.size() != 2)
                    throw BlifError(E::Syntax, ln.number, head, "cover row needs a cube and an output value");
                row.cube = ln.tokens[0];
                if (row.cube.size() != arity || !valid_cube(row.cube))
                    throw BlifError(E::Syntax, ln.number, row.cube,
                                    "cube '" + row.cube + "' does not match " + std::to_string(arity) + " inputs");
                if (ln.tokens[1] != "0" && ln.tokens[1] != "1")
                    throw BlifError(E::Syntax, ln.number, ln.tokens[1], "cover output must be 0 or 1");
                row.value = ln.tokens[1] == "1";
            }
            if (!open_gate->cover.empty() && open_gate->cover.front().value != row.value)
                throw BlifError(E::Syntax, ln.number, open_gate->output, "mixed on-set and off-set rows");
            open_gate->cover.push_back(std::move(row));
            continue;
        }
        open_gate = nullptr;
        if (head == ".model") {
            if (seen_model)
                throw BlifError(E::UnsupportedDirective, ln.number, head, "multiple models are not supported");
            seen_model = true;
            n.name = ln.tokens.size() > 1 ? ln.tokens[1] : "top";
        } else if (head == ".inputs") {
            for (size_t t = 1; t < ln.tokens.size(); ++t) {
                claim(ln.tokens[t], ln.number);
                n.inputs.push_back(ln.tokens[t]);
            }
        } else if (head == ".outputs") {
            for (size_t t = 1; t < ln.tokens.size(); ++t)
                n.outputs.push_back(ln.tokens[t]);
        } else if (head == ".names") {
            if (ln.tokens.size() < 2)
                throw BlifError(E::Syntax, ln.number, head, ".names needs an output net");
            SopGate g;
            g.inputs.assign(ln.tokens.begin() + 1, ln.tokens.end() - 1);
            g.output = ln.tokens.back();
            claim(g.output, ln.number);
            n.gates.push_back(std::move(g));
            open_gate = &n.gates.back();
        } else if (head == ".latch") {
            // .latch in out [type control] [init]
            const auto &t = ln.tokens;
            Latch l;
            if (t.size() < 3 || t.size() > 6)
                throw BlifError(E::Syntax, ln.number, head, "malformed .latch");
            l.input = t[1];
            l.output = t[2];
            size_t rest = t.size() - 3;
            size_t init_pos = 0;
            if (rest == 1) {
                init_pos = 3;
            } else if (rest >= 2) {
                static const std::set<std::string> types{"fe", "re", "ah", "al", "as"};
                if (!types.count(t[3]))
                    throw BlifError(E::Syntax, ln.number, t[3], "unknown latch type '" + t[3] + "'");
                if (t[4] != "NIL")
                    l.control = t[4];
                if (rest == 3)
                    init_pos = 5;
            }
            if (init_pos) {
                const std::string &v = t[init_pos];
                if (v.size() != 1 || v[0] < '0' || v[0] > '3')
                    throw BlifError(E::Syntax, ln.number, v, "latch init must be 0..3");
                l.init = v[0] - '0';
            }
            claim(l.output, ln.number);
            n.latches.push_back(std::move(l));
        } else if (head == ".end") {
            break;
        } else {
            throw BlifError(E::UnsupportedDirective, ln.number, head, "directive '" + head + "' is not supported");
        }
    }
    if (!seen_model && !lines.empty() && lines.front().tokens.front() != ".model")
        throw BlifError(E::Syntax, lines.front().number, lines.front().tokens.front(), "expected .model");

    try {
        n.rebuild_nets();
    } catch (const BlifError &e) {
        int line = 0;
        if (auto it = driver_line.find(e.subject()); it != driver_line.end())
            line = it->second;
        else {
            // Undriven net: report the first logical line mentioning it.
            for (const auto &ln : lines) {
                for (const auto &tok : ln.tokens)
                    if (tok == e.subject()) {
                        line = ln.number;
                        break;
                    }
                if (line)
                    break;
            }
        }
        throw BlifError(e.kind(), line, e.subject(),
                        e.kind() == E::UndrivenNet ? "net '" + e.subject() + "' is used but never driven"
                                                   : "net '" + e.subject() + "' has more than one driver");
    }
    return n;
}

Netlist read_blif_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_blif(ss.str());
}

std::string write_blif(const Netlist &n)
{
    std::ostringstream os;
    os << ".model " << n.name << "\n.inputs";
    for (const auto &s : n.inputs)
        os << ' ' << s;
    os << "\n.outputs";
    for (const auto &s : n.outputs)
        os << ' ' << s;
    os << '\n';
    for (const auto &l : n.latches) {
        os << ".latch " << l.input << ' ' << l.output;
        if (!l.control.empty())
            os << " re " << l.control;
        os << ' ' << l.init << '\n';
    }
    for (const auto &g : n.gates) {
        os << ".names";
        for (const auto &s : g.inputs)
            os << ' ' << s;
        os << ' ' << g.output << '\n';
        for (const auto &row : g.cover) {
            if (!row.cube.empty())
                os << row.cube << ' ';
            os << (row.value ? '1' : '0') << '\n';
        }
    }
    os << ".end\n";
    return os.str();
}

} // namespace scrubplan
