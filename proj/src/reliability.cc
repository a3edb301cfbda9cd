#include "scrubplan/reliability.h"

#include <cmath>
#include <cstdio>

namespace scrubplan {

char to_char(Scrubber s) { return "abcd"[int(s)]; }

std::int64_t mttd_ns(std::int64_t frames, std::int64_t t_check_ns) { return (frames * t_check_ns + 1) / 2; }

std::int64_t scrub_period_ns(std::int64_t frames, std::int64_t t_check_ns) { return frames * t_check_ns; }

std::int64_t restore_ns(std::int64_t ff_frames, std::int64_t t_check_ns) { return 2 * t_check_ns * ff_frames; }

std::int64_t mttr_ns(std::int64_t n_e, std::int64_t n_c, std::int64_t mttd, std::int64_t t_restore,
                     std::int64_t t_lost, const ReliabilityParams &p)
{
    if (n_e <= 0)
        return mttd + p.t_repair_e_ns;
    using wide = __int128;
    const wide essential_only = wide(n_e - n_c) * (mttd + p.t_repair_e_ns);
    const wide critical = wide(n_c) * (mttd + p.t_repair_c_ns + t_restore + t_lost);
    const wide sum = essential_only + critical;
    return std::int64_t((2 * sum + n_e) / (2 * wide(n_e)));
}

MttrFigures evaluate(Scrubber s, const DesignFigures &d, const ReliabilityParams &p)
{
    MttrFigures f;
    bool all_critical = false;
    switch (s) {
    case Scrubber::A:
        f.frames_scanned = p.n_fr_total;
        all_critical = true;
        break;
    case Scrubber::B:
        f.frames_scanned = d.n_fr_a;
        all_critical = true;
        break;
    case Scrubber::C:
        f.frames_scanned = d.n_fr_a;
        break;
    case Scrubber::D:
        f.frames_scanned = d.n_fr_c;
        break;
    }
    f.mttd_ns = mttd_ns(f.frames_scanned, p.t_check_ns);
    f.t_restore_ns = restore_ns(d.n_fr_ff, p.t_check_ns);
    f.t_lost_ns = scrub_period_ns(f.frames_scanned, p.t_check_ns);
    if (all_critical)
        f.mttr_ns = f.mttd_ns + p.t_repair_c_ns + f.t_restore_ns + f.t_lost_ns;
    else
        f.mttr_ns = mttr_ns(d.n_e, d.n_c, f.mttd_ns, f.t_restore_ns, f.t_lost_ns, p);
    return f;
}

std::int64_t to_us(std::int64_t ns) { return (ns + 500) / 1000; }

double saving_percent(std::int64_t base_ns, std::int64_t improved_ns)
{
    if (base_ns == 0)
        return 0.0;
    // Tenths of a percent, rounded half up, in integers.
    const __int128 num = __int128(base_ns - improved_ns) * 2000;
    const __int128 den = __int128(base_ns) * 2;
    __int128 tenths = num >= 0 ? (num + base_ns) / den : -((-num + base_ns) / den);
    return double(tenths) / 10.0;
}

MttrRow mttr_row(const DesignFigures &d, const ReliabilityParams &p)
{
    MttrRow r;
    r.circuit = d.circuit;
    r.a = evaluate(Scrubber::A, d, p);
    r.b = evaluate(Scrubber::B, d, p);
    r.c = evaluate(Scrubber::C, d, p);
    r.d = evaluate(Scrubber::D, d, p);
    r.delta_da = saving_percent(r.a.mttr_ns, r.d.mttr_ns);
    r.delta_db = saving_percent(r.b.mttr_ns, r.d.mttr_ns);
    r.delta_dc = saving_percent(r.c.mttr_ns, r.d.mttr_ns);
    return r;
}

std::vector<MttrRow> mttr_table(const std::vector<DesignFigures> &rows, const ReliabilityParams &p)
{
    std::vector<MttrRow> out;
    out.reserve(rows.size());
    for (const auto &d : rows)
        out.push_back(mttr_row(d, p));
    return out;
}

namespace {

std::string fmt1(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

} // namespace

std::string mttr_table_csv(const std::vector<MttrRow> &rows)
{
    std::string out = "circuit,mttr_a_us,mttr_b_us,mttr_c_us,mttr_d_us,delta_d_a_pct,delta_d_b_pct,delta_d_c_pct\n";
    for (const auto &r : rows) {
        out += r.circuit;
        for (const auto *f : {&r.a, &r.b, &r.c, &r.d})
            out += "," + std::to_string(to_us(f->mttr_ns));
        out += "," + fmt1(r.delta_da) + "," + fmt1(r.delta_db) + "," + fmt1(r.delta_dc) + "\n";
    }
    return out;
}

nlohmann::json mttr_table_json(const std::vector<MttrRow> &rows, const ReliabilityParams &p)
{
    using nlohmann::json;
    json out;
    out["constants"] = {{"t_check_ns", p.t_check_ns},
                        {"t_repair_e_ns", p.t_repair_e_ns},
                        {"t_repair_c_ns", p.t_repair_c_ns},
                        {"n_fr_total", p.n_fr_total}};
    json arr = json::array();
    for (const auto &r : rows) {
        json row;
        row["circuit"] = r.circuit;
        const std::pair<char, const MttrFigures *> types[] = {{'a', &r.a}, {'b', &r.b}, {'c', &r.c}, {'d', &r.d}};
        for (const auto &[name, f] : types)
            row[std::string(1, name)] = {{"frames_scanned", f->frames_scanned},
                                         {"mttd_ns", f->mttd_ns},
                                         {"t_restore_ns", f->t_restore_ns},
                                         {"t_lost_ns", f->t_lost_ns},
                                         {"mttr_ns", f->mttr_ns},
                                         {"mttr_us", to_us(f->mttr_ns)}};
        row["delta_d_a_pct"] = r.delta_da;
        row["delta_d_b_pct"] = r.delta_db;
        row["delta_d_c_pct"] = r.delta_dc;
        arr.push_back(row);
    }
    out["rows"] = arr;
    return out;
}

SchemaError::SchemaError(const std::string &pointer, const std::string &msg)
        : std::runtime_error(pointer + ": " + msg), pointer_(pointer)
{
}

namespace {

std::int64_t get_count(const nlohmann::json &obj, const std::string &key, const std::string &at, bool required,
                       std::int64_t fallback = 0)
{
    const std::string ptr = at + "/" + key;
    if (!obj.contains(key)) {
        if (required)
            throw SchemaError(ptr, "missing required field");
        return fallback;
    }
    const auto &v = obj[key];
    if (!v.is_number_integer())
        throw SchemaError(ptr, "expected an integer");
    std::int64_t x = v.get<std::int64_t>();
    if (x < 0)
        throw SchemaError(ptr, "must be non-negative");
    return x;
}

} // namespace

ReliabilityInput parse_reliability_input(const nlohmann::json &j)
{
    ReliabilityInput in;
    if (!j.is_object())
        throw SchemaError("", "expected an object");
    if (j.contains("constants")) {
        const auto &c = j["constants"];
        if (!c.is_object())
            throw SchemaError("/constants", "expected an object");
        auto &p = in.params;
        p.t_check_ns = get_count(c, "t_check_ns", "/constants", false, p.t_check_ns);
        p.t_repair_e_ns = get_count(c, "t_repair_e_ns", "/constants", false, p.t_repair_e_ns);
        p.t_repair_c_ns = get_count(c, "t_repair_c_ns", "/constants", false, p.t_repair_c_ns);
        p.n_fr_total = get_count(c, "n_fr_total", "/constants", false, p.n_fr_total);
    }
    if (!j.contains("rows"))
        throw SchemaError("/rows", "missing required field");
    if (!j["rows"].is_array())
        throw SchemaError("/rows", "expected an array");
    for (size_t i = 0; i < j["rows"].size(); ++i) {
        const std::string at = "/rows/" + std::to_string(i);
        const auto &r = j["rows"][i];
        if (!r.is_object())
            throw SchemaError(at, "expected an object");
        DesignFigures d;
        if (!r.contains("circuit") || !r["circuit"].is_string())
            throw SchemaError(at + "/circuit", "expected a string");
        d.circuit = r["circuit"].get<std::string>();
        d.n_e = get_count(r, "n_e", at, true);
        d.n_c = get_count(r, "n_c", at, true);
        if (d.n_c > d.n_e)
            throw SchemaError(at + "/n_c", "must not exceed n_e");
        if (!r.contains("n_fr_used") || !r["n_fr_used"].is_object())
            throw SchemaError(at + "/n_fr_used", "expected an object with keys a, b, c");
        const auto &u = r["n_fr_used"];
        d.n_fr_a = get_count(u, "a", at + "/n_fr_used", true);
        d.n_fr_b = get_count(u, "b", at + "/n_fr_used", true);
        d.n_fr_c = get_count(u, "c", at + "/n_fr_used", true);
        for (const char *k : {"a", "b", "c"})
            if (u[k].get<std::int64_t>() > in.params.n_fr_total)
                throw SchemaError(at + "/n_fr_used/" + k, "exceeds n_fr_total");
        d.n_fr_ff = get_count(r, "n_fr_ff", at, true);
        in.rows.push_back(d);
    }
    return in;
}

} // namespace scrubplan
