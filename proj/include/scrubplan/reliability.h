// MTTD / MTTR model for frame-scanning scrubbers with and without bit
// classification, in integer nanoseconds.
//
// Scrubber types:
//   a  scans every device frame, treats every upset as critical
//   b  scans the used frames of the unconstrained layout, every upset critical
//   c  as b, but splits repair cost between essential and critical upsets
//   d  as c, over the used frames of the fully constrained layout
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace scrubplan {

struct ReliabilityParams
{
    std::int64_t t_check_ns = 810;
    std::int64_t t_repair_e_ns = 490'000;
    std::int64_t t_repair_c_ns = 1'100'000;
    std::int64_t n_fr_total = 22261;
};

struct DesignFigures
{
    std::string circuit;
    std::int64_t n_e = 0;
    std::int64_t n_c = 0;
    std::int64_t n_fr_a = 0; // used frames, unconstrained layout
    std::int64_t n_fr_b = 0; // used frames, constrained placement
    std::int64_t n_fr_c = 0; // used frames, constrained placement and routing
    std::int64_t n_fr_ff = 0;
};

enum class Scrubber
{
    A,
    B,
    C,
    D,
};

char to_char(Scrubber s);

struct MttrFigures
{
    std::int64_t frames_scanned = 0;
    std::int64_t mttd_ns = 0;
    std::int64_t t_restore_ns = 0;
    std::int64_t t_lost_ns = 0;
    std::int64_t mttr_ns = 0;
};

// Half of a full scan, rounded half up.
std::int64_t mttd_ns(std::int64_t frames, std::int64_t t_check_ns);
// Checkpoint period: one full scan of the used frames.
std::int64_t scrub_period_ns(std::int64_t frames, std::int64_t t_check_ns);
// Restoring flip-flop state reads and writes every frame holding a used FF.
std::int64_t restore_ns(std::int64_t ff_frames, std::int64_t t_check_ns);

// Weighted repair time over essential-only and critical upsets. With
// n_e == 0 the result is mttd + t_repair_e.
std::int64_t mttr_ns(std::int64_t n_e, std::int64_t n_c, std::int64_t mttd, std::int64_t t_restore,
                     std::int64_t t_lost, const ReliabilityParams &p);

MttrFigures evaluate(Scrubber s, const DesignFigures &d, const ReliabilityParams &p);

struct MttrRow
{
    std::string circuit;
    MttrFigures a, b, c, d;
    // Percent saving of type d relative to a, b and c.
    double delta_da = 0, delta_db = 0, delta_dc = 0;
};

MttrRow mttr_row(const DesignFigures &d, const ReliabilityParams &p);
std::vector<MttrRow> mttr_table(const std::vector<DesignFigures> &rows, const ReliabilityParams &p);

// Nanoseconds to whole microseconds, rounded half up.
std::int64_t to_us(std::int64_t ns);
// Saving in percent, rounded to one decimal.
double saving_percent(std::int64_t base_ns, std::int64_t improved_ns);

std::string mttr_table_csv(const std::vector<MttrRow> &rows);
nlohmann::json mttr_table_json(const std::vector<MttrRow> &rows, const ReliabilityParams &p);

class SchemaError : public std::runtime_error
{
  public:
    SchemaError(const std::string &pointer, const std::string &msg);
    const std::string &pointer() const { return pointer_; }

  private:
    std::string pointer_;
};

struct ReliabilityInput
{
    ReliabilityParams params;
    std::vector<DesignFigures> rows;
};

// {"constants": {...optional overrides...}, "rows": [{"circuit", "n_e", "n_c",
//  "n_fr_used": {"a","b","c"}, "n_fr_ff"}]}
ReliabilityInput parse_reliability_input(const nlohmann::json &j);

} // namespace scrubplan
