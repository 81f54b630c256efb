#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adanorm/optim.hpp"

namespace adanorm {

// One per-step, per-tensor telemetry record. Field order matches the CSV
// column order. step is strictly increasing within a (run_id, tensor_id)
// pair; all scalar fields are finite.
struct MetricRow {
    std::string run_id;
    std::int64_t step = 0;
    std::optional<std::int64_t> epoch;
    std::string tensor_id;
    double loss = 0.0;
    double g_norm = 0.0;
    double e_t = 0.0;
    bool correction_applied = false;
    double effective_alpha = 0.0;

    bool operator==(const MetricRow&) const = default;
};

// Header line shared by the writer and the parser.
inline const char* metrics_csv_header() {
    return "run_id,step,epoch,tensor_id,loss,g_norm,e_t,correction_applied,effective_alpha";
}

// Append-only CSV writer. Writes the header on open. Not safe to share
// across threads; concurrent runs use one sink each on distinct files.
class MetricSink {
public:
    explicit MetricSink(std::string path);

    // Validates the row (finite scalars, clean ids, strictly increasing
    // step per (run_id, tensor_id)) and appends one CSV line.
    void record(const MetricRow& row);

    void flush();

    const std::string& path() const { return path_; }
    std::int64_t rows_written() const { return rows_; }

private:
    std::string path_;
    std::ofstream out_;
    std::int64_t rows_ = 0;
    std::map<std::pair<std::string, std::string>, std::int64_t> last_step_;
};

// Reads back a file written by MetricSink. Scalars are emitted in shortest
// round-trip form, so parse(emit(rows)) == rows exactly.
std::vector<MetricRow> parse_metrics_csv(const std::string& path);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

struct MeanNormPoint {
    std::int64_t step = 0;
    double mean_norm = 0.0;

    bool operator==(const MeanNormPoint&) const = default;
};

// Per-step mean of g_norm across tensor_ids, then a centered sliding mean
// of width window over the step axis. Only steps where the full window
// fits are emitted, so the output is shorter than the input by window-1
// (empty when fewer than window distinct steps exist). window=1 is the
// identity on the per-step means.
std::vector<MeanNormPoint> mean_norm_series(const std::vector<MetricRow>& rows,
                                            int window);

// Replaces each g_norm with the norm of the gradient the update actually
// consumed: max(g_norm, e_t). Rows from base optimizers carry e_t == 0 and
// pass through unchanged. Norm-trajectory charts compare this quantity.
std::vector<MetricRow> with_effective_norms(std::vector<MetricRow> rows);

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (x, y)
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;  // log_y requires every y > 0
    int width = 640;
    int height = 400;
};

// Standalone SVG 1.1 line chart: one polyline per series, axis ticks, and a
// legend entry per series. Output is deterministic for fixed input.
void render_line_chart(const std::vector<Series>& series, const ChartOptions& opts,
                       const std::string& path);

// Flat key=value run descriptor. extra carries free-form config details
// under an "extra." prefix; keys must not contain '=' or newlines.
struct RunManifest {
    std::string run_id;
    std::string optimizer;
    HyperParams hyper;
    std::uint64_t seed = 0;
    std::string started_at;   // ISO-8601 UTC, e.g. 2026-08-21T09:15:02Z
    std::string finished_at;
    std::string build_ref;
    std::map<std::string, std::string> extra;

    bool operator==(const RunManifest&) const = default;
};

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

std::string iso8601_utc_now();

// git-describe string baked in at build time; "unknown" outside a checkout.
std::string current_build_ref();

}  // namespace adanorm
