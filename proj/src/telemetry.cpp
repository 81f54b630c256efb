#include "adanorm/telemetry.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <sstream>

#include "adanorm/errors.hpp"

namespace adanorm {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

void require_clean_id(const std::string& s, const char* what) {
    if (s.empty()) throw ConfigError(std::string(what) + " must not be empty");
    if (s.find_first_of(",\n\r") != std::string::npos)
        throw ConfigError(std::string(what) + " must not contain commas or newlines: \"" +
                          s + "\"");
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v))
        throw NonFiniteError(std::string(what) + " is not finite");
}

[[noreturn]] void bad_field(const std::string& path, std::size_t line, const char* what) {
    throw IoError(path + ":" + std::to_string(line) + ": malformed " + what);
}

double parse_double_field(std::string_view f, const std::string& path, std::size_t line,
                          const char* what) {
    double v = 0.0;
    auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
        bad_field(path, line, what);
    return v;
}

std::int64_t parse_int_field(std::string_view f, const std::string& path, std::size_t line,
                             const char* what) {
    std::int64_t v = 0;
    auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
        bad_field(path, line, what);
    return v;
}

std::uint64_t parse_u64_field(std::string_view f, const std::string& path, std::size_t line,
                              const char* what) {
    std::uint64_t v = 0;
    auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc{} || res.ptr != f.data() + f.size())
        bad_field(path, line, what);
    return v;
}

}  // namespace

MetricSink::MetricSink(std::string path) : path_(std::move(path)), out_(path_) {
    if (!out_) throw IoError("cannot open metrics file for writing: " + path_);
    out_ << metrics_csv_header() << '\n';
    if (!out_) throw IoError("write failed: " + path_);
}

void MetricSink::record(const MetricRow& row) {
    require_clean_id(row.run_id, "run_id");
    require_clean_id(row.tensor_id, "tensor_id");
    require_finite(row.loss, "loss");
    require_finite(row.g_norm, "g_norm");
    require_finite(row.e_t, "e_t");
    require_finite(row.effective_alpha, "effective_alpha");

    auto key = std::make_pair(row.run_id, row.tensor_id);
    auto it = last_step_.find(key);
    if (it != last_step_.end() && row.step <= it->second)
        throw ConfigError("step " + std::to_string(row.step) + " for (" + row.run_id +
                          ", " + row.tensor_id + ") does not advance past " +
                          std::to_string(it->second));

    out_ << row.run_id << ',' << row.step << ',';
    if (row.epoch) out_ << *row.epoch;
    out_ << ',' << row.tensor_id << ',' << format_double(row.loss) << ','
         << format_double(row.g_norm) << ',' << format_double(row.e_t) << ','
         << (row.correction_applied ? "true" : "false") << ','
         << format_double(row.effective_alpha) << '\n';
    if (!out_) throw IoError("write failed: " + path_);

    last_step_[key] = row.step;
    ++rows_;
}

void MetricSink::flush() {
    out_.flush();
    if (!out_) throw IoError("flush failed: " + path_);
}

std::vector<MetricRow> parse_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open metrics file for reading: " + path);

    std::vector<MetricRow> rows;
    std::string line;
    std::size_t lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!saw_header) {
            if (line != metrics_csv_header())
                throw IoError(path + ": unexpected header \"" + line + "\"");
            saw_header = true;
            continue;
        }
        if (line.empty()) continue;

        std::array<std::string_view, 9> f;
        std::string_view rest = line;
        for (std::size_t i = 0; i < 9; ++i) {
            if (i == 8) {
                if (rest.find(',') != std::string_view::npos)
                    bad_field(path, lineno, "row (too many fields)");
                f[i] = rest;
                break;
            }
            auto pos = rest.find(',');
            if (pos == std::string_view::npos)
                bad_field(path, lineno, "row (too few fields)");
            f[i] = rest.substr(0, pos);
            rest = rest.substr(pos + 1);
        }

        MetricRow r;
        r.run_id = std::string(f[0]);
        r.step = parse_int_field(f[1], path, lineno, "step");
        if (!f[2].empty()) r.epoch = parse_int_field(f[2], path, lineno, "epoch");
        r.tensor_id = std::string(f[3]);
        r.loss = parse_double_field(f[4], path, lineno, "loss");
        r.g_norm = parse_double_field(f[5], path, lineno, "g_norm");
        r.e_t = parse_double_field(f[6], path, lineno, "e_t");
        if (f[7] == "true")
            r.correction_applied = true;
        else if (f[7] == "false")
            r.correction_applied = false;
        else
            bad_field(path, lineno, "correction_applied");
        r.effective_alpha = parse_double_field(f[8], path, lineno, "effective_alpha");
        rows.push_back(std::move(r));
    }
    if (!saw_header) throw IoError(path + ": empty metrics file");
    return rows;
}

std::vector<MeanNormPoint> mean_norm_series(const std::vector<MetricRow>& rows,
                                            int window) {
    if (rows.empty()) throw ConfigError("mean_norm_series: no rows");
    if (window < 1) throw ConfigError("mean_norm_series: window must be >= 1");

    // Tensor average first, then the sliding mean over steps.
    std::map<std::int64_t, std::pair<double, std::int64_t>> acc;
    for (const auto& r : rows) {
        auto& slot = acc[r.step];
        slot.first += r.g_norm;
        slot.second += 1;
    }
    std::vector<std::int64_t> steps;
    std::vector<double> means;
    steps.reserve(acc.size());
    means.reserve(acc.size());
    for (const auto& [step, slot] : acc) {
        steps.push_back(step);
        means.push_back(slot.first / static_cast<double>(slot.second));
    }

    const std::size_t n = means.size();
    const std::size_t w = static_cast<std::size_t>(window);
    std::vector<MeanNormPoint> out;
    if (n < w) return out;

    // Centered alignment: the point at index i averages [i-left, i+right].
    const std::size_t left = (w - 1) / 2;
    const std::size_t right = w / 2;
    double sum = 0.0;
    for (std::size_t i = 0; i < w; ++i) sum += means[i];
    for (std::size_t i = left;; ++i) {
        out.push_back({steps[i], sum / static_cast<double>(w)});
        if (i + right + 1 >= n) break;
        sum += means[i + right + 1] - means[i - left];
    }
    return out;
}

std::vector<MetricRow> with_effective_norms(std::vector<MetricRow> rows) {
    for (auto& r : rows) r.g_norm = std::max(r.g_norm, r.e_t);
    return rows;
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

}  // namespace

void render_line_chart(const std::vector<Series>& series, const ChartOptions& opts,
                       const std::string& path) {
    bool any = false;
    for (const auto& s : series) any = any || !s.points.empty();
    if (!any) throw ConfigError("render_line_chart: need at least one non-empty series");
    if (opts.width < 160 || opts.height < 120)
        throw ConfigError("render_line_chart: canvas too small");

    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    bool first = true;
    for (const auto& s : series) {
        for (auto [x, y] : s.points) {
            if (opts.log_y && !(y > 0.0))
                throw ConfigError("render_line_chart: log axis requires y > 0, got " +
                                  format_double(y) + " in series \"" + s.label + "\"");
            const double yy = opts.log_y ? std::log10(y) : y;
            if (first) {
                xmin = xmax = x;
                ymin = ymax = yy;
                first = false;
            } else {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
                ymin = std::min(ymin, yy);
                ymax = std::max(ymax, yy);
            }
        }
    }
    if (xmin == xmax) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymin == ymax) {
        const double pad = std::max(std::fabs(ymax) * 0.05, 0.5);
        ymin -= pad;
        ymax += pad;
    } else {
        const double pad = (ymax - ymin) * 0.05;
        ymin -= pad;
        ymax += pad;
    }

    const double px0 = 56, px1 = opts.width - 16.0;
    const double py0 = 30, py1 = opts.height - 44.0;
    auto sx = [&](double x) { return px0 + (x - xmin) / (xmax - xmin) * (px1 - px0); };
    auto sy = [&](double y) {
        const double yy = opts.log_y ? std::log10(y) : y;
        return py1 - (yy - ymin) / (ymax - ymin) * (py1 - py0);
    };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
        << opts.width << "\" height=\"" << opts.height << "\" viewBox=\"0 0 "
        << opts.width << " " << opts.height << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << opts.width << "\" height=\""
        << opts.height
        << "\" fill=\"#ffffff\"/>\n"
        << "<g font-family=\"Helvetica, Arial, sans-serif\" font-size=\"11\" "
           "fill=\"#333333\">\n";
    if (!opts.title.empty())
        svg << "<text x=\"" << fmt2((px0 + px1) / 2) << "\" y=\"18\" text-anchor=\"middle\" "
               "font-size=\"13\">"
            << xml_escape(opts.title) << "</text>\n";

    // Grid, ticks, tick labels. Five ticks per axis, evenly spaced.
    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double gx = sx(fx);
        svg << "<line x1=\"" << fmt2(gx) << "\" y1=\"" << fmt2(py0) << "\" x2=\""
            << fmt2(gx) << "\" y2=\"" << fmt2(py1)
            << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt2(gx) << "\" y=\"" << fmt2(py1 + 16)
            << "\" text-anchor=\"middle\">" << fmt_tick(fx) << "</text>\n";

        const double fyv = ymin + (ymax - ymin) * i / 4.0;
        const double gy = py1 - (fyv - ymin) / (ymax - ymin) * (py1 - py0);
        svg << "<line x1=\"" << fmt2(px0) << "\" y1=\"" << fmt2(gy) << "\" x2=\""
            << fmt2(px1) << "\" y2=\"" << fmt2(gy)
            << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        const double label_v = opts.log_y ? std::pow(10.0, fyv) : fyv;
        svg << "<text x=\"" << fmt2(px0 - 6) << "\" y=\"" << fmt2(gy + 4)
            << "\" text-anchor=\"end\">" << fmt_tick(label_v) << "</text>\n";
    }

    // Axes on top of the grid.
    svg << "<line x1=\"" << fmt2(px0) << "\" y1=\"" << fmt2(py0) << "\" x2=\"" << fmt2(px0)
        << "\" y2=\"" << fmt2(py1) << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n"
        << "<line x1=\"" << fmt2(px0) << "\" y1=\"" << fmt2(py1) << "\" x2=\"" << fmt2(px1)
        << "\" y2=\"" << fmt2(py1) << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    if (!opts.x_label.empty())
        svg << "<text x=\"" << fmt2((px0 + px1) / 2) << "\" y=\""
            << fmt2(opts.height - 8.0) << "\" text-anchor=\"middle\">"
            << xml_escape(opts.x_label) << "</text>\n";
    if (!opts.y_label.empty())
        svg << "<text x=\"14\" y=\"" << fmt2((py0 + py1) / 2)
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
            << fmt2((py0 + py1) / 2) << ")\">" << xml_escape(opts.y_label) << "</text>\n";

    std::size_t color = 0;
    for (const auto& s : series) {
        if (s.points.empty()) continue;
        svg << "<polyline fill=\"none\" stroke=\"" << kPalette[color % 6]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            if (i) svg << ' ';
            svg << fmt2(sx(s.points[i].first)) << ',' << fmt2(sy(s.points[i].second));
        }
        svg << "\"/>\n";
        ++color;
    }

    // Legend in the top-right corner of the plot area.
    color = 0;
    double ly = py0 + 12;
    for (const auto& s : series) {
        if (s.points.empty()) continue;
        svg << "<line x1=\"" << fmt2(px1 - 150) << "\" y1=\"" << fmt2(ly) << "\" x2=\""
            << fmt2(px1 - 126) << "\" y2=\"" << fmt2(ly) << "\" stroke=\""
            << kPalette[color % 6] << "\" stroke-width=\"1.5\"/>\n"
            << "<text x=\"" << fmt2(px1 - 120) << "\" y=\"" << fmt2(ly + 4) << "\">"
            << xml_escape(s.label) << "</text>\n";
        ly += 16;
        ++color;
    }
    svg << "</g>\n</svg>\n";

    std::ofstream out(path);
    if (!out) throw IoError("cannot open chart file for writing: " + path);
    out << svg.str();
    if (!out) throw IoError("write failed: " + path);
}

namespace {

void require_line_clean(const std::string& s, const char* what) {
    if (s.find('\n') != std::string::npos || s.find('\r') != std::string::npos)
        throw ConfigError(std::string(what) + " must not contain newlines");
}

}  // namespace

void write_manifest(const RunManifest& m, const std::string& path) {
    require_line_clean(m.run_id, "run_id");
    require_line_clean(m.optimizer, "optimizer");
    require_line_clean(m.started_at, "started_at");
    require_line_clean(m.finished_at, "finished_at");
    require_line_clean(m.build_ref, "build_ref");

    std::ofstream out(path);
    if (!out) throw IoError("cannot open manifest for writing: " + path);
    out << "run_id=" << m.run_id << '\n'
        << "optimizer=" << m.optimizer << '\n'
        << "alpha=" << format_double(m.hyper.alpha) << '\n'
        << "beta1=" << format_double(m.hyper.beta1) << '\n'
        << "beta2=" << format_double(m.hyper.beta2) << '\n'
        << "gamma=" << format_double(m.hyper.gamma) << '\n'
        << "epsilon=" << format_double(m.hyper.epsilon) << '\n';
    if (m.hyper.beta1_decay_lambda)
        out << "beta1_decay_lambda=" << format_double(*m.hyper.beta1_decay_lambda) << '\n';
    out << "norm_target=" << to_string(m.hyper.norm_target) << '\n'
        << "norm_scope=" << to_string(m.hyper.norm_scope) << '\n'
        << "seed=" << m.seed << '\n'
        << "started_at=" << m.started_at << '\n'
        << "finished_at=" << m.finished_at << '\n'
        << "build_ref=" << m.build_ref << '\n';
    for (const auto& [k, v] : m.extra) {
        if (k.empty() || k.find_first_of("=\n\r") != std::string::npos)
            throw ConfigError("bad manifest extra key: \"" + k + "\"");
        require_line_clean(v, "manifest extra value");
        out << "extra." << k << '=' << v << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest for reading: " + path);

    RunManifest m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto pos = line.find('=');
        if (pos == std::string::npos)
            throw IoError(path + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = line.substr(0, pos);
        const std::string val = line.substr(pos + 1);
        if (key == "run_id") m.run_id = val;
        else if (key == "optimizer") m.optimizer = val;
        else if (key == "alpha") m.hyper.alpha = parse_double_field(val, path, lineno, "alpha");
        else if (key == "beta1") m.hyper.beta1 = parse_double_field(val, path, lineno, "beta1");
        else if (key == "beta2") m.hyper.beta2 = parse_double_field(val, path, lineno, "beta2");
        else if (key == "gamma") m.hyper.gamma = parse_double_field(val, path, lineno, "gamma");
        else if (key == "epsilon")
            m.hyper.epsilon = parse_double_field(val, path, lineno, "epsilon");
        else if (key == "beta1_decay_lambda")
            m.hyper.beta1_decay_lambda = parse_double_field(val, path, lineno, key.c_str());
        else if (key == "norm_target") m.hyper.norm_target = parse_norm_target(val);
        else if (key == "norm_scope") m.hyper.norm_scope = parse_norm_scope(val);
        else if (key == "seed") m.seed = parse_u64_field(val, path, lineno, "seed");
        else if (key == "started_at") m.started_at = val;
        else if (key == "finished_at") m.finished_at = val;
        else if (key == "build_ref") m.build_ref = val;
        else if (key.rfind("extra.", 0) == 0) m.extra[key.substr(6)] = val;
        else throw IoError(path + ":" + std::to_string(lineno) + ": unknown key \"" + key + "\"");
    }
    return m;
}

std::string iso8601_utc_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string current_build_ref() {
#ifdef ADANORM_BUILD_REF
    return ADANORM_BUILD_REF;
#else
    return "unknown";
#endif
}

}  // namespace adanorm
