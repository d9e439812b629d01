#include "phasenet/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>
#include <system_error>
#include <utility>

#include "phasenet/errors.hpp"

namespace phasenet {

namespace {

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot open " + path + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw data_error("failed writing " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path);
    std::string buf;
    in.seekg(0, std::ios::end);
    const std::streamoff sz = in.tellg();
    if (sz < 0) throw data_error("cannot read " + path);
    buf.resize(static_cast<std::size_t>(sz));
    in.seekg(0);
    in.read(buf.data(), sz);
    if (!in) throw data_error("failed reading " + path);
    return buf;
}

std::vector<std::string_view> split_view(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_csv_double(std::string_view field, const std::string& where) {
    double v{};
    const auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size() || field.empty()) {
        throw data_error(where + ": bad numeric field '" + std::string(field) + "'");
    }
    return v;
}

/// Fixed-point with two decimals for SVG coordinates.
std::string coord(double v) {
    char buf[48];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v,
                                       std::chars_format::fixed, 2);
    if (ec != std::errc()) throw std::runtime_error("coordinate formatting failed");
    return std::string(buf, p);
}

constexpr const char* kPalette[] = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
};

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("double formatting failed");
    return std::string(buf, p);
}

void write_csv(const std::vector<TrialRecord>& records, const std::string& path) {
    std::string out = "step,variant,test_accuracy,train_loss\n";
    for (const TrialRecord& r : records) {
        out += std::to_string(r.step);
        out += ',';
        out += variant_token(r.variant);
        out += ',';
        out += format_double(r.test_accuracy);
        out += ',';
        out += format_double(r.train_loss);
        out += '\n';
    }
    write_text_file(path, out);
}

std::vector<TrialRecord> read_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    const std::vector<std::string_view> lines = split_view(text, '\n');
    if (lines.empty() || lines[0] != "step,variant,test_accuracy,train_loss") {
        throw data_error(path + ": missing or malformed CSV header");
    }
    std::vector<TrialRecord> records;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::string_view line = lines[li];
        if (line.empty() && li + 1 == lines.size()) break; // trailing newline
        const std::string where = path + ":" + std::to_string(li + 1);
        const std::vector<std::string_view> fields = split_view(line, ',');
        if (fields.size() != 4) {
            throw data_error(where + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        }
        TrialRecord r;
        const auto [p, ec] = std::from_chars(
            fields[0].data(), fields[0].data() + fields[0].size(), r.step);
        if (ec != std::errc() || p != fields[0].data() + fields[0].size() ||
            fields[0].empty()) {
            throw data_error(where + ": bad step field '" + std::string(fields[0]) +
                             "'");
        }
        try {
            r.variant = parse_variant(fields[1]);
        } catch (const config_error& e) {
            throw data_error(where + ": " + e.what());
        }
        r.test_accuracy = parse_csv_double(fields[2], where);
        r.train_loss = parse_csv_double(fields[3], where);
        records.push_back(r);
    }
    return records;
}

void emit_plot(const std::vector<TrialRecord>& records, const std::string& path) {
    if (records.empty()) throw data_error("plot: no records to plot");

    std::vector<PruneVariant> order;
    for (const TrialRecord& r : records) {
        if (std::find(order.begin(), order.end(), r.variant) == order.end()) {
            order.push_back(r.variant);
        }
    }

    std::size_t max_step = 0;
    for (const TrialRecord& r : records) max_step = std::max(max_step, r.step);
    const double span = max_step == 0 ? 1.0 : static_cast<double>(max_step);

    constexpr double kLeft = 60.0, kTop = 20.0, kPlotW = 620.0, kPlotH = 450.0;
    constexpr double kWidth = 840.0, kHeight = 520.0;
    const auto px = [&](double step) { return kLeft + step / span * kPlotW; };
    const auto py = [&](double acc) { return kTop + (1.0 - acc) * kPlotH; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + coord(kWidth) +
           "\" height=\"" + coord(kHeight) + "\" viewBox=\"0 0 " + coord(kWidth) +
           " " + coord(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes
    svg += "<line x1=\"" + coord(kLeft) + "\" y1=\"" + coord(kTop) + "\" x2=\"" +
           coord(kLeft) + "\" y2=\"" + coord(kTop + kPlotH) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + coord(kLeft) + "\" y1=\"" + coord(kTop + kPlotH) +
           "\" x2=\"" + coord(kLeft + kPlotW) + "\" y2=\"" + coord(kTop + kPlotH) +
           "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double acc = t / 5.0;
        const double y = py(acc);
        svg += "<line x1=\"" + coord(kLeft - 4) + "\" y1=\"" + coord(y) +
               "\" x2=\"" + coord(kLeft) + "\" y2=\"" + coord(y) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + coord(kLeft - 8) + "\" y=\"" + coord(y + 4) +
               "\" text-anchor=\"end\">" + format_double(acc) + "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
        const double step = span * t / 4.0;
        const double x = px(step);
        svg += "<line x1=\"" + coord(x) + "\" y1=\"" + coord(kTop + kPlotH) +
               "\" x2=\"" + coord(x) + "\" y2=\"" + coord(kTop + kPlotH + 4) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + coord(x) + "\" y=\"" + coord(kTop + kPlotH + 18) +
               "\" text-anchor=\"middle\">" +
               std::to_string(static_cast<long long>(std::llround(step))) +
               "</text>\n";
    }
    svg += "<text x=\"" + coord(kLeft + kPlotW / 2) + "\" y=\"" +
           coord(kHeight - 12) + "\" text-anchor=\"middle\">step</text>\n";
    svg += "<text x=\"16\" y=\"" + coord(kTop + kPlotH / 2) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           coord(kTop + kPlotH / 2) + ")\">test accuracy</text>\n";

    // one polyline per variant, points ordered by step
    for (std::size_t vi = 0; vi < order.size(); ++vi) {
        std::vector<std::pair<std::size_t, double>> pts;
        for (const TrialRecord& r : records) {
            if (r.variant == order[vi]) pts.emplace_back(r.step, r.test_accuracy);
        }
        std::stable_sort(pts.begin(), pts.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        svg += "<polyline fill=\"none\" stroke=\"";
        svg += kPalette[vi % (sizeof kPalette / sizeof kPalette[0])];
        svg += "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i != 0) svg += ' ';
            svg += coord(px(static_cast<double>(pts[i].first)));
            svg += ',';
            svg += coord(py(pts[i].second));
        }
        svg += "\"/>\n";
    }

    // legend
    for (std::size_t vi = 0; vi < order.size(); ++vi) {
        const double y = kTop + 10 + 18.0 * static_cast<double>(vi);
        const double x = kLeft + kPlotW + 24;
        svg += "<line x1=\"" + coord(x) + "\" y1=\"" + coord(y) + "\" x2=\"" +
               coord(x + 22) + "\" y2=\"" + coord(y) + "\" stroke=\"";
        svg += kPalette[vi % (sizeof kPalette / sizeof kPalette[0])];
        svg += "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + coord(x + 28) + "\" y=\"" + coord(y + 4) + "\">";
        svg += variant_token(order[vi]);
        svg += "</text>\n";
    }

    svg += "</svg>\n";
    write_text_file(path, svg);
}

} // namespace phasenet
