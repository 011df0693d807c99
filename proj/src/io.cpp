#include "fairaudit/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <fmt/format.h>

#include "fairaudit/errors.hpp"

namespace fairaudit::io {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view text, std::size_t line, std::string_view column) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw DataError(fmt::format("line {}: column '{}': cannot parse '{}' as a finite number",
                                    line, column, text));
    }
    return value;
}

double normalize_one(double value, const ScoreScale& scale, std::size_t line,
                     std::string_view column) {
    try {
        const double v[] = {value};
        return normalize_scores(v, scale.min, scale.max).front();
    } catch (const DomainError&) {
        throw DataError(fmt::format("line {}: column '{}': value {} outside declared scale [{}, {}]",
                                    line, column, value, scale.min, scale.max));
    }
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       std::string_view name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line, char delimiter) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

ObservationTable read_predictions_csv(std::istream& in, const CsvSchemaConfig& schema,
                                      std::string_view source) {
    std::string line;
    if (!std::getline(in, line)) throw DataError(fmt::format("{}: missing header row", source));
    if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    std::vector<std::string> header = split_csv_line(line, schema.delimiter);
    for (auto& h : header) h = std::string(trim(h));

    auto require = [&](const std::string& name) {
        const auto idx = find_column(header, name);
        if (!idx) throw DataError(fmt::format("{}: missing mandatory column '{}'", source, name));
        return *idx;
    };
    const std::size_t id_col = require(schema.id_column);
    const std::size_t group_col = require(schema.group_column);
    const std::size_t pred_col = require(schema.prediction_column);
    const auto label_col = find_column(header, schema.label_column);

    ObservationTable table;
    table.label_scale = schema.label_scale;
    std::vector<std::size_t> labeled_lines;
    std::vector<std::size_t> unlabeled_lines;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line, schema.delimiter);
        if (fields.size() != header.size()) {
            throw DataError(fmt::format("{}: line {}: expected {} fields, found {}", source, line_no,
                                        header.size(), fields.size()));
        }
        Observation row;
        row.id = std::string(trim(fields[id_col]));
        row.group = std::string(trim(fields[group_col]));
        if (row.group.empty()) {
            throw DataError(fmt::format("{}: line {}: empty group name", source, line_no));
        }
        row.prediction = parse_number(fields[pred_col], line_no, schema.prediction_column);
        if (schema.prediction_scale) {
            row.prediction = normalize_one(row.prediction, *schema.prediction_scale, line_no,
                                           schema.prediction_column);
        }
        if (label_col && !trim(fields[*label_col]).empty()) {
            const double raw = parse_number(fields[*label_col], line_no, schema.label_column);
            row.label = normalize_one(raw, schema.label_scale, line_no, schema.label_column);
            labeled_lines.push_back(line_no);
        } else {
            unlabeled_lines.push_back(line_no);
        }
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) throw DataError(fmt::format("{}: no data rows", source));
    if (!labeled_lines.empty() && !unlabeled_lines.empty()) {
        const auto shown = std::min<std::size_t>(unlabeled_lines.size(), 10);
        std::vector<std::size_t> first(unlabeled_lines.begin(), unlabeled_lines.begin() + shown);
        throw DataError(fmt::format(
            "{}: mixed label coverage: {} of {} rows lack a label (lines {}{})", source,
            unlabeled_lines.size(), table.rows.size(), fmt::join(first, ", "),
            unlabeled_lines.size() > shown ? ", ..." : ""));
    }
    table.validate();
    return table;
}

ObservationTable load_predictions_csv(const std::filesystem::path& path,
                                      const CsvSchemaConfig& schema) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    return read_predictions_csv(in, schema, path.string());
}

std::string format_p_display(double p) {
    if (std::isnan(p)) return "nan";
    if (p == 0.0) return "0";
    std::string s = fmt::format("{:.1e}", p);
    // "1.2e-02" -> "1.2e-2", "1.0e+00" -> "1.0e0"
    const auto e = s.find('e');
    std::string mantissa = s.substr(0, e);
    std::string_view exponent(s);
    exponent.remove_prefix(e + 1);
    const bool negative = exponent.front() == '-';
    exponent.remove_prefix(1);
    while (exponent.size() > 1 && exponent.front() == '0') exponent.remove_prefix(1);
    return mantissa + "e" + (negative ? "-" : "") + std::string(exponent);
}

std::string format_p_table(double p, double floor) {
    if (!(p < floor)) return format_p_display(p);
    const double exponent = std::round(std::log10(floor));
    if (std::fabs(std::pow(10.0, exponent) - floor) <= 1e-12 * floor) {
        return fmt::format("<1e{}", static_cast<int>(exponent));
    }
    return "<" + format_p_display(floor);
}

namespace {

json p_value_json(double p) {
    return json{{"value", p}, {"display", format_p_display(p)}, {"table", format_p_table(p)}};
}

json matrix_json(const SquareMatrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json analysis_json(const TargetAnalysis& analysis) {
    json out;
    out["omnibus"] = json::array();
    for (const auto& r : analysis.omnibus) out["omnibus"].push_back(to_json(r));
    out["pairwise"] = analysis.pairwise ? to_json(*analysis.pairwise) : json(nullptr);
    out["parity"] = to_json(analysis.parity);
    return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const TestResult& result) {
    json options{{"continuity", result.options.continuity}};
    if (result.options.permutations) {
        options["permutations"] = *result.options.permutations;
        options["statistic"] = "between_group_sum_of_squares";
    }
    if (result.options.seed) options["seed"] = *result.options.seed;
    return json{
        {"test", std::string(to_string(result.test))},
        {"statistic", result.statistic},
        {"z", optional_number(result.z)},
        {"p_value", p_value_json(result.p_value)},
        {"group_sizes", result.group_sizes},
        {"options", std::move(options)},
        {"warnings", result.warnings},
    };
}

json to_json(const PairwiseMatrix& matrix) {
    return json{
        {"groups", matrix.groups},
        {"z", matrix_json(matrix.z)},
        {"p_raw", matrix_json(matrix.p_raw)},
        {"p_adjusted", matrix.p_adjusted ? matrix_json(*matrix.p_adjusted) : json(nullptr)},
        {"adjustment",
         matrix.adjustment ? json(std::string(to_string(*matrix.adjustment))) : json(nullptr)},
        {"warnings", matrix.warnings},
    };
}

json to_json(const ParitySummary& summary) {
    json pairs = json::array();
    for (const auto& v : summary.pair_verdicts) {
        pairs.push_back(json{{"group_a", v.group_a},
                             {"group_b", v.group_b},
                             {"p_adjusted", p_value_json(v.p_adjusted)},
                             {"satisfied", v.satisfied}});
    }
    return json{
        {"criterion", std::string(to_string(summary.criterion))},
        {"alpha", summary.alpha},
        {"pairs", std::move(pairs)},
        {"satisfied_count", summary.satisfied_count},
        {"total_pairs", summary.total_pairs},
        {"fraction", summary.fraction},
        {"fraction_display", fmt::format("{:.3f}", summary.fraction)},
    };
}

json to_json(const AuditReport& report) {
    const auto& c = report.config;
    json tests = json::array();
    for (const auto t : c.tests) tests.push_back(std::string(to_string(t)));
    json config{
        {"alpha", c.alpha},
        {"tests", tests},
        {"adjustment", std::string(to_string(c.adjustment))},
        {"permutations", c.permutations},
        {"seed", c.seed},
        {"continuity", c.continuity},
        {"label_scale", json{{"min", c.label_scale.min}, {"max", c.label_scale.max}}},
    };

    json descriptives = json::array();
    for (const auto& d : report.descriptives) {
        descriptives.push_back(json{
            {"group", d.group},
            {"n", d.n},
            {"prediction", json{{"mean", d.prediction_mean}, {"median", d.prediction_median}}},
            {"error", d.error_mean ? json{{"mean", *d.error_mean}, {"median", *d.error_median}}
                                   : json(nullptr)},
        });
    }

    json out{
        {"config", std::move(config)},
        {"descriptives", std::move(descriptives)},
        {"groups", report.groups},
        {"excluded_groups", report.excluded_groups},
        {"predictions", analysis_json(report.predictions)},
        {"errors", report.errors ? analysis_json(*report.errors) : json(nullptr)},
        {"regression_metrics",
         report.regression ? json{{"mse", report.regression->mse}, {"rmse", report.regression->rmse}}
                           : json(nullptr)},
        {"warnings", report.warnings},
    };
    return out;
}

std::string serialize_report(const AuditReport& report) { return to_json(report).dump(2) + "\n"; }

void write_report_json(const AuditReport& report, const std::filesystem::path& path) {
    const std::string text = serialize_report(report);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path.string()));
    out << text;
    if (!out.flush()) throw DataError(fmt::format("write to '{}' failed", path.string()));
}

HeatmapFormat parse_heatmap_format(std::string_view name) {
    if (name == "svg") return HeatmapFormat::svg;
    if (name == "csv") return HeatmapFormat::csv;
    throw ConfigError("unsupported heatmap format '" + std::string(name) + "'");
}

double heatmap_ramp_position(double p) {
    if (!(p > 0.0)) return 8.0;
    return std::clamp(-std::log10(p), 0.0, 8.0);
}

std::string ramp_color(double t) {
    // Sequential ramp, luminance strictly decreasing with t.
    struct Stop {
        double at;
        std::array<double, 3> rgb;
    };
    static constexpr std::array<Stop, 4> stops{{
        {0.0, {255, 247, 236}},
        {2.0, {253, 187, 132}},
        {5.0, {215, 48, 31}},
        {8.0, {127, 0, 0}},
    }};
    t = std::clamp(t, 0.0, 8.0);
    std::size_t s = 0;
    while (s + 2 < stops.size() && t > stops[s + 1].at) ++s;
    const double w = (t - stops[s].at) / (stops[s + 1].at - stops[s].at);
    std::array<int, 3> c{};
    for (std::size_t i = 0; i < 3; ++i) {
        c[i] = static_cast<int>(std::lround(stops[s].rgb[i] + w * (stops[s + 1].rgb[i] - stops[s].rgb[i])));
    }
    return fmt::format("#{:02x}{:02x}{:02x}", c[0], c[1], c[2]);
}

namespace {

const SquareMatrix& adjusted_or_throw(const PairwiseMatrix& matrix) {
    if (!matrix.p_adjusted) throw DataError("heatmap: adjusted p-values not computed");
    return *matrix.p_adjusted;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + "\"";
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

std::string render_heatmap_csv(const PairwiseMatrix& matrix) {
    const SquareMatrix& p = adjusted_or_throw(matrix);
    std::string out = "group";
    for (const auto& g : matrix.groups) out += "," + csv_field(g);
    out += "\n";
    for (std::size_t i = 0; i < matrix.k(); ++i) {
        out += csv_field(matrix.groups[i]);
        // {} gives the shortest representation that round-trips exactly.
        for (std::size_t j = 0; j < matrix.k(); ++j) out += fmt::format(",{}", p(i, j));
        out += "\n";
    }
    return out;
}

std::string render_heatmap_svg(const PairwiseMatrix& matrix, double alpha) {
    const SquareMatrix& p = adjusted_or_throw(matrix);
    constexpr int cell = 72;
    constexpr int margin = 140;
    const int k = static_cast<int>(matrix.k());
    const int side = margin + k * cell + 80;

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" "
        "viewBox=\"0 0 {0} {0}\" font-family=\"sans-serif\" font-size=\"13\">\n",
        side);
    out += fmt::format("<title>Pairwise adjusted p-values ({})</title>\n",
                       matrix.adjustment ? to_string(*matrix.adjustment) : "none");
    out += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    for (int i = 0; i < k; ++i) {
        const std::string name = xml_escape(matrix.groups[static_cast<std::size_t>(i)]);
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>\n",
                           margin - 8, margin + i * cell + cell / 2, name);
        out += fmt::format("<text x=\"{0}\" y=\"{1}\" text-anchor=\"start\" "
                           "transform=\"rotate(-45 {0} {1})\">{2}</text>\n",
                           margin + i * cell + cell / 2, margin - 8, name);
    }
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            const int x = margin + j * cell;
            const int y = margin + i * cell;
            if (i == j) {
                out += fmt::format("<rect class=\"diagonal\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" "
                                   "fill=\"#e0e0e0\" stroke=\"#ffffff\"/>\n", x, y, cell, cell);
                continue;
            }
            const double pv = p(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            const double t = heatmap_ramp_position(pv);
            const bool parity = pv >= alpha;
            out += fmt::format(
                "<rect class=\"cell{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" "
                "stroke=\"{}\" stroke-width=\"{}\" data-p=\"{}\" data-ramp=\"{}\"/>\n",
                parity ? " parity" : "", x, y, cell, cell, ramp_color(t),
                parity ? "#000000" : "#ffffff", parity ? 3 : 1, pv, t);
            out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" dominant-baseline=\"middle\" "
                               "fill=\"{}\">{}</text>\n",
                               x + cell / 2, y + cell / 2, t > 4.0 ? "#ffffff" : "#000000",
                               format_p_display(pv));
        }
    }
    out += "</svg>\n";
    return out;
}

void write_pairwise_heatmap(const PairwiseMatrix& matrix, const std::filesystem::path& path,
                            HeatmapFormat format, double alpha) {
    const std::string text = format == HeatmapFormat::csv ? render_heatmap_csv(matrix)
                                                          : render_heatmap_svg(matrix, alpha);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot open '{}' for writing", path.string()));
    out << text;
    if (!out.flush()) throw DataError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace fairaudit::io
