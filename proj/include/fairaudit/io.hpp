#pragma once

// CSV ingestion, JSON report serialization and heatmap emission.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fairaudit/audit.hpp"
#include "fairaudit/posthoc.hpp"

namespace fairaudit::io {

struct CsvSchemaConfig {
    std::string id_column = "image";
    std::string group_column = "race";
    std::string label_column = "label";
    std::string prediction_column = "prediction";
    /// Scale of the raw labels; they are normalized onto [0, 1] at load time.
    ScoreScale label_scale;
    /// Set when predictions are on a raw scale rather than [0, 1].
    std::optional<ScoreScale> prediction_scale;
    char delimiter = ',';
};

/// Splits one CSV record. Handles double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line, char delimiter);

/// Reads a header row followed by one observation per line. Labels are
/// normalized with the schema scale; an empty label field means "unlabeled".
/// Throws DataError with line numbers on any validation failure.
ObservationTable read_predictions_csv(std::istream& in, const CsvSchemaConfig& schema,
                                      std::string_view source = "<stream>");

ObservationTable load_predictions_csv(const std::filesystem::path& path,
                                      const CsvSchemaConfig& schema);

/// Two significant figures in scientific notation, e.g. "1.9e-47", "1.2e-2".
std::string format_p_display(double p);

/// Table-style rendering: "<1e-3" below `floor`, otherwise format_p_display.
std::string format_p_table(double p, double floor = 1e-3);

nlohmann::json to_json(const TestResult& result);
nlohmann::json to_json(const PairwiseMatrix& matrix);
nlohmann::json to_json(const ParitySummary& summary);
nlohmann::json to_json(const AuditReport& report);

/// The exact bytes written by write_report_json.
std::string serialize_report(const AuditReport& report);

void write_report_json(const AuditReport& report, const std::filesystem::path& path);

enum class HeatmapFormat { svg, csv };

/// "svg" or "csv"; throws ConfigError otherwise.
HeatmapFormat parse_heatmap_format(std::string_view name);

/// Colour-ramp coordinate of a cell: -log10(p) clamped to [0, 8].
double heatmap_ramp_position(double p);

/// "#rrggbb" along the ramp, t in [0, 8]; light at 0, dark at 8.
std::string ramp_color(double t);

std::string render_heatmap_csv(const PairwiseMatrix& matrix);
std::string render_heatmap_svg(const PairwiseMatrix& matrix, double alpha);

void write_pairwise_heatmap(const PairwiseMatrix& matrix, const std::filesystem::path& path,
                            HeatmapFormat format, double alpha = 0.05);

}  // namespace fairaudit::io
