#include "fairaudit/cli.hpp"

#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fairaudit/audit.hpp"
#include "fairaudit/errors.hpp"
#include "fairaudit/io.hpp"

namespace fairaudit {

namespace {

ScoreScale parse_scale(const std::string& text, std::string_view flag) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw ConfigError(fmt::format("{} expects MIN:MAX, got '{}'", flag, text));
    }
    try {
        std::size_t used_min = 0;
        std::size_t used_max = 0;
        const std::string lo = text.substr(0, colon);
        const std::string hi = text.substr(colon + 1);
        ScoreScale scale{std::stod(lo, &used_min), std::stod(hi, &used_max)};
        if (used_min != lo.size() || used_max != hi.size()) throw std::invalid_argument(text);
        if (!(scale.max > scale.min)) {
            throw ConfigError(fmt::format("{}: MAX must exceed MIN", flag));
        }
        return scale;
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const ConfigError*>(&e) != nullptr) throw;
        throw ConfigError(fmt::format("{} expects MIN:MAX, got '{}'", flag, text));
    }
}

TestKind parse_test(std::string_view name) {
    if (name == "mwu") return TestKind::mwu;
    if (name == "ks") return TestKind::ks;
    if (name == "kw" || name == "kruskal_wallis") return TestKind::kruskal_wallis;
    if (name == "permutation" || name == "perm") return TestKind::permutation;
    throw ConfigError(fmt::format("unknown test '{}' (expected mwu, ks, kw, permutation)", name));
}

std::filesystem::path sibling_path(const std::filesystem::path& path, std::string_view suffix) {
    std::filesystem::path out = path;
    out.replace_filename(path.stem().string() + std::string(suffix) + path.extension().string());
    return out;
}

void print_analysis(std::ostream& out, std::string_view title, const TargetAnalysis& analysis) {
    fmt::print(out, "\n{}\n", title);
    for (const auto& r : analysis.omnibus) {
        fmt::print(out, "  {:<16} statistic = {:<14.6g} p = {}\n", to_string(r.test), r.statistic,
                   io::format_p_display(r.p_value));
    }
    const auto& parity = analysis.parity;
    fmt::print(out, "  {} parity at alpha = {}: {} of {} pairs ({:.1f}%)\n",
               to_string(parity.criterion), parity.alpha, parity.satisfied_count,
               parity.total_pairs, 100.0 * parity.fraction);
}

void print_summary(std::ostream& out, const AuditReport& report) {
    const bool labeled = report.errors.has_value();
    fmt::print(out, "{:<20} {:>6} {:>10} {:>10}", "group", "n", "pred_mean", "pred_med");
    if (labeled) fmt::print(out, " {:>10} {:>10}", "err_mean", "err_med");
    fmt::print(out, "\n");
    for (const auto& d : report.descriptives) {
        fmt::print(out, "{:<20} {:>6} {:>10.4f} {:>10.4f}", d.group, d.n, d.prediction_mean,
                   d.prediction_median);
        if (d.error_mean) fmt::print(out, " {:>10.4f} {:>10.4f}", *d.error_mean, *d.error_median);
        fmt::print(out, "\n");
    }
    print_analysis(out, "predictions", report.predictions);
    if (report.errors) print_analysis(out, "errors", *report.errors);
    if (report.regression) {
        fmt::print(out, "\nmse = {:.6g}, rmse = {:.6g}\n", report.regression->mse,
                   report.regression->rmse);
    }
    for (const auto& w : report.warnings) fmt::print(out, "warning: {}\n", w);
}

struct AuditArgs {
    std::string input;
    io::CsvSchemaConfig schema;
    std::string label_scale;
    std::string pred_scale;
    double alpha = 0.05;
    std::vector<std::string> tests;
    std::string adjust = "bh";
    std::size_t permutations = 4999;
    std::uint64_t seed = 42;
    bool continuity = false;
    unsigned workers = 1;
    std::string output;
    std::string heatmap;
    std::string heatmap_format = "svg";
};

int run_audit_command(const AuditArgs& args, std::ostream& out, std::ostream& err) {
    AuditConfig config;
    io::CsvSchemaConfig schema = args.schema;
    io::HeatmapFormat format{};
    try {
        config.alpha = args.alpha;
        config.permutations = args.permutations;
        config.seed = args.seed;
        config.continuity = args.continuity;
        config.workers = std::max(1u, args.workers);
        config.adjustment = parse_adjustment(args.adjust);
        for (const auto& t : args.tests) config.tests.push_back(parse_test(t));
        if (!args.label_scale.empty()) schema.label_scale = parse_scale(args.label_scale, "--label-scale");
        if (!args.pred_scale.empty()) schema.prediction_scale = parse_scale(args.pred_scale, "--pred-scale");
        config.label_scale = schema.label_scale;
        format = io::parse_heatmap_format(args.heatmap_format);
        config.validate();
    } catch (const ConfigError& e) {
        fmt::print(err, "usage error: {}\n", e.what());
        return kExitUsageError;
    }

    try {
        const ObservationTable table = io::load_predictions_csv(args.input, schema);
        const AuditReport report = run_audit(table, config);
        print_summary(out, report);
        if (!args.output.empty()) io::write_report_json(report, args.output);
        if (!args.heatmap.empty()) {
            if (report.predictions.pairwise) {
                io::write_pairwise_heatmap(*report.predictions.pairwise, args.heatmap, format,
                                           config.alpha);
            } else {
                fmt::print(err, "warning: two groups produce no pairwise matrix; heatmap not written\n");
            }
            if (report.errors && report.errors->pairwise) {
                io::write_pairwise_heatmap(*report.errors->pairwise,
                                           sibling_path(args.heatmap, "_errors"), format,
                                           config.alpha);
            }
        }
    } catch (const ConfigError& e) {
        fmt::print(err, "usage error: {}\n", e.what());
        return kExitUsageError;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitDataError;
    }
    return kExitOk;
}

}  // namespace

int cli_main(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Statistical fairness audit for regression model predictions", "fairaudit"};
    app.require_subcommand(1);

    AuditArgs audit;
    auto* cmd = app.add_subcommand("audit", "Run group tests, post hoc comparisons and parity checks");
    cmd->add_option("--input", audit.input, "Prediction CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--id-col", audit.schema.id_column, "Id column")->capture_default_str();
    cmd->add_option("--group-col", audit.schema.group_column, "Group column")->capture_default_str();
    cmd->add_option("--label-col", audit.schema.label_column, "Ground-truth column")->capture_default_str();
    cmd->add_option("--pred-col", audit.schema.prediction_column, "Prediction column")->capture_default_str();
    cmd->add_option("--delimiter", audit.schema.delimiter, "Field delimiter")->capture_default_str();
    cmd->add_option("--label-scale", audit.label_scale, "Label scale MIN:MAX (default 0:1)");
    cmd->add_option("--pred-scale", audit.pred_scale, "Raw prediction scale MIN:MAX");
    cmd->add_option("--alpha", audit.alpha, "Significance level")->capture_default_str();
    cmd->add_option("--tests", audit.tests, "Tests: mwu,ks,kw,permutation")->delimiter(',');
    cmd->add_option("--adjust", audit.adjust, "Multiple-comparison adjustment")
        ->check(CLI::IsMember({"bh", "bonferroni", "none"}))
        ->capture_default_str();
    cmd->add_option("--permutations", audit.permutations, "Permutation count")->capture_default_str();
    cmd->add_option("--seed", audit.seed, "Permutation seed")->capture_default_str();
    cmd->add_flag("--continuity", audit.continuity, "MWU continuity correction");
    cmd->add_option("--workers", audit.workers, "Permutation worker threads")->capture_default_str();
    cmd->add_option("--output", audit.output, "JSON report path");
    cmd->add_option("--heatmap", audit.heatmap, "Heatmap path (errors go to <stem>_errors<ext>)");
    cmd->add_option("--heatmap-format", audit.heatmap_format, "svg or csv")
        ->check(CLI::IsMember({"svg", "csv"}))
        ->capture_default_str();

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        fmt::print(err, "usage error: {}\n\n", e.what());
        err << app.help("", CLI::AppFormatMode::All);
        return kExitUsageError;
    }

    return run_audit_command(audit, out, err);
}

}  // namespace fairaudit
