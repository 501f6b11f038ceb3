#pragma once

#include "qnap/metrics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qnap
{
    /// One CSV row: an estimate for one (sweep point, station, class, metric).
    struct EstimateRow
    {
        std::string experiment;
        std::string sweep_param;
        std::string sweep_value;
        std::string station;
        std::string job_class;
        Metric metric = Metric::Utilization;
        ConfidenceInterval ci;
        std::uint64_t base_seed = 0;
    };

    inline constexpr const char *kCsvHeader =
        "experiment,sweep_param,sweep_value,station,class,metric,mean,ci_half_width_99,n,base_seed";

    /// Shortest round-trip-safe-enough text for a double ("%.12g").
    std::string format_number(double value);

    std::string render_csv(const std::vector<EstimateRow> &rows);
    std::string render_estimates_table(const std::vector<EstimateRow> &rows);

    struct TableFormat
    {
        int percent_decimals = 1; // EG [%], QN [%] mean and the utilization error
    };

    struct RenderedTable
    {
        std::string text;
        std::string csv;
    };

    /// Columns: Job Class | EG [%] | QN [%] | Error [%] | EG [msec] | QN [msec] | Error [%]
    /// QN cells read "mean (±half-width)".
    RenderedTable render_validation_table(const std::vector<ValidationRow> &rows, const TableFormat &format = {});

    struct PlotSeries
    {
        std::string label;
        std::vector<double> x;
        std::vector<double> y;
        std::vector<double> half_width;
    };

    struct PlotSpec
    {
        std::string title;
        std::string x_label;
        std::string y_label;
        bool log_x = false;
        bool annotate_min = false; // mark and label each series' minimum
    };

    /// Deterministic SVG: markers at (x, mean) with symmetric error bars of
    /// the CI half-width. Throws ConfigError when a series is empty, when its
    /// arrays differ in length, or when series differ in length.
    std::string render_plot(const std::vector<PlotSeries> &series, const PlotSpec &spec);
} // namespace qnap
