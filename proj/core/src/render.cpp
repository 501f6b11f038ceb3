#include "qnap/render.hpp"

#include "qnap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace qnap
{
    std::string format_number(double value)
    {
        if (std::isnan(value))
            return "nan";
        if (std::isinf(value))
            return value > 0 ? "inf" : "-inf";
        if (value == 0.0)
            return "0"; // folds -0
        return fmt::format("{:.12g}", value);
    }

    namespace
    {
        std::string csv_field(const std::string &text)
        {
            if (text.find_first_of(",\"\n") == std::string::npos)
                return text;
            std::string out = "\"";
            for (char c : text)
            {
                if (c == '"')
                    out += '"';
                out += c;
            }
            return out + "\"";
        }

        std::string fixed(double value, int decimals)
        {
            std::string s = fmt::format("{:.{}f}", value, decimals);
            // "-0.00" reads badly in a table
            if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-')
                s.erase(0, 1);
            return s;
        }

        std::string xml_escape(const std::string &text)
        {
            std::string out;
            for (char c : text)
            {
                switch (c)
                {
                case '&':
                    out += "&amp;";
                    break;
                case '<':
                    out += "&lt;";
                    break;
                case '>':
                    out += "&gt;";
                    break;
                case '"':
                    out += "&quot;";
                    break;
                default:
                    out += c;
                }
            }
            return out;
        }
    } // namespace

    std::string render_csv(const std::vector<EstimateRow> &rows)
    {
        std::string out = kCsvHeader;
        out += '\n';
        for (const EstimateRow &r : rows)
        {
            out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", csv_field(r.experiment), csv_field(r.sweep_param),
                               csv_field(r.sweep_value), csv_field(r.station), csv_field(r.job_class),
                               to_string(r.metric), format_number(r.ci.mean), format_number(r.ci.half_width), r.ci.n,
                               r.base_seed);
        }
        return out;
    }

    std::string render_estimates_table(const std::vector<EstimateRow> &rows)
    {
        const bool swept = std::any_of(rows.begin(), rows.end(), [](const auto &r) { return !r.sweep_param.empty(); });
        std::vector<std::vector<std::string>> cells;
        std::vector<std::string> header;
        if (swept)
            header.push_back(rows.front().sweep_param);
        for (const char *h : {"station", "class", "metric", "mean", "99% CI +/-", "n"})
            header.emplace_back(h);
        cells.push_back(header);
        for (const EstimateRow &r : rows)
        {
            std::vector<std::string> line;
            if (swept)
                line.push_back(r.sweep_value);
            line.push_back(r.station);
            line.push_back(r.job_class);
            line.push_back(to_string(r.metric));
            line.push_back(fmt::format("{:.6g}", r.ci.mean));
            line.push_back(fmt::format("{:.3g}", r.ci.half_width));
            line.push_back(std::to_string(r.ci.n));
            cells.push_back(std::move(line));
        }
        std::vector<std::size_t> width(header.size(), 0);
        for (const auto &line : cells)
            for (std::size_t i = 0; i < line.size(); ++i)
                width[i] = std::max(width[i], line[i].size());
        std::string out;
        for (std::size_t k = 0; k < cells.size(); ++k)
        {
            std::string text;
            for (std::size_t i = 0; i < cells[k].size(); ++i)
            {
                if (i)
                    text += "  ";
                text += fmt::format("{:<{}}", cells[k][i], width[i]);
            }
            while (!text.empty() && text.back() == ' ')
                text.pop_back();
            out += text + '\n';
            if (k == 0)
            {
                std::size_t total = 0;
                for (std::size_t w : width)
                    total += w;
                out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
            }
        }
        return out;
    }

    RenderedTable render_validation_table(const std::vector<ValidationRow> &rows, const TableFormat &format)
    {
        const int pd = format.percent_decimals;
        RenderedTable t;
        t.text = "Job Class | EG [%] | QN [%] | Error [%] | EG [msec] | QN [msec] | Error [%]\n";
        t.csv = "class,eg_utilization_percent,qn_utilization_percent,qn_utilization_ci_half_width_99,"
                "utilization_error_pp,eg_response_time_msec,qn_response_time_msec,"
                "qn_response_time_ci_half_width_99,response_time_error_percent\n";
        for (const ValidationRow &r : rows)
        {
            t.text += fmt::format("{} | {} | {} (±{}) | {} | {} | {} (±{}) | {}\n", r.class_name,
                                  fixed(r.eg_utilization, pd), fixed(r.qn_utilization.mean, pd),
                                  fixed(r.qn_utilization.half_width, 2), fixed(r.utilization_error, pd),
                                  fixed(r.eg_response_time, 2), fixed(r.qn_response_time.mean, 2),
                                  fixed(r.qn_response_time.half_width, 2), fixed(r.response_time_error, 2));
            t.csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", csv_field(r.class_name), format_number(r.eg_utilization),
                                 format_number(r.qn_utilization.mean), format_number(r.qn_utilization.half_width),
                                 format_number(r.utilization_error), format_number(r.eg_response_time),
                                 format_number(r.qn_response_time.mean),
                                 format_number(r.qn_response_time.half_width),
                                 format_number(r.response_time_error));
        }
        return t;
    }

    namespace
    {
        constexpr double kWidth = 720.0;
        constexpr double kHeight = 480.0;
        constexpr double kLeft = 80.0;
        constexpr double kRight = 180.0;
        constexpr double kTop = 50.0;
        constexpr double kBottom = 60.0;
        constexpr const char *kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

        std::string px(double v) { return fmt::format("{:.2f}", v); }

        std::string tick_label(double v) { return fmt::format("{:.4g}", v); }

        /// Roughly five "nice" tick positions covering [lo, hi].
        std::vector<double> nice_ticks(double lo, double hi)
        {
            const double raw = (hi - lo) / 5.0;
            const double mag = std::pow(10.0, std::floor(std::log10(raw)));
            double step = mag;
            for (double m : {1.0, 2.0, 5.0, 10.0})
            {
                step = m * mag;
                if (step >= raw)
                    break;
            }
            std::vector<double> ticks;
            for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step)
                ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
            return ticks;
        }
    } // namespace

    std::string render_plot(const std::vector<PlotSeries> &series, const PlotSpec &spec)
    {
        if (series.empty())
            throw ConfigError(fmt::format("plot '{}': no series", spec.title));
        const std::size_t n = series.front().x.size();
        for (const PlotSeries &s : series)
        {
            if (s.x.empty())
                throw ConfigError(fmt::format("plot '{}': series '{}' is empty", spec.title, s.label));
            if (s.y.size() != s.x.size() || s.half_width.size() != s.x.size())
                throw ConfigError(
                    fmt::format("plot '{}': series '{}' has mismatched array lengths", spec.title, s.label));
            if (s.x.size() != n)
                throw ConfigError(fmt::format("plot '{}': series have different lengths", spec.title));
            for (std::size_t i = 0; i < n; ++i)
            {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || !std::isfinite(s.half_width[i]))
                    throw ConfigError(fmt::format("plot '{}': series '{}' has a non-finite value", spec.title, s.label));
                if (spec.log_x && s.x[i] <= 0.0)
                    throw ConfigError(fmt::format("plot '{}': log x axis needs positive x values", spec.title));
            }
        }

        auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
        double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
        double y_lo = x_lo, y_hi = -x_lo;
        for (const PlotSeries &s : series)
            for (std::size_t i = 0; i < n; ++i)
            {
                x_lo = std::min(x_lo, tx(s.x[i]));
                x_hi = std::max(x_hi, tx(s.x[i]));
                y_lo = std::min(y_lo, s.y[i] - s.half_width[i]);
                y_hi = std::max(y_hi, s.y[i] + s.half_width[i]);
            }
        if (x_hi - x_lo <= 0.0)
        {
            x_lo -= 0.5;
            x_hi += 0.5;
        }
        if (y_hi - y_lo <= 0.0)
        {
            const double pad = std::max(std::abs(y_lo) * 0.1, 1e-9);
            y_lo -= pad;
            y_hi += pad;
        }
        const double x_pad = (x_hi - x_lo) * 0.04;
        const double y_pad = (y_hi - y_lo) * 0.08;
        x_lo -= x_pad;
        x_hi += x_pad;
        y_lo -= y_pad;
        y_hi += y_pad;

        const double plot_w = kWidth - kLeft - kRight;
        const double plot_h = kHeight - kTop - kBottom;
        auto sx = [&](double x) { return kLeft + (tx(x) - x_lo) / (x_hi - x_lo) * plot_w; };
        auto sy = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

        std::string out;
        out += fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
                           "font-family=\"sans-serif\" font-size=\"12\">\n",
                           kWidth, kHeight, kWidth, kHeight);
        out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
        out += fmt::format("<text x=\"{}\" y=\"25\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                           px(kLeft + plot_w / 2), xml_escape(spec.title));
        out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                           px(kLeft), px(kTop), px(plot_w), px(plot_h));

        // y ticks and grid
        for (double t : nice_ticks(y_lo, y_hi))
        {
            const double y = sy(t);
            out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\"/>\n", px(kLeft), px(y),
                               px(kLeft + plot_w), px(y));
            out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", px(kLeft - 6), px(y + 4),
                               tick_label(t));
        }
        // x ticks: decades on a log axis, nice steps otherwise
        std::vector<double> xticks;
        if (spec.log_x)
        {
            for (double e = std::ceil(x_lo); e <= std::floor(x_hi); e += 1.0)
                xticks.push_back(std::pow(10.0, e));
        }
        else
            xticks = nice_ticks(x_lo, x_hi);
        for (double t : xticks)
        {
            const double x = sx(t);
            out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\"/>\n", px(x), px(kTop),
                               px(x), px(kTop + plot_h));
            out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(x),
                               px(kTop + plot_h + 18), tick_label(t));
        }
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(kLeft + plot_w / 2),
                           px(kHeight - 15), xml_escape(spec.x_label + (spec.log_x ? " (log scale)" : "")));
        out += fmt::format("<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
                           px(kTop + plot_h / 2), px(kTop + plot_h / 2), xml_escape(spec.y_label));

        for (std::size_t k = 0; k < series.size(); ++k)
        {
            const PlotSeries &s = series[k];
            const char *color = kPalette[k % std::size(kPalette)];
            std::vector<std::size_t> order(n);
            for (std::size_t i = 0; i < n; ++i)
                order[i] = i;
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s.x[a] < s.x[b]; });

            std::string points;
            for (std::size_t i : order)
                points += fmt::format("{}{},{}", points.empty() ? "" : " ", px(sx(s.x[i])), px(sy(s.y[i])));
            out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", points,
                               color);
            for (std::size_t i : order)
            {
                const double x = sx(s.x[i]);
                const double lo = sy(s.y[i] - s.half_width[i]);
                const double hi = sy(s.y[i] + s.half_width[i]);
                out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\"/>\n", px(x), px(lo),
                                   px(x), px(hi), color);
                out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\"/>\n", px(x - 4),
                                   px(lo), px(x + 4), px(lo), color);
                out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\"/>\n", px(x - 4),
                                   px(hi), px(x + 4), px(hi), color);
                out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n", px(x), px(sy(s.y[i])),
                                   color);
            }
            if (spec.annotate_min)
            {
                // first minimum in x order
                std::size_t best = order.front();
                for (std::size_t i : order)
                    if (s.y[i] < s.y[best])
                        best = i;
                const double x = sx(s.x[best]);
                const double y = sy(s.y[best]);
                out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"7\" fill=\"none\" stroke=\"black\"/>\n", px(x),
                                   px(y));
                out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">min {} at {}</text>\n", px(x),
                                   px(y + 22), tick_label(s.y[best]), tick_label(s.x[best]));
            }
            const double ly = kTop + 10 + 20.0 * static_cast<double>(k);
            const double lx = kLeft + plot_w + 15;
            out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                               px(lx), px(ly), px(lx + 20), px(ly), color);
            out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", px(lx + 26), px(ly + 4), xml_escape(s.label));
        }
        out += "</svg>\n";
        return out;
    }
} // namespace qnap
