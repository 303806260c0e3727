#include "pexp/panel_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace pexp {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    for (auto& f : fields) {
        std::size_t a = f.find_first_not_of(" \t");
        std::size_t b = f.find_last_not_of(" \t");
        f = (a == std::string::npos) ? std::string() : f.substr(a, b - a + 1);
    }
    return fields;
}

double parse_double(const std::string& field, const std::string& origin, std::size_t line_no,
                    const std::string& column) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || field.empty())
        throw input_error(origin + ":" + std::to_string(line_no) + ": cannot parse " + column +
                          " value '" + field + "'");
    if (!std::isfinite(value))
        throw input_error(origin + ":" + std::to_string(line_no) + ": non-finite " + column);
    return value;
}

long parse_long(const std::string& field, const std::string& origin, std::size_t line_no,
                const std::string& column) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw input_error(origin + ":" + std::to_string(line_no) + ": cannot parse " + column +
                          " value '" + field + "'");
    return value;
}

}  // namespace

bool natural_less(const std::string& a, const std::string& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        bool da = std::isdigit(static_cast<unsigned char>(a[i]));
        bool db = std::isdigit(static_cast<unsigned char>(b[j]));
        if (da && db) {
            std::size_t i0 = i, j0 = j;
            while (i < a.size() && std::isdigit(static_cast<unsigned char>(a[i]))) ++i;
            while (j < b.size() && std::isdigit(static_cast<unsigned char>(b[j]))) ++j;
            // strip leading zeros, compare by length then digits
            std::string na = a.substr(i0, i - i0), nb = b.substr(j0, j - j0);
            na.erase(0, std::min(na.find_first_not_of('0'), na.size() - 1));
            nb.erase(0, std::min(nb.find_first_not_of('0'), nb.size() - 1));
            if (na.size() != nb.size()) return na.size() < nb.size();
            if (na != nb) return na < nb;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

Panel read_panel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open panel file '" + path + "'");
    return read_panel_csv_stream(in, path);
}

Panel read_panel_csv_stream(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) throw input_error(origin + ": empty file");
    auto header = split_csv_line(line);
    bool has_treatment = false, has_cluster = false;
    if (header.size() >= 3 && header[0] == "region" && header[1] == "period" &&
        header[2] == "outcome") {
        std::size_t k = 3;
        if (k < header.size() && header[k] == "treatment") {
            has_treatment = true;
            ++k;
        }
        if (k < header.size() && header[k] == "exposure") {
            ++k;
        } else {
            throw input_error(origin + ":1: expected 'exposure' column in header");
        }
        if (k < header.size() && header[k] == "cluster") {
            has_cluster = true;
            ++k;
        }
        if (k != header.size())
            throw input_error(origin + ":1: unexpected extra column '" + header[k] + "'");
    } else {
        throw input_error(origin +
                          ":1: header must be region,period,outcome[,treatment],exposure[,cluster]");
    }

    struct Row {
        double outcome, treatment, exposure;
        long cluster;
        std::size_t line_no;
    };
    std::map<std::string, std::map<std::string, Row, bool (*)(const std::string&, const std::string&)>,
             bool (*)(const std::string&, const std::string&)>
        cells(natural_less);
    std::vector<std::string> period_order;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        std::size_t expect = 3 + (has_treatment ? 1 : 0) + 1 + (has_cluster ? 1 : 0);
        if (f.size() != expect)
            throw input_error(origin + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(expect) + " fields, got " + std::to_string(f.size()));
        Row row{};
        row.line_no = line_no;
        std::size_t k = 2;
        row.outcome = parse_double(f[k++], origin, line_no, "outcome");
        row.treatment = has_treatment ? parse_double(f[k++], origin, line_no, "treatment") : 0.0;
        row.exposure = parse_double(f[k++], origin, line_no, "exposure");
        row.cluster = has_cluster ? parse_long(f[k++], origin, line_no, "cluster") : 0;

        auto& region_cells =
            cells.emplace(f[0], std::map<std::string, Row, bool (*)(const std::string&, const std::string&)>(
                                    natural_less))
                .first->second;
        if (!region_cells.emplace(f[1], row).second)
            throw input_error(origin + ":" + std::to_string(line_no) + ": duplicate cell (" + f[0] +
                              ", " + f[1] + ")");
        if (std::find(period_order.begin(), period_order.end(), f[1]) == period_order.end())
            period_order.push_back(f[1]);
    }
    if (cells.empty()) throw input_error(origin + ": no data rows");

    std::sort(period_order.begin(), period_order.end(), natural_less);

    Panel panel;
    panel.n_regions = cells.size();
    panel.n_periods = period_order.size();
    panel.period_labels = period_order;
    panel.outcome = Matrix(panel.n_regions, panel.n_periods);
    if (has_treatment) panel.treatment = Matrix(panel.n_regions, panel.n_periods);
    panel.exposure.resize(panel.n_regions);
    if (has_cluster) panel.cluster_id = std::vector<int>(panel.n_regions);

    std::size_t i = 0;
    for (const auto& [region, region_cells] : cells) {
        panel.region_labels.push_back(region);
        if (region_cells.size() != period_order.size()) {
            for (const auto& p : period_order)
                if (!region_cells.count(p))
                    throw input_error(origin + ": unbalanced panel: region '" + region +
                                      "' is missing period '" + p + "'");
        }
        bool first = true;
        for (std::size_t t = 0; t < period_order.size(); ++t) {
            const Row& row = region_cells.at(period_order[t]);
            panel.outcome(i, t) = row.outcome;
            if (has_treatment) (*panel.treatment)(i, t) = row.treatment;
            if (first) {
                panel.exposure[i] = row.exposure;
                if (has_cluster) (*panel.cluster_id)[i] = static_cast<int>(row.cluster);
                first = false;
            } else {
                if (row.exposure != panel.exposure[i])
                    throw input_error(origin + ":" + std::to_string(row.line_no) +
                                      ": exposure varies within region '" + region +
                                      "' (exposures are time-invariant)");
                if (has_cluster && static_cast<int>(row.cluster) != (*panel.cluster_id)[i])
                    throw input_error(origin + ":" + std::to_string(row.line_no) +
                                      ": cluster varies within region '" + region + "'");
            }
        }
        ++i;
    }
    panel.validate();
    return panel;
}

RawPriceTable read_prices_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open prices file '" + path + "'");
    return read_prices_csv_stream(in, path);
}

RawPriceTable read_prices_csv_stream(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) throw input_error(origin + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() != 3 || header[0] != "period" || header[1] != "sector" ||
        header[2] != "price")
        throw input_error(origin + ":1: header must be period,sector,price");

    std::map<std::string, std::map<std::string, double, bool (*)(const std::string&, const std::string&)>>
        by_sector;
    std::vector<std::string> sector_order, period_order;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        if (f.size() != 3)
            throw input_error(origin + ":" + std::to_string(line_no) + ": expected 3 fields");
        double price = parse_double(f[2], origin, line_no, "price");
        auto& col = by_sector
                        .emplace(f[1], std::map<std::string, double,
                                                bool (*)(const std::string&, const std::string&)>(
                                           natural_less))
                        .first->second;
        if (!col.emplace(f[0], price).second)
            throw input_error(origin + ":" + std::to_string(line_no) + ": duplicate price for (" +
                              f[0] + ", " + f[1] + ")");
        if (std::find(sector_order.begin(), sector_order.end(), f[1]) == sector_order.end())
            sector_order.push_back(f[1]);
        if (std::find(period_order.begin(), period_order.end(), f[0]) == period_order.end())
            period_order.push_back(f[0]);
    }
    if (by_sector.empty()) throw input_error(origin + ": no data rows");
    std::sort(period_order.begin(), period_order.end(), natural_less);

    RawPriceTable table;
    table.sector_labels = sector_order;
    table.period_labels = period_order;
    table.levels = Matrix(sector_order.size(), period_order.size());
    for (std::size_t s = 0; s < sector_order.size(); ++s) {
        const auto& col = by_sector.at(sector_order[s]);
        for (std::size_t t = 0; t < period_order.size(); ++t) {
            auto it = col.find(period_order[t]);
            if (it == col.end())
                throw input_error(origin + ": sector '" + sector_order[s] +
                                  "' is missing period '" + period_order[t] + "'");
            table.levels(s, t) = it->second;
        }
    }
    return table;
}

PriceSystem make_price_system(const RawPriceTable& raw, const Panel& panel,
                              const std::string& focal_sector_name) {
    // Every panel period must have a price row.
    for (const auto& p : panel.period_labels) {
        if (std::find(raw.period_labels.begin(), raw.period_labels.end(), p) ==
            raw.period_labels.end())
            throw input_error("prices are missing period '" + p + "' present in the panel");
    }
    // Restrict to the panel's periods, in panel order.
    Matrix levels(raw.levels.rows(), panel.n_periods);
    for (std::size_t t = 0; t < panel.n_periods; ++t) {
        auto it = std::find(raw.period_labels.begin(), raw.period_labels.end(),
                            panel.period_labels[t]);
        std::size_t tc = static_cast<std::size_t>(it - raw.period_labels.begin());
        for (std::size_t s = 0; s < raw.levels.rows(); ++s) levels(s, t) = raw.levels(s, tc);
    }

    PriceSystem prices;
    prices.n_sectors = raw.levels.rows();
    prices.n_periods = panel.n_periods;
    if (focal_sector_name.empty()) {
        prices.focal_sector = 0;
    } else {
        auto it = std::find(raw.sector_labels.begin(), raw.sector_labels.end(), focal_sector_name);
        if (it == raw.sector_labels.end())
            throw input_error("focal sector '" + focal_sector_name + "' not found in prices");
        prices.focal_sector = static_cast<std::size_t>(it - raw.sector_labels.begin());
    }
    prices.log_prices = center_log_prices(levels);
    prices.validate();
    return prices;
}

void write_panel_csv(const Panel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write panel file '" + path + "'");
    out << "region,period,outcome";
    if (panel.treatment) out << ",treatment";
    out << ",exposure";
    if (panel.cluster_id) out << ",cluster";
    out << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < panel.n_regions; ++i) {
        for (std::size_t t = 0; t < panel.n_periods; ++t) {
            out << (panel.region_labels.empty() ? "r" + std::to_string(i + 1)
                                                : panel.region_labels[i])
                << ','
                << (panel.period_labels.empty() ? std::to_string(t + 1) : panel.period_labels[t])
                << ',' << panel.outcome(i, t);
            if (panel.treatment) out << ',' << (*panel.treatment)(i, t);
            out << ',' << panel.exposure[i];
            if (panel.cluster_id) out << ',' << (*panel.cluster_id)[i];
            out << "\n";
        }
    }
}

void write_prices_csv(const PriceSystem& prices, const std::vector<std::string>& sector_labels,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write prices file '" + path + "'");
    out << "period,sector,price\n";
    out.precision(17);
    // Emits exp(p_st) so a round trip through center_log_prices reproduces p_st.
    for (std::size_t s = 0; s < prices.n_sectors; ++s) {
        std::string label =
            s < sector_labels.size() ? sector_labels[s] : "s" + std::to_string(s + 1);
        for (std::size_t t = 0; t < prices.n_periods; ++t)
            out << (t + 1) << ',' << label << ',' << std::exp(prices.log_prices(s, t)) << "\n";
    }
}

}  // namespace pexp
