#pragma once

#include <iosfwd>
#include <string>

#include "pexp/panel.hpp"

namespace pexp {

// Long-format panel CSV with header region,period,outcome,treatment,exposure[,cluster].
// The treatment column may be omitted entirely. One row per (region, period);
// the panel must come out balanced. Parsing is locale-independent and errors
// carry 1-based line numbers.
Panel read_panel_csv(const std::string& path);
Panel read_panel_csv_stream(std::istream& in, const std::string& origin);

// Price CSV with header period,sector,price (raw positive price levels).
// Returns a PriceSystem holding centered log prices; the focal sector is
// selected afterwards by name or index.
struct RawPriceTable {
    std::vector<std::string> sector_labels;
    std::vector<std::string> period_labels;
    Matrix levels;  // S x T, raw price levels
};
RawPriceTable read_prices_csv(const std::string& path);
RawPriceTable read_prices_csv_stream(std::istream& in, const std::string& origin);

// Centers logs and checks that every panel period has a price row.
PriceSystem make_price_system(const RawPriceTable& raw, const Panel& panel,
                              const std::string& focal_sector_name);

void write_panel_csv(const Panel& panel, const std::string& path);
void write_prices_csv(const PriceSystem& prices, const std::vector<std::string>& sector_labels,
                      const std::string& path);

// Ordering used for periods and regions: digit runs compare numerically,
// everything else lexicographically ("p2" < "p10").
bool natural_less(const std::string& a, const std::string& b);

}  // namespace pexp
