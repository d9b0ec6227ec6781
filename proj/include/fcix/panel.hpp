#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fcix/errors.hpp"
#include "fcix/io.hpp"

namespace fcix::panel {

/// Dense panel of adjusted closing prices: `prices(t, i)` is the price of
/// `tickers[i]` on `dates[t]`. Complete and strictly positive by
/// construction; dates are opaque ordered labels (ISO-8601 strings sort
/// chronologically).
struct PricePanel {
  std::vector<std::string> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd prices;  // T_raw x N

  int days() const { return static_cast<int>(dates.size()); }
  int assets() const { return static_cast<int>(tickers.size()); }
};

/// Panel of lag-l gross returns: returns(t, i) = prices(t+l, i) / prices(t, i).
/// Row t is labeled with the date of the later price.
struct ReturnsPanel {
  int lag = 1;
  std::vector<std::string> dates;  // length T_raw - lag
  Eigen::MatrixXd returns;         // (T_raw - lag) x N

  int steps() const { return static_cast<int>(dates.size()); }
  int assets() const { return static_cast<int>(returns.cols()); }
};

struct LoadOptions {
  char delimiter = ',';
  /// Drop tickers with missing dates instead of rejecting the panel.
  bool drop_incomplete = false;
};

namespace detail {

inline void check_positive_price(double price, const std::string& where) {
  if (!(price > 0.0) || !std::isfinite(price))
    throw NonPositivePrice("non-positive price " + io::format_double(price) +
                           " at " + where);
}

}  // namespace detail

/// Reads long-format rows (date, ticker, price) with a header row and pivots
/// them into a dense panel. Tickers are sorted; dates sorted ascending.
inline PricePanel load_prices(std::istream& in, const LoadOptions& opts = {}) {
  std::string line;
  if (!std::getline(in, line)) throw EmptyPanel("empty price stream");
  const auto header = io::split(line, opts.delimiter);
  int date_col = -1, ticker_col = -1, price_col = -1;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    if (header[i] == "date") date_col = i;
    if (header[i] == "ticker") ticker_col = i;
    if (header[i] == "price") price_col = i;
  }
  if (date_col < 0 || ticker_col < 0 || price_col < 0)
    throw ParseError("header must name date, ticker and price columns");

  std::map<std::pair<std::string, std::string>, double> cells;
  std::set<std::string> dates, tickers;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::trim(line).empty()) continue;
    const auto fields = io::split(line, opts.delimiter);
    if (static_cast<int>(fields.size()) <= std::max({date_col, ticker_col, price_col}))
      throw ParseError("short row at line " + std::to_string(line_no));
    const std::string& date = fields[date_col];
    const std::string& ticker = fields[ticker_col];
    const double price =
        io::parse_double(fields[price_col], "line " + std::to_string(line_no));
    detail::check_positive_price(price, date + "/" + ticker);
    const auto [it, inserted] = cells.emplace(std::make_pair(date, ticker), price);
    if (!inserted)
      throw ParseError("duplicate row for " + date + "/" + ticker);
    dates.insert(date);
    tickers.insert(ticker);
  }
  if (cells.empty()) throw EmptyPanel("no data rows");

  std::vector<std::string> kept;
  for (const auto& tk : tickers) {
    bool complete = true;
    for (const auto& dt : dates)
      if (!cells.count({dt, tk})) {
        complete = false;
        break;
      }
    if (complete) {
      kept.push_back(tk);
    } else if (!opts.drop_incomplete) {
      throw IncompletePanel("ticker " + tk +
                            " has missing dates (set drop-incomplete to drop)");
    }
  }
  if (kept.empty()) throw EmptyPanel("no complete tickers");

  PricePanel panel;
  panel.dates.assign(dates.begin(), dates.end());
  panel.tickers = std::move(kept);
  panel.prices.resize(panel.days(), panel.assets());
  for (int t = 0; t < panel.days(); ++t)
    for (int i = 0; i < panel.assets(); ++i)
      panel.prices(t, i) = cells.at({panel.dates[t], panel.tickers[i]});
  return panel;
}

inline PricePanel load_prices_file(const std::string& path,
                                   const LoadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open price file: " + path);
  return load_prices(in, opts);
}

/// Convenience reader for a wide layout: header `date,TICKER1,TICKER2,...`,
/// one row per date.
inline PricePanel load_prices_wide(std::istream& in, const LoadOptions& opts = {}) {
  std::string line;
  if (!std::getline(in, line)) throw EmptyPanel("empty price stream");
  const auto header = io::split(line, opts.delimiter);
  if (header.size() < 2 || header[0] != "date")
    throw ParseError("wide header must start with date");
  PricePanel panel;
  panel.tickers.assign(header.begin() + 1, header.end());
  {
    std::set<std::string> uniq(panel.tickers.begin(), panel.tickers.end());
    if (uniq.size() != panel.tickers.size())
      throw ParseError("duplicate ticker in header");
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    const auto fields = io::split(line, opts.delimiter);
    if (fields.size() != header.size())
      throw IncompletePanel("row width mismatch at date " +
                            (fields.empty() ? std::string("?") : fields[0]));
    panel.dates.push_back(fields[0]);
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const double p = io::parse_double(fields[i], "date " + fields[0]);
      detail::check_positive_price(p, fields[0] + "/" + panel.tickers[i - 1]);
      row.push_back(p);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyPanel("no data rows");
  if (!std::is_sorted(panel.dates.begin(), panel.dates.end()))
    throw ParseError("dates must be strictly increasing");
  for (std::size_t t = 1; t < panel.dates.size(); ++t)
    if (panel.dates[t] == panel.dates[t - 1])
      throw ParseError("duplicate date " + panel.dates[t]);
  panel.prices.resize(panel.days(), panel.assets());
  for (int t = 0; t < panel.days(); ++t)
    for (int i = 0; i < panel.assets(); ++i) panel.prices(t, i) = rows[t][i];
  return panel;
}

/// Lag-l gross return panel: returns(t, i) = prices(t+l, i) / prices(t, i).
inline ReturnsPanel lag_returns(const PricePanel& panel, int lag) {
  if (lag < 1) throw InvalidParameter("lag must be >= 1");
  if (lag >= panel.days())
    throw LagTooLarge("lag " + std::to_string(lag) + " >= panel length " +
                      std::to_string(panel.days()));
  ReturnsPanel out;
  out.lag = lag;
  const int steps = panel.days() - lag;
  out.dates.assign(panel.dates.begin() + lag, panel.dates.end());
  out.returns.resize(steps, panel.assets());
  for (int t = 0; t < steps; ++t)
    for (int i = 0; i < panel.assets(); ++i)
      out.returns(t, i) = panel.prices(t + lag, i) / panel.prices(t, i);
  return out;
}

}  // namespace fcix::panel
