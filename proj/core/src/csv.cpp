#include "betamrf/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace betamrf {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& path, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                             ": malformed number '" + s + "'");
  }
}

// Generic reader for numeric tables with a fixed header.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_numeric_table(const std::string& path, std::size_t expect_cols) {
  std::ifstream in = open_in(path);
  Table table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      table.header = split_csv(line);
      if (expect_cols != 0 && table.header.size() != expect_cols) {
        throw std::runtime_error(path + ": expected " + std::to_string(expect_cols) +
                                 " columns, got " + std::to_string(table.header.size()));
      }
      continue;
    }
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != table.header.size()) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": wrong field count");
    }
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      row[i] = parse_double(fields[i], path, line_no);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw std::runtime_error(path + ": empty file");
  return table;
}

}  // namespace

std::string format_sig(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return buf;
}

void write_panel_csv(const std::string& path, const PitPanel& panel) {
  std::ofstream out = open_out(path);
  out << "date";
  for (int j = 1; j <= panel.cols(); ++j) out << ",tenor_" << j;
  out << "\n";
  for (int t = 0; t < panel.rows(); ++t) {
    out << panel.dates()[t];
    for (int j = 0; j < panel.cols(); ++j) out << ',' << format_sig(panel.at(t, j), 12);
    out << "\n";
  }
}

PitPanel read_panel_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  int line_no = 0;
  int cols = -1;
  std::vector<std::string> dates;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (line_no == 1) {
      if (fields.size() < 2 || fields[0] != "date") {
        throw std::runtime_error(path + ": bad panel header");
      }
      cols = static_cast<int>(fields.size()) - 1;
      continue;
    }
    if (static_cast<int>(fields.size()) != cols + 1) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": wrong field count");
    }
    dates.push_back(fields[0]);
    for (int j = 1; j <= cols; ++j) values.push_back(parse_double(fields[j], path, line_no));
  }
  if (cols < 1 || dates.empty()) throw std::runtime_error(path + ": empty panel");
  return PitPanel(std::move(dates), cols, std::move(values));
}

void write_draws_csv(const std::string& path, const ChainOutput& chain) {
  std::ofstream out = open_out(path);
  for (int k = 0; k < chain.dim; ++k) out << (k ? "," : "") << chain.names[k];
  out << "\n";
  for (int it = 0; it < chain.n_iter; ++it) {
    for (int k = 0; k < chain.dim; ++k) {
      out << (k ? "," : "") << format_sig(chain.at(it, k), 17);
    }
    out << "\n";
  }
}

ChainOutput read_draws_csv(const std::string& path, const ThetaLayout& layout) {
  const Table table = read_numeric_table(path, 0);
  const std::vector<std::string> expected = layout.names();
  if (table.header != expected) {
    throw std::runtime_error(path + ": draw columns do not match the configured layout");
  }
  ChainOutput chain;
  chain.layout = layout;
  chain.names = expected;
  chain.dim = layout.dim();
  chain.n_iter = static_cast<int>(table.rows.size());
  chain.draws.reserve(static_cast<std::size_t>(chain.n_iter) * chain.dim);
  for (const auto& row : table.rows) chain.draws.insert(chain.draws.end(), row.begin(), row.end());
  chain.accept_rate_inner.assign(layout.sites(), 0.0);
  chain.geweke_z.assign(layout.dim(), 0.0);
  return chain;
}

std::vector<SmileQuote> read_smile_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  int line_no = 0;
  // Quote points grouped by (date, tenor) in first-appearance order.
  std::vector<SmileQuote> quotes;
  auto find_quote = [&quotes](const std::string& date, double tenor) -> SmileQuote* {
    for (auto& q : quotes) {
      if (q.date == date && q.tenor == tenor) return &q;
    }
    return nullptr;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (line_no == 1) {
      if (fields != std::vector<std::string>{"date", "tenor_years", "spot", "forward", "rate",
                                             "delta", "sigma"}) {
        throw std::runtime_error(path + ": bad smile header");
      }
      continue;
    }
    if (fields.size() != 7) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": wrong field count");
    }
    const std::string& date = fields[0];
    const double tenor = parse_double(fields[1], path, line_no);
    const double spot = parse_double(fields[2], path, line_no);
    const double forward = parse_double(fields[3], path, line_no);
    const double rate = parse_double(fields[4], path, line_no);
    const double delta = parse_double(fields[5], path, line_no);
    const double sigma = parse_double(fields[6], path, line_no);
    if (!(sigma > 0.0)) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": non-positive volatility");
    }
    if (!(delta > 0.0) || !(delta < 1.0)) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": delta outside (0,1)");
    }
    SmileQuote* q = find_quote(date, tenor);
    if (q == nullptr) {
      quotes.push_back(SmileQuote{date, tenor, spot, forward, rate, {}});
      q = &quotes.back();
    } else if (q->spot != spot || q->forward != forward || q->rate != rate) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": inconsistent spot/forward/rate within a slice");
    }
    q->points.push_back(SmilePoint{delta, sigma});
  }
  if (quotes.empty()) throw std::runtime_error(path + ": no smile rows");
  return quotes;
}

void write_smile_csv(const std::string& path, const std::vector<SmileQuote>& quotes) {
  std::ofstream out = open_out(path);
  out << "date,tenor_years,spot,forward,rate,delta,sigma\n";
  for (const auto& q : quotes) {
    for (const auto& pt : q.points) {
      out << q.date << ',' << format_sig(q.tenor, 12) << ',' << format_sig(q.spot, 12) << ','
          << format_sig(q.forward, 12) << ',' << format_sig(q.rate, 12) << ','
          << format_sig(pt.delta, 12) << ',' << format_sig(pt.sigma, 12) << "\n";
    }
  }
}

std::map<std::string, std::map<double, double>> read_realized_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  int line_no = 0;
  std::map<std::string, std::map<double, double>> realized;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (line_no == 1) {
      if (fields != std::vector<std::string>{"date", "tenor_years", "level"}) {
        throw std::runtime_error(path + ": bad realized-levels header");
      }
      continue;
    }
    if (fields.size() != 3) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": wrong field count");
    }
    realized[fields[0]][parse_double(fields[1], path, line_no)] =
        parse_double(fields[2], path, line_no);
  }
  if (realized.empty()) throw std::runtime_error(path + ": no realized rows");
  return realized;
}

void write_realized_csv(const std::string& path,
                        const std::map<std::string, std::map<double, double>>& realized) {
  std::ofstream out = open_out(path);
  out << "date,tenor_years,level\n";
  for (const auto& [date, by_tenor] : realized) {
    for (const auto& [tenor, level] : by_tenor) {
      out << date << ',' << format_sig(tenor, 12) << ',' << format_sig(level, 12) << "\n";
    }
  }
}

void write_curve_csv(const std::string& path, const RndCurve& curve) {
  std::ofstream out = open_out(path);
  out << "strike,pdf,cdf\n";
  const auto& ks = curve.strikes();
  const auto& pdf = curve.pdf_values();
  const auto& cdf = curve.cdf_values();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    out << format_sig(ks[i], 12) << ',' << format_sig(pdf[i], 12) << ',' << format_sig(cdf[i], 12)
        << "\n";
  }
}

RndCurve read_curve_csv(const std::string& path) {
  const Table table = read_numeric_table(path, 3);
  if (table.header != std::vector<std::string>{"strike", "pdf", "cdf"}) {
    throw std::runtime_error(path + ": bad curve header");
  }
  std::vector<double> strikes, pdf, cdf;
  for (const auto& row : table.rows) {
    strikes.push_back(row[0]);
    pdf.push_back(row[1]);
    cdf.push_back(row[2]);
  }
  return RndCurve::numeric(std::move(strikes), std::move(pdf), std::move(cdf));
}

void write_calibrated_csv(const std::string& path, const CalibratedCurve& curve) {
  std::ofstream out = open_out(path);
  out << "strike,pdf_mean,pdf_lo,pdf_hi,cdf_mean\n";
  for (std::size_t i = 0; i < curve.strikes.size(); ++i) {
    out << format_sig(curve.strikes[i], 12) << ',' << format_sig(curve.pdf_mean[i], 12) << ','
        << format_sig(curve.pdf_lo[i], 12) << ',' << format_sig(curve.pdf_hi[i], 12) << ','
        << format_sig(curve.cdf_mean[i], 12) << "\n";
  }
}

CalibratedCurve read_calibrated_csv(const std::string& path) {
  const Table table = read_numeric_table(path, 5);
  if (table.header !=
      std::vector<std::string>{"strike", "pdf_mean", "pdf_lo", "pdf_hi", "cdf_mean"}) {
    throw std::runtime_error(path + ": bad calibrated-curve header");
  }
  CalibratedCurve curve;
  for (const auto& row : table.rows) {
    curve.strikes.push_back(row[0]);
    curve.pdf_mean.push_back(row[1]);
    curve.pdf_lo.push_back(row[2]);
    curve.pdf_hi.push_back(row[3]);
    curve.cdf_mean.push_back(row[4]);
  }
  return curve;
}

void write_ecdf_csv(const std::string& path, const PitEcdf& ecdf) {
  std::ofstream out = open_out(path);
  out << "u,ecdf_uncal,ecdf_cal\n";
  for (std::size_t i = 0; i < ecdf.u.size(); ++i) {
    out << format_sig(ecdf.u[i], 12) << ',' << format_sig(ecdf.ecdf_uncal[i], 12) << ','
        << format_sig(ecdf.ecdf_cal[i], 12) << "\n";
  }
}

PitEcdf read_ecdf_csv(const std::string& path) {
  const Table table = read_numeric_table(path, 3);
  if (table.header != std::vector<std::string>{"u", "ecdf_uncal", "ecdf_cal"}) {
    throw std::runtime_error(path + ": bad ecdf header");
  }
  PitEcdf ecdf;
  for (const auto& row : table.rows) {
    ecdf.u.push_back(row[0]);
    ecdf.ecdf_uncal.push_back(row[1]);
    ecdf.ecdf_cal.push_back(row[2]);
  }
  return ecdf;
}

}  // namespace betamrf
