#include "cspc/trace_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "cspc/config.hpp"
#include "cspc/error.hpp"

namespace cspc {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, end);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw DomainError("trace table: bad number '" + std::string(s) + "'");
  return v;
}

int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw DomainError("trace table: bad integer '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::size_t provider_count(const SimTrace& trace) {
  return trace.records.empty() ? trace.config.wnps.size() : trace.records.front().prices.size();
}

}  // namespace

TraceFormat trace_format_from_string(std::string_view name) {
  if (name == "csv") return TraceFormat::Csv;
  if (name == "json") return TraceFormat::Json;
  throw ConfigError("format", "expected csv or json");
}

void write_trace_csv(const SimTrace& trace, std::ostream& out, TableLayout layout) {
  const std::size_t n = provider_count(trace);
  if (layout == TableLayout::Long) {
    out << "pcc,provider,price,cap,load,prb_total,condition,honest\n";
    for (const auto& r : trace.records)
      for (std::size_t j = 0; j < n; ++j)
        out << r.pcc << ',' << j + 1 << ',' << fmt(r.prices[j]) << ',' << fmt(r.caps[j]) << ',' << fmt(r.loads[j])
            << ',' << fmt(r.prb_totals[j]) << ',' << to_string(r.conditions[j]) << ',' << (r.honesty[j] ? 1 : 0)
            << '\n';
    return;
  }
  out << "pcc";
  for (const char* col : {"price", "cap", "load", "prb", "condition", "honest"})
    for (std::size_t j = 0; j < n; ++j) out << ',' << col << '_' << j + 1;
  out << ",sum_abs_error,mean_price,bai_count\n";
  for (const auto& r : trace.records) {
    out << r.pcc;
    for (double v : r.prices) out << ',' << fmt(v);
    for (double v : r.caps) out << ',' << fmt(v);
    for (double v : r.loads) out << ',' << fmt(v);
    for (double v : r.prb_totals) out << ',' << fmt(v);
    for (auto c : r.conditions) out << ',' << to_string(c);
    for (bool h : r.honesty) out << ',' << (h ? 1 : 0);
    out << ',' << fmt(r.sum_abs_error) << ',' << fmt(r.mean_price) << ',' << r.bai_count << '\n';
  }
}

std::vector<PccRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("trace table: missing header");
  const auto header = split(line);
  if (header.size() < 4 || header.front() != "pcc" || (header.size() - 4) % 6 != 0)
    throw DomainError("trace table: unexpected header");
  const std::size_t n = (header.size() - 4) / 6;

  std::vector<PccRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw DomainError("trace table: row " + std::to_string(records.size() + 1) + " has wrong column count");
    PccRecord r;
    r.pcc = parse_int(cells[0]);
    std::size_t k = 1;
    auto numbers = [&](std::vector<double>& dst) {
      dst.resize(n);
      for (std::size_t j = 0; j < n; ++j) dst[j] = parse_double(cells[k++]);
    };
    numbers(r.prices);
    numbers(r.caps);
    numbers(r.loads);
    numbers(r.prb_totals);
    r.conditions.resize(n);
    for (std::size_t j = 0; j < n; ++j) r.conditions[j] = condition_from_string(cells[k++]);
    r.honesty.resize(n);
    for (std::size_t j = 0; j < n; ++j) r.honesty[j] = parse_int(cells[k++]) != 0;
    r.sum_abs_error = parse_double(cells[k++]);
    r.mean_price = parse_double(cells[k++]);
    r.bai_count = parse_int(cells[k++]);
    records.push_back(std::move(r));
  }
  return records;
}

json records_to_json(const SimTrace& trace) {
  json arr = json::array();
  for (const auto& r : trace.records) {
    json conds = json::array();
    for (auto c : r.conditions) conds.push_back(std::string(to_string(c)));
    std::vector<int> honest;
    for (bool h : r.honesty) honest.push_back(h ? 1 : 0);
    arr.push_back({{"pcc", r.pcc},
                   {"prices", r.prices},
                   {"caps", r.caps},
                   {"loads", r.loads},
                   {"prb_totals", r.prb_totals},
                   {"conditions", conds},
                   {"honest", honest},
                   {"sum_abs_error", r.sum_abs_error},
                   {"mean_price", r.mean_price},
                   {"bai_count", r.bai_count}});
  }
  return {{"records", arr}};
}

std::vector<PccRecord> records_from_json(const json& doc) {
  std::vector<PccRecord> out;
  try {
    for (const auto& e : doc.at("records")) {
      PccRecord r;
      r.pcc = e.at("pcc").get<int>();
      r.prices = e.at("prices").get<std::vector<double>>();
      r.caps = e.at("caps").get<std::vector<double>>();
      r.loads = e.at("loads").get<std::vector<double>>();
      r.prb_totals = e.at("prb_totals").get<std::vector<double>>();
      for (const auto& c : e.at("conditions")) r.conditions.push_back(condition_from_string(c.get<std::string>()));
      for (const auto& h : e.at("honest")) r.honesty.push_back(h.get<int>() != 0);
      r.sum_abs_error = e.at("sum_abs_error").get<double>();
      r.mean_price = e.at("mean_price").get<double>();
      r.bai_count = e.at("bai_count").get<int>();
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("trace json: ") + e.what());
  }
  return out;
}

json run_summary(const SimTrace& trace) {
  json s;
  s["config"] = config_to_json(trace.config);
  s["seed"] = trace.seed;
  s["pccs"] = trace.records.size();
  s["fair_prices"] = fair_prices(trace.config.wnps);
  s["mean_fair_price"] = mean_fair_price(trace.config.wnps);
  s["wall_seconds"] = std::accumulate(trace.wall_seconds.begin(), trace.wall_seconds.end(), 0.0);
  if (!trace.records.empty()) {
    const auto& last = trace.records.back();
    s["final"] = {{"pcc", last.pcc},
                  {"prices", last.prices},
                  {"caps", last.caps},
                  {"loads", last.loads},
                  {"sum_abs_error", last.sum_abs_error},
                  {"mean_price", last.mean_price}};
    const std::size_t window = std::min<std::size_t>(30, trace.records.size());
    s["windowed_mean_price"] = {{"last", window}, {"value", windowed_mean_price(trace, window)}};
    std::map<std::string, int> counts;
    for (const auto& r : trace.records)
      for (auto c : r.conditions) ++counts[std::string(to_string(c))];
    s["condition_counts"] = counts;
  }
  return s;
}

std::vector<std::filesystem::path> export_trace(const SimTrace& trace, TraceFormat format,
                                                const std::filesystem::path& dir, bool long_layout) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create output directory: " + ec.message());

  std::vector<std::filesystem::path> written;
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(p.string(), "cannot open for writing");
    return f;
  };
  auto close = [&](std::ofstream& f, const std::filesystem::path& p) {
    f.close();
    if (!f) throw IoError(p.string(), "write failed");
    written.push_back(p);
  };

  if (format == TraceFormat::Csv) {
    const auto p = dir / "trace.csv";
    auto f = open(p);
    write_trace_csv(trace, f, TableLayout::Wide);
    close(f, p);
  } else {
    const auto p = dir / "trace.json";
    auto f = open(p);
    f << records_to_json(trace).dump(1) << '\n';
    close(f, p);
  }
  if (long_layout) {
    const auto p = dir / "trace_long.csv";
    auto f = open(p);
    write_trace_csv(trace, f, TableLayout::Long);
    close(f, p);
  }
  const auto p = dir / "summary.json";
  auto f = open(p);
  f << run_summary(trace).dump(2) << '\n';
  close(f, p);
  return written;
}

}  // namespace cspc
