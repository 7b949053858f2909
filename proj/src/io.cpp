#include "trinity/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace trinity {
namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <class T>
T parse_number(std::string_view s, std::size_t line_no) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError("line " + std::to_string(line_no) + ": cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

// Reads the header and calls row(fields, line_no) for every data line.
template <class F>
void read_csv(std::istream& in, const std::string& expected_header, F&& row) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw IoError("unexpected header '" + line + "', expected '" + expected_header + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    try {
      row(fields, line_no);
    } catch (const ConfigError& e) {
      throw IoError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void expect_fields(const std::vector<std::string_view>& f, std::size_t n, std::size_t line_no) {
  if (f.size() != n) {
    throw IoError("line " + std::to_string(line_no) + ": expected " + std::to_string(n) +
                  " fields, found " + std::to_string(f.size()));
  }
}

const std::string kEventsHeader = "user_id,timestamp,scenario,card_type,action,item_id";
const std::string kImpressionsHeader =
    "user_id,timestamp,scenario,card_type,item_id,click,dwell_seconds,p_true";

std::string population_header() {
  std::string h = "user_id,activity_level,scenario_membership";
  for (int k = 0; k < kNumCardTypes; ++k) h += ",affinity_" + std::to_string(k);
  return h;
}

std::string rows_header(int n_features) {
  std::string h =
      "user_id,timestamp,label_click,label_duration_class,context_scenario,context_card_type";
  for (int k = 0; k < kProfileWidth; ++k) h += ",profile_" + std::to_string(k);
  for (int k = 0; k < n_features; ++k) {
    h += ',';
    h += n_features == kTensorSize ? feature_name(k) : "t" + std::to_string(k);
  }
  return h;
}

template <class Write>
void with_output(const std::filesystem::path& path, Write&& write) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write(out);
  if (!out) throw IoError("write failed for " + path.string());
}

template <class Read>
auto with_input(const std::filesystem::path& path, Read&& read) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read(in);
}

}  // namespace

void write_events(std::ostream& out, std::span<const Event> events) {
  out << kEventsHeader << '\n';
  for (const Event& e : events) {
    out << e.user_id << ',' << e.timestamp << ',' << to_string(e.scenario) << ','
        << to_string(e.card_type) << ',' << to_string(e.action) << ',' << e.item_id << '\n';
  }
}

EventLog read_events(std::istream& in) {
  EventLog log;
  read_csv(in, kEventsHeader, [&](const auto& f, std::size_t n) {
    expect_fields(f, 6, n);
    log.push_back({parse_number<std::int64_t>(f[0], n), parse_number<std::int64_t>(f[1], n),
                   parse_scenario(f[2]), parse_card_type(f[3]), parse_action(f[4]),
                   parse_number<std::int64_t>(f[5], n)});
  });
  return log;
}

void write_impressions(std::ostream& out, std::span<const Impression> impressions) {
  out << kImpressionsHeader << '\n';
  for (const Impression& i : impressions) {
    out << i.user_id << ',' << i.timestamp << ',' << to_string(i.scenario) << ','
        << to_string(i.card_type) << ',' << i.item_id << ',' << (i.click ? 1 : 0) << ','
        << fmt_double(i.dwell_seconds) << ',' << fmt_double(i.p_true) << '\n';
  }
}

std::vector<Impression> read_impressions(std::istream& in) {
  std::vector<Impression> out;
  read_csv(in, kImpressionsHeader, [&](const auto& f, std::size_t n) {
    expect_fields(f, 8, n);
    Impression i;
    i.user_id = parse_number<std::int64_t>(f[0], n);
    i.timestamp = parse_number<std::int64_t>(f[1], n);
    i.scenario = parse_scenario(f[2]);
    i.card_type = parse_card_type(f[3]);
    i.item_id = parse_number<std::int64_t>(f[4], n);
    i.click = parse_number<int>(f[5], n) != 0;
    i.dwell_seconds = parse_number<double>(f[6], n);
    i.p_true = parse_number<double>(f[7], n);
    out.push_back(i);
  });
  return out;
}

void write_population(std::ostream& out, std::span<const UserProfile> users) {
  out << population_header() << '\n';
  for (const UserProfile& u : users) {
    out << u.user_id << ',' << to_string(u.activity_level) << ','
        << to_string(u.scenario_membership);
    for (double a : u.affinity) out << ',' << fmt_double(a);
    out << '\n';
  }
}

std::vector<UserProfile> read_population(std::istream& in) {
  std::vector<UserProfile> out;
  read_csv(in, population_header(), [&](const auto& f, std::size_t n) {
    expect_fields(f, 3 + kNumCardTypes, n);
    UserProfile u;
    u.user_id = parse_number<std::int64_t>(f[0], n);
    u.activity_level = parse_activity(f[1]);
    u.scenario_membership = parse_membership(f[2]);
    for (int k = 0; k < kNumCardTypes; ++k) u.affinity[k] = parse_number<double>(f[3 + k], n);
    out.push_back(u);
  });
  return out;
}

void write_rows(std::ostream& out, const SampleSet& rows) {
  out << rows_header(rows.n_features()) << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows.user_id[i] << ',' << rows.timestamp[i] << ',' << rows.label_click[i] << ','
        << rows.label_duration[i] << ',' << to_string(rows.scenario[i]) << ','
        << to_string(rows.card[i]);
    for (double p : rows.profile_row(i)) out << ',' << fmt_double(p);
    for (float v : rows.dense_row(i)) out << ',' << fmt_double(v);
    out << '\n';
  }
}

SampleSet read_rows(std::istream& in) {
  // The feature width is implied by the header.
  std::string header;
  if (!std::getline(in, header)) throw IoError("missing header row");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  const std::size_t fixed = 6 + kProfileWidth;
  const std::size_t columns = split(header).size();
  if (columns <= fixed) throw IoError("rows file has no feature columns");
  const int n_features = static_cast<int>(columns - fixed);
  if (header != rows_header(n_features)) throw IoError("unexpected rows header");

  SampleSet rows(n_features);
  SampleRow r;
  r.dense_features.resize(n_features);
  std::string line;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    expect_fields(f, columns, n);
    try {
      r.user_id = parse_number<std::int64_t>(f[0], n);
      r.timestamp = parse_number<std::int64_t>(f[1], n);
      r.label_click = parse_number<int>(f[2], n);
      r.label_duration_class = parse_number<int>(f[3], n);
      r.context_scenario = parse_scenario(f[4]);
      r.context_card_type = parse_card_type(f[5]);
    } catch (const ConfigError& e) {
      throw IoError("line " + std::to_string(n) + ": " + e.what());
    }
    for (int k = 0; k < kProfileWidth; ++k) r.profile_features[k] = parse_number<double>(f[6 + k], n);
    for (int k = 0; k < n_features; ++k) r.dense_features[k] = parse_number<double>(f[fixed + k], n);
    rows.push_back(r);
  }
  return rows;
}

void write_events(const std::filesystem::path& path, std::span<const Event> events) {
  with_output(path, [&](std::ostream& out) { write_events(out, events); });
}
EventLog read_events(const std::filesystem::path& path) {
  return with_input(path, [](std::istream& in) { return read_events(in); });
}
void write_impressions(const std::filesystem::path& path, std::span<const Impression> impressions) {
  with_output(path, [&](std::ostream& out) { write_impressions(out, impressions); });
}
std::vector<Impression> read_impressions(const std::filesystem::path& path) {
  return with_input(path, [](std::istream& in) { return read_impressions(in); });
}
void write_population(const std::filesystem::path& path, std::span<const UserProfile> users) {
  with_output(path, [&](std::ostream& out) { write_population(out, users); });
}
std::vector<UserProfile> read_population(const std::filesystem::path& path) {
  return with_input(path, [](std::istream& in) { return read_population(in); });
}
void write_rows(const std::filesystem::path& path, const SampleSet& rows) {
  with_output(path, [&](std::ostream& out) { write_rows(out, rows); });
}
SampleSet read_rows(const std::filesystem::path& path) {
  return with_input(path, [](std::istream& in) { return read_rows(in); });
}

}  // namespace trinity
