#include "epicap/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "epicap/error.hpp"

namespace epicap {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

std::int64_t parse_count(const std::string& s, const std::string& column,
                         int line_no) {
  std::size_t pos = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw Error("corpus.malformed_row",
                "line " + std::to_string(line_no) + ": " + column +
                    " is not an integer: '" + s + "'");
  }
  if (pos != s.size())
    throw Error("corpus.malformed_row",
                "line " + std::to_string(line_no) + ": " + column +
                    " has trailing characters: '" + s + "'");
  if (v < 0)
    throw Error("corpus.negative_count",
                "line " + std::to_string(line_no) + ": " + column +
                    " is negative (" + s + ")");
  return v;
}

}  // namespace

std::string normalize_city(std::string_view name) {
  std::size_t b = 0, e = name.size();
  while (b < e && std::isspace(static_cast<unsigned char>(name[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(name[e - 1]))) --e;
  std::string out;
  out.reserve(e - b);
  for (std::size_t i = b; i < e; ++i)
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(name[i])));
  return out;
}

CumulativeCorpus::CumulativeCorpus(std::vector<CumulativeRecord> records)
    : records_(std::move(records)) {
  for (auto& r : records_) r.city = normalize_city(r.city);
  std::sort(records_.begin(), records_.end(),
            [](const CumulativeRecord& a, const CumulativeRecord& b) {
              return std::tie(a.city, a.date) < std::tie(b.city, b.date);
            });
  for (std::size_t i = 1; i < records_.size(); ++i) {
    if (records_[i].city == records_[i - 1].city &&
        records_[i].date == records_[i - 1].date)
      throw Error("corpus.duplicate_row",
                  "duplicate record for " + records_[i].city + " on " +
                      records_[i].date.to_string());
  }
}

std::vector<std::string> CumulativeCorpus::cities() const {
  std::vector<std::string> out;
  for (const auto& r : records_)
    if (out.empty() || out.back() != r.city) out.push_back(r.city);
  return out;
}

DateRange CumulativeCorpus::date_range() const {
  if (records_.empty())
    throw Error("corpus.empty", "corpus has no records");
  Date lo = records_.front().date, hi = lo;
  for (const auto& r : records_) {
    lo = std::min(lo, r.date);
    hi = std::max(hi, r.date);
  }
  return DateRange{lo, hi};
}

const CumulativeRecord* CumulativeCorpus::find(std::string_view city,
                                               Date d) const {
  auto it = std::lower_bound(
      records_.begin(), records_.end(), std::tie(city, d),
      [](const CumulativeRecord& r, const auto& key) {
        return std::tie(r.city, r.date) < key;
      });
  if (it == records_.end() || it->city != city || it->date != d) return nullptr;
  return &*it;
}

std::int64_t PopulationTable::at(std::string_view city) const {
  auto it = entries_.find(std::string(city));
  if (it == entries_.end())
    throw Error("corpus.unknown_city",
                "no population entry for '" + std::string(city) + "'");
  return it->second;
}

bool PopulationTable::contains(std::string_view city) const {
  return entries_.count(std::string(city)) > 0;
}

std::string_view issue_kind_name(IssueKind k) {
  switch (k) {
    case IssueKind::Nonmonotonic: return "nonmonotonic";
    case IssueKind::MissingDay: return "missing_day";
    case IssueKind::CdExceedsCc: return "cd_exceeds_cc";
    case IssueKind::CrExceedsCc: return "cr_exceeds_cc";
    case IssueKind::NegativeCount: return "negative_count";
  }
  return "unknown";
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& i : issues) {
    nlohmann::json j{{"city", i.city},
                     {"kind", std::string(issue_kind_name(i.kind))},
                     {"detail", i.detail},
                     {"repaired", i.repaired}};
    if (i.date) j["date"] = i.date->to_string();
    arr.push_back(std::move(j));
  }
  return nlohmann::json{{"issues", arr}, {"clean", clean()}};
}

CumulativeCorpus load_cumulative(const std::string& path,
                                 std::string_view schema) {
  if (schema != "cumulative_v1")
    throw Error("corpus.schema",
                "unsupported schema id '" + std::string(schema) + "'");
  std::ifstream in(path);
  if (!in)
    throw Error("corpus.io", "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw Error("corpus.schema", "'" + path + "' is empty (header expected)");
  {
    auto header = split_csv_line(line);
    const std::vector<std::string> expected{
        "date", "city", "cum_confirmed", "cum_deaths", "cum_recovered"};
    if (header != expected)
      throw Error("corpus.schema",
                  "'" + path + "' header does not match schema " +
                      std::string(schema));
  }
  std::vector<CumulativeRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 5)
      throw Error("corpus.malformed_row",
                  "line " + std::to_string(line_no) + ": expected 5 fields, got " +
                      std::to_string(fields.size()));
    CumulativeRecord r;
    try {
      r.date = Date::parse(fields[0]);
    } catch (const Error& e) {
      throw Error("corpus.malformed_row",
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    r.city = fields[1];
    if (normalize_city(r.city).empty())
      throw Error("corpus.malformed_row",
                  "line " + std::to_string(line_no) + ": empty city name");
    r.cum_confirmed = parse_count(fields[2], "cum_confirmed", line_no);
    r.cum_deaths = parse_count(fields[3], "cum_deaths", line_no);
    r.cum_recovered = parse_count(fields[4], "cum_recovered", line_no);
    records.push_back(std::move(r));
  }
  return CumulativeCorpus(std::move(records));
}

void save_cumulative(const CumulativeCorpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw Error("corpus.io", "cannot write '" + path + "'");
  out << "date,city,cum_confirmed,cum_deaths,cum_recovered\n";
  for (const auto& r : corpus.records())
    out << r.date.to_string() << ',' << r.city << ',' << r.cum_confirmed << ','
        << r.cum_deaths << ',' << r.cum_recovered << '\n';
  if (!out)
    throw Error("corpus.io", "write to '" + path + "' failed");
}

PopulationTable load_population(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error("corpus.io", "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw Error("corpus.schema", "'" + path + "' is empty (header expected)");
  if (split_csv_line(line) != std::vector<std::string>{"city", "population"})
    throw Error("corpus.schema", "'" + path + "' header must be city,population");
  std::map<std::string, std::int64_t> entries;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 2)
      throw Error("corpus.malformed_row",
                  "line " + std::to_string(line_no) + ": expected 2 fields");
    std::string city = normalize_city(fields[0]);
    std::int64_t population = parse_count(fields[1], "population", line_no);
    if (population <= 0)
      throw Error("corpus.invalid_population",
                  "line " + std::to_string(line_no) + ": population must be > 0");
    if (!entries.emplace(city, population).second)
      throw Error("corpus.duplicate_row",
                  "line " + std::to_string(line_no) + ": duplicate city '" +
                      city + "'");
  }
  return PopulationTable(std::move(entries));
}

std::pair<CumulativeCorpus, ValidationReport> validate(
    const CumulativeCorpus& corpus, ValidationPolicy policy) {
  ValidationReport report;
  std::vector<CumulativeRecord> out = corpus.records();
  auto note = [&](const CumulativeRecord& r, IssueKind kind, std::string detail,
                  bool repaired) {
    report.issues.push_back(
        {r.city, r.date, kind, std::move(detail), repaired});
  };

  const bool clamp = policy == ValidationPolicy::Clamp;
  std::size_t i = 0;
  while (i < out.size()) {
    std::size_t j = i;
    while (j < out.size() && out[j].city == out[i].city) ++j;
    // One city's run, sorted by date.
    std::int64_t run_cc = -1, run_cd = -1, run_cr = -1;
    for (std::size_t k = i; k < j; ++k) {
      auto& r = out[k];
      if (k > i && r.date - out[k - 1].date > 1) {
        for (Date d = out[k - 1].date.next(); d < r.date; d = d.next())
          report.issues.push_back({r.city, d, IssueKind::MissingDay,
                                   "no record for this date", false});
      }
      if (r.cum_confirmed < 0 || r.cum_deaths < 0 || r.cum_recovered < 0)
        note(r, IssueKind::NegativeCount, "negative cumulative count", false);
      auto monotone = [&](std::int64_t& run, std::int64_t value,
                          const char* name) -> std::int64_t {
        if (value < run) {
          std::string detail = std::string(name) + " falls from " +
                               std::to_string(run) + " to " +
                               std::to_string(value);
          note(r, IssueKind::Nonmonotonic, detail, clamp);
          if (clamp) return run;
        }
        run = std::max(run, value);
        return value;
      };
      r.cum_confirmed = monotone(run_cc, r.cum_confirmed, "cum_confirmed");
      r.cum_deaths = monotone(run_cd, r.cum_deaths, "cum_deaths");
      r.cum_recovered = monotone(run_cr, r.cum_recovered, "cum_recovered");
      if (r.cum_deaths > r.cum_confirmed)
        note(r, IssueKind::CdExceedsCc,
             "cum_deaths " + std::to_string(r.cum_deaths) +
                 " exceeds cum_confirmed " + std::to_string(r.cum_confirmed),
             false);
      if (r.cum_recovered > r.cum_confirmed)
        note(r, IssueKind::CrExceedsCc,
             "cum_recovered " + std::to_string(r.cum_recovered) +
                 " exceeds cum_confirmed " + std::to_string(r.cum_confirmed),
             false);
    }
    i = j;
  }
  if (!clamp) return {corpus, std::move(report)};
  return {CumulativeCorpus(std::move(out)), std::move(report)};
}

void check_population_coverage(const CumulativeCorpus& corpus,
                               const PopulationTable& pop) {
  for (const auto& r : corpus.records()) {
    std::int64_t tp = pop.at(r.city);  // throws when the city is missing
    if (tp <= r.cum_confirmed)
      throw Error("corpus.population_exceeded",
                  r.city + " on " + r.date.to_string() +
                      ": population " + std::to_string(tp) +
                      " does not exceed cum_confirmed " +
                      std::to_string(r.cum_confirmed));
  }
}

}  // namespace epicap
