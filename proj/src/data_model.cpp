#include "jhgp/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "jhgp/csv.hpp"
#include "jhgp/errors.hpp"

namespace jhgp {

bool TimeGrid::contains(Tick t) const { return std::binary_search(ticks.begin(), ticks.end(), t); }

std::size_t TimeGrid::index_of(Tick t) const {
  auto it = std::lower_bound(ticks.begin(), ticks.end(), t);
  if (it == ticks.end() || *it != t) {
    throw DataError("tick " + std::to_string(t) + " is not on the global time grid");
  }
  return static_cast<std::size_t>(it - ticks.begin());
}

Tick SubjectSeries::first_tick() const {
  if (obs_ticks.empty() && event_ticks.empty()) {
    throw DataError("subject '" + subject_id + "' has no records");
  }
  if (obs_ticks.empty()) return event_ticks.front();
  if (event_ticks.empty()) return obs_ticks.front();
  return std::min(obs_ticks.front(), event_ticks.front());
}

Tick SubjectSeries::last_tick() const {
  if (obs_ticks.empty() && event_ticks.empty()) {
    throw DataError("subject '" + subject_id + "' has no records");
  }
  if (obs_ticks.empty()) return event_ticks.back();
  if (event_ticks.empty()) return obs_ticks.back();
  return std::max(obs_ticks.back(), event_ticks.back());
}

void SubjectSeries::validate() const {
  const std::string who = "subject '" + subject_id + "': ";
  if (y.size() != obs_ticks.size()) throw DataError(who + "y and obs_ticks differ in length");
  if (r.size() != event_ticks.size()) throw DataError(who + "r and event_ticks differ in length");
  if (std::adjacent_find(obs_ticks.begin(), obs_ticks.end(), std::greater_equal<>()) != obs_ticks.end()) {
    throw DataError(who + "obs_ticks not strictly increasing");
  }
  if (std::adjacent_find(event_ticks.begin(), event_ticks.end(), std::greater_equal<>()) !=
      event_ticks.end()) {
    throw DataError(who + "event_ticks not strictly increasing");
  }
  for (int v : r) {
    if (v != 0 && v != 1) throw DataError(who + "event status must be 0 or 1");
  }
}

std::vector<Tick> EventGrid::ticks() const {
  std::vector<Tick> out(r.size());
  std::iota(out.begin(), out.end(), first);
  return out;
}

std::pair<std::size_t, std::size_t> EventGrid::episode(std::size_t e) const {
  const std::size_t end = e + 1 < episode_starts.size() ? episode_starts[e + 1] : r.size();
  return {episode_starts.at(e), end};
}

TimeGrid build_time_grid(const std::vector<SubjectSeries>& subjects) {
  std::vector<Tick> all;
  for (const auto& s : subjects) {
    all.insert(all.end(), s.obs_ticks.begin(), s.obs_ticks.end());
    if (s.has_events()) {
      const Tick lo = std::min(s.first_tick(), s.event_ticks.front());
      for (Tick t = lo; t <= s.event_ticks.back(); ++t) all.push_back(t);
    }
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return TimeGrid{std::move(all), 0.0};
}

EventGrid build_event_grid(const SubjectSeries& s) {
  if (!s.has_events()) {
    throw DataError("subject '" + s.subject_id + "' has no event records");
  }
  const Tick start = s.has_longitudinal() ? s.obs_ticks.front() : s.event_ticks.front();
  if (s.event_ticks.front() < start) {
    throw DataError("subject '" + s.subject_id + "': event record at tick " +
                    std::to_string(s.event_ticks.front()) + " precedes first observation at tick " +
                    std::to_string(start));
  }
  EventGrid g;
  g.first = start;
  g.r.assign(static_cast<std::size_t>(s.event_ticks.back() - start + 1), 0);
  for (std::size_t k = 0; k < s.event_ticks.size(); ++k) {
    if (s.r[k] == 1) g.r[static_cast<std::size_t>(s.event_ticks[k] - start)] = 1;
  }
  // a new episode begins in the slot after every event
  g.episode_starts.push_back(0);
  for (std::size_t k = 0; k + 1 < g.r.size(); ++k) {
    if (g.r[k] == 1) g.episode_starts.push_back(k + 1);
  }
  return g;
}

namespace {

template <typename T>
T parse_number(const std::string& field, const std::string& what, const std::string& where) {
  T value{};
  const char* b = field.data();
  const char* e = b + field.size();
  auto [ptr, ec] = std::from_chars(b, e, value);
  if (ec != std::errc() || ptr != e) {
    throw DataError(where + ": cannot parse " + what + " '" + field + "'");
  }
  return value;
}

struct RawRow {
  std::string subject;
  Tick tick;
  double value;
  std::size_t row;
};

std::vector<RawRow> read_rows(std::istream& in, const std::vector<std::string>& header,
                              const std::string& source, bool status_column) {
  std::vector<RawRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;  // empty file: no header, no rows
  auto cols = split_row(line);
  if (!cols.empty() && cols[0].rfind("\xEF\xBB\xBF", 0) == 0) cols[0].erase(0, 3);
  if (cols != header) {
    throw DataError(source + ": expected header '" + header[0] + "," + header[1] + "," +
                    header[2] + "'");
  }
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const std::string where = source + " row " + std::to_string(row);
    auto f = split_row(line);
    if (f.size() != 3) throw DataError(where + ": expected 3 fields, got " + std::to_string(f.size()));
    if (f[0].empty()) throw DataError(where + ": empty subject_id");
    RawRow r{f[0], parse_number<Tick>(f[1], "tick", where), 0.0, row};
    if (status_column) {
      const int status = parse_number<int>(f[2], "status", where);
      if (status != 0 && status != 1) {
        throw DataError(where + ": status must be 0 or 1, got " + f[2]);
      }
      r.value = status;
    } else {
      r.value = parse_number<double>(f[2], "y", where);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

std::vector<SubjectSeries> parse_csv(std::istream& longitudinal, std::istream* events,
                                     const std::string& source) {
  const auto lrows = read_rows(longitudinal, {"subject_id", "tick", "y"}, source + " longitudinal", false);
  std::vector<RawRow> erows;
  if (events != nullptr) {
    erows = read_rows(*events, {"subject_id", "tick", "status"}, source + " events", true);
  }

  std::vector<SubjectSeries> out;
  std::unordered_map<std::string, std::size_t> index;
  auto slot = [&](const std::string& id) -> SubjectSeries& {
    auto [it, inserted] = index.try_emplace(id, out.size());
    if (inserted) out.push_back(SubjectSeries{id, {}, {}, {}, {}});
    return out[it->second];
  };

  std::map<std::pair<std::size_t, Tick>, std::size_t> seen;
  for (const auto& r : lrows) {
    auto& s = slot(r.subject);
    auto [it, fresh] = seen.try_emplace({index[r.subject], r.tick}, r.row);
    if (!fresh) {
      throw DataError(source + " longitudinal row " + std::to_string(r.row) + ": duplicate (" +
                      r.subject + ", " + std::to_string(r.tick) + ") pair, first seen in row " +
                      std::to_string(it->second));
    }
    s.obs_ticks.push_back(r.tick);
    s.y.push_back(r.value);
  }
  for (const auto& r : erows) {
    auto& s = slot(r.subject);
    s.event_ticks.push_back(r.tick);
    s.r.push_back(static_cast<int>(r.value));
  }

  for (auto& s : out) {
    std::vector<std::size_t> order(s.obs_ticks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return s.obs_ticks[a] < s.obs_ticks[b]; });
    std::vector<Tick> t;
    std::vector<double> y;
    for (auto k : order) {
      t.push_back(s.obs_ticks[k]);
      y.push_back(s.y[k]);
    }
    s.obs_ticks = std::move(t);
    s.y = std::move(y);

    // repeated event rows at one tick collapse; an event dominates a censoring record
    std::map<Tick, int> ev;
    for (std::size_t k = 0; k < s.event_ticks.size(); ++k) {
      auto& v = ev[s.event_ticks[k]];
      v = std::max(v, s.r[k]);
    }
    s.event_ticks.clear();
    s.r.clear();
    for (auto [t2, v] : ev) {
      s.event_ticks.push_back(t2);
      s.r.push_back(v);
    }
    s.validate();
  }
  return out;
}

std::vector<SubjectSeries> ingest_csv(const std::filesystem::path& longitudinal_file,
                                      const std::filesystem::path& events_file) {
  std::ifstream lin(longitudinal_file);
  if (!lin) throw DataError("cannot open " + longitudinal_file.string());
  if (events_file.empty()) return parse_csv(lin, nullptr, longitudinal_file.string());
  std::ifstream ein(events_file);
  if (!ein) throw DataError("cannot open " + events_file.string());
  return parse_csv(lin, &ein, longitudinal_file.string());
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_longitudinal_csv(std::ostream& out, const std::vector<SubjectSeries>& subjects) {
  out << "subject_id,tick,y\n";
  for (const auto& s : subjects) {
    for (std::size_t k = 0; k < s.obs_ticks.size(); ++k) {
      out << s.subject_id << ',' << s.obs_ticks[k] << ',' << format_double(s.y[k]) << '\n';
    }
  }
}

void write_events_csv(std::ostream& out, const std::vector<SubjectSeries>& subjects) {
  out << "subject_id,tick,status\n";
  for (const auto& s : subjects) {
    for (std::size_t k = 0; k < s.event_ticks.size(); ++k) {
      out << s.subject_id << ',' << s.event_ticks[k] << ',' << s.r[k] << '\n';
    }
  }
}

void write_csv_pair(const std::vector<SubjectSeries>& subjects,
                    const std::filesystem::path& longitudinal_file,
                    const std::filesystem::path& events_file) {
  std::ofstream l(longitudinal_file, std::ios::binary);
  if (!l) throw DataError("cannot write " + longitudinal_file.string());
  write_longitudinal_csv(l, subjects);
  std::ofstream e(events_file, std::ios::binary);
  if (!e) throw DataError("cannot write " + events_file.string());
  write_events_csv(e, subjects);
}

}  // namespace jhgp
