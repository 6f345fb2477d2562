#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace jhgp {

/// Discrete time index. One unit is one observation period (e.g. a quarter).
using Tick = std::int64_t;

/// Global ordered set of ticks spanned by a dataset.
struct TimeGrid {
  std::vector<Tick> ticks;  // strictly increasing
  double origin = 0.0;      // real-valued time of tick 0

  std::size_t size() const { return ticks.size(); }
  bool contains(Tick t) const;
  /// Position of `t` in `ticks`; throws DataError when absent.
  std::size_t index_of(Tick t) const;
};

struct SubjectSeries {
  std::string subject_id;
  std::vector<Tick> obs_ticks;    // where y is observed
  std::vector<double> y;          // aligned with obs_ticks
  std::vector<Tick> event_ticks;  // where event status is recorded
  std::vector<int> r;             // aligned with event_ticks; 1 = event, 0 = none/censored

  bool has_longitudinal() const { return !obs_ticks.empty(); }
  bool has_events() const { return !event_ticks.empty(); }
  /// First tick of any record; throws if the subject has no records.
  Tick first_tick() const;
  Tick last_tick() const;
  /// Checks the type invariants; throws DataError naming the subject.
  void validate() const;
};

/// Dense binary event sequence over one subject's window, with gaps filled by 0.
struct EventGrid {
  Tick first = 0;                      // tick of slot 0
  std::vector<int> r;                  // one entry per tick in [first, first + r.size())
  std::vector<std::size_t> episode_starts;  // slot index where each episode begins

  std::size_t size() const { return r.size(); }
  Tick tick_at(std::size_t slot) const { return first + static_cast<Tick>(slot); }
  std::vector<Tick> ticks() const;
  /// Half-open slot range [begin, end) of episode `e`.
  std::pair<std::size_t, std::size_t> episode(std::size_t e) const;
  std::size_t episode_count() const { return episode_starts.size(); }
};

/// Builds the union grid over all subjects' longitudinal ticks and event windows.
TimeGrid build_time_grid(const std::vector<SubjectSeries>& subjects);

/// Dense event grid from the subject's first tick to its last event/censoring record.
EventGrid build_event_grid(const SubjectSeries& s);

/// Reads the two CSV inputs. `events_file` may be empty (path "" or a header-only
/// file), giving longitudinal-only subjects.
std::vector<SubjectSeries> ingest_csv(const std::filesystem::path& longitudinal_file,
                                      const std::filesystem::path& events_file);

/// Parses CSV text directly; `source` is used in error messages.
std::vector<SubjectSeries> parse_csv(std::istream& longitudinal, std::istream* events,
                                     const std::string& source = "input");

void write_longitudinal_csv(std::ostream& out, const std::vector<SubjectSeries>& subjects);
void write_events_csv(std::ostream& out, const std::vector<SubjectSeries>& subjects);
void write_csv_pair(const std::vector<SubjectSeries>& subjects,
                    const std::filesystem::path& longitudinal_file,
                    const std::filesystem::path& events_file);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace jhgp
