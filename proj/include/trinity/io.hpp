#ifndef TRINITY_IO_HPP_
#define TRINITY_IO_HPP_

// Delimited text formats. All files are UTF-8, comma-separated, one record per
// line, with a header row:
//
//   events.csv       user_id,timestamp,scenario,card_type,action,item_id
//   impressions.csv  user_id,timestamp,scenario,card_type,item_id,click,dwell_seconds,p_true
//   population.csv   user_id,activity_level,scenario_membership,affinity_0..affinity_4
//   rows.csv         user_id,timestamp,label_click,label_duration_class,context_scenario,
//                    context_card_type,profile_0..profile_4, then one column per dense
//                    feature (f_<window>_<scenario>_<card>_<action> in T-major order
//                    for the full tensor, t<k> for restricted rows)
//
// Enums are written by name (e.g. "classic", "copilot_content"). Reals use
// round-trip precision.

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "trinity/feature_store.hpp"
#include "trinity/synthgen.hpp"

namespace trinity {

void write_events(std::ostream& out, std::span<const Event> events);
EventLog read_events(std::istream& in);

void write_impressions(std::ostream& out, std::span<const Impression> impressions);
std::vector<Impression> read_impressions(std::istream& in);

void write_population(std::ostream& out, std::span<const UserProfile> users);
std::vector<UserProfile> read_population(std::istream& in);

void write_rows(std::ostream& out, const SampleSet& rows);
SampleSet read_rows(std::istream& in);

// Path helpers; throw IoError when the file cannot be opened.
void write_events(const std::filesystem::path& path, std::span<const Event> events);
EventLog read_events(const std::filesystem::path& path);
void write_impressions(const std::filesystem::path& path, std::span<const Impression> impressions);
std::vector<Impression> read_impressions(const std::filesystem::path& path);
void write_population(const std::filesystem::path& path, std::span<const UserProfile> users);
std::vector<UserProfile> read_population(const std::filesystem::path& path);
void write_rows(const std::filesystem::path& path, const SampleSet& rows);
SampleSet read_rows(const std::filesystem::path& path);

}  // namespace trinity

#endif  // TRINITY_IO_HPP_
