#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridshaper/grid_core.hpp"
#include "gridshaper/scenario.hpp"

namespace gridshaper {

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line per row
};

// Comma-separated, no quoting; blank lines skipped. Every row must have the
// header's column count and the header must equal `expected_header` exactly.
CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header);

// `hour,price_usd_per_mwh`, hours 0..H-1 each exactly once.
std::vector<double> load_prices_csv(const std::filesystem::path& path, std::optional<std::size_t> horizon = {});
// `slot,kwh`, slots 0..H-1 each exactly once.
std::vector<double> load_profile_csv(const std::filesystem::path& path, std::optional<std::size_t> horizon = {});
// `value,probability`
DiscreteDistribution load_distribution_csv(const std::filesystem::path& path);

void write_profile_csv(const std::filesystem::path& path, const std::vector<double>& values);
void write_prices_csv(const std::filesystem::path& path, const std::vector<double>& values);

// Fleet file: one row per user, mask encoded as a 0/1 string in slot order.
// Household loads go to a separate long-format file `user_id,slot,kwh`.
void write_fleet(const std::filesystem::path& fleet_csv, const std::filesystem::path& household_csv,
                 const std::vector<UserProfile>& users);
std::vector<UserProfile> read_fleet(const std::filesystem::path& fleet_csv,
                                    const std::filesystem::path& household_csv, const TimeGrid& grid);

// Long format `user_id,slot,kwh`, one row per user and slot.
void write_schedules(const std::filesystem::path& path, const std::map<UserId, ScheduleVector>& schedules);
std::map<UserId, ScheduleVector> read_schedules(const std::filesystem::path& path, const TimeGrid& grid);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace gridshaper
