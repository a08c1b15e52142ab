#include "gridshaper/io.hpp"

#include <fstream>
#include <sstream>

#include "gridshaper/format.hpp"

namespace gridshaper {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
    return out;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CsvError("cannot write " + path.string());
    return out;
}

// Reads `index,value` rows and checks every index in 0..n-1 occurs once.
std::vector<double> load_indexed_series(const std::filesystem::path& path, const std::string& index_name,
                                        const std::string& value_name, std::optional<std::size_t> horizon) {
    const CsvTable table = read_csv(path, {index_name, value_name});
    const std::string where = path.string() + ": ";
    std::map<long long, double> by_index;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string line = " (line " + std::to_string(table.line_numbers[r]) + ")";
        long long idx = 0;
        double value = 0.0;
        try {
            idx = parse_integer(table.rows[r][0], index_name);
            value = parse_double(table.rows[r][1], value_name);
        } catch (const std::invalid_argument& e) {
            throw CsvError(where + e.what() + line);
        }
        if (idx < 0) throw CsvError(where + "negative " + index_name + line);
        if (!by_index.emplace(idx, value).second)
            throw CsvError(where + "duplicate " + index_name + " " + std::to_string(idx) + line);
    }
    const std::size_t n = horizon.value_or(by_index.empty() ? 0 : static_cast<std::size_t>(by_index.rbegin()->first) + 1);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = by_index.find(static_cast<long long>(i));
        if (it == by_index.end()) throw CsvError(where + "missing " + index_name + " " + std::to_string(i));
        out[i] = it->second;
    }
    if (by_index.size() != n)
        throw CsvError(where + "wrong length: " + std::to_string(by_index.size()) + " rows, expected " +
                       std::to_string(n));
    if (n == 0) throw CsvError(where + "no data rows");
    return out;
}

void write_indexed_series(const std::filesystem::path& path, const std::string& header,
                          const std::vector<double>& values) {
    auto out = open_for_write(path);
    out << header << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << format_double(values[i]) << '\n';
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open " + path.string());
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip(line);
        if (line.empty()) continue;
        auto fields = split_fields(line);
        for (auto& f : fields) f = strip(f);
        if (!have_header) {
            if (fields != expected_header)
                throw CsvError(path.string() + ": header '" + join(fields) + "' does not match expected '" +
                               join(expected_header) + "'");
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw CsvError(path.string() + ": line " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(table.header.size()));
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (!have_header) throw CsvError(path.string() + ": empty file");
    return table;
}

std::vector<double> load_prices_csv(const std::filesystem::path& path, std::optional<std::size_t> horizon) {
    return load_indexed_series(path, "hour", "price_usd_per_mwh", horizon);
}

std::vector<double> load_profile_csv(const std::filesystem::path& path, std::optional<std::size_t> horizon) {
    return load_indexed_series(path, "slot", "kwh", horizon);
}

DiscreteDistribution load_distribution_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path, {"value", "probability"});
    DiscreteDistribution dist;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        try {
            dist.values.push_back(parse_double(table.rows[r][0], "value"));
            dist.probabilities.push_back(parse_double(table.rows[r][1], "probability"));
        } catch (const std::invalid_argument& e) {
            throw CsvError(path.string() + ": " + e.what() + " (line " + std::to_string(table.line_numbers[r]) + ")");
        }
    }
    try {
        dist.validate(path.string().c_str());
    } catch (const std::invalid_argument& e) {
        throw CsvError(e.what());
    }
    return dist;
}

void write_profile_csv(const std::filesystem::path& path, const std::vector<double>& values) {
    write_indexed_series(path, "slot,kwh", values);
}

void write_prices_csv(const std::filesystem::path& path, const std::vector<double>& values) {
    write_indexed_series(path, "hour,price_usd_per_mwh", values);
}

void write_fleet(const std::filesystem::path& fleet_csv, const std::filesystem::path& household_csv,
                 const std::vector<UserProfile>& users) {
    auto out = open_for_write(fleet_csv);
    out << "user_id,v2g_enabled,capacity_kwh,soc_arrival_kwh,required_energy_kwh,max_power_kw,min_soc_fraction,mask\n";
    for (const auto& u : users) {
        const PevSpec& p = u.pev;
        std::string mask;
        for (bool b : p.permissible_slots) mask += b ? '1' : '0';
        out << p.user_id << ',' << (p.v2g_enabled ? 1 : 0) << ',' << format_double(p.capacity_kwh) << ','
            << format_double(p.soc_arrival_kwh) << ',' << format_double(p.required_energy_kwh) << ','
            << format_double(p.max_power_kw) << ',' << format_double(p.min_soc_fraction) << ',' << mask << '\n';
    }
    auto hh = open_for_write(household_csv);
    hh << "user_id,slot,kwh\n";
    for (const auto& u : users)
        for (std::size_t t = 0; t < u.household_load_kwh.size(); ++t)
            hh << u.id() << ',' << t << ',' << format_double(u.household_load_kwh[t]) << '\n';
}

std::vector<UserProfile> read_fleet(const std::filesystem::path& fleet_csv,
                                    const std::filesystem::path& household_csv, const TimeGrid& grid) {
    const CsvTable table = read_csv(fleet_csv, {"user_id", "v2g_enabled", "capacity_kwh", "soc_arrival_kwh",
                                                "required_energy_kwh", "max_power_kw", "min_soc_fraction", "mask"});
    std::vector<UserProfile> users;
    std::map<UserId, std::size_t> index;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        const std::string where = fleet_csv.string() + " line " + std::to_string(table.line_numbers[r]) + ": ";
        UserProfile u;
        try {
            u.pev.user_id = static_cast<UserId>(parse_integer(f[0], "user_id"));
            const auto v2g = parse_integer(f[1], "v2g_enabled");
            if (v2g != 0 && v2g != 1) throw std::invalid_argument("v2g_enabled must be 0 or 1");
            u.pev.v2g_enabled = v2g == 1;
            u.pev.capacity_kwh = parse_double(f[2], "capacity_kwh");
            u.pev.soc_arrival_kwh = parse_double(f[3], "soc_arrival_kwh");
            u.pev.required_energy_kwh = parse_double(f[4], "required_energy_kwh");
            u.pev.max_power_kw = parse_double(f[5], "max_power_kw");
            u.pev.min_soc_fraction = parse_double(f[6], "min_soc_fraction");
        } catch (const std::invalid_argument& e) {
            throw CsvError(where + e.what());
        }
        if (f[7].size() != grid.size()) throw CsvError(where + "mask length != horizon");
        for (char c : f[7]) {
            if (c != '0' && c != '1') throw CsvError(where + "mask must be a 0/1 string");
            u.pev.permissible_slots.push_back(c == '1');
        }
        u.household_load_kwh.assign(grid.size(), 0.0);
        if (!index.emplace(u.id(), users.size()).second) throw CsvError(where + "duplicate user_id");
        users.push_back(std::move(u));
    }

    const CsvTable hh = read_csv(household_csv, {"user_id", "slot", "kwh"});
    std::vector<std::vector<bool>> seen(users.size(), std::vector<bool>(grid.size(), false));
    for (std::size_t r = 0; r < hh.rows.size(); ++r) {
        const auto& f = hh.rows[r];
        const std::string where = household_csv.string() + " line " + std::to_string(hh.line_numbers[r]) + ": ";
        try {
            const auto id = static_cast<UserId>(parse_integer(f[0], "user_id"));
            const auto slot = parse_integer(f[1], "slot");
            auto it = index.find(id);
            if (it == index.end()) throw std::invalid_argument("unknown user_id " + std::to_string(id));
            if (slot < 0 || static_cast<std::size_t>(slot) >= grid.size())
                throw std::invalid_argument("slot outside horizon");
            if (seen[it->second][slot]) throw std::invalid_argument("duplicate slot");
            seen[it->second][slot] = true;
            users[it->second].household_load_kwh[slot] = parse_double(f[2], "kwh");
        } catch (const std::invalid_argument& e) {
            throw CsvError(where + e.what());
        }
    }
    for (std::size_t i = 0; i < users.size(); ++i) {
        for (std::size_t t = 0; t < grid.size(); ++t)
            if (!seen[i][t])
                throw CsvError(household_csv.string() + ": missing slot " + std::to_string(t) + " for user " +
                               std::to_string(users[i].id()));
        users[i].validate(grid);
    }
    return users;
}

void write_schedules(const std::filesystem::path& path, const std::map<UserId, ScheduleVector>& schedules) {
    auto out = open_for_write(path);
    out << "user_id,slot,kwh\n";
    for (const auto& [id, s] : schedules)
        for (std::size_t t = 0; t < s.size(); ++t) out << id << ',' << t << ',' << format_double(s[t]) << '\n';
}

std::map<UserId, ScheduleVector> read_schedules(const std::filesystem::path& path, const TimeGrid& grid) {
    const CsvTable table = read_csv(path, {"user_id", "slot", "kwh"});
    std::map<UserId, ScheduleVector> out;
    std::map<UserId, std::vector<bool>> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& f = table.rows[r];
        const std::string where = path.string() + " line " + std::to_string(table.line_numbers[r]) + ": ";
        try {
            const auto id = static_cast<UserId>(parse_integer(f[0], "user_id"));
            const auto slot = parse_integer(f[1], "slot");
            if (slot < 0 || static_cast<std::size_t>(slot) >= grid.size())
                throw std::invalid_argument("slot outside horizon");
            auto [it, fresh] = out.try_emplace(id, grid.size());
            auto& marks = seen.try_emplace(id, grid.size(), false).first->second;
            if (marks[slot]) throw std::invalid_argument("duplicate slot");
            marks[slot] = true;
            it->second[slot] = parse_double(f[2], "kwh");
        } catch (const std::invalid_argument& e) {
            throw CsvError(where + e.what());
        }
    }
    for (const auto& [id, marks] : seen)
        for (std::size_t t = 0; t < marks.size(); ++t)
            if (!marks[t])
                throw CsvError(path.string() + ": missing slot " + std::to_string(t) + " for user " + std::to_string(id));
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    auto out = open_for_write(path);
    out << content;
}

}  // namespace gridshaper
