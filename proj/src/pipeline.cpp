#include "gridshaper/pipeline.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

#include "gridshaper/format.hpp"
#include "gridshaper/io.hpp"

namespace gridshaper {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

StoppingMode parse_stopping_mode(const std::string& s) {
    if (s == "fixed_iterations") return StoppingMode::FixedIterations;
    if (s == "mse_threshold") return StoppingMode::MseThreshold;
    if (s == "whichever_first") return StoppingMode::WhicheverFirst;
    throw PipelineError("unknown policy mode '" + s + "'");
}

TriggerMode parse_trigger_mode(const std::string& s) {
    if (s == "ratio") return TriggerMode::Ratio;
    if (s == "spread") return TriggerMode::Spread;
    if (s == "manual") return TriggerMode::Manual;
    throw PipelineError("unknown trigger mode '" + s + "'");
}

TargetMode parse_target_mode(const std::string& s) {
    if (s == "external_csv") return TargetMode::ExternalCsv;
    if (s == "valley_fill") return TargetMode::ValleyFill;
    if (s == "scaled_household") return TargetMode::ScaledHousehold;
    throw PipelineError("unknown target mode '" + s + "'");
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

// Throws naming the command that produces the missing artifact.
fs::path require_artifact(const ScenarioConfig& config, const char* name, const char* producer,
                          const char* consumer) {
    fs::path p = config.output_dir / name;
    if (!fs::exists(p))
        throw PipelineError(std::string(consumer) + ": missing " + p.string() + "; run `gridshaper " + producer +
                            "` first");
    return p;
}

json read_manifest(const ScenarioConfig& config) {
    const fs::path p = config.output_dir / artifacts::kManifest;
    if (!fs::exists(p)) return json::object();
    return json::parse(read_text_file(p));
}

void stamp(json& manifest, const char* file, const char* schema, const char* command) {
    manifest["files"][file] = {{"schema", schema}, {"version", kArtifactSchemaVersion}, {"command", command}};
}

void write_manifest(const ScenarioConfig& config, json manifest) {
    manifest["schema_version"] = kArtifactSchemaVersion;
    manifest["producer"] = "gridshaper";
    write_text_file(config.output_dir / artifacts::kManifest, manifest.dump(2) + "\n");
}

void write_mse_trace(const fs::path& path, const std::vector<double>& trace) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw PipelineError("cannot write " + path.string());
    out << "sweep,mse_kwh2\n";
    for (std::size_t k = 0; k < trace.size(); ++k) out << k + 1 << ',' << format_double(trace[k]) << '\n';
}

std::vector<double> read_mse_trace(const fs::path& path) {
    const CsvTable table = read_csv(path, {"sweep", "mse_kwh2"});
    std::vector<double> out;
    for (const auto& row : table.rows) out.push_back(parse_double(row[1], "mse_kwh2"));
    return out;
}

ShapedOutcome load_shaped(const ScenarioConfig& config, const char* consumer) {
    const auto fleet_csv = require_artifact(config, artifacts::kFleet, "gen", consumer);
    const auto household_csv = require_artifact(config, artifacts::kHousehold, "gen", consumer);
    const auto target_csv = require_artifact(config, artifacts::kTarget, "gen", consumer);
    const auto shaped_csv = require_artifact(config, artifacts::kSchedulesShaped, "shape", consumer);
    ShapedOutcome outcome;
    auto users = read_fleet(fleet_csv, household_csv, config.grid);
    auto schedules = read_schedules(shaped_csv, config.grid);
    outcome.fleet = FleetState(config.grid, std::move(users), std::move(schedules));
    outcome.target_kwh = load_profile_csv(target_csv, config.grid.size());
    return outcome;
}

class JsonlSink {
public:
    explicit JsonlSink(const fs::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw PipelineError("cannot write " + path.string());
    }
    void operator()(const UpdateEvent& e) { write_event_jsonl(out_, e); }

private:
    std::ofstream out_;
};

}  // namespace

LogLevel log_level_from_env() {
    const char* env = std::getenv("GRIDSHAPER_LOG");
    if (!env) return LogLevel::Warn;
    const std::string v(env);
    if (v == "error") return LogLevel::Error;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
}

void log_message(LogLevel level, const std::string& message) {
    static const LogLevel threshold = log_level_from_env();
    if (level > threshold) return;
    static constexpr const char* names[] = {"error", "warn", "info", "debug"};
    std::cerr << "[gridshaper " << names[static_cast<int>(level)] << "] " << message << '\n';
}

void ScenarioConfig::validate() const {
    fleet.validate();
    policy.validate();
    trigger.validate();
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw PipelineError("lambda must be in [0,1]");
    if (!(t0_weight_scale_kwh > 0.0)) throw PipelineError("t0_weight_scale_kwh must be > 0");
    if (target_mode == TargetMode::ExternalCsv && da_purchased_csv.empty())
        throw PipelineError("target_mode external_csv requires market.da_purchased_csv");
}

ScenarioConfig load_scenario_config(const fs::path& path, const CliOverrides& overrides) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw PipelineError(path.string() + ": " + e.what());
    }
    const fs::path base = path.parent_path();
    ScenarioConfig c;
    try {
        c.grid = TimeGrid(j.value("horizon_slots", std::size_t{24}), j.value("slot_hours", 1.0));

        const json& f = j.at("fleet");
        c.fleet.grid = c.grid;
        c.fleet.n_users = f.at("n_users").get<std::size_t>();
        c.fleet.charge_rate_kw = f.value("charge_rate_kw", 1.8);
        c.fleet.capacity_kwh = f.value("capacity_kwh", 24.0);
        c.fleet.v2g_fraction = f.value("v2g_fraction", 0.0);
        c.fleet.min_soc_fraction = f.value("min_soc_fraction", 0.2);
        c.fleet.household_scale_spread = f.value("household_scale_spread", 0.0);
        c.fleet.seed = f.value("seed", std::uint64_t{0});
        c.fleet.arrival_dist = load_distribution_csv(resolve(base, f.at("arrival_csv").get<std::string>()));
        c.fleet.departure_dist = load_distribution_csv(resolve(base, f.at("departure_csv").get<std::string>()));
        c.fleet.charging_hours_dist =
            load_distribution_csv(resolve(base, f.at("charging_hours_csv").get<std::string>()));
        c.fleet.household_base_kwh =
            load_profile_csv(resolve(base, f.at("household_csv").get<std::string>()), c.grid.size());

        const json& m = j.at("market");
        c.da_price_csv = resolve(base, m.at("da_price_csv").get<std::string>());
        c.rt_price_csv = resolve(base, m.at("rt_price_csv").get<std::string>());
        c.target_mode = parse_target_mode(m.value("target_mode", std::string("valley_fill")));
        if (m.contains("da_purchased_csv")) c.da_purchased_csv = resolve(base, m.at("da_purchased_csv").get<std::string>());

        if (j.contains("policy")) {
            const json& p = j.at("policy");
            c.policy.max_iterations = p.value("max_iterations", c.policy.max_iterations);
            c.policy.mse_tolerance = p.value("mse_tolerance", c.policy.mse_tolerance);
            c.policy.mode = parse_stopping_mode(p.value("mode", std::string("whichever_first")));
        }
        if (j.contains("trigger")) {
            const json& t = j.at("trigger");
            c.trigger.mode = parse_trigger_mode(t.value("mode", std::string("ratio")));
            c.trigger.ratio_threshold = t.value("ratio_threshold", c.trigger.ratio_threshold);
            c.trigger.spread_threshold_per_mwh = t.value("spread_threshold_per_mwh", c.trigger.spread_threshold_per_mwh);
            if (t.contains("manual_t0")) c.trigger.manual_t0 = t.at("manual_t0").get<std::size_t>();
        }
        c.lambda = j.value("lambda", 0.5);
        c.t0_weight_scale_kwh = j.value("t0_weight_scale_kwh", kDefaultT0WeightScaleKwh);
        c.output_dir = j.value("output_dir", std::string("run"));
    } catch (const json::exception& e) {
        throw PipelineError(path.string() + ": " + e.what());
    }

    if (overrides.seed) c.fleet.seed = *overrides.seed;
    if (overrides.lambda) c.lambda = *overrides.lambda;
    if (overrides.output_dir) c.output_dir = *overrides.output_dir;
    if (overrides.t0) {
        c.trigger.mode = TriggerMode::Manual;
        c.trigger.manual_t0 = *overrides.t0;
    }
    c.validate();
    return c;
}

MarketDay load_market(const ScenarioConfig& config, const std::vector<double>& da_purchased_kwh) {
    MarketDay market{load_prices_csv(config.da_price_csv, config.grid.size()),
                     load_prices_csv(config.rt_price_csv, config.grid.size()), da_purchased_kwh};
    market.validate(config.grid);
    return market;
}

void cmd_gen(const ScenarioConfig& config) {
    fs::create_directories(config.output_dir);
    const auto users = sample_fleet(config.fleet);
    TargetInputs inputs{household_total(users, config.grid.size()), total_required_energy(users),
                        config.da_purchased_csv, config.grid};
    const auto target = make_target(config.target_mode, inputs);

    write_fleet(config.output_dir / artifacts::kFleet, config.output_dir / artifacts::kHousehold, users);
    write_profile_csv(config.output_dir / artifacts::kTarget, target);

    json manifest = json::object();
    manifest["seed"] = config.fleet.seed;
    manifest["horizon_slots"] = config.grid.size();
    manifest["slot_hours"] = config.grid.slot_hours;
    stamp(manifest, artifacts::kFleet, "fleet", "gen");
    stamp(manifest, artifacts::kHousehold, "household_long", "gen");
    stamp(manifest, artifacts::kTarget, "profile", "gen");
    write_manifest(config, std::move(manifest));
    log_message(LogLevel::Info, "gen: " + std::to_string(users.size()) + " users written to " + config.output_dir.string());
}

void cmd_shape(const ScenarioConfig& config) {
    const auto fleet_csv = require_artifact(config, artifacts::kFleet, "gen", "shape");
    const auto household_csv = require_artifact(config, artifacts::kHousehold, "gen", "shape");
    const auto target_csv = require_artifact(config, artifacts::kTarget, "gen", "shape");
    const auto users = read_fleet(fleet_csv, household_csv, config.grid);
    const auto target = load_profile_csv(target_csv, config.grid.size());

    const FleetState baseline = uncoordinated_baseline(users, config.grid);
    JsonlSink sink(config.output_dir / artifacts::kShapeLog);
    const ShapedOutcome shaped = run_shaping(users, target, config.grid, config.policy,
                                             Initializer::UncoordinatedGreedy, std::ref(sink));

    write_profile_csv(config.output_dir / artifacts::kAggregateUncoordinated, baseline.aggregate_kwh());
    write_schedules(config.output_dir / artifacts::kSchedulesShaped, shaped.fleet.schedules());
    write_profile_csv(config.output_dir / artifacts::kAggregateShaped, shaped.fleet.aggregate_kwh());
    write_mse_trace(config.output_dir / artifacts::kMseShaping, shaped.mse_trace);

    json manifest = read_manifest(config);
    stamp(manifest, artifacts::kAggregateUncoordinated, "profile", "shape");
    stamp(manifest, artifacts::kSchedulesShaped, "schedules_long", "shape");
    stamp(manifest, artifacts::kAggregateShaped, "profile", "shape");
    stamp(manifest, artifacts::kMseShaping, "mse_trace", "shape");
    stamp(manifest, artifacts::kShapeLog, "update_events_jsonl", "shape");
    write_manifest(config, std::move(manifest));
    log_message(LogLevel::Info, "shape: " + std::to_string(shaped.iterations_run) + " sweeps, final mse " +
                                    format_double(shaped.mse_trace.back()));
}

void cmd_alter(const ScenarioConfig& config) {
    const ShapedOutcome shaped = load_shaped(config, "alter");
    const MarketDay market = load_market(config, shaped.target_kwh);
    const auto t0 = detect_t0(market, config.grid.size(), config.trigger);

    ShapedOutcome altered = shaped;
    altered.iterations_run = 0;
    altered.mse_trace.clear();
    JsonlSink sink(config.output_dir / artifacts::kAlterLog);
    if (t0) {
        altered = run_altering(shaped, *t0, AlteringOptions{config.lambda, config.t0_weight_scale_kwh},
                               config.policy, std::ref(sink));
        log_message(LogLevel::Info, "alter: t0 = " + std::to_string(*t0));
    } else {
        log_message(LogLevel::Info, "alter: no trigger slot, schedules unchanged");
    }

    write_schedules(config.output_dir / artifacts::kSchedulesAltered, altered.fleet.schedules());
    write_profile_csv(config.output_dir / artifacts::kAggregateAltered, altered.fleet.aggregate_kwh());
    write_mse_trace(config.output_dir / artifacts::kMseAltering, altered.mse_trace);
    json meta = {{"t0", t0 ? json(*t0) : json(nullptr)},
                 {"lambda", config.lambda},
                 {"t0_weight_scale_kwh", config.t0_weight_scale_kwh}};
    write_text_file(config.output_dir / artifacts::kAlterMeta, meta.dump(2) + "\n");

    json manifest = read_manifest(config);
    stamp(manifest, artifacts::kSchedulesAltered, "schedules_long", "alter");
    stamp(manifest, artifacts::kAggregateAltered, "profile", "alter");
    stamp(manifest, artifacts::kMseAltering, "mse_trace", "alter");
    stamp(manifest, artifacts::kAlterLog, "update_events_jsonl", "alter");
    stamp(manifest, artifacts::kAlterMeta, "alter_meta", "alter");
    write_manifest(config, std::move(manifest));
}

CostChainReport cmd_settle(const ScenarioConfig& config) {
    const auto target = load_profile_csv(require_artifact(config, artifacts::kTarget, "gen", "settle"), config.grid.size());
    const auto uncoordinated = load_profile_csv(
        require_artifact(config, artifacts::kAggregateUncoordinated, "shape", "settle"), config.grid.size());
    const auto shaped =
        load_profile_csv(require_artifact(config, artifacts::kAggregateShaped, "shape", "settle"), config.grid.size());
    const auto altered =
        load_profile_csv(require_artifact(config, artifacts::kAggregateAltered, "alter", "settle"), config.grid.size());
    const json meta = json::parse(read_text_file(require_artifact(config, artifacts::kAlterMeta, "alter", "settle")));

    std::optional<std::size_t> t0;
    if (!meta.at("t0").is_null()) t0 = meta.at("t0").get<std::size_t>();
    const MarketDay market = load_market(config, target);
    CostChainReport report =
        make_cost_chain_report(uncoordinated, shaped, altered, market, t0, meta.at("lambda").get<double>());

    std::ostringstream kv, table;
    write_key_value(kv, report);
    write_cost_table(table, report);
    write_text_file(config.output_dir / artifacts::kCostChainText, kv.str());
    write_text_file(config.output_dir / artifacts::kCostChainCsv, table.str());

    json manifest = read_manifest(config);
    stamp(manifest, artifacts::kCostChainText, "cost_chain_kv", "settle");
    stamp(manifest, artifacts::kCostChainCsv, "cost_chain_table", "settle");
    write_manifest(config, std::move(manifest));
    return report;
}

void cmd_report(const ScenarioConfig& config) {
    const auto fleet_csv = require_artifact(config, artifacts::kFleet, "gen", "report");
    const auto household_csv = require_artifact(config, artifacts::kHousehold, "gen", "report");
    const std::size_t h = config.grid.size();
    const auto users = read_fleet(fleet_csv, household_csv, config.grid);
    const auto target = load_profile_csv(require_artifact(config, artifacts::kTarget, "gen", "report"), h);
    const auto uncoordinated =
        load_profile_csv(require_artifact(config, artifacts::kAggregateUncoordinated, "shape", "report"), h);
    const auto shaped = load_profile_csv(require_artifact(config, artifacts::kAggregateShaped, "shape", "report"), h);
    const auto altered = load_profile_csv(require_artifact(config, artifacts::kAggregateAltered, "alter", "report"), h);
    const auto mse_shaping = read_mse_trace(require_artifact(config, artifacts::kMseShaping, "shape", "report"));
    const auto mse_altering = read_mse_trace(require_artifact(config, artifacts::kMseAltering, "alter", "report"));
    require_artifact(config, artifacts::kCostChainText, "settle", "report");

    const fs::path dir = config.output_dir / artifacts::kReportDir;
    fs::create_directories(dir);
    const auto household = household_total(users, h);

    {
        std::ostringstream out;
        out << "series,slot,kwh\n";
        auto emit = [&](const char* name, const std::vector<double>& v) {
            for (std::size_t t = 0; t < h; ++t) out << name << ',' << t << ',' << format_double(v[t]) << '\n';
        };
        emit("household", household);
        emit("uncoordinated", uncoordinated);
        emit("target", target);
        emit("shaped", shaped);
        emit("altered", altered);
        write_text_file(dir / artifacts::kReportAggregate, out.str());
    }
    {
        std::ostringstream out;
        out << "slot,connected_pevs\n";
        const auto counts = availability_histogram(users, h);
        for (std::size_t t = 0; t < h; ++t) out << t << ',' << counts[t] << '\n';
        write_text_file(dir / artifacts::kReportAvailability, out.str());
    }
    {
        std::ostringstream out;
        out << "phase,sweep,mse_kwh2\n";
        for (std::size_t k = 0; k < mse_shaping.size(); ++k)
            out << "shaping," << k + 1 << ',' << format_double(mse_shaping[k]) << '\n';
        for (std::size_t k = 0; k < mse_altering.size(); ++k)
            out << "altering," << k + 1 << ',' << format_double(mse_altering[k]) << '\n';
        write_text_file(dir / artifacts::kReportMse, out.str());
    }
    {
        const MarketDay market = load_market(config, target);
        std::ostringstream out;
        out << "stage,slot,imbalance_kwh,da_cost_usd,rt_cost_usd\n";
        auto emit = [&](const char* stage, const std::vector<double>& agg) {
            const Settlement s = settle(agg, market);
            for (std::size_t t = 0; t < h; ++t)
                out << stage << ',' << t << ',' << format_double(s.imbalance_kwh[t]) << ','
                    << format_double(s.da_cost_per_slot_usd[t]) << ',' << format_double(s.rt_cost_per_slot_usd[t])
                    << '\n';
        };
        emit("uncoordinated", uncoordinated);
        emit("after_p1", shaped);
        emit("after_p2", altered);
        write_text_file(dir / artifacts::kReportSlotCosts, out.str());
    }
}

}  // namespace gridshaper
