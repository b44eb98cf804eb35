#include "eecmdp/scenario.hpp"

#include "eecmdp/config.hpp"
#include "eecmdp/errors.hpp"
#include "eecmdp/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <sstream>

namespace eecmdp {

namespace {

std::int64_t checked_pow(std::int64_t base, int exp, const char* what) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && r > std::numeric_limits<std::int64_t>::max() / base / 4)
            throw ConfigError(std::string(what) +
                              " overflows a 64-bit count; shrink bins/power_levels or L/K");
        r *= base;
    }
    return r;
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

// One power quantity that the config may give in mW or dBm, not both.
void read_power_mw(const ConfigFile& cf, const std::string& section, const std::string& base,
                   double& out) {
    double mw = 0.0, dbm = 0.0;
    bool has_mw = cf.get_double(section, base + "_mw", mw);
    bool has_dbm = cf.get_double(section, base + "_dbm", dbm);
    if (has_mw && has_dbm)
        throw ConfigError("[" + section + "] gives both " + base + "_mw and " + base +
                          "_dbm; pick one");
    if (has_mw) out = mw;
    if (has_dbm) out = dbm_to_mw(dbm);
}

void read_int(const ConfigFile& cf, const std::string& section, const std::string& key,
              int& out) {
    long long v;
    if (cf.get_int(section, key, v)) {
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
            throw ConfigError("[" + section + "] " + key + " out of range");
        out = static_cast<int>(v);
    }
}

} // namespace

double Scenario::noise_variance_w() const { return std::pow(10.0, (noise_dbm - 30.0) / 10.0); }

std::int64_t Scenario::num_states() const {
    return checked_pow(bins, num_links(), "state count bins^(L^2 K^2)");
}

std::int64_t Scenario::num_actions() const {
    return checked_pow(power_levels, num_uts_total(), "action count power_levels^(L K)");
}

double Scenario::model_bytes() const {
    double s = static_cast<double>(num_states());
    double a = static_cast<double>(num_actions());
    // transition matrix + reward table + Lagrangian scratch + one cost
    // table per UT, all dense doubles
    return 8.0 * (s * s + s * a * (2.0 + num_uts_total()));
}

Scenario scenario_from_config(const ConfigFile& cf) {
    Scenario s;
    std::string str;

    read_int(cf, "system", "num_cells", s.num_cells);
    read_int(cf, "system", "uts_per_cell", s.uts_per_cell);
    read_int(cf, "system", "antennas", s.num_antennas);

    cf.get_double("channel", "pathloss_exponent", s.pathloss_exponent);
    cf.get_double("channel", "pathloss_constant", s.pathloss_constant);
    cf.get_double("channel", "shadow_variance_db", s.shadow_variance_db);
    cf.get_double("channel", "noise_dbm", s.noise_dbm);
    bool bins_given = false;
    {
        long long v;
        if (cf.get_int("channel", "bins", v)) {
            if (v < 1 || v > std::numeric_limits<int>::max())
                throw ConfigError("[channel] bins out of range");
            s.bins = static_cast<int>(v);
            bins_given = true;
        }
    }
    if (cf.get_string("channel", "thresholds", str)) {
        s.threshold_grid.clear();
        std::istringstream ts(str);
        std::string tok;
        while (std::getline(ts, tok, ',')) {
            double v = 0.0;
            auto b = tok.find_first_not_of(" \t");
            auto e = tok.find_last_not_of(" \t");
            if (b == std::string::npos)
                throw ConfigError("thresholds contains an empty entry");
            tok = tok.substr(b, e - b + 1);
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc{} || p != tok.data() + tok.size())
                throw ConfigError("thresholds entry is not a number: '" + tok + "'");
            s.threshold_grid.push_back(v);
        }
        if (bins_given && s.bins != static_cast<int>(s.threshold_grid.size()) + 1)
            throw ConfigError("bins disagrees with thresholds (expected " +
                              std::to_string(s.threshold_grid.size() + 1) + ")");
        s.bins = static_cast<int>(s.threshold_grid.size()) + 1;
    }
    cf.get_double("channel", "normalized_doppler", s.normalized_doppler);

    read_power_mw(cf, "power", "power_min", s.power_min_mw);
    read_power_mw(cf, "power", "power_max", s.power_max_mw);
    read_int(cf, "power", "power_levels", s.power_levels);
    if (cf.get_string("power", "power_spacing", str)) {
        if (str == "logarithmic")
            s.power_spacing = GridSpacing::logarithmic;
        else if (str == "linear")
            s.power_spacing = GridSpacing::linear;
        else
            throw ConfigError("power_spacing must be 'logarithmic' or 'linear', got '" + str +
                              "'");
    }
    read_power_mw(cf, "power", "circuit_power", s.circuit_power_mw);
    read_power_mw(cf, "power", "power_cap", s.power_cap_mw);

    cf.get_double("solver", "discount", s.discount);
    cf.get_double("solver", "r_min", s.r_min);
    cf.get_double("solver", "epsilon", s.epsilon);
    cf.get_double("solver", "rho_init", s.rho_init);
    read_int(cf, "solver", "max_inner_iters", s.max_inner_iters);
    read_int(cf, "solver", "max_outer_iters", s.max_outer_iters);
    cf.get_bool("solver", "strict_restart", s.strict_restart);
    cf.get_bool("solver", "normalize_by_horizon", s.normalize_by_horizon);
    cf.get_double("solver", "rho_ceiling", s.rho_ceiling);
    cf.get_double("solver", "feasibility_tol", s.feasibility_tol);
    if (cf.get_string("solver", "initial_state", str)) {
        if (str == "steady_average") {
            s.initial_state.reset();
        } else {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(str.data(), str.data() + str.size(), v);
            if (ec != std::errc{} || p != str.data() + str.size())
                throw ConfigError("initial_state must be a state index or 'steady_average', got '" +
                                  str + "'");
            s.initial_state = v;
        }
    }

    cf.get_double("geometry", "bs_spacing_m", s.geometry.bs_spacing_m);
    cf.get_double("geometry", "cell_radius_m", s.geometry.cell_radius_m);
    cf.get_double("geometry", "min_ut_distance_m", s.geometry.min_ut_distance_m);

    if (cf.get_string("baseline", "feasibility_rule", str)) {
        if (str == "none")
            s.baseline_rule = FeasibilityRule::none;
        else if (str == "per_slot_rate")
            s.baseline_rule = FeasibilityRule::per_slot_rate;
        else
            throw ConfigError("feasibility_rule must be 'none' or 'per_slot_rate', got '" +
                              str + "'");
    }
    cf.get_double("baseline", "r_inst", s.baseline_r_inst);

    cf.get_uint64("run", "seed", s.seed);
    if (cf.get_string("run", "reward_mode", str)) {
        if (str == "representative")
            s.reward_mode = RewardMode::representative;
        else if (str == "monte_carlo" || str == "monte-carlo")
            s.reward_mode = RewardMode::monte_carlo;
        else
            throw ConfigError("reward_mode must be 'representative' or 'monte_carlo', got '" +
                              str + "'");
    }
    read_int(cf, "run", "mc_samples", s.mc_samples);
    cf.get_double("run", "memory_budget_mb", s.memory_budget_mb);
    if (cf.get_string("run", "csv_timing", str)) {
        if (str == "none")
            s.csv_timing = CsvTiming::none;
        else if (str == "real")
            s.csv_timing = CsvTiming::real;
        else
            throw ConfigError("csv_timing must be 'none' or 'real', got '" + str + "'");
    }

    return s;
}

Scenario parse_scenario(std::istream& in, const std::string& origin) {
    ConfigFile cf = ConfigFile::read(in, origin);
    Scenario s = scenario_from_config(cf);
    cf.reject_unconsumed();
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    ConfigFile cf = ConfigFile::read_file(path);
    Scenario s = scenario_from_config(cf);
    cf.reject_unconsumed();
    validate_scenario(s);
    return s;
}

void validate_scenario(const Scenario& s) {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(s.num_cells >= 1, "num_cells must be >= 1");
    require(s.uts_per_cell >= 1, "uts_per_cell must be >= 1");
    require(s.num_antennas > s.uts_per_cell,
            "antennas must exceed uts_per_cell (zero-forcing needs M > K)");
    require(std::isfinite(s.pathloss_exponent) && s.pathloss_exponent > 0,
            "pathloss_exponent must be positive");
    require(std::isfinite(s.pathloss_constant) && s.pathloss_constant > 0,
            "pathloss_constant must be positive");
    require(std::isfinite(s.shadow_variance_db) && s.shadow_variance_db >= 0,
            "shadow_variance_db must be >= 0");
    require(std::isfinite(s.noise_dbm), "noise_dbm must be finite");
    require(s.bins >= 1, "bins must be >= 1");
    if (!s.threshold_grid.empty()) {
        require(s.bins == static_cast<int>(s.threshold_grid.size()) + 1,
                "bins must equal thresholds count + 1");
        double prev = 0.0;
        for (double t : s.threshold_grid) {
            require(std::isfinite(t) && t > prev,
                    "thresholds must be finite, positive and strictly increasing");
            prev = t;
        }
    }
    require(std::isfinite(s.normalized_doppler) && s.normalized_doppler > 0,
            "normalized_doppler must be positive");
    require(std::isfinite(s.power_min_mw) && s.power_min_mw > 0, "power_min must be positive");
    require(std::isfinite(s.power_max_mw) && s.power_max_mw >= s.power_min_mw,
            "power_max must be >= power_min");
    require(s.power_levels >= 1, "power_levels must be >= 1");
    require(s.power_levels == 1 || s.power_max_mw > s.power_min_mw,
            "power_levels > 1 needs power_max > power_min");
    require(std::isfinite(s.circuit_power_mw) && s.circuit_power_mw > 0,
            "circuit_power must be positive");
    require(std::isfinite(s.power_cap_mw) && s.power_cap_mw >= 0,
            "power_cap must be >= 0 (0 disables the cap)");
    require(!s.has_power_cap() || s.power_cap_mw >= s.power_min_mw,
            "power_cap lies below power_min; no transmit level is usable");
    require(s.discount > 0 && s.discount < 1, "discount must lie in (0, 1)");
    require(std::isfinite(s.r_min) && s.r_min >= 0, "r_min must be >= 0");
    require(std::isfinite(s.epsilon) && s.epsilon > 0, "epsilon must be positive");
    require(std::isfinite(s.rho_init) && s.rho_init >= 0, "rho_init must be >= 0");
    require(s.max_inner_iters >= 1, "max_inner_iters must be >= 1");
    require(s.max_outer_iters >= 1, "max_outer_iters must be >= 1");
    require(std::isfinite(s.rho_ceiling) && s.rho_ceiling > 0, "rho_ceiling must be positive");
    require(std::isfinite(s.feasibility_tol) && s.feasibility_tol >= 0,
            "feasibility_tol must be >= 0");
    require(std::isfinite(s.baseline_r_inst) && s.baseline_r_inst >= 0,
            "r_inst must be >= 0");
    require(s.mc_samples >= 1, "mc_samples must be >= 1");
    require(std::isfinite(s.memory_budget_mb) && s.memory_budget_mb > 0,
            "memory_budget_mb must be positive");
    require(s.geometry.bs_spacing_m > 0, "bs_spacing_m must be positive");
    require(s.geometry.cell_radius_m > 0, "cell_radius_m must be positive");
    require(s.geometry.min_ut_distance_m > 0, "min_ut_distance_m must be positive");
    require(s.geometry.min_ut_distance_m < s.geometry.cell_radius_m,
            "min_ut_distance_m must be below cell_radius_m");

    std::int64_t ns = s.num_states(); // also triggers the overflow check
    if (s.initial_state && (*s.initial_state < 0 || *s.initial_state >= ns)) {
        std::ostringstream os;
        os << "initial_state " << *s.initial_state << " outside [0, " << ns << ")";
        throw ConfigError(os.str());
    }
    double bytes = s.model_bytes();
    double budget = s.memory_budget_mb * 1024.0 * 1024.0;
    if (bytes > budget) {
        std::ostringstream os;
        os << "model needs " << static_cast<std::uint64_t>(bytes) << " bytes ("
           << s.num_states() << " states x " << s.num_actions()
           << " actions) but memory_budget_mb allows " << static_cast<std::uint64_t>(budget);
        throw ConfigError(os.str());
    }
    if (s.num_antennas <= s.uts_per_cell * s.num_cells)
        std::cerr << "warning: antennas (" << s.num_antennas
                  << ") does not exceed total UTs (" << s.uts_per_cell * s.num_cells
                  << "); far outside the intended large-antenna regime\n";
}

std::string dump_scenario(const Scenario& s) {
    std::ostringstream os;
    os << "[system]\n";
    os << "num_cells = " << s.num_cells << "\n";
    os << "uts_per_cell = " << s.uts_per_cell << "\n";
    os << "antennas = " << s.num_antennas << "\n";
    os << "\n[channel]\n";
    os << "pathloss_exponent = " << fmt_double(s.pathloss_exponent) << "\n";
    os << "pathloss_constant = " << fmt_double(s.pathloss_constant) << "\n";
    os << "shadow_variance_db = " << fmt_double(s.shadow_variance_db) << "\n";
    os << "noise_dbm = " << fmt_double(s.noise_dbm) << "\n";
    os << "bins = " << s.bins << "\n";
    if (!s.threshold_grid.empty()) {
        os << "thresholds = ";
        for (size_t i = 0; i < s.threshold_grid.size(); ++i)
            os << (i ? "," : "") << fmt_double(s.threshold_grid[i]);
        os << "\n";
    }
    os << "normalized_doppler = " << fmt_double(s.normalized_doppler) << "\n";
    os << "\n[power]\n";
    os << "power_min_mw = " << fmt_double(s.power_min_mw) << "\n";
    os << "power_max_mw = " << fmt_double(s.power_max_mw) << "\n";
    os << "power_levels = " << s.power_levels << "\n";
    os << "power_spacing = "
       << (s.power_spacing == GridSpacing::logarithmic ? "logarithmic" : "linear") << "\n";
    os << "circuit_power_mw = " << fmt_double(s.circuit_power_mw) << "\n";
    if (s.has_power_cap()) os << "power_cap_mw = " << fmt_double(s.power_cap_mw) << "\n";
    os << "\n[solver]\n";
    os << "discount = " << fmt_double(s.discount) << "\n";
    os << "r_min = " << fmt_double(s.r_min) << "\n";
    os << "epsilon = " << fmt_double(s.epsilon) << "\n";
    os << "rho_init = " << fmt_double(s.rho_init) << "\n";
    os << "max_inner_iters = " << s.max_inner_iters << "\n";
    os << "max_outer_iters = " << s.max_outer_iters << "\n";
    os << "strict_restart = " << (s.strict_restart ? "true" : "false") << "\n";
    os << "normalize_by_horizon = " << (s.normalize_by_horizon ? "true" : "false") << "\n";
    os << "rho_ceiling = " << fmt_double(s.rho_ceiling) << "\n";
    os << "feasibility_tol = " << fmt_double(s.feasibility_tol) << "\n";
    os << "initial_state = ";
    if (s.initial_state)
        os << *s.initial_state << "\n";
    else
        os << "steady_average\n";
    os << "\n[geometry]\n";
    os << "bs_spacing_m = " << fmt_double(s.geometry.bs_spacing_m) << "\n";
    os << "cell_radius_m = " << fmt_double(s.geometry.cell_radius_m) << "\n";
    os << "min_ut_distance_m = " << fmt_double(s.geometry.min_ut_distance_m) << "\n";
    os << "\n[baseline]\n";
    os << "feasibility_rule = "
       << (s.baseline_rule == FeasibilityRule::none ? "none" : "per_slot_rate") << "\n";
    os << "r_inst = " << fmt_double(s.baseline_r_inst) << "\n";
    os << "\n[run]\n";
    os << "seed = " << s.seed << "\n";
    os << "reward_mode = "
       << (s.reward_mode == RewardMode::representative ? "representative" : "monte_carlo")
       << "\n";
    os << "mc_samples = " << s.mc_samples << "\n";
    os << "memory_budget_mb = " << fmt_double(s.memory_budget_mb) << "\n";
    os << "csv_timing = " << (s.csv_timing == CsvTiming::none ? "none" : "real") << "\n";
    return os.str();
}

std::uint64_t scenario_hash(const Scenario& s) {
    std::string text = dump_scenario(s);
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string scenario_hash_hex(const Scenario& s) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(scenario_hash(s)));
    return std::string(buf);
}

bool operator==(const Scenario& a, const Scenario& b) {
    return a.num_cells == b.num_cells && a.uts_per_cell == b.uts_per_cell &&
           a.num_antennas == b.num_antennas && a.pathloss_exponent == b.pathloss_exponent &&
           a.pathloss_constant == b.pathloss_constant &&
           a.shadow_variance_db == b.shadow_variance_db && a.noise_dbm == b.noise_dbm &&
           a.bins == b.bins && a.threshold_grid == b.threshold_grid &&
           a.normalized_doppler == b.normalized_doppler &&
           a.power_min_mw == b.power_min_mw && a.power_max_mw == b.power_max_mw &&
           a.power_levels == b.power_levels && a.power_spacing == b.power_spacing &&
           a.circuit_power_mw == b.circuit_power_mw && a.power_cap_mw == b.power_cap_mw &&
           a.discount == b.discount &&
           a.r_min == b.r_min && a.epsilon == b.epsilon && a.rho_init == b.rho_init &&
           a.max_inner_iters == b.max_inner_iters && a.max_outer_iters == b.max_outer_iters &&
           a.strict_restart == b.strict_restart &&
           a.normalize_by_horizon == b.normalize_by_horizon && a.rho_ceiling == b.rho_ceiling &&
           a.feasibility_tol == b.feasibility_tol && a.initial_state == b.initial_state &&
           a.baseline_rule == b.baseline_rule && a.baseline_r_inst == b.baseline_r_inst &&
           a.seed == b.seed && a.reward_mode == b.reward_mode && a.mc_samples == b.mc_samples &&
           a.memory_budget_mb == b.memory_budget_mb && a.csv_timing == b.csv_timing &&
           a.geometry.bs_spacing_m == b.geometry.bs_spacing_m &&
           a.geometry.cell_radius_m == b.geometry.cell_radius_m &&
           a.geometry.min_ut_distance_m == b.geometry.min_ut_distance_m;
}

} // namespace eecmdp
