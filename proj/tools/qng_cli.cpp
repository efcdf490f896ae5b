// Command-line front end: thresholds, certification, thermal depths, channel
// sweeps, sensing reports, Rabi fits, ladder simulation and Wigner profiles.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "phonon/io.hpp"
#include "phonon/prep.hpp"
#include "phonon/qng.hpp"
#include "phonon/rabi.hpp"
#include "phonon/sensing.hpp"
#include "phonon/thermal.hpp"
#include "phonon/version.hpp"
#include "phonon/wigner.hpp"

namespace {

using namespace phonon;

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

// Angular frequencies demand an explicit unit: "69.7kHz*2pi", "2pi*0.054kHz"
// or "437e3rad/s".
double parse_angular_frequency(std::string text) {
    auto strip = [&](const std::string& token, bool anywhere = false) {
        auto pos = anywhere ? text.find(token) : text.rfind(token);
        if (pos == std::string::npos) return false;
        if (!anywhere && pos + token.size() != text.size()) return false;
        text.erase(pos, token.size());
        return true;
    };
    bool two_pi = strip("*2pi") || strip("2pi*", true);
    double scale = 1.0;
    if (strip("kHz")) scale = 1e3;
    else if (strip("MHz")) scale = 1e6;
    else if (strip("Hz")) scale = 1.0;
    else if (strip("rad/s")) {
        if (two_pi) throw io::ParseError("rad/s does not combine with 2pi");
        scale = 0.0;  // marker: already angular
    } else {
        throw io::ParseError("frequency '" + text + "' needs a unit: kHz*2pi, Hz*2pi or rad/s");
    }
    std::size_t used = 0;
    double value = std::stod(text, &used);
    if (used != text.size()) throw io::ParseError("malformed frequency number: " + text);
    if (scale == 0.0) return value;
    if (!two_pi) throw io::ParseError("plain Hz frequencies must carry *2pi to fix the convention");
    return kTwoPi * value * scale;
}

double parse_duration_seconds(std::string text) {
    double scale = -1.0;
    auto strip = [&](const std::string& token, double s) {
        if (text.size() > token.size() && text.rfind(token) == text.size() - token.size()) {
            text.erase(text.size() - token.size());
            scale = s;
            return true;
        }
        return false;
    };
    strip("ns", 1e-9) || strip("us", 1e-6) || strip("ms", 1e-3) || strip("s", 1.0);
    if (scale < 0.0) throw io::ParseError("duration '" + text + "' needs a unit: ns, us, ms or s");
    std::size_t used = 0;
    double value = std::stod(text, &used);
    if (used != text.size()) throw io::ParseError("malformed duration number: " + text);
    return value * scale;
}

std::pair<int, int> parse_range(const std::string& text) {
    auto dots = text.find("..");
    if (dots == std::string::npos) {
        int n = std::stoi(text);
        return {n, n};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
}

std::string cache_path() {
    const char* dir = std::getenv("QNG_CACHE_DIR");
    if (!dir) return {};
    std::filesystem::create_directories(dir);
    return std::string(dir) + "/thresholds.json";
}

void load_table(qng::ThresholdTable& table) {
    auto path = cache_path();
    if (!path.empty() && std::filesystem::exists(path)) io::load_threshold_table(path, table);
}

void store_table(const qng::ThresholdTable& table) {
    auto path = cache_path();
    if (!path.empty()) io::save_threshold_table(table, path);
}

io::RunManifest manifest_for(const std::string& command, std::uint64_t seed) {
    io::RunManifest manifest;
    manifest.command = command;
    manifest.version = kVersion;
    manifest.seed = seed;
    return manifest;
}

void emit(io::RunManifest& manifest, const std::string& path, const std::string& content) {
    io::write_file(path, content);
    manifest.outputs.push_back(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phonon-number quantum non-Gaussianity toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::uint64_t seed = 20240811u;
    app.add_option("--seed", seed, "Seed for every randomized routine");

    // thresholds ------------------------------------------------------------
    auto* cmd_thresholds = app.add_subcommand("thresholds", "Genuine and basic QNG thresholds");
    std::string range = "1..6", kind = "both", out_path = "thresholds.json";
    int restarts = 24;
    cmd_thresholds->add_option("--n", range, "Order or range, e.g. 3 or 1..6");
    cmd_thresholds->add_option("--kind", kind, "genuine | basic | both")
        ->check(CLI::IsMember({"genuine", "basic", "both"}));
    cmd_thresholds->add_option("--restarts", restarts, "Multistart count for the basic solver");
    cmd_thresholds->add_option("--out", out_path, "Output JSON table");

    // certify ----------------------------------------------------------------
    auto* cmd_certify = app.add_subcommand("certify", "Certify a distribution against p̄_n");
    std::string dist_path;
    int certify_n = 1;
    std::string certify_out;
    cmd_certify->add_option("--dist", dist_path, "Distribution JSON")->required();
    cmd_certify->add_option("--n", certify_n, "Criterion order")->required();
    cmd_certify->add_option("--out", certify_out, "Optional output file (default stdout)");

    // depth -------------------------------------------------------------------
    auto* cmd_depth = app.add_subcommand("depth", "Thermal depth of a criterion");
    int depth_fock = -1;
    std::string depth_dist, depth_criterion = "genuine", depth_out = "depth.json";
    cmd_depth->add_option("--fock", depth_fock, "Ideal Fock state |n>");
    cmd_depth->add_option("--dist", depth_dist, "Distribution JSON (alternative to --fock)");
    cmd_depth->add_option("--n", certify_n, "Criterion order (defaults to --fock)");
    cmd_depth->add_option("--criterion", depth_criterion, "genuine | basic | wigner")
        ->check(CLI::IsMember({"genuine", "basic", "wigner"}));
    cmd_depth->add_option("--out", depth_out, "Output JSON");

    // thermalize ---------------------------------------------------------------
    auto* cmd_thermalize = app.add_subcommand("thermalize", "Gaussian additive channel");
    std::string th_dist, th_tau, th_sweep, th_out = "thermalized.json";
    double th_nbar = -1.0;
    double recoil_rate = 115e3;
    cmd_thermalize->add_option("--dist", th_dist, "Distribution JSON")->required();
    cmd_thermalize->add_option("--nbar", th_nbar, "Mean added thermal phonons");
    cmd_thermalize->add_option("--tau", th_tau, "Recoil pulse duration (e.g. 12.8us)");
    cmd_thermalize->add_option("--recoil-rate", recoil_rate, "Recoil calibration, phonons/s");
    cmd_thermalize->add_option("--nbar-sweep", th_sweep, "Sweep LO:HI:STEPS, emits CSV");
    cmd_thermalize->add_option("--out", th_out, "Output file (.json, or .csv for sweeps)");

    // sense ----------------------------------------------------------------------
    auto* cmd_sense = app.add_subcommand("sense", "Fisher information sweep");
    std::string se_dist, se_grid = "default", se_out = "sensing.csv", se_json;
    long se_shots = 1;
    cmd_sense->add_option("--dist", se_dist, "Distribution JSON")->required();
    cmd_sense->add_option("--grid", se_grid, "default or LO:HI:POINTS (log spaced)");
    cmd_sense->add_option("--shots", se_shots, "Sensing runs N");
    cmd_sense->add_option("--out", se_out, "Output CSV");
    cmd_sense->add_option("--json", se_json, "Optional JSON twin");

    // advantage ---------------------------------------------------------------
    auto* cmd_advantage = app.add_subcommand("advantage", "Metrological advantage thresholds");
    std::string adv_range = "1..10", adv_out = "advantage.json";
    cmd_advantage->add_option("--n", adv_range, "Order or range");
    cmd_advantage->add_option("--out", adv_out, "Output JSON keyed by n");

    // fit -----------------------------------------------------------------------
    auto* cmd_fit = app.add_subcommand("fit", "Fit phonon populations from a Rabi trace");
    std::string fit_trace, fit_out = "populations.json";
    std::string fit_omega = "69.7kHz*2pi", fit_gamma = "0.054kHz*2pi";
    double fit_eta = 0.0632, fit_x = 0.7;
    int fit_nmax = -1, fit_target = -1, fit_mc = 0;
    cmd_fit->add_option("--trace", fit_trace, "Rabi CSV (time_us,p_g,shots)")->required();
    cmd_fit->add_option("--omega-c", fit_omega, "Carrier Rabi frequency (unit required)");
    cmd_fit->add_option("--eta", fit_eta, "Lamb-Dicke parameter");
    cmd_fit->add_option("--gamma0", fit_gamma, "Base decay rate (unit required)");
    cmd_fit->add_option("--x", fit_x, "Decay exponent");
    cmd_fit->add_option("--n-max", fit_nmax, "Highest fitted state");
    cmd_fit->add_option("--target", fit_target, "Target |N>; implies n-max = N+2");
    cmd_fit->add_option("--mc", fit_mc, "Projection-noise Monte-Carlo draws");
    cmd_fit->add_option("--out", fit_out, "Output distribution JSON");

    // simulate --------------------------------------------------------------------
    auto* cmd_simulate = app.add_subcommand("simulate", "Pi-pulse ladder preparation");
    int sim_target = 1;
    double sim_heating = 2.7, sim_p0 = 0.97, sim_eff = 1.0;
    std::string sim_omega = "69.7kHz*2pi";
    double sim_eta = 0.0632;
    bool sim_heat_at_end = false;
    std::string sim_out = "prepared.json";
    cmd_simulate->add_option("--target", sim_target, "Target Fock state")->required();
    cmd_simulate->add_option("--heating", sim_heating, "Heating rate, phonons/s");
    cmd_simulate->add_option("--p0", sim_p0, "Ground-state preparation fidelity");
    cmd_simulate->add_option("--efficiency", sim_eff, "Population transfer per pulse");
    cmd_simulate->add_option("--omega-c", sim_omega, "Carrier Rabi frequency (unit required)");
    cmd_simulate->add_option("--eta", sim_eta, "Lamb-Dicke parameter");
    cmd_simulate->add_flag("--heat-at-end", sim_heat_at_end,
                           "Apply all heating after the ladder instead of per pulse");
    cmd_simulate->add_option("--out", sim_out, "Output distribution JSON");

    // wigner -------------------------------------------------------------------
    auto* cmd_wigner = app.add_subcommand("wigner", "Radial Wigner profile");
    std::string wig_dist, wig_out = "wigner.csv";
    int wig_samples = 2000;
    bool wig_annuli = false;
    cmd_wigner->add_option("--dist", wig_dist, "Distribution JSON")->required();
    cmd_wigner->add_option("--samples", wig_samples, "Radial samples");
    cmd_wigner->add_flag("--annuli", wig_annuli, "Print the negative-annuli count");
    cmd_wigner->add_option("--out", wig_out, "Output CSV (s,W)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_thresholds) {
            auto manifest = manifest_for("thresholds", seed);
            manifest.parameters = {{"n", range}, {"kind", kind}, {"restarts", std::to_string(restarts)}};
            auto [lo, hi] = parse_range(range);
            qng::ThresholdTable table;
            load_table(table);
            for (int n = lo; n <= hi; ++n) {
                if (kind != "basic" && !table.find(n, true))
                    table.put(qng::threshold_genuine(n), true);
                if (kind != "genuine" && !table.find(n, false))
                    table.put(qng::threshold_basic(n, restarts, seed), false);
            }
            store_table(table);
            emit(manifest, out_path, io::threshold_table_to_json(table));
            io::write_manifest(manifest, out_path);
        } else if (*cmd_certify) {
            auto manifest = manifest_for("certify", seed);
            manifest.parameters = {{"n", std::to_string(certify_n)}};
            manifest.inputs.push_back(dist_path);
            auto dist = io::load_distribution(dist_path);
            qng::ThresholdTable table;
            load_table(table);
            auto result = qng::certify(dist, certify_n, table);
            store_table(table);
            auto text = io::certification_to_json(result);
            if (certify_out.empty()) {
                std::cout << text;
            } else {
                emit(manifest, certify_out, text);
                io::write_manifest(manifest, certify_out);
            }
        } else if (*cmd_depth) {
            auto manifest = manifest_for("depth", seed);
            PhononDistribution dist = depth_dist.empty()
                                          ? PhononDistribution::fock(std::max(depth_fock, 0))
                                          : io::load_distribution(depth_dist);
            if (!depth_dist.empty()) manifest.inputs.push_back(depth_dist);
            int n = cmd_depth->count("--n") ? certify_n : std::max(depth_fock, 1);
            manifest.parameters = {{"criterion", depth_criterion}, {"n", std::to_string(n)}};
            thermal::DepthReport report;
            if (depth_criterion == "wigner") {
                if (depth_dist.empty() == false)
                    throw DomainError("wigner depth is defined for ideal Fock states (--fock)");
                report = wigner::negativity_depth(depth_fock);
            } else {
                qng::ThresholdTable table;
            load_table(table);
                bool genuine = depth_criterion == "genuine";
                auto criterion = [&](const PhononDistribution& d) {
                    auto padded = d.truncation() >= n ? d : d.with_truncation(n);
                    auto v = qng::certify(padded, n, table);
                    return genuine ? v.genuine : v.basic;
                };
                report = thermal::thermal_depth(
                    dist, n,
                    genuine ? thermal::DepthCriterion::genuine : thermal::DepthCriterion::basic,
                    criterion);
                store_table(table);
            }
            emit(manifest, depth_out, io::depth_report_to_json(report));
            io::write_manifest(manifest, depth_out);
        } else if (*cmd_thermalize) {
            auto manifest = manifest_for("thermalize", seed);
            manifest.inputs.push_back(th_dist);
            auto dist = io::load_distribution(th_dist);
            if (!th_sweep.empty()) {
                auto first = th_sweep.find(':'), second = th_sweep.rfind(':');
                if (first == std::string::npos || second == first)
                    throw io::ParseError("--nbar-sweep expects LO:HI:STEPS");
                double lo = std::stod(th_sweep.substr(0, first));
                double hi = std::stod(th_sweep.substr(first + 1, second - first - 1));
                int steps = std::stoi(th_sweep.substr(second + 1));
                manifest.parameters = {{"nbar-sweep", th_sweep}};
                std::vector<double> nbars;
                std::vector<PhononDistribution> outputs;
                for (int i = 0; i < steps; ++i) {
                    double nbar = lo + (hi - lo) * double(i) / std::max(steps - 1, 1);
                    nbars.push_back(nbar);
                    outputs.push_back(thermal::gaussian_additive(dist, nbar));
                }
                emit(manifest, th_out, io::channel_sweep_to_csv(nbars, outputs));
            } else {
                double nbar = th_nbar;
                if (!th_tau.empty())
                    nbar = thermal::pulse_to_nbar(parse_duration_seconds(th_tau), recoil_rate);
                if (nbar < 0.0) throw io::ParseError("provide --nbar, --tau or --nbar-sweep");
                manifest.parameters = {{"nbar", io::format_double(nbar)}};
                emit(manifest, th_out,
                     io::distribution_to_json(thermal::gaussian_additive(dist, nbar)));
            }
            io::write_manifest(manifest, th_out);
        } else if (*cmd_sense) {
            auto manifest = manifest_for("sense", seed);
            manifest.inputs.push_back(se_dist);
            manifest.parameters = {{"grid", se_grid}, {"shots", std::to_string(se_shots)}};
            auto dist = io::load_distribution(se_dist);
            std::vector<double> grid;
            if (se_grid == "default") {
                grid = sensing::default_u_grid();
            } else {
                auto first = se_grid.find(':'), second = se_grid.rfind(':');
                if (first == std::string::npos || second == first)
                    throw io::ParseError("--grid expects default or LO:HI:POINTS");
                double lo = std::stod(se_grid.substr(0, first));
                double hi = std::stod(se_grid.substr(first + 1, second - first - 1));
                int points = std::stoi(se_grid.substr(second + 1));
                for (int i = 0; i < points; ++i)
                    grid.push_back(lo * std::pow(hi / lo, double(i) / std::max(points - 1, 1)));
            }
            auto report = sensing::sensing_report(dist, grid, se_shots);
            emit(manifest, se_out, io::sensing_report_to_csv(report));
            if (!se_json.empty()) emit(manifest, se_json, io::sensing_report_to_json(report));
            io::write_manifest(manifest, se_out);
        } else if (*cmd_advantage) {
            auto manifest = manifest_for("advantage", seed);
            manifest.parameters = {{"n", adv_range}};
            auto [lo, hi] = parse_range(adv_range);
            std::map<int, double> thresholds;
            for (int n = lo; n <= hi; ++n) thresholds[n] = sensing::advantage_threshold(n);
            emit(manifest, adv_out, io::advantage_table_to_json(thresholds));
            io::write_manifest(manifest, adv_out);
        } else if (*cmd_fit) {
            auto manifest = manifest_for("fit", seed);
            manifest.inputs.push_back(fit_trace);
            auto trace = io::load_rabi_trace(fit_trace);
            rabi::RabiConfig cfg;
            cfg.omega_c = parse_angular_frequency(fit_omega);
            cfg.eta = fit_eta;
            cfg.gamma0 = parse_angular_frequency(fit_gamma);
            cfg.x = fit_x;
            cfg.shots = trace.shots;
            int n_max = fit_nmax;
            if (fit_target >= 0) n_max = rabi::fit_nmax_for_target(fit_target);
            if (n_max < 1) throw io::ParseError("provide --n-max or --target");
            manifest.parameters = {{"omega_c", fit_omega}, {"eta", io::format_double(fit_eta)},
                                   {"gamma0", fit_gamma},  {"x", io::format_double(fit_x)},
                                   {"n_max", std::to_string(n_max)}};
            auto fit = rabi::fit_populations(trace, cfg, n_max);
            auto dist = fit.populations;
            dist.meta["ssr"] = io::format_double(fit.ssr);
            if (fit_mc > 0) {
                auto mc = rabi::mc_uncertainty(trace, cfg, n_max, fit_mc, seed);
                for (std::size_t i = 0; i < mc.sigma.size(); ++i)
                    dist.meta["sigma_P" + std::to_string(i)] = io::format_double(mc.sigma[i]);
                dist.meta["mc_failed_draws"] = std::to_string(mc.failed_draws);
            }
            emit(manifest, fit_out, io::distribution_to_json(dist));
            io::write_manifest(manifest, fit_out);
        } else if (*cmd_simulate) {
            auto manifest = manifest_for("simulate", seed);
            prep::PrepConfig cfg;
            cfg.n_target = sim_target;
            cfg.heating_rate = sim_heating;
            cfg.p0_init = sim_p0;
            cfg.pulse_efficiency = sim_eff;
            cfg.rabi.omega_c = parse_angular_frequency(sim_omega);
            cfg.rabi.eta = sim_eta;
            cfg.heat_per_pulse = !sim_heat_at_end;
            manifest.parameters = {{"target", std::to_string(sim_target)},
                                   {"heating", io::format_double(sim_heating)},
                                   {"p0", io::format_double(sim_p0)},
                                   {"efficiency", io::format_double(sim_eff)},
                                   {"heat_per_pulse", cfg.heat_per_pulse ? "true" : "false"}};
            auto dist = prep::ladder_prepare(cfg);
            dist.meta["target"] = std::to_string(sim_target);
            dist.meta["sequence_duration_s"] = io::format_double(prep::sequence_duration(cfg));
            emit(manifest, sim_out, io::distribution_to_json(dist));
            io::write_manifest(manifest, sim_out);
        } else if (*cmd_wigner) {
            auto manifest = manifest_for("wigner", seed);
            manifest.inputs.push_back(wig_dist);
            auto dist = io::load_distribution(wig_dist);
            auto grid = wigner::default_radial_grid(dist.truncation(), wig_samples);
            auto profile = wigner::wigner_radial(dist, grid);
            manifest.parameters = {{"samples", std::to_string(wig_samples)}};
            if (wig_annuli)
                std::cout << "negative_annuli " << wigner::count_negative_annuli(profile) << "\n";
            emit(manifest, wig_out, io::radial_wigner_to_csv(profile));
            io::write_manifest(manifest, wig_out);
        }
    } catch (const io::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
