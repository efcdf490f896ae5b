#include "phonon/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace phonon::io {

using nlohmann::json;

std::string format_double(double value) {
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                   std::chars_format::general, 17);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buffer, end);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

// ---------------------------------------------------------------------------
// Distributions.
// ---------------------------------------------------------------------------

std::string distribution_to_json(const PhononDistribution& dist) {
    json j;
    j["probs"] = dist.probs();
    json meta = json::object();
    for (const auto& [k, v] : dist.meta) meta[k] = v;
    j["meta"] = meta;
    return j.dump(2) + "\n";
}

PhononDistribution distribution_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("distribution JSON: ") + e.what());
    }
    if (!j.contains("probs") || !j["probs"].is_array())
        throw ParseError("distribution JSON: missing \"probs\" array");
    std::vector<double> probs;
    for (const auto& v : j["probs"]) {
        if (!v.is_number()) throw ParseError("distribution JSON: non-numeric probability");
        probs.push_back(v.get<double>());
    }
    PhononDistribution dist = PhononDistribution::from_probs(std::move(probs));
    if (j.contains("meta"))
        for (const auto& [k, v] : j["meta"].items()) dist.meta[k] = v.get<std::string>();
    return dist;
}

PhononDistribution load_distribution(const std::string& path) {
    return distribution_from_json(read_file(path));
}

void save_distribution(const PhononDistribution& dist, const std::string& path) {
    write_file(path, distribution_to_json(dist));
}

// ---------------------------------------------------------------------------
// Threshold records.
// ---------------------------------------------------------------------------

namespace {

json record_to_json(const qng::ThresholdRecord& record, bool is_genuine) {
    json j;
    j["n"] = record.n;
    j["criterion"] = is_genuine ? "genuine" : "basic";
    j["p_bar"] = record.p_bar;
    j["method"] = qng::to_string(record.method);
    j["residual_norm"] = record.residual_norm;
    j["dim_used"] = record.dim_used;
    j["argmax"] = {{"alpha_re", record.argmax.alpha.real()},
                   {"alpha_im", record.argmax.alpha.imag()},
                   {"r_re", record.argmax.squeeze.real()},
                   {"r_im", record.argmax.squeeze.imag()},
                   {"core", record.argmax.core}};
    return j;
}

qng::ThresholdRecord record_from_json(const json& j, bool& is_genuine) {
    qng::ThresholdRecord record;
    record.n = j.at("n").get<int>();
    is_genuine = j.at("criterion").get<std::string>() == "genuine";
    record.p_bar = j.at("p_bar").get<double>();
    record.method = qng::method_from_string(j.at("method").get<std::string>());
    record.residual_norm = j.at("residual_norm").get<double>();
    record.dim_used = j.at("dim_used").get<int>();
    const auto& a = j.at("argmax");
    record.argmax.alpha = {a.at("alpha_re").get<double>(), a.at("alpha_im").get<double>()};
    record.argmax.squeeze = {a.at("r_re").get<double>(), a.at("r_im").get<double>()};
    record.argmax.core = a.at("core").get<std::vector<double>>();
    return record;
}

}  // namespace

std::string threshold_table_to_json(const qng::ThresholdTable& table) {
    json arr = json::array();
    for (const auto& [record, is_genuine] : table.records())
        arr.push_back(record_to_json(record, is_genuine));
    return arr.dump(2) + "\n";
}

void threshold_table_from_json(const std::string& text, qng::ThresholdTable& table) {
    json arr;
    try {
        arr = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("threshold table JSON: ") + e.what());
    }
    if (!arr.is_array()) throw ParseError("threshold table JSON: expected an array");
    for (const auto& j : arr) {
        bool is_genuine = false;
        auto record = record_from_json(j, is_genuine);
        table.put(record, is_genuine);
    }
}

void load_threshold_table(const std::string& path, qng::ThresholdTable& table) {
    threshold_table_from_json(read_file(path), table);
}

void save_threshold_table(const qng::ThresholdTable& table, const std::string& path) {
    write_file(path, threshold_table_to_json(table));
}

std::string certification_to_json(const qng::CertificationResult& result) {
    json j;
    j["n"] = result.n;
    j["P_n"] = result.P_n;
    j["p_bar_genuine"] = result.p_bar_genuine;
    j["p_bar_basic"] = result.p_bar_basic;
    j["genuine"] = result.genuine;
    j["basic"] = result.basic;
    j["margin_genuine"] = result.margin_genuine;
    j["margin_basic"] = result.margin_basic;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Depth, sensing, traces.
// ---------------------------------------------------------------------------

namespace {

json depth_to_json_value(const thermal::DepthReport& report) {
    json j;
    j["n"] = report.n;
    j["criterion"] = thermal::to_string(report.criterion);
    j["depth_nbar"] = report.depth_nbar;
    j["bisection_tolerance"] = report.bisection_tolerance;
    return j;
}

}  // namespace

std::string depth_report_to_json(const thermal::DepthReport& report) {
    return depth_to_json_value(report).dump(2) + "\n";
}

std::string depth_reports_to_json(const std::vector<thermal::DepthReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(depth_to_json_value(r));
    return arr.dump(2) + "\n";
}

std::string sensing_report_to_csv(const sensing::SensingReport& report) {
    std::ostringstream out;
    out << "u,fisher,sigma,ratio\n";
    for (std::size_t i = 0; i < report.u_grid.size(); ++i)
        out << format_double(report.u_grid[i]) << ',' << format_double(report.fisher[i]) << ','
            << format_double(report.sigma[i]) << ',' << format_double(report.ratio[i]) << '\n';
    return out.str();
}

std::string sensing_report_to_json(const sensing::SensingReport& report) {
    json j;
    j["u_grid"] = report.u_grid;
    j["fisher"] = report.fisher;
    j["sigma"] = report.sigma;
    j["ratio"] = report.ratio;
    j["shots"] = report.shots;
    return j.dump(2) + "\n";
}

std::string advantage_table_to_json(const std::map<int, double>& thresholds) {
    json j = json::object();
    for (const auto& [n, p] : thresholds) j[std::to_string(n)] = p;
    return j.dump(2) + "\n";
}

std::string rabi_trace_to_csv(const rabi::RabiTrace& trace) {
    std::ostringstream out;
    out << "time_us,p_g,shots\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i)
        out << format_double(trace.times[i] * 1e6) << ',' << format_double(trace.p_g[i]) << ','
            << trace.shots << '\n';
    return out.str();
}

rabi::RabiTrace rabi_trace_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("Rabi CSV: empty file");
    if (line.rfind("time_us", 0) != 0)
        throw ParseError("Rabi CSV: expected header starting with time_us");
    rabi::RabiTrace trace;
    trace.shots = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string t, p, s;
        if (!std::getline(fields, t, ',') || !std::getline(fields, p, ',') ||
            !std::getline(fields, s, ','))
            throw ParseError("Rabi CSV: line " + std::to_string(line_no) + ": expected 3 fields");
        try {
            trace.times.push_back(std::stod(t) * 1e-6);
            trace.p_g.push_back(std::stod(p));
            int shots = std::stoi(s);
            if (trace.shots == 0) trace.shots = shots;
            else if (trace.shots != shots)
                throw ParseError("Rabi CSV: line " + std::to_string(line_no) +
                                 ": shots differ between rows");
        } catch (const std::invalid_argument&) {
            throw ParseError("Rabi CSV: line " + std::to_string(line_no) + ": malformed number");
        }
    }
    trace.validate();
    return trace;
}

rabi::RabiTrace load_rabi_trace(const std::string& path) {
    return rabi_trace_from_csv(read_file(path));
}

std::string channel_sweep_to_csv(const std::vector<double>& nbars,
                                 const std::vector<PhononDistribution>& outputs) {
    if (nbars.size() != outputs.size())
        throw std::invalid_argument("channel_sweep_to_csv: length mismatch");
    int widest = 0;
    for (const auto& d : outputs) widest = std::max(widest, d.truncation());
    std::ostringstream out;
    out << "nbar";
    for (int n = 0; n <= widest; ++n) out << ",P_" << n;
    out << '\n';
    for (std::size_t i = 0; i < nbars.size(); ++i) {
        out << format_double(nbars[i]);
        for (int n = 0; n <= widest; ++n) out << ',' << format_double(outputs[i].p(n));
        out << '\n';
    }
    return out.str();
}

std::string radial_wigner_to_csv(const wigner::RadialWigner& w) {
    std::ostringstream out;
    out << "s,W\n";
    for (std::size_t i = 0; i < w.radii.size(); ++i)
        out << format_double(w.radii[i]) << ',' << format_double(w.values[i]) << '\n';
    return out.str();
}

std::string manifest_to_json(const RunManifest& manifest) {
    json j;
    j["command"] = manifest.command;
    json params = json::object();
    for (const auto& [k, v] : manifest.parameters) params[k] = v;
    j["parameters"] = params;
    j["inputs"] = manifest.inputs;
    j["outputs"] = manifest.outputs;
    j["version"] = manifest.version;
    j["seed"] = manifest.seed;
    return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::string& output_path) {
    write_file(output_path + ".manifest.json", manifest_to_json(manifest));
}

}  // namespace phonon::io
