#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phonon/distribution.hpp"
#include "phonon/qng.hpp"
#include "phonon/rabi.hpp"
#include "phonon/sensing.hpp"
#include "phonon/thermal.hpp"
#include "phonon/wigner.hpp"

namespace phonon::io {

class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// PhononDistribution: {"probs": [..], "meta": {..}}
std::string distribution_to_json(const PhononDistribution& dist);
PhononDistribution distribution_from_json(const std::string& text);
PhononDistribution load_distribution(const std::string& path);
void save_distribution(const PhononDistribution& dist, const std::string& path);

// Threshold table: JSON array of records tagged by criterion kind.
std::string threshold_table_to_json(const qng::ThresholdTable& table);
void threshold_table_from_json(const std::string& text, qng::ThresholdTable& table);
void load_threshold_table(const std::string& path, qng::ThresholdTable& table);
void save_threshold_table(const qng::ThresholdTable& table, const std::string& path);

std::string certification_to_json(const qng::CertificationResult& result);
std::string depth_report_to_json(const thermal::DepthReport& report);
std::string depth_reports_to_json(const std::vector<thermal::DepthReport>& reports);

// SensingReport: CSV columns u,fisher,sigma,ratio and a JSON twin.
std::string sensing_report_to_csv(const sensing::SensingReport& report);
std::string sensing_report_to_json(const sensing::SensingReport& report);

// Advantage thresholds keyed by n.
std::string advantage_table_to_json(const std::map<int, double>& thresholds);

// RabiTrace CSV: header time_us,p_g,shots.
std::string rabi_trace_to_csv(const rabi::RabiTrace& trace);
rabi::RabiTrace rabi_trace_from_csv(const std::string& text);
rabi::RabiTrace load_rabi_trace(const std::string& path);

// Channel sweep rows (nbar, P_0, ..., P_N).
std::string channel_sweep_to_csv(const std::vector<double>& nbars,
                                 const std::vector<PhononDistribution>& outputs);

// RadialWigner CSV: s,W.
std::string radial_wigner_to_csv(const wigner::RadialWigner& w);

/// Provenance of a CLI run; serialized as a sidecar next to every output.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> parameters;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string version;
    std::uint64_t seed = 0;
};
std::string manifest_to_json(const RunManifest& manifest);
void write_manifest(const RunManifest& manifest, const std::string& output_path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Formats a double so the value round-trips exactly.
std::string format_double(double value);

}  // namespace phonon::io
