#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aidr/channel.hpp"

namespace aidr {

enum class Cause : int {
    WiFiNoise = 0,        // A
    FiveGNoise = 1,       // B
    LiFiNoise = 2,        // C
    WiFiThroughput = 3,   // D
    FiveGThroughput = 4,  // E
    LiFiOutage = 5,       // F
    AggregationLoss = 6,  // G
    ModelFault = 7,       // H
};

struct DegradationCause {
    Cause code;
    char letter;  // 'A'..'H'
    std::string description;
    bool mats_based;  // A-G perturb the network, H flags the model
};

// The fixed eight-option taxonomy, index i == option index i.
const std::vector<DegradationCause>& taxonomy();

char cause_letter(Cause c);
Cause cause_from_letter(char letter);

struct DegradationScenario {
    Cause cause = Cause::ModelFault;
    double severity = 1.0;               // in (0, 1]
    double snr_offset_db = 0.0;          // <= 0, derived from severity
    double throughput_multiplier = 1.0;  // in (0, 1], derived from severity
    std::optional<Tech> affected_tech;
    std::uint64_t seed = 0;
    std::string scene_id;
    std::string id;
};

// Builds a scenario with the severity maps applied:
//   noise causes:       snr_offset_db = -20 * severity
//   throughput causes:  throughput_multiplier = 1 - 0.9 * severity
//   LiFi outage (F):    both at once
//   aggregation (G):    snr_offset_db = -5 * severity on every channel
//   model fault (H):    channel parameters untouched
DegradationScenario make_scenario(Cause cause, double severity,
                                  std::uint64_t seed, const std::string& scene_id,
                                  const std::string& id);

struct InjectionResult {
    std::vector<TechnologyProfile> profiles;
    bool model_fault = false;
};

InjectionResult inject(const DegradationScenario& scenario,
                       const std::vector<TechnologyProfile>& nominal);

struct QualityReport {
    double mse = 0.0;
    double psnr_db = 0.0;  // capped at 99 for identical images
    std::map<Tech, double> per_tech_ber;
};

// PSNR reported for a model-internal fault (H): the channels are clean, so
// the rendering penalty is this documented constant subtracted downstream.
constexpr double kModelFaultPsnrPenaltyDb = 30.0;

QualityReport measure_quality(const Image& original, const Image& received);

int gold_label(const DegradationScenario& scenario);

}  // namespace aidr
