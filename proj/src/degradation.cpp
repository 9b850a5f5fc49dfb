#include "aidr/degradation.hpp"

#include <cmath>
#include <stdexcept>

namespace aidr {

const std::vector<DegradationCause>& taxonomy() {
    static const std::vector<DegradationCause> causes = {
        {Cause::WiFiNoise, 'A', "Severe channel noise on the WiFi link", true},
        {Cause::FiveGNoise, 'B', "Severe channel noise on the 5G link", true},
        {Cause::LiFiNoise, 'C', "Severe channel noise on the LiFi link", true},
        {Cause::WiFiThroughput, 'D', "WiFi throughput collapse", true},
        {Cause::FiveGThroughput, 'E', "5G throughput collapse", true},
        {Cause::LiFiOutage, 'F', "LiFi link blockage or outage", true},
        {Cause::AggregationLoss, 'G', "Aggregation-layer bit loss across all channels", true},
        {Cause::ModelFault, 'H', "Internal fault of the AI model", false},
    };
    return causes;
}

char cause_letter(Cause c) { return static_cast<char>('A' + static_cast<int>(c)); }

Cause cause_from_letter(char letter) {
    if (letter < 'A' || letter > 'H')
        throw std::invalid_argument(std::string("unknown cause letter: ") + letter);
    return static_cast<Cause>(letter - 'A');
}

namespace {

std::optional<Tech> implied_tech(Cause c) {
    switch (c) {
        case Cause::WiFiNoise:
        case Cause::WiFiThroughput: return Tech::WiFi;
        case Cause::FiveGNoise:
        case Cause::FiveGThroughput: return Tech::FiveG;
        case Cause::LiFiNoise:
        case Cause::LiFiOutage: return Tech::LiFi;
        default: return std::nullopt;  // G hits all channels, H none
    }
}

bool lowers_snr(Cause c) {
    return c == Cause::WiFiNoise || c == Cause::FiveGNoise || c == Cause::LiFiNoise ||
           c == Cause::LiFiOutage || c == Cause::AggregationLoss;
}

bool lowers_throughput(Cause c) {
    return c == Cause::WiFiThroughput || c == Cause::FiveGThroughput ||
           c == Cause::LiFiOutage;
}

}  // namespace

DegradationScenario make_scenario(Cause cause, double severity,
                                  std::uint64_t seed, const std::string& scene_id,
                                  const std::string& id) {
    if (!(severity > 0.0 && severity <= 1.0))
        throw std::invalid_argument("make_scenario: severity must be in (0, 1]");
    DegradationScenario s;
    s.cause = cause;
    s.severity = severity;
    s.seed = seed;
    s.scene_id = scene_id;
    s.id = id;
    s.affected_tech = implied_tech(cause);
    if (lowers_snr(cause))
        s.snr_offset_db = (cause == Cause::AggregationLoss ? -5.0 : -20.0) * severity;
    if (lowers_throughput(cause)) s.throughput_multiplier = 1.0 - 0.9 * severity;
    return s;
}

InjectionResult inject(const DegradationScenario& scenario,
                       const std::vector<TechnologyProfile>& nominal) {
    if (!(scenario.severity > 0.0 && scenario.severity <= 1.0))
        throw std::invalid_argument("inject: severity must be in (0, 1]");
    if (scenario.snr_offset_db > 0.0)
        throw std::invalid_argument("inject: snr_offset_db must be <= 0");

    const auto implied = implied_tech(scenario.cause);
    if (implied && scenario.affected_tech && *scenario.affected_tech != *implied)
        throw std::invalid_argument("inject: affected_tech does not match cause");
    if (!implied && scenario.affected_tech)
        throw std::invalid_argument("inject: cause does not target a single technology");

    InjectionResult result;
    result.profiles = nominal;
    if (scenario.cause == Cause::ModelFault) {
        result.model_fault = true;
        return result;
    }

    for (auto& p : result.profiles) {
        const bool hit = scenario.cause == Cause::AggregationLoss ||
                         (implied && p.tech == *implied);
        if (!hit) continue;
        if (lowers_snr(scenario.cause)) p.nominal_snr_db += scenario.snr_offset_db;
        if (lowers_throughput(scenario.cause)) p.throughput_bps *= scenario.throughput_multiplier;
    }
    return result;
}

QualityReport measure_quality(const Image& original, const Image& received) {
    if (original.width != received.width || original.height != received.height ||
        original.pixels.size() != received.pixels.size())
        throw std::invalid_argument("measure_quality: dimension mismatch");
    if (!original.valid()) throw std::invalid_argument("measure_quality: invalid image");

    double sum_sq = 0.0;
    for (std::size_t i = 0; i < original.pixels.size(); ++i) {
        const double d = static_cast<double>(original.pixels[i]) - received.pixels[i];
        sum_sq += d * d;
    }
    QualityReport report;
    report.mse = sum_sq / static_cast<double>(original.pixels.size());
    report.psnr_db = report.mse > 0.0 ? 10.0 * std::log10(255.0 * 255.0 / report.mse) : 99.0;
    if (report.psnr_db > 99.0) report.psnr_db = 99.0;
    return report;
}

int gold_label(const DegradationScenario& scenario) {
    return static_cast<int>(scenario.cause);
}

}  // namespace aidr
