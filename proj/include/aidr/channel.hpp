#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "aidr/image.hpp"

namespace aidr {

enum class Tech { WiFi, FiveG, LiFi };

const char* tech_name(Tech t);
Tech tech_from_name(const std::string& name);

// Per-access-technology link parameters.
struct TechnologyProfile {
    Tech tech = Tech::WiFi;
    double throughput_bps = 0.0;
    double nominal_snr_db = 0.0;  // Es/N0
    std::string label;
};

// Nominal WiFi/5G/LiFi profiles: 800/400/200 Mbps, 10 dB Es/N0.
std::vector<TechnologyProfile> default_profiles();

struct BitStream {
    std::vector<std::uint8_t> bits;  // values 0/1
    std::string origin;
};

// 4-ary FSK symbols with per-symbol complex correlator branch outputs.
struct SymbolBlock {
    std::vector<std::uint8_t> symbols;           // values 0..3
    std::vector<std::complex<double>> samples;   // 4 branches per symbol
    int pad_bits = 0;                            // trailing zero bits added
    std::string origin;
};

struct ChannelOutcome {
    Tech tech = Tech::WiFi;
    BitStream received_bits;
    double ber = 0.0;
    double snr_db = 0.0;
    double latency_s = 0.0;
    std::uint64_t seed = 0;
    std::string image_id;
};

BitStream serialize_image(const Image& img);
Image deserialize_image(const BitStream& stream, int width, int height);

// Direct binary bit-pair mapping 00->0, 01->1, 10->2, 11->3 (no Gray
// coding). Noiseless correlator vector is sqrt(Es) on the symbol branch.
SymbolBlock qfsk_modulate(const BitStream& bits);

// Adds complex Gaussian noise of variance N0 per branch, Es/N0 = 10^(snr/10).
SymbolBlock awgn_apply(const SymbolBlock& block, double snr_db, std::uint64_t seed);

// Noncoherent envelope detection: argmax of branch magnitudes, ties to
// the lowest index. Strips pad bits.
BitStream qfsk_demodulate(const SymbolBlock& block);

// Closed-form noncoherent orthogonal 4-FSK bit error probability.
double theoretical_ber(double snr_db);
double theoretical_symbol_error(double snr_db);

ChannelOutcome transmit(const Image& img, const TechnologyProfile& profile,
                        double snr_db, std::uint64_t seed,
                        const std::string& image_id = "");

// Seed for one (scenario, image) transmission so parallel runs reproduce.
std::uint64_t derive_seed(std::uint64_t base, const std::string& scenario_id,
                          const std::string& image_id, Tech tech);

}  // namespace aidr
