#include "aidr/channel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace aidr {

namespace {
constexpr double kSymbolEnergy = 1.0;  // Es; N0 follows from the SNR
constexpr int kBranches = 4;
}  // namespace

const char* tech_name(Tech t) {
    switch (t) {
        case Tech::WiFi: return "WiFi";
        case Tech::FiveG: return "5G";
        case Tech::LiFi: return "LiFi";
    }
    return "?";
}

Tech tech_from_name(const std::string& name) {
    if (name == "WiFi") return Tech::WiFi;
    if (name == "5G" || name == "FiveG") return Tech::FiveG;
    if (name == "LiFi") return Tech::LiFi;
    throw std::invalid_argument("unknown access technology: " + name);
}

std::vector<TechnologyProfile> default_profiles() {
    return {
        {Tech::WiFi, 800e6, 10.0, "WiFi"},
        {Tech::FiveG, 400e6, 10.0, "5G"},
        {Tech::LiFi, 200e6, 10.0, "LiFi"},
    };
}

BitStream serialize_image(const Image& img) {
    if (!img.valid()) throw std::invalid_argument("serialize_image: invalid image");
    BitStream out;
    out.bits.reserve(img.pixels.size() * 8);
    for (std::uint8_t byte : img.pixels)
        for (int b = 7; b >= 0; --b) out.bits.push_back((byte >> b) & 1u);
    return out;
}

Image deserialize_image(const BitStream& stream, int width, int height) {
    const std::size_t expected = static_cast<std::size_t>(width) * height * 3 * 8;
    if (width <= 0 || height <= 0 || stream.bits.size() != expected)
        throw std::invalid_argument("deserialize_image: bit count does not match dimensions");
    Image img;
    img.width = width;
    img.height = height;
    img.pixels.resize(expected / 8);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        std::uint8_t byte = 0;
        for (int b = 0; b < 8; ++b) byte = static_cast<std::uint8_t>((byte << 1) | stream.bits[i * 8 + b]);
        img.pixels[i] = byte;
    }
    return img;
}

SymbolBlock qfsk_modulate(const BitStream& bits) {
    if (bits.bits.empty()) throw std::invalid_argument("qfsk_modulate: empty bit stream");
    SymbolBlock block;
    block.origin = bits.origin;
    block.pad_bits = static_cast<int>(bits.bits.size() % 2);

    const std::size_t n_symbols = (bits.bits.size() + 1) / 2;
    block.symbols.reserve(n_symbols);
    block.samples.reserve(n_symbols * kBranches);
    const double amp = std::sqrt(kSymbolEnergy);

    for (std::size_t k = 0; k < n_symbols; ++k) {
        const std::uint8_t b0 = bits.bits[2 * k];
        const std::uint8_t b1 = (2 * k + 1 < bits.bits.size()) ? bits.bits[2 * k + 1] : 0;
        const std::uint8_t sym = static_cast<std::uint8_t>((b0 << 1) | b1);
        block.symbols.push_back(sym);
        for (int br = 0; br < kBranches; ++br)
            block.samples.emplace_back(br == sym ? amp : 0.0, 0.0);
    }
    return block;
}

SymbolBlock awgn_apply(const SymbolBlock& block, double snr_db, std::uint64_t seed) {
    if (!std::isfinite(snr_db)) throw std::invalid_argument("awgn_apply: non-finite SNR");
    const double es_n0 = std::pow(10.0, snr_db / 10.0);
    const double n0 = kSymbolEnergy / es_n0;
    const double sigma = std::sqrt(n0 / 2.0);  // per real dimension

    SymbolBlock noisy = block;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& s : noisy.samples)
        s += std::complex<double>(sigma * gauss(rng), sigma * gauss(rng));
    return noisy;
}

BitStream qfsk_demodulate(const SymbolBlock& block) {
    if (block.samples.empty() ||
        block.samples.size() != block.symbols.size() * kBranches)
        throw std::invalid_argument("qfsk_demodulate: missing correlator samples");

    BitStream out;
    out.origin = block.origin;
    out.bits.reserve(block.symbols.size() * 2);
    for (std::size_t k = 0; k < block.symbols.size(); ++k) {
        int best = 0;
        double best_mag = std::norm(block.samples[k * kBranches]);
        for (int br = 1; br < kBranches; ++br) {
            const double mag = std::norm(block.samples[k * kBranches + br]);
            if (mag > best_mag) {
                best = br;
                best_mag = mag;
            }
        }
        out.bits.push_back(static_cast<std::uint8_t>((best >> 1) & 1));
        out.bits.push_back(static_cast<std::uint8_t>(best & 1));
    }
    for (int i = 0; i < block.pad_bits; ++i) out.bits.pop_back();
    return out;
}

double theoretical_symbol_error(double snr_db) {
    if (!std::isfinite(snr_db)) throw std::invalid_argument("theoretical_ber: non-finite SNR");
    const double es_n0 = std::pow(10.0, snr_db / 10.0);
    // Noncoherent orthogonal M-FSK, M=4:
    // P_s = sum_{k=1..3} (-1)^{k+1} C(3,k)/(k+1) exp(-k/(k+1) Es/N0)
    static const double binom[4] = {1, 3, 3, 1};
    double ps = 0.0;
    for (int k = 1; k <= 3; ++k) {
        const double term = binom[k] / (k + 1.0) * std::exp(-k / (k + 1.0) * es_n0);
        ps += (k % 2 == 1) ? term : -term;
    }
    return ps;
}

double theoretical_ber(double snr_db) {
    // P_b = P_s * (M/2)/(M-1) with M=4
    return theoretical_symbol_error(snr_db) * 2.0 / 3.0;
}

ChannelOutcome transmit(const Image& img, const TechnologyProfile& profile,
                        double snr_db, std::uint64_t seed,
                        const std::string& image_id) {
    if (profile.throughput_bps <= 0.0)
        throw std::invalid_argument("transmit: throughput must be positive");

    BitStream sent = serialize_image(img);
    sent.origin = image_id;
    SymbolBlock rx = awgn_apply(qfsk_modulate(sent), snr_db, seed);

    ChannelOutcome outcome;
    outcome.tech = profile.tech;
    outcome.received_bits = qfsk_demodulate(rx);
    outcome.snr_db = snr_db;
    outcome.seed = seed;
    outcome.image_id = image_id;
    outcome.latency_s = static_cast<double>(sent.bits.size()) / profile.throughput_bps;

    std::size_t flipped = 0;
    for (std::size_t i = 0; i < sent.bits.size(); ++i)
        flipped += sent.bits[i] != outcome.received_bits.bits[i];
    outcome.ber = static_cast<double>(flipped) / static_cast<double>(sent.bits.size());
    return outcome;
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& scenario_id,
                          const std::string& image_id, Tech tech) {
    // FNV-1a over the identifying tuple; stable across platforms.
    std::uint64_t h = 14695981039346656037ull ^ base;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    mix(scenario_id.data(), scenario_id.size());
    mix("/", 1);
    mix(image_id.data(), image_id.size());
    const auto t = static_cast<std::uint8_t>(tech);
    mix(&t, 1);
    return h;
}

}  // namespace aidr
