#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "aidr/degradation.hpp"

using namespace aidr;

TEST_CASE("taxonomy is the fixed eight-option table") {
    const auto& causes = taxonomy();
    REQUIRE(causes.size() == 8);
    std::set<std::string> descriptions;
    for (std::size_t i = 0; i < causes.size(); ++i) {
        CHECK(causes[i].letter == static_cast<char>('A' + i));
        CHECK(static_cast<int>(causes[i].code) == static_cast<int>(i));
        CHECK_FALSE(causes[i].description.empty());
        descriptions.insert(causes[i].description);
        CHECK(causes[i].mats_based == (causes[i].letter != 'H'));
    }
    CHECK(descriptions.size() == 8);
}

TEST_CASE("inject decision table") {
    const auto nominal = default_profiles();

    SUBCASE("cause H leaves profiles untouched and flags the model") {
        const auto s = make_scenario(Cause::ModelFault, 0.8, 1, "scene", "s1");
        const auto r = inject(s, nominal);
        CHECK(r.model_fault);
        for (std::size_t i = 0; i < nominal.size(); ++i) {
            CHECK(r.profiles[i].nominal_snr_db == nominal[i].nominal_snr_db);
            CHECK(r.profiles[i].throughput_bps == nominal[i].throughput_bps);
        }
    }
    SUBCASE("cause A at severity 1 lowers WiFi SNR by 20 dB only") {
        const auto s = make_scenario(Cause::WiFiNoise, 1.0, 1, "scene", "s1");
        const auto r = inject(s, nominal);
        CHECK_FALSE(r.model_fault);
        for (const auto& p : r.profiles) {
            if (p.tech == Tech::WiFi)
                CHECK(p.nominal_snr_db == doctest::Approx(nominal[0].nominal_snr_db - 20.0));
            else
                CHECK(p.nominal_snr_db == 10.0);
            CHECK(p.throughput_bps ==
                  nominal[p.tech == Tech::WiFi ? 0 : (p.tech == Tech::FiveG ? 1 : 2)]
                      .throughput_bps);
        }
    }
    SUBCASE("cause D at severity 0.5 scales WiFi throughput by m(0.5)") {
        // m(s) = 1 - 0.9 s, so m(0.5) = 0.55.
        const auto s = make_scenario(Cause::WiFiThroughput, 0.5, 1, "scene", "s1");
        const auto r = inject(s, nominal);
        CHECK(r.profiles[0].throughput_bps == doctest::Approx(800e6 * 0.55));
        CHECK(r.profiles[1].throughput_bps == 400e6);
        CHECK(r.profiles[2].throughput_bps == 200e6);
    }
    SUBCASE("cause F degrades LiFi SNR and throughput jointly") {
        const auto s = make_scenario(Cause::LiFiOutage, 1.0, 1, "scene", "s1");
        const auto r = inject(s, nominal);
        CHECK(r.profiles[2].nominal_snr_db == doctest::Approx(-10.0));
        CHECK(r.profiles[2].throughput_bps == doctest::Approx(200e6 * 0.1));
        CHECK(r.profiles[0].nominal_snr_db == 10.0);
    }
    SUBCASE("cause G offsets every channel") {
        const auto s = make_scenario(Cause::AggregationLoss, 1.0, 1, "scene", "s1");
        const auto r = inject(s, nominal);
        for (const auto& p : r.profiles) CHECK(p.nominal_snr_db == doctest::Approx(5.0));
    }
    SUBCASE("affected_tech mismatch rejected") {
        auto s = make_scenario(Cause::WiFiNoise, 1.0, 1, "scene", "s1");
        s.affected_tech = Tech::LiFi;
        CHECK_THROWS_AS(inject(s, nominal), std::invalid_argument);
    }
    SUBCASE("single-tech causes leave the other channels bit-identical") {
        for (Cause c : {Cause::WiFiNoise, Cause::FiveGNoise, Cause::LiFiNoise,
                        Cause::WiFiThroughput, Cause::FiveGThroughput, Cause::LiFiOutage}) {
            const auto s = make_scenario(c, 0.7, 1, "scene", "s1");
            const auto r = inject(s, nominal);
            int touched = 0;
            for (std::size_t i = 0; i < nominal.size(); ++i) {
                const bool same = r.profiles[i].nominal_snr_db == nominal[i].nominal_snr_db &&
                                  r.profiles[i].throughput_bps == nominal[i].throughput_bps;
                if (!same) ++touched;
            }
            CHECK(touched == 1);
        }
    }
}

TEST_CASE("severity monotonicity maps") {
    double prev_offset = 0.0, prev_mult = 1.0;
    for (double s : {0.2, 0.4, 0.6, 0.8, 1.0}) {
        const auto noise = make_scenario(Cause::FiveGNoise, s, 1, "scene", "x");
        const auto cap = make_scenario(Cause::FiveGThroughput, s, 1, "scene", "x");
        CHECK(noise.snr_offset_db < prev_offset);
        CHECK(cap.throughput_multiplier < prev_mult);
        prev_offset = noise.snr_offset_db;
        prev_mult = cap.throughput_multiplier;
    }
}

TEST_CASE("measure_quality") {
    SUBCASE("identical images give mse 0 and capped PSNR") {
        Image a{2, 2, std::vector<std::uint8_t>(12, 77)};
        const auto q = measure_quality(a, a);
        CHECK(q.mse == 0.0);
        CHECK(q.psnr_db == 99.0);
    }
    SUBCASE("all-zero vs all-255 gives mse 65025 and PSNR 0") {
        Image a{2, 2, std::vector<std::uint8_t>(12, 0)};
        Image b{2, 2, std::vector<std::uint8_t>(12, 255)};
        const auto q = measure_quality(a, b);
        CHECK(q.mse == doctest::Approx(65025.0));
        CHECK(q.psnr_db == doctest::Approx(0.0));
    }
    SUBCASE("single channel delta matches the arithmetic oracle") {
        const int n_pixels = 16;
        Image a{4, 4, std::vector<std::uint8_t>(n_pixels * 3, 10)};
        Image b = a;
        b.pixels[5] = 74;  // delta 64 in one 8-bit channel
        const double delta = 64.0;
        const auto q = measure_quality(a, b);
        CHECK(q.mse == doctest::Approx(delta * delta / (3.0 * n_pixels)).epsilon(1e-12));
    }
    SUBCASE("PSNR recomputes from MSE to 1e-9") {
        Image a{3, 3, std::vector<std::uint8_t>(27, 0)};
        Image b = a;
        for (std::size_t i = 0; i < b.pixels.size(); i += 2)
            b.pixels[i] = static_cast<std::uint8_t>(30 + i);
        const auto q = measure_quality(a, b);
        CHECK(q.psnr_db ==
              doctest::Approx(10.0 * std::log10(255.0 * 255.0 / q.mse)).epsilon(1e-9));
    }
    SUBCASE("dimension mismatch rejected") {
        Image a{2, 2, std::vector<std::uint8_t>(12, 0)};
        Image b{2, 1, std::vector<std::uint8_t>(6, 0)};
        CHECK_THROWS_AS(measure_quality(a, b), std::invalid_argument);
    }
}

TEST_CASE("gold_label maps causes to option indices") {
    CHECK(gold_label(make_scenario(Cause::WiFiNoise, 1.0, 1, "s", "a")) == 0);
    CHECK(gold_label(make_scenario(Cause::ModelFault, 1.0, 1, "s", "a")) == 7);
    const auto s = make_scenario(Cause::LiFiOutage, 0.5, 9, "s", "a");
    CHECK(gold_label(s) == gold_label(s));
    CHECK(gold_label(s) == 5);
}
