#include <catch2/catch.hpp>

#include <cstring>
#include <sstream>

#include "sie2d/io.hpp"

using namespace sie2d;

TEST_CASE("snapshot bytes follow the documented layout") {
    const SpectralField f = field_from_modes({{{1, 0}, 1.0}}, 1);
    std::ostringstream os(std::ios::binary);
    write_snapshot(os, f);
    const std::string bytes = os.str();

    // magic, version, N, count, then 8 records of 16 bytes
    REQUIRE(bytes.size() == 4 + 4 + 4 + 8 + 8u * 16);
    CHECK(bytes.compare(0, 4, "SIE2") == 0);

    std::uint32_t version = 0, n = 0;
    std::uint64_t count = 0;
    std::memcpy(&version, bytes.data() + 4, 4);
    std::memcpy(&n, bytes.data() + 8, 4);
    std::memcpy(&count, bytes.data() + 12, 8);
    CHECK(version == 1);
    CHECK(n == 1);
    CHECK(count == 8);

    // first record is the lexicographically smallest mode (-1, -1)
    std::int32_t k1 = 0, k2 = 0;
    std::memcpy(&k1, bytes.data() + 20, 4);
    std::memcpy(&k2, bytes.data() + 24, 4);
    CHECK(k1 == -1);
    CHECK(k2 == -1);

    // the (1, 0) record is the 7th: offset 20 + 6*16
    double coeff = 0.0;
    std::memcpy(&k1, bytes.data() + 20 + 6 * 16, 4);
    std::memcpy(&k2, bytes.data() + 20 + 6 * 16 + 4, 4);
    std::memcpy(&coeff, bytes.data() + 20 + 6 * 16 + 8, 8);
    CHECK(k1 == 1);
    CHECK(k2 == 0);
    CHECK(coeff == 1.0);
}

TEST_CASE("snapshot round-trip is bitwise") {
    std::mt19937_64 eng(15);
    std::normal_distribution<double> normal;
    SpectralField f(5);
    for_each_mode(5, [&](ModeIndex k) { f.slot(k) = normal(eng); });

    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_snapshot(ss, f);
    const SpectralField back = read_snapshot(ss);
    CHECK(back == f);
}

TEST_CASE("snapshot reader rejects corrupted input") {
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    ss << "NOPE";
    CHECK_THROWS_WITH(read_snapshot(ss), Catch::Contains("magic"));

    std::stringstream truncated(std::ios::in | std::ios::out | std::ios::binary);
    write_snapshot(truncated, SpectralField(2));
    std::string bytes = truncated.str();
    bytes.resize(bytes.size() - 7);
    std::stringstream cut(bytes, std::ios::in | std::ios::binary);
    CHECK_THROWS_WITH(read_snapshot(cut), Catch::Contains("truncated"));
}

TEST_CASE("noise table round-trip preserves every increment") {
    const NoiseSpectrum s = build_spectrum(2, 0.5, 6.0);
    const BrownianTable t = sample_brownian_table(s, 16, 0.5, 77, 3);
    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_noise_table(ss, t);
    const BrownianTable back = read_noise_table(ss);
    CHECK(back == t);
}

TEST_CASE("trajectory container round-trips states and header") {
    const NoiseSpectrum s = build_spectrum(2, 0.4, 6.0);
    const BrownianTable t = sample_brownian_table(s, 8, 0.5, 21, 2);
    StepperConfig cfg;
    cfg.tau = 1.0;
    const Trajectory traj = simulate_path(make_initial_condition({}, 2), s, t, 1, cfg);

    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_trajectory(ss, traj, {21, 2, 0.4, 6.0});
    const auto [back, meta] = read_trajectory(ss);

    CHECK(meta.seed == 21);
    CHECK(meta.path_id == 2);
    CHECK(meta.c0 == 0.4);
    CHECK(meta.r == 6.0);
    CHECK(back.level == 1);
    CHECK(back.tau == traj.tau);
    REQUIRE(back.states.size() == traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) CHECK(back.states[i] == traj.states[i]);
}

TEST_CASE("floats are printed with 17 significant digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
}

TEST_CASE("CSV emitters produce one header row and one row per record") {
    ErrorReport report;
    report.config.levels = {4, 8};
    report.paths.resize(2);
    for (int p = 0; p < 2; ++p) {
        report.paths[p].path_id = p;
        for (const int n : report.config.levels) {
            PathLevelError row;
            row.path_id = p;
            row.level_steps = n;
            row.tau = 1.0 / n;
            row.sup_l2 = 0.25 / n;
            row.sup_u_h1 = 0.2 / n;
            row.sup_pi_h1 = 0.1 / n;
            row.sup_obs = row.sup_u_h1 + row.sup_pi_h1;
            report.paths[p].rows.push_back(row);
        }
    }
    const std::string csv = errors_csv(report);
    CHECK(csv.rfind("path_id,level,tau,sup_l2_error,sup_u_h1_error,sup_pi_h1_error\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

    const ExceedanceReport ex = tabulate_exceedance(report, {0.5});
    const std::string excsv = exceedance_csv(ex);
    CHECK(excsv.rfind("level,tau,beta,threshold,n_paths,n_exceed,fraction,ci_low,ci_high\n", 0) == 0);
    CHECK(std::count(excsv.begin(), excsv.end(), '\n') == 3);
    const std::string trend = exceedance_trend_csv(ex);
    CHECK(std::count(trend.begin(), trend.end(), '\n') == 2);
}
