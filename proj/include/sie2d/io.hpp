#pragma once

// On-disk formats.
//
// Snapshot ("SIE2"): magic, format version (u32), N (u32), record count
// (u64), then (k1: i32, k2: i32, coeff: f64) for every mode of Lambda_N in
// lexicographic (k1, k2) order. All integers and floats little-endian.
//
// Noise table ("SIEW"): same container framing; header adds T, master
// seed and path id, then per mode (k1: i32, k2: i32, n_fine: u64,
// increments: n_fine f64).
//
// Trajectory ("SIET"): header (N, level, step count, T, tau, seed,
// path id, c0, r), then n+1 snapshot records.
//
// CSV files carry one header row; floats are printed with 17 significant
// digits so reruns can be compared byte for byte.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sie2d/convergence.hpp"
#include "sie2d/field.hpp"
#include "sie2d/noise.hpp"
#include "sie2d/stepper.hpp"

namespace sie2d {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts are unsupported");

inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

template <typename T>
inline void write_raw(std::ostream& os, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    os.write(buf, sizeof(T));
}

template <typename T>
inline T read_raw(std::istream& is, const char* what) {
    char buf[sizeof(T)];
    if (!is.read(buf, sizeof(T))) throw std::runtime_error(std::string("truncated input reading ") + what);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

inline void write_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

inline void require_magic(std::istream& is, const char (&magic)[5]) {
    char buf[4];
    if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0)
        throw std::runtime_error(std::string("bad magic, expected ") + magic);
}

inline void require_version(std::istream& is) {
    const auto version = read_raw<std::uint32_t>(is, "format version");
    if (version != kSnapshotVersion)
        throw std::runtime_error("unsupported format version " + std::to_string(version));
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const SpectralField& field) {
    detail::write_magic(os, "SIE2");
    detail::write_raw<std::uint32_t>(os, kSnapshotVersion);
    detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(field.N()));
    detail::write_raw<std::uint64_t>(os, static_cast<std::uint64_t>(mode_count(field.N())));
    for_each_mode(field.N(), [&](ModeIndex k) {
        detail::write_raw<std::int32_t>(os, k.k1);
        detail::write_raw<std::int32_t>(os, k.k2);
        detail::write_raw<double>(os, field.slot(k));
    });
}

inline SpectralField read_snapshot(std::istream& is) {
    detail::require_magic(is, "SIE2");
    detail::require_version(is);
    const auto n = static_cast<int>(detail::read_raw<std::uint32_t>(is, "truncation"));
    const auto count = detail::read_raw<std::uint64_t>(is, "record count");
    SpectralField field(n);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto k1 = detail::read_raw<std::int32_t>(is, "k1");
        const auto k2 = detail::read_raw<std::int32_t>(is, "k2");
        const auto coeff = detail::read_raw<double>(is, "coefficient");
        field.set_coeff({k1, k2}, coeff);
    }
    return field;
}

inline void write_snapshot_file(const std::filesystem::path& path, const SpectralField& field) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_snapshot(os, field);
}

inline SpectralField read_snapshot_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    return read_snapshot(is);
}

inline void write_noise_table(std::ostream& os, const BrownianTable& table) {
    detail::write_magic(os, "SIEW");
    detail::write_raw<std::uint32_t>(os, kSnapshotVersion);
    detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(table.N()));
    detail::write_raw<std::uint64_t>(os, static_cast<std::uint64_t>(table.modes().size()));
    detail::write_raw<double>(os, table.t_final());
    detail::write_raw<std::uint64_t>(os, table.master_seed());
    detail::write_raw<std::uint64_t>(os, table.path_id());
    for (std::size_t rank = 0; rank < table.modes().size(); ++rank) {
        detail::write_raw<std::int32_t>(os, table.modes()[rank].k1);
        detail::write_raw<std::int32_t>(os, table.modes()[rank].k2);
        detail::write_raw<std::uint64_t>(os, table.n_fine());
        const double* row = table.increments(rank);
        for (std::uint64_t i = 0; i < table.n_fine(); ++i) detail::write_raw<double>(os, row[i]);
    }
}

inline BrownianTable read_noise_table(std::istream& is) {
    detail::require_magic(is, "SIEW");
    detail::require_version(is);
    const auto n = static_cast<int>(detail::read_raw<std::uint32_t>(is, "truncation"));
    const auto count = detail::read_raw<std::uint64_t>(is, "mode count");
    const auto t_final = detail::read_raw<double>(is, "T");
    const auto master_seed = detail::read_raw<std::uint64_t>(is, "master seed");
    const auto path_id = detail::read_raw<std::uint64_t>(is, "path id");
    const auto modes = modes_in_lambda(n);
    if (count != modes.size()) throw std::runtime_error("mode count does not match Lambda_N");
    std::vector<double> increments;
    std::uint64_t n_fine = 0;
    for (std::size_t rank = 0; rank < modes.size(); ++rank) {
        const auto k1 = detail::read_raw<std::int32_t>(is, "k1");
        const auto k2 = detail::read_raw<std::int32_t>(is, "k2");
        if (ModeIndex{k1, k2} != modes[rank]) throw std::runtime_error("unexpected mode order in table");
        const auto row_len = detail::read_raw<std::uint64_t>(is, "n_fine");
        if (rank == 0) {
            n_fine = row_len;
            increments.reserve(modes.size() * n_fine);
        } else if (row_len != n_fine) {
            throw std::runtime_error("inconsistent n_fine across modes");
        }
        for (std::uint64_t i = 0; i < row_len; ++i)
            increments.push_back(detail::read_raw<double>(is, "increment"));
    }
    return BrownianTable::from_raw(n, n_fine, t_final, master_seed, path_id, std::move(increments));
}

struct TrajectoryMeta {
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;
    double c0 = 0.0;
    double r = 0.0;
};

inline void write_trajectory(std::ostream& os, const Trajectory& traj, const TrajectoryMeta& meta) {
    detail::write_magic(os, "SIET");
    detail::write_raw<std::uint32_t>(os, kSnapshotVersion);
    detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(traj.states.front().N()));
    detail::write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(traj.level));
    detail::write_raw<std::uint64_t>(os, static_cast<std::uint64_t>(traj.n_steps()));
    detail::write_raw<double>(os, traj.t_final);
    detail::write_raw<double>(os, traj.tau);
    detail::write_raw<std::uint64_t>(os, meta.seed);
    detail::write_raw<std::uint64_t>(os, meta.path_id);
    detail::write_raw<double>(os, meta.c0);
    detail::write_raw<double>(os, meta.r);
    for (const auto& state : traj.states) write_snapshot(os, state);
}

inline std::pair<Trajectory, TrajectoryMeta> read_trajectory(std::istream& is) {
    detail::require_magic(is, "SIET");
    detail::require_version(is);
    (void)detail::read_raw<std::uint32_t>(is, "truncation");
    Trajectory traj;
    TrajectoryMeta meta;
    traj.level = static_cast<int>(detail::read_raw<std::uint32_t>(is, "level"));
    const auto n = detail::read_raw<std::uint64_t>(is, "step count");
    traj.t_final = detail::read_raw<double>(is, "T");
    traj.tau = detail::read_raw<double>(is, "tau");
    meta.seed = detail::read_raw<std::uint64_t>(is, "seed");
    meta.path_id = detail::read_raw<std::uint64_t>(is, "path id");
    meta.c0 = detail::read_raw<double>(is, "c0");
    meta.r = detail::read_raw<double>(is, "r");
    traj.states.reserve(n + 1);
    traj.times.reserve(n + 1);
    for (std::uint64_t i = 0; i <= n; ++i) {
        traj.states.push_back(read_snapshot(is));
        traj.times.push_back(static_cast<double>(i) * traj.tau);
    }
    return {std::move(traj), meta};
}

// ---- CSV emission ----

inline std::string diagnostics_csv(const Trajectory& traj) {
    std::string out = "step,t,l2,l4,iterations,residual,used_dense\n";
    for (std::size_t i = 0; i < traj.diags.size(); ++i) {
        const auto& d = traj.diags[i];
        out += std::to_string(i + 1) + "," + format_double(traj.times[i + 1]) + "," +
               format_double(d.l2) + "," + format_double(d.l4) + "," + std::to_string(d.iterations) +
               "," + format_double(d.residual) + "," + (d.used_dense ? "1" : "0") + "\n";
    }
    return out;
}

inline std::string errors_csv(const ErrorReport& report) {
    std::string out = "path_id,level,tau,sup_l2_error,sup_u_h1_error,sup_pi_h1_error\n";
    for (const auto& path : report.paths) {
        if (path.aborted) continue;
        for (const auto& row : path.rows)
            out += std::to_string(row.path_id) + "," + std::to_string(row.level_steps) + "," +
                   format_double(row.tau) + "," + format_double(row.sup_l2) + "," +
                   format_double(row.sup_u_h1) + "," + format_double(row.sup_pi_h1) + "\n";
    }
    return out;
}

inline std::string summary_csv(const ErrorReport& report) {
    std::string out = "level,tau,n_paths,mean_sup_l2,median_sup_l2,max_sup_l2,mean_sup_observable\n";
    for (const auto& agg : report.aggregates)
        out += std::to_string(agg.level_steps) + "," + format_double(agg.tau) + "," +
               std::to_string(agg.n_paths) + "," + format_double(agg.mean_l2) + "," +
               format_double(agg.median_l2) + "," + format_double(agg.max_l2) + "," +
               format_double(agg.mean_obs) + "\n";
    return out;
}

inline std::string fits_csv(const ErrorReport& report) {
    std::string out = "scope,path_id,slope,intercept,r_squared,n_points,degenerate\n";
    auto emit = [&out](const std::string& scope, int path_id, const OrderFit& fit) {
        out += scope + "," + std::to_string(path_id) + "," + format_double(fit.slope) + "," +
               format_double(fit.intercept) + "," + format_double(fit.r_squared) + "," +
               std::to_string(fit.n_points) + "," + (fit.degenerate ? "1" : "0") + "\n";
    };
    for (const auto& path : report.paths) {
        if (path.aborted) continue;
        emit("path", path.path_id, path.fit);
    }
    emit("pooled", -1, report.pooled);
    return out;
}

inline std::string exceedance_csv(const ExceedanceReport& report) {
    std::string out = "level,tau,beta,threshold,n_paths,n_exceed,fraction,ci_low,ci_high\n";
    for (const auto& c : report.cells)
        out += std::to_string(c.level_steps) + "," + format_double(c.tau) + "," +
               format_double(c.beta) + "," + format_double(c.threshold) + "," +
               std::to_string(c.n_paths) + "," + std::to_string(c.n_exceed) + "," +
               format_double(c.fraction) + "," + format_double(c.ci_low) + "," +
               format_double(c.ci_high) + "\n";
    return out;
}

inline std::string exceedance_trend_csv(const ExceedanceReport& report) {
    std::string out = "beta,coarsest_fraction,finest_fraction,finest_le_coarsest,non_increasing\n";
    for (const auto& t : report.trends)
        out += format_double(t.beta) + "," + format_double(t.coarsest_fraction) + "," +
               format_double(t.finest_fraction) + "," + (t.finest_le_coarsest ? "1" : "0") + "," +
               (t.non_increasing ? "1" : "0") + "\n";
    return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);  // binary: byte-identical reruns
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string content((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return content;
}

}  // namespace sie2d
