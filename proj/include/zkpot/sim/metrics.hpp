// Per-run accounting: identity sets per vehicle, time-to-verify samples,
// transmitted bytes and coverage, plus the CSV dumps built from them.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace zkpot::sim {

using IdentitySet = std::unordered_set<std::uint32_t>;

/// Distinct ground-truth identities a vehicle perceived itself (local),
/// received in any message (received) and holds in its planner (all).
///
/// The two `_unseen` sets accumulate the differences over time: an identity
/// enters them when it is received, or admitted to the planner from the
/// network, while it is not in `local`. They keep their members after a later
/// local sighting.
struct IdentitySets {
    IdentitySet local;
    IdentitySet received;
    IdentitySet all;
    IdentitySet received_unseen;
    IdentitySet verified_unseen;
};

/// |all \ local| / |received \ local| on the current sets; nullopt when the
/// denominator is zero.
std::optional<double> verification_ratio(const IdentitySets& sets);

/// |verified_unseen| / |received_unseen|; nullopt when nothing was ever
/// received unseen. Equals verification_ratio while no received identity has
/// been perceived locally afterwards.
std::optional<double> running_verification_ratio(const IdentitySets& sets);

struct TtvSample {
    std::uint64_t tick = 0;
    std::uint64_t seconds = 0;
};

struct BandwidthTick {
    std::uint64_t tick = 0;
    std::uint32_t transmitters = 0;  // honest vehicles that could transmit this tick
    std::uint64_t messages = 0;
    std::uint64_t objects = 0;
    std::uint64_t proofs = 0;
    std::uint64_t total_bytes = 0;

    /// 8 * bytes averaged over transmitters; 0 when there are none.
    double mean_bps() const { return transmitters == 0 ? 0.0 : 8.0 * static_cast<double>(total_bytes) / transmitters; }
};

struct CoverageTick {
    std::uint64_t tick = 0;
    double mean = 0;  // mean over tracked vehicles of |all \ {self}| / vehicle count
    double min = 0;
};

struct TtvBucket {
    std::uint64_t hour = 0;
    std::uint64_t bucket_start_s = 0;
    std::uint64_t count = 0;
    double percent = 0;  // of the hour's samples
};

/// Histogram per simulated hour (3600 ticks), each hour scaled to 100 %.
/// Samples at or beyond `overflow_s` share the last bucket.
std::vector<TtvBucket> ttv_histogram(const std::vector<TtvSample>& samples, std::uint64_t bucket_s,
                                     std::uint64_t overflow_s = 30);

/// Fraction of samples with tick >= from_tick whose TTV is <= limit_s;
/// nullopt without samples.
std::optional<double> ttv_fraction_within(const std::vector<TtvSample>& samples, std::uint64_t limit_s,
                                          std::uint64_t from_tick = 0);

/// Mean of mean_bps over ticks >= from_tick.
double steady_bandwidth(const std::vector<BandwidthTick>& series, std::uint64_t from_tick);

/// First tick whose mean coverage reaches `threshold`.
std::optional<std::uint64_t> ticks_to_coverage(const std::vector<CoverageTick>& series, double threshold);

struct VehicleSummary {
    std::size_t vehicle = 0;
    std::string label;
    std::string kind;
    std::size_t n_local = 0;
    std::size_t n_received = 0;
    std::size_t n_all = 0;
    std::size_t n_received_unseen = 0;
    std::size_t n_verified_unseen = 0;
    std::optional<double> ratio;
    std::optional<double> running_ratio;
};

struct HeatCell {
    std::int64_t x_bin = 0;
    std::int64_t y_bin = 0;
    std::uint64_t verifications = 0;
    std::uint64_t sightings = 0;
};

void write_verification_csv(std::ostream& out, const std::vector<VehicleSummary>& rows);
void write_ttv_csv(std::ostream& out, const std::vector<TtvBucket>& rows);
void write_bandwidth_csv(std::ostream& out, const std::vector<BandwidthTick>& rows);
void write_coverage_csv(std::ostream& out, const std::vector<CoverageTick>& rows);
void write_heatmap_csv(std::ostream& out, double cell_m, const std::vector<HeatCell>& rows);

/// Fixed-precision rendering used in every CSV so outputs are byte-stable.
std::string fixed(double v, int digits = 6);

}  // namespace zkpot::sim
