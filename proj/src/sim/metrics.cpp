#include "zkpot/sim/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>

namespace zkpot::sim {

std::optional<double> verification_ratio(const IdentitySets& sets) {
    std::size_t received_only = 0;
    for (auto id : sets.received) {
        if (!sets.local.contains(id)) {
            ++received_only;
        }
    }
    if (received_only == 0) {
        return std::nullopt;
    }
    std::size_t verified_only = 0;
    for (auto id : sets.all) {
        if (!sets.local.contains(id)) {
            ++verified_only;
        }
    }
    return static_cast<double>(verified_only) / static_cast<double>(received_only);
}

std::optional<double> running_verification_ratio(const IdentitySets& sets) {
    if (sets.received_unseen.empty()) {
        return std::nullopt;
    }
    return static_cast<double>(sets.verified_unseen.size()) / static_cast<double>(sets.received_unseen.size());
}

std::vector<TtvBucket> ttv_histogram(const std::vector<TtvSample>& samples, std::uint64_t bucket_s,
                                     std::uint64_t overflow_s) {
    if (bucket_s == 0) {
        bucket_s = 1;
    }
    std::map<std::uint64_t, std::map<std::uint64_t, std::uint64_t>> by_hour;
    std::map<std::uint64_t, std::uint64_t> totals;
    const std::uint64_t cap = (overflow_s / bucket_s) * bucket_s;
    for (const auto& s : samples) {
        const auto hour = s.tick / 3600;
        const auto bucket = std::min((s.seconds / bucket_s) * bucket_s, cap);
        ++by_hour[hour][bucket];
        ++totals[hour];
    }
    std::vector<TtvBucket> out;
    for (const auto& [hour, buckets] : by_hour) {
        for (const auto& [start, count] : buckets) {
            out.push_back(TtvBucket{hour, start, count, 100.0 * static_cast<double>(count) / totals[hour]});
        }
    }
    return out;
}

std::optional<double> ttv_fraction_within(const std::vector<TtvSample>& samples, std::uint64_t limit_s,
                                          std::uint64_t from_tick) {
    std::size_t n = 0, within = 0;
    for (const auto& s : samples) {
        if (s.tick < from_tick) {
            continue;
        }
        ++n;
        if (s.seconds <= limit_s) {
            ++within;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return static_cast<double>(within) / static_cast<double>(n);
}

double steady_bandwidth(const std::vector<BandwidthTick>& series, std::uint64_t from_tick) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& b : series) {
        if (b.tick >= from_tick) {
            sum += b.mean_bps();
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::optional<std::uint64_t> ticks_to_coverage(const std::vector<CoverageTick>& series, double threshold) {
    for (const auto& c : series) {
        if (c.mean >= threshold) {
            return c.tick;
        }
    }
    return std::nullopt;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void write_verification_csv(std::ostream& out, const std::vector<VehicleSummary>& rows) {
    out << "vehicle,label,kind,n_local,n_received,n_all,verification_ratio,n_received_unseen,n_verified_unseen,"
           "running_verification_ratio\n";
    for (const auto& r : rows) {
        out << r.vehicle << ',' << r.label << ',' << r.kind << ',' << r.n_local << ',' << r.n_received << ','
            << r.n_all << ',' << (r.ratio ? fixed(*r.ratio) : std::string()) << ',' << r.n_received_unseen << ','
            << r.n_verified_unseen << ',' << (r.running_ratio ? fixed(*r.running_ratio) : std::string()) << '\n';
    }
}

void write_ttv_csv(std::ostream& out, const std::vector<TtvBucket>& rows) {
    out << "hour,ttv_s,count,percent\n";
    for (const auto& r : rows) {
        out << r.hour << ',' << r.bucket_start_s << ',' << r.count << ',' << fixed(r.percent, 4) << '\n';
    }
}

void write_bandwidth_csv(std::ostream& out, const std::vector<BandwidthTick>& rows) {
    out << "tick,mean_bps,transmitters,messages,objects,proofs,total_bytes\n";
    for (const auto& r : rows) {
        out << r.tick << ',' << fixed(r.mean_bps(), 3) << ',' << r.transmitters << ',' << r.messages << ','
            << r.objects << ',' << r.proofs << ',' << r.total_bytes << '\n';
    }
}

void write_coverage_csv(std::ostream& out, const std::vector<CoverageTick>& rows) {
    out << "tick,mean_coverage,min_coverage\n";
    for (const auto& r : rows) {
        out << r.tick << ',' << fixed(r.mean) << ',' << fixed(r.min) << '\n';
    }
}

void write_heatmap_csv(std::ostream& out, double cell_m, const std::vector<HeatCell>& rows) {
    out << "x_min,y_min,cell_m,verifications,sightings\n";
    for (const auto& r : rows) {
        out << fixed(static_cast<double>(r.x_bin) * cell_m, 1) << ',' << fixed(static_cast<double>(r.y_bin) * cell_m, 1)
            << ',' << fixed(cell_m, 1) << ',' << r.verifications << ',' << r.sightings << '\n';
    }
}

}  // namespace zkpot::sim
