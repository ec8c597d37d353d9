#include "orgsim/metrics.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "orgsim/errors.hpp"

namespace orgsim {

void MetricsLog::count_transmission(Tick t, const std::string& subject,
                                    const std::string& type) {
    auto& by_type = traffic[t][subject];
    ++by_type[type];
    ++by_type["total"];
    ++total_transmissions;
}

Tick MetricsLog::time_to_form(const std::string& subject) const {
    const auto it = primary_events.find(subject);
    if (it == primary_events.end() || it->second.empty())
        throw NoDataError("time_to_form: no cluster entries recorded for subject '" + subject +
                          "'");
    Tick first = it->second.front().tick;
    Tick last = first;
    for (const auto& e : it->second) {
        first = std::min(first, e.tick);
        last = std::max(last, e.tick);
    }
    return last - first;
}

std::vector<std::pair<Tick, std::uint64_t>> MetricsLog::traffic_series(
    const std::string& subject, Tick bin) const {
    if (bin < 1) throw std::invalid_argument("traffic_series: bin must be >= 1");

    Tick limit = window_end;
    if (!traffic.empty()) limit = std::max(limit, traffic.rbegin()->first + 1);
    if (limit <= 0) return {};

    std::vector<std::pair<Tick, std::uint64_t>> series;
    series.reserve(static_cast<std::size_t>((limit + bin - 1) / bin));
    for (Tick start = 0; start < limit; start += bin) series.emplace_back(start, 0);

    for (const auto& [t, by_subject] : traffic) {
        const auto it = by_subject.find(subject);
        if (it == by_subject.end()) continue;
        std::uint64_t n = 0;
        for (const char* type : {"Density", "ClusterSummary"}) {
            const auto jt = it->second.find(type);
            if (jt != it->second.end()) n += jt->second;
        }
        if (n) series[static_cast<std::size_t>(t / bin)].second += n;
    }
    return series;
}

void MetricsLog::export_csv(const std::string& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());

    auto open = [&](const char* name) {
        const std::string path = dir + "/" + name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot write '" + path + "'");
        return f;
    };

    {
        auto f = open("traffic.csv");
        f << "tick,subject,msg_type,count\n";
        for (const auto& [t, by_subject] : traffic)
            for (const auto& [subject, by_type] : by_subject)
                for (const auto& [type, count] : by_type)
                    f << t << ',' << subject << ',' << type << ',' << count << '\n';
    }

    {
        auto f = open("formation.csv");
        f << "subject,n_nodes,time_to_form_ticks\n";
        for (const auto& [subject, n] : subject_counts) {
            const auto it = primary_events.find(subject);
            if (it == primary_events.end() || it->second.empty())
                f << subject << ',' << n << ",-1\n";
            else
                f << subject << ',' << n << ',' << time_to_form(subject) << '\n';
        }
    }

    {
        auto f = open("census.csv");
        f << "cluster_point,subject,topic,member\n";
        auto rows = census;
        std::sort(rows.begin(), rows.end(), [](const CensusRow& a, const CensusRow& b) {
            return std::tie(a.cluster_point, a.subject, a.topic, a.member) <
                   std::tie(b.cluster_point, b.subject, b.topic, b.member);
        });
        for (const auto& r : rows)
            f << r.cluster_point << ',' << r.subject << ',' << r.topic << ',' << r.member
              << '\n';
    }

    if (trace_enabled) {
        auto f = open("trace.csv");
        f << "tick,msg_type,origin,receiver,subject,value\n";
        for (const auto& line : trace) f << line << '\n';
    }
}

}  // namespace orgsim
