#include "tsclust/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "tsclust/csv.hpp"
#include "tsclust/error.hpp"
#include "tsclust/transforms.hpp"

namespace tsclust::ingest {

namespace {

struct RawClient {
    std::string id;
    std::string label;
    std::vector<double> values;
    std::vector<unsigned char> seen;  // 0 missing, 1 present, 2+ duplicated
    std::string problem;
};

double parse_value(std::string_view field, const std::string& source, std::size_t line) {
    try {
        return csv::parse_double(field);
    } catch (const std::invalid_argument& e) {
        throw ParseError(source, line, std::string("bad value: ") + e.what());
    }
}

std::vector<RawClient> read_long(const std::vector<std::string>& lines, const std::string& source) {
    std::vector<RawClient> clients;
    std::map<std::string, std::size_t, std::less<>> index;
    std::size_t slots = 0;
    struct Reading {
        std::size_t client, slot;
        double value;
    };
    std::vector<Reading> readings;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto f = csv::split(lines[ln]);
        if (f.size() != 3) throw ParseError(source, ln + 1, "expected 3 fields, got " + std::to_string(f.size()));
        if (f[0].empty()) throw ParseError(source, ln + 1, "empty client_id");
        std::size_t slot = 0;
        try {
            slot = csv::parse_index(f[1]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, ln + 1, std::string("bad timestamp_slot: ") + e.what());
        }
        const double value = parse_value(f[2], source, ln + 1);
        auto it = index.find(f[0]);
        if (it == index.end()) {
            it = index.emplace(std::string(f[0]), clients.size()).first;
            clients.push_back({std::string(f[0]), {}, {}, {}, {}});
        }
        readings.push_back({it->second, slot, value});
        slots = std::max(slots, slot + 1);
    }
    for (auto& c : clients) {
        c.values.assign(slots, 0.0);
        c.seen.assign(slots, 0);
    }
    for (const auto& r : readings) {
        auto& c = clients[r.client];
        c.values[r.slot] = r.value;
        if (c.seen[r.slot] < 2) ++c.seen[r.slot];
    }
    return clients;
}

std::vector<RawClient> read_wide(const std::vector<std::string>& lines, const std::string& source) {
    const auto header = csv::split(lines[0]);
    const bool has_label = header.size() >= 2 && header[1] == "label";
    const std::size_t first = has_label ? 2 : 1;
    const std::size_t slots = header.size() - first;
    std::vector<RawClient> clients;
    std::map<std::string, std::size_t, std::less<>> index;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const auto f = csv::split(lines[ln]);
        if (f.size() != header.size())
            throw ParseError(source, ln + 1,
                             "row has " + std::to_string(f.size()) + " fields, header has " +
                                 std::to_string(header.size()));
        if (f[0].empty()) throw ParseError(source, ln + 1, "empty client_id");
        if (auto it = index.find(f[0]); it != index.end()) {
            clients[it->second].problem = "duplicate client row";
            continue;
        }
        index.emplace(std::string(f[0]), clients.size());
        RawClient c{std::string(f[0]), has_label ? std::string(f[1]) : std::string(), std::vector<double>(slots, 0.0),
                    std::vector<unsigned char>(slots, 1), {}};
        for (std::size_t s = 0; s < slots; ++s) {
            if (f[first + s].empty())
                c.seen[s] = 0;
            else
                c.values[s] = parse_value(f[first + s], source, ln + 1);
        }
        clients.push_back(std::move(c));
    }
    return clients;
}

std::string describe_slots(const RawClient& c) {
    std::size_t missing = 0, duplicate = 0, first_missing = 0, first_duplicate = 0;
    for (std::size_t s = 0; s < c.seen.size(); ++s) {
        if (c.seen[s] == 0 && missing++ == 0) first_missing = s;
        if (c.seen[s] > 1 && duplicate++ == 0) first_duplicate = s;
    }
    std::ostringstream os;
    if (missing) os << missing << " missing slot(s), first " << first_missing;
    if (duplicate) os << (missing ? "; " : "") << duplicate << " duplicated slot(s), first " << first_duplicate;
    return os.str();
}

}  // namespace

IngestResult ingest_cer_like(const std::filesystem::path& path, const IngestOptions& options) {
    if (options.samples_per_day == 0) throw ParameterError("ingest: samples_per_day must be >= 1");
    if (options.max_days && *options.max_days == 0) throw ParameterError("ingest: max_days must be >= 1");
    const std::string source = path.string();
    const auto lines = csv::read_lines(path);
    if (lines.empty()) throw ParseError(source, 1, "missing header row");
    const auto header = csv::split(lines[0]);
    const bool long_layout =
        header.size() == 3 && header[0] == "client_id" && header[1] == "timestamp_slot" && header[2] == "value";
    if (!long_layout && (header.size() < 2 || header[0].empty()))
        throw ParseError(source, 1, "header is neither client_id,timestamp_slot,value nor an id column followed by values");
    auto clients = long_layout ? read_long(lines, source) : read_wide(lines, source);

    const std::size_t spd = options.aggregate_daily ? options.samples_per_day : 1;
    const std::size_t slots = clients.empty() ? 0 : clients.front().values.size();
    if (slots % spd != 0)
        throw ParseError(source, 1,
                         std::to_string(slots) + " slots per client is not a whole number of days of " +
                             std::to_string(spd) + " samples");
    std::size_t days = slots / spd;
    if (options.max_days) days = std::min(days, *options.max_days);

    IngestResult out;
    std::vector<double> daily_values, normalized_values;
    std::vector<std::string> labels;
    for (auto& c : clients) {
        if (c.problem.empty()) c.problem = describe_slots(c);
        if (c.problem.empty() && !std::all_of(c.values.begin(), c.values.end(), [](double v) { return std::isfinite(v); }))
            c.problem = "non-finite reading";
        if (!c.problem.empty()) {
            out.rejected.push_back({c.id, c.problem});
            continue;
        }
        auto daily = transforms::aggregate_daily(c.values, spd);
        daily.resize(days);
        std::vector<double> norm = daily;
        if (options.mean_normalize) {
            const double mean = days ? std::accumulate(daily.begin(), daily.end(), 0.0) / static_cast<double>(days) : 0.0;
            if (mean == 0.0) {
                out.rejected.push_back({c.id, "zero mean consumption"});
                continue;
            }
            norm = transforms::mean_normalize(daily);
        }
        out.dataset.ids.push_back(c.id);
        labels.push_back(c.label);
        daily_values.insert(daily_values.end(), daily.begin(), daily.end());
        normalized_values.insert(normalized_values.end(), norm.begin(), norm.end());
    }
    const std::size_t n = out.dataset.ids.size();
    out.daily = Matrix(n, days, std::move(daily_values));
    out.dataset.series = Matrix(n, days, std::move(normalized_values));

    if (std::any_of(labels.begin(), labels.end(), [](const auto& l) { return !l.empty(); })) {
        for (const auto& l : labels) {
            auto it = std::find(out.dataset.class_names.begin(), out.dataset.class_names.end(), l);
            if (it == out.dataset.class_names.end()) {
                out.dataset.class_names.push_back(l);
                it = out.dataset.class_names.end() - 1;
            }
            out.dataset.labels.push_back(static_cast<int>(it - out.dataset.class_names.begin()));
        }
    }
    return out;
}

void write_rejection_log(const std::filesystem::path& path, const std::vector<Rejection>& rejected) {
    std::string text = "client_id,reason\n";
    for (const auto& r : rejected) text += r.client_id + ',' + r.reason + '\n';
    csv::write_text(path, text);
}

}  // namespace tsclust::ingest
