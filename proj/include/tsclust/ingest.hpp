#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tsclust/types.hpp"

namespace tsclust::ingest {

struct IngestOptions {
    std::size_t samples_per_day = 48;    // 1 = input is already daily
    bool aggregate_daily = true;
    bool mean_normalize = true;
    std::optional<std::size_t> max_days;  // keep only the first days
};

struct Rejection {
    std::string client_id;
    std::string reason;
};

struct IngestResult {
    TimeSeriesDataset dataset;        // after aggregation and normalization
    Matrix daily;                     // after aggregation, before normalization
    std::vector<Rejection> rejected;
};

/// Reads smart-meter readings in either layout:
///  long: header `client_id,timestamp_slot,value`, one reading per row;
///  wide: `client_id[,label],v_0,...` with one client per row.
/// Clients with missing or duplicate slots, non-finite values or a zero mean
/// are dropped and logged. Malformed rows throw ParseError.
IngestResult ingest_cer_like(const std::filesystem::path& path, const IngestOptions& options = {});

/// `client_id,reason` rows.
void write_rejection_log(const std::filesystem::path& path, const std::vector<Rejection>& rejected);

}  // namespace tsclust::ingest
