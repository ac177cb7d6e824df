#pragma once

#include "driftbench/sparse.hpp"

#include <filesystem>
#include <iosfwd>
#include <string_view>

namespace driftbench::corpus {

// One sample per line: `<id> <label|?> <timestamp> <idx>:<val> ...`
// with strictly ascending indices. `#` lines are comments.
Sample parse_sparse_record(std::string_view line, int32_t dim, int line_number);

// Canonical form of a record; parse(format(s)) == s and formatting is a
// fixed point, so serialized streams are byte-stable.
std::string format_sparse_record(const Sample& s);

std::vector<Sample> read_record_file(const std::filesystem::path& path, int32_t dim);
void write_record_file(std::ostream& out, const std::vector<Sample>& samples);

// Manifest: JSON with fields dim, granularity,
// periods: [{t, file, start_ts, end_ts}]. File paths resolve relative to
// the manifest's directory. Periods are renumbered 0..T on load.
TemporalStream load_manifest(const std::filesystem::path& manifest_path);

// Writes one record file per batch plus manifest.json; returns manifest path.
std::filesystem::path write_stream(const TemporalStream& stream,
                                   const std::filesystem::path& out_dir);

// Maps new feature index -> original index, descending period-0 frequency,
// ties by ascending original index.
struct FeatureTruncation {
    std::vector<int32_t> kept;
};

struct TruncatedStream {
    TemporalStream stream;
    FeatureTruncation mapping;
};

// Keeps the k most frequent features, frequency counted as the number of
// period-0 samples with a non-zero value. Features never active in period 0
// are dropped. Idempotent for a fixed k.
TruncatedStream truncate_features(const TemporalStream& stream, int32_t k);

} // namespace driftbench::corpus
