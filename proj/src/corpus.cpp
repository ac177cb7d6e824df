#include "driftbench/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace driftbench::corpus {

namespace {

[[noreturn]] void parse_fail(int line_number, const std::string& what) {
    throw Error("parse error at line " + std::to_string(line_number) + ": " + what);
}

std::string_view next_token(std::string_view& rest) {
    size_t b = rest.find_first_not_of(" \t");
    if (b == std::string_view::npos) {
        rest = {};
        return {};
    }
    size_t e = rest.find_first_of(" \t", b);
    std::string_view tok = rest.substr(b, e == std::string_view::npos ? e : e - b);
    rest = e == std::string_view::npos ? std::string_view{} : rest.substr(e);
    return tok;
}

double parse_double_token(std::string_view tok, int line_number) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        parse_fail(line_number, "malformed number '" + std::string(tok) + "'");
    return v;
}

int64_t parse_int_token(std::string_view tok, int line_number) {
    int64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        parse_fail(line_number, "malformed integer '" + std::string(tok) + "'");
    return v;
}

void append_double(std::string& out, double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, r.ptr);
}

} // namespace

Sample parse_sparse_record(std::string_view line, int32_t dim, int line_number) {
    std::string_view rest = line;
    Sample s;

    std::string_view id = next_token(rest);
    if (id.empty()) parse_fail(line_number, "missing sample id");
    s.id = std::string(id);

    std::string_view label = next_token(rest);
    if (label.empty()) parse_fail(line_number, "missing label");
    if (label == "?") {
        s.true_label.reset();
    } else if (label == "0" || label == "1") {
        s.true_label = label == "1" ? 1 : 0;
    } else {
        parse_fail(line_number, "malformed label '" + std::string(label) + "'");
    }

    std::string_view ts = next_token(rest);
    if (ts.empty()) parse_fail(line_number, "missing timestamp");
    s.timestamp = parse_int_token(ts, line_number);

    s.x.dim = dim;
    int32_t prev = -1;
    for (;;) {
        std::string_view tok = next_token(rest);
        if (tok.empty()) break;
        size_t colon = tok.find(':');
        if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size())
            parse_fail(line_number, "malformed feature token '" + std::string(tok) + "'");
        int64_t idx = parse_int_token(tok.substr(0, colon), line_number);
        double val = parse_double_token(tok.substr(colon + 1), line_number);
        if (idx < 0 || idx >= dim)
            parse_fail(line_number, "feature index " + std::to_string(idx) +
                                        " out of range for dim " + std::to_string(dim));
        if (idx == prev) parse_fail(line_number, "duplicate feature index " + std::to_string(idx));
        if (idx < prev) parse_fail(line_number, "feature indices not ascending");
        if (!std::isfinite(val)) parse_fail(line_number, "non-finite feature value");
        prev = static_cast<int32_t>(idx);
        if (val != 0.0) s.x.entries.push_back({static_cast<int32_t>(idx), val});
    }
    return s;
}

std::string format_sparse_record(const Sample& s) {
    std::string out = s.id;
    out += ' ';
    out += s.true_label ? (*s.true_label == 1 ? "1" : "0") : "?";
    out += ' ';
    out += std::to_string(s.timestamp);
    for (const auto& e : s.x.entries) {
        out += ' ';
        out += std::to_string(e.index);
        out += ':';
        append_double(out, e.value);
    }
    return out;
}

std::vector<Sample> read_record_file(const std::filesystem::path& path, int32_t dim) {
    std::ifstream in(path);
    if (!in) throw Error("missing file: " + path.string());
    std::vector<Sample> out;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(parse_sparse_record(line, dim, line_number));
    }
    return out;
}

void write_record_file(std::ostream& out, const std::vector<Sample>& samples) {
    for (const auto& s : samples) out << format_sparse_record(s) << '\n';
}

TemporalStream load_manifest(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("missing manifest: " + manifest_path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!j.contains("dim") || !j.contains("granularity") || !j.contains("periods"))
        throw ConfigError("manifest must declare dim, granularity, periods");

    TemporalStream stream;
    stream.d = j.at("dim").get<int32_t>();
    if (stream.d <= 0) throw ConfigError("manifest dim must be positive");
    stream.granularity = granularity_from_string(j.at("granularity").get<std::string>());

    const auto& periods = j.at("periods");
    if (!periods.is_array() || periods.empty()) throw ConfigError("manifest periods empty");

    const auto base = manifest_path.parent_path();
    int64_t prev_t = -1;
    int64_t prev_end = INT64_MIN;
    int renumbered = 0;
    for (const auto& p : periods) {
        Batch b;
        int64_t declared_t = p.at("t").get<int64_t>();
        if (declared_t <= prev_t) throw Error("manifest periods not strictly increasing");
        prev_t = declared_t;
        b.period = renumbered++;
        b.start_ts = p.at("start_ts").get<int64_t>();
        b.end_ts = p.at("end_ts").get<int64_t>();
        if (b.start_ts < prev_end) throw Error("non-monotone period timestamps in manifest");
        if (b.end_ts < b.start_ts) throw Error("period interval end precedes start");
        prev_end = b.end_ts;
        b.samples = read_record_file(base / p.at("file").get<std::string>(), stream.d);
        if (b.samples.empty())
            throw Error("empty batch for period " + std::to_string(declared_t));
        for (const auto& s : b.samples) {
            if (s.timestamp < b.start_ts || s.timestamp > b.end_ts)
                throw Error("sample " + s.id + " timestamp outside declared period interval");
            if (b.period == 0 && !s.true_label)
                throw Error("unlabeled sample " + s.id + " in period 0");
        }
        if (b.period == 0)
            stream.initial = std::move(b);
        else
            stream.incoming.push_back(std::move(b));
    }
    return stream;
}

std::filesystem::path write_stream(const TemporalStream& stream,
                                   const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    nlohmann::json periods = nlohmann::json::array();
    for (int t = 0; t <= stream.horizon(); ++t) {
        const Batch& b = stream.batch_at(t);
        char name[32];
        std::snprintf(name, sizeof(name), "period_%03d.txt", t);
        {
            std::ofstream out(out_dir / name, std::ios::binary);
            if (!out) throw Error("cannot write " + (out_dir / name).string());
            write_record_file(out, b.samples);
        }
        periods.push_back({{"t", t},
                           {"file", std::string(name)},
                           {"start_ts", b.start_ts},
                           {"end_ts", b.end_ts}});
    }
    nlohmann::json manifest = {{"dim", stream.d},
                               {"granularity", to_string(stream.granularity)},
                               {"periods", periods}};
    auto path = out_dir / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << manifest.dump(2) << '\n';
    return path;
}

TruncatedStream truncate_features(const TemporalStream& stream, int32_t k) {
    if (k <= 0) throw Error("truncate_features: k must be positive");

    std::vector<int64_t> freq(static_cast<size_t>(stream.d), 0);
    for (const auto& s : stream.initial.samples)
        for (const auto& e : s.x.entries) ++freq[static_cast<size_t>(e.index)];

    std::vector<int32_t> active;
    for (int32_t j = 0; j < stream.d; ++j)
        if (freq[static_cast<size_t>(j)] > 0) active.push_back(j);
    if (active.empty()) throw Error("truncate_features: no active features");

    std::stable_sort(active.begin(), active.end(), [&](int32_t a, int32_t b) {
        return freq[static_cast<size_t>(a)] > freq[static_cast<size_t>(b)];
    });
    if (static_cast<size_t>(k) < active.size()) active.resize(static_cast<size_t>(k));

    std::vector<int32_t> new_index(static_cast<size_t>(stream.d), -1);
    for (size_t n = 0; n < active.size(); ++n) new_index[static_cast<size_t>(active[n])] = static_cast<int32_t>(n);

    auto remap = [&](const Batch& src) {
        Batch b;
        b.period = src.period;
        b.start_ts = src.start_ts;
        b.end_ts = src.end_ts;
        b.samples.reserve(src.samples.size());
        for (const auto& s : src.samples) {
            Sample t;
            t.id = s.id;
            t.timestamp = s.timestamp;
            t.true_label = s.true_label;
            t.x.dim = static_cast<int32_t>(active.size());
            for (const auto& e : s.x.entries) {
                int32_t ni = new_index[static_cast<size_t>(e.index)];
                if (ni >= 0) t.x.entries.push_back({ni, e.value});
            }
            std::sort(t.x.entries.begin(), t.x.entries.end(),
                      [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
            b.samples.push_back(std::move(t));
        }
        return b;
    };

    TruncatedStream out;
    out.stream.d = static_cast<int32_t>(active.size());
    out.stream.granularity = stream.granularity;
    out.stream.initial = remap(stream.initial);
    out.stream.incoming.reserve(stream.incoming.size());
    for (const auto& b : stream.incoming) out.stream.incoming.push_back(remap(b));
    out.mapping.kept = std::move(active);
    return out;
}

} // namespace driftbench::corpus
