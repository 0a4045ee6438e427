#include "entanglekit/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "entanglekit/errors.hpp"
#include "entanglekit/rng.hpp"

namespace entanglekit {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Raw parse result before label conventions are applied.
struct RawTable {
    Dataset dataset;       // labels hold the CSV label column verbatim
    std::string embedding;
    double theta = kDefaultTheta;
};

ordered_json read_sidecar(const std::filesystem::path& path) {
    const std::filesystem::path side = path.string() + ".json";
    std::ifstream in(side);
    if (!in)
        throw parse_error("cannot open sidecar " + side.string());
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw parse_error("bad sidecar " + side.string() + ": " + e.what());
    }
    for (const char* key : {"M", "N", "D", "P", "labeled", "embedding", "theta"})
        if (!j.contains(key))
            throw parse_error("sidecar " + side.string() + " is missing key '" + key + "'");
    return j;
}

RawTable load_raw(const std::filesystem::path& path) {
    const ordered_json j = read_sidecar(path);
    RawTable raw;
    const auto m_count = j.at("M").get<std::uint64_t>();
    const auto n = j.at("N").get<std::uint64_t>();
    const auto d = j.at("D").get<std::uint64_t>();
    const auto p = j.at("P").get<std::uint64_t>();
    const bool labeled = j.at("labeled").get<bool>();
    raw.embedding = j.at("embedding").get<std::string>();
    raw.theta = j.at("theta").get<double>();
    if (m_count < 1 || n < 1 || d < 1 || p < 1)
        throw parse_error("sidecar dimensions must be positive");
    if (raw.embedding != "raw" && raw.embedding != "sincos")
        throw parse_error("embedding must be 'raw' or 'sincos'");
    if (!(raw.theta > 0.0))
        throw parse_error("theta must be positive");

    Dataset& ds = raw.dataset;
    ds.n_features = static_cast<std::size_t>(n);
    ds.feature_dim = static_cast<std::size_t>(d);
    ds.spatial_dim = static_cast<std::size_t>(p);
    ds.normalized = raw.embedding == "sincos";
    ds.values.reserve(static_cast<std::size_t>(m_count * n * d));
    if (labeled)
        ds.labels.reserve(static_cast<std::size_t>(m_count));

    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open " + path.string());
    const std::size_t expect_fields = static_cast<std::size_t>(n * d) + (labeled ? 1 : 0);
    std::string line;
    std::size_t lineno = 0;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        ++rows;
        if (rows > m_count)
            throw parse_error("more data rows than the sidecar's M", lineno, 1);
        std::size_t field = 0;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            const std::size_t end = comma == std::string::npos ? line.size() : comma;
            double v = 0.0;
            const auto res = std::from_chars(line.data() + pos, line.data() + end, v);
            if (res.ec != std::errc{} || res.ptr != line.data() + end)
                throw parse_error("malformed number", lineno, pos + 1);
            if (field >= expect_fields)
                throw parse_error("too many fields in row", lineno, pos + 1);
            if (labeled && field == 0)
                ds.labels.push_back(v);
            else
                ds.values.push_back(v);
            ++field;
            if (comma == std::string::npos)
                break;
            pos = comma + 1;
        }
        if (field != expect_fields)
            throw parse_error("too few fields in row", lineno, line.size() + 1);
    }
    if (rows != m_count)
        throw parse_error("fewer data rows than the sidecar's M", lineno, 1);
    return raw;
}

DatasetFile finish(RawTable raw) {
    DatasetFile f;
    f.embedding = std::move(raw.embedding);
    f.theta = raw.theta;
    f.dataset = std::move(raw.dataset);
    f.dataset.validate();
    return f;
}

} // namespace

void save_dataset(const std::filesystem::path& path, const Dataset& ds,
                  const std::string& embedding, double theta) {
    ds.validate();
    if (embedding != "raw" && embedding != "sincos")
        throw argument_error("embedding must be 'raw' or 'sincos'");
    if (!(theta > 0.0))
        throw argument_error("theta must be positive");

    std::ostringstream body;
    const std::size_t m_count = ds.instance_count();
    for (std::size_t m = 0; m < m_count; ++m) {
        bool first = true;
        if (ds.labeled()) {
            body << format_double(ds.labels[m]);
            first = false;
        }
        for (std::size_t f = 0; f < ds.n_features; ++f)
            for (std::size_t d = 0; d < ds.feature_dim; ++d) {
                if (!first)
                    body << ',';
                body << format_double(ds.value(m, f, d));
                first = false;
            }
        body << '\n';
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw argument_error("cannot write " + path.string());
    out << body.str();
    if (!out)
        throw argument_error("write failed for " + path.string());

    ordered_json j;
    j["M"] = m_count;
    j["N"] = ds.n_features;
    j["D"] = ds.feature_dim;
    j["P"] = ds.spatial_dim;
    j["labeled"] = ds.labeled();
    j["embedding"] = embedding;
    j["theta"] = theta;
    const std::filesystem::path side = path.string() + ".json";
    std::ofstream sout(side, std::ios::binary | std::ios::trunc);
    if (!sout)
        throw argument_error("cannot write " + side.string());
    sout << j.dump(2) << '\n';
    if (!sout)
        throw argument_error("write failed for " + side.string());
}

DatasetFile load_dataset(const std::filesystem::path& path) {
    RawTable raw = load_raw(path);
    for (std::size_t m = 0; m < raw.dataset.labels.size(); ++m)
        if (raw.dataset.labels[m] != 1.0 && raw.dataset.labels[m] != -1.0)
            throw parse_error("labels must be +1 or -1 (use one-vs-all for class ids)",
                              m + 1, 1);
    return finish(std::move(raw));
}

DatasetFile load_dataset_one_vs_all(const std::filesystem::path& path, double target_class,
                                    std::uint64_t seed) {
    RawTable raw = load_raw(path);
    if (raw.dataset.labels.empty())
        throw precondition_error("one-vs-all needs a labeled dataset");

    std::vector<std::size_t> pos, neg;
    for (std::size_t m = 0; m < raw.dataset.labels.size(); ++m)
        (raw.dataset.labels[m] == target_class ? pos : neg).push_back(m);
    const std::size_t keep = std::min(pos.size(), neg.size());
    if (keep == 0)
        throw precondition_error("one-vs-all reduction made a side empty");

    rng_engine gen(seed);
    auto subsample = [&](std::vector<std::size_t>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[uniform_index(gen, i)]);
        v.resize(keep);
        std::sort(v.begin(), v.end());
    };
    subsample(pos);
    subsample(neg);

    std::vector<std::size_t> rows;
    rows.reserve(2 * keep);
    rows.insert(rows.end(), pos.begin(), pos.end());
    rows.insert(rows.end(), neg.begin(), neg.end());
    std::sort(rows.begin(), rows.end());

    Dataset out;
    out.n_features = raw.dataset.n_features;
    out.feature_dim = raw.dataset.feature_dim;
    out.spatial_dim = raw.dataset.spatial_dim;
    out.normalized = raw.dataset.normalized;
    out.values.reserve(rows.size() * out.n_features * out.feature_dim);
    out.labels.reserve(rows.size());
    const std::size_t stride = raw.dataset.n_features * raw.dataset.feature_dim;
    for (std::size_t m : rows) {
        const auto* src = raw.dataset.values.data() + m * stride;
        out.values.insert(out.values.end(), src, src + stride);
        out.labels.push_back(raw.dataset.labels[m] == target_class ? 1.0 : -1.0);
    }
    raw.dataset = std::move(out);
    return finish(std::move(raw));
}

} // namespace entanglekit
