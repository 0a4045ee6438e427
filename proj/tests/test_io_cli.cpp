#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "entanglekit/data_tensor.hpp"
#include "entanglekit/dataset_io.hpp"
#include "entanglekit/errors.hpp"
#include "entanglekit/partitions.hpp"
#include "entanglekit/rng.hpp"
#include "entanglekit/synth.hpp"
#include "entanglekit/tensor.hpp"
#include "entanglekit/tensor_io.hpp"
#include "entanglekit/tree_tn.hpp"

using namespace entanglekit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::current_path() / "io_cli_scratch";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path fixture(const std::string& name) {
    return fs::path(ENTANGLEKIT_FIXTURE_DIR) / name;
}

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
    std::vector<const char*> argv{"entanglekit"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int rc = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text)
        *out_text = out.str();
    if (err_text)
        *err_text = err.str();
    return rc;
}

Dataset random_dataset(std::size_t n, std::size_t d, std::size_t m, bool labeled,
                       std::uint64_t seed) {
    Dataset ds;
    ds.n_features = n;
    ds.feature_dim = d;
    rng_engine gen(seed);
    ds.values.resize(m * n * d);
    for (double& v : ds.values)
        v = normal(gen) * 3.0;
    if (labeled)
        for (std::size_t i = 0; i < m; ++i)
            ds.labels.push_back(normal(gen) > 0 ? 1 : -1);
    return ds;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("dataset save/load round trip is bit-exact") {
    const fs::path path = scratch() / "roundtrip.csv";
    auto ds = random_dataset(3, 2, 7, true, 1);
    ds.values[0] = 0.1;
    ds.values[1] = 1e-300;
    ds.values[2] = -12345.678901234567;
    save_dataset(path, ds, "raw", 0.21);
    const auto back = load_dataset(path);
    CHECK(back.dataset.values == ds.values);
    CHECK(back.dataset.labels == ds.labels);
    CHECK(back.dataset.n_features == 3);
    CHECK(back.dataset.feature_dim == 2);
    CHECK(back.dataset.spatial_dim == 1);
    CHECK(back.embedding == "raw");
    CHECK(back.theta == 0.21);

    SUBCASE("embedded datasets round trip with the normalized flag") {
        const fs::path epath = scratch() / "roundtrip_embedded.csv";
        const auto eds = embed_dataset_sincos(random_dataset(3, 1, 5, true, 4), 0.3);
        save_dataset(epath, eds, "sincos", 0.3);
        const auto eback = load_dataset(epath);
        CHECK(eback.dataset.values == eds.values);
        CHECK(eback.dataset.normalized);
        CHECK(eback.embedding == "sincos");
    }

    SUBCASE("unlabeled datasets round trip too") {
        const fs::path upath = scratch() / "roundtrip_unlabeled.csv";
        const auto uds = random_dataset(4, 1, 5, false, 2);
        save_dataset(upath, uds);
        const auto uback = load_dataset(upath);
        CHECK(uback.dataset.values == uds.values);
        CHECK_FALSE(uback.dataset.labeled());
        CHECK(uback.embedding == "raw");
    }
    SUBCASE("sidecar is valid JSON with the full shape") {
        const json side = json::parse(slurp(path.string() + ".json"));
        CHECK(side.at("M") == 7);
        CHECK(side.at("N") == 3);
        CHECK(side.at("D") == 2);
        CHECK(side.at("P") == 1);
        CHECK(side.at("labeled") == true);
        CHECK(side.at("embedding") == "raw");
        CHECK(side.at("theta") == 0.21);
    }
}

TEST_CASE("frozen fixture loads with CRLF endings and blank lines") {
    const auto file = load_dataset(fixture("tiny.csv"));
    REQUIRE(file.dataset.instance_count() == 3);
    REQUIRE(file.dataset.n_features == 2);
    REQUIRE(file.dataset.feature_dim == 2);
    CHECK(file.embedding == "raw");
    CHECK(file.theta == 0.11);
    CHECK(file.dataset.labels == std::vector<int>{1, -1, 1});
    CHECK(file.dataset.value(0, 0, 0) == 0.1);
    CHECK(file.dataset.value(0, 0, 1) == -0.25);
    CHECK(file.dataset.value(0, 1, 0) == 3.5);
    CHECK(file.dataset.value(0, 1, 1) == 1e-300);
    CHECK(file.dataset.value(1, 0, 0) == 2.718281828459045);
    CHECK(file.dataset.value(1, 0, 1) == 0.0);
    CHECK(std::signbit(file.dataset.value(1, 0, 1))); // "-0" keeps its sign
    CHECK(file.dataset.value(1, 1, 0) == 6.25e-2);
    CHECK(file.dataset.value(2, 1, 1) == -7.0);
}

TEST_CASE("loader reports the offending line and column") {
    const fs::path good = scratch() / "errors.csv";
    save_dataset(good, random_dataset(2, 1, 3, true, 3));

    const auto rewrite_row = [&](std::size_t row, const std::string& text) {
        std::istringstream in(slurp(good));
        std::ostringstream out;
        std::string line;
        std::size_t i = 0;
        while (std::getline(in, line))
            out << (++i == row ? text : line) << '\n';
        const fs::path bad = scratch() / "errors_bad.csv";
        std::ofstream(bad) << out.str();
        fs::copy_file(good.string() + ".json", bad.string() + ".json",
                      fs::copy_options::overwrite_existing);
        return bad;
    };

    SUBCASE("malformed number") {
        const auto bad = rewrite_row(2, "1,0.5,oops");
        try {
            load_dataset(bad);
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(e.line == 2);
            CHECK(e.column == 7);
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("too few fields") {
        const auto bad = rewrite_row(3, "1,0.5");
        try {
            load_dataset(bad);
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(e.line == 3);
        }
    }
    SUBCASE("too many fields") {
        const auto bad = rewrite_row(1, "1,0.5,0.5,0.5");
        CHECK_THROWS_AS(load_dataset(bad), parse_error);
    }
    SUBCASE("row count mismatch") {
        const auto bad = rewrite_row(3, "");
        try {
            load_dataset(bad);
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(std::string(e.what()).find("fewer data rows") != std::string::npos);
        }
    }
    SUBCASE("class labels need one-vs-all") {
        const auto bad = rewrite_row(1, "3,0.5,0.5");
        try {
            load_dataset(bad);
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(std::string(e.what()).find("one-vs-all") != std::string::npos);
        }
    }
    SUBCASE("missing sidecar") {
        const fs::path orphan = scratch() / "orphan.csv";
        std::ofstream(orphan) << "1,0.5,0.5\n";
        CHECK_THROWS_AS(load_dataset(orphan), parse_error);
    }
}

TEST_CASE("one-vs-all reduction balances the classes in place") {
    const auto file = load_dataset_one_vs_all(fixture("classes.csv"), 1.0, 9);
    // classes.csv holds labels {0,1,2,1,0,1}: three 1s, three others
    REQUIRE(file.dataset.instance_count() == 6);
    std::size_t pos = 0, neg = 0;
    for (int y : file.dataset.labels)
        (y == 1 ? pos : neg) += 1;
    CHECK(pos == 3);
    CHECK(neg == 3);
    CHECK(file.dataset.labels == std::vector<int>{-1, 1, -1, 1, -1, 1});
    CHECK(file.dataset.value(0, 0, 0) == 1.5);
    CHECK(file.dataset.value(5, 1, 0) == 2.375);

    SUBCASE("majority side is subsampled deterministically") {
        const fs::path path = scratch() / "majority.csv";
        // labels {2,2,2,2,1,1}: two 1s, four others -> keep 2 of each
        std::ofstream(path) << "2,1\n2,2\n2,3\n2,4\n1,5\n1,6\n";
        std::ofstream(path.string() + ".json")
            << R"({"M":6,"N":1,"D":1,"P":1,"labeled":true,"embedding":"raw","theta":0.085})";
        const auto cut = load_dataset_one_vs_all(path, 1.0, 4);
        REQUIRE(cut.dataset.instance_count() == 4);
        std::size_t kept_pos = 0;
        for (int y : cut.dataset.labels)
            kept_pos += (y == 1);
        CHECK(kept_pos == 2);
        const auto again = load_dataset_one_vs_all(path, 1.0, 4);
        CHECK(again.dataset.values == cut.dataset.values);
        // original row order is preserved: feature values stay increasing
        for (std::size_t m = 1; m < 4; ++m)
            CHECK(cut.dataset.value(m, 0, 0) > cut.dataset.value(m - 1, 0, 0));
    }
}

TEST_CASE("cli: synth then entangle matches the dense route") {
    const fs::path data = scratch() / "synth8.csv";
    std::string out;
    REQUIRE(run_cli({"synth", "--kind", "block-pairs", "-n", "8", "-m", "40",
                     "--rho", "0.9", "--seed", "5", "-o", data.string()},
                    &out) == 0);
    const json synth_report = json::parse(out);
    CHECK(synth_report.at("features") == 8);
    CHECK(synth_report.at("group_of").size() == 8);

    std::string qe_out;
    REQUIRE(run_cli({"entangle", data.string(), "--seed", "1"}, &qe_out) == 0);
    const json report = json::parse(qe_out);
    CHECK(report.at("embedding") == "sincos");
    CHECK(report.at("levels").size() == 3); // default level range 1..min(5, L)

    const auto file = load_dataset(data);
    const auto embedded =
        embed_dataset_sincos(file.dataset, report.at("theta").get<double>());
    const auto dense = empirical_data_tensor_dense(embedded);
    std::size_t checked = 0;
    for (const auto& level : report.at("levels")) {
        for (const auto& entry : level.at("partitions")) {
            const auto axes = entry.at("axes").get<std::vector<std::size_t>>();
            const double want = entanglement(dense, AxisPartition(8, axes));
            CHECK(entry.at("qe").get<double>() ==
                  doctest::Approx(want).epsilon(1e-7).scale(1.0));
            ++checked;
        }
    }
    CHECK(checked == 2 + 4 + 8);

    SUBCASE("reports are byte-deterministic") {
        std::string second;
        REQUIRE(run_cli({"entangle", data.string(), "--seed", "1"}, &second) == 0);
        CHECK(second == qe_out);
    }
    SUBCASE("level selection narrows the report") {
        std::string narrow;
        REQUIRE(run_cli({"entangle", data.string(), "--levels", "2..3"}, &narrow) == 0);
        const json nj = json::parse(narrow);
        REQUIRE(nj.at("levels").size() == 2);
        CHECK(nj.at("levels")[0].at("level") == 2);
        CHECK(nj.at("levels")[1].at("level") == 3);
        std::string single;
        REQUIRE(run_cli({"entangle", data.string(), "--levels", "3"}, &single) == 0);
        CHECK(json::parse(single).at("levels").size() == 1);
    }
    SUBCASE("a single instance has a product tensor") {
        const fs::path one = scratch() / "synth_one.csv";
        REQUIRE(run_cli({"synth", "--kind", "block-pairs", "-n", "8", "-m", "1",
                         "--seed", "6", "-o", one.string()}) == 0);
        std::string one_out;
        REQUIRE(run_cli({"entangle", one.string()}, &one_out) == 0);
        for (const auto& level : json::parse(one_out).at("levels"))
            for (const auto& entry : level.at("partitions"))
                CHECK(entry.at("qe").get<double>() <= 1e-9);
    }
}

TEST_CASE("cli: rearrange, apply, swapgen") {
    const fs::path data = scratch() / "pairs16.csv";
    REQUIRE(run_cli({"synth", "--kind", "block-pairs", "-n", "16", "-m", "300",
                     "--rho", "0.9", "--seed", "11", "-o", data.string()}) == 0);

    const fs::path perm_path = scratch() / "perm.json";
    std::string re_out;
    REQUIRE(run_cli({"rearrange", data.string(), "-o", perm_path.string(), "--seed",
                     "2"},
                    &re_out) == 0);
    const json re = json::parse(re_out);
    CHECK(re.at("surrogate_after").get<double>() <=
          re.at("surrogate_before").get<double>() + 1e-9);

    const json perm = json::parse(slurp(perm_path));
    CHECK(perm.at("P") == 1);
    CHECK(perm.at("N") == 16);
    CHECK(perm.at("layout") == "row-major");
    auto pi = perm.at("pi").get<std::vector<std::size_t>>();
    REQUIRE(pi.size() == 16);
    auto sorted = pi;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 16; ++i)
        CHECK(sorted[i] == i);
    CHECK(perm.at("cuts").size() == 1 + 2 + 4 + 8);

    SUBCASE("apply places each feature at its target position") {
        const fs::path applied = scratch() / "applied.csv";
        REQUIRE(run_cli({"apply", data.string(), perm_path.string(), "-o",
                         applied.string()}) == 0);
        const auto before = load_dataset(data).dataset;
        const auto after = load_dataset(applied).dataset;
        REQUIRE(after.n_features == 16);
        for (std::size_t m = 0; m < before.instance_count(); ++m)
            for (std::size_t f = 0; f < 16; ++f)
                CHECK(after.value(m, pi[f], 0) == before.value(m, f, 0));
        CHECK(after.labels == before.labels);
    }
    SUBCASE("swapgen with zero swaps copies the dataset") {
        const fs::path same = scratch() / "same.csv";
        std::string sw_out;
        REQUIRE(run_cli({"swapgen", data.string(), "-k", "0", "-o", same.string(),
                         "--seed", "3"},
                        &sw_out) == 0);
        CHECK(json::parse(sw_out).at("swaps") == 0);
        CHECK(load_dataset(same).dataset.values == load_dataset(data).dataset.values);
    }
    SUBCASE("swapgen is seed-deterministic") {
        const fs::path a = scratch() / "swapa.csv";
        const fs::path b = scratch() / "swapb.csv";
        REQUIRE(run_cli({"swapgen", data.string(), "-k", "4", "-o", a.string(),
                         "--seed", "9"}) == 0);
        REQUIRE(run_cli({"swapgen", data.string(), "-k", "4", "-o", b.string(),
                         "--seed", "9"}) == 0);
        CHECK(slurp(a) == slurp(b));
        CHECK(load_dataset(a).dataset.values != load_dataset(data).dataset.values);
    }
}

TEST_CASE("cli: tnfit on datasets and tensor files") {
    SUBCASE("dataset mode fits the empirical tensor") {
        const fs::path data = scratch() / "fitme.csv";
        REQUIRE(run_cli({"synth", "--kind", "block-pairs", "-n", "4", "-m", "60",
                         "--rho", "0.8", "--seed", "21", "-o", data.string()}) == 0);
        const fs::path net = scratch() / "fitme.ttn";
        std::string fit_out;
        REQUIRE(run_cli({"tnfit", data.string(), "-o", net.string(), "--width", "2",
                         "--seed", "1"},
                        &fit_out) == 0);
        const json report = json::parse(fit_out);
        CHECK(report.at("width") == 2);
        CHECK(report.at("achieved_error").get<double>() >= 0.0);
        CHECK(report.at("necessary").at("partitions").size() == 2 + 4);
        for (const auto& entry : report.at("necessary").at("partitions"))
            CHECK(entry.at("holds").is_boolean());
        CHECK(report.at("sufficient").at("threshold").get<double>() >= 0.0);

        const auto tn = load_network(net.string());
        CHECK(tn.leaf_count() == 4);
        CHECK(tn.width() == 2);
    }
    SUBCASE("tensor mode reads the binary container") {
        rng_engine gen(77);
        DenseTensor a({2, 2, 2, 2});
        for (std::size_t i = 0; i < a.size(); ++i)
            a[i] = normal(gen);
        const fs::path tpath = scratch() / "target.tns";
        save_tensor(tpath.string(), a);
        const fs::path net = scratch() / "target.ttn";
        std::string fit_out;
        REQUIRE(run_cli({"tnfit", tpath.string(), "-o", net.string(), "--width", "3",
                         "--eps", "0.5"},
                        &fit_out) == 0);
        const json report = json::parse(fit_out);
        CHECK(report.at("tensor") == tpath.string());
        const auto tn = load_network(net.string());
        const auto rebuilt = tn.contract_full();
        double err = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            err += (rebuilt[i] - a[i]) * (rebuilt[i] - a[i]);
        CHECK(std::sqrt(err) == doctest::Approx(report.at("achieved_error").get<double>())
                                    .epsilon(1e-8)
                                    .scale(norm(a)));
    }
}

TEST_CASE("cli: exit codes follow the contract") {
    std::string out, err;
    SUBCASE("unknown flags parse-fail") {
        CHECK(run_cli({"entangle", "x.csv", "--bogus"}, &out, &err) == 2);
        CHECK(!err.empty());
    }
    SUBCASE("missing input parse-fails") {
        CHECK(run_cli({"entangle", (scratch() / "absent.csv").string()}, &out, &err) ==
              2);
    }
    SUBCASE("unlabeled data is a precondition failure") {
        const fs::path u = scratch() / "unlabeled.csv";
        save_dataset(u, random_dataset(4, 1, 6, false, 8));
        CHECK(run_cli({"entangle", u.string()}, &out, &err) == 3);
        CHECK(err.find("labels") != std::string::npos);
    }
    SUBCASE("raw scalars cannot feed the quantum route") {
        const fs::path r = scratch() / "rawonly.csv";
        save_dataset(r, random_dataset(4, 1, 6, true, 9));
        CHECK(run_cli({"entangle", r.string(), "--embedding", "raw"}, &out, &err) == 3);
    }
    SUBCASE("tiny memory budgets are a capacity failure") {
        const fs::path big = scratch() / "big.csv";
        REQUIRE(run_cli({"synth", "--kind", "iid", "-n", "8", "-m", "100", "--seed",
                         "3", "-o", big.string()}) == 0);
        CHECK(run_cli({"entangle", big.string(), "--mem-budget", "1000"}, &out, &err) ==
              4);
    }
    SUBCASE("bad generator kinds parse-fail") {
        CHECK(run_cli({"synth", "--kind", "nope", "-o", "x.csv"}, &out, &err) == 2);
    }
    SUBCASE("bad level ranges are rejected") {
        const fs::path d = scratch() / "levels.csv";
        REQUIRE(run_cli({"synth", "--kind", "block-pairs", "-n", "8", "-m", "10",
                         "--seed", "4", "-o", d.string()}) == 0);
        CHECK(run_cli({"entangle", d.string(), "--levels", "0..2"}, &out, &err) == 3);
        CHECK(run_cli({"entangle", d.string(), "--levels", "9"}, &out, &err) == 3);
        CHECK(run_cli({"entangle", d.string(), "--levels", "x"}, &out, &err) == 3);
    }
    SUBCASE("help succeeds") {
        CHECK(run_cli({"--help"}, &out, &err) == 0);
        CHECK(out.find("entangle") != std::string::npos);
        CHECK(run_cli({"tnfit", "--help"}, &out, &err) == 0);
    }
}

TEST_CASE("cli: one-vs-all flag reduces class labels") {
    std::string out, err;
    // without the flag the class file is rejected
    CHECK(run_cli({"entangle", fixture("classes.csv").string()}, &out, &err) == 2);
    CHECK(err.find("one-vs-all") != std::string::npos);
    // with it, the file loads; 2 features -> L = 1
    REQUIRE(run_cli({"entangle", fixture("classes.csv").string(), "--one-vs-all", "1",
                     "--seed", "2"},
                    &out, &err) == 0);
    const json report = json::parse(out);
    CHECK(report.at("levels").size() == 1);
    CHECK(report.at("instances") == 6);
}
