#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entanglekit/data_tensor.hpp"
#include "entanglekit/dataset.hpp"
#include "entanglekit/dataset_io.hpp"
#include "entanglekit/errors.hpp"
#include "entanglekit/parallel.hpp"
#include "entanglekit/partitions.hpp"
#include "entanglekit/rearrange.hpp"
#include "entanglekit/surrogate.hpp"
#include "entanglekit/synth.hpp"
#include "entanglekit/tensor.hpp"
#include "entanglekit/tensor_io.hpp"
#include "entanglekit/tree_tn.hpp"

namespace entanglekit::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct CommonOpts {
    std::uint64_t seed = 0;
    std::size_t restarts = kDefaultRestarts;
    std::string levels;           // "A..B" or "A"; empty = all
    std::size_t width = 2;
    double theta = 0.0;           // 0 = sidecar value
    std::string embedding;        // "", "raw", "sincos"
    double one_vs_all = 0.0;
    CLI::Option* ova_opt = nullptr;
    std::uint64_t mem_budget = 0; // bytes; 0 = library default
    bool exact_cut = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--restarts", o.restarts, "partitioner restarts")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--levels", o.levels,
                    "canonical level range A..B (default: 1..min(5,L))");
    cmd->add_option("--width", o.width, "tree network width R")->check(CLI::PositiveNumber);
    cmd->add_option("--theta", o.theta, "sine-cosine embedding frequency")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--embedding", o.embedding, "feature representation for the computation")
        ->check(CLI::IsMember({"raw", "sincos"}));
    o.ova_opt = cmd->add_option("--one-vs-all", o.one_vs_all,
                                "reduce a multi-class label column to this class vs rest");
    cmd->add_option("--mem-budget", o.mem_budget, "memory budget in bytes");
    cmd->add_flag("--exact-cut", o.exact_cut, "exhaustive cut search (small vertex sets)");
}

std::size_t element_budget(const CommonOpts& o) {
    if (o.mem_budget == 0)
        return kDefaultElementBudget;
    return static_cast<std::size_t>(std::max<std::uint64_t>(1, o.mem_budget / sizeof(double)));
}

DatasetFile load_input(const std::string& path, const CommonOpts& o) {
    if (o.ova_opt != nullptr && o.ova_opt->count() > 0)
        return load_dataset_one_vs_all(path, o.one_vs_all, o.seed);
    return load_dataset(path);
}

double resolve_theta(const DatasetFile& f, const CommonOpts& o) {
    return o.theta > 0.0 ? o.theta : f.theta;
}

std::pair<std::size_t, std::size_t> parse_levels(const std::string& s, std::size_t levels) {
    if (s.empty())
        return {1, std::min<std::size_t>(5, levels)};
    std::size_t lo = 0, hi = 0;
    const auto dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            lo = hi = std::stoul(s);
        } else {
            lo = std::stoul(s.substr(0, dots));
            hi = std::stoul(s.substr(dots + 2));
        }
    } catch (const std::exception&) {
        throw argument_error("cannot parse level range '" + s + "'");
    }
    if (lo < 1 || lo > hi || hi > levels)
        throw argument_error("level range must satisfy 1 <= A <= B <= " +
                             std::to_string(levels));
    return {lo, hi};
}

// Dataset as the entanglement routines expect it: scalar features embedded on
// the circle, feature count padded to a power of two (1D), grid side checked.
struct Prepared {
    Dataset ds;
    std::string embedding_used;
    double theta_used = 0.0;
    std::size_t original_features = 0;
    std::size_t side = 0;
    std::size_t levels = 0;
};

Prepared prepare_for_qe(const DatasetFile& f, const CommonOpts& o) {
    Prepared p;
    p.theta_used = resolve_theta(f, o);
    p.ds = f.dataset;
    p.embedding_used = f.embedding;
    p.original_features = p.ds.n_features;
    if (f.embedding == "raw") {
        const std::string want =
            !o.embedding.empty() ? o.embedding : (p.ds.feature_dim == 1 ? "sincos" : "raw");
        if (want == "sincos") {
            if (p.ds.feature_dim != 1)
                throw precondition_error(
                    "sine-cosine embedding applies to scalar features only");
            p.ds = embed_dataset_sincos(p.ds, p.theta_used);
            p.embedding_used = "sincos";
        } else if (p.ds.feature_dim == 1) {
            throw precondition_error(
                "scalar features carry no entanglement unembedded; use --embedding sincos");
        }
    }
    if (p.ds.spatial_dim == 1) {
        if (!is_power_of_two(p.ds.n_features))
            p.ds = pad_to_pow2(p.ds);
        p.side = p.ds.n_features;
    } else {
        p.side = p.ds.side();
        if (!is_power_of_two(p.side))
            throw precondition_error("grid side must be a power of two");
    }
    if (p.side < 2)
        throw precondition_error("at least two features are required");
    p.levels = log2_exact(p.side);
    return p;
}

void write_json(std::ostream& out, const ordered_json& j) { out << j.dump(2) << '\n'; }

ordered_json dataset_summary(const std::string& path, const DatasetFile& f) {
    ordered_json j;
    j["dataset"] = path;
    j["instances"] = f.dataset.instance_count();
    j["features"] = f.dataset.n_features;
    j["feature_dim"] = f.dataset.feature_dim;
    j["spatial_dim"] = f.dataset.spatial_dim;
    j["embedding"] = f.embedding;
    return j;
}

// ---- entangle -------------------------------------------------------------

int cmd_entangle(const std::string& path, const CommonOpts& o, std::ostream& out) {
    const DatasetFile f = load_input(path, o);
    if (!f.dataset.labeled())
        throw precondition_error("entanglement of the data tensor needs labels");
    const Prepared p = prepare_for_qe(f, o);
    const auto [lo, hi] = parse_levels(o.levels, p.levels);
    const std::size_t m_count = p.ds.instance_count();
    if (o.mem_budget > 0 && 3 * m_count * m_count * sizeof(double) > o.mem_budget)
        throw capacity_error("gram matrices exceed the memory budget");

    const auto map = build_compatible_map(p.side, p.ds.spatial_dim);
    const auto parts = canonical_partitions(p.side, p.ds.spatial_dim, lo, hi);
    std::vector<double> qe(parts.size());
    parallel_for(parts.size(), [&](std::size_t i) {
        qe[i] = entanglement_gram(p.ds, parts[i], map);
    });

    ordered_json report = dataset_summary(path, f);
    report["embedding"] = p.embedding_used;
    report["theta"] = p.theta_used;
    report["padded_features"] = p.ds.n_features;
    report["levels"] = ordered_json::array();
    double total = 0.0;
    std::size_t idx = 0;
    for (std::size_t l = lo; l <= hi; ++l) {
        ordered_json level;
        level["level"] = l;
        level["partitions"] = ordered_json::array();
        double level_sum = 0.0;
        std::size_t level_n = 0;
        while (idx < parts.size() && parts[idx].level == l) {
            ordered_json entry;
            entry["block"] = parts[idx].block;
            entry["axes"] = parts[idx].axes;
            entry["qe"] = qe[idx];
            level["partitions"].push_back(std::move(entry));
            level_sum += qe[idx];
            ++level_n;
            ++idx;
        }
        level["average"] = level_sum / static_cast<double>(level_n);
        report["levels"].push_back(std::move(level));
        total += level_sum;
    }
    report["average"] = total / static_cast<double>(parts.size());
    write_json(out, report);
    return 0;
}

// ---- rearrange ------------------------------------------------------------

ordered_json permutation_json(const FeaturePermutation& perm) {
    ordered_json j;
    j["P"] = perm.spatial_dim;
    j["N"] = perm.n;
    j["layout"] = "row-major";
    j["pi"] = perm.map;
    j["cuts"] = ordered_json::array();
    for (const auto& cut : perm.provenance) {
        ordered_json c;
        c["level"] = cut.level;
        c["block"] = cut.block;
        c["cut_weight"] = cut.cut_weight;
        c["parts"] = cut.parts;
        j["cuts"].push_back(std::move(c));
    }
    return j;
}

FeaturePermutation permutation_from_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open permutation file " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw parse_error("bad permutation file " + path + ": " + e.what());
    }
    for (const char* key : {"P", "N", "pi"})
        if (!j.contains(key))
            throw parse_error("permutation file is missing key '" + std::string(key) + "'");
    FeaturePermutation perm;
    perm.spatial_dim = j.at("P").get<std::size_t>();
    perm.n = j.at("N").get<std::size_t>();
    perm.map = j.at("pi").get<std::vector<std::size_t>>();
    (void)perm.inverse(); // bijection check
    return perm;
}

int cmd_rearrange(const std::string& path, const std::string& out_path, const CommonOpts& o,
                  std::ostream& out) {
    const DatasetFile f = load_input(path, o);
    Dataset ds = f.dataset;
    const double theta = resolve_theta(f, o);
    if (o.embedding == "sincos" && f.embedding == "raw") {
        if (ds.feature_dim != 1)
            throw precondition_error("sine-cosine embedding applies to scalar features only");
        ds = embed_dataset_sincos(ds, theta);
    }
    if (ds.spatial_dim == 1 && !is_power_of_two(ds.n_features))
        ds = pad_to_pow2(ds);

    const FeaturePermutation perm =
        ds.spatial_dim == 1
            ? rearrange_1d(ds, o.seed, o.restarts, o.exact_cut)
            : rearrange_pdim(ds, ds.spatial_dim, o.seed, o.restarts, o.exact_cut);

    const std::size_t side = ds.spatial_dim == 1 ? ds.n_features : ds.side();
    const auto [lo, hi] = parse_levels(o.levels, log2_exact(side));
    const auto graph_before = build_correlation_graph(ds);
    const double se_before =
        average_canonical_surrogate(graph_before, side, ds.spatial_dim, lo, hi);
    const Dataset rearranged = apply_permutation(ds, perm);
    const auto graph_after = build_correlation_graph(rearranged);
    const double se_after =
        average_canonical_surrogate(graph_after, side, rearranged.spatial_dim, lo, hi);

    std::ofstream pf(out_path, std::ios::binary | std::ios::trunc);
    if (!pf)
        throw argument_error("cannot write " + out_path);
    pf << permutation_json(perm).dump(2) << '\n';

    ordered_json report = dataset_summary(path, f);
    report["permutation"] = out_path;
    report["surrogate_before"] = se_before;
    report["surrogate_after"] = se_after;
    write_json(out, report);
    return 0;
}

// ---- apply ----------------------------------------------------------------

int cmd_apply(const std::string& path, const std::string& perm_path,
              const std::string& out_path, const CommonOpts& o, std::ostream& out) {
    const DatasetFile f = load_input(path, o);
    const FeaturePermutation perm = permutation_from_json(perm_path);
    const Dataset result = apply_permutation(f.dataset, perm);
    save_dataset(out_path, result, f.embedding, f.theta);

    ordered_json report = dataset_summary(path, f);
    report["permutation"] = perm_path;
    report["written"] = out_path;
    write_json(out, report);
    return 0;
}

// ---- swapgen --------------------------------------------------------------

int cmd_swapgen(const std::string& path, std::size_t k, const std::string& out_path,
                const CommonOpts& o, std::ostream& out) {
    const DatasetFile f = load_input(path, o);
    const Dataset result = random_swaps(f.dataset, k, o.seed);
    save_dataset(out_path, result, f.embedding, f.theta);

    ordered_json report = dataset_summary(path, f);
    report["swaps"] = k;
    report["seed"] = o.seed;
    report["written"] = out_path;
    write_json(out, report);
    return 0;
}

// ---- tnfit ----------------------------------------------------------------

bool looks_like_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && magic[0] == 'L' && magic[1] == 'C' && magic[2] == 'T' &&
           magic[3] == 'N';
}

int cmd_tnfit(const std::string& path, const std::string& out_path, std::size_t spatial_dim,
              double eps_flag, const CommonOpts& o, std::ostream& out) {
    const std::size_t budget = element_budget(o);
    DenseTensor a({1});
    std::size_t p_dim = spatial_dim;
    ordered_json source;
    if (looks_like_tensor_file(path)) {
        a = load_tensor(path, budget);
        if (p_dim == 0)
            p_dim = 1;
        source["tensor"] = path;
    } else {
        const DatasetFile f = load_input(path, o);
        if (!f.dataset.labeled())
            throw precondition_error("the data tensor needs labels");
        const Prepared p = prepare_for_qe(f, o);
        a = empirical_data_tensor_dense(p.ds, budget);
        if (p_dim == 0)
            p_dim = p.ds.spatial_dim;
        else if (p_dim != p.ds.spatial_dim)
            throw argument_error("--spatial-dim conflicts with the dataset sidecar");
        source = dataset_summary(path, f);
    }

    const std::size_t f_count = a.dims().size();
    std::size_t side = 0;
    for (std::size_t s = 1; s <= f_count && side == 0; ++s) {
        std::size_t power = 1;
        for (std::size_t i = 0; i < p_dim && power <= f_count; ++i)
            power *= s;
        if (power == f_count)
            side = s;
    }
    if (side == 0)
        throw precondition_error("axis count is not a perfect spatial power");
    if (!is_power_of_two(side) || side < 2)
        throw precondition_error("grid side must be a power of two >= 2");

    const auto map = build_compatible_map(side, p_dim);
    const FitResult fit = fit_hierarchical(a, o.width, map, budget);
    save_network(out_path, fit.network);

    const double nrm = norm(a);
    const double eps = eps_flag > 0.0 ? eps_flag : fit.achieved_error;
    const double eps_necessary = std::min(eps, nrm / 4.0);

    ordered_json report = std::move(source);
    report["width"] = o.width;
    report["network"] = out_path;
    report["norm"] = nrm;
    report["achieved_error"] = fit.achieved_error;
    report["eps"] = eps;

    const std::size_t levels = log2_exact(side);
    ordered_json necessary;
    necessary["eps"] = eps_necessary;
    necessary["partitions"] = ordered_json::array();
    bool all_hold = true;
    for (const auto& cp : canonical_partitions(side, p_dim, 1, levels)) {
        const BoundReport br = check_necessary_bound(a, o.width, eps_necessary,
                                                     cp.axis_partition());
        ordered_json entry;
        entry["level"] = cp.level;
        entry["block"] = cp.block;
        entry["qe"] = br.lhs;
        entry["bound"] = br.rhs;
        entry["holds"] = br.holds;
        necessary["partitions"].push_back(std::move(entry));
        all_hold = all_hold && br.holds;
    }
    necessary["all_hold"] = all_hold;
    report["necessary"] = std::move(necessary);

    const SufficiencyReport sr = check_sufficient_condition(a, o.width, eps, p_dim, budget);
    ordered_json sufficient;
    sufficient["threshold"] = sr.threshold;
    sufficient["condition_holds"] = sr.condition_holds;
    sufficient["fit_ran"] = sr.fit_ran;
    if (sr.fit_ran) {
        sufficient["fit_error"] = sr.achieved_error;
        sufficient["fit_within_eps"] = sr.fit_within_eps;
    }
    report["sufficient"] = std::move(sufficient);
    write_json(out, report);
    return 0;
}

// ---- synth ----------------------------------------------------------------

int cmd_synth(const std::string& kind, std::size_t n_features, std::size_t side,
              std::size_t m_instances, double rho, double scale, bool no_shuffle,
              const std::string& out_path, const CommonOpts& o, std::ostream& out) {
    SynthResult r;
    if (kind == "block-pairs")
        r = synth_block_pairs(n_features, m_instances, rho, o.seed, !no_shuffle, scale);
    else if (kind == "grid-quadrants")
        r = synth_grid_quadrants(side, m_instances, rho, o.seed, !no_shuffle, scale);
    else if (kind == "iid")
        r = synth_iid(n_features, m_instances, o.seed, scale);
    else
        throw argument_error("unknown generator kind '" + kind + "'");

    const double theta = o.theta > 0.0 ? o.theta : kDefaultTheta;
    save_dataset(out_path, r.dataset, "raw", theta);

    ordered_json report;
    report["kind"] = kind;
    report["written"] = out_path;
    report["instances"] = r.dataset.instance_count();
    report["features"] = r.dataset.n_features;
    report["spatial_dim"] = r.dataset.spatial_dim;
    report["seed"] = o.seed;
    report["rho"] = rho;
    report["scale"] = scale;
    report["shuffled"] = !no_shuffle;
    report["group_of"] = r.group_of;
    write_json(out, report);
    return 0;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"entanglement analysis and feature rearrangement toolkit"};
    app.require_subcommand(1);

    CommonOpts entangle_o, rearrange_o, apply_o, swapgen_o, tnfit_o, synth_o;
    std::string entangle_in, rearrange_in, rearrange_out, apply_in, apply_perm, apply_out;
    std::string swapgen_in, swapgen_out, tnfit_in, tnfit_out, synth_kind, synth_out;
    std::size_t swapgen_k = 0, tnfit_p = 0;
    double tnfit_eps = 0.0;
    std::size_t synth_n = 16, synth_side = 4, synth_m = 500;
    double synth_rho = 0.9, synth_scale = kDefaultValueScale;
    bool synth_no_shuffle = false;

    CLI::App* c_entangle =
        app.add_subcommand("entangle", "entanglement of the data tensor under canonical "
                                       "partitions");
    c_entangle->add_option("dataset", entangle_in, "dataset CSV path")->required();
    add_common(c_entangle, entangle_o);

    CLI::App* c_rearrange =
        app.add_subcommand("rearrange", "derive an entanglement-reducing feature "
                                        "permutation");
    c_rearrange->add_option("dataset", rearrange_in, "dataset CSV path")->required();
    c_rearrange->add_option("-o,--output", rearrange_out, "permutation JSON path")
        ->required();
    add_common(c_rearrange, rearrange_o);

    CLI::App* c_apply = app.add_subcommand("apply", "apply a feature permutation");
    c_apply->add_option("dataset", apply_in, "dataset CSV path")->required();
    c_apply->add_option("permutation", apply_perm, "permutation JSON path")->required();
    c_apply->add_option("-o,--output", apply_out, "output dataset path")->required();
    add_common(c_apply, apply_o);

    CLI::App* c_swapgen =
        app.add_subcommand("swapgen", "apply k random feature transpositions");
    c_swapgen->add_option("dataset", swapgen_in, "dataset CSV path")->required();
    c_swapgen->add_option("-k,--swaps", swapgen_k, "number of transpositions")->required();
    c_swapgen->add_option("-o,--output", swapgen_out, "output dataset path")->required();
    add_common(c_swapgen, swapgen_o);

    CLI::App* c_tnfit =
        app.add_subcommand("tnfit", "fit a tree tensor network and check the "
                                    "entanglement bounds");
    c_tnfit->add_option("input", tnfit_in, "tensor container or dataset CSV path")
        ->required();
    c_tnfit->add_option("-o,--output", tnfit_out, "network output path")->required();
    c_tnfit->add_option("--spatial-dim", tnfit_p, "grid dimension P (default: inferred)");
    c_tnfit->add_option("--eps", tnfit_eps, "approximation budget for the bound checks")
        ->check(CLI::PositiveNumber);
    add_common(c_tnfit, tnfit_o);

    CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic dataset");
    c_synth->add_option("--kind", synth_kind, "block-pairs | grid-quadrants | iid")
        ->required()
        ->check(CLI::IsMember({"block-pairs", "grid-quadrants", "iid"}));
    c_synth->add_option("-n,--features", synth_n, "feature count (block-pairs, iid)");
    c_synth->add_option("--side", synth_side, "grid side (grid-quadrants)");
    c_synth->add_option("-m,--instances", synth_m, "instance count");
    c_synth->add_option("--rho", synth_rho, "within-group correlation");
    c_synth->add_option("--scale", synth_scale, "value scale");
    c_synth->add_flag("--no-shuffle", synth_no_shuffle, "keep the planted arrangement");
    c_synth->add_option("-o,--output", synth_out, "output dataset path")->required();
    add_common(c_synth, synth_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (c_entangle->parsed())
            return cmd_entangle(entangle_in, entangle_o, out);
        if (c_rearrange->parsed())
            return cmd_rearrange(rearrange_in, rearrange_out, rearrange_o, out);
        if (c_apply->parsed())
            return cmd_apply(apply_in, apply_perm, apply_out, apply_o, out);
        if (c_swapgen->parsed())
            return cmd_swapgen(swapgen_in, swapgen_k, swapgen_out, swapgen_o, out);
        if (c_tnfit->parsed())
            return cmd_tnfit(tnfit_in, tnfit_out, tnfit_p, tnfit_eps, tnfit_o, out);
        if (c_synth->parsed())
            return cmd_synth(synth_kind, synth_n, synth_side, synth_m, synth_rho,
                             synth_scale, synth_no_shuffle, synth_out, synth_o, out);
    } catch (const parse_error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const capacity_error& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    } catch (const argument_error& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const partition_error& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const shape_error& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const degenerate_error& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const precondition_error& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace entanglekit::cli
