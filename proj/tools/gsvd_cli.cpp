// gsvd: command-line front end for group-sparse rank-one decompositions.
//
//   gsvd decompose       fit r factors to a labeled matrix and write a JSON record
//   gsvd simulate-bench  replicated benchmark on simulated GR/OGR data
//   gsvd simulate        write one simulated instance as matrix, truth and GMT files
//   gsvd eval            support-recovery rates of a stored factor against a truth file
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical degeneracy.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "gsvd/gsvd.hpp"

namespace {

constexpr int EXIT_USAGE = 2;
constexpr int EXIT_DATA = 3;
constexpr int EXIT_DEGENERATE = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using json = nlohmann::ordered_json;

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw gsvd::ParseError(path, 0, "cannot open file for reading");
    }
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return hex.str();
}

std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

// Every option of the subcommand with its effective value, so the run can be repeated exactly.
json manifest(const CLI::App& sub, const std::vector<std::string>& inputs, std::uint64_t seed, bool timestamp) {
    json m;
    m["tool"] = "gsvd";
    m["version"] = GSVD_VERSION;
    m["subcommand"] = sub.get_name();
    json flags = json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        std::string name = "--" + opt->get_single_name();
        if (name == "--help") {
            continue;
        }
        if (opt->get_expected_max() == 0) {
            flags[name] = opt->count() > 0;
        } else if (opt->count() > 0) {
            auto res = opt->results();
            flags[name] = res.size() == 1 ? json(res[0]) : json(res);
        } else {
            flags[name] = opt->get_default_str();
        }
    }
    m["flags"] = std::move(flags);
    m["seed"] = seed;
    json digests = json::object();
    for (const auto& path : inputs) {
        digests[path] = "sha256:" + sha256_file(path);
    }
    m["input_digests"] = std::move(digests);
    if (timestamp) {
        m["timestamp"] = utc_now();
    }
    return m;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw gsvd::InvalidArgument("cannot open '" + path + "' for writing");
    }
    out << j.dump(2) << '\n';
}

const std::map<std::string, gsvd::WeightScheme> weight_names = {
    { "uniform", gsvd::WeightScheme::UNIFORM }, { "sqrt", gsvd::WeightScheme::SQRT_SIZE }, { "invsqrt", gsvd::WeightScheme::INV_SQRT_SIZE }
};

const std::map<std::string, gsvd::InitStrategy> init_names = {
    { "leading", gsvd::InitStrategy::LEADING }, { "random", gsvd::InitStrategy::RANDOM }, { "uniform", gsvd::InitStrategy::UNIFORM }
};

// ---------------------------------------------------------------------------
// decompose

struct SideArgs {
    std::string penalty = "none";
    std::string groups;
    std::string groups_format = "auto";
    std::string weights = "sqrt";
    double lambda = -1;
    std::size_t k = 0;
};

struct DecomposeArgs {
    std::string matrix;
    std::string format = "tsv";
    std::string orientation = "features";
    bool normalize = false;
    SideArgs u, v;
    bool weighted_gl0 = false;
    std::size_t max_group_size = 0;
    int rank = 1;
    double tol = 1e-6;
    int max_iter = 200;
    std::string init = "leading";
    std::uint64_t seed = 0;
    double admm_rho = 1.0;
    double admm_tol = 1e-6;
    int admm_max_iter = 5000;
    std::string admm_update = "prox";
    bool admm_fixed_rho = false;
    std::string out;
    bool no_timestamp = false;
};

bool uses_lambda(const std::string& p) {
    return p == "l1" || p == "gl1" || p == "ogl1";
}

bool uses_k(const std::string& p) {
    return p == "l0" || p == "gl0" || p == "ogl0";
}

bool uses_groups(const std::string& p) {
    return p == "gl1" || p == "gl0" || p == "ogl1" || p == "ogl0";
}

// Flag consistency for one side, checked before any file is read.
void check_side(const SideArgs& s, const char* side) {
    std::string tag = std::string("--") + side;
    std::string pen = "--" + std::string(side) + "-penalty " + s.penalty;
    if (uses_lambda(s.penalty) && s.lambda < 0) {
        throw UsageError(pen + " needs --lambda-" + side);
    }
    if (!uses_lambda(s.penalty) && s.lambda >= 0) {
        throw UsageError("--lambda-" + std::string(side) + " does not apply to " + pen);
    }
    if (uses_k(s.penalty) && s.k == 0) {
        throw UsageError(pen + " needs --k" + side + " (a positive count)");
    }
    if (!uses_k(s.penalty) && s.k > 0) {
        throw UsageError("--k" + std::string(side) + " does not apply to " + pen);
    }
    if (uses_groups(s.penalty) && s.groups.empty()) {
        throw UsageError(pen + " needs " + tag + "-groups");
    }
    if (!uses_groups(s.penalty) && !s.groups.empty()) {
        throw UsageError(tag + "-groups is only used by group penalties, not " + s.penalty);
    }
}

struct LoadedGroups {
    gsvd::GroupsPtr groups;
    std::vector<std::string> names;
    json info;
};

LoadedGroups load_groups(const SideArgs& s, const std::vector<std::string>& names, const DecomposeArgs& a, const char* side) {
    LoadedGroups out;
    if (s.groups.empty()) {
        return out;
    }
    std::string fmt = s.groups_format;
    if (fmt == "auto") {
        fmt = s.groups.size() >= 4 && s.groups.substr(s.groups.size() - 4) == ".gmt" ? "gmt" : "edges";
    }
    gsvd::NamedGroups ng;
    if (fmt == "gmt") {
        ng = gsvd::read_gmt(s.groups, names, a.max_group_size);
        out.info["format"] = "gmt";
        out.info["sets_empty_after_matching"] = ng.dropped;
        out.info["sets_over_size_limit"] = ng.filtered;
        out.info["unmatched_members"] = ng.unmatched;
    } else {
        ng = gsvd::read_edge_list(s.groups, names);
        out.info["format"] = "edges";
        out.info["edges_with_unknown_nodes"] = ng.dropped;
        out.info["self_loops"] = ng.filtered;
        out.info["duplicate_edges"] = ng.unmatched;
    }
    if (ng.groups.size() == 0) {
        throw gsvd::InvalidArgument(std::string(side) + " groups: no group in '" + s.groups + "' matches the matrix names");
    }
    out.info["groups"] = ng.groups.size();
    out.info["overlapping"] = ng.groups.overlapping();
    std::cerr << side << " groups: " << ng.groups.size() << " from " << s.groups << " (" << out.info.dump() << ")\n";
    out.groups = std::make_shared<const gsvd::GroupStructure>(ng.groups.with_weights(weight_names.at(s.weights)));
    out.names = std::move(ng.names);
    return out;
}

gsvd::PenaltySpec make_penalty(const SideArgs& s, const gsvd::GroupsPtr& gs, const DecomposeArgs& a) {
    gsvd::AdmmConfig admm;
    admm.rho = a.admm_rho;
    admm.tol = a.admm_tol;
    admm.max_iter = a.admm_max_iter;
    admm.adaptive_rho = !a.admm_fixed_rho;
    admm.update = a.admm_update == "normalize" ? gsvd::AdmmUpdate::NORMALIZE : gsvd::AdmmUpdate::PROX;
    if (s.penalty == "l1") {
        return gsvd::penalty::L1{ s.lambda };
    }
    if (s.penalty == "l0") {
        return gsvd::penalty::L0{ s.k };
    }
    if (s.penalty == "gl1") {
        return gsvd::penalty::GL1{ s.lambda, gs };
    }
    if (s.penalty == "gl0") {
        return gsvd::penalty::GL0{ s.k, gs, a.weighted_gl0 };
    }
    if (s.penalty == "ogl1") {
        return gsvd::penalty::OGL1{ s.lambda, gs, admm };
    }
    if (s.penalty == "ogl0") {
        return gsvd::penalty::OGL0{ s.k, gs };
    }
    return gsvd::penalty::None{};
}

int cmd_decompose(const DecomposeArgs& a, const CLI::App& sub) {
    check_side(a.u, "u");
    check_side(a.v, "v");

    auto m = gsvd::read_matrix(a.matrix, a.format == "csv" ? gsvd::MatrixFormat::CSV : gsvd::MatrixFormat::TSV,
                               a.orientation == "samples" ? gsvd::Orientation::SAMPLES_BY_FEATURES : gsvd::Orientation::FEATURES_BY_SAMPLES);
    std::cerr << "matrix: " << m.X.rows() << " features x " << m.X.cols() << " samples\n";
    if (a.normalize) {
        m = gsvd::normalize_columns(std::move(m));
    }

    auto gu = load_groups(a.u, m.row_names, a, "u");
    auto gv = load_groups(a.v, m.col_names, a, "v");
    auto pu = make_penalty(a.u, gu.groups, a);
    auto pv = make_penalty(a.v, gv.groups, a);

    gsvd::SolveOptions opts;
    opts.tol = a.tol;
    opts.max_iter = a.max_iter;
    opts.init = init_names.at(a.init);
    opts.seed = a.seed;

    auto dec = gsvd::deflate_solve(m.X, pu, pv, a.rank, opts);

    auto rec = gsvd::make_record(dec, m.row_names, m.col_names, gu.names, gv.names, !a.no_timestamp);
    std::vector<std::string> inputs = { a.matrix };
    for (const auto* g : { &a.u.groups, &a.v.groups }) {
        if (!g->empty()) {
            inputs.push_back(*g);
        }
    }
    json& md = rec.metadata;
    md["u_penalty"] = gsvd::describe(pu);
    md["v_penalty"] = gsvd::describe(pv);
    md["rank"] = a.rank;
    md["normalized"] = a.normalize;
    md["u_weights"] = a.u.weights;
    md["v_weights"] = a.v.weights;
    md["init"] = a.init;
    md["seed"] = a.seed;
    md["tol"] = a.tol;
    md["max_iter"] = a.max_iter;
    if (gu.groups) {
        md["u_groups"] = gu.info;
    }
    if (gv.groups) {
        md["v_groups"] = gv.info;
    }
    md["residual_norm"] = dec.residual_norm;
    md["manifest"] = manifest(sub, inputs, a.seed, !a.no_timestamp);
    gsvd::write_record(a.out, rec);

    for (std::size_t i = 0; i < rec.factors.size(); ++i) {
        const auto& f = rec.factors[i];
        std::cerr << "factor " << i + 1 << ": d = " << f.d << ", |u| = " << f.u.size() << ", |v| = " << f.v.size()
                  << ", u groups = " << f.groups_u.size() << ", iterations = " << f.iterations << (f.converged ? "" : " (not converged)")
                  << ", cumulative variance explained = " << f.cumulative_variance_explained << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate-bench

struct BenchArgs {
    std::string kind = "auto";
    std::vector<std::size_t> sizes = { 20, 40, 100, 160, 200 };
    std::vector<double> log_snrs = { -2.8 };
    std::size_t replicates = 50;
    std::vector<std::string> methods = { "gl1", "gl0", "ogl1", "ogl0", "l1", "l0" };
    std::size_t n = 100;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string out_table = "-";
    std::string out_json;
    bool no_timestamp = false;
};

void write_table(std::ostream& out, const std::vector<gsvd::BenchRow>& rows, bool timing) {
    out << "method\tkind\tgroup_size\tp\tn\tlog_snr\treplicates\tflagged";
    for (const char* m : { "tpr", "tnr", "fpr", "fdr", "acc", "d" }) {
        out << '\t' << m << "_mean\t" << m << "_sd";
    }
    if (timing) {
        out << "\ttime_mean\ttime_sd";
    }
    out << '\n';
    for (const auto& r : rows) {
        out << r.method << '\t' << gsvd::to_string(r.kind) << '\t' << r.group_size << '\t' << r.p << '\t' << r.n << '\t'
            << gsvd::detail::format_double(r.log_snr) << '\t' << r.replicates << '\t' << r.flagged;
        for (const auto* s : { &r.tpr, &r.tnr, &r.fpr, &r.fdr, &r.acc, &r.d }) {
            out << '\t' << gsvd::detail::format_double(s->mean) << '\t' << gsvd::detail::format_double(s->sd);
        }
        if (timing) {
            out << '\t' << gsvd::detail::format_double(r.time.mean) << '\t' << gsvd::detail::format_double(r.time.sd);
        }
        out << '\n';
    }
}

json row_json(const gsvd::BenchRow& r, bool timing) {
    json j;
    j["method"] = r.method;
    j["kind"] = gsvd::to_string(r.kind);
    j["group_size"] = r.group_size;
    j["p"] = r.p;
    j["n"] = r.n;
    j["log_snr"] = r.log_snr;
    j["replicates"] = r.replicates;
    j["flagged"] = r.flagged;
    auto stat = [](const gsvd::Stat& s) { return json{ { "mean", s.mean }, { "sd", s.sd } }; };
    j["tpr"] = stat(r.tpr);
    j["tnr"] = stat(r.tnr);
    j["fpr"] = stat(r.fpr);
    j["fdr"] = stat(r.fdr);
    j["acc"] = stat(r.acc);
    j["d"] = stat(r.d);
    if (timing) {
        j["time"] = stat(r.time);
    }
    return j;
}

int cmd_simulate_bench(const BenchArgs& a, const CLI::App& sub) {
    if (a.kind != "auto" && a.kind != "gr" && a.kind != "ogr") {
        throw UsageError("--kind must be auto, gr or ogr");
    }
    std::vector<gsvd::BenchMethod> gr_methods, ogr_methods;
    std::vector<std::pair<bool, std::size_t> > order;
    for (const auto& name : a.methods) {
        gsvd::BenchMethod m;
        try {
            m = gsvd::make_method(name);
        } catch (const gsvd::InvalidArgument& e) {
            throw UsageError(e.what());
        }
        bool on_ogr = a.kind == "ogr" || (a.kind == "auto" && gsvd::is_overlap_method(m.family));
        if (on_ogr && (m.family == gsvd::MethodFamily::GL1 || m.family == gsvd::MethodFamily::GL0)) {
            throw UsageError("method " + name + " needs non-overlapping groups and cannot run on ogr data");
        }
        auto& bucket = on_ogr ? ogr_methods : gr_methods;
        order.emplace_back(on_ogr, bucket.size());
        bucket.push_back(m);
    }
    if (a.replicates < 1 || a.n < 1 || a.sizes.empty() || a.log_snrs.empty()) {
        throw UsageError("need at least one replicate, sample, group size and log SNR");
    }

    auto grid = [&](gsvd::SimKind kind) {
        std::vector<gsvd::SimConfig> cfgs;
        for (double s : a.log_snrs) {
            for (auto q : a.sizes) {
                gsvd::SimConfig c;
                c.kind = kind;
                c.group_size = q;
                c.n = a.n;
                c.log_snr = s;
                c.seed = a.seed;
                c.validate();
                cfgs.push_back(c);
            }
        }
        return cfgs;
    };

    std::mutex io;
    std::size_t done = 0;
    const std::size_t cells = a.sizes.size() * a.log_snrs.size();
    const std::size_t total = cells * a.replicates * ((gr_methods.empty() ? 0 : 1) + (ogr_methods.empty() ? 0 : 1));
    gsvd::BenchOptions opts;
    opts.threads = a.threads;
    opts.progress = [&](std::size_t, std::size_t) {
        std::lock_guard<std::mutex> lock(io);
        ++done;
        if (done % a.replicates == 0 || done == total) {
            std::cerr << "simulate-bench: " << done << "/" << total << " replicate runs\n";
        }
    };

    std::vector<gsvd::BenchRow> gr_rows, ogr_rows;
    if (!gr_methods.empty()) {
        gr_rows = gsvd::run_benchmark(gr_methods, grid(gsvd::SimKind::GR), a.replicates, opts);
    }
    if (!ogr_methods.empty()) {
        ogr_rows = gsvd::run_benchmark(ogr_methods, grid(gsvd::SimKind::OGR), a.replicates, opts);
    }

    std::vector<gsvd::BenchRow> rows;
    for (std::size_t c = 0; c < cells; ++c) {
        for (auto [on_ogr, idx] : order) {
            rows.push_back(on_ogr ? ogr_rows[c * ogr_methods.size() + idx] : gr_rows[c * gr_methods.size() + idx]);
        }
    }

    const bool timing = !a.no_timestamp;
    if (a.out_table == "-") {
        write_table(std::cout, rows, timing);
    } else {
        std::ofstream out(a.out_table, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw gsvd::InvalidArgument("cannot open '" + a.out_table + "' for writing");
        }
        write_table(out, rows, timing);
    }

    json j;
    j["format"] = "gsvd-benchmark";
    j["conventions"] = { { "zero_tol", 1e-10 },
                         { "tpr_without_positives", 1 },
                         { "fdr_without_selection", 0 },
                         { "lasso_lambda", "bisected to the planted support size within 1%, or to a bracket of 1e-6 of the starting ceiling" },
                         { "ogl1_admm", { { "tol", 1e-4 }, { "max_iter", 1000 } } },
                         { "cardinality_k", "planted coordinates for l0, planted groups for gl0 and ogl0" },
                         { "v_penalty", "none" },
                         { "time", "seconds per final solve" } };
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back(row_json(r, timing));
    }
    j["rows"] = std::move(arr);
    j["manifest"] = manifest(sub, {}, a.seed, !a.no_timestamp);
    if (!a.out_json.empty()) {
        write_json(a.out_json, j);
    } else if (a.out_table != "-") {
        write_json(a.out_table + ".manifest.json", j["manifest"]);
    } else {
        std::cerr << j["manifest"].dump() << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string kind = "gr";
    std::size_t size = 20;
    std::size_t n = 100;
    double log_snr = -2;
    std::uint64_t seed = 1;
    std::string prefix;
    bool no_timestamp = false;
};

int cmd_simulate(const SimulateArgs& a, const CLI::App& sub) {
    if (a.kind != "gr" && a.kind != "ogr") {
        throw UsageError("--kind must be gr or ogr");
    }
    gsvd::SimConfig cfg;
    cfg.kind = a.kind == "gr" ? gsvd::SimKind::GR : gsvd::SimKind::OGR;
    cfg.group_size = a.size;
    cfg.n = a.n;
    cfg.log_snr = a.log_snr;
    cfg.seed = a.seed;
    auto inst = gsvd::generate(cfg);

    gsvd::LabeledMatrix m;
    m.X = inst.X;
    for (Eigen::Index i = 0; i < inst.X.rows(); ++i) {
        m.row_names.push_back("f" + std::to_string(i));
    }
    for (Eigen::Index j = 0; j < inst.X.cols(); ++j) {
        m.col_names.push_back("s" + std::to_string(j));
    }
    std::vector<std::string> group_names;
    for (std::size_t l = 0; l < inst.groups->size(); ++l) {
        group_names.push_back("G" + std::to_string(l));
    }
    gsvd::write_matrix(a.prefix + ".matrix.tsv", m);
    gsvd::write_truth(a.prefix + ".truth.tsv", inst.u_true, m.row_names);
    gsvd::write_gmt(a.prefix + ".groups.gmt", *inst.groups, group_names, m.row_names);

    json man = manifest(sub, {}, a.seed, !a.no_timestamp);
    man["gamma"] = inst.gamma;
    write_json(a.prefix + ".manifest.json", man);
    std::cerr << "simulate: wrote " << a.prefix << ".{matrix.tsv,truth.tsv,groups.gmt,manifest.json} (p = " << m.X.rows()
              << ", n = " << m.X.cols() << ", gamma = " << inst.gamma << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string record;
    std::string truth;
    std::size_t factor = 1;
    std::string axis = "u";
    double zero_tol = 1e-10;
    std::string out;
    bool no_timestamp = false;
};

int cmd_eval(const EvalArgs& a, const CLI::App& sub) {
    if (a.factor < 1) {
        throw UsageError("--factor is 1-based");
    }
    auto rec = gsvd::read_record(a.record);
    const bool left = a.axis == "u";
    auto est = gsvd::dense_vector(rec, a.factor - 1, left);
    auto truth = gsvd::read_truth(a.truth, left ? rec.row_names : rec.col_names);
    auto c = gsvd::confusion(est, truth, a.zero_tol);
    auto r = gsvd::rates(c);

    std::ostringstream table;
    table << "tp\tfp\ttn\tfn\ttpr\ttnr\tfpr\tfdr\tacc\n";
    table << c.tp << '\t' << c.fp << '\t' << c.tn << '\t' << c.fn;
    for (double x : { r.tpr, r.tnr, r.fpr, r.fdr, r.acc }) {
        table << '\t' << gsvd::detail::format_double(x);
    }
    table << '\n';
    std::cout << table.str();

    json man = manifest(sub, { a.record, a.truth }, 0, !a.no_timestamp);
    if (!a.out.empty()) {
        std::ofstream out(a.out, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw gsvd::InvalidArgument("cannot open '" + a.out + "' for writing");
        }
        out << table.str();
        write_json(a.out + ".manifest.json", man);
    } else {
        std::cerr << man.dump() << '\n';
    }
    return 0;
}

}

int main(int argc, char** argv) {
    CLI::App app{ "Group-sparse rank-one SVD: decompositions, simulation benchmarks and support evaluation." };
    app.set_version_flag("--version", std::string("gsvd ") + GSVD_VERSION);
    app.require_subcommand(1);

    const std::vector<std::string> penalties = { "none", "l1", "l0", "gl1", "gl0", "ogl1", "ogl0" };

    DecomposeArgs da;
    auto* dec = app.add_subcommand("decompose", "Fit rank-r group-sparse factors to a labeled matrix");
    dec->add_option("--matrix", da.matrix, "Expression matrix (first row sample names, first column feature names)")->required()->check(CLI::ExistingFile);
    dec->add_option("--format", da.format, "Matrix delimiter")->check(CLI::IsMember({ "tsv", "csv" }))->capture_default_str();
    dec->add_option("--orientation", da.orientation, "features: one row per feature; samples: one row per sample")
        ->check(CLI::IsMember({ "features", "samples" }))->capture_default_str();
    dec->add_flag("--normalize", da.normalize, "Scale every sample column to mean 0 and sd 1 before fitting");
    dec->add_option("--u-penalty", da.u.penalty, "Penalty on the feature vector u")->check(CLI::IsMember(penalties))->capture_default_str();
    dec->add_option("--v-penalty", da.v.penalty, "Penalty on the sample vector v")->check(CLI::IsMember(penalties))->capture_default_str();
    dec->add_option("--u-groups", da.u.groups, "Feature groups: GMT pathway file or edge list")->check(CLI::ExistingFile);
    dec->add_option("--v-groups", da.v.groups, "Sample groups: GMT file or edge list")->check(CLI::ExistingFile);
    dec->add_option("--u-groups-format", da.u.groups_format, "auto picks gmt for *.gmt, edges otherwise")
        ->check(CLI::IsMember({ "auto", "gmt", "edges" }))->capture_default_str();
    dec->add_option("--v-groups-format", da.v.groups_format, "auto picks gmt for *.gmt, edges otherwise")
        ->check(CLI::IsMember({ "auto", "gmt", "edges" }))->capture_default_str();
    dec->add_option("--lambda-u", da.u.lambda, "Penalty level for l1, gl1, ogl1 on u")->check(CLI::NonNegativeNumber);
    dec->add_option("--lambda-v", da.v.lambda, "Penalty level for l1, gl1, ogl1 on v")->check(CLI::NonNegativeNumber);
    dec->add_option("--ku", da.u.k, "Kept coordinates (l0) or groups (gl0, ogl0) of u")->check(CLI::PositiveNumber);
    dec->add_option("--kv", da.v.k, "Kept coordinates (l0) or groups (gl0, ogl0) of v")->check(CLI::PositiveNumber);
    dec->add_option("--u-weights", da.u.weights, "Weights of u groups: 1, sqrt(size) or 1/sqrt(size)")
        ->check(CLI::IsMember({ "uniform", "sqrt", "invsqrt" }))->capture_default_str();
    dec->add_option("--v-weights", da.v.weights, "Weights of v groups: 1, sqrt(size) or 1/sqrt(size)")
        ->check(CLI::IsMember({ "uniform", "sqrt", "invsqrt" }))->capture_default_str();
    dec->add_flag("--weighted-gl0", da.weighted_gl0, "Rank gl0 groups by weight times norm");
    dec->add_option("--max-group-size", da.max_group_size, "Drop GMT sets listing more members than this (0 keeps all)")->capture_default_str();
    dec->add_option("--rank", da.rank, "Number of factors, fitted by deflation")->check(CLI::PositiveNumber)->capture_default_str();
    dec->add_option("--tol", da.tol, "Relative tolerance on successive d")->check(CLI::PositiveNumber)->capture_default_str();
    dec->add_option("--max-iter", da.max_iter, "Alternating iterations per factor")->check(CLI::PositiveNumber)->capture_default_str();
    dec->add_option("--init", da.init, "Starting v")->check(CLI::IsMember({ "leading", "random", "uniform" }))->capture_default_str();
    dec->add_option("--seed", da.seed, "Seed for --init random")->capture_default_str();
    dec->add_option("--admm-rho", da.admm_rho, "ADMM penalty parameter for ogl1")->check(CLI::PositiveNumber)->capture_default_str();
    dec->add_option("--admm-tol", da.admm_tol, "ADMM stopping tolerance for ogl1")->check(CLI::PositiveNumber)->capture_default_str();
    dec->add_option("--admm-max-iter", da.admm_max_iter, "ADMM iteration cap for ogl1")->check(CLI::PositiveNumber)->capture_default_str();
    dec->add_option("--admm-update", da.admm_update, "ADMM u-update: prox divides by 1 + rho * coverage, normalize rescales to unit norm")
        ->check(CLI::IsMember({ "prox", "normalize" }))
        ->capture_default_str();
    dec->add_flag("--admm-fixed-rho", da.admm_fixed_rho, "Keep rho constant instead of rebalancing residuals");
    dec->add_option("--out", da.out, "Output JSON record")->required();
    dec->add_flag("--no-timestamp", da.no_timestamp, "Omit timestamps and timings so identical runs give identical files");

    BenchArgs ba;
    auto* bench = app.add_subcommand("simulate-bench", "Replicated benchmark on simulated data");
    bench->add_option("--kind", ba.kind, "auto runs gl1, gl0, l1, l0 on gr data and ogl1, ogl0 on ogr data")
        ->check(CLI::IsMember({ "auto", "gr", "ogr" }))->capture_default_str();
    bench->add_option("--q,--t", ba.sizes, "Group sizes (q for gr, t for ogr); p = 50 * size")->delimiter(',')->capture_default_str();
    bench->add_option("--logsnr", ba.log_snrs, "log10 signal-to-noise ratios")->delimiter(',')->capture_default_str();
    bench->add_option("--replicates", ba.replicates, "Replicates per cell")->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_option("--methods", ba.methods, "Methods: gl1, gl0, ogl1, ogl0, l1, l0")->delimiter(',')->capture_default_str();
    bench->add_option("--n", ba.n, "Samples per instance")->check(CLI::PositiveNumber)->capture_default_str();
    bench->add_option("--seed", ba.seed, "Base seed")->capture_default_str();
    bench->add_option("--threads", ba.threads, "Worker threads (0 = all cores)")->capture_default_str();
    bench->add_option("--out-table", ba.out_table, "Tab-separated result table, - for standard output")->capture_default_str();
    bench->add_option("--out-json", ba.out_json, "Structured results with conventions and manifest");
    bench->add_flag("--no-timestamp", ba.no_timestamp, "Omit timestamps and timings so identical runs give identical files");

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Write one simulated instance as matrix, truth and GMT files");
    sim->add_option("--kind", sa.kind, "gr or ogr")->check(CLI::IsMember({ "gr", "ogr" }))->capture_default_str();
    sim->add_option("--q,--t", sa.size, "Group size; p = 50 * size")->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--n", sa.n, "Samples")->check(CLI::PositiveNumber)->capture_default_str();
    sim->add_option("--logsnr", sa.log_snr, "log10 signal-to-noise ratio")->capture_default_str();
    sim->add_option("--seed", sa.seed, "Seed")->capture_default_str();
    sim->add_option("--out-prefix", sa.prefix, "Output path prefix")->required();
    sim->add_flag("--no-timestamp", sa.no_timestamp, "Omit the timestamp from the manifest");

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "Support-recovery rates of a stored factor against a truth file");
    ev->add_option("--record", ea.record, "Decomposition record (JSON)")->required()->check(CLI::ExistingFile);
    ev->add_option("--truth", ea.truth, "Truth vector: name<TAB>value lines")->required()->check(CLI::ExistingFile);
    ev->add_option("--factor", ea.factor, "1-based factor index")->capture_default_str();
    ev->add_option("--axis", ea.axis, "Compare u (features) or v (samples)")->check(CLI::IsMember({ "u", "v" }))->capture_default_str();
    ev->add_option("--zero-tol", ea.zero_tol, "Entries with |x| <= zero-tol count as zero")->check(CLI::NonNegativeNumber)->capture_default_str();
    ev->add_option("--out", ea.out, "Also write the table here");
    ev->add_flag("--no-timestamp", ea.no_timestamp, "Omit the timestamp from the manifest");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : EXIT_USAGE;
    }

    try {
        if (*dec) {
            return cmd_decompose(da, *dec);
        }
        if (*bench) {
            return cmd_simulate_bench(ba, *bench);
        }
        if (*sim) {
            return cmd_simulate(sa, *sim);
        }
        return cmd_eval(ea, *ev);
    } catch (const UsageError& e) {
        std::cerr << "gsvd: usage error: " << e.what() << "\n";
        return EXIT_USAGE;
    } catch (const gsvd::DegenerateSolution& e) {
        std::cerr << "gsvd: degenerate solution: " << e.what() << "\n";
        return EXIT_DEGENERATE;
    } catch (const gsvd::ParseError& e) {
        std::cerr << "gsvd: " << e.what() << "\n";
        return EXIT_DATA;
    } catch (const gsvd::InvalidArgument& e) {
        std::cerr << "gsvd: data error: " << e.what() << "\n";
        return EXIT_DATA;
    } catch (const std::exception& e) {
        std::cerr << "gsvd: error: " << e.what() << "\n";
        return EXIT_DATA;
    }
}
