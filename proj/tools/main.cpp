// locbound - performance limits of single-hop sensor localization.
//
// Subcommands: sample, eval, moments, compare, plan. All numeric data
// output uses 17 significant digits so values round-trip exactly;
// diagnostics and warnings go to stderr only.
// Exit codes: 0 success, 1 error, 2 singular/empty result.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "locbound/asymptotics.hpp"
#include "locbound/crlb.hpp"
#include "locbound/geometry.hpp"
#include "locbound/montecarlo.hpp"

namespace {

using namespace locbound;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitSingular = 2;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Options {
    std::string config_path;
    std::string modality;
    double alpha = 0.0;
    double sigma_db = 0.0;
    double sigma_alpha = 0.0;
    double sigma_tc = 0.0;
    double r0 = 0.0;
    double r = 0.0;
    std::uint64_t n = 0;
    std::string n_range;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    std::string format = "csv";
    std::string out;
    unsigned workers = 0;
    double threshold = 0.0;
    double confidence = 0.0;
    std::string curve_out;
    std::string pdf_out;
    std::string samples_out;
};

/// Fills options from a JSON config file; explicit flags win. Keys use the
/// long flag names without the leading dashes.
class ConfigMerger {
public:
    ConfigMerger(CLI::App* sub, const std::string& path) : sub_(sub) {
        if (path.empty()) {
            return;
        }
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error("cannot open config file '" + path + "'");
        }
        try {
            in >> json_;
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("config file '" + path + "': " + e.what());
        }
    }

    template <typename T>
    void take(const std::string& key, T& target) const {
        if (flag_given(key) || !json_.contains(key)) {
            return;
        }
        try {
            target = json_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("config key '" + key + "': " + e.what());
        }
    }

    /// True when a value arrived via flag or config file.
    bool has(const std::string& key) const {
        return flag_given(key) || json_.contains(key);
    }

private:
    bool flag_given(const std::string& key) const {
        const CLI::Option* opt = sub_->get_option_no_throw("--" + key);
        return opt != nullptr && opt->count() > 0;
    }

    CLI::App* sub_;
    nlohmann::json json_ = nlohmann::json::object();
};

void add_modality_flags(CLI::App* sub, Options& o) {
    sub->add_option("--modality", o.modality, "Measurement modality: rss, bearing or toa");
    sub->add_option("--alpha", o.alpha, "RSS path-loss exponent");
    sub->add_option("--sigma-db", o.sigma_db, "RSS shadowing standard deviation [dB]");
    sub->add_option("--sigma-alpha", o.sigma_alpha, "Bearing noise standard deviation [rad]");
    sub->add_option("--sigma-tc", o.sigma_tc, "TOA ranging accuracy sigma_T * c [m]");
}

void add_model_flags(CLI::App* sub, Options& o) {
    sub->add_option("--r0", o.r0, "Annulus inner radius [m]; omit for a disk model");
    sub->add_option("--r", o.r, "Outer radius [m] (annulus) or disk radius [m]");
}

void add_common_flags(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config_path, "JSON config file; flags override its values");
    sub->add_option("--format", o.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", o.out, "Write data output to PATH instead of stdout");
}

Modality build_modality(const Options& o, const ConfigMerger& cfg) {
    if (o.modality == "rss") {
        if (!cfg.has("alpha") || !cfg.has("sigma-db")) {
            throw std::invalid_argument("rss requires --alpha and --sigma-db");
        }
        return make_rss(o.alpha, o.sigma_db);
    }
    if (o.modality == "bearing") {
        if (!cfg.has("sigma-alpha")) {
            throw std::invalid_argument("bearing requires --sigma-alpha");
        }
        return make_bearing(o.sigma_alpha);
    }
    if (o.modality == "toa") {
        if (!cfg.has("sigma-tc")) {
            throw std::invalid_argument("toa requires --sigma-tc");
        }
        return make_toa(o.sigma_tc);
    }
    throw std::invalid_argument("unknown modality '" + o.modality +
                                "' (expected rss, bearing or toa)");
}

GeometryModel build_model(const Options& o, const ConfigMerger& cfg) {
    if (!cfg.has("r")) {
        throw std::invalid_argument("a geometry model requires --r");
    }
    if (cfg.has("r0")) {
        return Annulus{o.r0, o.r};
    }
    return Disk{o.r};
}

struct NRange {
    std::uint64_t first = 0;
    std::uint64_t last = 0;
    std::uint64_t step = 1;
};

NRange parse_n_range(const std::string& text) {
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        throw std::invalid_argument("n-range must look like A..B or A..B:STEP");
    }
    NRange range;
    std::string tail = text.substr(dots + 2);
    const auto colon = tail.find(':');
    std::string last_part = (colon == std::string::npos) ? tail : tail.substr(0, colon);
    try {
        range.first = std::stoull(text.substr(0, dots));
        range.last = std::stoull(last_part);
        if (colon != std::string::npos) {
            range.step = std::stoull(tail.substr(colon + 1));
        }
    } catch (const std::exception&) {
        throw std::invalid_argument("n-range must hold unsigned integers");
    }
    if (range.step < 1 || range.last < range.first) {
        throw std::invalid_argument("n-range requires A <= B and a positive step");
    }
    return range;
}

/// Data sink: --out path or stdout.
class OutputTarget {
public:
    explicit OutputTarget(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) {
                throw std::runtime_error("cannot open output file '" + path + "'");
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void warn_small_n(std::uint64_t n) {
    if (n < 10) {
        std::cerr << "warning: asymptotic formulas lose accuracy for n < 10 "
                     "(n = " << n << ")\n";
    }
}

// ----------------------------------------------------------------------------
// Subcommand handlers
// ----------------------------------------------------------------------------

int run_sample(CLI::App* sub, Options& o) {
    ConfigMerger cfg(sub, o.config_path);
    cfg.take("r0", o.r0);
    cfg.take("r", o.r);
    cfg.take("n", o.n);
    cfg.take("seed", o.seed);
    cfg.take("trial", o.trial);
    cfg.take("format", o.format);
    cfg.take("out", o.out);

    if (!cfg.has("n")) {
        throw std::invalid_argument("sample requires --n");
    }
    const GeometryModel model = build_model(o, cfg);
    const AnchorSet anchors =
        sample_anchors(model, o.n, SeedSpec{o.seed}, o.trial);

    OutputTarget target(o.out);
    if (o.format == "json") {
        target.stream() << anchor_json(anchors) << '\n';
    } else {
        write_anchor_csv(target.stream(), anchors);
    }
    return kExitOk;
}

int run_eval(CLI::App* sub, Options& o, const std::string& anchors_path) {
    ConfigMerger cfg(sub, o.config_path);
    cfg.take("modality", o.modality);
    cfg.take("alpha", o.alpha);
    cfg.take("sigma-db", o.sigma_db);
    cfg.take("sigma-alpha", o.sigma_alpha);
    cfg.take("sigma-tc", o.sigma_tc);
    cfg.take("out", o.out);

    const Modality modality = build_modality(o, cfg);
    std::ifstream in(anchors_path);
    if (!in) {
        throw std::runtime_error("cannot open anchors file '" + anchors_path + "'");
    }
    const AnchorSet anchors = read_anchor_csv(in, anchors_path);
    const TraceResult trace = trace_crlb(modality, anchors);

    OutputTarget target(o.out);
    if (trace.is_singular()) {
        target.stream() << "SINGULAR\n";
        return kExitSingular;
    }
    target.stream() << fmt17(trace.value_m2()) << '\n';
    return kExitOk;
}

int run_moments(CLI::App* sub, Options& o) {
    ConfigMerger cfg(sub, o.config_path);
    cfg.take("modality", o.modality);
    cfg.take("alpha", o.alpha);
    cfg.take("sigma-db", o.sigma_db);
    cfg.take("sigma-alpha", o.sigma_alpha);
    cfg.take("sigma-tc", o.sigma_tc);
    cfg.take("r0", o.r0);
    cfg.take("r", o.r);
    cfg.take("n", o.n);
    cfg.take("n-range", o.n_range);
    cfg.take("format", o.format);
    cfg.take("out", o.out);

    const Modality modality = build_modality(o, cfg);
    const GeometryModel model = build_model(o, cfg);

    NRange range;
    if (cfg.has("n-range")) {
        range = parse_n_range(o.n_range);
    } else if (cfg.has("n")) {
        range = NRange{o.n, o.n, 1};
    } else {
        throw std::invalid_argument("moments requires --n or --n-range");
    }
    warn_small_n(range.first);

    OutputTarget target(o.out);
    std::ostream& out = target.stream();
    nlohmann::json rows = nlohmann::json::array();
    if (o.format == "csv") {
        out << "n,formula_mean,formula_std\n";
    }
    for (std::uint64_t n = range.first; n <= range.last; n += range.step) {
        const ApproxDistribution dist = approx_distribution(modality, model, n);
        if (o.format == "csv") {
            out << n << ',' << fmt17(approx_mean(dist)) << ','
                << fmt17(approx_std(dist)) << '\n';
        } else {
            rows.push_back({{"n", n},
                            {"formula_mean", approx_mean(dist)},
                            {"formula_std", approx_std(dist)}});
        }
    }
    if (o.format == "json") {
        out << rows.dump(2) << '\n';
    }
    return kExitOk;
}

int run_compare(CLI::App* sub, Options& o) {
    ConfigMerger cfg(sub, o.config_path);
    cfg.take("modality", o.modality);
    cfg.take("alpha", o.alpha);
    cfg.take("sigma-db", o.sigma_db);
    cfg.take("sigma-alpha", o.sigma_alpha);
    cfg.take("sigma-tc", o.sigma_tc);
    cfg.take("r0", o.r0);
    cfg.take("r", o.r);
    cfg.take("n", o.n);
    cfg.take("trials", o.trials);
    cfg.take("seed", o.seed);
    cfg.take("workers", o.workers);
    cfg.take("out", o.out);
    cfg.take("curve-out", o.curve_out);
    cfg.take("pdf-out", o.pdf_out);
    cfg.take("samples-out", o.samples_out);

    const Modality modality = build_modality(o, cfg);
    const GeometryModel model = build_model(o, cfg);
    if (!cfg.has("n")) {
        throw std::invalid_argument("compare requires --n");
    }
    warn_small_n(o.n);

    const TrialBatch batch =
        run_batch(modality, model, o.n, o.trials, SeedSpec{o.seed}, o.workers);
    if (batch.samples.size() < 2) {
        std::cerr << "error: " << batch.singular_count << " of " << batch.trials
                  << " trials were singular; nothing to compare\n";
        return kExitSingular;
    }

    const ApproxDistribution dist = approx_distribution(modality, model, o.n);
    const ErrorReport report = error_report(batch, dist);

    if (!o.samples_out.empty()) {
        std::ofstream s(o.samples_out);
        if (!s) {
            throw std::runtime_error("cannot open '" + o.samples_out + "'");
        }
        write_batch_csv(s, batch);
    }
    if (!o.curve_out.empty()) {
        std::ofstream s(o.curve_out);
        if (!s) {
            throw std::runtime_error("cannot open '" + o.curve_out + "'");
        }
        const Ecdf empirical = ecdf(batch);
        const auto& xs = empirical.sorted();
        s << "x,ecdf,formula_cdf\n";
        const double count = static_cast<double>(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            s << fmt17(xs[i]) << ','
              << fmt17(static_cast<double>(i + 1) / count) << ','
              << fmt17(approx_cdf(dist, xs[i])) << '\n';
        }
    }
    if (!o.pdf_out.empty()) {
        std::ofstream s(o.pdf_out);
        if (!s) {
            throw std::runtime_error("cannot open '" + o.pdf_out + "'");
        }
        const Histogram hist = density_histogram(batch);
        s << "x,empirical_density,formula_density\n";
        for (std::size_t b = 0; b < hist.density.size(); ++b) {
            const double x = hist.center(b);
            s << fmt17(x) << ',' << fmt17(hist.density[b]) << ','
              << fmt17(approx_pdf(dist, x)) << '\n';
        }
    }

    nlohmann::json j;
    j["modality"] = modality_name(modality);
    if (const auto* annulus = std::get_if<Annulus>(&model)) {
        j["model"] = {{"kind", "annulus"},
                      {"r_inner", annulus->r_inner},
                      {"r_outer", annulus->r_outer}};
    } else {
        j["model"] = {{"kind", "disk"}, {"radius", std::get<Disk>(model).radius}};
    }
    j["n"] = o.n;
    j["trials"] = o.trials;
    j["seed"] = o.seed;
    j["finite_count"] = batch.samples.size();
    j["singular_count"] = batch.singular_count;
    j["empirical_mean"] = report.empirical_mean;
    j["empirical_std"] = report.empirical_std;
    j["formula_mean"] = report.formula_mean;
    j["formula_std"] = report.formula_std;
    j["relative_error_mean"] = report.relative_error_mean;
    j["relative_error_std"] = report.relative_error_std;
    j["ks_distance"] = report.ks_distance;

    OutputTarget target(o.out);
    target.stream() << j.dump(2) << '\n';
    return kExitOk;
}

int run_plan(CLI::App* sub, Options& o) {
    ConfigMerger cfg(sub, o.config_path);
    cfg.take("modality", o.modality);
    cfg.take("alpha", o.alpha);
    cfg.take("sigma-db", o.sigma_db);
    cfg.take("sigma-alpha", o.sigma_alpha);
    cfg.take("sigma-tc", o.sigma_tc);
    cfg.take("r0", o.r0);
    cfg.take("r", o.r);
    cfg.take("threshold", o.threshold);
    cfg.take("confidence", o.confidence);
    cfg.take("format", o.format);
    cfg.take("out", o.out);

    const Modality modality = build_modality(o, cfg);
    const GeometryModel model = build_model(o, cfg);
    if (!cfg.has("threshold") || !cfg.has("confidence")) {
        throw std::invalid_argument("plan requires --threshold and --confidence");
    }

    const std::size_t n = min_anchors(modality, model, o.threshold, o.confidence);
    const double achieved =
        approx_cdf(approx_distribution(modality, model, n), o.threshold);
    warn_small_n(n);

    OutputTarget target(o.out);
    if (o.format == "json") {
        nlohmann::json j;
        j["n"] = n;
        j["probability"] = achieved;
        target.stream() << j.dump(2) << '\n';
    } else {
        target.stream() << "n,probability\n"
                        << n << ',' << fmt17(achieved) << '\n';
    }
    std::cerr << "minimum n = " << n << " reaches P(Tr <= " << fmt6(o.threshold)
              << " m^2) = " << fmt6(achieved) << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Performance limits of single-hop sensor localization: exact "
                 "CRLB traces, limiting-law formulas, Monte Carlo comparison "
                 "and deployment planning. Angles are radians everywhere."};
    app.require_subcommand(1);

    Options sample_opts;
    Options eval_opts;
    Options moments_opts;
    Options compare_opts;
    Options plan_opts;
    std::string anchors_path;

    CLI::App* sample_cmd =
        app.add_subcommand("sample", "Draw a random anchor set and print it");
    add_model_flags(sample_cmd, sample_opts);
    add_common_flags(sample_cmd, sample_opts);
    sample_cmd->add_option("--n", sample_opts.n, "Number of anchors");
    sample_cmd->add_option("--seed", sample_opts.seed, "Master seed");
    sample_cmd->add_option("--trial", sample_opts.trial, "Trial (substream) index");

    CLI::App* eval_cmd = app.add_subcommand(
        "eval", "Evaluate the exact CRLB trace for an anchors CSV file");
    add_modality_flags(eval_cmd, eval_opts);
    add_common_flags(eval_cmd, eval_opts);
    eval_cmd->add_option("anchors", anchors_path, "CSV file with header d,alpha")
        ->required();

    CLI::App* moments_cmd = app.add_subcommand(
        "moments", "Tabulate the limiting-law mean and std over an n range");
    add_modality_flags(moments_cmd, moments_opts);
    add_model_flags(moments_cmd, moments_opts);
    add_common_flags(moments_cmd, moments_opts);
    moments_cmd->add_option("--n", moments_opts.n, "Single anchor count");
    moments_cmd->add_option("--n-range", moments_opts.n_range,
                            "Anchor count range A..B[:STEP], inclusive");

    CLI::App* compare_cmd = app.add_subcommand(
        "compare", "Monte Carlo vs limiting law: moments, relative errors, KS");
    add_modality_flags(compare_cmd, compare_opts);
    add_model_flags(compare_cmd, compare_opts);
    add_common_flags(compare_cmd, compare_opts);
    compare_cmd->add_option("--n", compare_opts.n, "Number of anchors");
    compare_cmd->add_option("--trials", compare_opts.trials, "Trial count");
    compare_cmd->add_option("--seed", compare_opts.seed, "Master seed");
    compare_cmd->add_option("--workers", compare_opts.workers,
                            "Worker threads (0 = hardware concurrency)");
    compare_cmd->add_option("--curve-out", compare_opts.curve_out,
                            "Write x,ecdf,formula_cdf CSV to PATH");
    compare_cmd->add_option("--pdf-out", compare_opts.pdf_out,
                            "Write x,empirical_density,formula_density CSV to PATH");
    compare_cmd->add_option("--samples-out", compare_opts.samples_out,
                            "Write trial,trace CSV to PATH");

    CLI::App* plan_cmd = app.add_subcommand(
        "plan", "Minimum anchor count meeting a trace threshold with confidence");
    add_modality_flags(plan_cmd, plan_opts);
    add_model_flags(plan_cmd, plan_opts);
    add_common_flags(plan_cmd, plan_opts);
    plan_cmd->add_option("--threshold", plan_opts.threshold, "Trace threshold [m^2]");
    plan_cmd->add_option("--confidence", plan_opts.confidence,
                         "Required probability in (0, 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help
        }
        app.exit(e);
        return kExitError;
    }

    try {
        if (sample_cmd->parsed()) {
            return run_sample(sample_cmd, sample_opts);
        }
        if (eval_cmd->parsed()) {
            return run_eval(eval_cmd, eval_opts, anchors_path);
        }
        if (moments_cmd->parsed()) {
            return run_moments(moments_cmd, moments_opts);
        }
        if (compare_cmd->parsed()) {
            return run_compare(compare_cmd, compare_opts);
        }
        if (plan_cmd->parsed()) {
            return run_plan(plan_cmd, plan_opts);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
