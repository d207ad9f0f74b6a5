// msgd: structured-sparsity-constrained GLM estimation via projected
// gradient descent. Subcommands: gen, fit, smrh, project, check.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "msgd/glm.hpp"
#include "msgd/io.hpp"
#include "msgd/model.hpp"
#include "msgd/projection.hpp"
#include "msgd/smrh.hpp"
#include "msgd/solver.hpp"
#include "msgd/synth.hpp"
#include "msgd/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// FNV-1a over the invocation, so outputs can be traced back to their config.
std::string config_hash(int argc, char** argv) {
    std::uint64_t h = 1469598103934665603ULL;
    for (int i = 1; i < argc; ++i) {
        for (const char* c = argv[i]; *c; ++c) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*c));
            h *= 1099511628211ULL;
        }
        h ^= 0x1f;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return std::string(buf);
}

struct CommonOpts {
    std::string model_path;
    std::string data_path;
    std::string family_name = "linear";
    double sigma = 1.0;
    double radius = 0.0;
    std::string out_path;
    std::uint64_t cap = 100000;
    std::uint64_t seed = 0;
};

msgd::GlmFamily make_family(const CommonOpts& o) {
    if (o.family_name == "linear") return msgd::GlmFamily::linear(o.sigma);
    if (o.family_name == "logistic") return msgd::GlmFamily::logistic();
    if (o.family_name == "poisson") return msgd::GlmFamily::poisson();
    throw std::invalid_argument("unknown family: " + o.family_name);
}

msgd::StepPolicy parse_step_policy(const std::string& spec_str, bool& needs_smrh) {
    needs_smrh = false;
    if (spec_str == "adaptive") return msgd::AdaptiveQuadraticForm{};
    if (spec_str == "optimal") {
        needs_smrh = true;
        return msgd::AdaptiveQuadraticForm{};  // replaced once constants are known
    }
    if (spec_str.rfind("fixed:", 0) == 0)
        return msgd::FixedValue{msgd::parse_double(spec_str.substr(6))};
    throw std::invalid_argument("--step must be fixed:<eta>, optimal, or adaptive");
}

void stamp(json& j, const std::string& hash) {
    j["config_hash"] = hash;
    j["version"] = msgd::kVersion;
}

void write_json(const std::string& path, json j) {
    msgd::atomic_write(path, j.dump(2) + "\n");
}

int run_gen(const CommonOpts& o, int k_active, double magnitude, double covariate_scale,
            msgd::Index n, const std::string& hash) {
    const msgd::SparsityModel model = msgd::read_model_json(o.model_path);
    const msgd::GlmFamily family = make_family(o);
    const int ka = k_active > 0 ? k_active : model.order();
    const msgd::Vec theta_star = msgd::gen_parameter(model, o.radius, ka, o.seed, magnitude);
    const msgd::Dataset data = msgd::gen_dataset(family, theta_star, n, covariate_scale, o.seed);
    msgd::atomic_write(o.out_path, msgd::dataset_to_csv(data));

    json meta;
    meta["theta_star"] = std::vector<double>(theta_star.data(), theta_star.data() + theta_star.size());
    meta["seed"] = o.seed;
    meta["family"] = o.family_name;
    if (family.is_linear()) meta["sigma"] = o.sigma;
    meta["model"] = msgd::model_to_json(model);
    meta["n"] = static_cast<std::int64_t>(n);
    meta["k_active"] = ka;
    meta["magnitude"] = magnitude;
    meta["covariate_scale"] = covariate_scale;
    meta["radius"] = o.radius;
    stamp(meta, hash);
    write_json(o.out_path + ".meta.json", std::move(meta));
    return 0;
}

int run_fit(const CommonOpts& o, const std::string& step_spec, int max_iters, double rel_tol,
            const std::string& reference_path, std::string trace_path) {
    const msgd::SparsityModel model = msgd::read_model_json(o.model_path);
    const msgd::GlmFamily family = make_family(o);
    const msgd::Dataset data = msgd::read_dataset_csv(o.data_path);

    bool needs_smrh = false;
    msgd::SolverConfig config;
    config.step_policy = parse_step_policy(step_spec, needs_smrh);
    if (needs_smrh) {
        const msgd::SmrhEstimate est =
            msgd::analytic_smrh_bounds(model, data, family, o.radius, o.cap);
        config.step_policy = msgd::FixedOptimal{est.alpha, est.beta};
    }
    config.radius = o.radius;
    config.max_iters = max_iters;
    config.rel_tol = rel_tol;
    if (!reference_path.empty()) config.reference = msgd::read_vector_csv(reference_path);

    const msgd::FitResult result = msgd::fit(model, family, data, config);
    msgd::atomic_write(o.out_path, msgd::vector_to_csv(result.theta));
    if (trace_path.empty()) trace_path = o.out_path + ".trace.csv";
    msgd::atomic_write(trace_path, msgd::trace_to_csv(result.trace));
    return 0;
}

int run_smrh(const CommonOpts& o, int trials, const std::string& hash) {
    const msgd::SparsityModel model = msgd::read_model_json(o.model_path);
    const msgd::GlmFamily family = make_family(o);
    const msgd::Dataset data = msgd::read_dataset_csv(o.data_path);

    json out;
    double alpha = 0.0, beta = 0.0;
    try {
        const msgd::SmrhEstimate est =
            msgd::analytic_smrh_bounds(model, data, family, o.radius, o.cap);
        alpha = est.alpha;
        beta = est.beta;
        out["method"] = "analytic";
        out["certified"] = true;
        out["supports_examined"] = est.supports_examined;
    } catch (const msgd::EnumerationBudgetExceeded&) {
        const auto [q_min, q_max] =
            msgd::empirical_smrh_probe(model, data, family, o.radius, trials, o.seed);
        alpha = q_max;
        beta = q_min;
        out["method"] = "empirical (non-certified)";
        out["certified"] = false;
        out["supports_examined"] = trials;
    }
    out["alpha"] = alpha;
    out["beta"] = beta;
    out["mu"] = alpha / beta;
    const double eta_star = msgd::step_size_optimal(alpha, beta);
    out["eta_star"] = eta_star;
    out["gamma_at_eta_star"] = msgd::contraction_gamma(eta_star, eta_star, alpha / beta);
    out["radius"] = o.radius;
    stamp(out, hash);
    write_json(o.out_path, std::move(out));
    return 0;
}

int run_project(const CommonOpts& o, const std::string& hash) {
    const msgd::SparsityModel model = msgd::read_model_json(o.model_path);
    const msgd::Vec v = msgd::read_vector_csv(o.data_path);
    const double r = o.radius > 0.0 ? o.radius : std::numeric_limits<double>::infinity();
    const msgd::ProjectionResult res = msgd::project_bounded(model, r, v);

    json out;
    out["vector"] = std::vector<double>(res.vector.data(), res.vector.data() + res.vector.size());
    out["support"] = res.support.indices();
    out["chosen_generator"] = res.chosen_generator.indices();
    out["scaled"] = res.scaled;
    stamp(out, hash);
    write_json(o.out_path, std::move(out));
    return 0;
}

int run_check(const CommonOpts& o, const std::string& theta_star_path,
              const std::string& meta_path, double gamma, double eta,
              const std::string& hash) {
    const msgd::SparsityModel model = msgd::read_model_json(o.model_path);
    const msgd::GlmFamily family = make_family(o);
    const msgd::Dataset data = msgd::read_dataset_csv(o.data_path);

    msgd::Vec theta_star;
    if (!theta_star_path.empty()) {
        theta_star = msgd::read_vector_csv(theta_star_path);
    } else if (!meta_path.empty()) {
        const json meta = json::parse(msgd::read_file(meta_path));
        const auto vals = meta.at("theta_star").get<std::vector<double>>();
        theta_star = Eigen::Map<const msgd::Vec>(vals.data(), static_cast<msgd::Index>(vals.size()));
    } else {
        throw std::invalid_argument("check: need --theta-star <csv> or --meta <json>");
    }

    const msgd::ErrorDecomposition dec =
        msgd::error_decomposition(model, o.radius, family, data, theta_star, o.cap, o.seed);

    json out;
    out["theta_perp"] =
        std::vector<double>(dec.theta_perp.data(), dec.theta_perp.data() + dec.theta_perp.size());
    out["delta2"] = dec.delta2;
    out["sigma_stat_hat"] = dec.sigma_stat_hat;
    out["delta1_hat"] = dec.delta1_hat;
    out["w_hat"] = dec.w_hat;
    out["w_hat_certified"] = dec.w_hat_certified;
    out["z_norm"] = dec.z_norm;
    out["grad_term"] = dec.grad_term;
    out["grad_support"] = dec.grad_support.indices();
    out["opnorm_bound_holds"] = dec.opnorm_ok;
    if (gamma >= 0.0 && eta > 0.0 && 2.0 * gamma < 1.0) {
        // i -> infinity limits of the iterate error split, using the supplied
        // fixed-step constants.
        const double amp = 2.0 * eta * dec.w_hat / (1.0 - 2.0 * gamma);
        json bound;
        bound["statistical"] = amp * dec.sigma_stat_hat;
        bound["bias_link"] = amp * dec.delta1_hat;
        bound["bias_projection"] = dec.delta2;
        bound["gamma"] = gamma;
        bound["eta"] = eta;
        out["asymptotic_error_split"] = std::move(bound);
    }
    stamp(out, hash);
    write_json(o.out_path, std::move(out));
    return 0;
}

void emit_error(const std::string& kind, const std::string& message) {
    json err;
    err["error"] = message;
    err["kind"] = kind;
    std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"structured-sparsity GLM estimation via projected gradient descent"};
    app.require_subcommand(1);
    const std::string hash = config_hash(argc, argv);

    CommonOpts o;
    int k_active = 0;
    double magnitude = 1.0;
    double covariate_scale = 1.0;
    std::int64_t n_samples = 100;
    std::string step_spec = "adaptive";
    int max_iters = 500;
    double rel_tol = 1e-8;
    std::string reference_path, trace_path, theta_star_path, meta_path;
    int trials = 2000;
    double audit_gamma = -1.0, audit_eta = 0.0;

    auto add_common = [&](CLI::App* cmd, bool needs_data, bool needs_family) {
        cmd->add_option("--model", o.model_path, "model description JSON")->required();
        cmd->add_option("--out", o.out_path, "output path")->required();
        if (needs_data) cmd->add_option("--data", o.data_path, "input CSV")->required();
        if (needs_family) {
            cmd->add_option("--family", o.family_name, "linear|logistic|poisson")->required();
            cmd->add_option("--sigma", o.sigma, "linear-family scale (default 1)");
        }
        cmd->add_option("--cap", o.cap, "enumeration budget (default 100000)");
        cmd->add_option("--seed", o.seed, "RNG seed (default 0)");
    };

    CLI::App* gen = app.add_subcommand("gen", "draw a ground truth and a synthetic dataset");
    add_common(gen, false, true);
    gen->add_option("--radius", o.radius, "feasible-set radius")->required();
    gen->add_option("--n", n_samples, "number of samples")->required();
    gen->add_option("--k-active", k_active, "nonzeros in theta* (default: model order)");
    gen->add_option("--magnitude", magnitude, "entry magnitude for theta* (default 1)");
    gen->add_option("--covariate-scale", covariate_scale, "covariate norm cap (default 1)");

    CLI::App* fit = app.add_subcommand("fit", "projected gradient descent estimate");
    add_common(fit, true, true);
    fit->add_option("--radius", o.radius, "feasible-set radius")->required();
    fit->add_option("--step", step_spec, "fixed:<eta>|optimal|adaptive (default adaptive)");
    fit->add_option("--max-iters", max_iters, "iteration budget (default 500)");
    fit->add_option("--rel-tol", rel_tol, "relative step tolerance (default 1e-8)");
    fit->add_option("--reference", reference_path, "reference vector CSV for distance recording");
    fit->add_option("--trace-out", trace_path, "trace CSV path (default <out>.trace.csv)");

    CLI::App* smrh = app.add_subcommand("smrh", "restricted-Hessian sandwich constants");
    add_common(smrh, true, true);
    smrh->add_option("--radius", o.radius, "feasible-set radius")->required();
    smrh->add_option("--trials", trials, "probe trials when enumeration is infeasible");

    CLI::App* project = app.add_subcommand("project", "bounded model projection of a vector");
    add_common(project, true, false);
    project->add_option("--radius", o.radius, "ball radius (omit for unbounded)");

    CLI::App* check = app.add_subcommand("check", "empirical error decomposition at a truth");
    add_common(check, true, true);
    check->add_option("--radius", o.radius, "feasible-set radius")->required();
    check->add_option("--theta-star", theta_star_path, "truth vector CSV");
    check->add_option("--meta", meta_path, "gen sidecar JSON carrying theta_star");
    check->add_option("--gamma", audit_gamma, "contraction coefficient for the error split");
    check->add_option("--eta", audit_eta, "step size for the error split");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        emit_error("config", e.what());
        return kExitConfig;
    }

    try {
        if (gen->parsed()) return run_gen(o, k_active, magnitude, covariate_scale,
                                          static_cast<msgd::Index>(n_samples), hash);
        if (fit->parsed())
            return run_fit(o, step_spec, max_iters, rel_tol, reference_path, trace_path);
        if (smrh->parsed()) return run_smrh(o, trials, hash);
        if (project->parsed()) return run_project(o, hash);
        if (check->parsed())
            return run_check(o, theta_star_path, meta_path, audit_gamma, audit_eta, hash);
    } catch (const std::invalid_argument& e) {
        emit_error("config", e.what());
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        emit_error("config", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        emit_error("numerical", e.what());
        return kExitNumerical;
    }
    return 0;
}
