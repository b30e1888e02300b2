#include "hoed/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hoed/criteria.hpp"
#include "hoed/errors.hpp"
#include "hoed/oracles.hpp"
#include "hoed/rng.hpp"
#include "hoed/spectral.hpp"

namespace hoed::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path prepare_output(const ExperimentConfig& cfg) {
    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw ConfigError("cannot create output directory '" + cfg.output_dir + "'");
    }
    return dir;
}

json meta(const ExperimentConfig& cfg, const char* command) {
    return json{{"command", command}, {"config_hash", config_hash(cfg)}, {"seed", cfg.seed}, {"version", kVersion}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    out << text;
    if (!out) {
        throw ConfigError("failed writing '" + path.string() + "'");
    }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string fmt(double v) {
    if (std::isnan(v)) {
        return "";
    }
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Model with the sensors replaced by `count` equispaced candidates.
HeatModelConfig with_candidates(const HeatModelConfig& base, int count) {
    HeatModelConfig m = base;
    m.sensors = equispaced_sensors(count, base.length);
    if (base.noise_sigma.size() != 1) {
        throw ConfigError("design: candidate grids need a single model.noise_sigma value");
    }
    return m;
}

struct ValidationRow {
    std::string name;
    std::string kind;  // "mc" or "deterministic"
    double closed_form;
    double estimate;
    double std_error;  // NaN for deterministic rows
    double tolerance;  // sigmas * SE for MC rows
    bool pass;
};

ValidationRow mc_row(std::string name, double closed, const McEstimate& est, double sigmas) {
    const double tol = sigmas * est.std_error;
    const double gap = std::abs(closed - est.mean);
    return ValidationRow{std::move(name), "mc", closed, est.mean, est.std_error, tol, gap <= tol};
}

ValidationRow det_row(std::string name, double closed, double estimate, double defect, double tol) {
    return ValidationRow{std::move(name), "deterministic", closed, estimate,
                         std::numeric_limits<double>::quiet_NaN(), tol, defect <= tol};
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

int cmd_criteria(const ExperimentConfig& cfg, int /*threads*/, std::ostream& log) {
    const fs::path dir = prepare_output(cfg);
    const SyntheticProblem sp = build_problem(cfg.model, cfg.seed);
    const InverseProblem& p = sp.problem;

    const CriterionReport d = expected_info_gain(p);
    const CriterionReport d_lr = expected_info_gain(p, cfg.criteria.lowrank_tol);
    const CriterionReport a = bayes_risk(p);
    const VarianceReduction vr = variance_reduction(p);
    const double tr_prior = trace(p.prior().cov());
    const Spectrum& spec = p.pp_spectrum();

    std::vector<double> eig(spec.values.data(), spec.values.data() + spec.rank());
    std::vector<double> alphas(vr.alphas.data(), vr.alphas.data() + vr.alphas.size());
    json out{
        {"meta", meta(cfg, "criteria")},
        {"n", p.space().dim()},
        {"q", p.num_observations()},
        {"criteria",
         {{"D", {{"value", d.value}, {"lowrank_value", d_lr.value}, {"lowrank_rank", d_lr.spectrum_used.rank()},
                 {"lowrank_tol", cfg.criteria.lowrank_tol}}},
          {"A", {{"value", a.value}}},
          {"delta", vr.delta},
          {"trace_prior", tr_prior},
          {"trace_pp_hessian", spec.values.sum()}}},
        {"spectrum", {{"eigenvalues", eig}, {"alphas", alphas}}},
    };
    write_json(dir / "criteria.json", out);

    std::string csv = "index,eigenvalue,alpha\n";
    for (Eigen::Index i = 0; i < spec.rank(); ++i) {
        csv += std::to_string(i) + "," + fmt(spec.values[i]) + "," + fmt(vr.alphas[i]) + "\n";
    }
    write_text(dir / "criteria_spectrum.csv", csv);

    log << "D (expected information gain) = " << fmt(d.value) << "\n"
        << "A (Bayes risk, tr C_post)     = " << fmt(a.value) << "\n"
        << "delta (variance reduction)    = " << fmt(vr.delta) << "\n";
    return kOk;
}

int cmd_validate(const ExperimentConfig& cfg, int threads, std::ostream& log) {
    const fs::path dir = prepare_output(cfg);
    const ValidateSettings& vs = cfg.validate;
    const SyntheticProblem sp = build_problem(cfg.model, cfg.seed);
    const InverseProblem& p = sp.problem;
    const Space& s = p.space();
    std::vector<ValidationRow> rows;

    // KL: both closed forms against each other and against the dense reference
    {
        double worst_forms = 0.0;
        double worst_ref = 0.0;
        double last_kl = 0.0;
        double last_ref = 0.0;
        for (int i = 0; i < vs.kl_instances; ++i) {
            const Vector u = sample_one(p.prior(), cfg.seed + 101, static_cast<std::uint64_t>(i));
            const Vector y = simulate_data(p, u, cfg.seed + 102, static_cast<std::uint64_t>(i));
            const double misfit = kl_post_prior(p, y, KlForm::Misfit);
            const double cm = kl_post_prior(p, y, KlForm::CameronMartin);
            const double ref = kl_gaussian_ref(oracle::dense_posterior(p, y), p.prior());
            worst_forms = std::max(worst_forms, relative(misfit, cm));
            worst_ref = std::max({worst_ref, relative(misfit, ref), relative(cm, ref)});
            last_kl = misfit;
            last_ref = ref;
        }
        rows.push_back(det_row("kl_forms_agree", last_kl, last_kl, worst_forms, 1e-8));
        rows.push_back(det_row("kl_vs_reference", last_kl, last_ref, worst_ref, 1e-8));
    }

    McOptions mc;
    mc.n_samples = vs.samples;
    mc.threads = threads;

    {
        const double closed = expected_info_gain(p).value * (vs.corrupt ? 1.25 : 1.0);
        mc.seed = cfg.seed + 1;
        rows.push_back(mc_row("eig_mc", closed, mc_oracle(p, McTarget::Eig, mc), vs.sigmas));
    }
    {
        mc.seed = cfg.seed + 2;
        rows.push_back(mc_row("bayes_risk_mc", bayes_risk(p).value, mc_oracle(p, McTarget::BayesRisk, mc), vs.sigmas));
    }
    {
        const Vector& lam = p.pp_spectrum().values;
        mc.seed = cfg.seed + 3;
        rows.push_back(mc_row("dblexp_data_mc", lam.sum(), mc_oracle(p, McTarget::DblExpData, mc), vs.sigmas));
        mc.seed = cfg.seed + 4;
        const double tr_sh2 = (lam.array().square() / (1.0 + lam.array())).sum();
        rows.push_back(mc_row("dblexp_hessian_mc", tr_sh2, mc_oracle(p, McTarget::DblExpHessian, mc), vs.sigmas));
        mc.seed = cfg.seed + 5;
        rows.push_back(mc_row("forward_second_moment_mc", lam.sum(),
                              mc_oracle(p, McTarget::ForwardSecondMoment, mc), vs.sigmas));
    }
    {
        McOptions m2 = mc;
        m2.seed = cfg.seed + 6;
        m2.n_samples = vs.mse_samples;
        m2.fixed = sp.u_true;
        rows.push_back(mc_row("mse_map_mc", mse_map(p, sp.u_true).total(), mc_oracle(p, McTarget::MseAtTruth, m2),
                              vs.sigmas));
    }
    {
        HeatModelConfig small = cfg.model;
        small.n = vs.z0_grid;
        small.noise_sigma = {vs.z0_noise_sigma};
        const SyntheticProblem reduced = build_problem(small, cfg.seed + 7);
        McOptions m3 = mc;
        m3.seed = cfg.seed + 8;
        m3.n_samples = vs.z0_samples;
        m3.fixed = reduced.data;
        rows.push_back(mc_row("z0_mc", std::exp(z0_log(reduced.problem, reduced.data)),
                              mc_oracle(reduced.problem, McTarget::Z0, m3), vs.sigmas));
    }
    {
        const Spectrum& pp = p.pp_spectrum();
        const Matrix& cpost = p.posterior_cov_dense();
        double worst_excess = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < pp.rank(); ++i) {
            const Vector e = pp.vectors.col(i);
            worst_excess = std::max(worst_excess, s.inner(cpost * e, e) - s.inner(p.prior().cov().apply(e), e));
        }
        if (pp.rank() == 0) {
            worst_excess = 0.0;
        }
        const double delta = variance_reduction(p).delta;
        rows.push_back(det_row("per_direction_variance", worst_excess, delta,
                               std::max(worst_excess, -delta), 1e-10));
    }
    {
        const Vector& lam = p.pp_spectrum().values;
        const double spectral = (lam.array() / (1.0 + lam.array())).sum();
        const double via_ops = trace(OpExpr::compose({misfit_hessian(p), posterior_cov(p)}));
        rows.push_back(det_row("trace_hm_cpost", via_ops, spectral,
                               std::abs(via_ops - spectral) / std::max(1.0, std::abs(spectral)), 1e-10));
    }
    {
        const Vector m_post = p.posterior_mean(sp.data);
        const auto objective = [&](const Vector& u) { return map_objective(p, u, sp.data); };
        double worst = 0.0;
        for (int i = 0; i < vs.map_directions; ++i) {
            CounterRng rng(cfg.seed + 9, static_cast<std::uint64_t>(i));
            Vector h = rng.normal_vector(s.dim());
            h /= s.norm(h);
            worst = std::max(worst, std::abs(oracle::directional_derivative(objective, m_post, h, 1e-5)));
        }
        rows.push_back(det_row("map_optimality", objective(m_post), worst, worst, 1e-6));
    }
    {
        const double defect = adjoint_defect(p.forward(), 100, cfg.seed + 10);
        rows.push_back(det_row("forward_adjoint", 0.0, defect, defect, 1e-12));
    }
    {
        const Matrix dense = oracle::dense_pp_hessian(p);
        const Vector sq = s.mass().cwiseSqrt();
        Matrix sym = sq.asDiagonal() * dense * sq.cwiseInverse().asDiagonal();
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (sym + sym.transpose()));
        const Vector all = es.eigenvalues().reverse().cwiseMax(0.0);
        const double full = 0.5 * all.array().log1p().sum();
        const CriterionReport lr = expected_info_gain(p, cfg.criteria.lowrank_tol);
        const double tail = 0.5 * all.tail(all.size() - lr.spectrum_used.rank()).sum();
        const double err = std::abs(lr.value - full);
        rows.push_back(det_row("lowrank_fidelity", lr.value, full, err, std::min(tail, 1e-6) + 1e-10));
    }

    bool all_pass = true;
    json jrows = json::array();
    std::string csv = "name,kind,closed_form,estimate,std_error,tolerance,pass\n";
    for (const auto& r : rows) {
        all_pass = all_pass && r.pass;
        jrows.push_back(json{{"name", r.name},
                             {"kind", r.kind},
                             {"closed_form", number_or_null(r.closed_form)},
                             {"estimate", number_or_null(r.estimate)},
                             {"std_error", number_or_null(r.std_error)},
                             {"tolerance", number_or_null(r.tolerance)},
                             {"pass", r.pass}});
        csv += r.name + "," + r.kind + "," + fmt(r.closed_form) + "," + fmt(r.estimate) + "," + fmt(r.std_error) +
               "," + fmt(r.tolerance) + "," + (r.pass ? "true" : "false") + "\n";
        log << (r.pass ? "PASS " : "FAIL ") << r.name << "  closed=" << fmt(r.closed_form)
            << " estimate=" << fmt(r.estimate);
        if (r.kind == "mc") {
            log << " se=" << fmt(r.std_error);
        }
        log << "\n";
    }
    write_json(dir / "validate.json", json{{"meta", meta(cfg, "validate")}, {"all_pass", all_pass}, {"rows", jrows}});
    write_text(dir / "validate.csv", csv);
    return all_pass ? kOk : kValidationFailed;
}

int cmd_design(const ExperimentConfig& cfg, int /*threads*/, std::ostream& log) {
    const fs::path dir = prepare_output(cfg);
    const DesignSettings& ds = cfg.design;
    const HeatModelConfig model = with_candidates(cfg.model, ds.candidates);
    const SyntheticProblem sp = build_problem(model, cfg.seed);
    const InverseProblem& p = sp.problem;

    const GreedyResult g = greedy_design(p, ds.k, ds.criterion);
    json steps = json::array();
    std::string csv = "step,chosen,location,value,monotone\n";
    bool monotone = true;
    for (std::size_t i = 0; i < g.steps.size(); ++i) {
        const auto& st = g.steps[i];
        const double loc = model.sensors[static_cast<std::size_t>(st.chosen)];
        monotone = monotone && st.monotone;
        steps.push_back(json{{"step", i + 1}, {"chosen", st.chosen}, {"location", loc},
                             {"value", st.report.value}, {"monotone", st.monotone}});
        csv += std::to_string(i + 1) + "," + std::to_string(st.chosen) + "," + fmt(loc) + "," +
               fmt(st.report.value) + "," + (st.monotone ? "true" : "false") + "\n";
    }
    const double final_value = g.steps.empty() ? g.initial_value : g.steps.back().report.value;
    std::vector<Eigen::Index> chosen = g.design.active();
    std::vector<double> locations;
    for (auto j : chosen) {
        locations.push_back(model.sensors[static_cast<std::size_t>(j)]);
    }
    json out{{"meta", meta(cfg, "design")},
             {"criterion", to_string(ds.criterion)},
             {"candidates", model.sensors},
             {"k", ds.k},
             {"initial_value", g.initial_value},
             {"steps", steps},
             {"monotone", monotone},
             {"final", {{"indices", chosen}, {"locations", locations}, {"value", final_value}}}};

    if (ds.exhaustive && ds.candidates <= 15) {
        const ExhaustiveResult ex = exhaustive_design(p, ds.k, ds.criterion);
        const double gap = ds.criterion == Criterion::D ? ex.best_value - final_value : final_value - ex.best_value;
        out["exhaustive"] = json{{"best_indices", ex.best},
                                 {"best_value", ex.best_value},
                                 {"subsets_evaluated", ex.subsets_evaluated},
                                 {"gap", gap},
                                 {"greedy_is_optimal", gap <= 1e-10 * std::max(1.0, std::abs(ex.best_value))}};
        log << "exhaustive optimum " << fmt(ex.best_value) << " over " << ex.subsets_evaluated
            << " subsets; greedy gap " << fmt(gap) << "\n";
    }
    write_json(dir / "design.json", out);
    write_text(dir / "design.csv", csv);
    log << "greedy " << to_string(ds.criterion) << " design value " << fmt(final_value)
        << (monotone ? " (monotone)" : " (NOT monotone)") << "\n";
    return kOk;
}

int cmd_refine(const ExperimentConfig& cfg, int /*threads*/, std::ostream& log) {
    const fs::path dir = prepare_output(cfg);
    json rows = json::array();
    std::string csv = "n,eig,bayes_risk,trace_prior,naive_logdet_post\n";
    std::vector<double> eig, risk, naive;
    for (int n : cfg.refine.grid_sizes) {
        HeatModelConfig m = cfg.model;
        m.n = n;
        const SyntheticProblem sp = build_problem(m, cfg.seed);
        const InverseProblem& p = sp.problem;
        const double d = expected_info_gain(p).value;
        const double a = bayes_risk(p).value;
        const double trp = trace(p.prior().cov());
        // log det C_post = log det C_pr - log det(I + H~_m)
        const double logdet_post =
            p.prior().cov_spectrum().values.array().log().sum() - logdet_i_plus(p.pp_spectrum());
        eig.push_back(d);
        risk.push_back(a);
        naive.push_back(logdet_post);
        rows.push_back(json{{"n", n}, {"eig", d}, {"bayes_risk", a}, {"trace_prior", trp},
                            {"naive_logdet_post", logdet_post}});
        csv += std::to_string(n) + "," + fmt(d) + "," + fmt(a) + "," + fmt(trp) + "," + fmt(logdet_post) + "\n";
        log << "n=" << n << " eig=" << fmt(d) << " bayes_risk=" << fmt(a) << " naive_logdet_post=" << fmt(logdet_post)
            << "\n";
    }
    json summary;
    if (eig.size() >= 2) {
        const std::size_t k = eig.size() - 1;
        summary["eig_rel_change_last"] = std::abs(eig[k] - eig[k - 1]) / std::abs(eig[k]);
        summary["bayes_risk_rel_change_last"] = std::abs(risk[k] - risk[k - 1]) / std::abs(risk[k]);
        bool decreasing = true;
        for (std::size_t i = 1; i < naive.size(); ++i) {
            decreasing = decreasing && naive[i] < naive[i - 1];
        }
        summary["naive_logdet_strictly_decreasing"] = decreasing;
    }
    write_json(dir / "refine.json", json{{"meta", meta(cfg, "refine")}, {"rows", rows}, {"summary", summary}});
    write_text(dir / "refine.csv", csv);
    return kOk;
}

int run(const RunOptions& opts, std::ostream& log, std::ostream& err) {
    try {
        ExperimentConfig cfg = load_config(opts.config_path);
        if (opts.out_dir) {
            cfg.output_dir = *opts.out_dir;
        }
        if (opts.seed) {
            cfg.seed = *opts.seed;
        }
        const int threads = std::max(1, opts.threads);
        if (opts.command == "criteria") return cmd_criteria(cfg, threads, log);
        if (opts.command == "validate") return cmd_validate(cfg, threads, log);
        if (opts.command == "design") return cmd_design(cfg, threads, log);
        if (opts.command == "refine") return cmd_refine(cfg, threads, log);
        err << "error: unknown command '" << opts.command << "'\n";
        return kConfigFailure;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigFailure;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumericalFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumericalFailure;
    }
}

}  // namespace hoed::cli
