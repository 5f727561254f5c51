// sglab: batch front door for the gasket multiplier laboratory. Each
// subcommand builds its operators, runs the checks, and persists one CSV per
// table plus a single JSON summary. Reruns with identical config and seed
// produce byte-identical CSV bodies; wall-clock times live only in the JSON.

#include <sglab/sglab.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

using json = nlohmann::ordered_json; // insertion order keeps summaries stable
using namespace sglab;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

struct ExperimentConfig {
    int level = -1;       // -1: each subcommand picks its own default
    std::uint64_t seed = 2024;
    double a = 1.0, b = 1.0;                 // Riesz numerator coefficients
    double c = 1.0, d = 2.2360679774997896;  // quasielliptic pair, d/c = sqrt 5
    double gamma = -1.0;                     // cutoff center; -1 follows d/c
    double sigma = 0.08;                     // cutoff width
    double s = -1.0;                         // Sobolev order; -1 means d + 1/2
    std::vector<double> p_list = {1.25, 1.5, 2.0};
    std::string out = "out";
    bool svg = false;
};

void load_config_file(const std::string& path, ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw config_error("config file " + path + ": " + e.what());
    }
    if (!doc.is_object()) throw config_error("config file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "level") cfg.level = value.get<int>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "a") cfg.a = value.get<double>();
            else if (key == "b") cfg.b = value.get<double>();
            else if (key == "c") cfg.c = value.get<double>();
            else if (key == "d") cfg.d = value.get<double>();
            else if (key == "gamma") cfg.gamma = value.get<double>();
            else if (key == "sigma") cfg.sigma = value.get<double>();
            else if (key == "s") cfg.s = value.get<double>();
            else if (key == "p_list") cfg.p_list = value.get<std::vector<double>>();
            else if (key == "out") cfg.out = value.get<std::string>();
            else if (key == "svg") cfg.svg = value.get<bool>();
            else throw config_error("config file: unknown key '" + key + "'");
        } catch (const json::exception& e) {
            throw config_error("config key '" + key + "': " + e.what());
        }
    }
}

// Resolve the sentinel defaults and validate everything before any
// computation starts.
ExperimentConfig resolve(ExperimentConfig cfg, int default_level) {
    if (cfg.level < 0) cfg.level = default_level;
    if (cfg.gamma < 0.0) cfg.gamma = cfg.d / cfg.c;
    if (cfg.s < 0.0) cfg.s = sg_dimension() + 0.5;
    if (cfg.level < 1 || cfg.level > 8) throw config_error("level must be between 1 and 8");
    if (!(cfg.c > 0.0) || !(cfg.d > 0.0)) throw config_error("c and d must be positive");
    if (!(cfg.sigma > 0.0)) throw config_error("sigma must be positive");
    if (!(cfg.s > 0.0)) throw config_error("s must be positive");
    if (!(cfg.gamma > 0.0)) throw config_error("gamma must be positive");
    if (cfg.p_list.empty()) throw config_error("p_list must not be empty");
    for (double p : cfg.p_list)
        if (!(p >= 1.0)) throw config_error("every p must be at least 1");
    if (cfg.out.empty()) throw config_error("output directory must not be empty");
    return cfg;
}

json config_echo(const ExperimentConfig& cfg) {
    json j;
    j["level"] = cfg.level;
    j["seed"] = cfg.seed;
    j["a"] = cfg.a;
    j["b"] = cfg.b;
    j["c"] = cfg.c;
    j["d"] = cfg.d;
    j["gamma"] = cfg.gamma;
    j["sigma"] = cfg.sigma;
    j["s"] = cfg.s;
    j["p_list"] = cfg.p_list;
    j["out"] = cfg.out;
    j["svg"] = cfg.svg;
    return j;
}

void write_output(const std::string& dir, const std::string& name, const std::string& body,
                  json& files) {
    write_text_file(dir + "/" + name, body);
    files.push_back(name);
}

// One table cell: the computed value, or the reason it is not a number.
std::string guarded_cell(const std::function<double()>& compute, std::string* status = nullptr) {
    try {
        const double v = compute();
        if (status) *status = "ok";
        return format_g17(v);
    } catch (const singular_symbol_error&) {
        if (status) *status = "singular";
        return "singular";
    } catch (const budget_error&) {
        if (status) *status = "budget";
        return "budget";
    } catch (const under_resolved_error&) {
        if (status) *status = "under_resolved";
        return "under_resolved";
    }
}

// ---------------------------------------------------------------- gaps ----

json cmd_gaps(const ExperimentConfig& cfg) {
    Timer timer;
    json section;
    section["level"] = cfg.level;
    json files = json::array();

    const GapConstants gc = gap_constants(1e-12);
    const double beta_reference = 2.4288; // commonly quoted value; see README
    const double psi2 = renormalized_limit(2.0).value;
    const double psi3 = renormalized_limit(3.0).value;
    const double psi5 = renormalized_limit(5.0).value;

    CsvTable constants{{"name", "value"}, {}};
    constants.add_row({"alpha", format_g17(gc.alpha)});
    constants.add_row({"beta", format_g17(gc.beta)});
    constants.add_row({"alpha_times_beta", format_g17(gc.alpha * gc.beta)});
    constants.add_row({"beta_reference", format_g17(beta_reference)});
    constants.add_row({"beta_discrepancy", format_g17(gc.beta - beta_reference)});
    constants.add_row({"renormalized_limit_2", format_g17(psi2)});
    constants.add_row({"renormalized_limit_3", format_g17(psi3)});
    constants.add_row({"renormalized_limit_5", format_g17(psi5)});

    const std::vector<double> candidates = generate_sg_eigenvalues(cfg.level, 1e-10);
    CsvTable cand{{"index", "value"}, {}};
    for (std::size_t i = 0; i < candidates.size(); ++i)
        cand.add_row({std::to_string(i), format_g17(candidates[i])});

    const auto gaps = ratio_gaps(candidates, {1.0, 6.0});
    CsvTable gaptab{{"lo", "hi", "width"}, {}};
    for (const auto& [lo, hi] : gaps)
        gaptab.add_row({format_g17(lo), format_g17(hi), format_g17(hi - lo)});

    const double target = cfg.d / cfg.c;
    json containing = nullptr;
    for (const auto& [lo, hi] : gaps)
        if (lo < target && target < hi) containing = json::array({lo, hi});

    const QuasiellipticResult q = quasielliptic_check(cfg.c, cfg.d, candidates, candidates);

    section["alpha"] = gc.alpha;
    section["beta"] = gc.beta;
    section["alpha_times_beta"] = gc.alpha * gc.beta;
    section["beta_reference"] = beta_reference;
    section["beta_discrepancy"] = gc.beta - beta_reference;
    section["candidate_count"] = candidates.size();
    section["candidate_min"] = candidates.front();
    section["candidate_max"] = candidates.back();
    section["ratio_window"] = json::array({1.0, 6.0});
    section["gap_count"] = gaps.size();
    section["gap_containing_d_over_c"] = containing;
    section["quasielliptic"] = {{"c", cfg.c},
                                {"d", cfg.d},
                                {"min_gap", q.min_gap},
                                {"in_gap", q.in_gap}};

    write_output(cfg.out, "gaps_constants.csv", constants.to_string(), files);
    write_output(cfg.out, "gaps_candidates.csv", cand.to_string(), files);
    write_output(cfg.out, "gaps_ratio_gaps.csv", gaptab.to_string(), files);
    if (cfg.svg) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            xs.push_back(static_cast<double>(i));
            ys.push_back(candidates[i]);
        }
        write_output(cfg.out, "gaps_candidates.svg",
                     svg_line_plot(xs, ys, {"decimation candidates", false, true}), files);
    }
    section["files"] = files;
    section["runtime_seconds"] = timer.seconds();
    return section;
}

// --------------------------------------------------------------- riesz ----

json cmd_riesz(const ExperimentConfig& cfg) {
    Timer timer;
    json section;
    section["level"] = cfg.level;
    json files = json::array();

    const std::vector<double> candidates = generate_sg_eigenvalues(6, 1e-10);
    const QuasiellipticResult global = quasielliptic_check(cfg.c, cfg.d, candidates, candidates);
    section["d_over_c_in_candidate_gap"] = global.in_gap;
    if (!global.in_gap)
        std::fprintf(stderr,
                     "warning: d/c = %.17g is not inside a candidate ratio gap; "
                     "proceeding to demonstrate the failure\n",
                     cfg.d / cfg.c);

    const auto [f1, f2] = riesz_symbols(cfg.a, cfg.b, cfg.c, cfg.d);
    const std::vector<MultiplierSymbol> symbols = {identity_symbol(), f1, f2};

    CsvTable norms{{"level", "symbol", "l2", "l1", "l1_mode", "weak11"}, {}};
    CsvTable lptab{{"level", "symbol", "p", "lp_lower_bound"}, {}};
    json levels = json::array();
    std::vector<double> trend_x, trend_y;

    for (int lvl = 1; lvl <= cfg.level; ++lvl) {
        const SgOperatorData od = sg_operator(build(lvl), BoundaryCondition::dirichlet);
        const QuasiellipticResult q =
            quasielliptic_check(cfg.c, cfg.d, od.dec.values, od.dec.values);
        json entry;
        entry["level"] = lvl;
        entry["min_gap"] = q.min_gap;
        entry["in_gap"] = q.in_gap;

        for (const MultiplierSymbol& sym : symbols) {
            const ProductOperator op{od.dec, od.dec, sym};
            std::string l2_status;
            const std::string l2 = guarded_cell([&] { return l2_norm(op); }, &l2_status);

            std::string l1_mode = "exact";
            std::string l1 = guarded_cell([&] { return l1_norm(op); }, &l1_mode);
            if (l1_mode == "budget") {
                l1 = guarded_cell([&] { return l1_norm_sampled(op, 200, cfg.seed); }, &l1_mode);
                if (l1_mode == "ok") l1_mode = "sampled";
            } else if (l1_mode == "ok") {
                l1_mode = "exact";
            }

            const std::string w11 = guarded_cell([&] { return weak11_quantity(op); });
            norms.add_row({std::to_string(lvl), sym.name, l2, l1, l1_mode, w11});

            for (double p : cfg.p_list) {
                const std::string lp =
                    guarded_cell([&] { return lp_lower_bound(op, p, 8, cfg.seed); });
                lptab.add_row({std::to_string(lvl), sym.name, format_g17(p), lp});
            }

            if (sym.name == f1.name && l2_status == "ok") {
                trend_x.push_back(static_cast<double>(lvl));
                trend_y.push_back(std::stod(l2));
            }
        }
        levels.push_back(entry);
    }

    section["per_level"] = levels;
    write_output(cfg.out, "riesz_norms.csv", norms.to_string(), files);
    write_output(cfg.out, "riesz_lp.csv", lptab.to_string(), files);
    if (cfg.svg && !trend_x.empty())
        write_output(cfg.out, "riesz_l2_trend.svg",
                     svg_line_plot(trend_x, trend_y, {"l2 norm of the first Riesz quotient"}),
                     files);
    section["files"] = files;
    section["runtime_seconds"] = timer.seconds();
    return section;
}

// ---------------------------------------------------------------- heat ----

json cmd_heat(const ExperimentConfig& cfg) {
    Timer timer;
    json section;
    section["level"] = cfg.level;
    json files = json::array();

    const GasketGraph g = build(cfg.level);
    const MetricMatrix rho = resistance_metric(g);
    const MeasureVector mu = measure(g);
    const double m = sg_walk_dimension();

    const DoublingFit dfit = doubling_check(g, rho, mu, 16);
    const double dconst = doubling_constant(rho, mu, 16);

    // Neumann side: on-diagonal decay, conservation, semigroup residual
    const EigenDecomposition neu = sg_spectral_data(g, BoundaryCondition::neumann);
    const double t_hi = cfg.level >= 3 ? std::pow(5.0, -2) : std::pow(5.0, 1 - cfg.level);
    const std::vector<double> ts = log_spaced(std::pow(5.0, -cfg.level), t_hi, 13);
    const double decay = on_diagonal_decay(neu, ts);

    CsvTable series{{"t", "diag_geomean"}, {}};
    std::vector<double> plot_x, plot_y;
    for (double t : ts) {
        const std::vector<double> diag = heat_diagonal(neu, t);
        double mean_log = 0.0;
        for (double p : diag) mean_log += std::log(p);
        const double geo = std::exp(mean_log / static_cast<double>(diag.size()));
        series.add_row({format_g17(t), format_g17(geo)});
        plot_x.push_back(t);
        plot_y.push_back(geo);
    }

    const HeatKernelField cons_field = heat_kernel(neu, 0.05);
    double conservation = 0.0;
    for (std::size_t y = 0; y < neu.size(); ++y) {
        double total = 0.0;
        for (std::size_t x = 0; x < neu.size(); ++x)
            total += cons_field.values(x, y).real() * neu.weight[x];
        conservation = std::max(conservation, std::abs(total - 1.0));
    }

    const HeatKernelField p1 = heat_kernel(neu, 0.1);
    const HeatKernelField p2 = heat_kernel(neu, 0.2);
    double semigroup = 0.0;
    for (std::size_t x = 0; x < neu.size(); ++x)
        for (std::size_t y = 0; y < neu.size(); ++y) {
            std::complex<double> acc = 0.0;
            for (std::size_t z = 0; z < neu.size(); ++z)
                acc += p1.values(x, z) * neu.weight[z] * p1.values(z, y);
            semigroup = std::max(semigroup, std::abs(acc - p2.values(x, y)));
        }

    // Dirichlet side: Gaussian fit and the lemma tables
    const SgOperatorData od = sg_operator(g, BoundaryCondition::dirichlet);
    const double wlo = std::pow(min_positive_distance(od.rho), m) / 5.0;
    const double whi = std::pow(diameter(od.rho), m) * 5.0;
    const double fit_lo = std::max(std::pow(5.0, -cfg.level), wlo * (1.0 + 1e-6));
    const double fit_hi = std::min(std::pow(5.0, -1), whi * (1.0 - 1e-6));
    std::vector<HeatKernelField> fields;
    for (double t : log_spaced(fit_lo, std::max(fit_lo, fit_hi), 9))
        fields.push_back(heat_kernel(od.dec, t));
    const GaussianFit fit = gaussian_fit(fields, od.rho, od.mu(), m);

    const double ltu = ltu_constant(od.dec, od.rho, od.mu(), fit.b, m,
                                    log_spaced(std::pow(5.0, -cfg.level), 0.2, 5));

    CsvTable lemmas{{"lemma", "R", "resolved", "value"}, {}};
    lemmas.add_row({"ltu", "", "", format_g17(ltu)});
    const std::vector<double> taus = {0.0, 1.0, 2.0, 4.0, 8.0};
    const double minpos = min_positive_distance(od.rho);
    for (double R : {2.0, 4.0, 8.0}) {
        const std::string res = 1.0 / R >= minpos ? "1" : "0";
        const std::string rs = format_g17(R);
        const double j0 = jeden_constant(od.dec, od.rho, od.mu(), 0.0, m, {R}, taus);
        const double j2 = jeden_constant(od.dec, od.rho, od.mu(), 2.0, m, {R}, taus);
        lemmas.add_row({"jeden_s0", rs, res, format_g17(j0)});
        lemmas.add_row({"jeden_s2", rs, res, format_g17(j2)});

        const double rm = std::pow(R, m);
        const ProductOperator pop{od.dec, od.dec,
                                  {[rm](double l1, double l2) { return std::exp(-(l1 + l2) / rm); },
                                   std::nullopt, std::nullopt, "band"}};
        const LemmaPReport lp = lemma_p_check(pop, R, m, od.rho, od.rho);
        lemmas.add_row({"kernel_row", rs, res, format_g17(lp.constant)});

        double w2 = 0.0;
        for (std::size_t y = 0; y < od.size(); y += 2) {
            const double tail = weighted_tail_integral(od.rho, od.mu(), y, R, 3.0, 0.0);
            w2 = std::max(w2, tail / ball_mass(od.rho, od.mu(), y, 1.0 / R));
        }
        lemmas.add_row({"tail_ratio", rs, res, format_g17(w2)});
    }

    CsvTable fit_table{{"name", "value"}, {}};
    fit_table.add_row({"decay_exponent", format_g17(decay)});
    fit_table.add_row({"decay_reference", format_g17(std::log(3.0) / std::log(5.0))});
    fit_table.add_row({"conservation_residual", format_g17(conservation)});
    fit_table.add_row({"semigroup_residual", format_g17(semigroup)});
    fit_table.add_row({"gaussian_C", format_g17(fit.C)});
    fit_table.add_row({"gaussian_b", format_g17(fit.b)});
    fit_table.add_row({"walk_m", format_g17(fit.m)});
    fit_table.add_row({"window_lo", format_g17(fit.window_lo)});
    fit_table.add_row({"window_hi", format_g17(fit.window_hi)});
    fit_table.add_row({"d_fit", format_g17(dfit.d_fit)});
    fit_table.add_row({"c_fit", format_g17(dfit.c_fit)});
    fit_table.add_row({"doubling_resolved", dfit.resolved ? "1" : "0"});
    fit_table.add_row({"doubling_constant", format_g17(dconst)});

    section["decay_exponent"] = decay;
    section["decay_reference"] = std::log(3.0) / std::log(5.0);
    section["conservation_residual"] = conservation;
    section["semigroup_residual"] = semigroup;
    section["gaussian_fit"] = {{"C", fit.C},       {"b", fit.b},
                               {"m", fit.m},       {"window_lo", fit.window_lo},
                               {"window_hi", fit.window_hi},
                               {"sample_count", fit.sample_count}};
    section["doubling"] = {{"d_fit", dfit.d_fit},
                           {"c_fit", dfit.c_fit},
                           {"resolved", dfit.resolved},
                           {"constant", dconst}};
    section["ltu"] = ltu;

    write_output(cfg.out, "heat_decay.csv", series.to_string(), files);
    write_output(cfg.out, "heat_fit.csv", fit_table.to_string(), files);
    write_output(cfg.out, "heat_lemmas.csv", lemmas.to_string(), files);
    write_output(cfg.out, "heat_adjacency.csv", adjacency_csv(g), files);
    if (cfg.svg)
        write_output(cfg.out, "heat_decay.svg",
                     svg_line_plot(plot_x, plot_y, {"on-diagonal heat decay", true, true}), files);
    section["files"] = files;
    section["runtime_seconds"] = timer.seconds();
    return section;
}

// ----------------------------------------------------------- hormander ----

json cmd_hormander(const ExperimentConfig& cfg) {
    Timer timer;
    json section;
    section["level"] = cfg.level;
    json files = json::array();

    const double m = sg_walk_dimension();
    const double d_dim = sg_dimension();
    const EtaFunction eta = make_eta(m);
    const std::vector<double> t_grid = dilation_grid(m);
    const auto [f1, f2] = riesz_symbols(cfg.a, cfg.b, cfg.c, cfg.d);
    const CutoffOmega omega = make_cutoff(cfg.gamma, cfg.sigma);
    const MultiplierSymbol cut1 = cutoff_multiply(f1, omega);
    const MultiplierSymbol cut2 = cutoff_multiply(f2, omega);

    CsvTable norms{{"symbol", "s", "status", "value", "coarse", "rel_diff", "band_sup"}, {}};
    const auto norm_row = [&](const MultiplierSymbol& sym, double s) {
        std::string status = "ok";
        BandNormReport rep;
        try {
            rep = hormander_sup(sym, eta, s, t_grid);
        } catch (const singular_symbol_error&) {
            status = "singular";
        } catch (const under_resolved_error&) {
            status = "under_resolved";
        }
        if (status == "ok")
            norms.add_row({sym.name, format_g17(s), status, format_g17(rep.value),
                           format_g17(rep.coarse), format_g17(rep.rel_diff),
                           format_g17(rep.band_sup)});
        else
            norms.add_row({sym.name, format_g17(s), status, "", "", "", ""});
        return std::make_pair(status, rep);
    };

    const auto base1 = norm_row(cut1, 0.0);
    norm_row(cut1, cfg.s);
    norm_row(cut2, 0.0);
    norm_row(cut2, cfg.s);
    const auto raw = norm_row(f1, 0.0); // expected to be refused as singular
    section["raw_symbol_status"] = raw.first;

    // degree-0 dilation invariance of the first cutoff quotient
    if (base1.first == "ok") {
        double worst = 0.0;
        for (double t : {std::pow(2.0, m), std::pow(2.0, -m)}) {
            const MultiplierSymbol scaled = dilate(cut1, t);
            const BandNormReport rep = band_norm(scaled.f, eta, 0.0);
            worst = std::max(worst, std::abs(rep.value - base1.second.value) /
                                        base1.second.value);
        }
        section["t_invariance_rel"] = worst;
    }

    CsvTable derivs{{"symbol", "order1", "order2", "constant"}, {}};
    json deriv_summary = json::array();
    for (const MultiplierSymbol* sym : {&cut1, &cut2}) {
        const DerivativeConditionReport rep = derivative_condition(*sym, d_dim, d_dim);
        for (const DerivativeBound& b : rep.bounds)
            derivs.add_row({sym->name, std::to_string(b.order1), std::to_string(b.order2),
                            format_g17(b.constant)});
        deriv_summary.push_back(
            {{"symbol", sym->name}, {"worst", rep.worst}, {"finite", rep.finite}});
    }
    section["derivative_condition"] = deriv_summary;

    // truncation integrals of the first cutoff quotient, level by level
    CsvTable cz{{"level", "r", "value"}, {}};
    json cz_summary = json::array();
    std::vector<double> plot_x, plot_y;
    for (int lvl = 1; lvl <= cfg.level; ++lvl) {
        const SgOperatorData od = sg_operator(build(lvl), BoundaryCondition::dirichlet);
        const ProductOperator op{od.dec, od.dec, cut1};
        double sup = 0.0, arg = 0.0;
        std::string status = "ok";
        for (int k = -8; k <= 3; ++k) {
            const double r = std::pow(2.0, k);
            std::string row_status;
            const std::string cell = guarded_cell(
                [&] { return cz_truncation_integral(op, r, od.rho, od.rho, od.mu(), od.mu(), m); },
                &row_status);
            cz.add_row({std::to_string(lvl), format_g17(r), cell});
            if (row_status != "ok") {
                status = row_status;
                continue;
            }
            const double v = std::stod(cell);
            if (v > sup) {
                sup = v;
                arg = r;
            }
            if (lvl == cfg.level) {
                plot_x.push_back(r);
                plot_y.push_back(v);
            }
        }
        cz_summary.push_back({{"level", lvl},
                              {"status", status},
                              {"sup", sup},
                              {"argmax_r", arg},
                              {"diameter", diameter(od.rho)}});
    }
    section["cz_truncation"] = cz_summary;

    write_output(cfg.out, "hormander_norms.csv", norms.to_string(), files);
    write_output(cfg.out, "hormander_derivatives.csv", derivs.to_string(), files);
    write_output(cfg.out, "hormander_cz.csv", cz.to_string(), files);
    if (cfg.svg && !plot_x.empty())
        write_output(cfg.out, "hormander_cz.svg",
                     svg_line_plot(plot_x, plot_y, {"truncation integral", true, false}), files);
    section["files"] = files;
    section["runtime_seconds"] = timer.seconds();
    return section;
}

json run_command(const std::string& name, const ExperimentConfig& base) {
    if (name == "gaps") return cmd_gaps(resolve(base, 6));
    if (name == "riesz") return cmd_riesz(resolve(base, 2));
    if (name == "heat") return cmd_heat(resolve(base, 3));
    return cmd_hormander(resolve(base, 2));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sglab: a numerical laboratory for bivariate spectral multipliers on "
                 "Sierpinski gasket approximations"};
    app.set_version_flag("--version", version_string);
    app.fallthrough();
    app.require_subcommand(1);

    std::string config_path;
    ExperimentConfig overrides;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--out", overrides.out, "output directory (default: out)");
    app.add_option("--level", overrides.level, "gasket approximation level")
        ->check(CLI::Range(1, 8));
    app.add_option("--seed", overrides.seed, "seed for sampled norms and starts");
    app.add_flag("--svg", overrides.svg, "emit SVG line plots alongside the CSV tables");

    app.add_subcommand("gaps", "decimation constants, candidate spectrum, ratio gaps");
    app.add_subcommand("riesz", "operator norms of the quasielliptic Riesz quotients");
    app.add_subcommand("heat", "heat kernel decay, Gaussian fit, doubling, lemma tables");
    app.add_subcommand("hormander", "multiplier norms, derivative bounds, truncation integrals");
    app.add_subcommand("all", "run every experiment into one output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    Timer timer;
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) load_config_file(config_path, cfg);
        if (app.count("--out")) cfg.out = overrides.out;
        if (app.count("--level")) cfg.level = overrides.level;
        if (app.count("--seed")) cfg.seed = overrides.seed;
        if (app.count("--svg")) cfg.svg = overrides.svg;

        // validate once up front so a bad config never reaches a solver;
        // each subcommand re-resolves to apply its own level default
        const ExperimentConfig checked = resolve(cfg, 2);
        std::filesystem::create_directories(checked.out);

        json summary;
        summary["schema"] = 1;
        summary["tool"] = version_string;
        summary["command"] = command;
        summary["config"] = config_echo(checked);
        if (cfg.level < 0) summary["config"]["level"] = nullptr; // per-command default applies
        const GapConstants gc = gap_constants(1e-12);
        summary["constants"] = {{"alpha", gc.alpha},
                                {"beta", gc.beta},
                                {"dimension", sg_dimension()},
                                {"walk_dimension", sg_walk_dimension()}};

        if (command == "all") {
            // independent sub-experiments; assembly stays single-threaded
            std::vector<std::pair<std::string, std::future<json>>> runs;
            for (const char* name : {"gaps", "riesz", "heat", "hormander"})
                runs.emplace_back(name, std::async(std::launch::async, run_command,
                                                   std::string(name), cfg));
            json results;
            for (auto& [name, fut] : runs) results[name] = fut.get();
            summary["results"] = std::move(results);
        } else {
            summary["results"] = {{command, run_command(command, cfg)}};
        }

        summary["runtime_seconds"] = timer.seconds();
        write_text_file(checked.out + "/summary.json", summary.dump(2) + "\n");
        std::printf("%s: wrote %s/summary.json (%.2fs)\n", command.c_str(),
                    checked.out.c_str(), timer.seconds());
        return 0;
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const numerical_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::logic_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
