#include "ellipstab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ellipstab/averaging.hpp"
#include "ellipstab/bnf.hpp"
#include "ellipstab/diophantine.hpp"
#include "ellipstab/kernels.hpp"
#include "ellipstab/nekho.hpp"
#include "ellipstab/poly_json.hpp"
#include "ellipstab/steepness.hpp"

namespace ellipstab::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::ios_base::failure("JSON parse error in " + path + ": " + e.what());
    }
    return j;
}

void write_json(const fs::path& path, const json& j) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    out << text;
}

std::vector<double> parse_vector(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t next = csv.find(',', pos);
        if (next == std::string::npos) next = csv.size();
        out.push_back(std::stod(csv.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

std::vector<Rational> parse_rational_vector(const std::string& csv) {
    std::vector<Rational> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t next = csv.find(',', pos);
        if (next == std::string::npos) next = csv.size();
        out.push_back(Rational::parse(csv.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

PolyF as_float_poly(const AnyPoly& any) {
    if (std::holds_alternative<PolyF>(any)) return std::get<PolyF>(any);
    return to_float(std::get<PolyEx>(any));
}

// Drops float round-off dust on the imaginary parts; complains if it is not
// dust (the target really must be a real polynomial).
PolyF real_part(const PolyF& p) {
    double scale = 0.0;
    for (const auto& [m, c] : p.terms()) scale = std::max(scale, std::abs(c));
    PolyF out(p.nvars());
    for (const auto& [m, c] : p.terms()) {
        if (std::abs(c.imag()) > 1e-9 * std::max(scale, 1e-300))
            throw DomainError("expected a real polynomial");
        out.add_term(m, {c.real(), 0.0});
    }
    return out;
}

struct HaltError {
    std::string reason;
    json detail;
};

int finish_halt(const HaltError& h) {
    json out = {{"status", "halt"}, {"reason", h.reason}};
    if (!h.detail.is_null()) out["detail"] = h.detail;
    std::cout << out.dump(2) << "\n";
    return 3;
}

// ---- subcommand payloads -------------------------------------------------

struct CommonOpts {
    std::string out_dir;
    std::uint64_t seed = 0;
    int jobs = 1;
};

int cmd_psi(const std::string& alpha_path, int K, const CommonOpts& common) {
    auto alpha = dio::FrequencyVector::from_json(load_json(alpha_path));
    std::string csv = "K,Psi,KPsi\n";
    json rows = json::array();
    for (int k = 1; k <= K; ++k) {
        dio::PsiResult r = dio::psi(alpha, k);
        csv += std::to_string(k) + "," + std::to_string(r.value) + "," +
               std::to_string(k * r.value) + "\n";
        rows.push_back({{"K", k}, {"Psi", r.value}, {"KPsi", k * r.value}, {"minimizer", r.minimizer}});
    }
    std::cout << csv;
    if (!common.out_dir.empty()) {
        write_text(fs::path(common.out_dir) / "psi.csv", csv);
        write_json(fs::path(common.out_dir) / "psi.json",
                   {{"alpha", alpha.to_json()}, {"rows", rows}});
    }
    return 0;
}

int cmd_delta(const std::string& alpha_path, double x, long long cap, const CommonOpts& common) {
    auto alpha = dio::FrequencyVector::from_json(load_json(alpha_path));
    dio::DeltaResult r = dio::delta(alpha, x, cap);
    json out = {{"x", x},
                {"Delta", r.value},
                {"resonance_truncated", r.resonance_truncated},
                {"cap_truncated", r.cap_truncated}};
    if (r.resonance_truncated) out["resonance_witness"] = r.resonance_witness;
    std::cout << out.dump(2) << "\n";
    if (!common.out_dir.empty()) write_json(fs::path(common.out_dir) / "delta.json", out);
    return 0;
}

int cmd_dirichlet(const std::string& v_csv, const std::string& q_str, bool exact,
                  const CommonOpts& common) {
    dio::PeriodicVector pv;
    if (exact)
        pv = dio::dirichlet_approx(parse_rational_vector(v_csv), Rational::parse(q_str));
    else
        pv = dio::dirichlet_approx(parse_vector(v_csv), std::stod(q_str));
    json out = pv.to_json();
    std::cout << out.dump(2) << "\n";
    if (!common.out_dir.empty()) write_json(fs::path(common.out_dir) / "dirichlet.json", out);
    return 0;
}

int cmd_resonance(const std::string& alpha_path, int K, const CommonOpts& common) {
    auto alpha = dio::FrequencyVector::from_json(load_json(alpha_path));
    auto w = dio::find_resonance(alpha, K);
    json out = {{"K", K}, {"resonant", w.has_value()}};
    if (w) out["witness"] = *w;
    std::cout << out.dump(2) << "\n";
    if (!common.out_dir.empty()) write_json(fs::path(common.out_dir) / "resonance.json", out);
    return 0;
}

template <class C>
json bnf_result_json(const bnf::BNFResult<C>& res, const bnf::DGReport& rep) {
    json gens = json::object();
    for (const auto& [deg, chi] : res.generators) gens[std::to_string(deg)] = to_json(chi);
    json entries = json::array();
    for (const auto& e : rep.entries)
        entries.push_back({{"k", e.k},
                           {"is_remainder", e.is_remainder},
                           {"actual", e.actual},
                           {"bound", e.bound},
                           {"margin", e.margin}});
    return {{"K", res.K},
            {"working_degree", res.working_degree},
            {"hm", to_json(res.hm)},
            {"generators", gens},
            {"defect_norm", res.defect_norm},
            {"remainder_degrees", res.remainder_degrees},
            {"dg_report",
             {{"applicable", rep.applicable}, {"reason", rep.reason}, {"all_ok", rep.all_ok},
              {"entries", entries}}}};
}

int cmd_bnf(const std::string& ham_path, const std::string& alpha_path, int K, int working,
            double R, const std::string& out_file, const CommonOpts& common) {
    if (K < 4) throw DomainError("K must be >= 4");
    auto alpha = dio::FrequencyVector::from_json(load_json(alpha_path));
    AnyPoly any = poly_from_json(load_json(ham_path));
    json out;
    if (std::holds_alternative<PolyEx>(any)) {
        PolyEx H = std::get<PolyEx>(any);
        auto res = bnf::birkhoff_normal_form(H, alpha, K, working);
        double normH = H.sup_norm_bound(R);
        auto consts = bnf::bnf_constants(alpha.n(), R, normH, alpha, K, 2, 0);
        out = bnf_result_json(res, bnf::verify_dg_bounds(res, consts));
    } else {
        PolyF H = std::get<PolyF>(any);
        auto res = bnf::birkhoff_normal_form(H, alpha, K, working);
        double normH = H.sup_norm_bound(R);
        auto consts = bnf::bnf_constants(alpha.n(), R, normH, alpha, K, 2, 0);
        out = bnf_result_json(res, bnf::verify_dg_bounds(res, consts));
    }
    std::cout << "bnf: defect_norm=" << out["defect_norm"].dump()
              << " dg_all_ok=" << out["dg_report"]["all_ok"].dump() << "\n";
    write_json(out_file.empty() ? fs::path(common.out_dir.empty() ? "." : common.out_dir) /
                                      "bnf_result.json"
                                : fs::path(out_file),
               out);
    return 0;
}

int cmd_steep(const std::string& poly_path, const std::string& mode, int samples, double radius,
              int perturbations, double xi_min, double xi_max, int ppd,
              const std::string& out_file, const CommonOpts& common) {
    PolyF P = as_float_poly(poly_from_json(load_json(poly_path)));
    steep::GridSpec grid{xi_min, xi_max, ppd};
    steep::SteepnessCertificate cert;
    if (mode == "steep")
        cert = steep::certify_steep(P, grid, samples, common.seed, common.jobs);
    else if (mode == "stably-steep")
        cert = steep::certify_stably_steep(P, radius, perturbations, grid, samples, common.seed,
                                           common.jobs);
    else if (mode == "expanding")
        cert = steep::certify_stably_expanding(P, radius, perturbations, grid, common.seed,
                                               common.jobs);
    else
        throw DomainError("steep: mode must be steep|stably-steep|expanding");

    json out = cert.to_json();
    std::cout << "steep: verdict=" << steep::verdict_name(cert.verdict) << " C=" << cert.C << "\n";
    fs::path target = out_file.empty()
                          ? fs::path(common.out_dir.empty() ? "." : common.out_dir) / "cert.json"
                          : fs::path(out_file);
    write_json(target, out);
    // CSV sidecar with the margin curves for plotting.
    std::string csv = "sample,l,xi,margin\n";
    for (std::size_t s = 0; s < cert.evidence.size(); ++s) {
        const auto& ev = cert.evidence[s];
        for (std::size_t i = 0; i < ev.curve.xi.size(); ++i)
            csv += std::to_string(s) + "," + std::to_string(ev.sample.l) + "," +
                   std::to_string(ev.curve.xi[i]) + "," + std::to_string(ev.curve.margin[i]) + "\n";
    }
    write_text(target.parent_path() / (target.stem().string() + "_margins.csv"), csv);
    if (cert.verdict == steep::Verdict::refuted)
        return finish_halt({"steepness refuted", cert.witness ? cert.witness->to_json() : json()});
    return 0;
}

avg::NormalFormDatum<std::complex<double>> datum_from_json(const json& j) {
    avg::NormalFormDatum<std::complex<double>> d;
    d.n = j.at("n").get<int>();
    d.stage = j.value("stage", 0);
    d.h = as_float_poly(poly_from_json(j.at("h")));
    d.g = as_float_poly(poly_from_json(j.at("g")));
    d.f = j.contains("f") ? as_float_poly(poly_from_json(j["f"])) : PolyF(2 * d.n);
    d.eps = j.value("eps", 0.0);
    d.m = j.value("m", 1);
    if (j.contains("omegas"))
        for (const auto& w : j["omegas"]) d.omegas.push_back(dio::PeriodicVector::from_json(w));
    if (j.contains("domain")) {
        d.domain.z_anchor = j["domain"].value("z", std::vector<double>{});
        d.domain.s = j["domain"].value("s", 0.0);
        d.domain.r = j["domain"].value("r", 0.0);
        d.domain.xi = j["domain"].value("xi", 0.0);
    }
    double rho = d.domain.r + 3 * d.domain.xi;
    d.F = j.value("F", avg::hessian_surrogate(d.h, rho * rho / 2));
    if (d.eps == 0.0) d.eps = avg::xfield_surrogate(d.g, rho);
    return d;
}

int cmd_average(const std::string& datum_path, const std::string& omega_path, int iters,
                int degree, const std::string& out_file, const CommonOpts& common) {
    auto datum = datum_from_json(load_json(datum_path));
    auto omega = dio::PeriodicVector::from_json(load_json(omega_path));
    auto res = avg::normalize(datum, omega, iters, degree, 0.0, true);
    json out = {{"stage", res.datum.stage},
                {"g", to_json(res.datum.g)},
                {"f", to_json(res.datum.f)},
                {"phi_distance_bound", res.phi_distance_bound},
                {"zj_ok", res.zj_ok},
                {"final_bound_ok", res.final_bound_ok},
                {"generators", [&] {
                     json g = json::array();
                     for (const auto& chi : res.generators) g.push_back(to_json(chi));
                     return g;
                 }()}};
    fs::path target = out_file.empty()
                          ? fs::path(common.out_dir.empty() ? "." : common.out_dir) / "average.json"
                          : fs::path(out_file);
    write_json(target, out);
    // JSON-lines iteration log.
    std::string lines;
    for (const auto& log : res.logs) lines += log.to_json().dump() + "\n";
    write_text(target.parent_path() / (target.stem().string() + "_log.jsonl"), lines);
    std::cout << "average: iterations=" << res.logs.size()
              << " final_bound_ok=" << (res.final_bound_ok ? "true" : "false") << "\n";
    return 0;
}

int cmd_constants(const std::string& steep_path, int n, const CommonOpts& common) {
    json j = load_json(steep_path);
    nekho::SteepParams sp;
    if (j.contains("kappa") && j.contains("E")) {
        sp = nekho::SteepParams::from_json(j);
    } else {
        // A steepness certificate: C, delta, p live there; kappa/E/F must be
        // provided alongside.
        auto cert = steep::SteepnessCertificate::from_json(j);
        if (cert.verdict != steep::Verdict::certified)
            return finish_halt({"constants need a certified steepness input", j});
        sp.C = cert.C;
        sp.delta = cert.delta;
        sp.p = cert.p;
        sp.kappa = j.value("kappa", 1.0);
        sp.E = j.value("E", 1.0);
        sp.F = j.value("F", 1.0);
    }
    auto consts = nekho::compute_constants(n, sp);
    json out = consts.to_json();
    std::cout << "constants: a=" << consts.a << " a'=" << consts.a_prime << "\n";
    if (!common.out_dir.empty()) write_json(fs::path(common.out_dir) / "constants.json", out);
    else std::cout << out.dump(2) << "\n";
    return 0;
}

std::string trajectory_csv(const nekho::Trajectory& traj) {
    std::string csv = "t";
    for (int j = 0; j < traj.n; ++j) csv += ",I" + std::to_string(j + 1);
    csv += ",energy\n";
    char buf[64];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", traj.times[i]);
        csv += buf;
        for (int j = 0; j < traj.n; ++j) {
            std::snprintf(buf, sizeof buf, ",%.12g", traj.actions[i][j]);
            csv += buf;
        }
        std::snprintf(buf, sizeof buf, ",%.15g\n", traj.energies[i]);
        csv += buf;
    }
    return csv;
}

int cmd_simulate(const std::string& ham_path, const std::string& z0_csv, double dt,
                 long long steps, double escape, const CommonOpts& common) {
    PolyF H = as_float_poly(poly_from_json(load_json(ham_path)));
    std::vector<double> z0 = parse_vector(z0_csv);
    nekho::IntegrateOptions opts;
    opts.dt = dt;
    opts.steps = steps;
    opts.escape_radius = escape;
    nekho::Trajectory traj = nekho::integrate(H, z0, opts);
    nekho::DriftReport drift = nekho::measure_drift(traj);
    json out = {{"dt", dt},
                {"steps", steps},
                {"samples", traj.times.size()},
                {"integrator", traj.integrator},
                {"max_action_drift", drift.max_drift},
                {"energy_first", traj.energies.front()},
                {"energy_last", traj.energies.back()}};
    if (traj.escape_time)
        out["escape_time"] = *traj.escape_time;
    else if (escape > 0)
        out["escape_time_lower_bound"] = traj.times.back();  // horizon only
    std::cout << out.dump(2) << "\n";
    if (!common.out_dir.empty()) {
        write_json(fs::path(common.out_dir) / "simulate.json", out);
        write_text(fs::path(common.out_dir) / "trajectory.csv", trajectory_csv(traj));
    }
    return 0;
}

int cmd_confine(const std::string& ham_path, const std::string& h_path, const std::string& z0_csv,
                double Q, int m, double r, int degree, const std::string& cert_path,
                const CommonOpts& common) {
    PolyF H = as_float_poly(poly_from_json(load_json(ham_path)));
    PolyF h = as_float_poly(poly_from_json(load_json(h_path)));
    std::vector<double> z0 = parse_vector(z0_csv);
    nekho::ConfineOptions opts;
    opts.Q = Q;
    opts.m = m;
    opts.r = r;
    opts.working_degree = degree;
    opts.seed = common.seed;
    steep::SteepnessCertificate cert;
    bool have_cert = false;
    if (!cert_path.empty()) {
        cert = steep::SteepnessCertificate::from_json(load_json(cert_path));
        have_cert = true;
    }
    nekho::ConfinementLog log =
        nekho::run_confinement_algorithm(H, h, z0, opts, have_cert ? &cert : nullptr);
    json out = log.to_json();
    std::cout << out.dump(2) << "\n";
    if (!common.out_dir.empty()) {
        write_json(fs::path(common.out_dir) / "confine.json", out);
        std::string lines;
        for (const auto& st : log.stages) lines += st.to_json().dump() + "\n";
        write_text(fs::path(common.out_dir) / "confine_stages.jsonl", lines);
    }
    if (!log.applicable) return finish_halt({log.stop_reason, out});
    return 0;
}

int cmd_pipeline(const std::string& ham_path, const std::string& alpha_path, int order,
                 double R, const std::string& z0_csv, double dt, long long steps,
                 const CommonOpts& common) {
    fs::path dir(common.out_dir.empty() ? "pipeline_out" : common.out_dir);
    auto alpha = dio::FrequencyVector::from_json(load_json(alpha_path));
    const int n = alpha.n();
    int K = order > 0 ? order : n * n + 4;
    if (K % 2) ++K;

    AnyPoly any = poly_from_json(load_json(ham_path));
    PolyF Hf = as_float_poly(any);

    // 1. Normal form of the jet.
    auto res = bnf::birkhoff_normal_form(Hf, alpha, K);
    double normH = Hf.sup_norm_bound(R);
    auto bconsts = bnf::bnf_constants(n, R, normH, alpha, K, 2, 0);
    auto rep = bnf::verify_dg_bounds(res, bconsts);
    write_json(dir / "bnf_result.json", bnf_result_json(res, rep));

    // 2. Steepness of hm (drop the linear alpha part; certify P_2(n, m0)).
    PolyF hm_tail = real_part(res.hm.degree_range(2, res.hm.max_degree()));
    if (hm_tail.is_zero())
        return finish_halt({"pipeline: normal form has no nonlinear action part", json()});
    steep::GridSpec grid{1e-3, 0.5, 128};
    auto cert = steep::certify_steep(hm_tail, grid, 8, common.seed, common.jobs);
    write_json(dir / "cert.json", cert.to_json());
    if (cert.verdict != steep::Verdict::certified)
        return finish_halt({"pipeline: steepness " + steep::verdict_name(cert.verdict),
                            cert.to_json()});

    // 3. Constants ledger.
    nekho::SteepParams sp;
    sp.C = cert.C;
    sp.delta = cert.delta;
    sp.p = cert.p;
    sp.kappa = 0.5 * alpha.norm();
    double rhoI = R * R / 2;
    sp.E = avg::gradient_surrogate(res.hm, rhoI) + alpha.norm();
    sp.F = avg::hessian_surrogate(res.hm, rhoI);
    auto consts = nekho::compute_constants(n, sp);
    write_json(dir / "constants.json", consts.to_json());

    // 4. Simulation probe, back in real coordinates.
    PolyF H_real = real_part(complexify_inverse(Hf));
    std::vector<double> z0 =
        z0_csv.empty() ? std::vector<double>(2 * n, 0.02) : parse_vector(z0_csv);
    nekho::IntegrateOptions iopts;
    iopts.dt = dt;
    iopts.steps = steps;
    nekho::Trajectory traj = nekho::integrate(H_real, z0, iopts);
    nekho::DriftReport drift = nekho::measure_drift(traj);
    write_text(dir / "trajectory.csv", trajectory_csv(traj));

    json bundle = {{"K", K},
                   {"defect_norm", res.defect_norm},
                   {"dg_all_ok", rep.all_ok},
                   {"steep_verdict", steep::verdict_name(cert.verdict)},
                   {"steep_C", cert.C},
                   {"a", consts.a},
                   {"a_prime", consts.a_prime},
                   {"max_action_drift", drift.max_drift}};
    write_json(dir / "pipeline.json", bundle);
    std::cout << bundle.dump(2) << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"ellipstab: constructive stability analysis near elliptic equilibria"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--out", common.out_dir, "output directory");
    app.add_option("--seed", common.seed, "RNG seed for all sampling");
    app.add_option("--jobs", common.jobs, "parallel worker cap");

    // psi
    std::string alpha_path;
    int K = 10;
    auto* psi_cmd = app.add_subcommand("psi", "table of K, Psi, K*Psi");
    psi_cmd->add_option("--alpha", alpha_path)->required();
    psi_cmd->add_option("--K", K);

    // delta
    double delta_x = 1.0;
    long long delta_cap = 2000000000LL;
    auto* delta_cmd = app.add_subcommand("delta", "Delta_alpha(x)");
    delta_cmd->add_option("--alpha", alpha_path)->required();
    delta_cmd->add_option("--x", delta_x)->required();
    delta_cmd->add_option("--cap", delta_cap);

    // dirichlet
    std::string v_csv, q_str = "2";
    bool exact_mode = false;
    auto* dir_cmd = app.add_subcommand("dirichlet", "periodic approximation of a vector");
    dir_cmd->add_option("--v", v_csv, "comma-separated components")->required();
    dir_cmd->add_option("--Q", q_str)->required();
    dir_cmd->add_flag("--exact", exact_mode, "treat components as exact rationals");

    // resonance
    auto* res_cmd = app.add_subcommand("resonance", "smallest resonance witness");
    res_cmd->add_option("--alpha", alpha_path)->required();
    res_cmd->add_option("--K", K);

    // bnf
    std::string ham_path, out_file;
    int order = 4, working = -1;
    double R = 0.5;
    auto* bnf_cmd = app.add_subcommand("bnf", "Birkhoff normal form with estimates");
    bnf_cmd->add_option("--input", ham_path)->required();
    bnf_cmd->add_option("--alpha", alpha_path)->required();
    bnf_cmd->add_option("--order", order)->required();
    bnf_cmd->add_option("--working", working);
    bnf_cmd->add_option("--R", R);
    bnf_cmd->add_option("--out-file", out_file);

    // steep
    std::string poly_path, steep_mode = "steep";
    int samples = 8, perturbations = 4, ppd = 256;
    double radius = 1e-3, xi_min = 1e-3, xi_max = 0.5;
    auto* steep_cmd = app.add_subcommand("steep", "steepness certification");
    steep_cmd->add_option("--poly", poly_path)->required();
    steep_cmd->add_option("--mode", steep_mode)
        ->check(CLI::IsMember({"steep", "stably-steep", "expanding"}));
    steep_cmd->add_option("--samples", samples);
    steep_cmd->add_option("--radius", radius);
    steep_cmd->add_option("--perturbations", perturbations);
    steep_cmd->add_option("--xi-min", xi_min);
    steep_cmd->add_option("--xi-max", xi_max);
    steep_cmd->add_option("--ppd", ppd);
    steep_cmd->add_option("--out-file", out_file);

    // average
    std::string datum_path, omega_path;
    int iters = 1, degree = 8;
    auto* avg_cmd = app.add_subcommand("average", "resonant averaging stage");
    avg_cmd->add_option("--datum", datum_path)->required();
    avg_cmd->add_option("--omega", omega_path)->required();
    avg_cmd->add_option("--iters", iters);
    avg_cmd->add_option("--degree", degree);
    avg_cmd->add_option("--out-file", out_file);

    // constants
    std::string steep_path;
    int nn = 2;
    auto* const_cmd = app.add_subcommand("constants", "the stability-constant ledger");
    const_cmd->add_option("--steep", steep_path)->required();
    const_cmd->add_option("--n", nn);

    // simulate
    std::string z0_csv;
    double dt = 1e-3, escape = 0.0;
    long long steps = 100000;
    auto* sim_cmd = app.add_subcommand("simulate", "implicit-midpoint trajectory");
    sim_cmd->add_option("--ham", ham_path)->required();
    sim_cmd->add_option("--z0", z0_csv)->required();
    sim_cmd->add_option("--dt", dt);
    sim_cmd->add_option("--steps", steps);
    sim_cmd->add_option("--escape", escape);

    // confine
    std::string h_path, cert_path;
    double Q = 100.0, conf_r = 0.1;
    int conf_m = 2;
    auto* conf_cmd = app.add_subcommand("confine", "step-logged confinement algorithm");
    conf_cmd->add_option("--ham", ham_path)->required();
    conf_cmd->add_option("--actions", h_path)->required();
    conf_cmd->add_option("--z0", z0_csv)->required();
    conf_cmd->add_option("--Q", Q);
    conf_cmd->add_option("--m", conf_m);
    conf_cmd->add_option("--r", conf_r);
    conf_cmd->add_option("--degree", degree);
    conf_cmd->add_option("--cert", cert_path);

    // pipeline
    auto* pipe_cmd = app.add_subcommand("pipeline", "bnf -> steep -> constants -> simulate");
    pipe_cmd->add_option("--ham", ham_path)->required();
    pipe_cmd->add_option("--alpha", alpha_path)->required();
    pipe_cmd->add_option("--order", order);
    pipe_cmd->add_option("--R", R);
    pipe_cmd->add_option("--z0", z0_csv);
    pipe_cmd->add_option("--dt", dt);
    pipe_cmd->add_option("--steps", steps);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "argument error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (psi_cmd->parsed()) return cmd_psi(alpha_path, K, common);
        if (delta_cmd->parsed()) return cmd_delta(alpha_path, delta_x, delta_cap, common);
        if (dir_cmd->parsed()) return cmd_dirichlet(v_csv, q_str, exact_mode, common);
        if (res_cmd->parsed()) return cmd_resonance(alpha_path, K, common);
        if (bnf_cmd->parsed())
            return cmd_bnf(ham_path, alpha_path, order, working, R, out_file, common);
        if (steep_cmd->parsed())
            return cmd_steep(poly_path, steep_mode, samples, radius, perturbations, xi_min, xi_max,
                             ppd, out_file, common);
        if (avg_cmd->parsed())
            return cmd_average(datum_path, omega_path, iters, degree, out_file, common);
        if (const_cmd->parsed()) return cmd_constants(steep_path, nn, common);
        if (sim_cmd->parsed()) return cmd_simulate(ham_path, z0_csv, dt, steps, escape, common);
        if (conf_cmd->parsed())
            return cmd_confine(ham_path, h_path, z0_csv, Q, conf_m, conf_r, degree, cert_path,
                               common);
        if (pipe_cmd->parsed())
            return cmd_pipeline(ham_path, alpha_path, order, R, z0_csv, dt, steps, common);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const ResonanceError& e) {
        json out = {{"status", "halt"}, {"reason", e.what()}, {"witness", e.witness}};
        std::cout << out.dump(2) << "\n";
        return 3;
    } catch (const ThresholdError& e) {
        json out = {{"status", "halt"}, {"reason", e.what()}, {"inequality", e.inequality}};
        std::cout << out.dump(2) << "\n";
        return 3;
    } catch (const PeriodError& e) {
        json out = {{"status", "halt"}, {"reason", e.what()}};
        std::cout << out.dump(2) << "\n";
        return 3;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "dimension error: " << e.what() << "\n";
        return 2;
    } catch (const NormalizationError& e) {
        std::cerr << "normalization error: " << e.what() << "\n";
        return 2;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ellipstab::cli
