// Report pipelines behind the CLI subcommands.  Each runner consumes parsed
// descriptors, drives the library, and writes deterministic JSON/CSV files:
// same configuration, same build, same bytes (the manifest's wall time is the
// one intentional exception).

#ifndef QACERT_PIPELINES_HPP
#define QACERT_PIPELINES_HPP

#include <qacert/compose.hpp>
#include <qacert/descriptors.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace qacert::pipelines {

using io::json;
using xnum::Precision;
using xnum::ScaledReal;

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open output file: " + path.string());
    out << contents;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    write_file(path, j.dump(2) + "\n");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// seq

struct SeqRun {
    json descriptor;            // M
    std::optional<json> other;  // N for the inclusion indicator
    std::size_t kmax = 512;
    int precision = 256;
};

inline json run_seq(const SeqRun& run, const std::filesystem::path& outdir) {
    Precision p{run.precision};
    auto M = io::parse_sequence(run.descriptor, run.kmax, p);
    if (M.kmax() < run.kmax + 1 && M.extendable()) M = M.extended(run.kmax + 1);
    std::size_t kmax = std::min(run.kmax, M.kmax() - 1);

    auto reg = weights::check_regular(M, kmax);

    json j;
    j["descriptor"] = run.descriptor;
    j["precision"] = run.precision;
    j["kmax"] = kmax;
    json regj;
    regj["log_convex_ok"] = reg.log_convex_ok;
    regj["log_convex_first_violation"] = reg.log_convex_first_violation;
    regj["normalization_ok"] = reg.normalization_ok;
    regj["roots_strictly_increasing"] = reg.roots_strictly_increasing;
    regj["roots_first_violation"] = reg.roots_first_violation;
    regj["roots_exceed"] = io::magnitude(reg.roots_exceed);
    j["regularity"] = regj;

    // The window heuristics need some runway; short tables still get the
    // regularity report.
    std::optional<weights::QaReport> qa;
    if (kmax >= 16) {
        qa = weights::qa_partial_sums(M, kmax);
        auto deriv = weights::derivation_stability_indicator(M, kmax);
        json qaj;
        qaj["partial_sum"] = io::magnitude(qa->partial_sums.back());
        json incr = json::array();
        for (const auto& d : qa->window_increments) incr.push_back(io::magnitude(d));
        qaj["window_increments"] = incr;
        qaj["classification"] = weights::to_string(qa->growth_classification);
        qaj["classification_is_heuristic"] = true;
        j["quasianalyticity"] = qaj;
        json dj;
        dj["classification"] = weights::to_string(deriv.classification);
        dj["sup"] = io::magnitude(deriv.sup);
        j["derivation_stability"] = dj;
    } else {
        j["quasianalyticity"] = {{"classification", "inconclusive"},
                                 {"note", "prefix shorter than the 16 entries the window "
                                          "heuristic needs"}};
    }
    if (run.other) {
        auto N = io::parse_sequence(*run.other, run.kmax, p);
        auto inc = weights::inclusion_indicator(M, N, std::min(kmax, N.kmax()));
        json ij;
        ij["other"] = *run.other;
        ij["classification"] = weights::to_string(inc.classification);
        ij["sup"] = io::magnitude(inc.sup);
        j["inclusion_indicator"] = ij;
    }

    std::filesystem::create_directories(outdir);
    detail::write_json(outdir / "seq_report.json", j);

    std::ostringstream csv;
    csv << "k,M_k_log10,root,partial_sum\n";
    for (std::size_t k = 1; k <= kmax; ++k) {
        csv << k << ',' << io::log10_or_dash(M.value(k)) << ',' << M.root(k).to_decimal(15) << ',';
        if (qa)
            csv << qa->partial_sums[k].to_decimal(15);
        else
            csv << '-';
        csv << '\n';
    }
    detail::write_file(outdir / "seq_table.csv", csv.str());
    return j;
}

// ---------------------------------------------------------------------------
// omega

struct OmegaRun {
    json descriptor;
    int precision = 256;
    std::string T = "1e6";
};

inline json run_omega(const OmegaRun& run, const std::filesystem::path& outdir) {
    Precision p{run.precision};
    auto w = io::parse_omega(run.descriptor, p);
    auto grid = omega::default_omega_grid(p);
    auto rep = omega::check_weight_function(w, grid);
    auto integral = omega::qa_integral_partial(w, ScaledReal::parse(run.T, p));

    json j;
    j["descriptor"] = run.descriptor;
    j["precision"] = run.precision;
    json cj;
    cj["om1_ratio"] = io::magnitude(rep.om1_ratio);
    cj["om2_ratio"] = io::magnitude(rep.om2_ratio);
    cj["om3_gap"] = io::magnitude(rep.om3_gap);
    cj["om3_trend_increasing"] = rep.om3_trend_increasing;
    cj["om4_convexity_defect"] = io::magnitude(rep.om4_convexity_defect);
    cj["concavity_defect"] = io::magnitude(rep.concavity_defect);
    cj["small_o_trend_decreasing"] = rep.small_o_trend_decreasing;
    j["conditions"] = cj;
    json qj;
    qj["T"] = run.T;
    qj["integral"] = io::magnitude(integral.value);
    qj["classification"] = weights::to_string(integral.growth_classification);
    j["qa_integral"] = qj;

    std::filesystem::create_directories(outdir);
    detail::write_json(outdir / "omega_report.json", j);

    std::ostringstream csv;
    csv << "t,conjugate,seminorm_weight_j\n";
    for (int e = -2; e <= 8; ++e) {
        ScaledReal t = pow(ScaledReal::of(10, p), ScaledReal::of(e, p));
        auto c = omega::young_conjugate(w, t);
        csv << t.to_decimal(8) << ',' << c.value.to_decimal(15) << ',' << (c.boundary ? "boundary" : "interior")
            << '\n';
    }
    detail::write_file(outdir / "omega_conjugate.csv", csv.str());
    return j;
}

// ---------------------------------------------------------------------------
// counterexample bundle

struct CounterexampleRun {
    io::CounterexampleDescriptor descriptor;
    bool with_seminorm = true;
};

inline json blowup_json(const counterexample::BlowupCertificate& cert) {
    json rows = json::array();
    for (const auto& r : cert.rows) {
        json row;
        row["k"] = r.k;
        row["l_used"] = r.l_used;
        row["total_modulus"] = io::magnitude(r.total_modulus);
        row["tail"] = io::magnitude(r.tail);
        row["diag_lower"] = io::magnitude(r.diag_lower);
        row["offdiag_sum"] = io::magnitude(r.offdiag_sum);
        row["target"] = io::magnitude(r.target);
        row["ratio"] = io::magnitude(r.ratio);
        row["margin"] = io::magnitude(r.margin);
        row["slack"] = io::magnitude(r.slack);
        row["cancellation_bits"] = r.cancellation_bits;
        row["pass"] = r.pass;
        row["inconclusive"] = r.inconclusive;
        rows.push_back(row);
    }
    json j;
    j["rows"] = rows;
    j["all_pass"] = cert.all_pass;
    j["constants_iterations"] = cert.constants.iterations;
    j["constants_converged"] = cert.constants.converged;
    return j;
}

// Deterministic annulus grid: exact rational directions (3-4-5 triangles),
// centered away from the arc.
inline std::vector<std::vector<ScaledReal>> default_seminorm_grid(std::size_t n, Precision p) {
    std::vector<std::pair<const char*, const char*>> dirs = {
        {"1", "0"},  {"0.6", "0.8"},  {"0", "1"},  {"-0.6", "0.8"},
        {"-1", "0"}, {"-0.6", "-0.8"}, {"0", "-1"}, {"0.6", "-0.8"}};
    std::vector<std::vector<ScaledReal>> grid;
    for (const char* r : {"0.45", "0.7", "0.95"}) {
        for (const auto& [cx, cy] : dirs) {
            std::vector<ScaledReal> x(n, ScaledReal(p));
            x[0] = ScaledReal::parse("-1.2", p) + ScaledReal::parse(r, p) * ScaledReal::parse(cx, p);
            x[1] = ScaledReal::parse(r, p) * ScaledReal::parse(cy, p);
            grid.push_back(std::move(x));
        }
    }
    return grid;
}

inline json run_counterexample(const CounterexampleRun& run,
                               const std::filesystem::path& outdir) {
    auto t_start = std::chrono::steady_clock::now();
    auto cfg = io::parse_counterexample(run.descriptor);
    Precision p = cfg.M.precision();
    auto F = counterexample::CounterexampleFunction::build(cfg);
    auto cert = counterexample::blowup_certificate(F);

    std::filesystem::create_directories(outdir);

    // centers.csv
    {
        std::ostringstream csv;
        csv << "k,t,target,residual_log10";
        for (std::size_t i = 0; i < F.dimension(); ++i) csv << ",x" << (i + 1);
        csv << '\n';
        for (std::size_t k = 1; k <= F.l_limit(); ++k) {
            const auto& c = F.center(k);
            csv << k << ',' << c.t.to_decimal(25) << ',' << c.target.to_decimal(25) << ','
                << io::log10_or_dash(c.residual);
            for (const auto& x : c.coords) csv << ',' << x.to_decimal(25);
            csv << '\n';
        }
        detail::write_file(outdir / "centers.csv", csv.str());
    }
    // constants.csv
    {
        std::ostringstream csv;
        csv << "k,c_k,c_k_log10,S_k_log10\n";
        for (std::size_t k = 1; k <= cfg.k_max; ++k) {
            csv << k << ',' << F.constant(k).to_decimal() << ','
                << io::log10_or_dash(F.constant(k)) << ','
                << io::log10_or_dash(cert.constants.s_values[k - 1]) << '\n';
        }
        detail::write_file(outdir / "constants.csv", csv.str());
    }

    json inputs = io::counterexample_descriptor_json(run.descriptor);

    // blowup.json + blowup.csv
    json bj = blowup_json(cert);
    bj["inputs"] = inputs;
    detail::write_json(outdir / "blowup.json", bj);
    {
        std::ostringstream csv;
        csv << "k,total_log10,tail_log10,diag_lower_log10,offdiag_log10,target_log10,ratio,"
               "margin_log10,cancellation_bits,pass\n";
        for (const auto& r : cert.rows) {
            csv << r.k << ',' << io::log10_or_dash(r.total_modulus) << ','
                << io::log10_or_dash(r.tail) << ',' << io::log10_or_dash(r.diag_lower) << ','
                << io::log10_or_dash(r.offdiag_sum) << ',' << io::log10_or_dash(r.target) << ','
                << r.ratio.to_decimal(12) << ',' << io::log10_or_dash(r.margin) << ','
                << r.cancellation_bits << ',' << (r.pass ? 1 : 0) << '\n';
        }
        detail::write_file(outdir / "blowup.csv", csv.str());
    }

    // nonmembership.json
    {
        std::vector<ScaledReal> Cs = {ScaledReal::of(1, p), ScaledReal::parse("1e3", p),
                                      ScaledReal::parse("1e6", p)};
        std::vector<ScaledReal> rhos = {ScaledReal::of(1, p), ScaledReal::of(4, p),
                                        ScaledReal::of(16, p)};
        auto nm = counterexample::non_membership_witness(F, Cs, rhos);
        json entries = json::array();
        for (const auto& e : nm.entries) {
            json ej;
            ej["C"] = e.C.to_decimal(6);
            ej["rho"] = e.rho.to_decimal(6);
            ej["found"] = e.found;
            ej["k_witness"] = e.k_witness;
            ej["within_prefix"] = e.within_prefix;
            ej["verified"] = e.verified;
            entries.push_back(ej);
        }
        json j;
        j["inputs"] = inputs;
        j["entries"] = entries;
        j["all_found"] = nm.all_found;
        j["centers_accumulate_at_zero"] = nm.centers_accumulate_at_zero;
        j["last_center_coordinate"] = io::magnitude(nm.last_center_coordinate);
        detail::write_json(outdir / "nonmembership.json", j);
    }

    // seminorm.json
    if (run.with_seminorm) {
        auto grid = default_seminorm_grid(F.dimension(), p);
        auto est = counterexample::seminorm_estimate(F, grid, ScaledReal::of(4, p), 10, 48);
        std::vector<ScaledReal> doubled;
        for (std::size_t k = 1; k <= cfg.k_max; ++k) doubled.push_back(F.constant(k).mul_pow2(1));
        auto F2 = F.with_constants(doubled);
        auto est2 = counterexample::seminorm_estimate(F2, grid, ScaledReal::of(4, p), 10, 48,
                                                      false);
        json j;
        j["inputs"] = inputs;
        j["rho"] = "4";
        j["alpha_max"] = 10;
        j["hypothesis_k0"] = est.hypothesis.k0;
        j["hypothesis_violations"] = est.hypothesis.violations;
        j["hypothesis_tail_ok"] = est.hypothesis.tail_ok;
        j["estimate_valid"] = est.estimate_valid;
        j["certified_sup"] = io::magnitude(est.certified_sup);
        j["exact_sup_diagnostic"] = io::magnitude(est.exact_sup);
        j["ceiling_share"] = io::magnitude(est.ceiling_share);
        j["certified_sup_doubled_constants"] = io::magnitude(est2.certified_sup);
        j["doubling_delta"] = io::magnitude(est2.certified_sup - est.certified_sup);
        detail::write_json(outdir / "seminorm.json", j);
    }

    // manifest.json (wall time excluded from determinism comparisons)
    {
        auto t_end = std::chrono::steady_clock::now();
        json j;
        j["inputs"] = inputs;
        j["precision"] = run.descriptor.precision;
        j["library"] = "qacert";
        j["mpfr"] = MPFR_VERSION_STRING;
        j["files"] = json::array({"centers.csv", "constants.csv", "blowup.json", "blowup.csv",
                                  "nonmembership.json", "seminorm.json"});
        j["wall_time_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(t_end - t_start).count();
        detail::write_json(outdir / "manifest.json", j);
    }
    return bj;
}

// ---------------------------------------------------------------------------
// gadget derivative table

struct GadgetRun {
    json descriptor;   // sequence
    std::size_t k_pole = 80;
    unsigned order_max = 40;
    std::vector<std::string> xs = {"0", "0.1", "-0.1", "1", "-1"};
    int precision = 256;
};

inline json run_gadget(const GadgetRun& run, const std::filesystem::path& outdir) {
    Precision p{run.precision};
    auto M = io::parse_sequence(run.descriptor, run.k_pole + 16, p);
    if (M.kmax() < run.k_pole + 1 && M.extendable()) M = M.extended(run.k_pole + 1);
    auto g = gadget::build_gadget(M, run.k_pole);
    std::vector<ScaledReal> xs;
    for (const auto& s : run.xs) xs.push_back(ScaledReal::parse(s, p));
    auto rep = gadget::verify_gadget_bounds(g, run.order_max, xs);

    json j;
    j["descriptor"] = run.descriptor;
    j["k_pole"] = run.k_pole;
    j["precision"] = run.precision;
    j["order_max"] = run.order_max;
    j["poles_strictly_decreasing"] = g.poles_strictly_decreasing();
    j["all_bounds_pass"] = rep.all_pass;
    j["max_relative_tail"] = io::magnitude(rep.max_relative_tail);
    std::filesystem::create_directories(outdir);
    detail::write_json(outdir / "gadget_report.json", j);

    std::ostringstream csv;
    csv << "order,x,re,im,modulus_log10,tail_log10,cancellation_bits\n";
    for (unsigned k = 0; k <= run.order_max; ++k) {
        for (const auto& x : xs) {
            auto dv = gadget::gadget_derivative(g, k, x);
            csv << k << ',' << x.to_decimal(8) << ',' << dv.value.re.to_decimal(20) << ','
                << dv.value.im.to_decimal(20) << ',' << io::log10_or_dash(modulus(dv.value))
                << ',' << io::log10_or_dash(dv.tail_bound) << ','
                << dv.audit.cancellation_loss_bits << '\n';
        }
    }
    detail::write_file(outdir / "gadget_table.csv", csv.str());
    return j;
}

// ---------------------------------------------------------------------------
// arc

struct ArcRun {
    json plot;
    std::size_t n = 2;
    int precision = 256;
    int tmin_exp = 20;  // dyadic grid 2^-3 .. 2^-tmin_exp
    int tmax_exp = 3;
};

inline json run_arc(const ArcRun& run, const std::filesystem::path& outdir) {
    Precision p{run.precision};
    auto plot = io::parse_plot(run.plot, p);
    auto phi = geometry::FlatFunction::canonical(p);
    std::vector<ScaledReal> ts;
    for (int e = run.tmax_exp; e <= run.tmin_exp; ++e) ts.push_back(ScaledReal::pow2(-e, p));
    auto rep = geometry::arc_distance_certificate(plot, phi, run.n, ts);

    json j;
    j["plot"] = run.plot;
    j["n"] = run.n;
    j["precision"] = run.precision;
    j["case"] = geometry::to_string(rep.normal_form.plot_case);
    j["note"] = rep.normal_form.note;
    if (rep.normal_form.plot_case == geometry::PlotCase::ordered_monomial &&
        rep.normal_form.witness.d > 0) {
        json w;
        w["i"] = rep.normal_form.witness.i;
        w["j"] = rep.normal_form.witness.j;
        w["d"] = rep.normal_form.witness.d;
        j["witness"] = w;
        j["sandwich_constant"] = io::magnitude(rep.sandwich_constant);
    }
    j["bound_iterate"] = rep.bound_iterate;
    j["all_pass"] = rep.all_pass;
    detail::write_json((std::filesystem::create_directories(outdir), outdir / "arc_report.json"),
                       j);

    std::ostringstream csv;
    csv << "t,distance_log10,bound_log10,margin_log10,applicable,pass\n";
    for (const auto& row : rep.rows) {
        csv << row.t.to_decimal(8) << ',' << io::log10_or_dash(row.distance) << ','
            << io::log10_or_dash(row.bound) << ',' << io::log10_or_dash(row.margin) << ','
            << (row.applicable ? 1 : 0) << ',' << (row.pass ? 1 : 0) << '\n';
    }
    detail::write_file(outdir / "arc_margins.csv", csv.str());
    return j;
}

// ---------------------------------------------------------------------------
// compose

struct ComposeRun {
    io::CounterexampleDescriptor counterexample;
    json plot;
    unsigned order_max = 40;
};

inline json run_compose(const ComposeRun& run, const std::filesystem::path& outdir) {
    auto cfg = io::parse_counterexample(run.counterexample);
    Precision p = cfg.M.precision();
    auto F = counterexample::CounterexampleFunction::build(cfg);
    counterexample::blowup_certificate(F);

    geometry::ComposeInputs in;
    in.plot = io::parse_plot(run.plot, p);
    in.base.assign(in.plot.m, ScaledReal(p));
    in.dir.assign(in.plot.m, ScaledReal(p));
    in.dir[0] = ScaledReal::of(1, p);
    in.k_max = run.order_max;
    auto rep = geometry::composition_growth_check(F, in);

    json j;
    j["inputs"] = io::counterexample_descriptor_json(run.counterexample);
    j["plot"] = run.plot;
    j["order_max"] = run.order_max;
    j["margin_min"] = io::magnitude(rep.margin_min);
    j["l_used"] = rep.l_used;
    j["rho_stabilized"] = rep.rho_stabilized;
    if (rep.rho_stabilized) j["rho_found"] = rep.rho_found.to_decimal(6);
    detail::write_json((std::filesystem::create_directories(outdir),
                        outdir / "compose_report.json"),
                       j);

    std::ostringstream csv;
    csv << "order,modulus_log10,tail_log10,cancellation_bits\n";
    for (const auto& row : rep.rows)
        csv << row.order << ',' << io::log10_or_dash(row.modulus_value) << ','
            << io::log10_or_dash(row.tail) << ',' << row.cancellation_bits << '\n';
    detail::write_file(outdir / "compose_rows.csv", csv.str());
    return j;
}

}  // namespace qacert::pipelines

#endif  // QACERT_PIPELINES_HPP
