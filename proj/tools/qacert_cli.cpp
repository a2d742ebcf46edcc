// qacert command-line front end: seq, omega, counterexample, arc, compose.
// Exit codes: 0 analysis completed (verdicts live in the reports),
// 2 input error, 3 pipeline precondition failure, 4 precision exhausted.

#include <qacert/pipelines.hpp>
#include <qacert/qacert.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

namespace {

using qacert::io::json;

int default_precision() {
    if (const char* env = std::getenv("QACERT_PRECISION")) return std::atoi(env);
    return 256;
}

void check_precision(int p) {
    if (p != 128 && p != 256 && p != 512 && p != 1024)
        throw qacert::DomainError("precision must be one of 128, 256, 512, 1024");
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw qacert::DomainError("cannot read file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw qacert::DomainError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

// --catalog name with optional --delta/--s/--a flags, or --table file.
json sequence_descriptor_from_flags(const std::string& catalog, const std::string& table,
                                    const std::string& delta, const std::string& s) {
    if (!table.empty()) {
        json j = load_json(table);
        if (!j.contains("kind")) {
            // allow a bare array of decimal strings
            json wrapped;
            wrapped["kind"] = "table";
            wrapped["values"] = j;
            return wrapped;
        }
        return j;
    }
    if (catalog.empty()) throw qacert::DomainError("need --catalog or --table");
    json j;
    j["kind"] = "catalog";
    j["name"] = catalog;
    json params = json::object();
    if (!delta.empty()) params["delta"] = delta;
    if (!s.empty()) params["s"] = s;
    j["params"] = params;
    return j;
}

// "name:param" shorthand or a JSON file path.
json sequence_descriptor_from_inline(const std::string& text) {
    if (text.find(".json") != std::string::npos) return load_json(text);
    auto colon = text.find(':');
    json j;
    j["kind"] = "catalog";
    j["name"] = text.substr(0, colon);
    json params = json::object();
    if (colon != std::string::npos) {
        std::string name = j["name"].get<std::string>();
        std::string key = name == "gevrey" ? "s" : name == "log_power" ? "delta" : "param";
        params[key] = text.substr(colon + 1);
    }
    j["params"] = params;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qacert: certified numerics for quasianalytic weight-sequence constructions"};
    app.require_subcommand(1);

    std::string outdir = "qacert_out";
    app.add_option("--out", outdir, "output directory");

    // seq ------------------------------------------------------------------
    auto* seq = app.add_subcommand("seq", "weight-sequence diagnostics");
    std::string seq_catalog, seq_table, seq_delta, seq_s, seq_other;
    std::size_t seq_kmax = 512;
    int seq_prec = default_precision();
    seq->add_option("--catalog", seq_catalog, "catalog name (constant_one, log_power, gevrey)");
    seq->add_option("--table", seq_table, "JSON table descriptor or array of decimal strings");
    seq->add_option("--delta", seq_delta, "log_power parameter");
    seq->add_option("--s", seq_s, "gevrey parameter");
    seq->add_option("--N", seq_other, "second sequence (inline shorthand or JSON path)");
    seq->add_option("--kmax", seq_kmax, "prefix length");
    seq->add_option("--precision", seq_prec, "working precision in bits");

    // omega ----------------------------------------------------------------
    auto* om = app.add_subcommand("omega", "weight-function diagnostics");
    std::string om_catalog, om_table, om_a, om_T = "1e6";
    int om_prec = default_precision();
    om->add_option("--catalog", om_catalog, "catalog name (identity, power, sublog)");
    om->add_option("--table", om_table, "JSON sample-table descriptor");
    om->add_option("--a", om_a, "power-weight exponent");
    om->add_option("--T", om_T, "upper limit of the quasianalyticity integral");
    om->add_option("--precision", om_prec, "working precision in bits");

    // counterexample ---------------------------------------------------------
    auto* cx = app.add_subcommand("counterexample", "build the series and emit certificates");
    std::string cx_M = "log_power:1", cx_N = "constant_one";
    std::size_t cx_n = 2, cx_kmax = 12, cx_prefix = 512, cx_series = 0;
    bool cx_infinite = false, cx_no_seminorm = false;
    int cx_prec = default_precision();
    cx->add_option("--M", cx_M, "base sequence (shorthand name:param or JSON path)");
    cx->add_option("--N", cx_N, "target sequence for non-membership");
    cx->add_option("--n", cx_n, "ambient dimension (>= 2)");
    cx->add_option("--kmax", cx_kmax, "certified rows / chosen constants");
    cx->add_option("--prefix", cx_prefix, "sequence prefix length");
    cx->add_option("--series", cx_series, "series length (defaults to kmax)");
    cx->add_flag("--infinite", cx_infinite, "treat the series as infinite (prefix-materialized)");
    cx->add_flag("--no-seminorm", cx_no_seminorm, "skip the seminorm certificate");
    cx->add_option("--precision", cx_prec, "working precision in bits");

    // gadget -----------------------------------------------------------------
    auto* gd = app.add_subcommand("gadget", "derivative table of the pole gadget of a sequence");
    std::string gd_catalog, gd_table, gd_delta, gd_s;
    std::size_t gd_kpole = 80;
    unsigned gd_order = 40;
    int gd_prec = default_precision();
    gd->add_option("--catalog", gd_catalog, "catalog name");
    gd->add_option("--table", gd_table, "JSON table descriptor");
    gd->add_option("--delta", gd_delta, "log_power parameter");
    gd->add_option("--s", gd_s, "gevrey parameter");
    gd->add_option("--kpole", gd_kpole, "number of poles");
    gd->add_option("--order-max", gd_order, "highest derivative order");
    gd->add_option("--precision", gd_prec, "working precision in bits");

    // arc --------------------------------------------------------------------
    auto* arc = app.add_subcommand("arc", "arc-distance certificate for a monomial plot");
    std::string arc_plot;
    std::size_t arc_n = 2;
    int arc_tmin = 20, arc_prec = default_precision();
    std::string arc_tmin_str;
    arc->add_option("--plot", arc_plot, "plot descriptor JSON path")->required();
    arc->add_option("--n", arc_n, "ambient dimension");
    arc->add_option("--tmin-exp", arc_tmin, "smallest dyadic t is 2^-this");
    arc->add_option("--tmin", arc_tmin_str, "smallest dyadic t, written as 2^-N");
    arc->add_option("--precision", arc_prec, "working precision in bits");

    // compose ------------------------------------------------------------------
    auto* cp = app.add_subcommand("compose", "composition growth along a polynomial plot");
    std::string cp_plot, cp_M = "log_power:1", cp_N = "constant_one";
    std::size_t cp_kmax = 6, cp_prefix = 192, cp_series = 0;
    unsigned cp_order = 40;
    int cp_prec = default_precision();
    cp->add_option("--plot", cp_plot, "plot descriptor JSON path")->required();
    cp->add_option("--M", cp_M, "base sequence");
    cp->add_option("--N", cp_N, "target sequence");
    cp->add_option("--kmax", cp_kmax, "certified rows of the underlying series");
    cp->add_option("--series", cp_series, "series length");
    cp->add_option("--prefix", cp_prefix, "sequence prefix length");
    cp->add_option("--order-max", cp_order, "highest composed derivative order");
    cp->add_option("--precision", cp_prec, "working precision in bits");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (seq->parsed()) {
            check_precision(seq_prec);
            qacert::pipelines::SeqRun run;
            run.descriptor = sequence_descriptor_from_flags(seq_catalog, seq_table, seq_delta, seq_s);
            if (!seq_other.empty()) run.other = sequence_descriptor_from_inline(seq_other);
            run.kmax = seq_kmax;
            run.precision = seq_prec;
            auto j = qacert::pipelines::run_seq(run, outdir);
            std::printf("seq: qa=%s report=%s\n",
                        j["quasianalyticity"]["classification"].get<std::string>().c_str(),
                        (outdir + "/seq_report.json").c_str());
        } else if (om->parsed()) {
            check_precision(om_prec);
            qacert::pipelines::OmegaRun run;
            json d;
            if (!om_table.empty()) {
                d = load_json(om_table);
            } else {
                if (om_catalog.empty()) throw qacert::DomainError("need --catalog or --table");
                d["kind"] = "catalog";
                d["name"] = om_catalog;
                json params = json::object();
                if (!om_a.empty()) params["a"] = om_a;
                d["params"] = params;
            }
            run.descriptor = d;
            run.precision = om_prec;
            run.T = om_T;
            auto j = qacert::pipelines::run_omega(run, outdir);
            std::printf("omega: qa_integral=%s report=%s\n",
                        j["qa_integral"]["classification"].get<std::string>().c_str(),
                        (outdir + "/omega_report.json").c_str());
        } else if (cx->parsed()) {
            check_precision(cx_prec);
            if (cx_n < 2) throw qacert::DomainError("dimension n must be at least 2");
            qacert::io::CounterexampleDescriptor d;
            d.M = sequence_descriptor_from_inline(cx_M);
            d.N = sequence_descriptor_from_inline(cx_N);
            d.n = cx_n;
            d.k_max = cx_kmax;
            d.precision = cx_prec;
            d.prefix_kmax = cx_prefix;
            d.series_length = cx_series;
            d.infinite_series = cx_infinite;
            qacert::pipelines::CounterexampleRun run;
            run.descriptor = d;
            run.with_seminorm = !cx_no_seminorm;
            auto j = qacert::pipelines::run_counterexample(run, outdir);
            std::printf("counterexample: blowup all_pass=%s bundle=%s\n",
                        j["all_pass"].get<bool>() ? "true" : "false", outdir.c_str());
        } else if (gd->parsed()) {
            check_precision(gd_prec);
            qacert::pipelines::GadgetRun run;
            run.descriptor = sequence_descriptor_from_flags(gd_catalog, gd_table, gd_delta, gd_s);
            run.k_pole = gd_kpole;
            run.order_max = gd_order;
            run.precision = gd_prec;
            auto j = qacert::pipelines::run_gadget(run, outdir);
            std::printf("gadget: all_bounds_pass=%s report=%s\n",
                        j["all_bounds_pass"].get<bool>() ? "true" : "false",
                        (outdir + "/gadget_report.json").c_str());
        } else if (arc->parsed()) {
            check_precision(arc_prec);
            if (!arc_tmin_str.empty()) {
                if (arc_tmin_str.rfind("2^-", 0) != 0)
                    throw qacert::DomainError("--tmin expects the form 2^-N");
                arc_tmin = std::atoi(arc_tmin_str.c_str() + 3);
            }
            qacert::pipelines::ArcRun run;
            run.plot = load_json(arc_plot);
            run.n = arc_n;
            run.precision = arc_prec;
            run.tmin_exp = arc_tmin;
            auto j = qacert::pipelines::run_arc(run, outdir);
            std::printf("arc: case=%s all_pass=%s report=%s\n",
                        j["case"].get<std::string>().c_str(),
                        j["all_pass"].get<bool>() ? "true" : "false",
                        (outdir + "/arc_report.json").c_str());
        } else if (cp->parsed()) {
            check_precision(cp_prec);
            qacert::io::CounterexampleDescriptor d;
            d.M = sequence_descriptor_from_inline(cp_M);
            d.N = sequence_descriptor_from_inline(cp_N);
            d.k_max = cp_kmax;
            d.precision = cp_prec;
            d.prefix_kmax = cp_prefix;
            d.series_length = cp_series;
            qacert::pipelines::ComposeRun run;
            run.counterexample = d;
            run.plot = load_json(cp_plot);
            run.order_max = cp_order;
            auto j = qacert::pipelines::run_compose(run, outdir);
            std::printf("compose: rho_stabilized=%s report=%s\n",
                        j["rho_stabilized"].get<bool>() ? "true" : "false",
                        (outdir + "/compose_report.json").c_str());
        }
    } catch (const qacert::DomainError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const qacert::PrecisionExhaustedError& e) {
        std::fprintf(stderr, "precision exhausted: %s\n", e.what());
        return 4;
    } catch (const qacert::Error& e) {
        std::fprintf(stderr, "pipeline error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    }
    return 0;
}
