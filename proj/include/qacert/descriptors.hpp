// JSON descriptors for sequences, weight functions, plots and counterexample
// runs, plus the serialization helpers shared by every report writer.  All
// magnitudes are emitted as decimal strings with a (sign, log10) pair so the
// files stay diff-able at 10^800 scales.

#ifndef QACERT_DESCRIPTORS_HPP
#define QACERT_DESCRIPTORS_HPP

#include <qacert/counterexample.hpp>
#include <qacert/geometry.hpp>
#include <qacert/omega.hpp>
#include <qacert/weights.hpp>
#include <qacert/xnum.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace qacert::io {

using json = nlohmann::ordered_json;
using xnum::Precision;
using xnum::ScaledReal;

// ---------------------------------------------------------------------------
// Magnitude serialization

inline json magnitude(const ScaledReal& v) {
    json j;
    j["decimal"] = v.to_decimal();
    j["sign"] = v.sign();
    if (v.is_zero())
        j["log10"] = nullptr;
    else
        j["log10"] = log10(abs(v)).to_decimal(20);
    return j;
}

inline std::string log10_or_dash(const ScaledReal& v) {
    if (v.is_zero()) return "-inf";
    return log10(abs(v)).to_decimal(15);
}

// ---------------------------------------------------------------------------
// Weight-sequence descriptors

inline json sequence_descriptor_json(const weights::SequenceDescriptor& d) {
    json j;
    j["kind"] = d.kind;
    j["name"] = d.name;
    json params = json::object();
    for (const auto& [k, v] : d.params) params[k] = v;
    j["params"] = params;
    if (!d.values.empty()) j["values"] = d.values;
    return j;
}

inline weights::WeightSequence parse_sequence(const json& j, std::size_t kmax, Precision p) {
    if (!j.is_object() || !j.contains("kind"))
        throw DomainError("sequence descriptor: expected an object with a 'kind' field");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "table") {
        std::vector<ScaledReal> vals;
        for (const auto& v : j.at("values"))
            vals.push_back(ScaledReal::parse(v.get<std::string>(), p));
        return weights::from_table(vals, p);
    }
    if (kind != "catalog") throw DomainError("sequence descriptor: unknown kind '" + kind + "'");
    std::string name = j.at("name").get<std::string>();
    std::vector<ScaledReal> params;
    if (j.contains("params")) {
        for (const auto& [key, v] : j.at("params").items()) {
            (void)key;
            params.push_back(ScaledReal::parse(v.get<std::string>(), p));
        }
    }
    return weights::catalog(name, params, kmax, p);
}

// "log_power:1", "gevrey:2", "constant_one", or "table:<path>" handled by the
// caller; this parses the inline catalog shorthand.
inline weights::WeightSequence parse_sequence_shorthand(const std::string& text, std::size_t kmax,
                                                        Precision p) {
    auto colon = text.find(':');
    std::string name = text.substr(0, colon);
    std::vector<ScaledReal> params;
    if (colon != std::string::npos)
        params.push_back(ScaledReal::parse(text.substr(colon + 1), p));
    return weights::catalog(name, params, kmax, p);
}

// ---------------------------------------------------------------------------
// Weight-function descriptors

inline json omega_descriptor_json(const omega::OmegaDescriptor& d) {
    json j;
    j["kind"] = d.kind;
    j["name"] = d.name;
    json params = json::object();
    for (const auto& [k, v] : d.params) params[k] = v;
    j["params"] = params;
    if (!d.samples.empty()) {
        json samples = json::array();
        for (const auto& [t, w] : d.samples) samples.push_back(json::array({t, w}));
        j["samples"] = samples;
    }
    return j;
}

inline omega::WeightFunction parse_omega(const json& j, Precision p) {
    if (!j.is_object() || !j.contains("kind"))
        throw DomainError("weight-function descriptor: expected an object with 'kind'");
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "table") {
        std::vector<ScaledReal> ts, ys;
        for (const auto& s : j.at("samples")) {
            ts.push_back(ScaledReal::parse(s.at(0).get<std::string>(), p));
            ys.push_back(ScaledReal::parse(s.at(1).get<std::string>(), p));
        }
        return omega::WeightFunction::from_samples(ts, ys, p);
    }
    if (kind != "catalog") throw DomainError("weight-function descriptor: unknown kind");
    std::string name = j.at("name").get<std::string>();
    std::vector<ScaledReal> params;
    if (j.contains("params"))
        for (const auto& [key, v] : j.at("params").items()) {
            (void)key;
            params.push_back(ScaledReal::parse(v.get<std::string>(), p));
        }
    return omega::WeightFunction::catalog(name, params, p);
}

// ---------------------------------------------------------------------------
// Plot descriptors

inline json plot_descriptor_json(const geometry::MonomialPlot& plot) {
    json j;
    j["m"] = plot.m;
    j["n"] = plot.components();
    json exps = json::array();
    for (const auto& e : plot.exponents) exps.push_back(e);
    j["exponents"] = exps;
    json units = json::array();
    for (const auto& u : plot.units) units.push_back(u.to_decimal());
    j["units"] = units;
    json box = json::array();
    for (const auto& [lo, hi] : plot.domain_box)
        box.push_back(json::array({lo.to_decimal(), hi.to_decimal()}));
    j["domain_box"] = box;
    return j;
}

inline geometry::MonomialPlot parse_plot(const json& j, Precision p) {
    geometry::MonomialPlot plot;
    if (!j.is_object() || !j.contains("m") || !j.contains("exponents"))
        throw DomainError("plot descriptor: expected an object with 'm' and 'exponents'");
    plot.m = j.at("m").get<std::size_t>();
    for (const auto& e : j.at("exponents")) plot.exponents.push_back(e.get<std::vector<unsigned>>());
    if (j.contains("units"))
        for (const auto& u : j.at("units"))
            plot.units.push_back(ScaledReal::parse(u.get<std::string>(), p));
    else
        plot.units.assign(plot.exponents.size(), ScaledReal::of(1, p));
    if (j.contains("domain_box")) {
        for (const auto& b : j.at("domain_box"))
            plot.domain_box.emplace_back(ScaledReal::parse(b.at(0).get<std::string>(), p),
                                         ScaledReal::parse(b.at(1).get<std::string>(), p));
    } else {
        for (std::size_t i = 0; i < plot.m; ++i)
            plot.domain_box.emplace_back(ScaledReal::parse("-0.5", p),
                                         ScaledReal::parse("0.5", p));
    }
    plot.validate();
    return plot;
}

// ---------------------------------------------------------------------------
// Counterexample run descriptors

struct CounterexampleDescriptor {
    json M;
    json N;
    std::size_t n = 2;
    std::size_t k_max = 12;
    int precision = 256;
    std::size_t prefix_kmax = 512;
    std::size_t series_length = 0;
    bool infinite_series = false;
    std::string flat_rule = "canonical";
    std::string flat_scale = "1";
};

inline json counterexample_descriptor_json(const CounterexampleDescriptor& d) {
    json j;
    j["M"] = d.M;
    j["N"] = d.N;
    j["n"] = d.n;
    j["k_max"] = d.k_max;
    json flat;
    flat["rule"] = d.flat_rule;
    if (d.flat_rule != "canonical") flat["c"] = d.flat_scale;
    j["flat_function"] = flat;
    j["precision"] = d.precision;
    j["prefix_kmax"] = d.prefix_kmax;
    j["series_length"] = d.series_length;
    j["infinite_series"] = d.infinite_series;
    return j;
}

inline counterexample::Config parse_counterexample(const CounterexampleDescriptor& d) {
    Precision p{d.precision};
    if (d.precision != 128 && d.precision != 256 && d.precision != 512 && d.precision != 1024)
        throw DomainError("precision must be one of 128, 256, 512, 1024");
    counterexample::Config cfg;
    cfg.M = parse_sequence(d.M, d.prefix_kmax, p);
    cfg.N = parse_sequence(d.N, std::max<std::size_t>(2 * d.k_max + 2, 16), p);
    cfg.n = d.n;
    cfg.k_max = d.k_max;
    cfg.prefix_kmax = d.prefix_kmax;
    cfg.series_length = d.series_length;
    cfg.infinite_series = d.infinite_series;
    if (d.flat_rule == "canonical")
        cfg.flat = geometry::FlatFunction::canonical(p);
    else if (d.flat_rule == "exponent_scaled")
        cfg.flat = geometry::FlatFunction::exponent_scaled(ScaledReal::parse(d.flat_scale, p), p);
    else
        throw DomainError("unknown flat rule: " + d.flat_rule);
    return cfg;
}

}  // namespace qacert::io

#endif  // QACERT_DESCRIPTORS_HPP
