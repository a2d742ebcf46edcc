// Weight-sequence calculus: catalog sequences, regularity and
// quasianalyticity diagnostics, inclusion indicators, derived sequences,
// the associated function phi(t) = sup_k t^{k+1}/M_k, the log-convex
// minorant, and the diagonal sequence of a one-parameter family.
//
// A WeightSequence is an immutable prefix M_0..M_Kmax of a positive
// sequence, optionally backed by a closed-form generator that lets the
// prefix be extended.  Everything that can live in log space does.

#ifndef QACERT_WEIGHTS_HPP
#define QACERT_WEIGHTS_HPP

#include <qacert/xnum.hpp>

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qacert::weights {

using xnum::Precision;
using xnum::ScaledReal;

enum class GrowthClass { diverging, plateauing, inconclusive };
enum class RatioClass { bounded, to_zero, unbounded, inconclusive };

inline const char* to_string(GrowthClass g) {
    switch (g) {
        case GrowthClass::diverging: return "diverging";
        case GrowthClass::plateauing: return "plateauing";
        default: return "inconclusive";
    }
}
inline const char* to_string(RatioClass r) {
    switch (r) {
        case RatioClass::bounded: return "bounded";
        case RatioClass::to_zero: return "to_zero";
        case RatioClass::unbounded: return "unbounded";
        default: return "inconclusive";
    }
}

struct SequenceDescriptor {
    std::string kind;  // "catalog" | "table" | "derived"
    std::string name;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::string> values;  // table entries, decimal strings
};

namespace detail {

struct Gen {
    enum class Kind { constant_one, log_power, gevrey, sqrt_of, shift_of, padded };
    Kind kind;
    ScaledReal param;  // delta, s, or ln(c) for padded
    std::size_t index = 0;
    std::shared_ptr<const Gen> base;

    ScaledReal log_value(std::size_t k, Precision p) const {
        switch (kind) {
            case Kind::constant_one:
                return ScaledReal(p);
            case Kind::log_power: {
                if (k == 0) return ScaledReal(p);
                ScaledReal e = exp(ScaledReal::of(1, p));
                ScaledReal inner = ln(ScaledReal::of_ui(static_cast<unsigned long>(k), p) + e);
                return param * ScaledReal::of_ui(static_cast<unsigned long>(k), p) * ln(inner);
            }
            case Kind::gevrey:
                return (param - ScaledReal::of(1, p)) *
                       xnum::factorial_log(static_cast<unsigned long>(k), p);
            case Kind::sqrt_of:
                return base->log_value(k, p).mul_pow2(-1);
            case Kind::shift_of:
                return base->log_value(k + index, p);
            case Kind::padded: {
                if (k < index) return ScaledReal(p);
                long shift = 2 * static_cast<long>(k) - 2 * static_cast<long>(index) + 1;
                return ScaledReal::of(shift, p) * param + base->log_value(k, p);
            }
        }
        throw Error("unreachable generator kind");
    }
};

struct SeqData {
    Precision prec;
    std::vector<ScaledReal> log_values;  // ln M_k, k = 0..kmax
    std::vector<ScaledReal> values;      // M_k
    std::vector<ScaledReal> quotients;   // m_k = M_{k+1}/M_k, k = 0..kmax-1
    std::shared_ptr<const Gen> gen;      // null for plain tables
    SequenceDescriptor descriptor;
};

inline void fill_values(SeqData& d) {
    d.values.clear();
    d.values.reserve(d.log_values.size());
    for (const ScaledReal& lv : d.log_values) d.values.push_back(exp(lv));
    d.quotients.clear();
    if (d.log_values.size() > 1) {
        d.quotients.reserve(d.log_values.size() - 1);
        for (std::size_t k = 0; k + 1 < d.log_values.size(); ++k)
            d.quotients.push_back(exp(d.log_values[k + 1] - d.log_values[k]));
    }
}

}  // namespace detail

class WeightSequence {
  public:
    WeightSequence() = default;

    std::size_t kmax() const { return data_->log_values.size() - 1; }
    Precision precision() const { return data_->prec; }
    const ScaledReal& value(std::size_t k) const { return data_->values.at(k); }
    const ScaledReal& log_value(std::size_t k) const { return data_->log_values.at(k); }
    const ScaledReal& quotient(std::size_t k) const { return data_->quotients.at(k); }
    bool extendable() const { return data_->gen != nullptr; }
    const SequenceDescriptor& descriptor() const { return data_->descriptor; }

    // ln M_k through the generator, valid beyond the stored prefix.
    ScaledReal log_value_any(std::size_t k) const {
        if (k <= kmax()) return data_->log_values[k];
        if (!extendable())
            throw InsufficientPrefixError("sequence has no generator; prefix ends at k=" +
                                          std::to_string(kmax()));
        return data_->gen->log_value(k, data_->prec);
    }

    std::shared_ptr<const detail::Gen> generator() const { return data_->gen; }

    WeightSequence extended(std::size_t new_kmax) const {
        if (new_kmax <= kmax()) return *this;
        if (!extendable())
            throw InsufficientPrefixError("cannot extend a table-backed sequence");
        auto d = std::make_shared<detail::SeqData>();
        d->prec = data_->prec;
        d->gen = data_->gen;
        d->descriptor = data_->descriptor;
        d->log_values = data_->log_values;
        for (std::size_t k = kmax() + 1; k <= new_kmax; ++k)
            d->log_values.push_back(data_->gen->log_value(k, d->prec));
        detail::fill_values(*d);
        return WeightSequence(std::move(d));
    }

    // Root M_k^{1/k}; defined for k >= 1.
    ScaledReal root(std::size_t k) const {
        if (k == 0) throw DomainError("root index must be >= 1");
        return exp(log_value(k) / ScaledReal::of_ui(static_cast<unsigned long>(k), precision()));
    }

    static WeightSequence from_parts(std::shared_ptr<const detail::SeqData> d) {
        return WeightSequence(std::move(d));
    }

  private:
    explicit WeightSequence(std::shared_ptr<const detail::SeqData> d) : data_(std::move(d)) {}

    std::shared_ptr<const detail::SeqData> data_;
};

namespace detail {

inline WeightSequence build_from_gen(std::shared_ptr<const Gen> gen, std::size_t kmax,
                                     Precision prec, SequenceDescriptor desc) {
    auto d = std::make_shared<SeqData>();
    d->prec = prec;
    d->gen = gen;
    d->descriptor = std::move(desc);
    d->log_values.reserve(kmax + 1);
    for (std::size_t k = 0; k <= kmax; ++k) d->log_values.push_back(gen->log_value(k, prec));
    fill_values(*d);
    return WeightSequence::from_parts(std::move(d));
}

}  // namespace detail

inline WeightSequence catalog_constant_one(std::size_t kmax, Precision p = Precision::dflt()) {
    auto g = std::make_shared<detail::Gen>();
    g->kind = detail::Gen::Kind::constant_one;
    g->param = ScaledReal(p);
    return detail::build_from_gen(g, kmax, p, {"catalog", "constant_one", {}, {}});
}

// M_k = (log(k+e))^{delta k}; quasianalytic for 0 < delta <= 1.
inline WeightSequence catalog_log_power(const ScaledReal& delta, std::size_t kmax,
                                        Precision p = Precision::dflt()) {
    if (delta.sign() <= 0) throw DomainError("log_power: delta must be positive");
    auto g = std::make_shared<detail::Gen>();
    g->kind = detail::Gen::Kind::log_power;
    g->param = delta.rounded_to(p);
    return detail::build_from_gen(g, kmax, p,
                                  {"catalog", "log_power", {{"delta", delta.to_decimal()}}, {}});
}

// M_k = (k!)^{s-1}; s = 1 gives the constant sequence.
inline WeightSequence catalog_gevrey(const ScaledReal& s, std::size_t kmax,
                                     Precision p = Precision::dflt()) {
    if (s.sign() <= 0) throw DomainError("gevrey: s must be positive");
    auto g = std::make_shared<detail::Gen>();
    g->kind = detail::Gen::Kind::gevrey;
    g->param = s.rounded_to(p);
    return detail::build_from_gen(g, kmax, p, {"catalog", "gevrey", {{"s", s.to_decimal()}}, {}});
}

inline WeightSequence from_table(const std::vector<ScaledReal>& vals,
                                 Precision p = Precision::dflt()) {
    if (vals.empty()) throw DomainError("table: needs at least one value");
    auto d = std::make_shared<detail::SeqData>();
    d->prec = p;
    d->descriptor.kind = "table";
    d->descriptor.name = "table";
    for (const ScaledReal& v : vals) {
        if (v.sign() <= 0) throw DomainError("table: all values must be strictly positive");
        d->log_values.push_back(ln(v.rounded_to(p)));
        d->descriptor.values.push_back(v.to_decimal());
    }
    detail::fill_values(*d);
    return WeightSequence::from_parts(std::move(d));
}

inline WeightSequence catalog(const std::string& name, const std::vector<ScaledReal>& params,
                              std::size_t kmax, Precision p = Precision::dflt()) {
    if (name == "constant_one") return catalog_constant_one(kmax, p);
    if (name == "log_power") {
        if (params.size() != 1) throw DomainError("log_power takes one parameter (delta)");
        return catalog_log_power(params[0], kmax, p);
    }
    if (name == "gevrey") {
        if (params.size() != 1) throw DomainError("gevrey takes one parameter (s)");
        return catalog_gevrey(params[0], kmax, p);
    }
    throw DomainError("unknown catalog sequence: " + name);
}

// ---------------------------------------------------------------------------
// Regularity

struct RegularityReport {
    bool log_convex_ok = false;
    std::ptrdiff_t log_convex_first_violation = -1;
    bool normalization_ok = false;
    std::vector<ScaledReal> roots;  // M_k^{1/k}, k = 1..kmax
    bool roots_strictly_increasing = false;
    std::ptrdiff_t roots_first_violation = -1;
    ScaledReal roots_exceed;  // largest root attained on the prefix

    bool regular() const { return log_convex_ok && normalization_ok; }
};

inline RegularityReport check_regular(const WeightSequence& M, std::size_t kmax) {
    if (kmax > M.kmax()) throw PreconditionError("check_regular: Kmax exceeds stored prefix");
    Precision p = M.precision();
    ScaledReal tol = ScaledReal::pow2(-(p.bits - 16), p);

    RegularityReport r;
    r.log_convex_ok = true;
    for (std::size_t k = 1; k < kmax; ++k) {
        ScaledReal lhs = M.log_value(k).mul_pow2(1);
        ScaledReal rhs = M.log_value(k - 1) + M.log_value(k + 1);
        if (lhs > rhs + tol) {
            r.log_convex_ok = false;
            r.log_convex_first_violation = static_cast<std::ptrdiff_t>(k);
            break;
        }
    }
    ScaledReal one = ScaledReal::of(1, p);
    r.normalization_ok = abs(M.value(0) - one) <= tol && M.value(1) >= one - tol;

    r.roots.reserve(kmax);
    for (std::size_t k = 1; k <= kmax; ++k) r.roots.push_back(M.root(k));
    r.roots_strictly_increasing = true;
    for (std::size_t i = 0; i + 1 < r.roots.size(); ++i) {
        if (!(r.roots[i + 1] > r.roots[i])) {
            r.roots_strictly_increasing = false;
            r.roots_first_violation = static_cast<std::ptrdiff_t>(i + 1);
            break;
        }
    }
    r.roots_exceed = ScaledReal(p);
    for (const ScaledReal& x : r.roots) r.roots_exceed = max(r.roots_exceed, x);
    return r;
}

// ---------------------------------------------------------------------------
// Quasianalyticity partial sums

struct QaReport {
    std::vector<ScaledReal> partial_sums;  // S_0..S_Kmax
    std::vector<ScaledReal> window_increments;  // oldest..latest of the 3 doubling windows
    GrowthClass growth_classification = GrowthClass::inconclusive;
};

namespace detail {

// Shared three-window heuristic.  Geometrically decaying increments (ratio
// <= 3/4 twice) mean the remaining tail is summable, so that test runs
// first; otherwise three increments at or above tau_div read as divergence.
inline GrowthClass classify_windows(const std::vector<ScaledReal>& incr, Precision p) {
    if (incr.size() < 3) return GrowthClass::inconclusive;
    ScaledReal tau_div = ScaledReal::parse("0.05", p);
    ScaledReal tau_pl = ScaledReal::parse("1e-6", p);
    ScaledReal three_quarters = ScaledReal::parse("0.75", p);
    const ScaledReal& d0 = incr[incr.size() - 3];
    const ScaledReal& d1 = incr[incr.size() - 2];
    const ScaledReal& d2 = incr[incr.size() - 1];
    if (d2 < tau_pl) return GrowthClass::plateauing;
    if (d2 <= three_quarters * d1 && d1 <= three_quarters * d0) return GrowthClass::plateauing;
    if (d0 >= tau_div && d1 >= tau_div && d2 >= tau_div) return GrowthClass::diverging;
    return GrowthClass::inconclusive;
}

}  // namespace detail

// S_K = sum_{k<=K} M_k / ((k+1) M_{k+1}), summed in index order.
inline QaReport qa_partial_sums(const WeightSequence& M, std::size_t kmax) {
    if (kmax < 16) throw PreconditionError("qa_partial_sums: Kmax must be at least 16");
    WeightSequence seq = M.kmax() >= kmax + 1 ? M : M.extended(kmax + 1);
    Precision p = seq.precision();

    QaReport r;
    r.partial_sums.reserve(kmax + 1);
    ScaledReal s(p);
    for (std::size_t k = 0; k <= kmax; ++k) {
        ScaledReal term = exp(seq.log_value(k) - seq.log_value(k + 1)) /
                          ScaledReal::of_ui(static_cast<unsigned long>(k + 1), p);
        s = s + term;
        r.partial_sums.push_back(s);
    }
    for (int w = 3; w >= 1; --w) {
        std::size_t hi = kmax >> (w - 1);
        std::size_t lo = kmax >> w;
        r.window_increments.push_back(r.partial_sums[hi] - r.partial_sums[lo]);
    }
    r.growth_classification = detail::classify_windows(r.window_increments, p);
    return r;
}

// ---------------------------------------------------------------------------
// Associated function

struct AssocValue {
    ScaledReal value;      // phi(t) truncated at Kmax
    ScaledReal log_value;  // ln phi(t)
    std::size_t argmax = 0;
    bool interior = false;  // argmax < Kmax, so the truncated sup is trustworthy
};

// phi(t) = max_{k <= Kmax} t^{k+1} / M_k.  Ties resolve to the larger k.
inline AssocValue assoc_function(const WeightSequence& M, const ScaledReal& t, std::size_t kmax) {
    if (t.sign() <= 0) throw DomainError("assoc_function: t must be positive");
    if (kmax > M.kmax()) throw PreconditionError("assoc_function: Kmax exceeds stored prefix");
    Precision p = M.precision();
    ScaledReal lt = ln(t.rounded_to(p));

    AssocValue best;
    best.log_value = lt - M.log_value(0);
    best.argmax = 0;
    for (std::size_t k = 1; k <= kmax; ++k) {
        ScaledReal cand = ScaledReal::of_ui(static_cast<unsigned long>(k + 1), p) * lt - M.log_value(k);
        if (cand >= best.log_value) {
            best.log_value = cand;
            best.argmax = k;
        }
    }
    best.value = exp(best.log_value);
    best.interior = best.argmax < kmax;
    return best;
}

// |M_k phi(m_k) / m_k^{k+1} - 1|; below 2^{-(P-16)} for regular sequences.
inline ScaledReal assoc_identity_residual(const WeightSequence& M, std::size_t k) {
    if (k + 1 > M.kmax())
        throw PreconditionError("assoc_identity_residual: need prefix through k+1");
    RegularityReport reg = check_regular(M, M.kmax());
    if (!reg.log_convex_ok || !reg.normalization_ok || !reg.roots_strictly_increasing)
        throw PreconditionError("assoc_identity_residual: sequence is not regular with strictly "
                                "increasing roots");
    AssocValue phi = assoc_function(M, M.quotient(k), M.kmax());
    if (!phi.interior)
        throw TruncationDominatedError("assoc_identity_residual: truncated sup hit the boundary");
    Precision p = M.precision();
    ScaledReal log_ratio = M.log_value(k) + phi.log_value -
                           ScaledReal::of_ui(static_cast<unsigned long>(k + 1), p) * ln(M.quotient(k));
    return abs(exp(log_ratio) - ScaledReal::of(1, p));
}

// ---------------------------------------------------------------------------
// Ratio indicators

struct IndicatorReport {
    std::vector<ScaledReal> ratios;         // r_k, k = 1..kmax
    std::vector<ScaledReal> window_maxima;  // oldest..latest over 4 dyadic windows
    RatioClass classification = RatioClass::inconclusive;
    ScaledReal sup;
    std::size_t argmax = 1;
};

namespace detail {

inline IndicatorReport classify_ratio_sequence(std::vector<ScaledReal> ratios, Precision p) {
    IndicatorReport rep;
    rep.ratios = std::move(ratios);
    const std::size_t n = rep.ratios.size();
    if (n < 16) throw PreconditionError("ratio indicator: need Kmax >= 16");

    rep.sup = rep.ratios[0];
    rep.argmax = 1;
    for (std::size_t i = 1; i < n; ++i) {
        if (rep.ratios[i] > rep.sup) {
            rep.sup = rep.ratios[i];
            rep.argmax = i + 1;
        }
    }
    // Window w covers ratio indices (n/2^{w+1}, n/2^w], w = 3..0.
    for (int w = 3; w >= 0; --w) {
        std::size_t hi = n >> w;
        std::size_t lo = n >> (w + 1);
        ScaledReal m = rep.ratios[lo];
        for (std::size_t i = lo; i < hi; ++i) m = max(m, rep.ratios[i]);
        rep.window_maxima.push_back(m);
    }
    const ScaledReal& s1 = rep.window_maxima[0];
    const ScaledReal& s2 = rep.window_maxima[1];
    const ScaledReal& s3 = rep.window_maxima[2];
    const ScaledReal& s4 = rep.window_maxima[3];
    ScaledReal half = ScaledReal::parse("0.5", p);
    ScaledReal slack = ScaledReal::parse("1.05", p);
    if (s4 < s3 && s3 < s2 && s2 < s1 && s4 <= half * s1)
        rep.classification = RatioClass::to_zero;
    else if (s4 > s3 && s3 > s2 && s2 > s1 && s4 >= (s1 + s1))
        rep.classification = RatioClass::unbounded;
    else if (s4 <= slack * max(s1, max(s2, s3)))
        rep.classification = RatioClass::bounded;
    else
        rep.classification = RatioClass::inconclusive;
    return rep;
}

}  // namespace detail

// r_k = (M_k / N_k)^{1/k}.  Bounded r_k is the classical inclusion indicator.
inline IndicatorReport inclusion_indicator(const WeightSequence& M, const WeightSequence& N,
                                           std::size_t kmax) {
    if (kmax > M.kmax() || kmax > N.kmax())
        throw PreconditionError("inclusion_indicator: prefixes shorter than Kmax");
    Precision p = M.precision();
    std::vector<ScaledReal> ratios;
    ratios.reserve(kmax);
    for (std::size_t k = 1; k <= kmax; ++k)
        ratios.push_back(exp((M.log_value(k) - N.log_value(k)) /
                             ScaledReal::of_ui(static_cast<unsigned long>(k), p)));
    return detail::classify_ratio_sequence(std::move(ratios), p);
}

// (M_{k+1}/M_k)^{1/k}; boundedness indicates stability under derivation.
inline IndicatorReport derivation_stability_indicator(const WeightSequence& M, std::size_t kmax) {
    if (kmax > M.kmax()) throw PreconditionError("derivation_stability_indicator: short prefix");
    Precision p = M.precision();
    std::vector<ScaledReal> ratios;
    ratios.reserve(kmax - 1);
    for (std::size_t k = 1; k < kmax; ++k)
        ratios.push_back(exp((M.log_value(k + 1) - M.log_value(k)) /
                             ScaledReal::of_ui(static_cast<unsigned long>(k), p)));
    IndicatorReport rep = detail::classify_ratio_sequence(std::move(ratios), p);
    // Boundedness proxy for this indicator: the sup is attained away from the
    // right boundary.
    if (rep.argmax + 1 >= rep.ratios.size() && rep.classification == RatioClass::bounded)
        rep.classification = RatioClass::inconclusive;
    return rep;
}

// ---------------------------------------------------------------------------
// Derived sequences

inline WeightSequence derive_sqrt(const WeightSequence& M) {
    auto d = std::make_shared<detail::SeqData>();
    d->prec = M.precision();
    for (std::size_t k = 0; k <= M.kmax(); ++k)
        d->log_values.push_back(M.log_value(k).mul_pow2(-1));
    if (M.extendable()) {
        auto g = std::make_shared<detail::Gen>();
        g->kind = detail::Gen::Kind::sqrt_of;
        g->param = ScaledReal(d->prec);
        g->base = M.generator();
        d->gen = g;
    }
    d->descriptor.kind = "derived";
    d->descriptor.name = "sqrt(" + M.descriptor().name + ")";
    d->descriptor.params = M.descriptor().params;
    detail::fill_values(*d);
    return WeightSequence::from_parts(std::move(d));
}

inline WeightSequence derive_shift(const WeightSequence& M, std::size_t k0) {
    if (k0 > M.kmax()) throw InsufficientPrefixError("derive_shift: k0 exceeds prefix");
    auto d = std::make_shared<detail::SeqData>();
    d->prec = M.precision();
    for (std::size_t k = k0; k <= M.kmax(); ++k) d->log_values.push_back(M.log_value(k));
    if (M.extendable()) {
        auto g = std::make_shared<detail::Gen>();
        g->kind = detail::Gen::Kind::shift_of;
        g->param = ScaledReal(d->prec);
        g->index = k0;
        g->base = M.generator();
        d->gen = g;
    }
    d->descriptor.kind = "derived";
    d->descriptor.name = "shift(" + M.descriptor().name + ",k0=" + std::to_string(k0) + ")";
    d->descriptor.params = M.descriptor().params;
    detail::fill_values(*d);
    return WeightSequence::from_parts(std::move(d));
}

// Padded sequence: 1 below ell, c^{2k-2ell+1} M_k from ell on.  Requires
// c >= M_ell.
inline WeightSequence derive_padded(const WeightSequence& M, std::size_t ell, const ScaledReal& c) {
    if (ell < 1) throw PreconditionError("derive_padded: ell must be >= 1");
    if (ell > M.kmax()) throw InsufficientPrefixError("derive_padded: ell exceeds prefix");
    if (c < M.value(ell)) throw PreconditionError("derive_padded: c must be at least M_ell");
    Precision p = M.precision();
    ScaledReal lc = ln(c.rounded_to(p));
    auto d = std::make_shared<detail::SeqData>();
    d->prec = p;
    for (std::size_t k = 0; k <= M.kmax(); ++k) {
        if (k < ell) {
            d->log_values.push_back(ScaledReal(p));
        } else {
            long e = 2 * static_cast<long>(k) - 2 * static_cast<long>(ell) + 1;
            d->log_values.push_back(ScaledReal::of(e, p) * lc + M.log_value(k));
        }
    }
    if (M.extendable()) {
        auto g = std::make_shared<detail::Gen>();
        g->kind = detail::Gen::Kind::padded;
        g->param = lc;
        g->index = ell;
        g->base = M.generator();
        d->gen = g;
    }
    d->descriptor.kind = "derived";
    d->descriptor.name = "padded(" + M.descriptor().name + ",ell=" + std::to_string(ell) + ")";
    d->descriptor.params = M.descriptor().params;
    d->descriptor.params.emplace_back("c", c.to_decimal());
    detail::fill_values(*d);
    return WeightSequence::from_parts(std::move(d));
}

// ---------------------------------------------------------------------------
// Log-convex minorant: lower convex hull of (k, ln M_k)

inline WeightSequence log_convex_minorant(const WeightSequence& M, std::size_t kmax) {
    if (kmax > M.kmax()) throw PreconditionError("log_convex_minorant: Kmax exceeds prefix");
    Precision p = M.precision();

    std::vector<std::size_t> hull;
    auto pops = [&](std::size_t cand) {
        // Pop while the last hull point lies on or above chord(prev, cand).
        while (hull.size() >= 2) {
            std::size_t a = hull[hull.size() - 2];
            std::size_t b = hull[hull.size() - 1];
            ScaledReal lhs = (M.log_value(b) - M.log_value(a)) *
                             ScaledReal::of(static_cast<long>(cand) - static_cast<long>(a), p);
            ScaledReal rhs = (M.log_value(cand) - M.log_value(a)) *
                             ScaledReal::of(static_cast<long>(b) - static_cast<long>(a), p);
            if (lhs >= rhs)
                hull.pop_back();
            else
                break;
        }
    };
    for (std::size_t k = 0; k <= kmax; ++k) {
        pops(k);
        hull.push_back(k);
    }

    auto d = std::make_shared<detail::SeqData>();
    d->prec = p;
    d->log_values.resize(kmax + 1, ScaledReal(p));
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        std::size_t a = hull[h];
        std::size_t b = hull[h + 1];
        ScaledReal span = ScaledReal::of(static_cast<long>(b) - static_cast<long>(a), p);
        for (std::size_t k = a; k <= b; ++k) {
            ScaledReal t = ScaledReal::of(static_cast<long>(k) - static_cast<long>(a), p) / span;
            d->log_values[k] = M.log_value(a) + t * (M.log_value(b) - M.log_value(a));
        }
    }
    if (hull.size() == 1) d->log_values[hull[0]] = M.log_value(hull[0]);
    d->descriptor.kind = "derived";
    d->descriptor.name = "log_convex_minorant(" + M.descriptor().name + ")";
    detail::fill_values(*d);
    return WeightSequence::from_parts(std::move(d));
}

// ---------------------------------------------------------------------------
// Diagonal sequence of a one-parameter family (block construction followed
// by the log-convex minorant).

struct DiagonalResult {
    WeightSequence raw_blocks;  // L before the minorant
    WeightSequence minorant;
    std::vector<std::size_t> block_starts;  // j_p per schedule entry
    std::vector<ScaledReal> c_values;       // C_p = sup_k (p / M^{x_p}_k^{1/k})^k
    std::vector<bool> c_interior;
    bool block_root_floor_ok = false;  // L_j^{1/j} >= sqrt(p/2) on block p
};

inline DiagonalResult diagonal_sequence(const std::vector<WeightSequence>& family,
                                        const std::vector<ScaledReal>& x_schedule,
                                        std::size_t kmax) {
    if (family.empty() || family.size() != x_schedule.size())
        throw PreconditionError("diagonal_sequence: family and schedule sizes differ");
    for (std::size_t i = 0; i + 1 < x_schedule.size(); ++i)
        if (!(x_schedule[i] > x_schedule[i + 1]) || x_schedule[i + 1].sign() <= 0)
            throw PreconditionError("diagonal_sequence: schedule must be strictly decreasing "
                                    "and positive");
    Precision p = family[0].precision();
    ScaledReal tol = ScaledReal::pow2(-(p.bits - 24), p);
    for (const WeightSequence& m : family)
        if (m.kmax() < kmax)
            throw InsufficientPrefixError("diagonal_sequence: family prefix shorter than Kmax");
    // Schedule is decreasing in x, so members must decrease pointwise.
    for (std::size_t i = 0; i + 1 < family.size(); ++i)
        for (std::size_t k = 0; k <= kmax; ++k)
            if (family[i + 1].log_value(k) > family[i].log_value(k) + tol)
                throw PreconditionError("diagonal_sequence: family is not monotone in x");

    DiagonalResult res;
    std::size_t prev_j = 0;
    std::vector<ScaledReal> log_L(kmax + 1, ScaledReal(p));
    ScaledReal ln2 = ln(ScaledReal::of(2, p));
    for (std::size_t pi = 0; pi < family.size(); ++pi) {
        unsigned long pnum = static_cast<unsigned long>(pi + 1);
        ScaledReal lnp = ln(ScaledReal::of_ui(pnum, p));
        // ln C_p = sup_{k>=1} (k ln p - ln M^{x_p}_k)
        ScaledReal best = lnp - family[pi].log_value(1);
        std::size_t arg = 1;
        for (std::size_t k = 2; k <= kmax; ++k) {
            ScaledReal cand =
                ScaledReal::of_ui(static_cast<unsigned long>(k), p) * lnp - family[pi].log_value(k);
            if (cand >= best) {  // ties count as boundary attainment
                best = cand;
                arg = k;
            }
        }
        bool interior = arg < kmax;
        res.c_values.push_back(exp(best));
        res.c_interior.push_back(interior);
        if (!interior)
            throw TruncationDominatedError("diagonal_sequence: C_p attained at the prefix "
                                           "boundary for p=" + std::to_string(pnum));
        long jp_raw = (best / ln2).ceil().to_long();
        std::size_t jp = static_cast<std::size_t>(std::max<long>(jp_raw, 1));
        if (jp <= prev_j) jp = prev_j + 1;
        if (jp >= kmax)
            throw InsufficientPrefixError("diagonal_sequence: block start beyond the prefix");
        res.block_starts.push_back(jp);
        prev_j = jp;
    }
    for (std::size_t pi = 0; pi < family.size(); ++pi) {
        std::size_t lo = res.block_starts[pi];
        std::size_t hi = pi + 1 < family.size() ? res.block_starts[pi + 1] : kmax + 1;
        for (std::size_t j = lo; j < hi; ++j) log_L[j] = family[pi].log_value(j).mul_pow2(-1);
    }

    auto d = std::make_shared<detail::SeqData>();
    d->prec = p;
    d->log_values = log_L;
    d->descriptor.kind = "derived";
    d->descriptor.name = "diagonal_blocks";
    detail::fill_values(*d);
    res.raw_blocks = WeightSequence::from_parts(std::move(d));
    res.minorant = log_convex_minorant(res.raw_blocks, kmax);

    res.block_root_floor_ok = true;
    for (std::size_t pi = 0; pi < family.size() && res.block_root_floor_ok; ++pi) {
        std::size_t lo = res.block_starts[pi];
        std::size_t hi = pi + 1 < family.size() ? res.block_starts[pi + 1] : kmax + 1;
        ScaledReal floor_val =
            sqrt(ScaledReal::of_ui(static_cast<unsigned long>(pi + 1), p).mul_pow2(-1));
        for (std::size_t j = lo; j < hi; ++j) {
            if (res.raw_blocks.root(j) < floor_val * (ScaledReal::of(1, p) - tol)) {
                res.block_root_floor_ok = false;
                break;
            }
        }
    }
    return res;
}

}  // namespace qacert::weights

#endif  // QACERT_WEIGHTS_HPP
