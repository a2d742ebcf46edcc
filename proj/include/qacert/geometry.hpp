// Flat functions and their iterates, the arc Phi(t) = (t, phi(t), ...,
// phi_[n-1](t)), inversion along the arc, normal-form analysis of monomial
// plots, grid-based arc-distance certificates, and the composition-chain
// bound driven by the Faa di Bruno formula.

#ifndef QACERT_GEOMETRY_HPP
#define QACERT_GEOMETRY_HPP

#include <qacert/weights.hpp>
#include <qacert/xnum.hpp>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qacert::geometry {

using xnum::Precision;
using xnum::ScaledReal;
using weights::WeightSequence;

// ---------------------------------------------------------------------------
// Flat functions

// phi(t) = exp(c (1 - 1/t)) on (0,1], phi(0) = 0.  Strictly increasing,
// phi(1) = 1, phi(t) <= t (ln t >= 1 - 1/t), and infinitely flat at 0.
// c = 1 is the canonical rule; c > 1 flattens harder.
class FlatFunction {
  public:
    static FlatFunction canonical(Precision p = Precision::dflt()) {
        return FlatFunction(ScaledReal::of(1, p), p);
    }
    static FlatFunction exponent_scaled(const ScaledReal& c, Precision p = Precision::dflt()) {
        if (c < ScaledReal::of(1, p))
            throw DomainError("flat rule: exponent scale must be >= 1 to keep phi(t) <= t");
        return FlatFunction(c.rounded_to(p), p);
    }

    Precision precision() const { return prec_; }
    const ScaledReal& scale() const { return c_; }

    ScaledReal eval(const ScaledReal& t) const {
        check_domain(t);
        if (t.is_zero()) return ScaledReal(prec_);
        ScaledReal one = ScaledReal::of(1, prec_);
        return exp(c_ * (one - one / t.rounded_to(prec_)));
    }

    // phi_[j](t), with phi_[0] = id.
    ScaledReal iterate(std::size_t j, const ScaledReal& t) const {
        check_domain(t);
        ScaledReal v = t.rounded_to(prec_);
        for (std::size_t i = 0; i < j; ++i) {
            v = eval(v);
            if (v.is_zero()) break;  // stays pinned at the fixed point 0
        }
        return v;
    }

    // Single-level closed-form inverse: t = 1 / (1 - ln(y)/c) for y in (0,1].
    ScaledReal invert_once(const ScaledReal& y) const {
        if (y.sign() <= 0 || y > ScaledReal::of(1, prec_))
            throw DomainError("flat invert: y must lie in (0,1]");
        ScaledReal one = ScaledReal::of(1, prec_);
        return one / (one - ln(y.rounded_to(prec_)) / c_);
    }

    // t with phi_[j](t) = y; round trip verified to relative 2^-128 (or to
    // 2^-(P-8) when the working precision cannot resolve that).
    ScaledReal invert(const ScaledReal& y, std::size_t j) const {
        if (y.sign() <= 0 || y > ScaledReal::of(1, prec_))
            throw DomainError("flat invert: y must lie in (0,1]");
        ScaledReal t = y.rounded_to(prec_);
        for (std::size_t i = 0; i < j; ++i) t = invert_once(t);
        ScaledReal residual = abs(iterate(j, t) - y.rounded_to(prec_));
        long tol_bits = std::min<long>(128, prec_.bits - 8);
        if (residual > ScaledReal::pow2(-tol_bits, prec_) * y)
            throw PrecisionExhaustedError("flat invert: round-trip residual above tolerance");
        return t;
    }

  private:
    FlatFunction(ScaledReal c, Precision p) : c_(std::move(c)), prec_(p) {}
    void check_domain(const ScaledReal& t) const {
        if (t.sign() < 0 || t > ScaledReal::of(1, prec_))
            throw DomainError("flat function: t must lie in [0,1]");
    }

    ScaledReal c_;
    Precision prec_;
};

// Phi(t) in R^n; coordinates are nonincreasing left to right.
inline std::vector<ScaledReal> arc_point(const FlatFunction& phi, std::size_t n,
                                         const ScaledReal& t) {
    if (n < 1) throw DomainError("arc_point: n must be >= 1");
    if (t.sign() <= 0 || t > ScaledReal::of(1, phi.precision()))
        throw DomainError("arc_point: t must lie in (0,1]");
    std::vector<ScaledReal> out;
    out.reserve(n);
    ScaledReal v = t.rounded_to(phi.precision());
    out.push_back(v);
    for (std::size_t i = 1; i < n; ++i) {
        v = phi.eval(v);
        out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Monomial plots

// p_j(x) = u_j x^{alpha_j} with constant units; u_j = 0 marks an identically
// vanishing component.
struct MonomialPlot {
    std::size_t m = 1;                                // domain dimension
    std::vector<std::vector<unsigned>> exponents;     // one vector per component
    std::vector<ScaledReal> units;
    std::vector<std::pair<ScaledReal, ScaledReal>> domain_box;  // per-axis [lo, hi]

    std::size_t components() const { return exponents.size(); }

    void validate() const {
        if (m == 0) throw DomainError("plot: domain dimension must be >= 1");
        if (exponents.empty() || exponents.size() != units.size())
            throw DomainError("plot: exponents/units size mismatch");
        for (const auto& a : exponents)
            if (a.size() != m) throw DomainError("plot: exponent arity must equal m");
        if (domain_box.size() != m) throw DomainError("plot: domain box arity must equal m");
        for (const auto& [lo, hi] : domain_box)
            if (!(lo < hi)) throw DomainError("plot: empty domain box");
        for (const ScaledReal& u : units)
            if (u.sign() < 0) throw DomainError("plot: units must be nonnegative constants");
    }

    ScaledReal eval_component(std::size_t j, const std::vector<ScaledReal>& x) const {
        Precision p = units[j].precision();
        if (units[j].is_zero()) return ScaledReal(p);
        ScaledReal v = units[j];
        for (std::size_t i = 0; i < m; ++i)
            if (exponents[j][i] > 0) v = v * pow_si(x[i], static_cast<long>(exponents[j][i]));
        return v;
    }
};

enum class PlotCase { off_origin, ordered_monomial, unsupported };

inline const char* to_string(PlotCase c) {
    switch (c) {
        case PlotCase::off_origin: return "off_origin";
        case PlotCase::ordered_monomial: return "ordered_monomial";
        default: return "unsupported";
    }
}

struct NormalFormWitness {
    // 1-based positions in the sorted arrangement of nonvanishing exponents.
    std::size_t i = 0;
    std::size_t j = 0;
    std::vector<unsigned> alpha_i, alpha_j;
    unsigned d = 0;  // minimal d with d*alpha_i >= alpha_j
    std::vector<std::size_t> zero_components;        // indices with p_j == 0
    std::optional<std::size_t> off_origin_component; // component with alpha = 0
    std::vector<std::size_t> sorted_components;      // original indices, ascending exponents
};

struct NormalFormResult {
    PlotCase plot_case = PlotCase::unsupported;
    NormalFormWitness witness;
    std::string note;
};

namespace detail {

inline bool leq(const std::vector<unsigned>& a, const std::vector<unsigned>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}
inline std::size_t zero_count(const std::vector<unsigned>& a) {
    std::size_t z = 0;
    for (unsigned v : a)
        if (v == 0) ++z;
    return z;
}

}  // namespace detail

// Case analysis for the arc-distance certificate.  Vanishing components are
// set aside (they confine the image to a coordinate plane); a component with
// exponent 0 pushes the image off the origin; otherwise a totally ordered
// exponent set yields a sandwich pair (i, j) with equal zero counts and a
// minimal power d with d*alpha_i >= alpha_j.
inline NormalFormResult plot_normal_form(const MonomialPlot& plot) {
    plot.validate();
    NormalFormResult res;

    std::vector<std::size_t> nonzero;
    for (std::size_t j = 0; j < plot.components(); ++j) {
        if (plot.units[j].is_zero())
            res.witness.zero_components.push_back(j);
        else
            nonzero.push_back(j);
    }
    if (nonzero.empty()) {
        res.plot_case = PlotCase::ordered_monomial;
        res.note = "all components vanish; image is the origin";
        return res;
    }
    for (std::size_t j : nonzero) {
        if (detail::zero_count(plot.exponents[j]) == plot.m) {
            res.plot_case = PlotCase::off_origin;
            res.witness.off_origin_component = j;
            res.note = "component " + std::to_string(j) + " is a nonzero constant";
            return res;
        }
    }

    // Total-order check on the nonvanishing exponents.
    for (std::size_t a = 0; a < nonzero.size(); ++a) {
        for (std::size_t b = a + 1; b < nonzero.size(); ++b) {
            const auto& ea = plot.exponents[nonzero[a]];
            const auto& eb = plot.exponents[nonzero[b]];
            if (!detail::leq(ea, eb) && !detail::leq(eb, ea)) {
                res.plot_case = PlotCase::unsupported;
                res.note = "incomparable exponents at components " +
                           std::to_string(nonzero[a]) + " and " + std::to_string(nonzero[b]);
                return res;
            }
        }
    }
    std::sort(nonzero.begin(), nonzero.end(), [&](std::size_t a, std::size_t b) {
        return detail::leq(plot.exponents[a], plot.exponents[b]) &&
               plot.exponents[a] != plot.exponents[b];
    });
    res.witness.sorted_components = nonzero;

    if (!res.witness.zero_components.empty()) {
        res.plot_case = PlotCase::ordered_monomial;
        res.note = "vanishing component confines the image to a coordinate plane";
        return res;
    }

    // Pigeonhole on zero counts of the sorted arrangement.
    for (std::size_t i = 0; i + 1 < nonzero.size(); ++i) {
        const auto& ai = plot.exponents[nonzero[i]];
        const auto& aj = plot.exponents[nonzero[i + 1]];
        if (detail::zero_count(ai) != detail::zero_count(aj)) continue;
        res.plot_case = PlotCase::ordered_monomial;
        res.witness.i = i + 1;
        res.witness.j = i + 2;
        res.witness.alpha_i = ai;
        res.witness.alpha_j = aj;
        unsigned d = 1;
        for (std::size_t c = 0; c < plot.m; ++c) {
            if (ai[c] == 0) continue;
            unsigned need = (aj[c] + ai[c] - 1) / ai[c];
            d = std::max(d, need);
        }
        res.witness.d = d;
        return res;
    }
    res.plot_case = PlotCase::unsupported;
    res.note = "no sandwich pair with equal zero counts (plot is not lower dimensional?)";
    return res;
}

// ---------------------------------------------------------------------------
// Arc-distance certificate

struct ArcDistanceRow {
    ScaledReal t;
    ScaledReal distance;  // dist(Phi(t), K_grid)
    ScaledReal bound;     // the iterate the distance must dominate
    ScaledReal margin;    // distance - bound
    bool applicable = true;
    bool pass = false;
};

struct ArcDistanceReport {
    NormalFormResult normal_form;
    ScaledReal sandwich_constant;  // C, ordered_monomial case
    ScaledReal eps;                // dist(0, K_grid), off_origin case
    std::size_t bound_iterate = 0;  // the certificate compares against phi_[bound_iterate]
    std::vector<ArcDistanceRow> rows;
    bool all_pass = false;
};

inline std::vector<std::vector<ScaledReal>> grid_points(const MonomialPlot& plot,
                                                        std::size_t per_axis,
                                                        Precision p = Precision::dflt()) {
    plot.validate();
    if (per_axis < 2) throw DomainError("domain grid: need at least two points per axis");
    std::vector<std::vector<ScaledReal>> axes(plot.m);
    for (std::size_t i = 0; i < plot.m; ++i) {
        const auto& [lo, hi] = plot.domain_box[i];
        for (std::size_t k = 0; k < per_axis; ++k) {
            ScaledReal u = ScaledReal::of_ui(static_cast<unsigned long>(k), p) /
                           ScaledReal::of_ui(static_cast<unsigned long>(per_axis - 1), p);
            axes[i].push_back(lo.rounded_to(p) + u * (hi - lo).rounded_to(p));
        }
    }
    std::vector<std::vector<ScaledReal>> pts;
    std::vector<std::size_t> idx(plot.m, 0);
    while (true) {
        std::vector<ScaledReal> x;
        x.reserve(plot.m);
        for (std::size_t i = 0; i < plot.m; ++i) x.push_back(axes[i][idx[i]]);
        pts.push_back(std::move(x));
        std::size_t i = 0;
        for (; i < plot.m; ++i) {
            if (++idx[i] < per_axis) break;
            idx[i] = 0;
        }
        if (i == plot.m) break;
    }
    return pts;
}

namespace detail {

inline ScaledReal dist_point_set(const std::vector<ScaledReal>& a,
                                 const std::vector<std::vector<ScaledReal>>& set) {
    ScaledReal best;
    bool have = false;
    for (const auto& b : set) {
        ScaledReal s(a[0].precision());
        for (std::size_t i = 0; i < a.size(); ++i) {
            ScaledReal d = a[i] - b[i];
            s = s + d * d;
        }
        s = sqrt(s);
        if (!have || s < best) {
            best = s;
            have = true;
        }
    }
    return best;
}

}  // namespace detail

inline ArcDistanceReport arc_distance_certificate(const MonomialPlot& plot,
                                                  const FlatFunction& phi, std::size_t n,
                                                  const std::vector<ScaledReal>& t_grid,
                                                  std::size_t domain_points_per_axis = 9) {
    Precision p = phi.precision();
    ArcDistanceReport rep;
    rep.normal_form = plot_normal_form(plot);
    if (rep.normal_form.plot_case == PlotCase::unsupported)
        throw PreconditionError("arc_distance_certificate: " + rep.normal_form.note);
    if (plot.components() != n)
        throw PreconditionError("arc_distance_certificate: plot has " +
                                std::to_string(plot.components()) + " components, ambient n=" +
                                std::to_string(n));

    auto domain = grid_points(plot, domain_points_per_axis, p);
    std::vector<std::vector<ScaledReal>> image;
    image.reserve(domain.size());
    for (const auto& x : domain) {
        std::vector<ScaledReal> y;
        y.reserve(n);
        for (std::size_t j = 0; j < n; ++j) y.push_back(plot.eval_component(j, x));
        image.push_back(std::move(y));
    }

    const auto& w = rep.normal_form.witness;
    if (rep.normal_form.plot_case == PlotCase::off_origin) {
        std::vector<std::vector<ScaledReal>> origin = {std::vector<ScaledReal>(n, ScaledReal(p))};
        rep.eps = detail::dist_point_set(origin[0], image);
        rep.bound_iterate = n - 1;
    } else if (!w.zero_components.empty()) {
        rep.bound_iterate = *std::min_element(w.zero_components.begin(), w.zero_components.end());
    } else if (w.d > 0) {
        // Compare against the flat iterate of the later ambient coordinate of
        // the sandwich pair (the flatter of the two).
        rep.bound_iterate =
            std::max(w.sorted_components[w.i - 1], w.sorted_components[w.j - 1]);
        // Sandwich constant over the domain grid: |p_j| <= C |p_i| and
        // |p_i|^d <= C |p_j| wherever p_i does not vanish.
        std::size_t ci = w.sorted_components[w.i - 1];
        std::size_t cj = w.sorted_components[w.j - 1];
        rep.sandwich_constant = ScaledReal(p);
        for (const auto& x : domain) {
            ScaledReal pi = abs(plot.eval_component(ci, x));
            ScaledReal pj = abs(plot.eval_component(cj, x));
            if (pi.is_zero()) continue;
            rep.sandwich_constant = max(rep.sandwich_constant, pj / pi);
            if (pj.sign() > 0)
                rep.sandwich_constant =
                    max(rep.sandwich_constant, pow_si(pi, static_cast<long>(w.d)) / pj);
        }
    } else {
        rep.bound_iterate = n - 1;  // image is the origin
    }

    rep.all_pass = true;
    for (const ScaledReal& t : t_grid) {
        ArcDistanceRow row;
        row.t = t.rounded_to(p);
        auto point = arc_point(phi, n, row.t);
        row.distance = detail::dist_point_set(point, image);
        row.bound = phi.iterate(rep.bound_iterate, row.t);
        row.margin = row.distance - row.bound;
        if (rep.normal_form.plot_case == PlotCase::off_origin) {
            // Only t with |Phi(t)| below eps/2 are covered by this case.
            ScaledReal norm(p);
            for (const auto& c : point) norm = norm + c * c;
            norm = sqrt(norm);
            row.applicable = norm <= rep.eps.mul_pow2(-1);
        }
        row.pass = !row.applicable || row.margin.sign() > 0;
        if (row.applicable && !row.pass) rep.all_pass = false;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Composition-chain bound

struct FaaDiBrunoBound {
    ScaledReal bound;               // C D rho (M_1 sigma)^k (1 + D rho)^{k-1} M_k
    ScaledReal combinatorial_sum;   // sum_j C(k-1, j-1) (D rho)^j
    ScaledReal closed_form_sum;     // D rho (1 + D rho)^{k-1}
};

inline FaaDiBrunoBound faa_di_bruno_bound(const ScaledReal& C, const ScaledReal& rho,
                                          const ScaledReal& D, const ScaledReal& sigma,
                                          const WeightSequence& M, unsigned k) {
    if (C.sign() <= 0 || rho.sign() <= 0 || D.sign() <= 0 || sigma.sign() <= 0)
        throw DomainError("faa_di_bruno_bound: parameters must be positive");
    if (k < 1) throw DomainError("faa_di_bruno_bound: k must be >= 1");
    if (M.kmax() < k) throw InsufficientPrefixError("faa_di_bruno_bound: prefix shorter than k");
    auto reg = weights::check_regular(M, std::min<std::size_t>(M.kmax(), k));
    if (!reg.log_convex_ok || !reg.normalization_ok)
        throw PreconditionError("faa_di_bruno_bound: M must be log-convex and normalized");
    Precision p = M.precision();

    ScaledReal drho = D.rounded_to(p) * rho.rounded_to(p);
    FaaDiBrunoBound out;
    out.combinatorial_sum = ScaledReal(p);
    for (unsigned j = 1; j <= k; ++j)
        out.combinatorial_sum = out.combinatorial_sum +
                                xnum::binomial(k - 1, j - 1, p) * pow_si(drho, static_cast<long>(j));
    out.closed_form_sum = drho * pow_si(ScaledReal::of(1, p) + drho, static_cast<long>(k) - 1);
    ScaledReal rel = abs(out.combinatorial_sum - out.closed_form_sum) / out.closed_form_sum;
    if (rel > ScaledReal::pow2(-(p.bits - 16), p))
        throw PrecisionExhaustedError("faa_di_bruno_bound: binomial routes disagree");

    out.bound = C.rounded_to(p) * out.closed_form_sum *
                pow_si(M.value(1) * sigma.rounded_to(p), static_cast<long>(k)) * M.value(k);
    return out;
}

}  // namespace qacert::geometry

#endif  // QACERT_GEOMETRY_HPP
