// Composition growth of f along polynomial plots: restrict f o p to a
// parameter line x(s) = base + s dir in the plot domain, so each pole term
// becomes (Q_ell(s) - i/m)^{-1} with Q_ell(s) = |P(s) - a_ell|^2 a real
// polynomial.  Exact derivatives come from partial fractions over the
// complex roots (Durand-Kerner with warm starts across poles); tails and
// skip ceilings come from a Cauchy-bound root floor, no asymptotics.

#ifndef QACERT_COMPOSE_HPP
#define QACERT_COMPOSE_HPP

#include <qacert/counterexample.hpp>
#include <qacert/geometry.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace qacert::geometry {

using counterexample::CounterexampleFunction;
using xnum::Precision;
using xnum::ScaledComplex;
using xnum::ScaledReal;

// ---------------------------------------------------------------------------
// Dense real/complex polynomials in one variable

struct RealPoly {
    std::vector<ScaledReal> c;  // c[0] + c[1] s + ...

    std::size_t degree() const { return c.empty() ? 0 : c.size() - 1; }

    static RealPoly constant(const ScaledReal& v) { return RealPoly{{v}}; }

    friend RealPoly operator+(const RealPoly& a, const RealPoly& b) {
        Precision p = a.c.empty() ? Precision::dflt() : a.c[0].precision();
        RealPoly r;
        r.c.assign(std::max(a.c.size(), b.c.size()), ScaledReal(p));
        for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i] = r.c[i] + a.c[i];
        for (std::size_t i = 0; i < b.c.size(); ++i) r.c[i] = r.c[i] + b.c[i];
        return r;
    }
    friend RealPoly operator*(const RealPoly& a, const RealPoly& b) {
        Precision p = a.c[0].precision();
        RealPoly r;
        r.c.assign(a.c.size() + b.c.size() - 1, ScaledReal(p));
        for (std::size_t i = 0; i < a.c.size(); ++i)
            for (std::size_t j = 0; j < b.c.size(); ++j) r.c[i + j] = r.c[i + j] + a.c[i] * b.c[j];
        return r;
    }
    ScaledReal eval(const ScaledReal& s) const {
        Precision p = c[0].precision();
        ScaledReal acc(p);
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * s + c[i];
        return acc;
    }
    RealPoly derivative() const {
        Precision p = c[0].precision();
        if (c.size() <= 1) return RealPoly{{ScaledReal(p)}};
        RealPoly r;
        for (std::size_t i = 1; i < c.size(); ++i)
            r.c.push_back(ScaledReal::of(static_cast<long>(i), p) * c[i]);
        return r;
    }
    void trim() {
        while (c.size() > 1 && c.back().is_zero()) c.pop_back();
    }
};

// Component p_j along the parameter line, expanded in s.
inline RealPoly plot_component_on_line(const MonomialPlot& plot, std::size_t j,
                                       const std::vector<ScaledReal>& base,
                                       const std::vector<ScaledReal>& dir, Precision p) {
    RealPoly poly = RealPoly::constant(plot.units[j].rounded_to(p));
    for (std::size_t i = 0; i < plot.m; ++i) {
        RealPoly lin{{base[i].rounded_to(p), dir[i].rounded_to(p)}};
        for (unsigned e = 0; e < plot.exponents[j][i]; ++e) poly = poly * lin;
    }
    poly.trim();
    return poly;
}

// ---------------------------------------------------------------------------
// Durand-Kerner root finder with residual certification

struct RootSet {
    std::vector<ScaledComplex> roots;
    bool converged = false;
    ScaledReal max_residual;  // max |A(r)| / scale
};

inline RootSet find_roots(const std::vector<ScaledComplex>& coeffs,  // a0 + a1 s + ...
                          const std::vector<ScaledComplex>* warm = nullptr) {
    Precision p = coeffs[0].precision();
    const std::size_t deg = coeffs.size() - 1;
    ScaledComplex lc = coeffs[deg];
    if (modulus(lc).is_zero()) throw DomainError("find_roots: leading coefficient vanishes");

    ScaledReal maxc(p);
    for (std::size_t i = 0; i < deg; ++i) maxc = max(maxc, modulus(coeffs[i]));
    ScaledReal radius = ScaledReal::of(1, p) + maxc / modulus(lc);

    RootSet rs;
    if (warm && warm->size() == deg) {
        rs.roots = *warm;
    } else {
        // Initial guesses spread on a circle of the Cauchy radius.
        for (std::size_t t = 0; t < deg; ++t) {
            double ang = 2.0 * 3.14159265358979312 * (static_cast<double>(t) + 0.3) /
                         static_cast<double>(deg);
            ScaledReal re = ScaledReal::parse(std::to_string(std::cos(ang)), p);
            ScaledReal im = ScaledReal::parse(std::to_string(std::sin(ang)), p);
            rs.roots.push_back(ScaledComplex{radius * re, radius * im});
        }
    }

    auto eval = [&](const ScaledComplex& z) {
        ScaledComplex acc(p);
        for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
        return acc;
    };
    ScaledReal tol = ScaledReal::pow2(-(p.bits * 3 / 4), p) * radius;
    for (int it = 0; it < 400; ++it) {
        ScaledReal moved(p);
        for (std::size_t t = 0; t < deg; ++t) {
            ScaledComplex denom = lc;
            for (std::size_t u = 0; u < deg; ++u)
                if (u != t) denom = denom * (rs.roots[t] - rs.roots[u]);
            if (modulus(denom).is_zero()) {
                // Coincident iterates: nudge and keep going.
                rs.roots[t].re = rs.roots[t].re + tol + ScaledReal::pow2(-8, p);
                continue;
            }
            ScaledComplex delta = eval(rs.roots[t]) / denom;
            rs.roots[t] = rs.roots[t] - delta;
            moved = max(moved, modulus(delta));
        }
        if (moved <= tol) {
            rs.converged = true;
            break;
        }
    }
    ScaledReal scale = max(modulus(coeffs[0]), maxc);
    rs.max_residual = ScaledReal(p);
    for (const auto& r : rs.roots) rs.max_residual = max(rs.max_residual, modulus(eval(r)));
    rs.max_residual = rs.max_residual / scale;
    return rs;
}

// ---------------------------------------------------------------------------
// Composition growth report

struct ComposeRow {
    unsigned order = 0;
    ScaledReal modulus_value;
    ScaledReal tail;
    long cancellation_bits = 0;
};

struct ComposeReport {
    std::vector<ComposeRow> rows;
    ScaledReal margin_min;           // min over ell <= L of dist(P(grid), a_ell)
    std::size_t l_used = 0;
    ScaledReal rho_found;            // smallest dyadic rho with the sup at low order
    bool rho_stabilized = false;
    std::vector<std::pair<ScaledReal, ScaledReal>> rho_scan;  // (rho, sup_k ratio)
    // Optional chain-bound cross-check (set when inputs were provided).
    bool faa_checked = false;
    ScaledReal faa_max_ratio;        // max over k of observed / chain bound
};

struct ComposeInputs {
    MonomialPlot plot;
    std::vector<ScaledReal> base;  // in the plot domain
    std::vector<ScaledReal> dir;
    unsigned k_max = 40;
    ScaledReal margin_threshold;   // defaults to 2^-16
    // Chain-bound parameters (all four must be positive to enable the check).
    ScaledReal chain_C, chain_rho, chain_D, chain_sigma;
};

inline ComposeReport composition_growth_check(const CounterexampleFunction& F,
                                              const ComposeInputs& in) {
    Precision p = F.precision();
    const MonomialPlot& plot = in.plot;
    plot.validate();
    if (plot.components() != F.dimension())
        throw PreconditionError("composition_growth_check: plot components must match the "
                                "ambient dimension");
    if (in.base.size() != plot.m || in.dir.size() != plot.m)
        throw DomainError("composition_growth_check: base/dir must live in the plot domain");
    ScaledReal margin_threshold =
        in.margin_threshold.sign() > 0 ? in.margin_threshold : ScaledReal::pow2(-16, p);

    // Components along the line and the squared-distance polynomials' shared part.
    std::vector<RealPoly> comps;
    for (std::size_t j = 0; j < plot.components(); ++j)
        comps.push_back(plot_component_on_line(plot, j, in.base, in.dir, p));

    const std::size_t L = F.l_limit();
    ComposeReport rep;
    rep.l_used = L;

    // Margin: the image over the domain grid keeps away from every center.
    rep.margin_min = ScaledReal(p);
    {
        bool have = false;
        for (int gi = -8; gi <= 8; ++gi) {
            ScaledReal s = ScaledReal::of(gi, p) / ScaledReal::of(8, p);
            std::vector<ScaledReal> img;
            for (const auto& cp : comps) img.push_back(cp.eval(s));
            for (std::size_t ell = 1; ell <= L; ++ell) {
                ScaledReal d2(p);
                for (std::size_t i = 0; i < img.size(); ++i) {
                    ScaledReal diff = img[i] - F.center(ell).coords[i];
                    d2 = d2 + diff * diff;
                }
                ScaledReal d = sqrt(d2);
                if (!have || d < rep.margin_min) {
                    rep.margin_min = d;
                    have = true;
                }
            }
        }
    }
    if (rep.margin_min < margin_threshold)
        throw PreconditionError("composition_growth_check: plot image approaches a center "
                                "(margin " + rep.margin_min.to_decimal(6) + ")");

    // Q_ell(s) = |P(s) - a_ell|^2 per center.
    std::vector<RealPoly> Q;
    Q.reserve(L);
    for (std::size_t ell = 1; ell <= L; ++ell) {
        RealPoly q = RealPoly::constant(ScaledReal(p));
        for (std::size_t j = 0; j < comps.size(); ++j) {
            RealPoly shifted = comps[j];
            shifted.c[0] = shifted.c[0] - F.center(ell).coords[j];
            q = q + shifted * shifted;
        }
        q.trim();
        Q.push_back(std::move(q));
    }

    // Exact derivative rows via roots + partial fractions, with Cauchy-floor
    // ceilings for skipped poles and the pole tail.
    const unsigned kmax = in.k_max;
    std::vector<ScaledComplex> totals(kmax + 1, ScaledComplex(p));
    std::vector<ScaledReal> tails(kmax + 1, ScaledReal(p));
    std::vector<ScaledReal> maxterm(kmax + 1, ScaledReal(p));
    ScaledReal ln2 = ln(ScaledReal::of(2, p));

    for (std::size_t ell = 1; ell <= L; ++ell) {
        const RealPoly& q = Q[ell - 1];
        const std::size_t deg = q.degree();
        ScaledReal gamma0 = q.c[0];  // squared distance at s = 0, > 0 by the margin
        ScaledReal maxco(p);
        for (std::size_t t = 1; t <= deg; ++t) maxco = max(maxco, abs(q.c[t]));
        ScaledReal w_ell = ScaledReal::pow2(-static_cast<long>(ell), p);

        std::vector<ScaledComplex> warm;
        const auto& poles = F.gadget(ell).poles();
        for (std::size_t pi = 0; pi < poles.size(); ++pi) {
            const auto& pole = poles[pi];
            // Cauchy floor: every root of Q - i/m has |r| >= rho_fl; on the
            // circle of radius rho_fl/2 the polynomial stays above
            // |a0|^2/(|a0| + maxco), giving d^j ceilings without roots.
            ScaledReal a0_abs = hypot(gamma0, ScaledReal::of(1, p) / pole.m);
            ScaledReal rho_fl = a0_abs / (a0_abs + maxco);
            ScaledReal amin = gamma0 * gamma0 / (a0_abs + maxco);
            ScaledReal log_ceiling_base = pole.log_coeff - ln(amin);
            ScaledReal log_rad = ln(rho_fl.mul_pow2(-1));

            // Skip the pole when its whole row of ceilings is negligible.
            ScaledReal worst_log = log_ceiling_base;
            for (unsigned k = 1; k <= kmax; ++k) {
                ScaledReal cand = log_ceiling_base + xnum::factorial_log(k, p) -
                                  ScaledReal::of_ui(k, p) * log_rad;
                worst_log = max(worst_log, cand);
            }
            bool skip = false;
            if (exp(worst_log) * ScaledReal::of_ui(static_cast<unsigned long>(kmax + 1), p) <=
                ScaledReal::pow2(-(p.bits / 2), p)) {
                skip = true;
            }
            if (skip) {
                for (unsigned k = 0; k <= kmax; ++k) {
                    ScaledReal ceiling = exp(log_ceiling_base + xnum::factorial_log(k, p) -
                                             ScaledReal::of_ui(k, p) * log_rad);
                    tails[k] = tails[k] + w_ell * ceiling;
                }
                continue;
            }

            // Roots of Q(s) - i/m.
            std::vector<ScaledComplex> coeffs;
            coeffs.reserve(deg + 1);
            for (std::size_t t = 0; t <= deg; ++t)
                coeffs.push_back(ScaledComplex{q.c[t], ScaledReal(p)});
            coeffs[0].im = -(ScaledReal::of(1, p) / pole.m);
            RootSet rs = find_roots(coeffs, warm.empty() ? nullptr : &warm);
            if (!rs.converged || rs.max_residual > ScaledReal::pow2(-(p.bits / 2), p))
                throw PrecisionExhaustedError(
                    "composition_growth_check: root residual above 2^{-P/2} at ell=" +
                    std::to_string(ell));
            warm = rs.roots;

            // Simple-root check for the partial fractions.
            for (std::size_t a = 0; a < rs.roots.size(); ++a)
                for (std::size_t b = a + 1; b < rs.roots.size(); ++b)
                    if (modulus(rs.roots[a] - rs.roots[b]) <= ScaledReal::pow2(-(p.bits / 2), p))
                        throw PrecisionExhaustedError(
                            "composition_growth_check: near-multiple roots");

            // Residues 1/A'(r_t).
            std::vector<ScaledComplex> dcoeffs;
            for (std::size_t t = 1; t <= deg; ++t)
                dcoeffs.push_back(ScaledReal::of(static_cast<long>(t), p) * coeffs[t]);
            auto eval_d = [&](const ScaledComplex& z) {
                ScaledComplex acc(p);
                for (std::size_t i = dcoeffs.size(); i-- > 0;) acc = acc * z + dcoeffs[i];
                return acc;
            };
            for (unsigned k = 0; k <= kmax; ++k) {
                ScaledComplex sum(p);
                for (const auto& r : rs.roots) {
                    ScaledComplex minus_r = -r;
                    sum = sum + xnum::pow_int(minus_r, -(static_cast<long>(k) + 1)) / eval_d(r);
                }
                ScaledReal kf = xnum::factorial(k, p);
                ScaledComplex term = pole.coeff * sum;
                ScaledComplex scaled = (k % 2 == 0 ? kf : -kf) * ScaledComplex{term.re, term.im};
                totals[k] = totals[k] + w_ell * scaled;
                maxterm[k] = max(maxterm[k], w_ell * modulus(scaled));
            }
        }
        // Poles beyond K_pole of this gadget: phi(m) >= m gives
        // sum_{kappa > K} 2^{-kappa}/m and the shared Cauchy-floor radius.
        {
            ScaledReal a0_floor = gamma0;  // |a0| >= gamma0 for every m
            ScaledReal rho_fl = a0_floor / (a0_floor + ScaledReal::of(1, p) + maxco);
            ScaledReal amin = gamma0 * gamma0 / (a0_floor + ScaledReal::of(1, p) + maxco);
            ScaledReal log_rad = ln(rho_fl.mul_pow2(-1));
            ScaledReal mlast = poles.back().m;
            for (unsigned k = 0; k <= kmax; ++k) {
                ScaledReal ceiling =
                    exp(xnum::factorial_log(k, p) - ScaledReal::of_ui(k, p) * log_rad - ln(amin) -
                        ln(mlast) -
                        ScaledReal::of_ui(static_cast<unsigned long>(F.gadget(ell).k_pole()), p) *
                            ln2);
                tails[k] = tails[k] + w_ell * ceiling;
            }
        }
    }

    // Rows and cancellation audit.
    for (unsigned k = 0; k <= kmax; ++k) {
        ComposeRow row;
        row.order = k;
        row.modulus_value = modulus(totals[k]);
        row.tail = tails[k];
        if (!maxterm[k].is_zero() && !row.modulus_value.is_zero()) {
            ScaledReal bits = log2(maxterm[k] / row.modulus_value).ceil();
            long b = bits.to_long();
            row.cancellation_bits = b > 0 ? b : 0;
        }
        rep.rows.push_back(std::move(row));
    }

    // rho scan: smallest dyadic rho whose normalized sup sits at order <= 1.
    for (long e = 0; e <= 40; ++e) {
        ScaledReal rho = ScaledReal::pow2(e, p);
        ScaledReal sup(p);
        unsigned argmax = 0;
        for (unsigned k = 0; k <= kmax; ++k) {
            ScaledReal denom = exp(ScaledReal::of_ui(k, p) * ln(rho) + xnum::factorial_log(k, p) +
                                   F.M().log_value_any(k));
            ScaledReal ratio = (rep.rows[k].modulus_value + rep.rows[k].tail) / denom;
            if (ratio > sup) {
                sup = ratio;
                argmax = k;
            }
        }
        rep.rho_scan.emplace_back(rho, sup);
        if (!rep.rho_stabilized && argmax <= 1) {
            rep.rho_found = rho;
            rep.rho_stabilized = true;
        }
    }

    if (in.chain_C.sign() > 0 && in.chain_rho.sign() > 0 && in.chain_D.sign() > 0 &&
        in.chain_sigma.sign() > 0) {
        rep.faa_checked = true;
        rep.faa_max_ratio = ScaledReal(p);
        for (unsigned k = 1; k <= kmax; ++k) {
            auto b = faa_di_bruno_bound(in.chain_C, in.chain_rho, in.chain_D, in.chain_sigma,
                                        F.M(), k);
            ScaledReal kf = xnum::factorial(k, p);
            ScaledReal observed = (rep.rows[k].modulus_value + rep.rows[k].tail) / kf;
            rep.faa_max_ratio = max(rep.faa_max_ratio, observed / b.bound);
        }
    }
    return rep;
}

}  // namespace qacert::geometry

#endif  // QACERT_COMPOSE_HPP
