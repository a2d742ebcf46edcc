// The one-dimensional pole gadget
//
//     f(x) = sum_{k>=1} 2^{-k} phi(m_k)^{-1} (x - i/m_k)^{-1},
//
// built from a log-convex normalized weight sequence M with quotients
// m_k = M_{k+1}/M_k and associated function phi(t) = sup_k t^{k+1}/M_k.
// Derivatives of every order are evaluated exactly term by term via partial
// fractions; truncation tails are certified from the pointwise inequality
// t^{j+1}/phi(t) <= M_j and from pole-distance floors.  The radial lift
// g(|x - a|^2) restricted to a line reduces each pole term to a quadratic
// with complex roots, handled by the stable quadratic formula.

#ifndef QACERT_GADGET_HPP
#define QACERT_GADGET_HPP

#include <qacert/weights.hpp>
#include <qacert/xnum.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace qacert::gadget {

using xnum::Precision;
using xnum::ScaledComplex;
using xnum::ScaledReal;
using xnum::SumAudit;
using weights::WeightSequence;

struct Pole {
    ScaledReal m;          // pole at i/m
    ScaledReal coeff;      // sum of 2^{-k} phi(m_k)^{-1} over merged indices
    ScaledReal log_coeff;  // ln coeff
    std::size_t first_index;  // smallest merged k
};

struct DerivativeValue {
    ScaledComplex value;
    unsigned order = 0;
    ScaledReal tail_bound;  // modulus bound on everything not evaluated exactly
    SumAudit audit;
};

struct EvalOptions {
    EvalOptions() = default;

    // Per-term ceilings below this threshold are folded into the tail
    // instead of being evaluated.  Zero disables skipping.
    ScaledReal skip_below;
    // Cancellation budget; exceeding it raises PrecisionExhaustedError.
    long max_cancellation_bits = 0;  // 0 means P/2

    static EvalOptions none() { return EvalOptions(); }
};

class Gadget {
  public:
    const WeightSequence& source() const { return source_.value(); }
    bool has_source() const { return source_.has_value(); }
    const std::vector<Pole>& poles() const { return poles_; }
    std::size_t k_pole() const { return k_pole_; }
    Precision precision() const { return prec_; }
    bool poles_strictly_decreasing() const { return strict_; }

    // M_j of the source, extending through the generator as needed.
    ScaledReal source_log_value(std::size_t j) const {
        if (!source_) throw PreconditionError("gadget: raw gadget has no source sequence");
        return source_->log_value_any(j);
    }

    static Gadget from_raw(std::vector<Pole> poles, std::size_t k_pole, Precision p,
                           std::optional<WeightSequence> src = std::nullopt) {
        Gadget g;
        g.poles_ = std::move(poles);
        g.k_pole_ = k_pole;
        g.prec_ = p;
        g.source_ = std::move(src);
        g.strict_ = true;
        for (std::size_t i = 0; i + 1 < g.poles_.size(); ++i)
            if (!(g.poles_[i].m < g.poles_[i + 1].m)) g.strict_ = false;
        return g;
    }

    // Single pole at i/1 with unit coefficient: f(x) = (x - i)^{-1}.
    static Gadget single_pole_toy(Precision p = Precision::dflt()) {
        Pole pole{ScaledReal::of(1, p), ScaledReal::of(1, p), ScaledReal(p), 1};
        return from_raw({pole}, 1, p);
    }

  private:
    friend Gadget build_gadget(const WeightSequence&, std::size_t);
    std::vector<Pole> poles_;
    std::size_t k_pole_ = 0;
    Precision prec_;
    std::optional<WeightSequence> source_;
    bool strict_ = true;
};

// Coefficients come from the identity phi(m_k) = m_k^{k+1}/M_k, which is
// exact for log-convex normalized sequences; a brute-force sup over the
// stored prefix cross-checks a sample of them.  Poles sharing the same
// quotient (flat stretches of M) are merged into one term.
inline Gadget build_gadget(const WeightSequence& M, std::size_t k_pole) {
    if (k_pole < 1) throw PreconditionError("build_gadget: empty gadget (K_pole = 0)");
    if (k_pole + 1 > M.kmax())
        throw InsufficientPrefixError("build_gadget: K_pole needs prefix through K_pole + 1");
    auto reg = weights::check_regular(M, M.kmax());
    if (!reg.log_convex_ok || !reg.normalization_ok)
        throw PreconditionError("build_gadget: source must be log-convex and normalized");
    Precision p = M.precision();
    for (std::size_t k = 0; k + 1 < k_pole; ++k)
        if (M.quotient(k + 2) < M.quotient(k + 1))
            throw PreconditionError("build_gadget: quotients must be nondecreasing");

    ScaledReal ln2 = ln(ScaledReal::of(2, p));
    Gadget g;
    g.prec_ = p;
    g.k_pole_ = k_pole;
    g.source_ = M;
    for (std::size_t k = 1; k <= k_pole; ++k) {
        ScaledReal m = M.quotient(k);
        // ln coeff_k = -k ln 2 + ln M_k - (k+1) ln m_k
        ScaledReal lc = -(ScaledReal::of_ui(static_cast<unsigned long>(k), p) * ln2) +
                        M.log_value(k) -
                        ScaledReal::of_ui(static_cast<unsigned long>(k + 1), p) * ln(m);
        if (!g.poles_.empty() && g.poles_.back().m == m) {
            ScaledReal merged = g.poles_.back().coeff + exp(lc);
            g.poles_.back().coeff = merged;
            g.poles_.back().log_coeff = ln(merged);
        } else {
            g.poles_.push_back(Pole{m, exp(lc), lc, k});
        }
    }
    g.strict_ = true;
    for (std::size_t i = 0; i + 1 < g.poles_.size(); ++i)
        if (!(g.poles_[i].m < g.poles_[i + 1].m)) g.strict_ = false;

    // Spot-check the identity against the truncated sup.
    for (std::size_t k = 1; k <= k_pole; k += (k_pole >= 17 ? 17 : 1)) {
        auto brute = weights::assoc_function(M, M.quotient(k), M.kmax());
        ScaledReal ident = ScaledReal::of_ui(static_cast<unsigned long>(k + 1), p) *
                               ln(M.quotient(k)) -
                           M.log_value(k);
        ScaledReal err = abs(brute.log_value - ident);
        if (err > ScaledReal::pow2(-(p.bits - 24), p) * max(ScaledReal::of(1, p), abs(ident)))
            throw PrecisionExhaustedError("build_gadget: associated-function identity failed "
                                          "the brute-force cross-check at k=" + std::to_string(k));
    }
    return g;
}

namespace detail {

inline long cancellation_budget(const EvalOptions& opt, Precision p) {
    return opt.max_cancellation_bits > 0 ? opt.max_cancellation_bits : p.bits / 2;
}

// i^{(j+1) mod 4} * (-1)^j as a complex unit.
inline ScaledComplex center_phase(unsigned j, Precision p) {
    static const int re_tab[4] = {1, 0, -1, 0};
    static const int im_tab[4] = {0, 1, 0, -1};
    unsigned q = (j + 1) % 4;
    ScaledComplex ph = ScaledComplex::of(re_tab[q], im_tab[q], p);
    if (j % 2 == 1) ph = -ph;
    return ph;
}

}  // namespace detail

// f^{(j)}(x) for real x.  At x = 0 every pole contributes the same phase
// i^{j+1} (-1)^j, so the sum is a positive series evaluated in log space and
// the audit reports zero cancellation.
inline DerivativeValue gadget_derivative(const Gadget& g, unsigned order, const ScaledReal& x,
                                         const EvalOptions& opt = EvalOptions::none()) {
    Precision p = g.precision();
    const long j1 = static_cast<long>(order) + 1;
    ScaledReal jfact = xnum::factorial(order, p);

    DerivativeValue out;
    out.order = order;

    if (x.is_zero()) {
        ScaledReal mag(p);
        ScaledReal biggest(p);
        for (const Pole& pole : g.poles()) {
            ScaledReal term = exp(pole.log_coeff + ScaledReal::of(j1, p) * ln(pole.m));
            mag = mag + term;
            biggest = max(biggest, term);
        }
        mag = mag * jfact;
        out.value = mag * detail::center_phase(order, p);
        out.audit.result = out.value;
        out.audit.max_term_magnitude = biggest * jfact;
        out.audit.cancellation_loss_bits = 0;
    } else {
        std::vector<ScaledComplex> terms;
        terms.reserve(g.poles().size());
        ScaledReal skipped(p);
        for (const Pole& pole : g.poles()) {
            // |x - i/m|^{-(j+1)} <= min(m, 1/|x|)^{j+1}
            if (opt.skip_below.sign() > 0) {
                ScaledReal dist = max(abs(x), ScaledReal::of(1, p) / pole.m);
                ScaledReal ceiling =
                    exp(pole.log_coeff - ScaledReal::of(j1, p) * ln(dist));
                if (ceiling <= opt.skip_below) {
                    skipped = skipped + ceiling;
                    continue;
                }
            }
            ScaledComplex z{x.rounded_to(p), -(ScaledReal::of(1, p) / pole.m)};
            terms.push_back(pole.coeff * xnum::pow_int(z, -j1));
        }
        out.audit = xnum::sum_audited(terms, p);
        ScaledComplex scale{order % 2 == 0 ? jfact : -jfact, ScaledReal(p)};
        out.value = scale * out.audit.result;
        out.audit.result = out.value;
        out.audit.max_term_magnitude = out.audit.max_term_magnitude * jfact;
        out.tail_bound = out.tail_bound + skipped * jfact;
        if (out.audit.cancellation_loss_bits > detail::cancellation_budget(opt, p))
            throw PrecisionExhaustedError("gadget_derivative: cancellation exceeded budget");
    }

    // Omitted poles k > K_pole: each term obeys both 2^{-k} j! M_j (via
    // t^{j+1}/phi(t) <= M_j) and, off the origin, 2^{-k} j! |x|^{-(j+1)}
    // (via |x - i/m| >= |x| and phi >= 1); take the smaller sum.
    if (g.has_source()) {
        ScaledReal route = exp(g.source_log_value(order));
        if (!x.is_zero())
            route = min(route, ScaledReal::of(1, p) / pow_si(abs(x), j1));
        out.tail_bound =
            out.tail_bound + jfact * route * ScaledReal::pow2(-static_cast<long>(g.k_pole()), p);
    }
    return out;
}

struct LiftValue {
    DerivativeValue derivative;   // of the radial lift g(|x|^2), axis direction
    ScaledReal lower_bound;       // (2k)! M_k / 2^k when a source is attached
    bool lower_bound_pass = false;
    bool inconclusive = false;    // tail ate more than half the margin
};

// Axis derivative of order 2k of g(|x|^2) at the center:
// (2k)!/k! * g^{(k)}(0).  Independent of the ambient dimension.
inline LiftValue lift_radial_center_derivative(const Gadget& g, unsigned order) {
    if (order % 2 != 0) throw DomainError("lift_radial_center_derivative: order must be even");
    Precision p = g.precision();
    unsigned k = order / 2;
    DerivativeValue inner = gadget_derivative(g, k, ScaledReal(p));
    ScaledReal factor = exp(xnum::factorial_log(order, p) - xnum::factorial_log(k, p));

    LiftValue out;
    out.derivative.order = order;
    out.derivative.value = factor * inner.value;
    out.derivative.tail_bound = factor * inner.tail_bound;
    out.derivative.audit = inner.audit;
    out.derivative.audit.result = out.derivative.value;
    out.derivative.audit.max_term_magnitude = factor * inner.audit.max_term_magnitude;

    if (g.has_source() && k >= 1) {
        out.lower_bound = exp(xnum::factorial_log(order, p) + g.source_log_value(k) -
                              ScaledReal::of_ui(k, p) * ln(ScaledReal::of(2, p)));
        ScaledReal mod = modulus(out.derivative.value);
        out.lower_bound_pass = mod >= out.lower_bound;
        ScaledReal margin = mod - out.lower_bound;
        out.inconclusive = !out.lower_bound_pass ||
                           (margin.sign() > 0 && out.derivative.tail_bound > margin.mul_pow2(-1) &&
                            k > g.k_pole());
        if (k <= g.k_pole()) out.inconclusive = false;  // the k-th term is evaluated exactly
    }
    return out;
}

// ---------------------------------------------------------------------------
// Line restriction of the lifted gadget

struct LineQuery {
    ScaledReal gamma;   // |base - center|^2
    ScaledReal beta;    // (base - center) . direction
    ScaledReal delta2;  // gamma - beta^2 >= 0, squared distance center-to-line
};

inline LineQuery line_query(const std::vector<ScaledReal>& center,
                            const std::vector<ScaledReal>& base,
                            const std::vector<ScaledReal>& direction, Precision p) {
    if (center.size() != base.size() || base.size() != direction.size())
        throw DomainError("line_query: dimension mismatch");
    ScaledReal norm2(p);
    for (const auto& d : direction) norm2 = norm2 + d * d;
    if (abs(norm2 - ScaledReal::of(1, p)) > ScaledReal::pow2(-(p.bits / 2), p))
        throw PreconditionError("line_query: direction must be a unit vector");
    LineQuery q;
    q.gamma = ScaledReal(p);
    q.beta = ScaledReal(p);
    for (std::size_t i = 0; i < base.size(); ++i) {
        ScaledReal diff = base[i] - center[i];
        q.gamma = q.gamma + diff * diff;
        q.beta = q.beta + diff * direction[i];
    }
    q.delta2 = max(ScaledReal(p), q.gamma - q.beta * q.beta);
    return q;
}

namespace detail {

// Rigorous modulus ceiling for one pole term of the line-restricted
// derivative, without j! and without the 2^{-k} coefficient:
//   |[(-r+)^{-(j+1)} - (-r-)^{-(j+1)}] / (r+ - r-)| <= floor^{-(j+1)} / sep
// with floor = max(delta, 1/sqrt(2m)) and sep = max(1/sqrt(m), delta0),
// delta0^2 = |beta^2 - gamma|.
inline ScaledReal line_term_ceiling_log(const LineQuery& q, const ScaledReal& m, unsigned order,
                                        Precision p) {
    ScaledReal inv_sqrt_2m = ScaledReal::of(1, p) / sqrt(m.mul_pow2(1));
    ScaledReal floor_r = max(sqrt(q.delta2), inv_sqrt_2m);
    ScaledReal delta0 = sqrt(abs(q.beta * q.beta - q.gamma));
    ScaledReal sep = max(ScaledReal::of(1, p) / sqrt(m), delta0);
    return -(ScaledReal::of(static_cast<long>(order) + 1, p) * ln(floor_r)) - ln(sep);
}

}  // namespace detail

// d^j/ds^j of sum_k coeff_k (q(s) - i/m_k)^{-1} at s = 0, where
// q(s) = gamma + 2 beta s + s^2.  Each pole factors over the two complex
// roots of the quadratic; the larger root comes from the stable branch and
// the smaller from the product identity.
inline DerivativeValue line_restriction_derivative(const Gadget& g,
                                                   const std::vector<ScaledReal>& center,
                                                   const std::vector<ScaledReal>& base,
                                                   const std::vector<ScaledReal>& direction,
                                                   unsigned order,
                                                   const EvalOptions& opt = EvalOptions::none()) {
    Precision p = g.precision();
    LineQuery q = line_query(center, base, direction, p);

    if (q.gamma.is_zero()) {
        // Base point at the center: q(s) = s^2, so odd orders vanish and even
        // orders reduce to the radial identity.
        if (order % 2 == 1) {
            DerivativeValue out;
            out.order = order;
            out.value = ScaledComplex(p);
            return out;
        }
        return lift_radial_center_derivative(g, order).derivative;
    }

    const long j1 = static_cast<long>(order) + 1;
    ScaledReal jfact = xnum::factorial(order, p);
    ScaledReal log_jfact = xnum::factorial_log(order, p);

    std::vector<ScaledComplex> terms;
    terms.reserve(g.poles().size());
    ScaledReal skipped(p);
    ScaledReal log_skip_threshold;
    bool do_skip = opt.skip_below.sign() > 0;
    if (do_skip) log_skip_threshold = ln(opt.skip_below);

    for (const Pole& pole : g.poles()) {
        if (do_skip) {
            ScaledReal log_ceiling = pole.log_coeff + log_jfact +
                                     detail::line_term_ceiling_log(q, pole.m, order, p);
            if (log_ceiling <= log_skip_threshold) {
                skipped = skipped + exp(log_ceiling);
                continue;
            }
        }
        // Roots of s^2 + 2 beta s + (gamma - i/m).
        ScaledComplex c{q.gamma, -(ScaledReal::of(1, p) / pole.m)};
        ScaledComplex disc{q.beta * q.beta - q.gamma, ScaledReal::of(1, p) / pole.m};
        ScaledComplex w = sqrt(disc);
        ScaledComplex ra = ScaledComplex{-q.beta, ScaledReal(p)} + w;
        ScaledComplex rb = ScaledComplex{-q.beta, ScaledReal(p)} - w;
        ScaledComplex rbig = modulus(ra) >= modulus(rb) ? ra : rb;
        ScaledComplex rsmall = c / rbig;
        ScaledComplex num =
            xnum::pow_int(-rbig, -j1) - xnum::pow_int(-rsmall, -j1);
        ScaledComplex den = rbig - rsmall;
        terms.push_back(pole.coeff * (num / den));
    }

    DerivativeValue out;
    out.order = order;
    out.audit = xnum::sum_audited(terms, p);
    ScaledComplex scale{order % 2 == 0 ? jfact : -jfact, ScaledReal(p)};
    out.value = scale * out.audit.result;
    out.audit.result = out.value;
    out.audit.max_term_magnitude = out.audit.max_term_magnitude * jfact;
    out.tail_bound = skipped;

    // Poles beyond K_pole (source-backed gadgets only; a raw gadget is its
    // whole pole list): per-term ceiling with phi(m) >= m when the line
    // misses the center, phi(m) >= m^{j+1}/M_j otherwise.
    ScaledReal pole_tail(p);
    if (g.has_source()) {
        ScaledReal mlast = g.poles().back().m;
        ScaledReal two_pow = ScaledReal::pow2(-static_cast<long>(g.k_pole()), p);
        if (q.delta2.sign() > 0) {
            ScaledReal delta = sqrt(q.delta2);
            pole_tail =
                exp(log_jfact - ScaledReal::of(j1, p) * ln(delta) - ln(mlast).mul_pow2(-1)) *
                two_pow;
        } else {
            ScaledReal log_mj = g.source_log_value(order);
            pole_tail = exp(log_jfact + log_mj +
                            ScaledReal::of(j1, p) * ln(ScaledReal::of(2, p)).mul_pow2(-1) -
                            ScaledReal::of_ui(order, p) * ln(mlast).mul_pow2(-1)) *
                        two_pow;
        }
    }
    out.tail_bound = (out.tail_bound + pole_tail) *
                     (ScaledReal::of(1, p) + ScaledReal::pow2(-40, p));

    if (out.audit.cancellation_loss_bits > detail::cancellation_budget(opt, p))
        throw PrecisionExhaustedError("line_restriction_derivative: cancellation exceeded budget");
    return out;
}

// ---------------------------------------------------------------------------
// Bound verification table

struct GadgetBoundRow {
    unsigned order = 0;
    ScaledReal x;
    ScaledReal modulus_value;
    ScaledReal tail;
    ScaledReal global_bound;   // j! M_j
    ScaledReal decay_bound;    // j! / |x|^{j+1}, x != 0
    ScaledReal center_lower;   // j! M_j / 2^j, x = 0 and 1 <= j <= K_pole
    bool global_ok = false;
    bool decay_ok = true;
    bool lower_ok = true;
    bool lower_applicable = false;
};

struct GadgetBoundsReport {
    std::vector<GadgetBoundRow> rows;
    bool all_pass = true;
    ScaledReal max_relative_tail;  // max over rows of tail / (j! M_j)
};

inline GadgetBoundsReport verify_gadget_bounds(const Gadget& g, unsigned j_max,
                                               const std::vector<ScaledReal>& xs) {
    if (!g.has_source()) throw PreconditionError("verify_gadget_bounds: needs a source sequence");
    Precision p = g.precision();
    ScaledReal slack = ScaledReal::of(1, p) + ScaledReal::pow2(-40, p);

    GadgetBoundsReport rep;
    rep.max_relative_tail = ScaledReal(p);
    for (unsigned j = 0; j <= j_max; ++j) {
        ScaledReal jfact = xnum::factorial(j, p);
        ScaledReal mj = exp(g.source_log_value(j));
        for (const ScaledReal& x : xs) {
            DerivativeValue dv = gadget_derivative(g, j, x.rounded_to(p));
            GadgetBoundRow row;
            row.order = j;
            row.x = x.rounded_to(p);
            row.modulus_value = modulus(dv.value);
            row.tail = dv.tail_bound;
            row.global_bound = jfact * mj;
            row.global_ok = row.modulus_value + row.tail <= row.global_bound * slack;
            if (!x.is_zero()) {
                row.decay_bound = jfact / pow_si(abs(x), static_cast<long>(j) + 1);
                row.decay_ok = row.modulus_value + row.tail <= row.decay_bound * slack;
            } else if (j >= 1 && j <= g.k_pole()) {
                row.lower_applicable = true;
                row.center_lower = row.global_bound.mul_pow2(-static_cast<long>(j));
                row.lower_ok = row.modulus_value >= row.center_lower;
            }
            rep.max_relative_tail = max(rep.max_relative_tail, row.tail / row.global_bound);
            if (!(row.global_ok && row.decay_ok && row.lower_ok)) rep.all_pass = false;
            rep.rows.push_back(std::move(row));
        }
    }
    return rep;
}

}  // namespace qacert::gadget

#endif  // QACERT_GADGET_HPP
