// Weight functions omega: condition diagnostics, the Young conjugate
// phi*(t) = sup_{s>=0} (st - omega(e^s)), the seminorm weight
// exp(-(1/rho) phi*(rho j)), the quasianalyticity integral, and the
// associated one-parameter sequence family M^x_k = exp((1/x) phi*(xk)) / k!.

#ifndef QACERT_OMEGA_HPP
#define QACERT_OMEGA_HPP

#include <qacert/weights.hpp>
#include <qacert/xnum.hpp>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace qacert::omega {

using xnum::Precision;
using xnum::ScaledReal;
using weights::GrowthClass;
using weights::WeightSequence;

struct OmegaDescriptor {
    std::string kind;  // "catalog" | "table"
    std::string name;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::pair<std::string, std::string>> samples;  // (t, omega(t))
};

namespace detail {

// Monotone cubic interpolation (Fritsch-Carlson slopes) through increasing
// samples; evaluation clamps to the sampled range.
struct Pchip {
    std::vector<ScaledReal> t, y, slope;

    void build(Precision p) {
        const std::size_t n = t.size();
        std::vector<ScaledReal> d;  // secants
        for (std::size_t i = 0; i + 1 < n; ++i) d.push_back((y[i + 1] - y[i]) / (t[i + 1] - t[i]));
        slope.assign(n, ScaledReal(p));
        if (n == 1) return;
        slope[0] = d[0];
        slope[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1].sign() * d[i].sign() <= 0) {
                slope[i] = ScaledReal(p);
            } else {
                // Harmonic mean keeps the interpolant monotone.
                ScaledReal w1 = (t[i + 1] - t[i]).mul_pow2(1) + (t[i] - t[i - 1]);
                ScaledReal w2 = (t[i + 1] - t[i]) + (t[i] - t[i - 1]).mul_pow2(1);
                slope[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
    }

    ScaledReal eval(const ScaledReal& x) const {
        if (x <= t.front()) return y.front();
        if (x >= t.back()) return y.back();
        std::size_t lo = 0, hi = t.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (t[mid] <= x)
                lo = mid;
            else
                hi = mid;
        }
        ScaledReal h = t[hi] - t[lo];
        ScaledReal u = (x - t[lo]) / h;
        ScaledReal u2 = u * u;
        ScaledReal u3 = u2 * u;
        ScaledReal h00 = u3.mul_pow2(1) - ScaledReal::of(3, x.precision()) * u2 + 1;
        ScaledReal h10 = u3 - u2.mul_pow2(1) + u;
        ScaledReal h01 = ScaledReal::of(3, x.precision()) * u2 - u3.mul_pow2(1);
        ScaledReal h11 = u3 - u2;
        return h00 * y[lo] + h10 * h * slope[lo] + h01 * y[hi] + h11 * h * slope[hi];
    }
};

}  // namespace detail

class WeightFunction {
  public:
    enum class Kind { identity, power, sublog, table };

    // omega(t) = t
    static WeightFunction identity(Precision p = Precision::dflt()) {
        WeightFunction w;
        w.kind_ = Kind::identity;
        w.prec_ = p;
        w.desc_ = {"catalog", "identity", {}, {}};
        return w;
    }
    // omega(t) = t^a, 0 < a < 1 for the genuinely sublinear case
    static WeightFunction power(const ScaledReal& a, Precision p = Precision::dflt()) {
        if (a.sign() <= 0) throw DomainError("power weight: exponent must be positive");
        WeightFunction w;
        w.kind_ = Kind::power;
        w.param_ = a.rounded_to(p);
        w.prec_ = p;
        w.desc_ = {"catalog", "power", {{"a", a.to_decimal()}}, {}};
        return w;
    }
    // omega(t) = t / (1 + log(1+t))
    static WeightFunction sublog(Precision p = Precision::dflt()) {
        WeightFunction w;
        w.kind_ = Kind::sublog;
        w.prec_ = p;
        w.desc_ = {"catalog", "sublog", {}, {}};
        return w;
    }
    static WeightFunction from_samples(const std::vector<ScaledReal>& ts,
                                       const std::vector<ScaledReal>& ys,
                                       Precision p = Precision::dflt()) {
        if (ts.size() != ys.size() || ts.size() < 2)
            throw DomainError("weight table: need matching sample vectors, length >= 2");
        WeightFunction w;
        w.kind_ = Kind::table;
        w.prec_ = p;
        auto pch = std::make_shared<detail::Pchip>();
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (i > 0 && !(ts[i] > ts[i - 1]))
                throw DomainError("weight table: sample abscissae must be strictly increasing");
            if (i > 0 && ys[i] < ys[i - 1])
                throw DomainError("weight table: samples must be nondecreasing");
            pch->t.push_back(ts[i].rounded_to(p));
            pch->y.push_back(ys[i].rounded_to(p));
            w.desc_.samples.emplace_back(ts[i].to_decimal(), ys[i].to_decimal());
        }
        pch->build(p);
        w.table_ = pch;
        w.desc_.kind = "table";
        w.desc_.name = "table";
        return w;
    }
    static WeightFunction catalog(const std::string& name, const std::vector<ScaledReal>& params,
                                  Precision p = Precision::dflt()) {
        if (name == "identity") return identity(p);
        if (name == "sublog") return sublog(p);
        if (name == "power") {
            if (params.size() != 1) throw DomainError("power weight takes one parameter (a)");
            return power(params[0], p);
        }
        throw DomainError("unknown catalog weight function: " + name);
    }

    Precision precision() const { return prec_; }
    const OmegaDescriptor& descriptor() const { return desc_; }

    ScaledReal eval(const ScaledReal& t) const {
        if (t.sign() < 0) throw DomainError("weight function: t must be nonnegative");
        Precision p = prec_;
        switch (kind_) {
            case Kind::identity:
                return t.rounded_to(p);
            case Kind::power:
                if (t.is_zero()) return ScaledReal(p);
                return pow(t.rounded_to(p), param_);
            case Kind::sublog: {
                if (t.is_zero()) return ScaledReal(p);
                ScaledReal tt = t.rounded_to(p);
                return tt / (ScaledReal::of(1, p) + ln(ScaledReal::of(1, p) + tt));
            }
            case Kind::table:
                return table_->eval(t.rounded_to(p));
        }
        throw Error("unreachable weight kind");
    }

    // phi(s) = omega(e^s)
    ScaledReal phi(const ScaledReal& s) const { return eval(exp(s.rounded_to(prec_))); }

  private:
    Kind kind_ = Kind::identity;
    ScaledReal param_;
    Precision prec_ = Precision::dflt();
    std::shared_ptr<const detail::Pchip> table_;
    OmegaDescriptor desc_;
};

// ---------------------------------------------------------------------------
// Condition diagnostics

struct OmegaReport {
    ScaledReal om1_ratio;         // sup omega(2t)/omega(t), t >= 1
    ScaledReal om2_ratio;         // sup omega(t)/t
    ScaledReal om3_gap;           // inf omega(t)/log t over the large-t half of the grid
    bool om3_trend_increasing = false;
    ScaledReal om4_convexity_defect;  // max chord violation of phi on the grid
    ScaledReal concavity_defect;      // max chord violation of omega itself
    std::vector<ScaledReal> small_o_samples;  // omega(t)/t at decade points
    bool small_o_trend_decreasing = false;
};

inline std::vector<ScaledReal> default_omega_grid(Precision p = Precision::dflt(),
                                                  int points_per_decade = 8, int lo_decade = -2,
                                                  int hi_decade = 8) {
    std::vector<ScaledReal> g;
    ScaledReal ten = ScaledReal::of(10, p);
    for (int d = lo_decade; d < hi_decade; ++d) {
        for (int i = 0; i < points_per_decade; ++i) {
            ScaledReal e = ScaledReal::of(d, p) +
                           ScaledReal::of(i, p) / ScaledReal::of(points_per_decade, p);
            g.push_back(pow(ten, e));
        }
    }
    g.push_back(pow(ten, ScaledReal::of(hi_decade, p)));
    return g;
}

inline OmegaReport check_weight_function(const WeightFunction& w,
                                         const std::vector<ScaledReal>& grid) {
    if (grid.size() < 8) throw PreconditionError("check_weight_function: grid too small");
    if (grid.front().sign() <= 0)
        throw PreconditionError("check_weight_function: grid must start above 0");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i + 1] > grid[i]))
            throw PreconditionError("check_weight_function: grid must be strictly increasing");
    if (grid.back() < grid.front() * ScaledReal::parse("1e4", w.precision()))
        throw PreconditionError("check_weight_function: grid must span at least four decades");
    Precision p = w.precision();
    ScaledReal one = ScaledReal::of(1, p);

    std::vector<ScaledReal> vals;
    vals.reserve(grid.size());
    for (const ScaledReal& t : grid) {
        ScaledReal v = w.eval(t);
        if (!vals.empty() && v + ScaledReal::pow2(-(p.bits - 24), p) < vals.back())
            throw PreconditionError("check_weight_function: samples decrease along the grid");
        vals.push_back(v);
    }

    OmegaReport r;
    r.om1_ratio = ScaledReal(p);
    r.om2_ratio = ScaledReal(p);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (vals[i].sign() > 0) r.om2_ratio = max(r.om2_ratio, vals[i] / grid[i]);
        if (grid[i] >= one && vals[i].sign() > 0)
            r.om1_ratio = max(r.om1_ratio, w.eval(grid[i].mul_pow2(1)) / vals[i]);
    }

    // om3 on the upper half of the grid, where log t is comfortably positive.
    std::size_t half = grid.size() / 2;
    bool have = false;
    ScaledReal prev_ratio(p);
    r.om3_trend_increasing = true;
    for (std::size_t i = half; i < grid.size(); ++i) {
        if (grid[i] <= one + one) continue;
        ScaledReal ratio = vals[i] / ln(grid[i]);
        if (!have) {
            r.om3_gap = ratio;
            have = true;
        } else {
            r.om3_gap = min(r.om3_gap, ratio);
            if (ratio < prev_ratio) r.om3_trend_increasing = false;
        }
        prev_ratio = ratio;
    }

    // Convexity defect of phi(s) = omega(e^s) over consecutive grid triples.
    r.om4_convexity_defect = ScaledReal(p);
    r.concavity_defect = ScaledReal(p);
    for (std::size_t i = 0; i + 2 < grid.size(); ++i) {
        ScaledReal s0 = ln(grid[i]), s1 = ln(grid[i + 1]), s2 = ln(grid[i + 2]);
        ScaledReal u = (s1 - s0) / (s2 - s0);
        ScaledReal chord = vals[i] + u * (vals[i + 2] - vals[i]);
        r.om4_convexity_defect = max(r.om4_convexity_defect, vals[i + 1] - chord);

        ScaledReal uo = (grid[i + 1] - grid[i]) / (grid[i + 2] - grid[i]);
        ScaledReal chord_o = vals[i] + uo * (vals[i + 2] - vals[i]);
        r.concavity_defect = max(r.concavity_defect, chord_o - vals[i + 1]);
    }

    // o(t) proxy: ratios never rise along decades and drop by at least 10%
    // overall.  A flat ratio (omega comparable to t) does not qualify.
    have = false;
    ScaledReal first(p), prev(p);
    bool never_rises = true;
    for (std::size_t i = 0; i < grid.size(); i += 8) {
        if (grid[i] < one) continue;
        ScaledReal ratio = vals[i] / grid[i];
        r.small_o_samples.push_back(ratio);
        if (have && ratio > prev * (one + ScaledReal::pow2(-40, p))) never_rises = false;
        if (!have) first = ratio;
        prev = ratio;
        have = true;
    }
    r.small_o_trend_decreasing =
        have && never_rises && prev <= first * ScaledReal::parse("0.9", p);
    return r;
}

// ---------------------------------------------------------------------------
// Young conjugate

struct ConjugateValue {
    ScaledReal value;     // phi*(t)
    ScaledReal argmax_s;  // maximizing s
    bool boundary = false;  // argmax pinned at s_max; caller should raise s_max
};

// phi*(t) = sup_{0 <= s <= s_max} (st - phi(s)) by ternary search on the
// concave objective; 200 iterations leaves the bracket far below 2^-64
// relative.
inline ConjugateValue young_conjugate(const WeightFunction& w, const ScaledReal& t,
                                      const ScaledReal& s_max = ScaledReal::of(80)) {
    if (t.sign() <= 0) throw DomainError("young_conjugate: t must be positive");
    Precision p = w.precision();
    auto objective = [&](const ScaledReal& s) { return s * t - w.phi(s); };

    ScaledReal lo(p);
    ScaledReal hi = s_max.rounded_to(p);
    ScaledReal third = ScaledReal::of(3, p);
    for (int it = 0; it < 200; ++it) {
        ScaledReal m1 = lo + (hi - lo) / third;
        ScaledReal m2 = hi - (hi - lo) / third;
        if (objective(m1) < objective(m2))
            lo = m1;
        else
            hi = m2;
    }
    ConjugateValue out;
    out.argmax_s = (lo + hi).mul_pow2(-1);
    out.value = objective(out.argmax_s);
    // Endpoints can beat the interior bracket when the max sits at s = 0.
    ScaledReal at0 = objective(ScaledReal(p));
    if (at0 >= out.value) {
        out.value = at0;
        out.argmax_s = ScaledReal(p);
    }
    ScaledReal at_max = objective(s_max.rounded_to(p));
    if (at_max > out.value) {
        out.value = at_max;
        out.argmax_s = s_max.rounded_to(p);
    }
    out.boundary = out.argmax_s >= s_max.rounded_to(p) * ScaledReal::parse("0.999", p);
    return out;
}

// exp(-(1/rho) phi*(rho j)); the seminorm denominator weight of order j.
inline ScaledReal omega_seminorm_weight(const WeightFunction& w, const ScaledReal& rho,
                                        unsigned long j,
                                        const ScaledReal& s_max = ScaledReal::of(80)) {
    if (rho.sign() <= 0) throw DomainError("omega_seminorm_weight: rho must be positive");
    Precision p = w.precision();
    ScaledReal t = rho.rounded_to(p) * ScaledReal::of_ui(j, p);
    if (t.is_zero()) t = ScaledReal::pow2(-(p.bits * 2), p);  // j = 0: the t->0+ limit
    ConjugateValue c = young_conjugate(w, t, s_max);
    if (c.boundary)
        throw TruncationDominatedError("omega_seminorm_weight: conjugate hit s_max");
    return exp(-(c.value / rho.rounded_to(p)));
}

// ---------------------------------------------------------------------------
// Quasianalyticity integral

struct QaIntegralReport {
    ScaledReal value;  // integral over [0, T]
    std::vector<ScaledReal> window_increments;  // [T/8,T/4], [T/4,T/2], [T/2,T]
    GrowthClass growth_classification = GrowthClass::inconclusive;
};

namespace detail {

template <typename F>
ScaledReal adaptive_simpson(const F& f, const ScaledReal& a, const ScaledReal& b,
                            const ScaledReal& fa, const ScaledReal& fb, const ScaledReal& fm,
                            const ScaledReal& whole, const ScaledReal& tol, int depth) {
    ScaledReal m = (a + b).mul_pow2(-1);
    ScaledReal lm = (a + m).mul_pow2(-1);
    ScaledReal rm = (m + b).mul_pow2(-1);
    ScaledReal flm = f(lm), frm = f(rm);
    ScaledReal six = ScaledReal::of(6, a.precision());
    ScaledReal left = (m - a) / six * (fa + flm.mul_pow2(2) + fm);
    ScaledReal right = (b - m) / six * (fm + frm.mul_pow2(2) + fb);
    ScaledReal sum = left + right;
    if (depth <= 0 || abs(sum - whole) <= tol) return sum;
    ScaledReal half_tol = tol.mul_pow2(-1);
    return adaptive_simpson(f, a, m, fa, fm, flm, left, half_tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, fb, frm, right, half_tol, depth - 1);
}

template <typename F>
ScaledReal integrate(const F& f, const ScaledReal& a, const ScaledReal& b, const ScaledReal& tol) {
    ScaledReal fa = f(a), fb = f(b);
    ScaledReal m = (a + b).mul_pow2(-1);
    ScaledReal fm = f(m);
    ScaledReal six = ScaledReal::of(6, a.precision());
    ScaledReal whole = (b - a) / six * (fa + fm.mul_pow2(2) + fb);
    return adaptive_simpson(f, a, b, fa, fb, fm, whole, tol, 48);
}

}  // namespace detail

// integral_0^T omega(t)/(1+t^2) dt on dyadic pieces, relative target 1e-12
// per piece; the three-window heuristic mirrors qa_partial_sums.
inline QaIntegralReport qa_integral_partial(const WeightFunction& w, const ScaledReal& T) {
    Precision p = w.precision();
    if (T < ScaledReal::of(1, p)) throw PreconditionError("qa_integral_partial: T must be >= 1");
    auto f = [&](const ScaledReal& t) {
        return w.eval(t) / (ScaledReal::of(1, p) + t * t);
    };
    ScaledReal tol = ScaledReal::parse("1e-14", p);

    // Breakpoints 0, T/2^20, ..., T/2, T keep every piece smooth on a dyadic scale.
    std::vector<ScaledReal> cuts;
    cuts.push_back(ScaledReal(p));
    for (int i = 20; i >= 0; --i) cuts.push_back(T.rounded_to(p).mul_pow2(-i));

    QaIntegralReport rep;
    rep.value = ScaledReal(p);
    ScaledReal at_eighth(p), at_quarter(p), at_half(p);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        rep.value = rep.value + detail::integrate(f, cuts[i], cuts[i + 1], tol * max(ScaledReal::of(1, p), rep.value));
        if (cuts[i + 1] == T.rounded_to(p).mul_pow2(-3)) at_eighth = rep.value;
        if (cuts[i + 1] == T.rounded_to(p).mul_pow2(-2)) at_quarter = rep.value;
        if (cuts[i + 1] == T.rounded_to(p).mul_pow2(-1)) at_half = rep.value;
    }
    rep.window_increments = {at_quarter - at_eighth, at_half - at_quarter, rep.value - at_half};
    rep.growth_classification = weights::detail::classify_windows(rep.window_increments, p);
    return rep;
}

// ---------------------------------------------------------------------------
// Associated one-parameter family

// M^x_k = exp((1/x) phi*(x k)) / k!.  Monotone nondecreasing in x.
inline WeightSequence associated_family_member(const WeightFunction& w, const ScaledReal& x,
                                               std::size_t kmax,
                                               const ScaledReal& s_max = ScaledReal::of(80)) {
    if (x.sign() <= 0) throw DomainError("associated_family_member: x must be positive");
    Precision p = w.precision();
    std::vector<ScaledReal> vals;
    vals.reserve(kmax + 1);
    for (std::size_t k = 0; k <= kmax; ++k) {
        ScaledReal t = x.rounded_to(p) * ScaledReal::of_ui(static_cast<unsigned long>(k), p);
        if (t.is_zero()) t = ScaledReal::pow2(-(p.bits * 2), p);
        ConjugateValue c = young_conjugate(w, t, s_max);
        if (c.boundary)
            throw TruncationDominatedError("associated_family_member: conjugate hit s_max at k=" +
                                           std::to_string(k));
        vals.push_back(exp(c.value / x.rounded_to(p) -
                           xnum::factorial_log(static_cast<unsigned long>(k), p)));
    }
    WeightSequence seq = weights::from_table(vals, p);
    return seq;
}

}  // namespace qacert::omega

#endif  // QACERT_OMEGA_HPP
