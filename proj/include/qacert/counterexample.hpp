// The assembled counterexample function
//
//     f = sum_{ell>=1} 2^{-ell} f_ell,    f_ell(x) = g_ell(|x - a_ell|^2),
//
// where g_ell is the pole gadget of the padded sequence M^(ell) (1 below
// ell, c_ell^{2k-2ell+1} M_k from ell on) and the centers a_ell sit on the
// flat arc with last coordinate M_ell^{-1/(4 ell)}.  The series is infinite;
// evaluation truncates the ell-sum at an adaptive depth L and certifies the
// remainder from center-distance floors:
//   - computed centers ell in (L, L_limit]: per-term 2^{-ell} j! delta_ell^{-(j+1)},
//     delta_ell = distance from a_ell to the evaluation line;
//   - ell beyond the computed prefix: the centers live in the coordinate box
//     below a_{L_limit}, giving a line-to-box distance floor.
//
// Certificates: diagonal derivative blow-up at the centers (with constants
// c_ell chosen from the off-diagonal sums), non-membership witnesses against
// a target sequence N, and a constant-independent seminorm estimate on grids
// that keep away from the centers.

#ifndef QACERT_COUNTEREXAMPLE_HPP
#define QACERT_COUNTEREXAMPLE_HPP

#include <qacert/gadget.hpp>
#include <qacert/geometry.hpp>
#include <qacert/weights.hpp>
#include <qacert/xnum.hpp>

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace qacert::counterexample {

using xnum::Precision;
using xnum::ScaledComplex;
using xnum::ScaledReal;
using gadget::DerivativeValue;
using gadget::EvalOptions;
using gadget::Gadget;
using geometry::FlatFunction;
using weights::WeightSequence;

struct Center {
    std::vector<ScaledReal> coords;
    ScaledReal t;          // arc parameter
    ScaledReal target;     // M_ell^{-1/(4 ell)}, the prescribed last coordinate
    ScaledReal residual;   // |phi_[n-1](t) - target|
};

struct Config {
    WeightSequence M;
    WeightSequence N;
    std::size_t n = 2;
    std::size_t k_max = 12;
    std::optional<FlatFunction> flat;  // canonical rule when absent
    std::size_t prefix_kmax = 512;     // sequence prefix M_0..M_prefix
    std::size_t k_pole = 0;            // poles per gadget; 0 -> prefix - 1
    // Number of gadget terms in the series; 0 means k_max (the certified
    // rows are then the whole sum).
    std::size_t series_length = 0;
    // Treat the series as infinite: terms are materialized up to the prefix
    // and every evaluation carries a certified tail for the centers beyond
    // it (they live in the coordinate box below the last computed center).
    bool infinite_series = false;
};

struct EvalPolicy {
    EvalPolicy() = default;

    ScaledReal tail_target;  // absolute budget for all unevaluated content
    std::size_t l_cap = 0;   // optional hard cap on the ell-truncation depth

    static EvalPolicy absolute(const ScaledReal& tail) {
        EvalPolicy p;
        p.tail_target = tail;
        return p;
    }
};

struct SeriesEvaluation {
    ScaledComplex value;        // sum over evaluated ells of 2^{-ell} D_ell
    ScaledReal tail;            // certified bound on everything else
    ScaledReal tail_beyond;     // portion of `tail` covering ell > l_used
    long cancellation_bits = 0;
    std::size_t l_used = 0;
    // Per-ell line derivatives D_ell (1-based ell at index ell-1), kept only
    // up to l_used; moduli feed the off-diagonal sums.
    std::vector<ScaledComplex> per_ell;
    std::vector<ScaledReal> per_ell_tail;
};

class CounterexampleFunction {
  public:
    static CounterexampleFunction build(Config cfg) {
        if (cfg.n < 2) throw PreconditionError("counterexample: dimension n must be at least 2");
        if (cfg.k_max < 1) throw PreconditionError("counterexample: k_max must be at least 1");
        Precision p = cfg.M.precision();
        CounterexampleFunction f;
        f.prec_ = p;
        if (!cfg.flat) cfg.flat = FlatFunction::canonical(p);
        if (cfg.k_pole == 0) cfg.k_pole = cfg.prefix_kmax - 1;
        if (cfg.k_pole + 1 > cfg.prefix_kmax)
            throw PreconditionError("counterexample: K_pole needs prefix through K_pole + 1");

        if (cfg.infinite_series) cfg.series_length = cfg.prefix_kmax - 1;
        if (cfg.series_length == 0) cfg.series_length = cfg.k_max;
        if (cfg.series_length < cfg.k_max || cfg.series_length > cfg.prefix_kmax - 1)
            throw PreconditionError("counterexample: series length must lie in [k_max, prefix-1]");

        f.M_ = cfg.M.kmax() >= cfg.prefix_kmax ? cfg.M : cfg.M.extended(cfg.prefix_kmax);
        f.N_ = cfg.N.kmax() >= 2 * cfg.k_max ? cfg.N : cfg.N.extended(2 * cfg.k_max);
        f.cfg_ = cfg;
        f.infinite_ = cfg.infinite_series;

        auto reg = weights::check_regular(f.M_, f.M_.kmax());
        if (!reg.log_convex_ok || !reg.normalization_ok)
            throw PreconditionError("counterexample: M must be a regular weight sequence");
        if (!reg.roots_strictly_increasing)
            throw PreconditionError("counterexample: M_k^{1/k} must be strictly increasing");

        // Centers a_ell for every series term.
        f.l_limit_ = cfg.series_length;
        f.centers_.reserve(f.l_limit_);
        for (std::size_t ell = 1; ell <= f.l_limit_; ++ell)
            f.centers_.push_back(f.solve_center(ell));
        for (std::size_t ell = 0; ell + 1 < f.centers_.size(); ++ell)
            if (!(f.centers_[ell + 1].coords.back() < f.centers_[ell].coords.back()))
                throw PreconditionError("counterexample: center last coordinates must strictly "
                                        "decrease");

        // Provisional constants c_ell = M_ell everywhere.
        f.constants_.reserve(cfg.k_max);
        for (std::size_t k = 1; k <= cfg.k_max; ++k) f.constants_.push_back(f.M_.value(k));
        f.gadgets_ = std::make_shared<std::map<std::size_t, Gadget>>();
        return f;
    }

    // Finite synthetic series for tests: exactly these terms, no ell-tail.
    static CounterexampleFunction synthetic(std::vector<std::vector<ScaledReal>> centers,
                                            std::vector<Gadget> gadgets, Precision p) {
        if (centers.empty() || centers.size() != gadgets.size())
            throw DomainError("synthetic series: centers/gadgets mismatch");
        CounterexampleFunction f;
        f.prec_ = p;
        f.synthetic_ = true;
        f.l_limit_ = centers.size();
        f.gadgets_ = std::make_shared<std::map<std::size_t, Gadget>>();
        for (std::size_t i = 0; i < centers.size(); ++i) {
            Center c;
            c.coords = std::move(centers[i]);
            c.t = ScaledReal(p);
            c.target = c.coords.back();
            c.residual = ScaledReal(p);
            f.centers_.push_back(std::move(c));
            f.gadgets_->emplace(i + 1, std::move(gadgets[i]));
        }
        return f;
    }

    Precision precision() const { return prec_; }
    const Config& config() const { return cfg_; }
    const WeightSequence& M() const { return M_; }
    const WeightSequence& N() const { return N_; }
    std::size_t dimension() const { return synthetic_ ? centers_[0].coords.size() : cfg_.n; }
    std::size_t l_limit() const { return l_limit_; }
    bool infinite_series() const { return infinite_; }
    const Center& center(std::size_t ell) const { return centers_.at(ell - 1); }
    const std::vector<Center>& centers() const { return centers_; }

    // c_ell: chosen for ell <= k_max, M_ell beyond.
    ScaledReal constant(std::size_t ell) const {
        if (synthetic_) throw PreconditionError("synthetic series has no constants");
        if (ell == 0) throw DomainError("constants are 1-based");
        if (ell <= constants_.size()) return constants_[ell - 1];
        return M_.value(ell);
    }
    const std::vector<ScaledReal>& constants() const { return constants_; }

    CounterexampleFunction with_constants(std::vector<ScaledReal> cs) const {
        CounterexampleFunction f = *this;
        if (cs.size() != cfg_.k_max) throw DomainError("with_constants: need k_max values");
        for (std::size_t k = 1; k <= cs.size(); ++k)
            if (cs[k - 1] < M_.value(k))
                throw PreconditionError("with_constants: c_ell must be at least M_ell");
        f.constants_ = std::move(cs);
        f.gadgets_ = std::make_shared<std::map<std::size_t, Gadget>>();  // fresh cache
        return f;
    }

    const Gadget& gadget(std::size_t ell) const {
        auto it = gadgets_->find(ell);
        if (it != gadgets_->end()) return it->second;
        if (synthetic_) throw DomainError("synthetic series: no gadget at this index");
        WeightSequence padded = weights::derive_padded(M_, ell, constant(ell));
        auto [pos, ignored] = gadgets_->emplace(ell, gadget::build_gadget(padded, cfg_.k_pole));
        return pos->second;
    }

    // --- evaluation -------------------------------------------------------

    // Per-ell ceiling 2^{-ell} j! delta^{-(j+1)} for a center at distance
    // delta from the line (phi(m) >= m kills the coefficient sum).
    ScaledReal ell_term_ceiling(std::size_t ell, const std::vector<ScaledReal>& base,
                                const std::vector<ScaledReal>& direction, unsigned order) const {
        Precision p = prec_;
        gadget::LineQuery q = gadget::line_query(center(ell).coords, base, direction, p);
        ScaledReal delta = sqrt(q.delta2);
        if (delta.is_zero())
            throw PreconditionError("ell_term_ceiling: evaluation line passes through center " +
                                    std::to_string(ell));
        return exp(xnum::factorial_log(order, p) -
                   ScaledReal::of(static_cast<long>(order) + 1, p) * ln(delta) -
                   ScaledReal::of_ui(static_cast<unsigned long>(ell), p) *
                       ln(ScaledReal::of(2, p)));
    }

    // Distance floor from the evaluation line to every center beyond the
    // computed prefix (they live in the coordinate box under a_{L_limit}).
    ScaledReal beyond_prefix_line_floor(const std::vector<ScaledReal>& base,
                                        const std::vector<ScaledReal>& direction) const {
        Precision p = prec_;
        const auto& corner = centers_.back().coords;
        // Axis direction: drop that coordinate and measure point-to-box.
        std::ptrdiff_t axis = -1;
        for (std::size_t i = 0; i < direction.size(); ++i) {
            if (abs(direction[i]) == ScaledReal::of(1, p))
                axis = static_cast<std::ptrdiff_t>(i);
            else if (!direction[i].is_zero())
                axis = -2;
        }
        if (axis >= 0) {
            ScaledReal d2(p);
            for (std::size_t i = 0; i < base.size(); ++i) {
                if (static_cast<std::ptrdiff_t>(i) == axis) continue;
                ScaledReal below = -base[i];                  // base_i < 0
                ScaledReal above = base[i] - corner[i];       // base_i > corner_i
                ScaledReal gap = max(ScaledReal(p), max(below, above));
                d2 = d2 + gap * gap;
            }
            return sqrt(d2);
        }
        // General direction: bounding-sphere floor.
        ScaledReal r2(p), c2(p), proj(p);
        std::vector<ScaledReal> mid;
        mid.reserve(corner.size());
        for (const auto& c : corner) mid.push_back(c.mul_pow2(-1));
        for (std::size_t i = 0; i < corner.size(); ++i) r2 = r2 + mid[i] * mid[i];
        for (std::size_t i = 0; i < corner.size(); ++i) {
            ScaledReal diff = mid[i] - base[i];
            c2 = c2 + diff * diff;
            proj = proj + diff * direction[i];
        }
        ScaledReal line_dist = sqrt(max(ScaledReal(p), c2 - proj * proj));
        return max(ScaledReal(p), line_dist - sqrt(r2));
    }

    // Directional derivative of the series along base + s*direction at s=0.
    SeriesEvaluation evaluate_derivative(const std::vector<ScaledReal>& base,
                                         const std::vector<ScaledReal>& direction, unsigned order,
                                         const EvalPolicy& policy) const {
        Precision p = prec_;
        if (base.size() != dimension() || direction.size() != dimension())
            throw DomainError("evaluate_derivative: dimension mismatch");

        // Choose the truncation depth L: walk downward from the series horizon
        // while the per-ell ceilings fit inside half the tail budget; an
        // explicit l_cap forces ceilings below it regardless of budget.  In
        // infinite mode a line-to-box floor covers the centers beyond the
        // computed prefix.
        std::size_t l_cap = policy.l_cap > 0 ? std::min(policy.l_cap, l_limit_) : l_limit_;
        std::size_t L = l_cap;
        ScaledReal beyond_tail(p);
        if (infinite_) {
            ScaledReal floor_dist = beyond_prefix_line_floor(base, direction);
            if (floor_dist.is_zero())
                throw PreconditionError("evaluate_derivative: no distance floor for the center "
                                        "tail beyond the prefix");
            beyond_tail = exp(xnum::factorial_log(order, p) -
                              ScaledReal::of(static_cast<long>(order) + 1, p) * ln(floor_dist) -
                              ScaledReal::of_ui(static_cast<unsigned long>(l_limit_), p) *
                                  ln(ScaledReal::of(2, p)));
        }
        {
            ScaledReal mid_budget = policy.tail_target.mul_pow2(-1) - beyond_tail;
            ScaledReal mid_sum(p);
            std::size_t l = l_limit_;
            std::size_t l_floor = std::max<std::size_t>({2 * order, 16, cfg_.k_max});
            l_floor = std::min(l_floor, l_limit_);
            while (l > l_floor) {
                ScaledReal ceiling = ell_term_ceiling(l, base, direction, order);
                if (l <= l_cap && mid_sum + ceiling > mid_budget) break;
                mid_sum = mid_sum + ceiling;
                --l;
            }
            L = std::min(l, l_cap);
            while (l > L) {  // cap bit before the budget did
                mid_sum = mid_sum + ell_term_ceiling(l, base, direction, order);
                --l;
            }
            beyond_tail = beyond_tail + mid_sum;
        }

        SeriesEvaluation out;
        out.l_used = L;
        out.per_ell.reserve(L);
        out.per_ell_tail.reserve(L);
        std::vector<ScaledComplex> weighted;
        weighted.reserve(L);
        ScaledReal exact_tails(p);
        EvalOptions gopt;
        gopt.skip_below = policy.tail_target.mul_pow2(-14) /
                          ScaledReal::of_ui(static_cast<unsigned long>(L + 1), p);
        for (std::size_t ell = 1; ell <= L; ++ell) {
            DerivativeValue dv = gadget::line_restriction_derivative(
                gadget(ell), center(ell).coords, base, direction, order, gopt);
            out.per_ell.push_back(dv.value);
            out.per_ell_tail.push_back(dv.tail_bound);
            weighted.push_back(ScaledReal::pow2(-static_cast<long>(ell), p) * dv.value);
            exact_tails =
                exact_tails + ScaledReal::pow2(-static_cast<long>(ell), p) * dv.tail_bound;
        }
        xnum::SumAudit audit = xnum::sum_audited(weighted, p);
        out.value = audit.result;
        out.cancellation_bits = audit.cancellation_loss_bits;
        ScaledReal inflate = ScaledReal::of(1, p) + ScaledReal::pow2(-40, p);
        out.tail_beyond = beyond_tail * inflate;
        out.tail = (exact_tails + beyond_tail) * inflate;
        return out;
    }

  private:
    CounterexampleFunction() = default;

    Center solve_center(std::size_t ell) const {
        Precision p = prec_;
        Center c;
        c.target = exp(-(M_.log_value(ell) /
                         ScaledReal::of(4 * static_cast<long>(ell), p)));
        if (!(c.target > ScaledReal(p)) || !(c.target < ScaledReal::of(1, p)))
            throw DomainError("counterexample: center target M_k^{-1/(4k)} outside (0,1); "
                              "prefix too short or M_1 too small");
        const FlatFunction& phi = *cfg_.flat;
        c.t = phi.invert(c.target, cfg_.n - 1);
        c.coords = geometry::arc_point(phi, cfg_.n, c.t);
        c.residual = abs(c.coords.back() - c.target);
        long tol_bits = std::min<long>(128, p.bits - 8);
        if (c.residual > ScaledReal::pow2(-tol_bits, p) * c.target)
            throw PrecisionExhaustedError("counterexample: center residual above tolerance");
        return c;
    }

    Precision prec_;
    Config cfg_;
    WeightSequence M_, N_;
    std::vector<Center> centers_;
    std::vector<ScaledReal> constants_;
    std::shared_ptr<std::map<std::size_t, Gadget>> gadgets_;
    std::size_t l_limit_ = 0;
    bool synthetic_ = false;
    bool infinite_ = false;
};

// ---------------------------------------------------------------------------
// Off-diagonal sums and constants

struct OffDiagonalBound {
    ScaledReal value;  // sum over ell != k of 2^{-ell} |D_ell| plus their tails
    ScaledReal tail;   // portion of `value` that is ceiling rather than exact
    std::size_t l_used = 0;
};

namespace detail {

inline std::vector<ScaledReal> axis_direction(std::size_t n, std::size_t axis, Precision p) {
    std::vector<ScaledReal> d(n, ScaledReal(p));
    d[axis] = ScaledReal::of(1, p);
    return d;
}

inline ScaledReal blowup_target_log(const WeightSequence& M, const WeightSequence& N,
                                    std::size_t k, Precision p) {
    return xnum::factorial_log(2 * static_cast<unsigned long>(k), p) +
           M.log_value_any(2 * k) + N.log_value_any(2 * k);
}

}  // namespace detail

// S_k at the k-th center along e_1, order 2k, excluding the ell = k term.
inline OffDiagonalBound offdiagonal_bound(const CounterexampleFunction& F, std::size_t k,
                                          const EvalPolicy& policy) {
    Precision p = F.precision();
    auto dir = detail::axis_direction(F.dimension(), 0, p);
    SeriesEvaluation ev = F.evaluate_derivative(F.center(k).coords, dir, 2 * static_cast<unsigned>(k),
                                                policy);
    OffDiagonalBound out;
    out.l_used = ev.l_used;
    out.value = ev.tail_beyond;
    out.tail = ev.tail_beyond;
    for (std::size_t ell = 1; ell <= ev.l_used; ++ell) {
        if (ell == k) continue;
        ScaledReal w = ScaledReal::pow2(-static_cast<long>(ell), p);
        out.value = out.value + w * (modulus(ev.per_ell[ell - 1]) + ev.per_ell_tail[ell - 1]);
        out.tail = out.tail + w * ev.per_ell_tail[ell - 1];
    }
    return out;
}

struct ConstantsReport {
    std::vector<ScaledReal> constants;
    std::vector<ScaledReal> s_values;  // final off-diagonal sums per k
    std::size_t iterations = 0;
    bool converged = false;
};

// c_k = max(M_k, 4^k M_{2k} N_{2k} / M_k + 4^k (S_k + slack)/((2k)! M_k)),
// iterated to a fixpoint because S_k is evaluated on the gadgets the
// constants themselves shape.  slack = 1.25 leaves the diagonal-dominance
// margin at least 1 after evaluation tails.
inline ConstantsReport choose_constants(CounterexampleFunction& F,
                                        const EvalPolicy& policy_in = EvalPolicy{}) {
    Precision p = F.precision();
    const std::size_t kmax = F.config().k_max;
    EvalPolicy policy = policy_in;
    if (policy.tail_target.is_zero()) policy.tail_target = ScaledReal::pow2(-8, p);
    ScaledReal slack = ScaledReal::parse("1.25", p);
    ScaledReal ln2 = ln(ScaledReal::of(2, p));

    ConstantsReport rep;
    for (rep.iterations = 1; rep.iterations <= 6; ++rep.iterations) {
        rep.s_values.clear();
        std::vector<ScaledReal> required;
        bool grown = false;
        for (std::size_t k = 1; k <= kmax; ++k) {
            ScaledReal sk = offdiagonal_bound(F, k, policy).value;
            rep.s_values.push_back(sk);
            // log of 4^k M_{2k} N_{2k} / M_k
            ScaledReal first = exp(ScaledReal::of(2 * static_cast<long>(k), p) * ln2 +
                                   F.M().log_value_any(2 * k) + F.N().log_value_any(2 * k) -
                                   F.M().log_value(k));
            ScaledReal second = exp(ScaledReal::of(2 * static_cast<long>(k), p) * ln2 -
                                    xnum::factorial_log(2 * static_cast<unsigned long>(k), p) -
                                    F.M().log_value(k)) *
                                (sk + slack);
            ScaledReal c = max(F.M().value(k), first + second);
            required.push_back(c);
            if (c > F.constant(k)) grown = true;
        }
        if (!grown && rep.iterations > 1) {
            rep.converged = true;
            break;
        }
        std::vector<ScaledReal> next;
        for (std::size_t k = 1; k <= kmax; ++k) next.push_back(max(F.constant(k), required[k - 1]));
        F = F.with_constants(std::move(next));
    }
    rep.constants = F.constants();
    return rep;
}

// ---------------------------------------------------------------------------
// Blow-up certificate

struct BlowupRow {
    std::size_t k = 0;
    ScaledReal total_modulus;  // |sum_ell 2^{-ell} D_ell| over evaluated ells
    ScaledReal tail;
    ScaledReal diag_lower;     // 4^{-k} (2k)! c_k M_k
    ScaledReal offdiag_sum;    // S_k
    ScaledReal target;         // (2k)! M_{2k} N_{2k}
    ScaledReal ratio;          // (|T| - tail) / target
    ScaledReal margin;         // |T| - tail - target
    ScaledReal slack;          // diag_lower - S_k - target (the +1 construction slack)
    long cancellation_bits = 0;
    std::size_t l_used = 0;
    bool pass = false;
    bool inconclusive = false;
};

struct BlowupCertificate {
    std::vector<BlowupRow> rows;
    bool all_pass = false;
    ConstantsReport constants;
};

inline BlowupCertificate blowup_certificate(CounterexampleFunction& F,
                                            const EvalPolicy& policy_in = EvalPolicy{}) {
    Precision p = F.precision();
    EvalPolicy policy = policy_in;
    if (policy.tail_target.is_zero()) policy.tail_target = ScaledReal::pow2(-8, p);

    BlowupCertificate cert;
    cert.constants = choose_constants(F, policy);

    cert.all_pass = true;
    auto dir = detail::axis_direction(F.dimension(), 0, p);
    for (std::size_t k = 1; k <= F.config().k_max; ++k) {
        SeriesEvaluation ev =
            F.evaluate_derivative(F.center(k).coords, dir, 2 * static_cast<unsigned>(k), policy);
        BlowupRow row;
        row.k = k;
        row.l_used = ev.l_used;
        row.cancellation_bits = ev.cancellation_bits;
        row.total_modulus = modulus(ev.value);
        row.tail = ev.tail;
        row.target = exp(detail::blowup_target_log(F.M(), F.N(), k, p));
        row.diag_lower = exp(-(ScaledReal::of(2 * static_cast<long>(k), p) * ln(ScaledReal::of(2, p))) +
                             xnum::factorial_log(2 * static_cast<unsigned long>(k), p) +
                             ln(F.constant(k)) + F.M().log_value(k));
        row.offdiag_sum = ev.tail_beyond;
        for (std::size_t ell = 1; ell <= ev.l_used; ++ell) {
            if (ell == k) continue;
            row.offdiag_sum = row.offdiag_sum +
                              ScaledReal::pow2(-static_cast<long>(ell), p) *
                                  (modulus(ev.per_ell[ell - 1]) + ev.per_ell_tail[ell - 1]);
        }
        row.ratio = (row.total_modulus - row.tail) / row.target;
        row.margin = row.total_modulus - row.tail - row.target;
        row.slack = row.diag_lower - row.offdiag_sum - row.target;
        row.pass = row.margin.sign() >= 0;
        row.inconclusive = !row.pass && row.total_modulus + row.tail >= row.target;
        if (!row.pass) cert.all_pass = false;
        cert.rows.push_back(std::move(row));
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Non-membership witness

struct NonMembershipEntry {
    ScaledReal C;
    ScaledReal rho;
    std::size_t k_witness = 0;   // smallest k with M_{2k} > C rho^{2k}
    bool found = false;
    bool within_prefix = false;  // witness lies inside the stored prefix
    bool verified = false;       // inequality re-checked at the witness
};

struct NonMembershipReport {
    std::vector<NonMembershipEntry> entries;
    bool centers_accumulate_at_zero = false;  // (a_k)_n strictly decreasing on the prefix
    ScaledReal last_center_coordinate;
    bool all_found = false;
};

// Scans k upward (through the generator when the prefix ends) for the
// smallest k with ln M_{2k} > ln C + 2k ln rho.  Sequences without a
// generator stop at the prefix and report not-found.
inline NonMembershipReport non_membership_witness(const CounterexampleFunction& F,
                                                  const std::vector<ScaledReal>& C_grid,
                                                  const std::vector<ScaledReal>& rho_grid,
                                                  std::size_t k_scan_cap = (1u << 26)) {
    Precision p = F.precision();
    const WeightSequence& M = F.M();
    NonMembershipReport rep;

    rep.centers_accumulate_at_zero = true;
    for (std::size_t i = 0; i + 1 < F.centers().size(); ++i)
        if (!(F.centers()[i + 1].coords.back() < F.centers()[i].coords.back()))
            rep.centers_accumulate_at_zero = false;
    rep.last_center_coordinate = F.centers().back().coords.back();

    rep.all_found = true;
    for (const ScaledReal& C : C_grid) {
        for (const ScaledReal& rho : rho_grid) {
            NonMembershipEntry e;
            e.C = C.rounded_to(p);
            e.rho = rho.rounded_to(p);
            ScaledReal lnC = ln(e.C);
            ScaledReal lnrho = ln(e.rho);
            auto exceeds = [&](std::size_t k) {
                ScaledReal rhs = lnC + ScaledReal::of(2 * static_cast<long>(k), p) * lnrho;
                return M.log_value_any(2 * k) > rhs;
            };
            std::size_t prefix_k_cap = M.kmax() / 2;
            std::size_t cap = M.extendable() ? k_scan_cap : prefix_k_cap;
            // Exponential search for some k beyond the crossover.
            std::size_t hi = 1;
            bool found = false;
            try {
                while (hi <= cap) {
                    if (exceeds(hi)) {
                        found = true;
                        break;
                    }
                    if (hi == cap) break;
                    hi = std::min(cap, hi * 2);
                }
                if (found) {
                    std::size_t lo = hi / 2;  // exceeds(lo) is false (or lo == 0)
                    while (lo + 1 < hi) {
                        std::size_t mid = lo + (hi - lo) / 2;
                        if (exceeds(mid))
                            hi = mid;
                        else
                            lo = mid;
                    }
                    // Scan down in case of non-monotone prefixes.
                    while (hi > 1 && exceeds(hi - 1)) --hi;
                    e.k_witness = hi;
                    e.found = true;
                    e.within_prefix = 2 * hi <= M.kmax();
                    e.verified = exceeds(hi) && (hi == 1 || !exceeds(hi - 1));
                }
            } catch (const InsufficientPrefixError&) {
                e.found = false;
            }
            if (!e.found) rep.all_found = false;
            rep.entries.push_back(std::move(e));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Seminorm estimate on a grid away from the centers

struct SeminormHypothesis {
    std::size_t k0 = 0;                  // hypothesis holds for k > k0
    std::vector<std::size_t> violations; // all k with dist(a_k, K) < M_k^{-1/(4k)}
    bool tail_ok = false;                // box floor covers every center beyond the prefix
    ScaledReal box_distance;
};

struct SeminormEstimate {
    SeminormHypothesis hypothesis;
    bool estimate_valid = false;  // false when the hypothesis is violated
    ScaledReal rho;
    ScaledReal certified_sup;  // constant-independent upper estimate of the seminorm
    ScaledReal exact_sup;      // diagnostic: exact evaluation at the current constants
    ScaledReal ceiling_share;  // largest constant-dependent ceiling's share of certified_sup
    unsigned argmax_order = 0;
    std::size_t argmax_point = 0;
};

namespace detail {

// Exact unit-pole (m = 1) line term of one lifted gadget; the c-free part.
inline ScaledComplex unit_pole_line_term(const gadget::LineQuery& q, unsigned order, Precision p) {
    const long j1 = static_cast<long>(order) + 1;
    ScaledComplex c{q.gamma, -ScaledReal::of(1, p)};
    ScaledComplex disc{q.beta * q.beta - q.gamma, ScaledReal::of(1, p)};
    ScaledComplex w = sqrt(disc);
    ScaledComplex ra = ScaledComplex{-q.beta, ScaledReal(p)} + w;
    ScaledComplex rb = ScaledComplex{-q.beta, ScaledReal(p)} - w;
    ScaledComplex rbig = modulus(ra) >= modulus(rb) ? ra : rb;
    ScaledComplex rsmall = c / rbig;
    return (xnum::pow_int(-rbig, -j1) - xnum::pow_int(-rsmall, -j1)) / (rbig - rsmall);
}

}  // namespace detail

// Constant-independent certified bound on |d^j/ds^j f(base + s e_axis)(0)|:
// the flat-block poles at i (coefficient 1 - 2^{-(ell-2)}, independent of
// c_ell) are evaluated exactly; all constant-dependent poles are absorbed
// into the c-free ceiling j! delta^{-(j+1)} 2^{-max(ell-2,0)} / M_ell, valid
// because every such pole has quotient at least M_ell^2.
struct CertifiedLineBound {
    ScaledReal upper;
    ScaledReal ceiling_part;
};

inline CertifiedLineBound certified_line_bound(const CounterexampleFunction& F,
                                               const std::vector<ScaledReal>& base,
                                               std::size_t axis, unsigned order,
                                               std::size_t L) {
    Precision p = F.precision();
    L = std::min(L, F.l_limit());
    auto dir = detail::axis_direction(F.dimension(), axis, p);
    ScaledReal jfact = xnum::factorial(order, p);
    ScaledReal log_jfact = xnum::factorial_log(order, p);

    std::vector<ScaledComplex> unit_terms;
    ScaledReal ceilings(p);
    for (std::size_t ell = 1; ell <= L; ++ell) {
        gadget::LineQuery q = gadget::line_query(F.center(ell).coords, base, dir, p);
        ScaledReal delta = sqrt(q.delta2);
        if (delta.is_zero())
            throw PreconditionError("certified_line_bound: grid line passes through center " +
                                    std::to_string(ell));
        ScaledReal w = ScaledReal::pow2(-static_cast<long>(ell), p);
        if (ell >= 3) {
            ScaledReal coeff = ScaledReal::of(1, p) -
                               ScaledReal::pow2(-static_cast<long>(ell - 2), p);
            unit_terms.push_back((w * coeff) * detail::unit_pole_line_term(q, order, p));
        }
        long shift = ell >= 2 ? -static_cast<long>(ell - 2) : 0;
        ScaledReal ceil_ell = exp(log_jfact -
                                  ScaledReal::of(static_cast<long>(order) + 1, p) * ln(delta) -
                                  F.M().log_value(ell)) *
                              ScaledReal::pow2(shift, p);
        ceilings = ceilings + w * ceil_ell;
    }
    // Tail beyond L: computed-center ceilings through the series horizon and,
    // in infinite mode, a line-to-box floor for everything past the prefix.
    for (std::size_t ell = L + 1; ell <= F.l_limit(); ++ell)
        ceilings = ceilings + F.ell_term_ceiling(ell, base, dir, order);
    if (F.infinite_series()) {
        ScaledReal floor_dist = F.beyond_prefix_line_floor(base, dir);
        if (floor_dist.is_zero())
            throw PreconditionError("certified_line_bound: no box floor beyond the prefix");
        ceilings = ceilings +
                   exp(log_jfact -
                       ScaledReal::of(static_cast<long>(order) + 1, p) * ln(floor_dist) -
                       ScaledReal::of_ui(static_cast<unsigned long>(F.l_limit()), p) *
                           ln(ScaledReal::of(2, p)));
    }

    xnum::SumAudit audit = xnum::sum_audited(unit_terms, p);
    CertifiedLineBound out;
    out.ceiling_part = ceilings * (ScaledReal::of(1, p) + ScaledReal::pow2(-40, p));
    out.upper = jfact * modulus(audit.result) + out.ceiling_part;
    return out;
}

inline SeminormEstimate seminorm_estimate(const CounterexampleFunction& F,
                                          const std::vector<std::vector<ScaledReal>>& grid,
                                          const ScaledReal& rho, unsigned alpha_max,
                                          std::size_t L = 64, bool with_exact_diagnostic = true) {
    if (grid.empty()) throw PreconditionError("seminorm_estimate: empty grid");
    Precision p = F.precision();
    L = std::min(L, F.l_limit());
    SeminormEstimate est;
    est.rho = rho.rounded_to(p);

    // Hypothesis: dist(a_k, K) >= M_k^{-1/(4k)} for k > k0.
    for (std::size_t k = 1; k <= F.l_limit(); ++k) {
        ScaledReal best;
        bool have = false;
        for (const auto& x : grid) {
            ScaledReal d2(p);
            for (std::size_t i = 0; i < x.size(); ++i) {
                ScaledReal diff = x[i] - F.center(k).coords[i];
                d2 = d2 + diff * diff;
            }
            ScaledReal d = sqrt(d2);
            if (!have || d < best) {
                best = d;
                have = true;
            }
        }
        if (best < F.center(k).target) est.hypothesis.violations.push_back(k);
    }
    est.hypothesis.k0 =
        est.hypothesis.violations.empty() ? 0 : est.hypothesis.violations.back();
    if (F.infinite_series()) {
        // Beyond the prefix: the box floor must dominate the (decreasing) targets.
        const auto& corner = F.centers().back().coords;
        ScaledReal boxd(p);
        bool have = false;
        for (const auto& x : grid) {
            ScaledReal d2(p);
            for (std::size_t i = 0; i < x.size(); ++i) {
                ScaledReal below = -x[i];
                ScaledReal above = x[i] - corner[i];
                ScaledReal gap = max(ScaledReal(p), max(below, above));
                d2 = d2 + gap * gap;
            }
            ScaledReal d = sqrt(d2);
            if (!have || d < boxd) {
                boxd = d;
                have = true;
            }
        }
        est.hypothesis.box_distance = boxd;
        est.hypothesis.tail_ok = boxd >= F.centers().back().target;
    } else {
        est.hypothesis.box_distance = ScaledReal(p);
        est.hypothesis.tail_ok = true;  // every center is materialized
    }

    est.certified_sup = ScaledReal(p);
    est.exact_sup = ScaledReal(p);
    est.ceiling_share = ScaledReal(p);
    // A grid that touches (or crowds) a center cannot be certified; report
    // the violating indices and stop.
    if (!est.hypothesis.violations.empty() || !est.hypothesis.tail_ok) return est;
    est.estimate_valid = true;
    EvalPolicy exact_policy = EvalPolicy::absolute(ScaledReal::pow2(-64, p));
    exact_policy.l_cap = L;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        for (std::size_t axis = 0; axis < F.dimension(); ++axis) {
            for (unsigned j = 0; j <= alpha_max; ++j) {
                ScaledReal denom = exp(ScaledReal::of_ui(j, p) * ln(est.rho) +
                                       xnum::factorial_log(j, p) + F.M().log_value_any(j));
                CertifiedLineBound cb = certified_line_bound(F, grid[gi], axis, j, L);
                ScaledReal ratio = cb.upper / denom;
                if (ratio > est.certified_sup) {
                    est.certified_sup = ratio;
                    est.argmax_order = j;
                    est.argmax_point = gi;
                }
                est.ceiling_share = max(est.ceiling_share, cb.ceiling_part / cb.upper);
                if (with_exact_diagnostic) {
                    auto dir = detail::axis_direction(F.dimension(), axis, p);
                    SeriesEvaluation ev = F.evaluate_derivative(grid[gi], dir, j, exact_policy);
                    ScaledReal exact_ratio = (modulus(ev.value) + ev.tail) / denom;
                    est.exact_sup = max(est.exact_sup, exact_ratio);
                }
            }
        }
    }
    return est;
}

}  // namespace qacert::counterexample

#endif  // QACERT_COUNTEREXAMPLE_HPP
