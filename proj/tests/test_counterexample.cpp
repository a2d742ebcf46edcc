#include <doctest.h>

#include <qacert/counterexample.hpp>

#include <cmath>

using namespace qacert;
using namespace qacert::xnum;
using namespace qacert::counterexample;

namespace {

bool rel_close(const ScaledReal& a, const ScaledReal& b, const ScaledReal& tol) {
    if (b.is_zero()) return abs(a) <= tol;
    return abs(a - b) <= tol * abs(b);
}

Config small_config(std::size_t k_max = 4, std::size_t prefix = 160, std::size_t n = 2) {
    Config cfg;
    cfg.M = weights::catalog_log_power(ScaledReal::of(1), prefix);
    cfg.N = weights::catalog_constant_one(2 * k_max + 2);
    cfg.n = n;
    cfg.k_max = k_max;
    cfg.prefix_kmax = prefix;
    return cfg;
}

std::vector<ScaledReal> e1(std::size_t n, Precision p = Precision::dflt()) {
    std::vector<ScaledReal> d(n, ScaledReal(p));
    d[0] = ScaledReal::of(1, p);
    return d;
}

}  // namespace

TEST_CASE("build: centers on the arc with prescribed last coordinate") {
    auto F = CounterexampleFunction::build(small_config());
    // (a_1)_2 = M_1^{-1/4} = (log(1+e))^{-1/4}
    ScaledReal expected = exp(-(ln(ln(ScaledReal::of(1) + exp(ScaledReal::of(1)))) /
                                ScaledReal::of(4)));
    CHECK(rel_close(F.center(1).coords.back(), expected, ScaledReal::pow2(-120)));
    CHECK(rel_close(expected, ScaledReal::parse("0.93414"), ScaledReal::parse("1e-5")));

    for (std::size_t ell = 1; ell <= F.l_limit(); ++ell) {
        const auto& c = F.center(ell);
        CHECK(c.residual <= ScaledReal::pow2(-128) * c.target);
        // Coordinates ordered t >= phi(t) >= ...
        for (std::size_t i = 0; i + 1 < c.coords.size(); ++i)
            CHECK(c.coords[i] >= c.coords[i + 1]);
    }
    // Last coordinates strictly decrease across ell.
    for (std::size_t ell = 1; ell < F.l_limit(); ++ell)
        CHECK(F.center(ell).coords.back() > F.center(ell + 1).coords.back());
}

TEST_CASE("build: precondition failures") {
    auto cfg = small_config();
    cfg.n = 1;
    CHECK_THROWS_AS(CounterexampleFunction::build(cfg), PreconditionError);

    auto bad = small_config();
    bad.M = weights::catalog_constant_one(64);
    bad.prefix_kmax = 64;
    CHECK_THROWS_AS(CounterexampleFunction::build(bad), PreconditionError);

    // gevrey has M_1 = 1, so the first center target hits the boundary.
    auto gev = small_config();
    gev.M = weights::catalog_gevrey(ScaledReal::of(2), 64);
    gev.prefix_kmax = 64;
    CHECK_THROWS_AS(CounterexampleFunction::build(gev), DomainError);
}

TEST_CASE("offdiagonal_bound: k_max = 1 series has an empty off-diagonal sum") {
    auto F = CounterexampleFunction::build(small_config(1, 64));
    auto s1 = offdiagonal_bound(F, 1, EvalPolicy::absolute(ScaledReal::pow2(-20)));
    CHECK(s1.value.is_zero());  // single term, nothing off the diagonal, no tail
}

TEST_CASE("choose_constants: formula floor and k_max = 1 closed form") {
    auto F = CounterexampleFunction::build(small_config(1, 64));
    auto rep = choose_constants(F);
    CHECK(rep.converged);
    REQUIRE(rep.constants.size() == 1);
    // c_1 = max(M_1, 4 M_2 N_2 / M_1 + 4 (S_1 + slack)/(2! M_1)) with S_1 = 0.
    const auto& M = F.M();
    ScaledReal expected = max(M.value(1), ScaledReal::of(4) * M.value(2) / M.value(1) +
                                              ScaledReal::of(4) * ScaledReal::parse("1.25") /
                                                  (ScaledReal::of(2) * M.value(1)));
    CHECK(rel_close(rep.constants[0], expected, ScaledReal::pow2(-200)));
    CHECK(rep.constants[0] >= M.value(1));
}

TEST_CASE("blowup_certificate: small run passes with margin and slack") {
    auto F = CounterexampleFunction::build(small_config(4, 160));
    auto cert = blowup_certificate(F);
    CHECK(cert.all_pass);
    CHECK(cert.constants.converged);
    for (const auto& row : cert.rows) {
        CHECK(row.pass);
        CHECK(row.ratio >= ScaledReal::of(1));
        CHECK(row.margin >= ScaledReal::of(1));
        CHECK(row.slack >= ScaledReal::of(1));
        CHECK(row.cancellation_bits < 128);
        // Diagonal dominance: the certified modulus clears the target.
        CHECK(row.total_modulus - row.tail >= row.target);
    }
    // All constants at least M_k.
    for (std::size_t k = 1; k <= 4; ++k) CHECK(F.constant(k) >= F.M().value(k));
}

TEST_CASE("blowup_certificate: N = M also passes") {
    auto cfg = small_config(3, 160);
    cfg.N = weights::catalog_log_power(ScaledReal::of(1), 160);
    auto F = CounterexampleFunction::build(cfg);
    auto cert = blowup_certificate(F);
    CHECK(cert.all_pass);
}

TEST_CASE("blowup_certificate: huge N absorbs into the constants") {
    auto cfg = small_config(3, 160);
    std::vector<ScaledReal> nvals;
    for (long k = 0; k <= 8; ++k) nvals.push_back(ScaledReal::pow2(k * k));
    cfg.N = weights::from_table(nvals);
    auto F = CounterexampleFunction::build(cfg);
    auto cert = blowup_certificate(F);
    CHECK(cert.all_pass);
    // N_2k = 2^{4k^2} forces visibly larger constants than N = 1.
    auto Fone = CounterexampleFunction::build(small_config(3, 160));
    auto cert_one = blowup_certificate(Fone);
    for (std::size_t k = 1; k <= 3; ++k) CHECK(F.constant(k) > Fone.constant(k));
}

TEST_CASE("blowup_certificate: doubling the precision never flips a verdict") {
    std::vector<bool> verdicts;
    for (int bits : {128, 256}) {
        Precision p{bits};
        Config cfg;
        cfg.M = weights::catalog_log_power(ScaledReal::of(1, p), 64, p);
        cfg.N = weights::catalog_constant_one(8, p);
        cfg.n = 2;
        cfg.k_max = 2;
        cfg.prefix_kmax = 64;
        auto F = CounterexampleFunction::build(cfg);
        auto cert = blowup_certificate(F);
        if (verdicts.empty()) {
            for (const auto& r : cert.rows) verdicts.push_back(r.pass);
        } else {
            for (std::size_t i = 0; i < cert.rows.size(); ++i)
                CHECK(cert.rows[i].pass == verdicts[i]);
        }
        CHECK(cert.all_pass);
    }
}

TEST_CASE("blowup_certificate: infinite series mode agrees on verdicts") {
    auto cfg = small_config(3, 96);
    cfg.infinite_series = true;
    auto F = CounterexampleFunction::build(cfg);
    CHECK(F.l_limit() == 95);
    auto cert = blowup_certificate(F);
    CHECK(cert.all_pass);
    for (const auto& row : cert.rows) CHECK(row.margin >= ScaledReal::of(1));
}

TEST_CASE("evaluate_derivative: triangle inequality far from the centers") {
    auto F = CounterexampleFunction::build(small_config(4, 96));
    Precision p = F.precision();
    std::vector<ScaledReal> far = {ScaledReal::of(-3), ScaledReal::of(2)};
    auto ev = F.evaluate_derivative(far, e1(2), 0, EvalPolicy::absolute(ScaledReal::pow2(-30)));
    // |f(x)| <= sum_ell 2^{-ell} / dist_ell + tail.
    ScaledReal bound = ev.tail;
    for (std::size_t ell = 1; ell <= F.l_limit(); ++ell) {
        ScaledReal d2(p);
        for (std::size_t i = 0; i < 2; ++i) {
            ScaledReal diff = far[i] - F.center(ell).coords[i];
            d2 = d2 + diff * diff;
        }
        bound = bound + ScaledReal::pow2(-static_cast<long>(ell), p) / d2;
    }
    CHECK(modulus(ev.value) <= bound * (ScaledReal::of(1) + ScaledReal::pow2(-40)));
}

TEST_CASE("evaluate_derivative: mirror symmetry of a synthetic configuration") {
    Precision p = Precision::dflt();
    auto lp = weights::catalog_log_power(ScaledReal::of(1), 48);
    auto g = gadget::build_gadget(lp, 32);
    // Centers symmetric under x1 -> -x1, same gadget on both.
    std::vector<std::vector<ScaledReal>> centers = {
        {ScaledReal::parse("0.4"), ScaledReal::parse("0.3")},
        {ScaledReal::parse("-0.4"), ScaledReal::parse("0.3")}};
    auto F = CounterexampleFunction::synthetic(centers, {g, g}, p);

    std::vector<ScaledReal> x = {ScaledReal::parse("0.15"), ScaledReal::parse("-0.2")};
    std::vector<ScaledReal> xm = {ScaledReal::parse("-0.15"), ScaledReal::parse("-0.2")};
    auto swapped = CounterexampleFunction::synthetic({centers[1], centers[0]}, {g, g}, p);
    for (unsigned j : {0u, 1u, 4u, 7u}) {
        auto a = F.evaluate_derivative(x, e1(2), j, EvalPolicy::absolute(ScaledReal::pow2(-40)));
        auto b = swapped.evaluate_derivative(xm, e1(2), j,
                                             EvalPolicy::absolute(ScaledReal::pow2(-40)));
        // Reflection flips the sign of odd orders; moduli agree exactly.
        CHECK(modulus(a.value) == modulus(b.value));
    }
}

TEST_CASE("offdiagonal sums shrink when the centers move apart") {
    Precision p = Precision::dflt();
    auto lp = weights::catalog_log_power(ScaledReal::of(1), 48);
    auto g = gadget::build_gadget(lp, 32);
    auto near_cfg = CounterexampleFunction::synthetic(
        {{ScaledReal::parse("0.5"), ScaledReal::parse("0.5")},
         {ScaledReal::parse("0.5"), ScaledReal::parse("0.58")}},
        {g, g}, p);
    auto far_cfg = CounterexampleFunction::synthetic(
        {{ScaledReal::parse("0.5"), ScaledReal::parse("0.5")},
         {ScaledReal::parse("0.5"), ScaledReal::parse("1.4")}},
        {g, g}, p);
    auto policy = EvalPolicy::absolute(ScaledReal::pow2(-40));
    auto s_near = offdiagonal_bound(near_cfg, 1, policy);
    auto s_far = offdiagonal_bound(far_cfg, 1, policy);
    CHECK(s_far.value < s_near.value);

    // Distance ceiling: 2^{-2} j! delta^{-(j+1)} dominates the two-gadget sum.
    gadget::LineQuery q = gadget::line_query(far_cfg.center(2).coords, far_cfg.center(1).coords,
                                             e1(2, p), p);
    ScaledReal delta = sqrt(q.delta2);
    ScaledReal ceiling = ScaledReal::pow2(-2, p) * factorial(2, p) /
                         pow_si(delta, 3);
    CHECK(s_far.value <= ceiling * (ScaledReal::of(1, p) + ScaledReal::pow2(-30, p)));
}

TEST_CASE("est-style bounds on the padded gadgets themselves") {
    auto F = CounterexampleFunction::build(small_config(4, 96));
    // Orders below ell see M^(ell)_j = 1, so the 1-D sup bound
    // collapses to j! (1 + tail slack).
    for (std::size_t ell : {3ul, 4ul}) {
        const auto& g = F.gadget(ell);
        for (unsigned j = 0; j < static_cast<unsigned>(ell); ++j) {
            for (const char* xs : {"0", "0.5", "-2"}) {
                auto dv = gadget::gadget_derivative(g, j, ScaledReal::parse(xs));
                CHECK(modulus(dv.value) + dv.tail_bound <=
                      factorial(j) * (ScaledReal::of(1) + ScaledReal::pow2(-40)));
            }
        }
    }
    // Center lower bound: |d^{2k}/dx1^{2k} f_ell(a_ell)| >= (2k)! M^(ell)_k / 2^k.
    for (std::size_t ell = 1; ell <= 4; ++ell) {
        const auto& g = F.gadget(ell);
        for (unsigned k = 1; k <= 12; ++k) {
            auto lift = gadget::lift_radial_center_derivative(g, 2 * k);
            CHECK(lift.lower_bound_pass);
        }
    }
}

TEST_CASE("smoothness proxy: fixed order stays bounded along the center tail") {
    auto cfg = small_config(6, 160);
    auto F = CounterexampleFunction::build(cfg);
    blowup_certificate(F);  // install final constants
    Precision p = F.precision();
    // Blow-up lives at order 2k matched to a_k; at fixed order 4 the values
    // along the later centers (2k > 4) stay within a fixed multiple of 4! M_4.
    ScaledReal worst(p);
    for (std::size_t k = 3; k <= 6; ++k) {
        auto ev = F.evaluate_derivative(F.center(k).coords, e1(2), 4,
                                        EvalPolicy::absolute(ScaledReal::pow2(-20)));
        worst = max(worst, modulus(ev.value) + ev.tail);
    }
    CHECK(worst <= ScaledReal::of(64) * factorial(4, p) * exp(F.M().log_value(4)));
    // And at the matching diagonal (k = 2, order 4) the value sits above
    // everything along the tail.
    auto diag = F.evaluate_derivative(F.center(2).coords, e1(2), 4,
                                      EvalPolicy::absolute(ScaledReal::pow2(-20)));
    CHECK(modulus(diag.value) > worst);
}

TEST_CASE("non_membership_witness: headline grid") {
    auto F = CounterexampleFunction::build(small_config(4, 512));
    std::vector<ScaledReal> Cs = {ScaledReal::of(1), ScaledReal::parse("1e3"),
                                  ScaledReal::parse("1e6")};
    std::vector<ScaledReal> rhos = {ScaledReal::of(1), ScaledReal::of(4), ScaledReal::of(16)};
    auto rep = non_membership_witness(F, Cs, rhos);
    CHECK(rep.all_found);
    CHECK(rep.centers_accumulate_at_zero);
    for (const auto& e : rep.entries) {
        CHECK(e.found);
        CHECK(e.verified);
    }
    // C = rho = 1: (log(2k+e))^{2k} > 1 already at k = 1.
    CHECK(rep.entries[0].k_witness == 1);
    CHECK(rep.entries[0].within_prefix);
    // rho = 16 witnesses are astronomically beyond the prefix.
    CHECK(rep.entries[2].found);
    CHECK(!rep.entries[2].within_prefix);
    CHECK(rep.entries[2].k_witness > 1000000);
}

TEST_CASE("non_membership_witness: table-backed sequences stop at the prefix") {
    Precision p = Precision::dflt();
    std::vector<ScaledReal> ones(65, ScaledReal::of(1, p));
    auto cfg = small_config(2, 64);
    auto F = CounterexampleFunction::build(cfg);
    // A constant table cannot produce a witness at rho >= 2: report not-found.
    Config c2 = cfg;
    c2.M = weights::catalog_log_power(ScaledReal::of(1), 64);
    auto F2 = CounterexampleFunction::build(c2);
    auto rep = non_membership_witness(F2, {ScaledReal::of(1)}, {ScaledReal::of(16)});
    CHECK(rep.all_found);  // generator extends past the prefix

    // Swap in a table prefix of the same values: the scan must stop and say so.
    std::vector<ScaledReal> vals;
    for (std::size_t k = 0; k <= 64; ++k) vals.push_back(F2.M().value(k));
    Config c3 = cfg;
    c3.M = weights::from_table(vals);
    c3.prefix_kmax = 64;
    auto F3 = CounterexampleFunction::build(c3);
    auto rep3 = non_membership_witness(F3, {ScaledReal::of(1)}, {ScaledReal::of(16)});
    CHECK(!rep3.all_found);
    CHECK(!rep3.entries[0].found);
}

TEST_CASE("seminorm_estimate: hypothesis, certification, and c-independence") {
    auto cfg = small_config(4, 128);
    auto F = CounterexampleFunction::build(cfg);
    blowup_certificate(F);
    Precision p = F.precision();

    // Grid on a small annulus centered at (-1.2, 0): radii in [0.45, 0.95].
    std::vector<std::vector<ScaledReal>> grid;
    for (int ir = 0; ir < 3; ++ir) {
        ScaledReal r = ScaledReal::parse("0.45") + ScaledReal::of(ir) * ScaledReal::parse("0.25");
        for (int ia = 0; ia < 8; ++ia) {
            ScaledReal c = ScaledReal::parse(std::to_string(std::cos(2.0 * 3.141592653589793 * ia / 8)), p);
            ScaledReal s = ScaledReal::parse(std::to_string(std::sin(2.0 * 3.141592653589793 * ia / 8)), p);
            grid.push_back({ScaledReal::parse("-1.2", p) + r * c, r * s});
        }
    }

    auto est = seminorm_estimate(F, grid, ScaledReal::of(4), 10, 4);
    CHECK(est.hypothesis.k0 == 0);
    CHECK(est.hypothesis.violations.empty());
    CHECK(est.hypothesis.tail_ok);
    CHECK(est.certified_sup.is_finite());
    CHECK(est.exact_sup <= est.certified_sup * (ScaledReal::of(1) + ScaledReal::pow2(-40)));

    // Doubling every constant: certified estimate is bit-identical.
    std::vector<ScaledReal> doubled;
    for (std::size_t k = 1; k <= 4; ++k) doubled.push_back(F.constant(k).mul_pow2(1));
    auto F2 = F.with_constants(doubled);
    auto est2 = seminorm_estimate(F2, grid, ScaledReal::of(4), 10, 4);
    CHECK(est2.certified_sup == est.certified_sup);
    // The exact diagnostic moves only inside the constant-dependent ceilings.
    CHECK(abs(est2.exact_sup - est.exact_sup) <=
          (est.ceiling_share + est2.ceiling_share) * est.certified_sup);

    // Injecting a center into the grid trips the hypothesis at that index.
    auto bad_grid = grid;
    bad_grid.push_back(F.center(3).coords);
    auto est_bad = seminorm_estimate(F, bad_grid, ScaledReal::of(4), 2, 4, false);
    CHECK(!est_bad.hypothesis.violations.empty());
    CHECK(est_bad.hypothesis.k0 >= 3);
    bool has3 = false;
    for (auto v : est_bad.hypothesis.violations) has3 |= (v == 3);
    CHECK(has3);
}
