#include <doctest.h>

#include <qacert/omega.hpp>

using namespace qacert;
using namespace qacert::xnum;
using namespace qacert::omega;

namespace {

bool rel_close(const ScaledReal& a, const ScaledReal& b, const ScaledReal& tol) {
    if (b.is_zero()) return abs(a) <= tol;
    return abs(a - b) <= tol * abs(b);
}

// Dense-grid oracle for the Young conjugate, independent of the ternary
// search path.
ScaledReal conjugate_grid_oracle(const WeightFunction& w, const ScaledReal& t, double s_hi,
                                 int steps) {
    Precision p = w.precision();
    ScaledReal best(p);
    bool have = false;
    for (int i = 0; i <= steps; ++i) {
        ScaledReal s = ScaledReal::parse(std::to_string(s_hi * i / steps), p);
        ScaledReal v = s * t - w.phi(s);
        if (!have || v > best) {
            best = v;
            have = true;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("omega catalog values") {
    auto id = WeightFunction::identity();
    CHECK(id.eval(ScaledReal::of(3)) == ScaledReal::of(3));

    auto sq = WeightFunction::power(ScaledReal::parse("0.5"));
    CHECK(rel_close(sq.eval(ScaledReal::of(4)), ScaledReal::of(2), ScaledReal::pow2(-240)));

    auto sl = WeightFunction::sublog();
    ScaledReal e = exp(ScaledReal::of(1));
    ScaledReal expected = (e - ScaledReal::of(1)).mul_pow2(-1);
    CHECK(rel_close(sl.eval(e - ScaledReal::of(1)), expected, ScaledReal::pow2(-240)));
    CHECK(rel_close(expected, ScaledReal::parse("0.85914"), ScaledReal::parse("1e-4")));

    CHECK_THROWS_AS(WeightFunction::catalog("mystery", {}), DomainError);
    CHECK(WeightFunction::identity().eval(ScaledReal::of(0)).is_zero());
}

TEST_CASE("check_weight_function on the catalog") {
    auto grid = default_omega_grid();

    auto rid = check_weight_function(WeightFunction::identity(), grid);
    CHECK(rel_close(rid.om1_ratio, ScaledReal::of(2), ScaledReal::pow2(-200)));
    CHECK(rel_close(rid.om2_ratio, ScaledReal::of(1), ScaledReal::pow2(-200)));
    CHECK(rid.concavity_defect <= ScaledReal::pow2(-200));
    CHECK(rid.om4_convexity_defect <= ScaledReal::pow2(-200));
    CHECK(!rid.small_o_trend_decreasing);  // omega(t)/t is flat, not o(t)

    auto rsq = check_weight_function(WeightFunction::power(ScaledReal::parse("0.5")), grid);
    CHECK(rel_close(rsq.om1_ratio, sqrt(ScaledReal::of(2)), ScaledReal::pow2(-150)));
    CHECK(rsq.small_o_trend_decreasing);
    CHECK(rsq.om4_convexity_defect <= ScaledReal::pow2(-200));

    auto rsl = check_weight_function(WeightFunction::sublog(), grid);
    CHECK(rsl.small_o_trend_decreasing);
    CHECK(rsl.concavity_defect <= ScaledReal::pow2(-200));
    CHECK(rsl.om4_convexity_defect <= ScaledReal::pow2(-200));
}

TEST_CASE("young_conjugate: identity weight against the closed form") {
    auto id = WeightFunction::identity();
    ScaledReal e = exp(ScaledReal::of(1));

    // phi*(t) = t ln t - t for t >= 1; at t = e the value is 0 at s = 1.
    auto at_e = young_conjugate(id, e);
    CHECK(abs(at_e.value) <= ScaledReal::parse("1e-30"));
    CHECK(abs(at_e.argmax_s - ScaledReal::of(1)) <= ScaledReal::parse("1e-25"));
    CHECK(!at_e.boundary);

    for (const char* ts : {"5", "50"}) {
        ScaledReal t = ScaledReal::parse(ts);
        auto c = young_conjugate(id, t);
        ScaledReal closed = t * ln(t) - t;
        CHECK(rel_close(c.value, closed, ScaledReal::parse("1e-15")));
        CHECK(c.value >= conjugate_grid_oracle(id, t, 6.0, 2000) - ScaledReal::parse("1e-20"));
    }

    // t = 1: supremum sits at the boundary s = 0 with value -1.
    auto at1 = young_conjugate(id, ScaledReal::of(1));
    CHECK(rel_close(at1.value, -ScaledReal::of(1), ScaledReal::parse("1e-30")));
    CHECK(at1.argmax_s.is_zero());

    // t -> 0+: the conjugate tends to -phi(0) = -omega(1) = -1.
    auto small = young_conjugate(id, ScaledReal::parse("1e-35"));
    CHECK(rel_close(small.value, -ScaledReal::of(1), ScaledReal::parse("1e-30")));
}

TEST_CASE("young_conjugate: boundary flag when s_max is too small") {
    auto id = WeightFunction::identity();
    auto c = young_conjugate(id, ScaledReal::of(100), ScaledReal::of(2));
    CHECK(c.boundary);  // true argmax ln 100 > 2
}

TEST_CASE("young_conjugate: convexity in t") {
    auto sl = WeightFunction::sublog();
    std::vector<ScaledReal> ts;
    for (int i = 1; i <= 24; ++i) ts.push_back(ScaledReal::of(i).mul_pow2(-2));
    std::vector<ScaledReal> vals;
    for (const auto& t : ts) vals.push_back(young_conjugate(sl, t).value);
    for (std::size_t i = 0; i + 2 < ts.size(); ++i) {
        ScaledReal u = (ts[i + 1] - ts[i]) / (ts[i + 2] - ts[i]);
        ScaledReal chord = vals[i] + u * (vals[i + 2] - vals[i]);
        CHECK(vals[i + 1] <= chord + ScaledReal::pow2(-40));
    }
}

TEST_CASE("Fenchel inequality on a pair grid") {
    for (auto w : {WeightFunction::identity(), WeightFunction::sublog()}) {
        std::vector<ScaledReal> svals, tvals;
        for (int i = 0; i <= 31; ++i) {
            svals.push_back(ScaledReal::of(i) * ScaledReal::parse("0.2"));
            tvals.push_back(ScaledReal::parse("0.05") + ScaledReal::of(i) * ScaledReal::parse("1.25"));
        }
        for (const auto& t : tvals) {
            ScaledReal conj = young_conjugate(w, t).value;
            for (const auto& s : svals)
                CHECK(s * t <= w.phi(s) + conj + ScaledReal::pow2(-40));
        }
    }
}

TEST_CASE("omega_seminorm_weight") {
    auto id = WeightFunction::identity();
    ScaledReal e = exp(ScaledReal::of(1));

    // rho=1, j=1: exp(-phi*(1)) = exp(1) = e.
    CHECK(rel_close(omega_seminorm_weight(id, ScaledReal::of(1), 1), e, ScaledReal::parse("1e-25")));

    // j=0: exp(omega(1)/rho).
    CHECK(rel_close(omega_seminorm_weight(id, ScaledReal::of(2), 0), exp(ScaledReal::parse("0.5")),
                    ScaledReal::parse("1e-25")));

    // rho=1, j=3: exp(-(3 ln 3 - 3)) = e^3/27 = 0.743906...
    ScaledReal expected = exp(ScaledReal::of(3)) / ScaledReal::of(27);
    CHECK(rel_close(omega_seminorm_weight(id, ScaledReal::of(1), 3), expected,
                    ScaledReal::parse("1e-25")));
    CHECK(rel_close(expected, ScaledReal::parse("0.743906"), ScaledReal::parse("1e-5")));

    // Nonincreasing in j once past the crossover.
    ScaledReal prev = omega_seminorm_weight(id, ScaledReal::of(1), 1);
    for (unsigned long j = 2; j <= 24; ++j) {
        ScaledReal cur = omega_seminorm_weight(id, ScaledReal::of(1), j);
        CHECK(cur <= prev * (ScaledReal::of(1) + ScaledReal::pow2(-40)));
        prev = cur;
    }
}

TEST_CASE("qa_integral_partial: identity weight against the closed form") {
    auto id = WeightFunction::identity();
    ScaledReal T = ScaledReal::parse("1e6");
    auto rep = qa_integral_partial(id, T);
    // integral of t/(1+t^2) dt = (1/2) ln(1 + T^2)
    ScaledReal closed = ln(ScaledReal::of(1) + T * T).mul_pow2(-1);
    CHECK(rel_close(rep.value, closed, ScaledReal::parse("1e-8")));
    CHECK(rel_close(closed, ScaledReal::parse("13.8155"), ScaledReal::parse("1e-5")));
    CHECK(rep.growth_classification == qacert::weights::GrowthClass::diverging);
}

TEST_CASE("qa_integral_partial: sqrt weight plateaus") {
    auto sq = WeightFunction::power(ScaledReal::parse("0.5"));
    auto rep = qa_integral_partial(sq, ScaledReal::parse("1e6"));
    CHECK(rep.growth_classification == qacert::weights::GrowthClass::plateauing);
}

TEST_CASE("qa_integral_partial: zero table on [0,1]") {
    auto z = WeightFunction::from_samples({ScaledReal::of(0), ScaledReal::of(1)},
                                          {ScaledReal::of(0), ScaledReal::of(0)});
    auto rep = qa_integral_partial(z, ScaledReal::of(1));
    CHECK(rep.value.is_zero());
}

TEST_CASE("table weight: interpolation stays monotone and matches samples") {
    std::vector<ScaledReal> ts, ys;
    auto sl = WeightFunction::sublog();
    for (int i = 0; i <= 40; ++i) {
        ts.push_back(ScaledReal::of(i) * ScaledReal::parse("0.5"));
        ys.push_back(sl.eval(ts.back()));
    }
    auto tab = WeightFunction::from_samples(ts, ys);
    for (std::size_t i = 0; i < ts.size(); ++i)
        CHECK(rel_close(tab.eval(ts[i]), ys[i], ScaledReal::pow2(-200)));
    ScaledReal prev = tab.eval(ScaledReal::parse("0.01"));
    for (int i = 1; i <= 200; ++i) {
        ScaledReal x = ScaledReal::parse("0.01") + ScaledReal::of(i) * ScaledReal::parse("0.0999");
        ScaledReal cur = tab.eval(x);
        CHECK(cur >= prev - ScaledReal::pow2(-200));
        prev = cur;
    }
    // Interpolant tracks the smooth source to a few digits between samples.
    CHECK(rel_close(tab.eval(ScaledReal::parse("3.27")), sl.eval(ScaledReal::parse("3.27")),
                    ScaledReal::parse("1e-4")));
}

TEST_CASE("associated family: identity closed form and monotonicity") {
    auto id = WeightFunction::identity();
    auto m1 = associated_family_member(id, ScaledReal::of(1), 16);
    // k=3: exp(phi*(3)) / 3! = exp(3 ln 3 - 3)/6 = 27/(6 e^3)
    ScaledReal expected = ScaledReal::of(27) / (ScaledReal::of(6) * exp(ScaledReal::of(3)));
    CHECK(rel_close(m1.value(3), expected, ScaledReal::parse("1e-20")));
    CHECK(rel_close(expected, ScaledReal::parse("0.2240"), ScaledReal::parse("1e-3")));

    // k=0 entry: exp((1/x) phi*(0+)) = exp(-omega(1)/x), the raw un-normalized
    // head of the family.
    CHECK(rel_close(m1.value(0), exp(-ScaledReal::of(1)), ScaledReal::parse("1e-20")));

    auto sl = WeightFunction::sublog();
    auto a = associated_family_member(sl, ScaledReal::parse("0.5"), 16);
    auto b = associated_family_member(sl, ScaledReal::of(1), 16);
    ScaledReal slack = ScaledReal::of(1) + ScaledReal::pow2(-40);
    CHECK(a.value(8) <= b.value(8) * slack);
    for (std::size_t k = 0; k <= 16; ++k) CHECK(a.value(k) <= b.value(k) * slack);

    // omega = o(t) members have diverging roots along the prefix
    // (growth is log-like for the sublog weight, so assert a modest factor).
    auto big = associated_family_member(sl, ScaledReal::of(1), 64);
    CHECK(big.root(64) > big.root(8) * ScaledReal::parse("1.5"));
    for (std::size_t k = 8; k < 64; ++k) CHECK(big.root(k + 1) >= big.root(k));
}
