// Extended-range real/complex arithmetic kernel on top of MPFR.
//
// ScaledReal is an immutable arbitrary-precision real with a sign,
// a significand in [1,2) and a wide binary exponent; ScaledComplex is a
// pair of them.  All operations round to nearest and are deterministic:
// the same inputs at the same precision give the same bits on every run.

#ifndef QACERT_XNUM_HPP
#define QACERT_XNUM_HPP

#include <mpfr.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qacert {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Bad argument values (zero base with negative power, t outside [0,1], ...).
struct DomainError : Error {
    using Error::Error;
};
// A module precondition does not hold for the given inputs.
struct PreconditionError : Error {
    using Error::Error;
};
// A truncated supremum or scan was dominated by its boundary.
struct TruncationDominatedError : Error {
    using Error::Error;
};
// Cancellation ate more than half the working bits even after escalation.
struct PrecisionExhaustedError : Error {
    using Error::Error;
};
// The stored prefix of a sequence is too short and cannot be extended.
struct InsufficientPrefixError : Error {
    using Error::Error;
};

namespace xnum {

struct Precision {
    int bits = 256;

    static Precision dflt() { return Precision{256}; }
    Precision doubled() const { return Precision{bits * 2}; }
    bool operator==(const Precision&) const = default;
};

namespace detail {
inline void init_exponent_range() {
    static const bool done = [] {
        mpfr_set_emin(mpfr_get_emin_min());
        mpfr_set_emax(mpfr_get_emax_max());
        return true;
    }();
    (void)done;
}
}  // namespace detail

class ScaledReal {
  public:
    explicit ScaledReal(Precision p = Precision::dflt()) {
        detail::init_exponent_range();
        mpfr_init2(x_, p.bits);
        mpfr_set_zero(x_, 1);
    }
    ScaledReal(const ScaledReal& o) {
        mpfr_init2(x_, mpfr_get_prec(o.x_));
        mpfr_set(x_, o.x_, MPFR_RNDN);
    }
    ScaledReal(ScaledReal&& o) noexcept {
        mpfr_init2(x_, mpfr_get_prec(o.x_));
        mpfr_swap(x_, o.x_);
    }
    ScaledReal& operator=(ScaledReal o) noexcept {
        mpfr_swap(x_, o.x_);
        return *this;
    }
    ~ScaledReal() { mpfr_clear(x_); }

    static ScaledReal of(long v, Precision p = Precision::dflt()) {
        ScaledReal r(p);
        mpfr_set_si(r.x_, v, MPFR_RNDN);
        return r;
    }
    static ScaledReal of_ui(unsigned long v, Precision p = Precision::dflt()) {
        ScaledReal r(p);
        mpfr_set_ui(r.x_, v, MPFR_RNDN);
        return r;
    }
    // Parses "±d.ddd...e±EEE" (any mpfr base-10 literal).
    static ScaledReal parse(std::string_view s, Precision p = Precision::dflt()) {
        ScaledReal r(p);
        std::string z(s);
        if (mpfr_set_str(r.x_, z.c_str(), 10, MPFR_RNDN) != 0 && !looks_numeric(z))
            throw DomainError("ScaledReal::parse: not a decimal literal: " + z);
        return r;
    }
    // 2^e, exact.
    static ScaledReal pow2(long e, Precision p = Precision::dflt()) {
        ScaledReal r(p);
        mpfr_set_si(r.x_, 1, MPFR_RNDN);
        mpfr_mul_2si(r.x_, r.x_, e, MPFR_RNDN);
        return r;
    }
    static ScaledReal pi(Precision p = Precision::dflt()) {
        ScaledReal r(p);
        mpfr_const_pi(r.x_, MPFR_RNDN);
        return r;
    }

    Precision precision() const { return Precision{static_cast<int>(mpfr_get_prec(x_))}; }

    bool is_zero() const { return mpfr_zero_p(x_) != 0; }
    bool is_finite() const { return mpfr_number_p(x_) != 0; }
    int sign() const { return mpfr_sgn(x_); }

    // Decomposition x = sign * significand * 2^exponent2, significand in [1,2).
    ScaledReal significand() const {
        require_finite("significand");
        if (is_zero()) return ScaledReal(precision());
        ScaledReal s = abs(*this);
        mpfr_mul_2si(s.x_, s.x_, 1 - mpfr_get_exp(x_), MPFR_RNDN);
        return s;
    }
    std::int64_t exponent2() const {
        require_finite("exponent2");
        if (is_zero()) return 0;
        return static_cast<std::int64_t>(mpfr_get_exp(x_)) - 1;
    }

    friend ScaledReal operator+(const ScaledReal& a, const ScaledReal& b) {
        ScaledReal r(join(a, b));
        mpfr_add(r.x_, a.x_, b.x_, MPFR_RNDN);
        return r;
    }
    friend ScaledReal operator-(const ScaledReal& a, const ScaledReal& b) {
        ScaledReal r(join(a, b));
        mpfr_sub(r.x_, a.x_, b.x_, MPFR_RNDN);
        return r;
    }
    friend ScaledReal operator*(const ScaledReal& a, const ScaledReal& b) {
        ScaledReal r(join(a, b));
        mpfr_mul(r.x_, a.x_, b.x_, MPFR_RNDN);
        return r;
    }
    friend ScaledReal operator/(const ScaledReal& a, const ScaledReal& b) {
        ScaledReal r(join(a, b));
        mpfr_div(r.x_, a.x_, b.x_, MPFR_RNDN);
        return r;
    }
    ScaledReal operator-() const {
        ScaledReal r(*this);
        mpfr_neg(r.x_, r.x_, MPFR_RNDN);
        return r;
    }

    friend ScaledReal abs(const ScaledReal& a) {
        ScaledReal r(a);
        mpfr_abs(r.x_, r.x_, MPFR_RNDN);
        return r;
    }
    friend ScaledReal sqrt(const ScaledReal& a) {
        if (a.sign() < 0) throw DomainError("sqrt of negative value");
        ScaledReal r(a.precision());
        mpfr_sqrt(r.x_, a.x_, MPFR_RNDN);
        return r;
    }
    friend ScaledReal ln(const ScaledReal& a) {
        if (a.sign() <= 0) throw DomainError("ln of nonpositive value");
        ScaledReal r(a.precision());
        mpfr_log(r.x_, a.x_, MPFR_RNDN);
        return r;
    }
    friend ScaledReal exp(const ScaledReal& a) {
        ScaledReal r(a.precision());
        mpfr_exp(r.x_, a.x_, MPFR_RNDN);
        if (!r.is_finite()) throw PrecisionExhaustedError("exp overflowed the exponent range");
        return r;
    }
    friend ScaledReal log2(const ScaledReal& a) {
        if (a.sign() <= 0) throw DomainError("log2 of nonpositive value");
        ScaledReal r(a.precision());
        mpfr_log2(r.x_, a.x_, MPFR_RNDN);
        return r;
    }
    friend ScaledReal log10(const ScaledReal& a) {
        if (a.sign() <= 0) throw DomainError("log10 of nonpositive value");
        ScaledReal r(a.precision());
        mpfr_log10(r.x_, a.x_, MPFR_RNDN);
        return r;
    }
    friend ScaledReal pow_si(const ScaledReal& a, long e) {
        ScaledReal r(a.precision());
        mpfr_pow_si(r.x_, a.x_, e, MPFR_RNDN);
        if (!r.is_finite()) throw PrecisionExhaustedError("pow overflowed the exponent range");
        return r;
    }
    // a^b for a > 0 (or a == 0 with b > 0).
    friend ScaledReal pow(const ScaledReal& a, const ScaledReal& b) {
        if (a.sign() < 0) throw DomainError("pow of negative base");
        ScaledReal r(join(a, b));
        mpfr_pow(r.x_, a.x_, b.x_, MPFR_RNDN);
        if (!r.is_finite()) throw PrecisionExhaustedError("pow overflowed the exponent range");
        return r;
    }
    friend ScaledReal atan2(const ScaledReal& y, const ScaledReal& x) {
        ScaledReal r(join(y, x));
        mpfr_atan2(r.x_, y.x_, x.x_, MPFR_RNDN);
        return r;
    }
    friend ScaledReal hypot(const ScaledReal& a, const ScaledReal& b) {
        ScaledReal r(join(a, b));
        mpfr_hypot(r.x_, a.x_, b.x_, MPFR_RNDN);
        return r;
    }
    friend ScaledReal min(const ScaledReal& a, const ScaledReal& b) { return a <= b ? a : b; }
    friend ScaledReal max(const ScaledReal& a, const ScaledReal& b) { return a >= b ? a : b; }

    ScaledReal mul_pow2(long e) const {  // exact scaling by 2^e
        ScaledReal r(*this);
        mpfr_mul_2si(r.x_, r.x_, e, MPFR_RNDN);
        return r;
    }
    ScaledReal rounded_to(Precision p) const {
        ScaledReal r(p);
        mpfr_set(r.x_, x_, MPFR_RNDN);
        return r;
    }

    friend bool operator<(const ScaledReal& a, const ScaledReal& b) { return mpfr_cmp(a.x_, b.x_) < 0; }
    friend bool operator>(const ScaledReal& a, const ScaledReal& b) { return mpfr_cmp(a.x_, b.x_) > 0; }
    friend bool operator<=(const ScaledReal& a, const ScaledReal& b) { return mpfr_cmp(a.x_, b.x_) <= 0; }
    friend bool operator>=(const ScaledReal& a, const ScaledReal& b) { return mpfr_cmp(a.x_, b.x_) >= 0; }
    friend bool operator==(const ScaledReal& a, const ScaledReal& b) { return mpfr_equal_p(a.x_, b.x_) != 0; }
    friend bool operator!=(const ScaledReal& a, const ScaledReal& b) { return !(a == b); }

    long to_long() const {
        require_finite("to_long");
        return mpfr_get_si(x_, MPFR_RNDN);
    }
    double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }
    ScaledReal floor() const {
        ScaledReal r(*this);
        mpfr_floor(r.x_, r.x_);
        return r;
    }
    ScaledReal ceil() const {
        ScaledReal r(*this);
        mpfr_ceil(r.x_, r.x_);
        return r;
    }

    // Decimal serialization "±d.ddd...e±EEE" with enough digits that parsing
    // at the same precision reproduces the value exactly.
    std::string to_decimal() const {
        require_finite("to_decimal");
        if (is_zero()) return "0";
        mpfr_exp_t e = 0;
        char* raw = mpfr_get_str(nullptr, &e, 10, 0, x_, MPFR_RNDN);
        std::string digits(raw);
        mpfr_free_str(raw);
        std::string out;
        std::size_t i = 0;
        if (digits[0] == '-') {
            out += '-';
            i = 1;
        }
        out += digits[i];
        out += '.';
        out.append(digits.begin() + static_cast<std::ptrdiff_t>(i) + 1, digits.end());
        out += 'e';
        out += std::to_string(static_cast<long long>(e) - 1);
        return out;
    }
    // Short fixed-digit rendering for tables; not round-trip exact.
    std::string to_decimal(int significant_digits) const {
        require_finite("to_decimal");
        if (is_zero()) return "0";
        mpfr_exp_t e = 0;
        char* raw = mpfr_get_str(nullptr, &e, 10, static_cast<std::size_t>(significant_digits), x_,
                                 MPFR_RNDN);
        std::string digits(raw);
        mpfr_free_str(raw);
        std::string out;
        std::size_t i = 0;
        if (digits[0] == '-') {
            out += '-';
            i = 1;
        }
        out += digits[i];
        out += '.';
        out.append(digits.begin() + static_cast<std::ptrdiff_t>(i) + 1, digits.end());
        out += 'e';
        out += std::to_string(static_cast<long long>(e) - 1);
        return out;
    }

    mpfr_srcptr raw() const { return x_; }

  private:
    static Precision join(const ScaledReal& a, const ScaledReal& b) {
        return Precision{std::max(a.precision().bits, b.precision().bits)};
    }
    static bool looks_numeric(const std::string& z) {
        return z.find_first_of("0123456789") != std::string::npos;
    }
    void require_finite(const char* who) const {
        if (!is_finite()) throw PrecisionExhaustedError(std::string(who) + " on non-finite value");
    }

    mpfr_t x_;
};

inline ScaledReal operator+(const ScaledReal& a, long b) { return a + ScaledReal::of(b, a.precision()); }
inline ScaledReal operator-(const ScaledReal& a, long b) { return a - ScaledReal::of(b, a.precision()); }
inline ScaledReal operator*(const ScaledReal& a, long b) { return a * ScaledReal::of(b, a.precision()); }
inline ScaledReal operator/(const ScaledReal& a, long b) { return a / ScaledReal::of(b, a.precision()); }
inline ScaledReal operator*(long a, const ScaledReal& b) { return ScaledReal::of(a, b.precision()) * b; }
inline ScaledReal operator-(long a, const ScaledReal& b) { return ScaledReal::of(a, b.precision()) - b; }

struct ScaledComplex {
    ScaledReal re;
    ScaledReal im;

    explicit ScaledComplex(Precision p = Precision::dflt()) : re(p), im(p) {}
    ScaledComplex(ScaledReal r, ScaledReal i) : re(std::move(r)), im(std::move(i)) {}
    static ScaledComplex of(long r, long i, Precision p = Precision::dflt()) {
        return {ScaledReal::of(r, p), ScaledReal::of(i, p)};
    }

    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    Precision precision() const {
        return Precision{std::max(re.precision().bits, im.precision().bits)};
    }

    friend ScaledComplex operator+(const ScaledComplex& a, const ScaledComplex& b) {
        return {a.re + b.re, a.im + b.im};
    }
    friend ScaledComplex operator-(const ScaledComplex& a, const ScaledComplex& b) {
        return {a.re - b.re, a.im - b.im};
    }
    friend ScaledComplex operator*(const ScaledComplex& a, const ScaledComplex& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend ScaledComplex operator*(const ScaledReal& s, const ScaledComplex& a) {
        return {s * a.re, s * a.im};
    }
    friend ScaledComplex operator/(const ScaledComplex& a, const ScaledComplex& b) {
        if (b.is_zero()) throw DomainError("complex division by zero");
        ScaledReal d = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
    }
    ScaledComplex operator-() const { return {-re, -im}; }

    ScaledComplex conj() const { return {re, -im}; }
    friend ScaledReal modulus(const ScaledComplex& a) { return hypot(a.re, a.im); }
    friend ScaledReal argument(const ScaledComplex& a) {
        if (a.is_zero()) throw DomainError("argument of zero");
        return atan2(a.im, a.re);
    }
    // Principal square root.  The dominant component comes straight from the
    // modulus (|a| + |re| never cancels); the other from 2uv = im.
    friend ScaledComplex sqrt(const ScaledComplex& a) {
        if (a.is_zero()) return ScaledComplex(a.precision());
        ScaledReal m = modulus(a);
        if (a.re.sign() >= 0) {
            ScaledReal u = sqrt((m + a.re).mul_pow2(-1));
            return {u, a.im.mul_pow2(-1) / u};
        }
        ScaledReal t = sqrt((m - a.re).mul_pow2(-1));
        if (a.im.is_zero()) return {ScaledReal(a.precision()), t};  // negative real axis
        ScaledReal u = abs(a.im).mul_pow2(-1) / t;
        return {u, a.im.sign() >= 0 ? t : -t};
    }
};

// z^e by binary powering; e < 0 via the reciprocal of z^{-e}.
// Relative error below |e| * 2^{-(P-8)}.
inline ScaledComplex pow_int(const ScaledComplex& z, long e) {
    Precision p = z.precision();
    if (e == 0) return ScaledComplex::of(1, 0, p);
    if (z.is_zero()) {
        if (e < 0) throw DomainError("pow_int: zero base with negative exponent");
        return ScaledComplex(p);
    }
    unsigned long n = e < 0 ? static_cast<unsigned long>(-(e + 1)) + 1ul : static_cast<unsigned long>(e);
    ScaledComplex acc = ScaledComplex::of(1, 0, p);
    ScaledComplex base = z;
    while (n > 0) {
        if (n & 1ul) acc = acc * base;
        n >>= 1;
        if (n > 0) base = base * base;
    }
    if (e < 0) return ScaledComplex::of(1, 0, p) / acc;
    return acc;
}

struct SumAudit {
    ScaledComplex result;
    ScaledReal max_term_magnitude;
    long cancellation_loss_bits = 0;
};

// Deterministic left-to-right summation with a cancellation audit.
// cancellation_loss_bits = ceil(log2(max_term / |result|)), clamped at 0;
// a result that cancels to exactly zero reports the full working precision.
inline SumAudit sum_audited(const std::vector<ScaledComplex>& terms,
                            Precision p = Precision::dflt()) {
    SumAudit audit;
    audit.result = ScaledComplex(p);
    audit.max_term_magnitude = ScaledReal(p);
    if (terms.empty()) return audit;
    for (const ScaledComplex& t : terms) {
        audit.result = audit.result + t;
        audit.max_term_magnitude = max(audit.max_term_magnitude, modulus(t));
    }
    if (audit.max_term_magnitude.is_zero()) return audit;
    ScaledReal res_mag = modulus(audit.result);
    if (res_mag.is_zero()) {
        audit.cancellation_loss_bits = audit.result.precision().bits;
        return audit;
    }
    ScaledReal bits = log2(audit.max_term_magnitude / res_mag).ceil();
    long b = bits.to_long();
    audit.cancellation_loss_bits = b > 0 ? b : 0;
    return audit;
}

// ln(k!), exact for k in {0,1}; relative error below 2^{-(P-8)}.
inline ScaledReal factorial_log(unsigned long k, Precision p = Precision::dflt()) {
    if (k <= 1) return ScaledReal(p);
    Precision wide{p.bits + 32};
    ScaledReal r(wide);
    mpfr_t t;
    mpfr_init2(t, wide.bits);
    mpfr_set_ui(t, k + 1, MPFR_RNDN);
    int sgn = 0;
    mpfr_lgamma(const_cast<mpfr_ptr>(r.raw()), &sgn, t, MPFR_RNDN);
    mpfr_clear(t);
    return r.rounded_to(p);
}

// k! as a value; overflows the exponent range only for absurd k.
inline ScaledReal factorial(unsigned long k, Precision p = Precision::dflt()) {
    ScaledReal r = ScaledReal::of(1, p);
    mpfr_fac_ui(const_cast<mpfr_ptr>(r.raw()), k, MPFR_RNDN);
    return r;
}

// C(n, k) evaluated exactly in integer arithmetic then rounded.
inline ScaledReal binomial(unsigned long n, unsigned long k, Precision p = Precision::dflt()) {
    if (k > n) return ScaledReal(p);
    Precision wide{p.bits + 64};
    ScaledReal num = ScaledReal::of(1, wide);
    for (unsigned long i = 0; i < k; ++i) {
        num = num * ScaledReal::of_ui(n - i, wide);
        num = num / ScaledReal::of_ui(i + 1, wide);
    }
    return num.rounded_to(p);
}

}  // namespace xnum
}  // namespace qacert

#endif  // QACERT_XNUM_HPP
