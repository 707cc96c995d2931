#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <string>

#include "scenlab/errors.hpp"

namespace scenlab {

using BigInt = boost::multiprecision::cpp_int;

/// Expansion base for x -> beta x mod 1 orbits: an exact rational (parsed
/// from decimal text) or the golden ratio, the one irrational base with
/// closed-form fixtures.  `value` is the double view used for reporting
/// and for reference laws; orbit arithmetic never touches it.
struct BetaSpec {
    double value = 2.0;
    BigInt num = 2;
    BigInt den = 1;
    bool rational = true;

    static BetaSpec from_rational(BigInt num, BigInt den) {
        if (den <= 0) throw DomainError("BetaSpec: denominator must be positive");
        const BigInt g = boost::multiprecision::gcd(num, den);
        num /= g;
        den /= g;
        if (num <= den) throw DomainError("BetaSpec: beta must exceed 1");
        BetaSpec b;
        b.num = num;
        b.den = den;
        b.rational = true;
        b.value = num.convert_to<double>() / den.convert_to<double>();
        return b;
    }

    static BetaSpec golden_ratio() {
        BetaSpec b;
        b.rational = false;
        b.value = 0.5 * (1.0 + std::sqrt(5.0));
        return b;
    }

    /// "2", "3.25", or "golden"; decimal digits are taken exactly.
    static BetaSpec parse(const std::string& text) {
        if (text == "golden") return golden_ratio();
        if (text.empty()) throw DomainError("BetaSpec: empty beta");
        BigInt num = 0, den = 1;
        bool dot = false, any = false;
        for (char ch : text) {
            if (ch == '.') {
                if (dot) throw DomainError("BetaSpec: malformed beta '" + text + "'");
                dot = true;
                continue;
            }
            if (ch < '0' || ch > '9')
                throw DomainError("BetaSpec: malformed beta '" + text + "'");
            num = num * 10 + (ch - '0');
            if (dot) den *= 10;
            any = true;
        }
        if (!any) throw DomainError("BetaSpec: malformed beta '" + text + "'");
        return from_rational(num, den);
    }

    bool is_integer() const { return rational && den == 1; }

    /// Fixed-point image of beta at `bits` fractional bits, accurate to one
    /// unit in the last place (floor of beta * 2^bits for the golden ratio,
    /// round-to-nearest for rationals).
    BigInt fixed(int bits) const {
        if (rational) return ((num << (bits + 1)) + den) / (den << 1);
        const BigInt s = boost::multiprecision::sqrt(BigInt(5) << (2 * bits));
        return ((BigInt(1) << bits) + s) / 2;
    }
};

/// Bits needed so that a length-n orbit keeps at least 64 guard bits: the
/// per-step error factor is beta, so the ulp error after n steps is about
/// beta^n.
inline int orbit_bits_required(const BetaSpec& beta, int orbit_length) {
    if (orbit_length < 1) throw DomainError("orbit_bits_required: orbit length must be positive");
    return static_cast<int>(std::ceil(static_cast<double>(orbit_length) * std::log2(beta.value))) + 64;
}

/// Orbit of a point of [0,1) under x -> beta x mod 1 in fixed-point
/// big-integer arithmetic: the stored value is raw / 2^bits, and
/// `error_ulps` is a rigorous upper bound on |stored - true| in units of
/// 2^-bits, updated through every multiplication.  Floating point loses
/// such orbits after ~50 steps; the explicit precision budget is what
/// makes long orbits trustworthy.
class FixedOrbit {
  public:
    FixedOrbit(const BetaSpec& beta, int bits) : beta_(beta), bits_(bits) {
        if (bits < 64 || bits > (1 << 22)) throw DomainError("FixedOrbit: bits out of range");
        scale_ = BigInt(1) << bits;
        if (!beta_.rational) approx_ = beta_.fixed(bits);
    }

    /// Seed with the exact rational num/den, reduced into [0,1).  The
    /// stored value is exact when the reduced fraction is dyadic.
    void seed_rational(BigInt num, BigInt den) {
        if (den == 0) throw DomainError("FixedOrbit: zero denominator");
        if (den < 0) {
            den = -den;
            num = -num;
        }
        num %= den;
        if (num < 0) num += den;
        const BigInt shifted = num << bits_;
        x_ = shifted / den;
        err_ = (x_ * den == shifted) ? 0 : 1;
    }

    /// Seed with beta mod 1 (the second point of the classical 1-orbit).
    void seed_beta_fraction() {
        if (beta_.rational) {
            seed_rational(beta_.num % beta_.den, beta_.den);
        } else {
            x_ = approx_ - scale_;
            err_ = 1;
        }
    }

    void step() {
        if (beta_.rational) {
            const BigInt t = x_ * beta_.num;
            x_ = (t / beta_.den) % scale_;
            err_ = (err_ * beta_.num + beta_.den - 1) / beta_.den + 1;
        } else {
            const BigInt t = (x_ * approx_) >> bits_;
            x_ = t % scale_;
            // beta * err + x * (1 ulp of beta) + two floor truncations
            err_ = (err_ * approx_ + x_ + err_) / scale_ + 2;
        }
    }

    /// Double view of the current point (top 53 bits).
    double value() const {
        if (bits_ <= 53) return x_.convert_to<double>() * std::ldexp(1.0, -bits_);
        const BigInt top = x_ >> (bits_ - 53);
        return top.convert_to<double>() * 0x1.0p-53;
    }

    /// Truncated decimal expansion "0.d1d2...", exact for the stored value.
    std::string decimal(int digits) const {
        if (digits < 1 || digits > 64) throw DomainError("FixedOrbit: digit count out of range");
        BigInt t = x_;
        std::string out = "0.";
        for (int i = 0; i < digits; ++i) {
            t *= 10;
            const int d = (t >> bits_).convert_to<int>();
            out += static_cast<char>('0' + d);
            t -= BigInt(d) << bits_;
        }
        return out;
    }

    /// True when the stored point cannot be distinguished from the lattice
    /// {0, 1} within the error bound; for beta-transformation 1-orbits this
    /// is the termination signal of a simple base.
    bool at_zero() const { return x_ <= err_ || x_ >= scale_ - err_; }

    /// Upper bound on |stored - true| as a double (rounded up).
    double error_bound() const {
        if (err_ == 0) return 0.0;
        const BigInt q = ((err_ << 60) / scale_) + 1;
        if (q > (BigInt(1) << 62)) return 1.0;
        return q.convert_to<double>() * 0x1.0p-60;
    }

    const BigInt& raw() const { return x_; }
    const BigInt& error_ulps() const { return err_; }
    int bits() const { return bits_; }

  private:
    BetaSpec beta_;
    int bits_;
    BigInt scale_;
    BigInt approx_; // beta * 2^bits, golden case only
    BigInt x_ = 0;
    BigInt err_ = 0;
};

} // namespace scenlab
