#include "farfel/special.hpp"

#include <cmath>
#include <string>

#include "farfel/diag.hpp"

namespace farfel {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Bernoulli numbers B2, B4, ..., B16.
constexpr double kBern[8] = {
    1.0 / 6.0,   -1.0 / 30.0,     1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0,  -691.0 / 2730.0, 7.0 / 6.0,  -3617.0 / 510.0,
};

double fact(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// Large-x expansion. With x past 10 + 2n the B16 tail is below double
// round-off for every supported order.
double polygamma_asymptotic(int n, double x) {
    if (n == 0) {
        double s = std::log(x) - 0.5 / x;
        double x2 = 1.0 / (x * x);
        double p = x2;
        for (int k = 1; k <= 8; ++k) {
            s -= kBern[k - 1] * p / (2 * k);
            p *= x2;
        }
        return s;
    }
    double s = fact(n - 1) / std::pow(x, n) + fact(n) / (2.0 * std::pow(x, n + 1));
    for (int k = 1; k <= 8; ++k)
        s += kBern[k - 1] * fact(2 * k + n - 1) / (fact(2 * k) * std::pow(x, 2 * k + n));
    return (n % 2 == 0) ? -s : s;
}

} // namespace

double polygamma(int n, double x) {
    if (n < 0 || n > 8)
        throw EngineError("polygamma order " + std::to_string(n) + " is not supported");
    if (x <= 0.0 && x == std::floor(x))
        throw EngineError("polygamma pole at non-positive integer argument");
    if (x < 0.0) {
        if (n > 0) throw EngineError("polygamma of order >= 1 needs a positive argument");
        // Reflection: psi(x) = psi(1 - x) - pi / tan(pi x).
        return polygamma(0, 1.0 - x) - kPi / std::tan(kPi * x);
    }
    // Shift upward until the asymptotic series is accurate:
    // psi_n(x) = psi_n(x + 1) - (-1)^n n! / x^(n+1).
    const double threshold = 10.0 + 2.0 * n;
    const double nf = fact(n);
    double acc = 0.0;
    while (x < threshold) {
        double term = nf / std::pow(x, n + 1);
        acc -= (n % 2 == 0) ? term : -term;
        x += 1.0;
    }
    return polygamma_asymptotic(n, x) + acc;
}

} // namespace farfel
