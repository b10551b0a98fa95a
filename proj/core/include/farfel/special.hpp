#pragma once

namespace farfel {

// n-th polygamma function: the (n+1)-th logarithmic derivative of the
// gamma function, so polygamma(0, x) is the digamma function. Supports
// orders 0 through 8; order 0 accepts negative non-integer x through the
// reflection formula, higher orders require x > 0.
double polygamma(int n, double x);

} // namespace farfel
