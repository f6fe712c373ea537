#pragma once

#include <cstddef>
#include <vector>

namespace lfk {

// dense polynomial, coefficients in ascending degree order
struct Poly {
    std::vector<double> c;

    double operator()(double x) const {
        double acc = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
        return acc;
    }

    Poly derivative() const {
        Poly d;
        if (c.size() <= 1) {
            d.c = {0.0};
            return d;
        }
        d.c.resize(c.size() - 1);
        for (std::size_t i = 1; i < c.size(); ++i)
            d.c[i - 1] = c[i] * static_cast<double>(i);
        return d;
    }

    // degree ignoring trailing zero coefficients; -1 for the zero polynomial
    int degree() const {
        for (std::size_t i = c.size(); i-- > 0;)
            if (c[i] != 0.0) return static_cast<int>(i);
        return -1;
    }
};

} // namespace lfk
