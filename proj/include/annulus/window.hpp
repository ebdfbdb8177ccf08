#pragma once

#include <cmath>
#include <stdexcept>

namespace annulus {

/// The annulus {1/tau < |z| < r}, tau >= 1, r >= 1.
struct AnnulusWindow {
    double tau = 1.0;
    double r = 1.0;

    AnnulusWindow() = default;
    AnnulusWindow(double tau_, double r_) : tau(tau_), r(r_)
    {
        if (!(tau >= 1.0) || !(r >= 1.0) || !std::isfinite(tau) || !std::isfinite(r)) {
            throw std::invalid_argument("annulus window needs tau >= 1 and r >= 1");
        }
    }

    double inner() const { return 1.0 / tau; }
    double outer() const { return r; }

    friend bool operator==(const AnnulusWindow&, const AnnulusWindow&) = default;
};

}  // namespace annulus
