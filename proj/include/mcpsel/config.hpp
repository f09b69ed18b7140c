#pragma once

#include <cstdlib>
#include <string>

namespace mcpsel {

// Every numerical threshold in the library reads from here.
struct Tolerances {
    double herm = 1e-12;  // relative asymmetry accepted before symmetrizing
    double psd = 1e-9;
    double eq = 1e-8;
    double root = 1e-7;
};

inline Tolerances& tol() {
    static Tolerances t;
    return t;
}

inline unsigned thread_cap() {
    if (const char* s = std::getenv("MCPSEL_THREADS")) {
        int n = std::atoi(s);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return 1;
}

}  // namespace mcpsel
