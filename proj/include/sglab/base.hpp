#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace sglab {

inline constexpr const char* version_string = "sglab 1.0.0";

// Hausdorff dimension of SG in the resistance metric and the walk dimension m = d+1.
inline double sg_dimension() { return std::log(3.0) / (std::log(5.0) - std::log(3.0)); }
inline double sg_walk_dimension() { return std::log(5.0) / (std::log(5.0) - std::log(3.0)); }

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Symbol evaluated at (or finite-differenced across) a point where it is not finite.
struct singular_symbol_error : numerical_error {
    using numerical_error::numerical_error;
};

// Iteration hit its cap without meeting the requested residual.
struct convergence_error : numerical_error {
    using numerical_error::numerical_error;
};

// Exact column sweep requested beyond the configured product-size budget.
struct budget_error : numerical_error {
    using numerical_error::numerical_error;
};

// Grid estimate whose two-resolution discrepancy exceeds the configured bound.
struct under_resolved_error : numerical_error {
    using numerical_error::numerical_error;
};

// Deterministic uniform doubles in [0,1) from the top 53 bits of mt19937_64,
// so streams are reproducible across standard libraries.
class rng {
  public:
    explicit rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t bits() { return gen_(); }

    // value in [0, n)
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

  private:
    std::mt19937_64 gen_;
};

} // namespace sglab
