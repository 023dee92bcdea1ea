#include <cstdlib>
#include <string>

#include "kinex/kernels.hpp"

#include "kinex/error.hpp"

namespace kinex::kernels {

const char* isa_name(isa i) noexcept {
    return i == isa::avx2 ? "avx2" : "scalar";
}

namespace {

isa resolve_isa() {
    const char* env = std::getenv("KINEX_SIMD");
    if (env != nullptr && *env != '\0') {
        const std::string v(env);
        if (v == "scalar") return isa::scalar;
        if (v == "avx2") {
            return avx2::available() ? isa::avx2 : isa::scalar;
        }
        throw error(errc::config_error,
                    "KINEX_SIMD must be 'scalar' or 'avx2', got '" + v + "'");
    }
    return avx2::available() ? isa::avx2 : isa::scalar;
}

} // namespace

isa active_isa() {
    static const isa resolved = resolve_isa();
    return resolved;
}

void uniform_fill(std::uint64_t* states, double* u, std::size_t n) {
    if (active_isa() == isa::avx2) {
        avx2::uniform_fill(states, u, n);
    } else {
        scalar::uniform_fill(states, u, n);
    }
}

void normal_fill(std::uint64_t* states, double* z, std::size_t n) {
    if (active_isa() == isa::avx2) {
        avx2::normal_fill(states, z, n);
    } else {
        scalar::normal_fill(states, z, n);
    }
}

void em_step_linear(double* r, const double* z, std::size_t n, double drift_a,
                    double drift_b, double dt, double eps_b, bool absorb_lo,
                    bool absorb_hi) {
    if (active_isa() == isa::avx2) {
        avx2::em_step_linear(r, z, n, drift_a, drift_b, dt, eps_b, absorb_lo,
                             absorb_hi);
    } else {
        scalar::em_step_linear(r, z, n, drift_a, drift_b, dt, eps_b, absorb_lo,
                               absorb_hi);
    }
}

void em_step_table(double* r, const double* z, std::size_t n,
                   const double* drift_table, std::size_t table_n, double dt,
                   double eps_b, bool absorb_lo, bool absorb_hi) {
    if (active_isa() == isa::avx2) {
        avx2::em_step_table(r, z, n, drift_table, table_n, dt, eps_b, absorb_lo,
                            absorb_hi);
    } else {
        scalar::em_step_table(r, z, n, drift_table, table_n, dt, eps_b,
                              absorb_lo, absorb_hi);
    }
}

void power_sums(const double* x, std::size_t n, double out[4]) {
    if (active_isa() == isa::avx2) {
        avx2::power_sums(x, n, out);
    } else {
        scalar::power_sums(x, n, out);
    }
}

} // namespace kinex::kernels
