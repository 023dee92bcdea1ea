#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "kinex/kernels.hpp"

using namespace kinex;

namespace {

std::vector<std::uint64_t> streams(std::size_t n, std::uint64_t seed,
                                   std::uint64_t first) {
    std::vector<std::uint64_t> s(n);
    kernels::seed_streams(seed, first, s.data(), n);
    return s;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("stream seeding depends only on the global path index") {
    const auto a = streams(16, 99, 0);
    const auto b = streams(8, 99, 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(a[8 + i] == b[i]);
    }
}

TEST_CASE("polynomial log and cosine match libm closely") {
    for (int i = 1; i <= 2000; ++i) {
        const double x = static_cast<double>(i) / 2000.0;
        CHECK(std::abs(kernels::poly_log(x) - std::log(x)) < 2e-14);
    }
    for (int i = 0; i < 2000; ++i) {
        const double u = static_cast<double>(i) / 2000.0;
        CHECK(std::abs(kernels::poly_cos_twopi(u) -
                       std::cos(2.0 * M_PI * u)) < 2e-13);
    }
    // Tiny arguments (log of near-underflow uniforms must stay finite).
    CHECK(std::isfinite(kernels::poly_log(0x1.0p-53)));
    CHECK(std::abs(kernels::poly_log(0x1.0p-53) + 53.0 * std::log(2.0)) < 1e-12);
}

TEST_CASE("scalar and avx2 implementations are bitwise identical") {
    if (!kernels::avx2::available()) {
        MESSAGE("AVX2 not available on this host; dispatch test only");
        CHECK(kernels::active_isa() == kernels::isa::scalar);
        return;
    }

    // Sizes chosen to exercise full vectors plus scalar tails.
    for (const std::size_t n : {1u, 3u, 4u, 7u, 64u, 1003u}) {
        auto s1 = streams(n, 4242, 17);
        auto s2 = s1;
        std::vector<double> u1(n), u2(n);
        kernels::scalar::uniform_fill(s1.data(), u1.data(), n);
        kernels::avx2::uniform_fill(s2.data(), u2.data(), n);
        CHECK(bitwise_equal(u1, u2));
        CHECK(s1 == s2);

        std::vector<double> z1(n), z2(n);
        kernels::scalar::normal_fill(s1.data(), z1.data(), n);
        kernels::avx2::normal_fill(s2.data(), z2.data(), n);
        CHECK(bitwise_equal(z1, z2));
        CHECK(s1 == s2);

        // One linear-drift step from a spread of interior and boundary states.
        std::vector<double> r1(n), r2(n);
        for (std::size_t i = 0; i < n; ++i) {
            r1[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n + 1);
        }
        if (n >= 4) {
            r1[0] = 0.0;       // frozen
            r1[1] = 1.0;       // frozen
            r1[2] = 1e-10;     // below the cushion
            r1[3] = 1.0 - 1e-10;
        }
        r2 = r1;
        kernels::scalar::em_step_linear(r1.data(), z1.data(), n, 2.0, -4.0,
                                        1e-3, 1e-9, false, false);
        kernels::avx2::em_step_linear(r2.data(), z2.data(), n, 2.0, -4.0, 1e-3,
                                      1e-9, false, false);
        CHECK(bitwise_equal(r1, r2));

        // Table-driven step (drift interpolated from a grid).
        std::vector<double> table(33);
        for (std::size_t i = 0; i < table.size(); ++i) {
            const double x = static_cast<double>(i) / 32.0;
            table[i] = 1.5 * (1.0 - 2.0 * x) + 0.1 * std::sin(3.0 * x);
        }
        kernels::scalar::em_step_table(r1.data(), z1.data(), n, table.data(),
                                       table.size(), 1e-3, 1e-9, true, true);
        kernels::avx2::em_step_table(r2.data(), z2.data(), n, table.data(),
                                     table.size(), 1e-3, 1e-9, true, true);
        CHECK(bitwise_equal(r1, r2));

        double p1[4] = {0, 0, 0, 0}, p2[4] = {0, 0, 0, 0};
        kernels::scalar::power_sums(u1.data(), n, p1);
        kernels::avx2::power_sums(u2.data(), n, p2);
        CHECK(std::memcmp(p1, p2, sizeof p1) == 0);
    }
}

TEST_CASE("boundary rules: frozen states stay, crossings absorb or clamp") {
    const std::size_t n = 6;
    std::vector<double> r = {0.0, 1.0, 0.5, 1e-12, 1.0 - 1e-12, 0.5};
    // Large negative shocks for the interior states.
    std::vector<double> z = {5.0, -5.0, -60.0, -1.0, 1.0, 60.0};
    kernels::scalar::em_step_linear(r.data(), z.data(), n, 0.0, 0.0, 1e-3,
                                    1e-9, true, true);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 1.0);
    CHECK(r[2] == 0.0);           // absorbed through the lower boundary
    CHECK(r[3] == 0.0);           // started inside the cushion, absorbing side
    CHECK(r[4] == 1.0);
    CHECK(r[5] == 1.0);

    r = {0.5, 0.5, 1e-12, 1.0 - 1e-12, 0.25, 0.75};
    z = {-60.0, 60.0, -1.0, 1.0, 0.0, 0.0};
    kernels::scalar::em_step_linear(r.data(), z.data(), n, 0.0, 0.0, 1e-3,
                                    1e-9, false, false);
    CHECK(r[0] == 1e-9);          // clamped to the cushion, reflective side
    CHECK(r[1] == 1.0 - 1e-9);
    CHECK(r[2] >= 1e-9);
    CHECK(r[3] <= 1.0 - 1e-9);
    CHECK(r[4] > 0.0);
    CHECK(r[5] < 1.0);
}

TEST_CASE("dispatch honors the KINEX_SIMD override") {
    // active_isa is resolved once per process; this checks only that the
    // resolved value is one of the two implementations and is stable.
    const kernels::isa first = kernels::active_isa();
    CHECK(kernels::active_isa() == first);
    CHECK((first == kernels::isa::scalar || first == kernels::isa::avx2));
    CHECK(std::string(kernels::isa_name(first)).size() > 0);
}

} // TEST_SUITE
