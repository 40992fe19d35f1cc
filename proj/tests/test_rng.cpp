#include <catch2/catch_amalgamated.hpp>

#include "vortrace/rng.hpp"

using namespace vortrace;

TEST_CASE("philox blocks are pure functions of (seed, stream, counter)", "[rng]") {
    const auto a = philox::block(42, 7, 1234);
    const auto b = philox::block(42, 7, 1234);
    REQUIRE(a == b);
    REQUIRE(philox::block(42, 7, 1235) != a);
    REQUIRE(philox::block(42, 8, 1234) != a);
    REQUIRE(philox::block(43, 7, 1234) != a);
}

TEST_CASE("draws replay bit-exactly from a saved state", "[rng]") {
    CounterRng rng(99, 3);
    std::vector<double> first;
    for (int i = 0; i < 16; ++i) first.push_back(rng.next_normal());
    const RngState mid = rng.state();
    std::vector<double> tail;
    for (int i = 0; i < 16; ++i) tail.push_back(rng.next_normal());

    CounterRng resumed(mid);
    for (int i = 0; i < 16; ++i) REQUIRE(resumed.next_normal() == tail[i]);

    CounterRng reseek(99, 3);
    reseek.seek(mid.counter);
    for (int i = 0; i < 16; ++i) REQUIRE(reseek.next_normal() == tail[i]);
}

TEST_CASE("uniforms live strictly inside (0,1) with the right mean", "[rng]") {
    CounterRng rng(7, 0);
    const int n = 100000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        acc += u;
    }
    const double m = acc / n;
    // SE of the mean of U(0,1) is 1/sqrt(12 n)
    REQUIRE(std::abs(m - 0.5) < 3.0 / std::sqrt(12.0 * n));
}

TEST_CASE("normals match the first two moments", "[rng]") {
    CounterRng rng(11, 5);
    const int n = 100000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.next_normal();
        s1 += z;
        s2 += z * z;
    }
    const double m = s1 / n;
    const double var = s2 / n - m * m;
    REQUIRE(std::abs(m) < 3.0 / std::sqrt(static_cast<double>(n)));
    REQUIRE(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
}

TEST_CASE("complex gaussians have unit total variance, split evenly", "[rng]") {
    CounterRng rng(13, 9);
    const int n = 100000;
    double re2 = 0.0, im2 = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto g = rng.next_complex_gaussian();
        re2 += g.real() * g.real();
        im2 += g.imag() * g.imag();
        cross += g.real() * g.imag();
    }
    const double se_half = std::sqrt(2.0 / n) * 0.5;
    REQUIRE(std::abs(re2 / n - 0.5) < 3.0 * se_half);
    REQUIRE(std::abs(im2 / n - 0.5) < 3.0 * se_half);
    REQUIRE(std::abs(cross / n) < 3.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}
