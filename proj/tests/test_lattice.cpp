#include <catch2/catch_amalgamated.hpp>

#include "torogrow/lattice.hpp"
#include "torogrow/rng.hpp"

using namespace torogrow;

TEST_CASE("primitive_part divides out the gcd") {
    CHECK(primitive_part({2, 4, 6}) == IVec3{1, 2, 3});
    CHECK(primitive_part({0, 0, 5}) == IVec3{0, 0, 1});
    CHECK(primitive_part({6, 10, 15}) == IVec3{6, 10, 15});
    CHECK_THROWS_AS(primitive_part({0, 0, 0}), InputError);

    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        IVec3 c{rng.int_range(-50, 50), rng.int_range(-50, 50), rng.int_range(-50, 50)};
        if (c[0] == 0 && c[1] == 0 && c[2] == 0) continue;
        const IVec3 p = primitive_part(c);
        CHECK(primitive_part(p) == p);
        CHECK(is_primitive(p));
    }
}

TEST_CASE("orthogonal generators: fixed fixtures") {
    const auto b1 = orthogonal_generators({1, 1, 1});
    CHECK(b1.a == IVec3{1, -1, 0});
    CHECK(b1.b == IVec3{0, -1, 1});

    const auto b2 = orthogonal_generators({6, 10, 15});
    CHECK(b2.a == IVec3{5, -3, 0});
    CHECK(b2.b == IVec3{0, -3, 2});
    CHECK(b2.minor_gcd == 1);
}

TEST_CASE("orthogonal generators: degenerate directions") {
    for (const IVec3 c : {IVec3{0, 0, 1}, IVec3{0, 1, 0}, IVec3{1, 0, 0}, IVec3{2, 3, 0},
                          IVec3{0, 2, 3}, IVec3{-1, 0, 0}, IVec3{0, 0, -1}, IVec3{5, 0, -3}}) {
        const auto basis = orthogonal_generators(c);
        CHECK(idot(basis.a, c) == 0);
        CHECK(idot(basis.b, c) == 0);
        CHECK(basis.minor_gcd == 1);
    }
    CHECK_THROWS_AS(orthogonal_generators({2, 4, 6}), InputError);
    CHECK_THROWS_AS(orthogonal_generators({0, 0, 0}), InputError);
}

TEST_CASE("is_full_image certificate") {
    const auto r1 = is_full_image({1, 0, 0}, {0, 1, 0});
    CHECK(r1.full);
    CHECK(r1.minor_gcd == 1);

    const auto r2 = is_full_image({2, 0, 0}, {0, 2, 0});
    CHECK_FALSE(r2.full);
    CHECK(r2.minor_gcd == 4);

    const auto r3 = is_full_image({5, -3, 0}, {0, -3, 2});
    CHECK(r3.full);
    CHECK(r3.minor_gcd == 1);

    CHECK_THROWS_AS(is_full_image({1, 2, 3}, {2, 4, 6}), InputError);
}

TEST_CASE("full image criterion against brute-force search") {
    // brute force: (1,0) and (0,1) must be realized as (a.m, b.m) for small m
    const IVec3 a{5, -3, 0}, b{0, -3, 2};
    bool hit10 = false, hit01 = false;
    for (long long m1 = -10; m1 <= 10; ++m1)
        for (long long m2 = -10; m2 <= 10; ++m2)
            for (long long m3 = -10; m3 <= 10; ++m3) {
                const IVec3 m{m1, m2, m3};
                const long long u = idot(a, m), v = idot(b, m);
                hit10 |= (u == 1 && v == 0);
                hit01 |= (u == 0 && v == 1);
            }
    CHECK(hit10);
    CHECK(hit01);
    CHECK(is_full_image(a, b).full);
}

TEST_CASE("membership coordinates") {
    const auto basis = orthogonal_generators({1, 1, 1});
    const auto r1 = membership(basis, {1, -1, 0});
    REQUIRE(r1.has_value());
    CHECK((*r1) == std::array<long long, 2>{1, 0});

    // (1,0,-1) = a + (-1) b; reconstruct to check
    const auto r2 = membership(basis, {1, 0, -1});
    REQUIRE(r2.has_value());
    const auto [u, v] = *r2;
    for (int i = 0; i < 3; ++i)
        CHECK(u * basis.a[i] + v * basis.b[i] == IVec3{1, 0, -1}[i]);

    CHECK_FALSE(membership(basis, {1, 0, 0}).has_value());
}

TEST_CASE("random lattice property suite") {
    Rng rng(99);
    int done = 0;
    while (done < 1000) {
        IVec3 c{rng.int_range(-50, 50), rng.int_range(-50, 50), rng.int_range(-50, 50)};
        if (c[0] == 0 && c[1] == 0 && c[2] == 0) continue;
        ++done;
        const IVec3 prim = primitive_part(c);
        const auto basis = orthogonal_generators(prim);
        CHECK(idot(basis.a, prim) == 0);
        CHECK(idot(basis.b, prim) == 0);
        CHECK(is_full_image(basis.a, basis.b).full);

        // random element of G(c): integer combination, then membership round-trip
        const long long u = rng.int_range(-20, 20);
        const long long v = rng.int_range(-20, 20);
        const IVec3 m{u * basis.a[0] + v * basis.b[0], u * basis.a[1] + v * basis.b[1],
                      u * basis.a[2] + v * basis.b[2]};
        const auto back = membership(basis, m);
        REQUIRE(back.has_value());
        CHECK((*back) == std::array<long long, 2>{u, v});

        // any unimodular change of generators keeps the image full
        long long p = rng.int_range(-4, 4), q = rng.int_range(-4, 4);
        long long r = rng.int_range(-4, 4), s;
        // complete (p, q) to a unimodular matrix [[p, q], [r, s]]
        if (p == 0 && q == 0) p = 1;
        const long long g = gcd_ll(p, q);
        p /= g;
        q /= g;
        long long x, y;
        extended_gcd(p, q, x, y);
        r = -y;
        s = x;
        const IVec3 a2{p * basis.a[0] + q * basis.b[0], p * basis.a[1] + q * basis.b[1],
                       p * basis.a[2] + q * basis.b[2]};
        const IVec3 b2{r * basis.a[0] + s * basis.b[0], r * basis.a[1] + s * basis.b[1],
                       r * basis.a[2] + s * basis.b[2]};
        CHECK(p * s - q * r == 1);
        CHECK(is_full_image(a2, b2).full);
    }
}

TEST_CASE("projected random integer vectors are combinations of the basis") {
    Rng rng(123);
    int done = 0;
    while (done < 500) {
        IVec3 c{rng.int_range(-20, 20), rng.int_range(-20, 20), rng.int_range(-20, 20)};
        if (c[0] == 0 && c[1] == 0 && c[2] == 0) continue;
        const IVec3 prim = primitive_part(c);
        const auto basis = orthogonal_generators(prim);
        // integer projection of a random vector onto the orthogonal complement:
        // m = |c|^2 w - (w.c) c
        const IVec3 w{rng.int_range(-30, 30), rng.int_range(-30, 30), rng.int_range(-30, 30)};
        const long long c2 = idot(prim, prim);
        const long long wc = idot(w, prim);
        const IVec3 m{c2 * w[0] - wc * prim[0], c2 * w[1] - wc * prim[1], c2 * w[2] - wc * prim[2]};
        if (m[0] == 0 && m[1] == 0 && m[2] == 0) continue;
        ++done;
        REQUIRE(idot(m, prim) == 0);
        const auto uv = membership(basis, m);
        REQUIRE(uv.has_value());
        for (int i = 0; i < 3; ++i)
            CHECK((*uv)[0] * basis.a[i] + (*uv)[1] * basis.b[i] == m[i]);
    }
}
