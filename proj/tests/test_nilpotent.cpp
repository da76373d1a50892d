#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "torogrow/nilpotent.hpp"
#include "torogrow/rng.hpp"

using namespace torogrow;

namespace {

Mat3 outer3(const Vec3& c, const Vec3& r) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = c[i] * r[j];
    return m;
}

Vec3 random_unit(Rng& rng) {
    for (;;) {
        Vec3 v{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const double n = norm(v);
        if (n < 0.1) continue;
        return {v[0] / n, v[1] / n, v[2] / n};
    }
}

Vec3 random_orthogonal(Rng& rng, const Vec3& u) {
    for (;;) {
        Vec3 w{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const double d = dot(w, u);
        Vec3 v{w[0] - d * u[0], w[1] - d * u[1], w[2] - d * u[2]};
        const double n = norm(v);
        if (n < 0.1) continue;
        return {v[0] / n, v[1] / n, v[2] / n};
    }
}

}  // namespace

TEST_CASE("square_zero_factor on elementary nilpotents") {
    Mat3 a;
    a(2, 0) = 1.0;
    const auto f = square_zero_factor(a);
    CHECK(f.column[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(f.column[1] == Catch::Approx(0.0).margin(1e-15));
    CHECK(f.column[2] == Catch::Approx(1.0));
    CHECK(f.row[0] == Catch::Approx(1.0));
    CHECK(f.row[1] == Catch::Approx(0.0).margin(1e-15));
    CHECK(f.row[2] == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("square_zero_factor 2x2 canonical form") {
    // a [c; 1] [1, -c] with a = 1, c = 2
    Mat2 a;
    a(0, 0) = 2.0;
    a(0, 1) = -4.0;
    a(1, 0) = 1.0;
    a(1, 1) = -2.0;
    const auto f = square_zero_factor(a);
    // column direction (2, 1)/sqrt(5), row scaled accordingly
    const double s = std::sqrt(5.0);
    CHECK(f.column[0] == Catch::Approx(2.0 / s));
    CHECK(f.column[1] == Catch::Approx(1.0 / s));
    CHECK(f.row[0] == Catch::Approx(s));
    CHECK(f.row[1] == Catch::Approx(-2.0 * s));
    // reconstruction and orthogonality
    CHECK(f.column[0] * f.row[1] == Catch::Approx(-4.0));
    CHECK(dot(f.column, f.row) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("square_zero_factor recovers constructed factorizations") {
    const Vec3 c{1.0, 2.0, 3.0};
    const Vec3 r{3.0, 0.0, -1.0};
    REQUIRE(dot(c, r) == 0.0);
    const Mat3 a = outer3(c, r);
    const auto f = square_zero_factor(a);
    double recon = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            recon = std::max(recon, std::abs(a(i, j) - f.column[i] * f.row[j]));
    CHECK(recon <= 1e-12 * a.frobenius());
    CHECK(std::abs(dot(f.column, f.row)) <= 1e-12);
}

TEST_CASE("square_zero_factor rejects bad input") {
    CHECK_THROWS_AS(square_zero_factor(Mat3::identity()), StructuralError);
    CHECK_THROWS_AS(square_zero_factor(Mat3{}), InputError);  // zero matrix

    // the order-3 Jordan block squares to a nonzero matrix
    Mat3 jordan;
    jordan(1, 0) = 1.0;
    jordan(2, 1) = 1.0;
    CHECK_THROWS_AS(square_zero_factor(jordan), StructuralError);

    // rank-2 contamination beyond tolerance is rejected
    Rng rng(1);
    const Vec3 u = random_unit(rng);
    const Vec3 v = random_orthogonal(rng, u);
    Mat3 a = outer3(u, v);
    const Mat3 noise = outer3(v, cross(u, v));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) += 1e-5 * noise(i, j);
    CHECK_THROWS_AS(square_zero_factor(a), StructuralError);
}

TEST_CASE("factorization round trip on random square-zero matrices") {
    Rng rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec3 u = random_unit(rng);
        const Vec3 v = random_orthogonal(rng, u);
        const double scale = std::exp(rng.uniform(-2.0, 2.0));
        Mat3 a = outer3(u, v).scaled(scale);
        const auto f = square_zero_factor(a);
        double recon = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                recon = std::max(recon, std::abs(a(i, j) - f.column[i] * f.row[j]));
        REQUIRE(recon <= 1e-12 * a.frobenius());
        REQUIRE(std::abs(dot(f.column, f.row)) <= 1e-10 * norm(f.row));
        // deterministic normalization
        REQUIRE(norm(f.column) == Catch::Approx(1.0));
    }
}

TEST_CASE("classify_pair elementary cases") {
    Mat3 a, b;
    a(2, 0) = 1.0;  // shared column e3, rows e1 and e2
    b(2, 1) = 1.0;
    const auto cc = classify_pair(a, b);
    CHECK(cc.kind == PairKind::CommonColumn);
    CHECK(cc.shared[2] == Catch::Approx(1.0));
    CHECK(cc.vec_a[0] == Catch::Approx(1.0));
    CHECK(cc.vec_b[1] == Catch::Approx(1.0));

    Mat3 c, d;
    c(1, 0) = 1.0;  // shared row e1, columns e2 and e3
    d(2, 0) = 1.0;
    const auto cr = classify_pair(c, d);
    CHECK(cr.kind == PairKind::CommonRow);
    CHECK(cr.shared[0] == Catch::Approx(1.0));
    CHECK(cr.vec_a[1] == Catch::Approx(1.0));
    CHECK(cr.vec_b[2] == Catch::Approx(1.0));
}

TEST_CASE("classify_pair on a constructed common-column pair") {
    const Vec3 u{1.0, 1.0, 1.0};
    const Vec3 v{1.0, -1.0, 0.0};
    const Vec3 w{1.0, 1.0, -2.0};
    REQUIRE(dot(u, v) == 0.0);
    REQUIRE(dot(u, w) == 0.0);
    const Mat3 a = outer3(u, v);
    const Mat3 b = outer3(u, w);
    // all four product conditions vanish
    CHECK((a * a).frobenius() <= 1e-12);
    CHECK((b * b).frobenius() <= 1e-12);
    CHECK((a * b).frobenius() <= 1e-12);
    CHECK((b * a).frobenius() <= 1e-12);
    const auto cls = classify_pair(a, b);
    CHECK(cls.kind == PairKind::CommonColumn);
    const double align = std::abs(dot(cls.shared, u)) / norm(u);
    CHECK(align == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("classify_pair symmetry and reconstruction on random pairs") {
    Rng rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec3 shared = random_unit(rng);
        const Vec3 va = random_orthogonal(rng, shared);
        const Vec3 vb = random_orthogonal(rng, shared);
        const bool common_column = (trial % 2 == 0);
        const Mat3 a = common_column ? outer3(shared, va) : outer3(va, shared);
        const Mat3 b = common_column ? outer3(shared, vb) : outer3(vb, shared);

        const auto cls = classify_pair(a, b);
        REQUIRE(cls.residual <= 1e-12);
        const auto swapped = classify_pair(b, a);
        CHECK(swapped.kind == cls.kind);
        // shared direction agrees up to sign
        CHECK(std::abs(dot(cls.shared, swapped.shared)) == Catch::Approx(1.0).margin(1e-10));
        // shared is orthogonal to both per-matrix vectors
        CHECK(std::abs(dot(cls.shared, cls.vec_a)) <= 1e-10 * norm(cls.vec_a));
        CHECK(std::abs(dot(cls.shared, cls.vec_b)) <= 1e-10 * norm(cls.vec_b));
    }
}

TEST_CASE("classify_pair accepts proportional pairs either way") {
    const Vec3 u{0.0, 0.0, 1.0};
    const Vec3 v{1.0, 0.0, 0.0};
    const Mat3 a = outer3(u, v);
    const Mat3 b = a.scaled(-2.5);
    const auto cls = classify_pair(a, b);
    CHECK(cls.residual <= 1e-12);
}

TEST_CASE("classify_pair rejects pairs with nonzero products") {
    Mat3 a, b;
    a(0, 1) = 1.0;  // e1 e2^T
    b(1, 2) = 1.0;  // e2 e3^T ; then A B = e1 e3^T != 0
    CHECK_THROWS_AS(classify_pair(a, b), StructuralError);
}
