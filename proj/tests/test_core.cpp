#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rejectlab/core.hpp"

using namespace rejectlab;

namespace {

FeatureVector random_vector(std::mt19937_64& rng, std::size_t n, double scale = 3.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    FeatureVector v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t n, double scale = 2.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng);
    return m;
}

// evaluates (a-b)ᵀ (ΩᵀΩ) (a-b) the long way, as the cross-check for the
// factored ||Ω(a-b)||² route
double naive_quadratic_form(const FeatureVector& a, const FeatureVector& b, const Matrix& omega) {
    std::size_t n = a.size();
    Matrix lambda = omega.transpose_times_self();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s += (a[i] - b[i]) * lambda(i, j) * (a[j] - b[j]);
    return s;
}

}  // namespace

TEST_CASE("squared_euclidean basic values") {
    CHECK(squared_euclidean({0, 0}, {0, 0}) == 0.0);
    CHECK(squared_euclidean({1, 0}, {0, 0}) == 1.0);
    CHECK(squared_euclidean({3, 4}, {0, 0}) == 25.0);
}

TEST_CASE("squared_euclidean rejects mismatched dimensions") {
    CHECK_THROWS_AS(squared_euclidean({1, 2}, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("quadratic form with normalized identity metric") {
    auto m = MetricMatrix::scaled_identity(2);
    // unit displacement under Lambda = I/n gives 1/n
    CHECK_THAT(quadratic_form_distance({1, 0}, {0, 0}, m),
               Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK(quadratic_form_distance({2, -1}, {2, -1}, m) == 0.0);
}

TEST_CASE("quadratic form matches explicit evaluation order") {
    std::mt19937_64 rng(901);
    for (int it = 0; it < 100; ++it) {
        std::size_t n = 1 + static_cast<std::size_t>(rng() % 8);
        Matrix omega = random_matrix(rng, n);
        auto a = random_vector(rng, n);
        auto b = random_vector(rng, n);
        MetricMatrix m(omega);
        double fast = quadratic_form_distance(a, b, m);
        double slow = naive_quadratic_form(a, b, omega);
        CHECK_THAT(fast, Catch::Matchers::WithinRel(slow, 1e-10) ||
                             Catch::Matchers::WithinAbs(slow, 1e-12));
        CHECK(fast >= 0.0);
        // symmetric in the two points
        CHECK(quadratic_form_distance(b, a, m) == fast);
    }
}

TEST_CASE("quadratic form with identity equals squared euclidean") {
    std::mt19937_64 rng(902);
    MetricMatrix ident{Matrix::identity(4)};
    for (int it = 0; it < 100; ++it) {
        auto a = random_vector(rng, 4);
        auto b = random_vector(rng, 4);
        CHECK_THAT(quadratic_form_distance(a, b, ident),
                   Catch::Matchers::WithinRel(squared_euclidean(a, b), 1e-12));
    }
}

TEST_CASE("quadratic form rejects mismatched dimensions") {
    auto m = MetricMatrix::scaled_identity(3);
    CHECK_THROWS_AS(quadratic_form_distance({1, 2}, {1, 2}, m), std::invalid_argument);
}

TEST_CASE("normalize_trace scales to unit trace") {
    Matrix two_i = Matrix::identity(2);
    two_i.scale(2.0);
    auto m = normalize_trace(MetricMatrix(two_i));
    Matrix lambda = m.lambda();
    CHECK_THAT(lambda(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK_THAT(lambda(1, 1), Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK_THAT(m.trace_lambda(), Catch::Matchers::WithinAbs(1.0, 1e-15));

    auto m3 = normalize_trace(MetricMatrix(Matrix::identity(3)));
    CHECK_THAT(m3.lambda()(0, 0), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));
}

TEST_CASE("normalize_trace on random factors") {
    std::mt19937_64 rng(903);
    for (int it = 0; it < 100; ++it) {
        std::size_t n = 1 + static_cast<std::size_t>(rng() % 6);
        MetricMatrix m(random_matrix(rng, n));
        auto normed = normalize_trace(m);
        CHECK_THAT(normed.lambda().trace(), Catch::Matchers::WithinAbs(1.0, 1e-12));
        // idempotent
        auto twice = normalize_trace(normed);
        CHECK_THAT(twice.trace_lambda(), Catch::Matchers::WithinAbs(normed.trace_lambda(), 1e-12));
    }
}

TEST_CASE("normalize_trace rejects the zero matrix") {
    CHECK_THROWS_AS(normalize_trace(MetricMatrix(Matrix(3, 3, 0.0))), std::invalid_argument);
}

TEST_CASE("mix_seed separates streams") {
    CHECK(mix_seed(42, 0) != mix_seed(42, 1));
    CHECK(mix_seed(42, 0, 1) != mix_seed(42, 1, 0));
    CHECK(mix_seed(42, 7) == mix_seed(42, 7));
}

TEST_CASE("format_double round-trips") {
    std::mt19937_64 rng(904);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int it = 0; it < 100; ++it) {
        double v = u(rng);
        std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0) == "1");
}
