#include <catch2/catch_amalgamated.hpp>

#include "amod/common/rng.hpp"
#include "amod/deepc/hankel.hpp"

using namespace amod;
using deepc::SignalSeries;

namespace {

SignalSeries scalar_series(std::initializer_list<double> values) {
    Eigen::MatrixXd m(1, static_cast<Eigen::Index>(values.size()));
    int i = 0;
    for (double v : values) m(0, i++) = v;
    return SignalSeries(std::move(m));
}

// rank oracle on an independent factorization path
Eigen::Index lu_rank(const Eigen::MatrixXd& m) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    lu.setThreshold(1e-10);
    return lu.rank();
}

}  // namespace

TEST_CASE("block hankel construction", "[hankel]") {
    const auto h = deepc::build_hankel(scalar_series({1, 2, 3, 4}), 2);
    REQUIRE(h.rows() == 2);
    REQUIRE(h.cols() == 3);
    Eigen::MatrixXd expected(2, 3);
    expected << 1, 2, 3, 2, 3, 4;
    CHECK(h == expected);

    Eigen::MatrixXd two(2, 3);
    two << 1, 2, 3, 4, 5, 6;
    const auto h1 = deepc::build_hankel(SignalSeries(two), 1);
    CHECK(h1 == two);

    CHECK_THROWS_AS(deepc::build_hankel(scalar_series({1, 2, 3, 4, 5}), 6), ConfigError);
}

TEST_CASE("hankel dimension law", "[hankel]") {
    Rng rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const int dim = 1 + static_cast<int>(rng.below(4));
        const int T = 3 + static_cast<int>(rng.below(40));
        const int L = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(T)));
        Eigen::MatrixXd m(dim, T);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < T; ++j) m(i, j) = rng.uniform(-1, 1);
        const auto h = deepc::build_hankel(SignalSeries(m), L);
        REQUIRE(h.rows() == dim * L);
        REQUIRE(h.cols() == T - L + 1);
    }
}

TEST_CASE("persistent excitation checks", "[hankel]") {
    CHECK_FALSE(deepc::is_persistently_exciting(scalar_series({1, 1, 1, 1, 1}), 2));

    const auto rich = scalar_series({1, 2, 4, 8, 16, 31});
    CHECK(deepc::is_persistently_exciting(rich, 2));
    CHECK(lu_rank(deepc::build_hankel(rich, 2)) == 2);

    Rng rng(12345);
    Eigen::MatrixXd m(2, 60);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 60; ++j) m(i, j) = rng.uniform01();
    const SignalSeries s(m);
    CHECK(deepc::is_persistently_exciting(s, 5));
    CHECK(lu_rank(deepc::build_hankel(s, 5)) == 10);
}

TEST_CASE("hankel set assembly", "[hankel]") {
    SECTION("scalar dimension bookkeeping") {
        Rng rng(7);
        Eigen::MatrixXd u(1, 12), w(1, 12), y(1, 12);
        for (int j = 0; j < 12; ++j) {
            u(0, j) = rng.uniform01();
            w(0, j) = rng.uniform01();
            y(0, j) = rng.uniform01();
        }
        const auto h = deepc::assemble_hankel_set(SignalSeries(u), SignalSeries(w), SignalSeries(y), 2, 2);
        for (const Eigen::MatrixXd* block : {&h.Up, &h.Uf, &h.Wp, &h.Wf, &h.Yp, &h.Yf}) {
            CHECK(block->rows() == 2);
            CHECK(block->cols() == 9);
        }
    }

    SECTION("reference-scale dimensions") {
        const int R = 5, m = R * R, q = 2 * R, p = R, T_d = 3000;
        Eigen::MatrixXd u = Eigen::MatrixXd::Zero(m, T_d), w = Eigen::MatrixXd::Zero(q, T_d),
                        y = Eigen::MatrixXd::Zero(p, T_d);
        const auto h = deepc::assemble_hankel_set(SignalSeries(u), SignalSeries(w), SignalSeries(y), 35, 10);
        CHECK(h.Up.rows() == 875);
        CHECK(h.Up.cols() == 2956);
        CHECK(h.Uf.rows() == m * 10);
        CHECK(h.Wp.rows() == q * 35);
        CHECK(h.Yf.rows() == p * 10);
        CHECK(h.cols() == 2956);
    }

    SECTION("length mismatch") {
        Eigen::MatrixXd u = Eigen::MatrixXd::Zero(1, 10), w = Eigen::MatrixXd::Zero(1, 9),
                        y = Eigen::MatrixXd::Zero(1, 10);
        CHECK_THROWS_AS(deepc::assemble_hankel_set(SignalSeries(u), SignalSeries(w), SignalSeries(y), 2, 2),
                        ConfigError);
    }

    SECTION("too short") {
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(1, 3);
        CHECK_THROWS_AS(deepc::assemble_hankel_set(SignalSeries(s), SignalSeries(s), SignalSeries(s), 2, 2),
                        ConfigError);
    }

    SECTION("rank-deficient data only warns") {
        Eigen::MatrixXd u = Eigen::MatrixXd::Ones(1, 30), w = Eigen::MatrixXd::Ones(1, 30),
                        y = Eigen::MatrixXd::Ones(1, 30);
        const auto h = deepc::assemble_hankel_set(SignalSeries(u), SignalSeries(w), SignalSeries(y), 3, 3, 2);
        CHECK(h.pe_warning);
        CHECK(h.pe_order_checked == 8);
    }
}
