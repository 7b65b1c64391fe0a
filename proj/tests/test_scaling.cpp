#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fhereg/core.hpp"
#include "fhereg/dataset.hpp"

#include <cmath>
#include <random>

using namespace fhereg;

namespace {
double runif(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
}  // namespace

TEST_CASE("minmax_scale_features") {
    SUBCASE("affine endpoints into [0,1]") {
        Matrix col(3, 1);
        col << 0.0, 5.0, 10.0;
        auto [scaled, fs] = minmax_scale_features(col, 0.0, 1.0);
        CHECK(scaled(0, 0) == 0.0);
        CHECK(scaled(1, 0) == 0.5);
        CHECK(scaled(2, 0) == 1.0);
        CHECK(fs.col_min[0] == 0.0);
        CHECK(fs.col_max[0] == 10.0);
    }
    SUBCASE("constant column maps to the midpoint") {
        Matrix col(3, 1);
        col << 3.0, 3.0, 3.0;
        auto [scaled, fs] = minmax_scale_features(col, -1.0, 1.0);
        CHECK(scaled.isZero(0.0));
        CHECK(fs.transform_one(42.0, 0) == 0.0);
    }
    SUBCASE("hand-computed [-1,1] map") {
        Matrix col(3, 1);
        col << -2.0, 0.0, 6.0;
        auto [scaled, fs] = minmax_scale_features(col, -1.0, 1.0);
        CHECK(scaled(0, 0) == doctest::Approx(-1.0));
        CHECK(scaled(1, 0) == doctest::Approx(-0.5));
        CHECK(scaled(2, 0) == doctest::Approx(1.0));
    }
    SUBCASE("same map applies to unseen rows") {
        Matrix two(4, 2);
        two << 0.0, 10.0, 1.0, 20.0, 2.0, 30.0, 4.0, 50.0;
        auto [scaled, fs] = minmax_scale_features(two, 0.0, 1.0);
        Vector probe(2);
        probe << 2.0, 30.0;
        Vector mapped = fs.transform(probe);
        CHECK(mapped[0] == doctest::Approx(0.5));
        CHECK(mapped[1] == doctest::Approx(0.5));
    }
    SUBCASE("bad range") {
        CHECK_THROWS_AS(minmax_scale_features(Matrix::Ones(2, 1), 1.0, 1.0),
                        std::invalid_argument);
    }
}

TEST_CASE("fit_target_scaler") {
    Vector y(3);
    y << 1.0, 2.0, 3.0;
    TargetScaler s = fit_target_scaler(y);
    CHECK(s.y_min == 1.0);
    CHECK(s.y_max == 3.0);
    CHECK(s.epsilon == 1e-8);
    CHECK(!s.gamma);

    Vector single(1);
    single << 7.0;
    TargetScaler deg = fit_target_scaler(single, 0.5);
    CHECK(deg.y_min == 7.0);
    CHECK(deg.y_max == 7.0);
    CHECK(deg.gamma == 0.5);

    SUBCASE("extrema match a brute-force scan") {
        std::mt19937_64 rng(3);
        Vector big(100);
        for (Eigen::Index i = 0; i < 100; ++i) big[i] = 20.0 * runif(rng) - 10.0;
        double mn = big[0], mx = big[0];
        for (Eigen::Index i = 1; i < 100; ++i) {
            mn = std::min(mn, big[i]);
            mx = std::max(mx, big[i]);
        }
        TargetScaler f = fit_target_scaler(big);
        CHECK(f.y_min == mn);
        CHECK(f.y_max == mx);
    }
    CHECK_THROWS_AS(fit_target_scaler(Vector(0)), std::invalid_argument);
    CHECK_THROWS_AS(fit_target_scaler(y, 1.5), std::invalid_argument);
}

TEST_CASE("unit target transforms") {
    TargetScaler s01 = fit_target_scaler((Vector(2) << 0.0, 1.0).finished());
    CHECK(scale_target_unit(s01, 1.0) == doctest::Approx(1.0 / (1.0 + 1e-8)).epsilon(1e-15));
    CHECK(scale_target_unit(s01, 0.0) == 0.0);

    TargetScaler s515 = fit_target_scaler((Vector(2) << 5.0, 15.0).finished());
    CHECK(scale_target_unit(s515, 10.0) ==
          doctest::Approx(5.0 / (10.0 + 1e-8)).epsilon(1e-15));

    CHECK(unscale_target_unit(s01, 0.0) == 0.0);
    CHECK(unscale_target_unit(s515, 1.0) ==
          doctest::Approx(15.0 + 1e-8).epsilon(1e-15));

    SUBCASE("round trip is the identity on the fitted range") {
        std::mt19937_64 rng(17);
        for (int t = 0; t < 50; ++t) {
            const double y = 5.0 + 10.0 * runif(rng);
            const double back = unscale_target_unit(s515, scale_target_unit(s515, y));
            CHECK(back == doctest::Approx(y).epsilon(1e-9));
        }
    }
}

TEST_CASE("windowed logit transforms") {
    TargetScaler s = fit_target_scaler((Vector(2) << 0.0, 1.0).finished(), 0.5);

    CHECK(logit_scale_target(s, 0.5) == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(logit_scale_target(s, 0.0) ==
          doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-12));
    CHECK(logit_scale_target(s, 1.0) == doctest::Approx(std::log(3.0)).epsilon(1e-6));

    CHECK(logit_unscale_target(s, 0.5) == doctest::Approx(0.5).epsilon(1e-7));
    // a probability outside the window extrapolates past the training range
    const double out = logit_unscale_target(s, 0.9);
    CHECK(out == doctest::Approx(1.3).epsilon(1e-7));
    CHECK(out > 1.0);

    SUBCASE("gamma is required") {
        TargetScaler plain = fit_target_scaler((Vector(2) << 0.0, 1.0).finished());
        CHECK_THROWS_AS(logit_scale_target(plain, 0.5), std::logic_error);
        CHECK_THROWS_AS(logit_unscale_target(plain, 0.5), std::logic_error);
    }
    SUBCASE("logit_unscale(sigmoid(logit_scale)) is the identity") {
        std::mt19937_64 rng(19);
        TargetScaler wide = fit_target_scaler((Vector(2) << -3.0, 9.0).finished(), 0.5);
        for (int t = 0; t < 50; ++t) {
            const double y = -3.0 + 12.0 * runif(rng);
            const double back =
                logit_unscale_target(wide, sigmoid(logit_scale_target(wide, y)));
            CHECK(back == doctest::Approx(y).epsilon(1e-9));
        }
    }
    SUBCASE("pre-logit value stays inside the gamma window") {
        std::mt19937_64 rng(21);
        TargetScaler w = fit_target_scaler((Vector(2) << 2.0, 4.0).finished(), 0.8);
        for (int t = 0; t < 200; ++t) {
            const double y = 2.0 + 2.0 * runif(rng);
            const double z = logit_scale_target(w, y);
            const double p = sigmoid(z);
            CHECK(p >= 0.5 - 0.8 / 2.0 - 1e-12);
            CHECK(p <= 0.5 + 0.8 / 2.0 + 1e-12);
        }
    }
}

TEST_CASE("sigmoid as normalizer reduces the problem to plain regression") {
    // mapping targets through sigmoid and undoing it with the logit leaves
    // the regression task unchanged
    std::mt19937_64 rng(29);
    for (int t = 0; t < 50; ++t) {
        const double y = 10.0 * runif(rng) - 5.0;
        CHECK(logit(sigmoid(y)) == doctest::Approx(y).epsilon(1e-12));
    }
}

TEST_CASE("dataset validation") {
    Dataset good;
    good.x.resize(2, 2);
    good.x << 1.0, 0.25, 1.0, 0.75;
    good.y.resize(2);
    good.y << 1.0, 2.0;
    good.feature_range = {0.0, 1.0};
    CHECK_NOTHROW(validate_dataset(good));

    Dataset bad = good;
    bad.x(1, 0) = 2.0;
    CHECK_THROWS_AS(validate_dataset(bad), std::invalid_argument);

    Dataset range = good;
    range.x(0, 1) = 3.0;
    CHECK_THROWS_AS(validate_dataset(range), std::invalid_argument);

    Matrix feats(2, 1);
    feats << 0.25, 0.75;
    Vector y(2);
    y << 1.0, 2.0;
    Dataset made = make_dataset(feats, y, {0.0, 1.0});
    CHECK(made.x.col(0).sum() == 2.0);
    CHECK(made.n_features() == 1);
}
