#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fhereg/data_io.hpp"
#include "fhereg/encrypted.hpp"

#include <random>

using namespace fhereg;
namespace ck = fhereg::ckks;

namespace {

double runif(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
double rsym(std::mt19937_64& rng) { return 2.0 * runif(rng) - 1.0; }

Dataset random_dataset(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
    Matrix feats(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) feats(i, j) = rsym(rng);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = rsym(rng);
    return make_dataset(feats, y, {-1.0, 1.0});
}

const ck::HeParams roomy = ck::HeParams::with_slots(1024, 1200, 30);  // 40 levels

}  // namespace

TEST_CASE("pack_inputs lays ciphertexts out as specified") {
    Dataset ds;
    ds.x.resize(2, 2);
    ds.x << 1.0, -0.5, 1.0, 0.75;
    ds.y.resize(2);
    ds.y << 3.0, 4.0;
    SfhDiagonal b = sfh_linear(ds);
    EncryptedTrainingState st = pack_inputs(ds, b, roomy);

    REQUIRE(st.ct_x.size() == 1);
    CHECK(ck::decrypt(st.ct_x[0]) == ds.x);

    Matrix expect_y(2, 2);
    expect_y << 3.0, 3.0, 4.0, 4.0;
    CHECK(ck::decrypt(st.ct_y[0]) == expect_y);

    CHECK(ck::decrypt(st.ct_beta).isZero(0.0));
    CHECK(st.ct_beta.level == roomy.initial_levels());

    // the packed diagonal is the inverted one: it multiplies the gradient
    CHECK(ck::decrypt(st.ct_bbar).row(0).transpose() == b.inv_diag);
    CHECK(ck::decrypt(st.ct_bbar).row(1).transpose() == b.inv_diag);
}

TEST_CASE("linear step is a fixed point at zero gradient") {
    Dataset ds;
    ds.x.resize(1, 1);
    ds.x << 1.0;
    ds.y.resize(1);
    ds.y << 0.0;
    EncryptedTrainingState st = pack_inputs(ds, sfh_linear(ds), roomy);
    encrypted_gradient_step_linear(st);
    CHECK(ck::decrypt(st.ct_beta).isZero(0.0));
}

TEST_CASE("one encrypted linear step matches the cleartext update") {
    std::mt19937_64 rng(211);
    Dataset ds = random_dataset(rng, 4, 2);
    SfhDiagonal b = sfh_linear(ds);
    EncryptedTrainingState st = pack_inputs(ds, b, roomy);
    encrypted_gradient_step_linear(st);

    Vector clear = sfh_update(Vector::Zero(3), l0_gradient(ds, Vector::Zero(3)), b, -1);
    Vector enc = ck::decrypt(st.ct_beta).row(0).transpose();
    CHECK((clear - enc).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("per-iteration level costs match the frozen constants") {
    std::mt19937_64 rng(223);
    Dataset ds = random_dataset(rng, 6, 3);
    SUBCASE("linear") {
        EncryptedTrainingState st = pack_inputs(ds, sfh_linear(ds), roomy);
        const int before = st.ct_beta.level;
        encrypted_gradient_step_linear(st);
        CHECK(before - st.ct_beta.level == kLinearLevelsPerIteration);
        CHECK(st.report.total_mults == 3);   // 2 per block + the diagonal product
    }
    SUBCASE("lffr") {
        Dataset unit = ds;
        unit.y = (unit.y.array() + 1.0) / 2.0;
        EncryptedTrainingState st = pack_inputs(unit, sfh_lffr(unit), roomy);
        const int before = st.ct_beta.level;
        encrypted_gradient_step_lffr(st);
        CHECK(before - st.ct_beta.level == kLffrLevelsPerIteration);
        CHECK(st.report.total_mults == 8);   // 7 per block + the diagonal product
    }
    CHECK(kLffrLevelsPerIteration - kLinearLevelsPerIteration == 5);
}

TEST_CASE("one encrypted lffr step matches the cleartext poly3 update") {
    std::mt19937_64 rng(227);
    Dataset ds = random_dataset(rng, 5, 2);
    ds.y = (ds.y.array() + 1.0) / 2.0;  // unit targets
    SfhDiagonal b = sfh_lffr(ds);
    EncryptedTrainingState st = pack_inputs(ds, b, roomy);
    encrypted_gradient_step_lffr(st);

    Vector clear = sfh_update(
        Vector::Zero(3),
        l2_gradient(ds, Vector::Zero(3), sigmoid_fn_for(SigmoidKind::poly3)), b, -1);
    Vector enc = ck::decrypt(st.ct_beta).row(0).transpose();
    CHECK((clear - enc).lpNorm<Eigen::Infinity>() <= 1e-12);
    // beta starts at zero, so the sigmoid stage held 0.5 in every slot and
    // the residual against y is 0.5 - y
    CHECK(poly_sigmoid3(0.0) == 0.5);
}

TEST_CASE("refresh policy keeps training alive on a tight budget") {
    std::mt19937_64 rng(229);
    Dataset ds = random_dataset(rng, 6, 2);
    const ck::HeParams tight = ck::HeParams::with_slots(64, 90, 30);  // 3 levels
    SfhDiagonal b = sfh_linear(ds);
    EncryptedTrainingState st = pack_inputs(ds, b, tight);
    for (int k = 0; k < 4; ++k) encrypted_gradient_step_linear(st);
    CHECK(st.report.total_refreshes() == 3);
    CHECK(st.report.refresh_events[0].first == 1);
    CHECK(st.report.refresh_events[0].second == "linear step");
}

TEST_CASE("without refresh the depth error lands at the predicted iteration") {
    std::mt19937_64 rng(233);
    Dataset ds = random_dataset(rng, 6, 2);
    const ck::HeParams nine = ck::HeParams::with_slots(64, 270, 30);  // 9 levels
    EncryptedTrainingState st = pack_inputs(ds, sfh_linear(ds), nine);
    // floor(9/3) = 3 iterations fit; the fourth must fail
    for (int k = 0; k < 3; ++k)
        CHECK_NOTHROW(encrypted_gradient_step_linear(st, /*auto_refresh=*/false));
    CHECK_THROWS_AS(encrypted_gradient_step_linear(st, /*auto_refresh=*/false),
                    ck::DepthError);
}

TEST_CASE("forced refresh every iteration leaves the weights unchanged") {
    std::mt19937_64 rng(239);
    Dataset ds = random_dataset(rng, 8, 3);
    SfhDiagonal b = sfh_linear(ds);

    EncryptedTrainingState lazy = pack_inputs(ds, b, roomy);
    EncryptedTrainingState eager = pack_inputs(ds, b, roomy);
    for (int k = 0; k < 6; ++k) {
        encrypted_gradient_step_linear(lazy);
        eager.ct_beta = ck::refresh(eager.ct_beta);
        encrypted_gradient_step_linear(eager);
    }
    CHECK(ck::decrypt(lazy.ct_beta) == ck::decrypt(eager.ct_beta));
}

TEST_CASE("train_encrypted matches its cleartext twin") {
    std::mt19937_64 rng(241);
    SUBCASE("linear") {
        Dataset ds = random_dataset(rng, 32, 4);
        TrainConfig cfg;
        cfg.algorithm = Algorithm::linear;
        cfg.iterations = 15;
        auto [enc, report] = train_encrypted(ds, cfg, roomy, true);
        TrainedModel clear = train_linear(ds, cfg, true);
        CHECK((enc.weights - clear.weights).lpNorm<Eigen::Infinity>() <= 1e-9);
        CHECK(report.total_refreshes() ==
              predicted_refreshes(40, kLinearLevelsPerIteration, 15));
    }
    SUBCASE("lffr with poly3") {
        Dataset ds = random_dataset(rng, 24, 3);
        TrainConfig cfg;
        cfg.algorithm = Algorithm::lffr;
        cfg.iterations = 12;
        cfg.sigmoid_kind = SigmoidKind::poly3;
        auto [enc, report] = train_encrypted(ds, cfg, roomy);
        TrainedModel clear = train_lffr(ds, cfg);
        CHECK((enc.weights - clear.weights).lpNorm<Eigen::Infinity>() <= 1e-9);
        CHECK(enc.config.sigmoid_kind == SigmoidKind::poly3);
    }
    SUBCASE("improved lffr") {
        Dataset ds = random_dataset(rng, 40, 5);
        TrainConfig cfg;
        cfg.algorithm = Algorithm::improved_lffr;
        cfg.iterations = 18;
        auto [enc, report] = train_encrypted(ds, cfg, roomy);
        TrainedModel clear = train_improved_lffr(ds, cfg);
        CHECK((enc.weights - clear.weights).lpNorm<Eigen::Infinity>() <= 1e-9);
        REQUIRE(enc.scaler.has_value());
        CHECK(enc.scaler->gamma == cfg.gamma);
    }
    SUBCASE("a run with at least two refreshes still matches") {
        Dataset ds = random_dataset(rng, 16, 2);
        TrainConfig cfg;
        cfg.algorithm = Algorithm::lffr;
        cfg.iterations = 10;
        cfg.sigmoid_kind = SigmoidKind::poly3;
        const ck::HeParams small = ck::HeParams::with_slots(64, 480, 30);  // 16 levels
        auto [enc, report] = train_encrypted(ds, cfg, small);
        CHECK(report.total_refreshes() >= 2);
        TrainedModel clear = train_lffr(ds, cfg);
        CHECK((enc.weights - clear.weights).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
}

TEST_CASE("refresh accounting matches the analytic count") {
    std::mt19937_64 rng(251);
    struct Combo {
        int log_q, log_p, iters;
        Algorithm algo;
    };
    const Combo combos[] = {
        {1200, 30, 20, Algorithm::linear},   // the full 40-level budget
        {1200, 30, 20, Algorithm::lffr},
        {1200, 30, 1, Algorithm::linear},    // full budget, single iteration
        {300, 30, 9, Algorithm::linear},
        {300, 30, 7, Algorithm::lffr},
        {90, 30, 5, Algorithm::linear},
        {270, 30, 10, Algorithm::linear},
        {480, 60, 6, Algorithm::lffr},
        {600, 30, 25, Algorithm::improved_lffr},
        {240, 30, 13, Algorithm::lffr},
    };
    for (const Combo& c : combos) {
        CAPTURE(c.log_q);
        CAPTURE(c.iters);
        Dataset ds = random_dataset(rng, 12, 3);
        TrainConfig cfg;
        cfg.algorithm = c.algo;
        cfg.iterations = c.iters;
        if (c.algo == Algorithm::lffr) cfg.sigmoid_kind = SigmoidKind::poly3;
        const ck::HeParams p = ck::HeParams::with_slots(256, c.log_q, c.log_p);
        auto [model, report] = train_encrypted(ds, cfg, p);
        const int expected = predicted_refreshes(
            p.initial_levels(), levels_per_iteration(c.algo), c.iters);
        CHECK(report.total_refreshes() == expected);
        CHECK(report.levels_per_iteration == levels_per_iteration(c.algo));
    }
}

TEST_CASE("mult accounting") {
    std::mt19937_64 rng(257);
    Dataset ds = random_dataset(rng, 10, 3);
    TrainConfig cfg;
    cfg.algorithm = Algorithm::linear;
    cfg.iterations = 7;
    auto [model, report] = train_encrypted(ds, cfg, roomy);
    CHECK(report.total_mults == 7 * 3);

    cfg.algorithm = Algorithm::lffr;
    auto [model2, report2] = train_encrypted(ds, cfg, roomy);
    CHECK(report2.total_mults == 7 * 8);
}

TEST_CASE("sharding") {
    SUBCASE("California-shaped data shards by the padding arithmetic") {
        const ck::HeParams full = ck::HeParams::from_log_n(16, 1200, 30);
        CHECK(rows_per_ciphertext(9, full) == 2048);
        Dataset ca;
        ca.x = Matrix::Zero(20640, 9);
        ca.x.col(0).setOnes();
        ca.y = Vector::Zero(20640);
        CHECK(shard_dataset(ca, full).size() == 11);
    }
    SUBCASE("a fitting dataset stays in one block") {
        std::mt19937_64 rng(263);
        Dataset ds = random_dataset(rng, 10, 3);
        CHECK(shard_dataset(ds, roomy).size() == 1);
    }
    SUBCASE("sharded training matches the cleartext twin") {
        std::mt19937_64 rng(269);
        Dataset ds = random_dataset(rng, 20, 2);       // 3 cols -> 4 padded
        const ck::HeParams tiny = ck::HeParams::with_slots(32, 1200, 30);  // 8 rows/ct
        CHECK(shard_dataset(ds, tiny).size() == 3);
        TrainConfig cfg;
        cfg.algorithm = Algorithm::linear;
        cfg.iterations = 9;
        auto [enc, report] = train_encrypted(ds, cfg, tiny);
        TrainedModel clear = train_linear(ds, cfg);
        CHECK((enc.weights - clear.weights).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
    SUBCASE("block gradients add up to the whole-dataset gradient") {
        std::mt19937_64 rng(271);
        Dataset ds = random_dataset(rng, 20, 2);
        const ck::HeParams tiny = ck::HeParams::with_slots(32, 1200, 30);
        Vector w(3);
        w << 0.2, -0.1, 0.4;
        Vector acc = Vector::Zero(3);
        for (const Dataset& blk : shard_dataset(ds, tiny))
            acc += l0_gradient(blk, w);
        CHECK((acc - l0_gradient(ds, w)).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
    SUBCASE("oversized data with sharding disabled is a capacity error") {
        std::mt19937_64 rng(277);
        Dataset ds = random_dataset(rng, 20, 2);
        const ck::HeParams tiny = ck::HeParams::with_slots(32, 1200, 30);
        CHECK_THROWS_AS(pack_inputs(ds, sfh_linear(ds), tiny, false),
                        ck::CapacityError);
    }
}

TEST_CASE("configuration errors") {
    std::mt19937_64 rng(281);
    Dataset ds = random_dataset(rng, 8, 2);
    TrainConfig cfg;
    cfg.algorithm = Algorithm::ridge;
    CHECK_THROWS_AS(train_encrypted(ds, cfg, roomy), std::invalid_argument);

    cfg.algorithm = Algorithm::lffr;
    cfg.iterations = 3;
    const ck::HeParams shallow = ck::HeParams::with_slots(64, 150, 30);  // 5 levels
    CHECK_THROWS_AS(train_encrypted(ds, cfg, shallow), std::invalid_argument);
    CHECK_THROWS_AS(predicted_refreshes(5, 8, 3), std::invalid_argument);
}
