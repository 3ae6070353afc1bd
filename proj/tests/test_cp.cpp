#include <doctest.h>

#include <cmath>
#include <limits>

#include "ntf/cp.hpp"
#include "ntf/io.hpp"
#include "ntf/oracle.hpp"
#include "ntf/unfold.hpp"
#include "test_support.hpp"

using namespace ntf;
using ntftest::max_rel_err;
using ntftest::trace_nonincreasing;

namespace {
constexpr double kEps = 1e-12;
}

TEST_SUITE_BEGIN("cp");

TEST_CASE("cp_reconstruct examples") {
    CpFactors ones({Matrix::full(2, 3, 1.0), Matrix::full(2, 3, 1.0)});
    const DenseTensor t = cp_reconstruct(ones);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == 3.0);

    CpFactors rank1({Matrix(2, 1, {1.0, 2.0}), Matrix(2, 1, {3.0, 4.0})});
    CHECK(cp_reconstruct(rank1).values() == std::vector<double>{3.0, 4.0, 6.0, 8.0});

    Rng rng(0, Rng::kDataStream);
    const CpFactors f = random_cp_factors(std::vector<std::size_t>{4, 3, 2}, 3, rng, kEps);
    CHECK(max_rel_err(cp_reconstruct(f), oracle::brute_cp_reconstruct(f)) < 1e-14);
}

TEST_CASE("block update solves the scalar problem in one step") {
    const DenseTensor x({1, 1}, {2.0});
    CpFactors f({Matrix::full(1, 1, 1.0), Matrix::full(1, 1, 1.0)});
    const BetaParam p(1.0);
    const CpFactors g = bcomm_block_update(f, 0, x, p, kEps);
    CHECK(g.factors[0](0, 0) == 2.0);
    CHECK(D_beta(x, cp_reconstruct(g), p) == 0.0);
}

TEST_CASE("block update leaves a fixed point unchanged") {
    // dyadic values make P == Q bitwise, so the ratio is exactly one
    const DenseTensor x({1, 1}, {2.0});
    CpFactors f({Matrix::full(1, 1, 2.0), Matrix::full(1, 1, 1.0)});
    const CpFactors g = bcomm_block_update(f, 0, x, BetaParam(1.0), kEps);
    CHECK(g.factors[0](0, 0) == 2.0);

    // generic fixed point: reconstruction equals the data
    const auto [xs, truth] = synth_cp(std::vector<std::size_t>{4, 3, 2}, 2, 5);
    for (double b : {0.5, 1.0, 1.5}) {
        CpFactors h = truth;
        for (std::size_t n = 0; n < 3; ++n) h = bcomm_block_update(h, n, xs, BetaParam(b), kEps);
        CHECK(max_rel_err(h, truth) < 1e-13);
    }
}

TEST_CASE("one sweep equals the unfolding baseline") {
    const auto [x, truth] = synth_cp(std::vector<std::size_t>{6, 5, 4}, 2, 0);
    const CpFactors init = init_cp_factors(x.shape(), 2, 0, kEps);
    const BetaParam p(1.5);
    const CpFactors a = bcomm_sweep(init, x, p, kEps);
    const CpFactors b = mu_unfold_cp_sweep(init, x, p, kEps);
    CHECK(max_rel_err(a, b) < 1e-10);
}

TEST_CASE("block updates never increase the objective") {
    for (double b : {0.0, 0.5, 1.0, 1.5}) {
        const BetaParam p(b);
        for (std::uint64_t seed = 0; seed < 17; ++seed) {
            const DenseTensor x = ntftest::random_tensor({5, 4, 3}, seed);
            CpFactors f = init_cp_factors(x.shape(), 2, seed, kEps);
            double loss = D_beta(x, cp_reconstruct(f), p);
            for (std::size_t n = 0; n < f.order(); ++n) {
                f = bcomm_block_update(f, n, x, p, kEps);
                const double next = D_beta(x, cp_reconstruct(f), p);
                CHECK(next <= loss + 1e-12 * (1.0 + loss));
                loss = next;
            }
            for (const Matrix& m : f.factors)
                for (double v : m.values()) CHECK(v >= kEps);
        }
    }
}

TEST_CASE("bcomm_fit stopping rules") {
    const auto [x, truth] = synth_cp(std::vector<std::size_t>{4, 3, 2}, 2, 1);
    CpFactors init = init_cp_factors(x.shape(), 2, 1, kEps);

    FitConfig cfg;
    cfg.beta = 1.0;
    cfg.max_iters = 0;
    const CpFitResult r0 = bcomm_fit(x, init, cfg);
    CHECK(r0.trace.size() == 1);
    CHECK(r0.trace[0].iter == 0);
    CHECK(max_rel_err(r0.model, init) == 0.0);

    cfg.max_iters = 50;
    cfg.tol = std::numeric_limits<double>::infinity();
    const CpFitResult r1 = bcomm_fit(x, init, cfg);
    CHECK(r1.trace.size() == 2);  // stops right after the first outer iteration
}

TEST_CASE("bcomm_fit recovers a noiseless model") {
    const auto [x, truth] = synth_cp(std::vector<std::size_t>{10, 9, 8}, 2, 0);
    FitConfig cfg;
    cfg.beta = 1.0;
    cfg.max_iters = 500;
    const CpFitResult res = bcomm_fit(x, init_cp_factors(x.shape(), 2, 0, kEps), cfg);
    CHECK(trace_nonincreasing(res.trace));
    CHECK(res.trace.back().loss <= 1e-2 * res.trace.front().loss);
}

TEST_CASE("first joint inner update equals the block update") {
    for (const auto& dims : std::vector<std::vector<std::size_t>>{{7, 5}, {6, 5, 4}}) {
        const DenseTensor x = ntftest::random_tensor(dims, 3);
        const CpFactors f = init_cp_factors(x.shape(), 2, 3, kEps);
        for (double b : {0.0, 0.5, 1.0, 1.5}) {
            const BetaParam p(b);
            const JcommCpReference ctx = make_jcomm_reference(f, x, p, kEps);
            const CpFactors joint = jcomm_inner_update(f, ctx, 0, p, kEps);
            const CpFactors block = bcomm_block_update(f, 0, x, p, kEps);
            CHECK(joint.factors[0].values() == block.factors[0].values());
        }
    }
}

TEST_CASE("jcomm keeps a fixed point and never increases the objective") {
    const auto [x, truth] = synth_cp(std::vector<std::size_t>{5, 4, 3}, 2, 7);
    const BetaParam p(1.0);
    const CpFactors still = jcomm_outer_step(truth, x, p, 3, kEps);
    CHECK(max_rel_err(still, truth) < 1e-13);

    for (double b : {0.0, 0.5, 1.0, 1.5}) {
        const BetaParam pb(b);
        const DenseTensor y = ntftest::random_tensor({5, 4, 3}, 19);
        CpFactors f = init_cp_factors(y.shape(), 2, 19, kEps);
        for (int it = 0; it < 5; ++it) {
            const double before = D_beta(y, cp_reconstruct(f), pb);
            f = jcomm_outer_step(f, y, pb, 3, kEps);
            const double after = D_beta(y, cp_reconstruct(f), pb);
            CHECK(after <= before + 1e-12 * (1.0 + before));
        }
    }
}

TEST_CASE("jcomm_fit max_iters = 0 returns the initialization") {
    const DenseTensor x = ntftest::random_tensor({4, 3, 2}, 2);
    CpFactors init = init_cp_factors(x.shape(), 2, 2, kEps);
    FitConfig cfg;
    cfg.max_iters = 0;
    const CpFitResult res = jcomm_fit(x, init, cfg);
    CHECK(res.trace.size() == 1);
    CHECK(max_rel_err(res.model, init) == 0.0);
}

TEST_CASE("single-mode problems work on both paths") {
    const DenseTensor x = ntftest::random_tensor({6}, 21);
    const CpFactors init = init_cp_factors(x.shape(), 2, 21, kEps);
    const BetaParam p(1.0);
    const CpFactors a = bcomm_sweep(init, x, p, kEps);
    const CpFactors b = mu_unfold_cp_sweep(init, x, p, kEps);
    CHECK(max_rel_err(a, b) < 1e-12);
    CHECK(D_beta(x, cp_reconstruct(a), p) <= D_beta(x, cp_reconstruct(init), p));
}

TEST_CASE("extrapolate_block hand values") {
    CpFactors prev({Matrix::full(1, 1, 1.0)});
    ExtrapolationState st = make_extrapolation_state(prev, true, 1.0, 1e-6, kEps);

    st.alpha = 0.5;
    CHECK(extrapolate_block(Matrix::full(1, 1, 2.0), st, 0)(0, 0) == 2.5);

    st.previous.factors[0] = Matrix::full(1, 1, 2.0);
    CHECK(extrapolate_block(Matrix::full(1, 1, 1.0), st, 0)(0, 0) == 1.0);  // [delta]_+ = 0

    // first iteration: previous == current gives alpha = 0 and no movement
    ExtrapolationState fresh = make_extrapolation_state(prev, true, 1.0, 1e-6, kEps);
    extrapolation_begin_iteration(fresh, prev);
    CHECK(fresh.alpha == 0.0);
    CHECK(extrapolate_block(prev.factors[0], fresh, 0)(0, 0) == 1.0);
}

TEST_CASE("disabling extrapolation mid-run rejoins the plain path") {
    const auto [x, truth] = synth_cp(std::vector<std::size_t>{6, 5, 4}, 2, 12);
    const BetaParam p(1.0);
    CpFactors f = init_cp_factors(x.shape(), 2, 12, kEps);
    ExtrapolationState st = make_extrapolation_state(f, true, 1.0, 1e-6, kEps);

    auto extrapolated_iteration = [&](CpFactors cur) {
        const CpFactors snapshot = cur;
        extrapolation_begin_iteration(st, cur);
        for (std::size_t n = 0; n < cur.order(); ++n) {
            const Matrix anchor = extrapolate_block(cur.factors[n], st, n);
            cur = cp_block_update_anchored(cur, n, anchor, x, p, kEps);
        }
        extrapolation_end_iteration(st, snapshot);
        return cur;
    };

    for (int k = 0; k < 5; ++k) f = extrapolated_iteration(f);
    CHECK(st.alpha > 0.0);  // the inertial step was genuinely active

    // force alpha to zero while the state still carries a stale previous
    // iterate: every further iteration must equal the plain sweep bitwise
    st.cap = 0.0;
    CpFactors plain = f;
    for (int k = 0; k < 10; ++k) {
        f = extrapolated_iteration(f);
        plain = bcomm_sweep(plain, x, p, kEps);
        for (std::size_t n = 0; n < f.order(); ++n)
            CHECK(f.factors[n].values() == plain.factors[n].values());
    }
}

TEST_CASE("zero-cap extrapolation reproduces the plain path exactly") {
    const auto [x, truth] = synth_cp(std::vector<std::size_t>{6, 5, 4}, 2, 4);
    CpFactors init = init_cp_factors(x.shape(), 2, 4, kEps);

    FitConfig plain;
    plain.beta = 1.5;
    plain.max_iters = 20;
    FitConfig capped = plain;
    capped.extrapolate = true;
    capped.extrap_cap = 0.0;

    const CpFitResult a = bcomm_fit(x, init, plain);
    const CpFitResult b = bcomm_fit(x, init, capped);
    for (std::size_t n = 0; n < a.model.order(); ++n)
        CHECK(a.model.factors[n].values() == b.model.factors[n].values());
    for (std::size_t k = 0; k < a.trace.size(); ++k) CHECK(a.trace[k].loss == b.trace[k].loss);
}

TEST_SUITE_END();
