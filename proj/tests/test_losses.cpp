// Copyright Contributors to the nerfvs-desk Project
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "nerfvs/losses.hpp"

using namespace nerfvs;

TEST(RobustDepth, QuadraticInsideTheKnee) {
    EXPECT_NEAR(robust_depth_loss(1.05, 1.0, 0.1).value, 0.5 * 0.05 * 0.05, 1e-15);
    EXPECT_NEAR(robust_depth_loss(1.0, 1.05, 0.1).grad, -0.05, 1e-15);
    EXPECT_EQ(robust_depth_loss(2.0, 2.0, 0.1).value, 0);
    EXPECT_EQ(robust_depth_loss(2.0, 2.0, 0.1).grad, 0);
}

TEST(RobustDepth, LogarithmicTail) {
    // 0.01 * (0.5 + ln 2)
    EXPECT_NEAR(robust_depth_loss(1.2, 1.0, 0.1).value, 0.0119314718, 1e-9);
    EXPECT_NEAR(robust_depth_loss(1.2, 1.0, 0.1).grad, 0.01 / 0.2, 1e-15);
    EXPECT_NEAR(robust_depth_loss(0.0, 1.0, 0.1).grad, -0.01, 1e-15);
}

TEST(RobustDepth, ContinuousWithContinuousSlopeAtTheKnee) {
    for (const Real beta : {0.05, 0.1, 0.7}) {
        const Real h = 1e-7;
        const auto below = robust_depth_loss(beta - h, 0, beta);
        const auto at = robust_depth_loss(beta, 0, beta);
        EXPECT_NEAR(below.value, at.value, 1e-6 * beta);
        EXPECT_NEAR(at.value, 0.5 * beta * beta, 1e-15);
        EXPECT_NEAR(below.grad, at.grad, 2 * h);
    }
}

TEST(RobustDepth, GradientMatchesFiniteDifference) {
    for (Real d = -1.0; d <= 1.0; d += 0.0137) {
        const Real h = 1e-7;
        const Real fd = (robust_depth_loss(d + h, 0, 0.1).value - robust_depth_loss(d - h, 0, 0.1).value) / (2 * h);
        EXPECT_NEAR(robust_depth_loss(d, 0, 0.1).grad, fd, 1e-6);
    }
}

TEST(L2Depth, HalfSquare) {
    EXPECT_NEAR(l2_depth_loss(1.3, 1.0).value, 0.045, 1e-15);
    EXPECT_NEAR(l2_depth_loss(1.3, 1.0).grad, 0.3, 1e-15);
}

TEST(Coverage, ScheduleWithDefaultConstants) {
    EXPECT_EQ(coverage_weight(1, 9, 5), 5);
    EXPECT_EQ(coverage_weight(5, 9, 5), 3);
    EXPECT_EQ(coverage_weight(9, 9, 5), 1);
    EXPECT_EQ(coverage_weight(10, 9, 5), 1);
    EXPECT_EQ(coverage_weight(100, 9, 5), 1);
}

TEST(Coverage, RayLambdaClampsZeroAndHonoursTheSwitch) {
    LossWeights w;
    RaySupervision s;
    s.coverage = 0;
    EXPECT_EQ(ray_lambda(s, w), 5);
    s.coverage = 3;
    EXPECT_EQ(ray_lambda(s, w), 4);
    w.coverage_adjustment = false;
    EXPECT_EQ(ray_lambda(s, w), 1);
}

TEST(TotalLoss, ComponentsAddUpAndGradientsAreWeighted) {
    RayRenderResult r;
    r.color = {0.5, 0.2, 0.1};
    r.depth = 2.0;
    r.weight_var = 0.3;
    r.color_var = 0.05;
    RaySupervision s;
    s.gt_color = {0.4, 0.4, 0.4};
    s.prior_distance = 2.5;
    s.coverage = 5;
    LossWeights w;
    const RayLoss l = total_ray_loss(r, s, w, true);
    EXPECT_EQ(l.lambda, 3);
    EXPECT_NEAR(l.color, 0.01 + 0.04 + 0.09, 1e-15);
    EXPECT_NEAR(l.depth, 3 * 0.1 * robust_depth_loss(2.0, 2.5, 0.1).value, 1e-15);
    EXPECT_NEAR(l.varw, 3 * 0.01 * 0.3, 1e-15);
    EXPECT_NEAR(l.varc, 3 * 0.01 * 0.05, 1e-15);
    EXPECT_NEAR(l.total, l.color + l.depth + l.varw + l.varc, 1e-15);
    EXPECT_NEAR(l.grads.depth, 3 * 0.1 * robust_depth_loss(2.0, 2.5, 0.1).grad, 1e-15);
    EXPECT_NEAR(l.grads.color.x, 0.2, 1e-15);
    EXPECT_EQ(l.grads.opacity, 0);
}

TEST(TotalLoss, RelaxedStageIsPhotometricOnly) {
    RayRenderResult r;
    r.color = {0.5, 0.2, 0.1};
    r.depth = 2.0;
    r.weight_var = 0.3;
    r.color_var = 0.05;
    RaySupervision s;
    s.gt_color = {0.5, 0.2, 0.1};
    s.prior_distance = 1.0;
    const RayLoss l = total_ray_loss(r, s, LossWeights{}, false);
    EXPECT_EQ(l.total, 0);
    EXPECT_EQ(l.grads.depth, 0);
    EXPECT_EQ(l.grads.weight_var, 0);
    EXPECT_EQ(l.grads.color_var, 0);
}

TEST(TotalLoss, MissingPriorSkipsTheDepthTerm) {
    RayRenderResult r;
    r.depth = 2.0;
    RaySupervision s;
    const RayLoss l = total_ray_loss(r, s, LossWeights{}, true);
    EXPECT_EQ(l.depth, 0);
    EXPECT_EQ(l.grads.depth, 0);
}

TEST(LossWeights, Validation) {
    LossWeights w;
    EXPECT_NO_THROW(w.validate());
    w.beta = 0;
    EXPECT_THROW(w.validate(), ConfigError);
    w = {};
    w.alpha = 1;
    EXPECT_THROW(w.validate(), ConfigError);
    w = {};
    w.lambda_d = -1;
    EXPECT_THROW(w.validate(), ConfigError);
}
