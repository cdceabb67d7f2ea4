#include <starris/geom.hpp>
#include <starris/random.hpp>

#include <gtest/gtest.h>

#include <numbers>

using namespace starris;

namespace
{
    constexpr double pi = std::numbers::pi;
}

TEST(RotationMatrix, ZeroRollIsIdentity)
{
    EXPECT_TRUE(rotation_matrix(Orientation(0.0)).isApprox(RotationMatrix::Identity(), 1e-15));
}

TEST(RotationMatrix, QuarterTurnMapsXToY)
{
    const Vec3 r = rotation_matrix(Orientation(pi / 2)) * Vec3::UnitX();
    EXPECT_NEAR(r.x(), 0.0, 1e-15);
    EXPECT_NEAR(r.y(), 1.0, 1e-15);
    EXPECT_NEAR(r.z(), 0.0, 1e-15);
}

TEST(RotationMatrix, OrthonormalWithUnitDeterminant)
{
    Rng rng(7);
    for (double roll : {0.3, 1.0, 2.5, 4.0, 6.2})
    {
        const RotationMatrix T = rotation_matrix(Orientation(roll + rng.uniform()));
        EXPECT_LT((T.transpose() * T - RotationMatrix::Identity()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(T.determinant(), 1.0, 1e-12);
    }
}

TEST(Orientation, NormalizedIntoFullTurn)
{
    EXPECT_NEAR(Orientation(-pi / 2).roll(), 1.5 * pi, 1e-15);
    EXPECT_NEAR(Orientation(5 * pi).roll(), pi, 1e-12);
    EXPECT_NEAR(Orientation::from_degrees(178.43).roll(), 3.114190984333482, 1e-12);
    EXPECT_GE(Orientation(-1e-18).roll(), 0.0);
    EXPECT_LT(Orientation(-1e-18).roll(), two_pi);
}

TEST(LocalAngles, AxisAlignedBaselines)
{
    const Vec3 o = Vec3::Zero();
    const RotationMatrix I = RotationMatrix::Identity();
    auto a = local_angles(I, o, Vec3(1, 0, 0));
    EXPECT_DOUBLE_EQ(a.elev, 0.0);
    EXPECT_DOUBLE_EQ(a.azim, 0.0);
    a = local_angles(I, o, Vec3(0, 1, 0));
    EXPECT_DOUBLE_EQ(a.elev, pi / 2);
    EXPECT_DOUBLE_EQ(a.azim, 0.0);
    a = local_angles(I, o, Vec3(0, 0, 1));
    EXPECT_DOUBLE_EQ(a.elev, 0.0);
    EXPECT_DOUBLE_EQ(a.azim, pi / 2);
}

TEST(LocalAngles, RotatedFrame)
{
    // After a quarter turn the global y-axis is the local x-axis
    const auto a = local_angles(rotation_matrix(Orientation(pi / 2)), Vec3(1, 1, 0), Vec3(1, 3, 0));
    EXPECT_NEAR(a.elev, 0.0, 1e-15);
    EXPECT_NEAR(a.azim, 0.0, 1e-15);
}

TEST(LocalAngles, ZeroBaselineThrows)
{
    EXPECT_THROW(local_angles(RotationMatrix::Identity(), Vec3(1, 2, 3), Vec3(1, 2, 3 + 1e-10)), ZeroBaseline);
}

TEST(DirectionVector, Examples)
{
    EXPECT_TRUE(direction_vector({0.0, 0.0}).isApprox(Vec3(1, 0, 0)));
    EXPECT_LT((direction_vector({pi / 2, 0.0}) - Vec3(0, 1, 0)).norm(), 1e-15);
    EXPECT_NEAR(direction_vector({0.4, -0.2}).norm(), 1.0, 1e-12);
}

TEST(DirectionVector, ParallelToBaseline)
{
    Rng rng(11);
    for (int i = 0; i < 200; ++i)
    {
        const Vec3 p(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
        const Vec3 t = direction_vector(local_angles(RotationMatrix::Identity(), Vec3::Zero(), p));
        EXPECT_GT(t.dot(p) / p.norm(), 1.0 - 1e-9);
    }
}

TEST(LocalAngles, ScaleInvariant)
{
    Rng rng(12);
    const RotationMatrix T = rotation_matrix(Orientation(0.7));
    for (int i = 0; i < 100; ++i)
    {
        const Vec3 from(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
        const Vec3 d(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
        const double scale = rng.uniform(0.1, 20.0);
        const auto a = local_angles(T, from, from + d);
        const auto b = local_angles(T, from, from + scale * d);
        EXPECT_NEAR(a.elev, b.elev, 1e-12);
        EXPECT_NEAR(a.azim, b.azim, 1e-12);
    }
}

TEST(Box, Contains)
{
    const Box box{Vec3(25, -10, 2), Vec3(80, 20, 2)};
    EXPECT_TRUE(box.contains(Vec3(30, 0, 2)));
    EXPECT_FALSE(box.contains(Vec3(81, 0, 2)));
    EXPECT_FALSE(box.contains(Vec3(30, 0, 2.1)));
}
