#include "movelet/core.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

using namespace movelet;

namespace {

UniformSeries make_series(std::size_t n, double hz = 10.0) {
  UniformSeries s;
  s.hz = hz;
  s.channels = {std::vector<double>(n), std::vector<double>(n),
                std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    s.channels[0][i] = static_cast<double>(i);
    s.channels[1][i] = 0.5 * static_cast<double>(i);
    s.channels[2][i] = -1.0 * static_cast<double>(i);
  }
  return s;
}

}  // namespace

TEST(Magnitude, PythagoreanTriple) {
  EXPECT_DOUBLE_EQ(5.0, magnitude({0, 3.0, 4.0, 0.0}));
}

TEST(Magnitude, Zero) { EXPECT_DOUBLE_EQ(0.0, magnitude({0, 0.0, 0.0, 0.0})); }

TEST(Magnitude, StandingGravityOnY) {
  EXPECT_DOUBLE_EQ(1.0, magnitude({0, 0.0, 1.0, 0.0}));
}

TEST(Magnitude, SquareMatchesSumOfSquares) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const Sample s{0, dist(rng), dist(rng), dist(rng)};
    const double m = magnitude(s);
    const double sq = s.x * s.x + s.y * s.y + s.z * s.z;
    ASSERT_GE(m, 0.0);
    ASSERT_NEAR(m * m, sq, 4.0 * sq * 1e-16 + 1e-300);
  }
}

TEST(MagnitudeSeries, EmptyStaysEmpty) {
  UniformSeries s = make_series(0);
  const UniformSeries m = to_magnitude_series(s);
  EXPECT_EQ(0u, m.size());
  EXPECT_EQ(1u, m.channels.size());
  EXPECT_EQ(s.hz, m.hz);
  EXPECT_EQ(s.start_ms, m.start_ms);
}

TEST(MagnitudeSeries, ConstantUnitVector) {
  UniformSeries s;
  s.channels = {std::vector<double>(10, 0.0), std::vector<double>(10, 1.0),
                std::vector<double>(10, 0.0)};
  const UniformSeries m = to_magnitude_series(s);
  for (double v : m.channels[0]) EXPECT_DOUBLE_EQ(1.0, v);
}

TEST(MagnitudeSeries, SignFlipsAreInvisible) {
  // The four pocket orientations only flip axis signs; squares are untouched,
  // so the magnitude stream must be bit-identical.
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  UniformSeries s = make_series(64);
  for (auto& ch : s.channels)
    for (double& v : ch) v = dist(rng);

  const std::array<std::array<double, 3>, 4> sign_sets{
      {{1, 1, 1}, {-1, 1, -1}, {-1, -1, 1}, {1, -1, -1}}};
  const UniformSeries base = to_magnitude_series(s);
  for (const auto& signs : sign_sets) {
    UniformSeries flipped = s;
    for (std::size_t a = 0; a < 3; ++a)
      for (double& v : flipped.channels[a]) v *= signs[a];
    EXPECT_EQ(base.channels, to_magnitude_series(flipped).channels);
  }
}

TEST(MagnitudeSeries, RejectsSingleChannel) {
  UniformSeries s;
  s.channels = {std::vector<double>(4, 1.0)};
  EXPECT_THROW(to_magnitude_series(s), RepMismatch);
}

TEST(ExtractMovelets, FortySamplesGiveThirtyOne) {
  const auto movelets = extract_movelets(make_series(40), 1.0);
  ASSERT_EQ(31u, movelets.size());
  EXPECT_EQ(0u, movelets.front().start_index);
  EXPECT_EQ(30u, movelets.back().start_index);
}

TEST(ExtractMovelets, ExactFitGivesWholeSeries) {
  UniformSeries s = make_series(10);
  const auto movelets = extract_movelets(s, 1.0);
  ASSERT_EQ(1u, movelets.size());
  EXPECT_EQ(s.channels, movelets[0].values);
}

TEST(ExtractMovelets, TooShortThrows) {
  EXPECT_THROW(extract_movelets(make_series(9), 1.0), SeriesTooShort);
}

TEST(ExtractMovelets, WindowsAreBitExactCopies) {
  UniformSeries s = make_series(25);
  const auto movelets = extract_movelets(s, 1.0);
  ASSERT_EQ(16u, movelets.size());
  for (const Movelet& m : movelets) {
    ASSERT_EQ(3u, m.values.size());
    ASSERT_EQ(10u, m.length());
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t j = 0; j < 10; ++j)
        ASSERT_EQ(s.channels[c][m.start_index + j], m.values[c][j]);
  }
}

TEST(ExtractMovelets, CountLawOverLengthSweep) {
  for (std::size_t n = 10; n <= 60; ++n)
    EXPECT_EQ(n - 10 + 1, extract_movelets(make_series(n), 1.0).size());
}

TEST(ExtractMovelets, MagnitudeSeriesWorks) {
  const auto movelets =
      extract_movelets(to_magnitude_series(make_series(12)), 1.0);
  ASSERT_EQ(3u, movelets.size());
  EXPECT_EQ(Representation::Magnitude, movelets[0].rep);
  EXPECT_EQ(1u, movelets[0].values.size());
}

TEST(WindowSamples, RoundsToNearest) {
  EXPECT_EQ(10u, window_samples(1.0, 10.0));
  EXPECT_EQ(5u, window_samples(0.5, 10.0));
  EXPECT_EQ(13u, window_samples(0.25, 50.0));
  EXPECT_THROW(window_samples(0.01, 10.0), ValidationError);
}

TEST(UniformSeries, TimestampGrid) {
  UniformSeries s = make_series(5, 10.0);
  s.start_ms = 700;
  EXPECT_EQ(700, s.timestamp_at(0));
  EXPECT_EQ(800, s.timestamp_at(1));
  EXPECT_EQ(1100, s.timestamp_at(4));

  UniformSeries odd = make_series(4, 3.0);
  EXPECT_EQ(0, odd.timestamp_at(0));
  EXPECT_EQ(333, odd.timestamp_at(1));
  EXPECT_EQ(667, odd.timestamp_at(2));
  EXPECT_EQ(1000, odd.timestamp_at(3));
}

TEST(SensorKind, TokenRoundTrip) {
  for (const char* token : {"front-acc", "back-acc", "front-gyro", "back-gyro"})
    EXPECT_EQ(token, to_token(sensor_from_token(token)));
  EXPECT_THROW(sensor_from_token("wrist-acc"), ValidationError);
}

TEST(Representation, TokenRoundTrip) {
  EXPECT_EQ(Representation::TriAxial, representation_from_token("triaxial"));
  EXPECT_EQ(Representation::Magnitude, representation_from_token("magnitude"));
  EXPECT_THROW(representation_from_token("quaternion"), ValidationError);
  EXPECT_EQ(3u, channel_count(Representation::TriAxial));
  EXPECT_EQ(1u, channel_count(Representation::Magnitude));
}
