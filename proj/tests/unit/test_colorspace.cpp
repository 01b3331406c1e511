#include <gtest/gtest.h>

#include <cmath>

#include "opencat/colorspace.hpp"
#include "opencat/error.hpp"
#include "opencat/view_selection.hpp"
#include "test_support.hpp"

using namespace opencat;
using namespace opencat::testing;

namespace {

Vector3 mul(const Matrix3& m, const Vector3& v) {
  Vector3 out{};
  for (int i = 0; i < 3; ++i) out[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
  return out;
}

Rgb8 random_rgb(std::mt19937_64& rng) {
  return {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
}

// Textbook CIE L*a*b* for sRGB under D65, written out independently.
Vector3 lab_oracle(const Rgb8& c) {
  double lin[3];
  for (int i = 0; i < 3; ++i) {
    const double v = c[i] / 255.0;
    lin[i] = v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
  }
  const double X = 0.4124564 * lin[0] + 0.3575761 * lin[1] + 0.1804375 * lin[2];
  const double Y = 0.2126729 * lin[0] + 0.7151522 * lin[1] + 0.0721750 * lin[2];
  const double Z = 0.0193339 * lin[0] + 0.1191920 * lin[1] + 0.9503041 * lin[2];
  auto f = [](double t) { return t > 216.0 / 24389.0 ? std::cbrt(t) : (24389.0 / 27.0 * t + 16.0) / 116.0; };
  const double fx = f(X / 0.95047), fy = f(Y / 1.0), fz = f(Z / 1.08883);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

}  // namespace

TEST(ColorConstants, PublishedYuvRowsVerbatim) {
  using color_constants::kYuv;
  EXPECT_EQ(kYuv[0], (std::array<double, 3>{0.299, 0.587, 0.114}));
  EXPECT_EQ(kYuv[1], (std::array<double, 3>{-0.168, -0.331, 0.500}));
  EXPECT_EQ(kYuv[2], (std::array<double, 3>{0.500, -0.418, -0.0813}));
  EXPECT_EQ(color_constants::kYuvOffset, (Vector3{0.0, 128.0, 128.0}));
  EXPECT_EQ(color_constants::kYiq[1], (std::array<double, 3>{0.5959, -0.2746, -0.3213}));
  EXPECT_EQ(color_constants::kYiq[2], (std::array<double, 3>{0.2115, -0.5227, 0.3112}));
  EXPECT_EQ(color_constants::kHedStains[0], (std::array<double, 3>{0.65, 0.70, 0.29}));
  EXPECT_EQ(color_constants::kHedStains[1], (std::array<double, 3>{0.07, 0.99, 0.11}));
  EXPECT_EQ(color_constants::kHedStains[2], (std::array<double, 3>{0.27, 0.57, 0.78}));
}

TEST(ConvertPixel, BlackToYuv) {
  const Vector3 yuv = convert_pixel({0, 0, 0}, ColorspaceId::kYUV);
  EXPECT_EQ(yuv, (Vector3{0.0, 128.0, 128.0}));
}

TEST(ConvertPixel, PureRedToHsv) {
  const Vector3 hsv = convert_pixel({255, 0, 0}, ColorspaceId::kHSV);
  EXPECT_EQ(hsv, (Vector3{0.0, 1.0, 1.0}));
}

TEST(ConvertPixel, WhiteToLab) {
  const Vector3 lab = convert_pixel({255, 255, 255}, ColorspaceId::kLAB);
  EXPECT_NEAR(lab[0], 100.0, 0.01);
  EXPECT_NEAR(lab[1], 0.0, 0.01);
  EXPECT_NEAR(lab[2], 0.0, 0.01);
}

TEST(ConvertPixel, LabMatchesIndependentFormula) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 2000; ++i) {
    const Rgb8 c = random_rgb(rng);
    const Vector3 got = convert_pixel(c, ColorspaceId::kLAB);
    const Vector3 want = lab_oracle(c);
    for (int k = 0; k < 3; ++k) ASSERT_NEAR(got[k], want[k], 1e-4);
  }
}

TEST(ConvertPixel, YiqMatchesNtscMatrixProduct) {
  const Vector3 got = convert_pixel({10, 200, 30}, ColorspaceId::kYIQ);
  const double y = 0.299 * 10 + 0.587 * 200 + 0.114 * 30;
  const double i = 0.5959 * 10 - 0.2746 * 200 - 0.3213 * 30;
  const double q = 0.2115 * 10 - 0.5227 * 200 + 0.3112 * 30;
  EXPECT_NEAR(got[0], y, 1e-12);
  EXPECT_NEAR(got[1], i, 1e-12);
  EXPECT_NEAR(got[2], q, 1e-12);
}

TEST(ConvertPixel, AffineSpacesProperty) {
  std::mt19937_64 rng(17);
  const std::pair<ColorspaceId, Matrix3> cases[] = {{ColorspaceId::kYUV, color_constants::kYuv},
                                                    {ColorspaceId::kYIQ, color_constants::kYiq},
                                                    {ColorspaceId::kYCbCr, color_constants::kYCbCr}};
  for (const auto& [space, m] : cases) {
    for (int t = 0; t < 2000; ++t) {
      const Rgb8 a = random_rgb(rng), b = random_rgb(rng);
      const Vector3 ca = convert_pixel(a, space), cb = convert_pixel(b, space);
      const Vector3 d = mul(m, {double(a[0]) - b[0], double(a[1]) - b[1], double(a[2]) - b[2]});
      for (int k = 0; k < 3; ++k) ASSERT_NEAR(ca[k] - cb[k], d[k], 1e-9);
    }
  }
}

TEST(ConvertPixel, HsvRoundTripProperty) {
  std::mt19937_64 rng(19);
  auto check = [](const Rgb8& c) {
    const Vector3 back = hsv_to_rgb(convert_pixel(c, ColorspaceId::kHSV));
    for (int k = 0; k < 3; ++k) ASSERT_LE(std::abs(std::lround(back[k]) - c[k]), 1) << int(c[0]);
  };
  for (int i = 0; i < 100000; ++i) check(random_rgb(rng));
  for (int g = 0; g < 256; ++g) check({std::uint8_t(g), std::uint8_t(g), std::uint8_t(g)});
}

TEST(ConvertPixel, HedInvertsStainMixing) {
  std::mt19937_64 rng(23);
  const auto& m = color_constants::kHedStains;
  for (int t = 0; t < 500; ++t) {
    const Rgb8 c = random_rgb(rng);
    const Vector3 s = convert_pixel(c, ColorspaceId::kHED);
    for (int k = 0; k < 3; ++k) {
      const double od = -std::log10((c[k] + 1.0) / 256.0);
      const double mixed = s[0] * m[0][k] + s[1] * m[1][k] + s[2] * m[2][k];
      ASSERT_NEAR(mixed, od, 1e-9);
    }
  }
  EXPECT_EQ(convert_pixel({255, 255, 255}, ColorspaceId::kHED), (Vector3{0.0, 0.0, 0.0}));
}

TEST(ConvertPixel, GrayDependsOnLumaOnlyAndRgbIsIdentity) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 1000; ++t) {
    const Rgb8 c = random_rgb(rng);
    const Vector3 g = convert_pixel(c, ColorspaceId::kGRAY);
    EXPECT_EQ(g[0], g[1]);
    EXPECT_EQ(g[1], g[2]);
    EXPECT_NEAR(g[0], luma(c), 1e-12);
    EXPECT_EQ(convert_pixel(c, ColorspaceId::kRGB), (Vector3{double(c[0]), double(c[1]), double(c[2])}));
  }
}

TEST(ConvertPixel, ChannelsStayInsideNativeRange) {
  std::mt19937_64 rng(37);
  std::vector<Rgb8> samples;
  for (int i = 0; i < 8; ++i) samples.push_back({std::uint8_t(i & 1 ? 255 : 0), std::uint8_t(i & 2 ? 255 : 0),
                                                 std::uint8_t(i & 4 ? 255 : 0)});
  for (int i = 0; i < 20000; ++i) samples.push_back(random_rgb(rng));
  for (ColorspaceId id : kAllColorspaces) {
    const auto range = native_range(id);
    for (const Rgb8& c : samples) {
      const Vector3 v = convert_pixel(c, id);
      for (int k = 0; k < 3; ++k) {
        ASSERT_GE(v[k], range[k].lo - 1e-9) << colorspace_name(id) << k;
        ASSERT_LE(v[k], range[k].hi + 1e-9) << colorspace_name(id) << k;
      }
    }
  }
}

TEST(Convert, BackgroundAndMask) {
  ColorImage img = ColorImage::blank(3, 3);
  img.set(1, 1, {255, 0, 0});
  const auto v = convert(img, ColorspaceId::kYUV);
  EXPECT_EQ(v.mask, img.mask);
  EXPECT_FLOAT_EQ(v.pixels.at(1, 0, 0), 128.0f);  // transform of black
  EXPECT_NEAR(v.pixels.at(0, 1, 1), 0.299 * 255, 1e-4);
}

TEST(ColorspaceNames, ParseAndValidate) {
  for (ColorspaceId id : kAllColorspaces) EXPECT_EQ(parse_colorspace(colorspace_name(id)), id);
  EXPECT_EQ(parse_colorspace("ycbcr"), ColorspaceId::kYCbCr);
  try {
    parse_colorspace("CMYK");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidColorspace);
  }
  const std::vector<ColorspaceId> dup{ColorspaceId::kRGB, ColorspaceId::kRGB};
  EXPECT_THROW(validate_colorspace_list(dup), Error);
  EXPECT_THROW(validate_colorspace_list({}), Error);
}
