#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "trianglevec/errors.hpp"
#include "trianglevec/image.hpp"

using namespace tvec;
using testutil::TempDir;

TEST_CASE("csv grid loads a 3x3 zero image") {
  TempDir dir("img");
  testutil::write_text(dir / "z.csv", "0,0,0\n0,0,0\n0,0,0\n");
  Image img = load_image(dir / "z.csv", ImageFormat::csv_grid);
  CHECK(img.height == 3);
  CHECK(img.width == 3);
  for (double v : img.values) CHECK(v == 0.0);
  CHECK(img.id == "z");
}

TEST_CASE("csv grid parses axis headers") {
  TempDir dir("img");
  testutil::write_text(dir / "a.csv", "# x:0.1,0.2,0.3\n# y:1,2\n1,2,3\n4,5,6\n");
  Image img = load_image(dir / "a.csv", ImageFormat::csv_grid);
  CHECK(img.x_axis == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(img.y_axis == std::vector<double>{1.0, 2.0});
  CHECK(img.at(1, 2) == 6.0);
}

TEST_CASE("csv grid rejects nan cells naming the position") {
  TempDir dir("img");
  testutil::write_text(dir / "n.csv", "1,2,3\n4,nan,6\n");
  CHECK_THROWS_WITH_AS(load_image(dir / "n.csv", ImageFormat::csv_grid),
                       doctest::Contains("row 1, col 1"), ParseError);
}

TEST_CASE("csv grid rejects ragged rows") {
  TempDir dir("img");
  testutil::write_text(dir / "r.csv", "1,2,3\n4,5\n");
  CHECK_THROWS_WITH_AS(load_image(dir / "r.csv", ImageFormat::csv_grid),
                       doctest::Contains("ragged"), ParseError);
}

TEST_CASE("csv grid rejects garbage cells") {
  TempDir dir("img");
  testutil::write_text(dir / "g.csv", "1,2\n3,4x\n");
  CHECK_THROWS_AS(load_image(dir / "g.csv", ImageFormat::csv_grid), ParseError);
}

TEST_CASE("missing file is a parse error") {
  CHECK_THROWS_AS(load_image("/nonexistent/x.csv", ImageFormat::csv_grid), ParseError);
}

TEST_CASE("pgm16 maps big-endian samples onto [0,1]") {
  TempDir dir("img");
  const unsigned char payload[] = {0x00, 0x00, 0x80, 0x00, 0xff, 0xff, 0x01, 0x00};
  std::ofstream out(dir / "p.pgm", std::ios::binary);
  out << "P5\n2 2\n65535\n";
  out.write(reinterpret_cast<const char*>(payload), sizeof payload);
  out.close();
  Image img = load_image(dir / "p.pgm", ImageFormat::pgm16);
  CHECK(img.at(0, 0) == 0.0);
  CHECK(img.at(0, 1) == doctest::Approx(32768.0 / 65535.0).epsilon(1e-12));
  CHECK(img.at(1, 0) == 1.0);
  CHECK(img.at(1, 1) == doctest::Approx(256.0 / 65535.0).epsilon(1e-12));
}

TEST_CASE("pgm16 rejects other maxvals") {
  TempDir dir("img");
  testutil::write_text(dir / "b.pgm", "P5\n1 1\n255\nx");
  CHECK_THROWS_AS(load_image(dir / "b.pgm", ImageFormat::pgm16), ParseError);
}

TEST_CASE("image csv round-trips") {
  TempDir dir("img");
  Image img = testutil::random_image(5, 7, 11);
  img.x_axis = {0, 1, 2, 3, 4, 5, 6};
  save_image_csv(img, dir / "rt.csv");
  Image back = load_image(dir / "rt.csv", ImageFormat::csv_grid);
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.values.size(); ++i)
    CHECK(back.values[i] == doctest::Approx(img.values[i]).epsilon(1e-8));
  CHECK(back.x_axis.size() == 7);
}

TEST_CASE("resize reproduces constants exactly") {
  Image img = Image::zeros(5, 7);
  for (double& v : img.values) v = 3.25;
  Image out = resize_bicubic(img, 64, 64);
  REQUIRE(out.height == 64);
  REQUIRE(out.width == 64);
  for (double v : out.values) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("64x64 to 64x64 resize is the identity") {
  Image img = testutil::random_image(64, 64, 3);
  Image out = resize_bicubic(img, 64, 64);
  for (std::size_t i = 0; i < img.values.size(); ++i) CHECK(out.values[i] == img.values[i]);
}

TEST_CASE("upsampled ramp matches the analytic ramp on interior pixels") {
  // Oracle: evaluate f(x,y) = x + y at the source coordinates of each output
  // pixel; only pixels whose 4-tap stencil stays inside the source count.
  Image src = Image::zeros(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) src.at(y, x) = x + y;
  Image out = resize_bicubic(src, 64, 64);
  const double scale = 8.0 / 64.0;
  double max_dev = 0.0;
  int checked = 0;
  for (int y = 0; y < 64; ++y) {
    double sy = (y + 0.5) * scale - 0.5;
    if (std::floor(sy) < 1 || std::floor(sy) + 2 > 7) continue;
    for (int x = 0; x < 64; ++x) {
      double sx = (x + 0.5) * scale - 0.5;
      if (std::floor(sx) < 1 || std::floor(sx) + 2 > 7) continue;
      max_dev = std::max(max_dev, std::abs(out.at(y, x) - (sx + sy)));
      ++checked;
    }
  }
  CHECK(checked > 1000);
  CHECK(max_dev < 1e-6);
}

TEST_CASE("resize rejects tiny outputs and sources") {
  Image img = testutil::random_image(4, 4, 1);
  CHECK_THROWS_AS(resize_bicubic(img, 1, 8), InvalidArgumentError);
  Image tiny = Image::zeros(1, 4);
  tiny.values.assign(4, 0.0);
  CHECK_THROWS_AS(resize_bicubic(tiny, 8, 8), InvalidArgumentError);
}

TEST_CASE("normalize maps {2,4,6} to {0,0.5,1}") {
  Image img = Image::zeros(1, 3);
  img.values = {2, 4, 6};
  img.height = 1;
  img.width = 3;
  Image out = normalize_minmax(img);
  CHECK(out.values == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("normalize maps constants to zero") {
  Image img = Image::zeros(4, 4);
  for (double& v : img.values) v = 7.0;
  Image out = normalize_minmax(img);
  for (double v : out.values) CHECK(v == 0.0);
}

TEST_CASE("normalize is idempotent and order-preserving") {
  Image img = testutil::random_image(16, 16, 99, -3.0, 5.0);
  Image once = normalize_minmax(img);
  Image twice = normalize_minmax(once);
  CHECK(once.values == twice.values);
  for (std::size_t i = 1; i < img.values.size(); ++i) {
    if (img.values[i - 1] < img.values[i]) CHECK(once.values[i - 1] < once.values[i]);
  }
}

TEST_CASE("blur leaves constants unchanged") {
  Image img = Image::zeros(16, 16);
  for (double& v : img.values) v = 0.7;
  Image out = gaussian_blur(img, 2.5);
  for (double v : out.values) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("impulse response center equals the discretized kernel weight") {
  Image img = Image::zeros(33, 33);
  img.at(16, 16) = 1.0;
  Image out = gaussian_blur(img, 2.0);
  // Oracle: center of the separable kernel = w0^2 with unit-sum taps.
  const int radius = static_cast<int>(std::ceil(8.0));
  double sum = 0.0, w0 = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    double v = std::exp(-t * t / 8.0);
    sum += v;
    if (t == 0) w0 = v;
  }
  const double center = (w0 / sum) * (w0 / sum);
  CHECK(out.at(16, 16) == doctest::Approx(center).epsilon(1e-12));
  // Continuous-kernel sanity bound from the definition.
  CHECK(out.at(16, 16) ==
        doctest::Approx(1.0 / (2.0 * std::numbers::pi * 4.0)).epsilon(0.02));
}

TEST_CASE("blur satisfies the Gaussian semigroup property away from borders") {
  // Replicate padding breaks the semigroup inside the truncation band, so
  // the check runs where the double-blur support stays inside the image.
  Image img = testutil::random_image(64, 64, 7);
  Image twice = gaussian_blur(gaussian_blur(img, 1.0), 1.0);
  Image direct = gaussian_blur(img, std::sqrt(2.0));
  double max_dev = 0.0;
  const int margin = 6;
  for (int y = margin; y < 64 - margin; ++y)
    for (int x = margin; x < 64 - margin; ++x)
      max_dev = std::max(max_dev, std::abs(twice.at(y, x) - direct.at(y, x)));
  CHECK(max_dev < 1e-3);
}

TEST_CASE("blur preserves the mean within 1% for sigma <= 4") {
  Image img = testutil::random_image(64, 64, 21);
  double mean_in = 0.0;
  for (double v : img.values) mean_in += v;
  for (double sigma : {1.0, 2.0, 4.0}) {
    Image out = gaussian_blur(img, sigma);
    double mean_out = 0.0;
    for (double v : out.values) mean_out += v;
    CHECK(std::abs(mean_out - mean_in) / std::abs(mean_in) < 0.01);
  }
}

TEST_CASE("blur rejects non-positive sigma") {
  Image img = testutil::random_image(8, 8, 1);
  CHECK_THROWS_AS(gaussian_blur(img, 0.0), InvalidArgumentError);
  CHECK_THROWS_AS(gaussian_blur(img, -1.0), InvalidArgumentError);
}

TEST_CASE("gradient of a constant is exactly zero") {
  Image img = Image::zeros(16, 16);
  for (double& v : img.values) v = 42.0;
  Image out = gradient_magnitude(img);
  for (double v : out.values) CHECK(v == 0.0);
}

TEST_CASE("gradient is exact on affine images") {
  Image rx = Image::zeros(16, 16);
  Image rxy = Image::zeros(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      rx.at(y, x) = 3.0 * x;
      rxy.at(y, x) = x + 2.0 * y;
    }
  Image gx = gradient_magnitude(rx);
  Image gxy = gradient_magnitude(rxy);
  for (int y = 1; y < 15; ++y)
    for (int x = 1; x < 15; ++x) {
      CHECK(gx.at(y, x) == doctest::Approx(3.0).epsilon(1e-12));
      CHECK(gxy.at(y, x) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
    }
}

TEST_CASE("validate_image rejects bad axes and non-finite values") {
  Image img = testutil::random_image(4, 4, 5);
  img.x_axis = {1, 2, 2, 3};
  CHECK_THROWS_AS(validate_image(img), InvalidArgumentError);
  img.x_axis = {1, 2, 3};
  CHECK_THROWS_AS(validate_image(img), InvalidArgumentError);
  img.x_axis.clear();
  img.values[5] = std::nan("");
  CHECK_THROWS_WITH_AS(validate_image(img), doctest::Contains("row 1"), InvalidArgumentError);
}

TEST_CASE("manifest round-trips and resolves relative paths") {
  TempDir dir("man");
  std::vector<ManifestEntry> entries = {{"a", "images/a.csv", Label::good},
                                        {"b", "/abs/b.csv", Label::bad}};
  write_manifest(entries, dir / "m.tsv");
  auto back = read_manifest(dir / "m.tsv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "a");
  CHECK(back[0].label == Label::good);
  CHECK(back[0].path == dir.path() / "images/a.csv");
  CHECK(back[1].path == std::filesystem::path("/abs/b.csv"));
}

TEST_CASE("manifest rejects malformed lines and labels") {
  TempDir dir("man");
  testutil::write_text(dir / "bad.tsv", "a\tb.csv\n");
  CHECK_THROWS_AS(read_manifest(dir / "bad.tsv"), ParseError);
  testutil::write_text(dir / "bad2.tsv", "a\tb.csv\tmaybe\n");
  CHECK_THROWS_AS(read_manifest(dir / "bad2.tsv"), ParseError);
}

TEST_CASE("transpose swaps coordinates") {
  Image img = testutil::random_image(4, 6, 2);
  Image t = transpose(img);
  CHECK(t.height == 6);
  CHECK(t.width == 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) CHECK(t.at(x, y) == img.at(y, x));
}
