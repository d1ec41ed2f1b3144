#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "sdsr/core/errors.hpp"
#include "sdsr/core/image_io.hpp"
#include "sdsr/core/resample.hpp"
#include "sdsr/core/rng.hpp"
#include "sdsr/core/tensor.hpp"

using namespace sdsr;
namespace fs = std::filesystem;

TEST_CASE("tensor indexing and reductions") {
  Tensor t(2, 3, 4, 5);
  CHECK(t.numel() == 120);
  t.at(1, 2, 3, 4) = 7.0;
  CHECK(t[t.numel() - 1] == 7.0);
  t.fill(0.25);
  CHECK(t.mean() == doctest::Approx(0.25));
  CHECK(t.min() == 0.25);
  CHECK(t.max() == 0.25);
  CHECK(t.all_finite());

  Tensor u = t;
  CHECK(bit_equal(t, u));
  u[3] += 1e-9;
  CHECK(!bit_equal(t, u));
  CHECK(max_abs_diff(t, u) == doctest::Approx(1e-9));
}

TEST_CASE("rng determinism and gaussian moments") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());

  Rng g(7);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = g.gaussian();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);

  Rng u(9);
  for (int i = 0; i < 1000; ++i) {
    const int64_t v = u.uniform_int(13);
    CHECK(v >= 0);
    CHECK(v < 13);
  }
}

TEST_CASE("derive_seed decorrelates streams") {
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
  CHECK(derive_seed(1, "a", 5) == derive_seed(1, "a", 5));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}

TEST_CASE("reflect indexing stays in bounds") {
  for (int n : {1, 2, 3, 7}) {
    for (int i = -20; i <= 20; ++i) {
      const int r = reflect_index(i, n);
      CHECK(r >= 0);
      CHECK(r < n);
    }
  }
  CHECK(reflect_index(-1, 5) == 1);
  CHECK(reflect_index(5, 5) == 3);
}

TEST_CASE("resamplers preserve constants") {
  Tensor img(1, 3, 32, 32, 0.37);
  const Tensor down = bicubic_downsample(img, 4);
  CHECK(down.h() == 8);
  CHECK(down.w() == 8);
  for (int64_t i = 0; i < down.numel(); ++i) CHECK(down[i] == doctest::Approx(0.37).epsilon(1e-13));

  const Tensor up = bicubic_upsample(down, 4);
  CHECK(up.h() == 32);
  for (int64_t i = 0; i < up.numel(); ++i) CHECK(up[i] == doctest::Approx(0.37).epsilon(1e-13));

  const Tensor blur = gaussian_blur(img, 2.0);
  for (int64_t i = 0; i < blur.numel(); ++i) CHECK(blur[i] == doctest::Approx(0.37).epsilon(1e-13));
}

TEST_CASE("identity resize is exact") {
  Rng rng(3);
  Tensor img(1, 1, 9, 9);
  fill_gaussian(img, rng);
  const Tensor out = make_bicubic_resize(9, 9, 9, 9).apply(img);
  CHECK(max_abs_diff(img, out) < 1e-12);
}

TEST_CASE("separable op adjoint is the exact transpose") {
  Rng rng(11);
  for (const char* kind : {"down", "up", "blur"}) {
    SeparableOp op = std::string(kind) == "down"  ? make_downsampler(16, 12, 4)
                     : std::string(kind) == "up" ? make_upsampler(4, 3, 4)
                                                  : make_blur(16, 12, 1.5);
    Tensor x(1, 2, op.in_h(), op.in_w());
    Tensor y(1, 2, op.out_h(), op.out_w());
    fill_gaussian(x, rng);
    fill_gaussian(y, rng);
    const Tensor ax = op.apply(x);
    const Tensor aty = op.adjoint(y);
    double lhs = 0.0, rhs = 0.0;
    for (int64_t i = 0; i < ax.numel(); ++i) lhs += ax[i] * y[i];
    for (int64_t i = 0; i < x.numel(); ++i) rhs += x[i] * aty[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("downsample rejects non-divisible dims") {
  Tensor img(1, 3, 30, 32, 0.5);
  CHECK_THROWS_AS(bicubic_downsample(img, 4), SizingError);
}

TEST_CASE("png round trip") {
  ImageU8 img;
  img.w = 13;
  img.h = 9;
  img.c = 3;
  Rng rng(5);
  img.px.resize(size_t(img.w) * img.h * img.c);
  for (auto& p : img.px) p = uint8_t(rng.uniform_int(256));

  const auto path = fs::temp_directory_path() / "sdsr_test_roundtrip.png";
  write_png(path.string(), img);
  const ImageU8 back = read_png(path.string());
  CHECK(back.w == img.w);
  CHECK(back.h == img.h);
  CHECK(back.c == img.c);
  CHECK(back.px == img.px);

  // quantization round trip through the unit tensor
  const Tensor t = to_unit_tensor(img);
  CHECK(t.min() >= 0.0);
  CHECK(t.max() <= 1.0);
  const ImageU8 again = to_u8(t);
  CHECK(again.px == img.px);
  fs::remove(path);
}

TEST_CASE("reading a non-image fails cleanly") {
  const auto path = fs::temp_directory_path() / "sdsr_test_garbage.png";
  {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    std::fputs("this is not a png", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_png(path.string()), Error);
  fs::remove(path);
}
