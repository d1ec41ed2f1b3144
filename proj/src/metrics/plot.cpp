#include "sdsr/metrics/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sdsr/core/errors.hpp"
#include "sdsr/core/image_io.hpp"

namespace sdsr {

namespace {

struct Canvas {
  int w, h;
  std::vector<uint8_t> px;  // rgb

  Canvas(int width, int height) : w(width), h(height), px(size_t(width) * height * 3, 255) {}

  void set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
    if (x < 0 || x >= w || y < 0 || y >= h) return;
    uint8_t* p = px.data() + (size_t(y) * w + x) * 3;
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }

  void line(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b) {
    const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
      set(x0, y0, r, g, b);
      if (x0 == x1 && y0 == y1) break;
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }
};

// 3x5 glyphs for tick labels: digits, minus, dot
const uint16_t kGlyphs[12] = {
    0b111101101101111,  // 0
    0b010110010010111,  // 1
    0b111001111100111,  // 2
    0b111001111001111,  // 3
    0b101101111001001,  // 4
    0b111100111001111,  // 5
    0b111100111101111,  // 6
    0b111001001001001,  // 7
    0b111101111101111,  // 8
    0b111101111001111,  // 9
    0b000000111000000,  // -
    0b000000000000010,  // .
};

void draw_text(Canvas& c, int x, int y, const std::string& text) {
  for (char ch : text) {
    int gi = -1;
    if (ch >= '0' && ch <= '9') gi = ch - '0';
    if (ch == '-') gi = 10;
    if (ch == '.') gi = 11;
    if (gi >= 0) {
      const uint16_t bits = kGlyphs[gi];
      for (int gy = 0; gy < 5; ++gy)
        for (int gx = 0; gx < 3; ++gx)
          if (bits & (1 << (14 - (gy * 3 + gx)))) c.set(x + gx, y + gy, 0, 0, 0);
    }
    x += 4;
  }
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), std::abs(v) >= 100.0 ? "%.0f" : "%.2f", v);
  return buf;
}

}  // namespace

void render_line_plot(const std::string& png_path, const std::vector<PlotSeries>& series,
                      int width, int height) {
  if (series.empty()) throw ConfigError("render_line_plot: no series");
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw SizingError("render_line_plot: x/y size mismatch");
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (xmin > xmax) {
    xmin = 0;
    xmax = 1;
  }
  if (ymin > ymax) {
    ymin = 0;
    ymax = 1;
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;

  Canvas canvas(width, height);
  const int ml = 52, mr = 16, mt = 16, mb = 32;  // margins
  const int px0 = ml, px1 = width - mr, py0 = height - mb, py1 = mt;
  auto map_x = [&](double v) {
    return px0 + int(std::lround((v - xmin) / (xmax - xmin) * (px1 - px0)));
  };
  auto map_y = [&](double v) {
    return py0 - int(std::lround((v - ymin) / (ymax - ymin) * (py0 - py1)));
  };

  canvas.line(px0, py0, px1, py0, 0, 0, 0);
  canvas.line(px0, py0, px0, py1, 0, 0, 0);
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    const int xt = map_x(xv), yt = map_y(yv);
    canvas.line(xt, py0, xt, py0 + 4, 0, 0, 0);
    canvas.line(px0 - 4, yt, px0, yt, 0, 0, 0);
    draw_text(canvas, xt - 8, py0 + 8, fmt_tick(xv));
    draw_text(canvas, 8, yt - 2, fmt_tick(yv));
  }

  const uint8_t palette[6][3] = {{200, 30, 30}, {30, 60, 200},  {30, 150, 60},
                                 {200, 140, 0}, {130, 30, 160}, {0, 140, 150}};
  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const auto* col = palette[si % 6];
    for (size_t i = 1; i < s.x.size(); ++i)
      canvas.line(map_x(s.x[i - 1]), map_y(s.y[i - 1]), map_x(s.x[i]), map_y(s.y[i]), col[0],
                  col[1], col[2]);
    // legend swatch
    const int ly = mt + int(si) * 8;
    canvas.line(px1 - 24, ly, px1 - 8, ly, col[0], col[1], col[2]);
  }

  ImageU8 img;
  img.w = width;
  img.h = height;
  img.c = 3;
  img.px = std::move(canvas.px);
  write_png(png_path, img);
}

}  // namespace sdsr
