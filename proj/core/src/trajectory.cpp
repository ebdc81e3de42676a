#include "scanleak/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "scanleak/errors.hpp"
#include "scanleak/nn/model.hpp"
#include "scanleak/normalization.hpp"

namespace scanleak {

void GridSpec::validate() const {
  if (cols < 1 || rows < 1) throw DomainError("grid: needs at least one cell");
  if (!(screen_w > 0.0) || !(screen_h > 0.0))
    throw DomainError("grid: screen dimensions must be positive");
}

int grid_zone(double x, double y, const GridSpec& grid) {
  grid.validate();
  if (!(x >= 0.0 && x <= grid.screen_w && y >= 0.0 && y <= grid.screen_h))
    throw DomainError("grid_zone: point off screen");
  const int col = std::min(
      grid.cols - 1, static_cast<int>(x / grid.screen_w * grid.cols));
  const int row = std::min(
      grid.rows - 1, static_cast<int>(y / grid.screen_h * grid.rows));
  return row * grid.cols + col;
}

std::pair<double, double> zone_center(int zone, const GridSpec& grid) {
  grid.validate();
  if (zone < 0 || zone >= grid.zone_count())
    throw DomainError("zone_center: zone " + std::to_string(zone) +
                      " out of range");
  const int col = zone % grid.cols;
  const int row = zone / grid.cols;
  return {(col + 0.5) * grid.screen_w / grid.cols,
          (row + 0.5) * grid.screen_h / grid.rows};
}

void Trajectory::validate() const {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].t < points[i - 1].t)
      throw DomainError("trajectory: timestamps must be non-decreasing");
  std::size_t prev = 0;
  for (std::size_t s : stroke_starts) {
    if (s == 0 || s >= points.size())
      throw DomainError("trajectory: stroke start out of range");
    if (s <= prev && prev != 0)
      throw DomainError("trajectory: stroke starts must increase");
    prev = s;
  }
}

Trajectory recover_positions(const EmTrace& trace, const nn::Model& model,
                             const GridSpec& grid,
                             const SegmentationParams& params,
                             std::size_t input_len) {
  grid.validate();
  const std::vector<InterceptResult> frames = intercept_all(trace, params);
  if (frames.empty())
    throw DomainError("recover_positions: no frames intercepted");

  nn::Tensor batch({frames.size(), input_len});
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::vector<double> row = normalize_signal(frames[i].valid, input_len);
    std::copy(row.begin(), row.end(), batch.data.begin() +
                                          static_cast<std::ptrdiff_t>(i * input_len));
  }
  const std::vector<int> zones = model.predict_labels(batch);

  Trajectory traj;
  traj.points.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto [x, y] = zone_center(zones[i], grid);
    traj.points.push_back(
        {static_cast<double>(frames[i].bounds.t_tri) / trace.sample_rate, x, y});
  }
  return traj;
}

Trajectory smooth(const Trajectory& traj, int window) {
  if (window < 1 || window % 2 == 0)
    throw DomainError("smooth: window must be odd and >= 1");
  traj.validate();
  Trajectory out = traj;
  const std::size_t n = traj.points.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t half = std::min(
        {static_cast<std::size_t>(window / 2), i, n - 1 - i});
    double sx = 0.0, sy = 0.0;
    for (std::size_t j = i - half; j <= i + half; ++j) {
      sx += traj.points[j].x;
      sy += traj.points[j].y;
    }
    const double m = static_cast<double>(2 * half + 1);
    out.points[i].x = sx / m;
    out.points[i].y = sy / m;
  }
  return out;
}

Trajectory splice(const std::vector<Trajectory>& segments) {
  for (const Trajectory& seg : segments) {
    seg.validate();
    if (seg.points.empty()) throw DomainError("splice: empty segment");
  }
  std::vector<std::size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return segments[a].points.front().t < segments[b].points.front().t;
  });

  Trajectory out;
  double prev_end = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Trajectory& seg = segments[order[k]];
    if (k > 0 && seg.points.front().t < prev_end)
      throw DomainError("splice: segments overlap in time");
    const std::size_t base = out.points.size();
    if (k > 0) out.stroke_starts.push_back(base);
    for (std::size_t s : seg.stroke_starts)
      out.stroke_starts.push_back(base + s);
    out.points.insert(out.points.end(), seg.points.begin(), seg.points.end());
    prev_end = seg.points.back().t;
  }
  return out;
}

// ---- rasterization ----------------------------------------------------------

RasterMask RasterMask::blank(int width, int height) {
  if (width < 1 || height < 1)
    throw DomainError("raster: canvas must be at least 1x1");
  RasterMask m;
  m.width = width;
  m.height = height;
  m.pixels.assign(static_cast<std::size_t>(width) * height, 0);
  return m;
}

std::size_t RasterMask::count_set() const {
  std::size_t n = 0;
  for (std::uint8_t p : pixels) n += p != 0;
  return n;
}

namespace {

// Square brush of side `stroke_px` centered on (x, y), clipped to the canvas.
void stamp(RasterMask& mask, int x, int y, int stroke_px) {
  const int lo = (stroke_px - 1) / 2;
  const int hi = stroke_px / 2;
  for (int dy = -lo; dy <= hi; ++dy) {
    for (int dx = -lo; dx <= hi; ++dx) {
      const int px = x + dx, py = y + dy;
      if (px >= 0 && px < mask.width && py >= 0 && py < mask.height)
        mask.set(px, py);
    }
  }
}

void draw_line(RasterMask& mask, int x0, int y0, int x1, int y1,
               int stroke_px) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    stamp(mask, x0, y0, stroke_px);
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

struct PixelPoint {
  int x, y;
};

void draw_strokes(RasterMask& mask, const std::vector<PixelPoint>& px,
                  const std::vector<std::size_t>& stroke_starts,
                  int stroke_px) {
  std::size_t next_break = 0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    const bool starts_stroke =
        i == 0 || (next_break < stroke_starts.size() &&
                   stroke_starts[next_break] == i);
    if (starts_stroke) {
      if (i != 0) ++next_break;
      stamp(mask, px[i].x, px[i].y, stroke_px);
    } else {
      draw_line(mask, px[i - 1].x, px[i - 1].y, px[i].x, px[i].y, stroke_px);
    }
  }
}

int to_pixel(double v, double span, int cells) {
  const int p = static_cast<int>(v / span * cells);
  return std::clamp(p, 0, cells - 1);
}

}  // namespace

RasterMask rasterize(const Trajectory& traj, int width, int height,
                     int stroke_px, double screen_w, double screen_h) {
  if (stroke_px < 1) throw DomainError("rasterize: stroke_px must be >= 1");
  if (!(screen_w > 0.0) || !(screen_h > 0.0))
    throw DomainError("rasterize: screen dimensions must be positive");
  traj.validate();
  RasterMask mask = RasterMask::blank(width, height);
  std::vector<PixelPoint> px;
  px.reserve(traj.points.size());
  for (const TrajPoint& p : traj.points)
    px.push_back({to_pixel(p.x, screen_w, width), to_pixel(p.y, screen_h, height)});
  draw_strokes(mask, px, traj.stroke_starts, stroke_px);
  return mask;
}

double jaccard(const RasterMask& a, const RasterMask& b) {
  if (a.width != b.width || a.height != b.height)
    throw DomainError("jaccard: mask dimensions differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const bool pa = a.pixels[i] != 0, pb = b.pixels[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

void save_pbm(const RasterMask& mask, const std::string& path) {
  if (mask.width < 1 || mask.height < 1)
    throw DomainError("save_pbm: empty mask");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FileError(FileError::Kind::io, "cannot create " + path);
  os << "P1\n" << mask.width << ' ' << mask.height << '\n';
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (x) os << ' ';
      os << static_cast<int>(mask.get(x, y));
    }
    os << '\n';
  }
  os.flush();
  if (!os) throw FileError(FileError::Kind::io, "write failed: " + path);
}

RasterMask load_pbm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FileError(FileError::Kind::io, "cannot open " + path);
  auto next_token = [&](const char* what) {
    std::string tok;
    while (is >> tok) {
      if (tok[0] == '#') {  // comment runs to end of line
        std::string rest;
        std::getline(is, rest);
        continue;
      }
      return tok;
    }
    throw FileError(FileError::Kind::truncated,
                    path + ": file ends inside " + what);
  };
  if (next_token("magic") != "P1")
    throw FileError(FileError::Kind::bad_magic, path + ": not a plain PBM file");
  int width = 0, height = 0;
  try {
    width = std::stoi(next_token("width"));
    height = std::stoi(next_token("height"));
  } catch (const std::exception&) {
    throw FileError(FileError::Kind::parse, path + ": bad PBM dimensions");
  }
  if (width < 1 || height < 1)
    throw FileError(FileError::Kind::parse, path + ": bad PBM dimensions");
  RasterMask mask = RasterMask::blank(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::string tok = next_token("pixels");
      if (tok == "1")
        mask.set(x, y);
      else if (tok != "0")
        throw FileError(FileError::Kind::parse,
                        path + ": bad PBM pixel '" + tok + "'");
    }
  }
  return mask;
}

// ---- character recognition --------------------------------------------------

namespace {

// Draw a trajectory scaled into a square canvas by its own bounding box,
// aspect preserved, with a small margin. Degenerate boxes collapse to the
// canvas center.
RasterMask raster_normalized(const Trajectory& traj, int canvas,
                             int stroke_px) {
  traj.validate();
  RasterMask mask = RasterMask::blank(canvas, canvas);
  if (traj.points.empty()) return mask;

  double min_x = traj.points[0].x, max_x = min_x;
  double min_y = traj.points[0].y, max_y = min_y;
  for (const TrajPoint& p : traj.points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double span = std::max(max_x - min_x, max_y - min_y);
  const double box = 0.8 * (canvas - 1);
  const double scale = span > 0.0 ? box / span : 0.0;
  const double cx = 0.5 * (min_x + max_x), cy = 0.5 * (min_y + max_y);
  const double mid = 0.5 * (canvas - 1);

  std::vector<PixelPoint> px;
  px.reserve(traj.points.size());
  for (const TrajPoint& p : traj.points) {
    const int ix = static_cast<int>(std::lround(mid + (p.x - cx) * scale));
    const int iy = static_cast<int>(std::lround(mid + (p.y - cy) * scale));
    px.push_back({std::clamp(ix, 0, canvas - 1), std::clamp(iy, 0, canvas - 1)});
  }
  draw_strokes(mask, px, traj.stroke_starts, stroke_px);
  return mask;
}

}  // namespace

std::vector<RankedLabel> recognize_character(
    const Trajectory& query, const std::vector<CharacterTemplate>& templates,
    int canvas, int stroke_px) {
  if (templates.empty()) throw DomainError("recognize: no templates");
  if (canvas < 8) throw DomainError("recognize: canvas too small");
  if (stroke_px < 1) throw DomainError("recognize: stroke_px must be >= 1");
  const RasterMask q = raster_normalized(query, canvas, stroke_px);
  std::vector<RankedLabel> out;
  out.reserve(templates.size());
  for (const CharacterTemplate& t : templates)
    out.push_back({t.label, jaccard(q, raster_normalized(t.traj, canvas, stroke_px))});
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedLabel& a, const RankedLabel& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.label < b.label;
                   });
  return out;
}

std::vector<Trajectory> split_at_gaps(const Trajectory& traj,
                                      double gap_seconds) {
  if (!(gap_seconds > 0.0))
    throw DomainError("split_at_gaps: gap must be positive");
  traj.validate();
  std::vector<Trajectory> out;
  if (traj.points.empty()) return out;

  std::size_t piece_start = 0;
  auto flush = [&](std::size_t end) {  // piece covers [piece_start, end)
    Trajectory piece;
    piece.points.assign(traj.points.begin() + static_cast<std::ptrdiff_t>(piece_start),
                        traj.points.begin() + static_cast<std::ptrdiff_t>(end));
    for (std::size_t s : traj.stroke_starts)
      if (s > piece_start && s < end)
        piece.stroke_starts.push_back(s - piece_start);
    out.push_back(std::move(piece));
  };
  for (std::size_t i = 1; i < traj.points.size(); ++i) {
    if (traj.points[i].t - traj.points[i - 1].t > gap_seconds) {
      flush(i);
      piece_start = i;
    }
  }
  flush(traj.points.size());
  return out;
}

}  // namespace scanleak
