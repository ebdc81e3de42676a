#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "scanleak/errors.hpp"
#include "scanleak/trajectory.hpp"

namespace scanleak {

namespace {

// Width-to-height ratio used when a glyph is placed on the screen.
constexpr double kGlyphAspect = 0.7;

// Glyphs live on a 5x7 grid (x 0..4 right, y 0..6 down), encoded as "xy"
// tokens: "30 04 44" is the polyline (3,0)-(0,4)-(4,4). '/' separates
// strokes; a single-token stroke is a dot (the i/j tittles).
struct Glyph {
  char ch;
  const char* strokes;
};

constexpr std::array<Glyph, 62> kGlyphs{{
    {'0', "10 30 41 45 36 16 05 01 10/31 15"},
    {'1', "11 20 26/16 36"},
    {'2', "01 10 30 41 42 06 46"},
    {'3', "01 10 30 41 42 23 44 45 36 16 05"},
    {'4', "30 04 44/30 36"},
    {'5', "40 00 03 33 44 45 36 16 05"},
    {'6', "30 11 03 05 16 36 45 44 33 03"},
    {'7', "00 40 16"},
    {'8', "23 02 01 10 30 41 42 23 04 05 16 36 45 44 23"},
    {'9', "43 13 02 01 10 30 41 43 45 36 16"},
    {'A', "06 20 46/13 33"},
    {'B', "00 06/00 30 41 42 33 03/33 44 45 36 06"},
    {'C', "41 30 10 01 05 16 36 45"},
    {'D', "00 06/00 20 42 44 26 06"},
    {'E', "40 00 06 46/03 33"},
    {'F', "40 00 06/03 33"},
    {'G', "41 30 10 01 05 16 36 45 43 23"},
    {'H', "00 06/40 46/03 43"},
    {'I', "10 30/20 26/16 36"},
    {'J', "40 45 36 16 05"},
    {'K', "00 06/40 03 46"},
    {'L', "00 06 46"},
    {'M', "06 00 23 40 46"},
    {'N', "06 00 46 40"},
    {'O', "10 30 41 45 36 16 05 01 10"},
    {'P', "06 00 30 41 42 33 03"},
    {'Q', "10 30 41 45 36 16 05 01 10/24 46"},
    {'R', "06 00 30 41 42 33 03/23 46"},
    {'S', "41 30 10 01 02 13 33 44 45 36 16 05"},
    {'T', "00 40/20 26"},
    {'U', "00 05 16 36 45 40"},
    {'V', "00 26 40"},
    {'W', "00 16 23 36 40"},
    {'X', "00 46/40 06"},
    {'Y', "00 23 40/23 26"},
    {'Z', "00 40 06 46"},
    {'a', "42 46/43 32 12 03 05 16 36 45"},
    {'b', "00 06/03 12 32 43 45 36 16 05"},
    {'c', "43 32 12 03 05 16 36 45"},
    {'d', "40 46/43 32 12 03 05 16 36 45"},
    {'e', "04 44 43 32 12 03 05 16 36 45"},
    {'f', "41 30 21 26/12 32"},
    {'g', "43 32 12 03 04 15 35 44/42 45 36 16 05"},
    {'h', "00 06/03 12 32 43 46"},
    {'i', "20/22 26"},
    {'j', "30/32 35 26 16 05"},
    {'k', "00 06/32 04 36"},
    {'l', "20 26"},
    {'m', "06 02/03 12 23 26/23 32 43 46"},
    {'n', "06 02/03 12 32 43 46"},
    {'o', "12 32 43 45 36 16 05 03 12"},
    {'p', "02 06/03 12 32 43 44 35 15 04"},
    {'q', "42 46/43 32 12 03 04 15 35 44"},
    {'r', "02 06/03 12 32 43"},
    {'s', "43 32 12 03 14 34 45 36 16 05"},
    {'t', "20 25 36/12 32"},
    {'u', "02 05 16 36 45/42 46"},
    {'v', "02 26 42"},
    {'w', "02 16 24 36 42"},
    {'x', "02 46/42 06"},
    {'y', "02 24/42 06"},
    {'z', "02 42 06 46"},
}};

const char* find_glyph(char c) {
  for (const Glyph& g : kGlyphs)
    if (g.ch == c) return g.strokes;
  throw DomainError(std::string("no glyph for character '") + c + "'");
}

}  // namespace

std::string recognizable_characters() {
  std::string out;
  out.reserve(kGlyphs.size());
  for (const Glyph& g : kGlyphs) out.push_back(g.ch);
  return out;
}

std::vector<std::vector<std::pair<double, double>>> character_strokes(char c) {
  const char* enc = find_glyph(c);
  std::vector<std::vector<std::pair<double, double>>> strokes(1);
  for (const char* p = enc; *p != '\0'; ++p) {
    if (*p == ' ') continue;
    if (*p == '/') {
      strokes.emplace_back();
      continue;
    }
    const double x = (*p - '0') / 4.0;
    const double y = (*(p + 1) - '0') / 6.0;
    strokes.back().emplace_back(x, y);
    ++p;
  }
  return strokes;
}

Trajectory character_trajectory(char c, double cx, double cy, double height,
                                double dt, int points_per_unit) {
  if (!(height > 0.0)) throw DomainError("glyph: height must be positive");
  if (!(dt > 0.0)) throw DomainError("glyph: dt must be positive");
  if (points_per_unit < 1)
    throw DomainError("glyph: points_per_unit must be >= 1");

  const double width = height * kGlyphAspect;
  auto place = [&](const std::pair<double, double>& uv) {
    return std::pair<double, double>{cx + (uv.first - 0.5) * width,
                                     cy + (uv.second - 0.5) * height};
  };

  Trajectory traj;
  double t = 0.0;
  for (const auto& stroke : character_strokes(c)) {
    // Arc length in units of glyph height, so point density is size-free.
    std::vector<double> cum{0.0};
    for (std::size_t i = 1; i < stroke.size(); ++i) {
      const double dx = (stroke[i].first - stroke[i - 1].first) * kGlyphAspect;
      const double dy = stroke[i].second - stroke[i - 1].second;
      cum.push_back(cum.back() + std::hypot(dx, dy));
    }
    const double arc = cum.back();
    const std::size_t n_pts =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(
                                     arc * points_per_unit)) + 1);

    if (!traj.points.empty()) traj.stroke_starts.push_back(traj.points.size());
    for (std::size_t i = 0; i < n_pts; ++i) {
      const double target =
          arc * static_cast<double>(i) / static_cast<double>(n_pts - 1);
      // Walk the polyline to the target arc position.
      std::size_t seg = 1;
      while (seg + 1 < cum.size() && cum[seg] < target) ++seg;
      std::pair<double, double> uv = stroke[0];
      if (stroke.size() > 1) {
        const double lo = cum[seg - 1], hi = cum[seg];
        const double f = hi > lo ? (target - lo) / (hi - lo) : 0.0;
        uv = {stroke[seg - 1].first +
                  f * (stroke[seg].first - stroke[seg - 1].first),
              stroke[seg - 1].second +
                  f * (stroke[seg].second - stroke[seg - 1].second)};
      }
      const auto [x, y] = place(uv);
      traj.points.push_back({t, x, y});
      t += dt;
    }
  }
  traj.validate();
  return traj;
}

std::vector<CharacterTemplate> builtin_templates() {
  std::vector<CharacterTemplate> out;
  out.reserve(kGlyphs.size());
  for (const Glyph& g : kGlyphs)
    out.push_back({std::string(1, g.ch),
                   character_trajectory(g.ch, 0.5, 0.5, 1.0, 0.01)});
  return out;
}

}  // namespace scanleak
