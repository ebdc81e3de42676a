#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "scanleak/errors.hpp"
#include "scanleak/segmentation.hpp"
#include "scanleak/trace.hpp"

namespace scanleak {

namespace nn {
class Model;
}

// Zone discretization of the screen: `cols` cells across the width, `rows`
// down the height. Zones are numbered row-major from the (0,0) corner:
// zone = row * cols + col.
struct GridSpec {
  int cols = 15;
  int rows = 32;
  double screen_w = 0.0624;  // meters
  double screen_h = 0.1350;  // meters

  int zone_count() const { return cols * rows; }
  void validate() const;
};

// Zone containing the point (x, y) in screen meters. On-screen boundary
// points clamp inward; points outside the screen throw DomainError.
int grid_zone(double x, double y, const GridSpec& grid);

// Center of a zone in screen meters. Inverse of grid_zone at cell centers.
std::pair<double, double> zone_center(int zone, const GridSpec& grid);

struct TrajPoint {
  double t = 0.0;  // seconds
  double x = 0.0;  // meters
  double y = 0.0;  // meters
};

// Time-ordered path on the screen. stroke_starts holds the index of the
// first point of every stroke after the first (a pen lift precedes each).
struct Trajectory {
  std::vector<TrajPoint> points;
  std::vector<std::size_t> stroke_starts;

  std::size_t stroke_count() const { return points.empty() ? 0 : stroke_starts.size() + 1; }
  void validate() const;  // times non-decreasing, stroke starts ordered
};

// Per-frame position recovery: intercept every frame in the trace, normalize
// each to length input_len, classify with the zone model, and map the argmax
// zone to its center. Timestamps are the frame trigger times. Throws
// DomainError when the trace yields no frames.
Trajectory recover_positions(const EmTrace& trace, const nn::Model& model,
                             const GridSpec& grid,
                             const SegmentationParams& params,
                             std::size_t input_len);

// Centered moving average per coordinate. The window shrinks symmetrically
// near the ends, so the first and last points pass through unchanged.
// window must be odd and >= 1.
Trajectory smooth(const Trajectory& traj, int window);

// Concatenate stroke segments into one trajectory, ordered by start time.
// Overlapping time ranges throw DomainError. Each input segment boundary
// becomes a stroke break; k segments yield k-1 breaks plus any internal ones.
Trajectory splice(const std::vector<Trajectory>& segments);

// Binary canvas. Bits are row-major, top-left origin.
struct RasterMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 0 or 1

  static RasterMask blank(int width, int height);
  std::uint8_t get(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
  void set(int x, int y) { pixels[std::size_t(y) * width + x] = 1; }
  std::size_t count_set() const;
};

// Draw the trajectory onto a width x height canvas mapped from the full
// screen rectangle. Strokes are Bresenham lines dilated to stroke_px wide.
RasterMask rasterize(const Trajectory& traj, int width, int height,
                     int stroke_px, double screen_w, double screen_h);

// Overlap score |A & B| / |A | B|. Two empty masks count as identical (1).
// Mismatched dimensions throw DomainError.
double jaccard(const RasterMask& a, const RasterMask& b);

// Portable bitmap (plain PBM, P1) export for eyeballing masks.
void save_pbm(const RasterMask& mask, const std::string& path);
RasterMask load_pbm(const std::string& path);

// ---- template-matching character recognition --------------------------------

struct CharacterTemplate {
  std::string label;
  Trajectory traj;
};

struct RankedLabel {
  std::string label;
  double score = 0.0;
};

// Rank all templates against the query by Jaccard overlap of size-normalized
// rasterizations (both scaled into the same box, aspect preserved). Ties
// break by label order so results are deterministic.
std::vector<RankedLabel> recognize_character(
    const Trajectory& query, const std::vector<CharacterTemplate>& templates,
    int canvas = 96, int stroke_px = 7);

// ---- stroke font ------------------------------------------------------------

// Characters this toolkit can draw: digits, upper case, lower case.
std::string recognizable_characters();

// Polyline strokes of one character in a unit box (x right, y down, both in
// [0, 1]). Unknown characters throw DomainError.
std::vector<std::vector<std::pair<double, double>>> character_strokes(char c);

// Timed trajectory tracing the character, centered at (cx, cy) screen meters
// with the given height; dt seconds between consecutive points, point
// spacing chosen by the caller via points_per_stroke scaling.
Trajectory character_trajectory(char c, double cx, double cy, double height,
                                double dt, int points_per_unit = 40);

// Template set over all recognizable characters, drawn in a fixed box.
std::vector<CharacterTemplate> builtin_templates();

// Split a recovered trajectory into per-character pieces at time gaps longer
// than gap_seconds (writing pauses between characters).
std::vector<Trajectory> split_at_gaps(const Trajectory& traj,
                                      double gap_seconds);

}  // namespace scanleak
