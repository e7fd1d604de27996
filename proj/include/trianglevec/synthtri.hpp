#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "trianglevec/image.hpp"
#include "trianglevec/rng.hpp"

namespace tvec {

/// Rates are bounded so a sigmoid cannot be dilated into a flat plane.
inline constexpr double kRateMax = 10.0;

struct SigmoidParams {
  double magnitude = 0.0;  // m >= 0, signal units
  double rate = 0.0;       // r, per pixel, |r| <= kRateMax
  double shift = 0.0;      // b, pixels
};

/// Three sigmoids composed by pixel-wise max: h is a function of the column
/// coordinate x, v of the row coordinate y, d of the projection
/// x*sin(theta) + y*cos(theta).
struct TriangleParams {
  SigmoidParams h;
  SigmoidParams v;
  SigmoidParams d;
  double theta = 0.0;  // radians, [0, pi/2]
};

/// m / (1 + e^{r(x-b)}); the exponent is clamped at +-500 so the value
/// saturates instead of overflowing.
double sigmoid(double x, const SigmoidParams& p);

/// Empty iff all parameter constraints hold; each entry names the offending
/// parameter and bound. Wall shifts must lie in [0, grid) only when the wall
/// has positive magnitude.
std::vector<std::string> check_constraints(const TriangleParams& tp, int grid_h = 64,
                                           int grid_w = 64, double rate_max = kRateMax);

/// Validates, then evaluates the composed model on the integer pixel grid;
/// pixel (row y, col x) = max of the three sigmoid values.
Image render_triangle(const TriangleParams& tp, int h, int w);

/// Unchecked render into a caller-provided buffer of h*w doubles.
void render_triangle_into(const TriangleParams& tp, int h, int w, double* out);

/// True iff the diagonal term strictly exceeds both walls and half its own
/// magnitude on at least 2% of grid pixels.
bool has_triangle_region(const TriangleParams& tp, int h, int w);

enum class AmbiguousMode { dropout, vertical_fringe, oversized_triangle };

const char* to_string(AmbiguousMode m);
AmbiguousMode ambiguous_mode_from_string(std::string_view s);

struct CorpusSpec {
  int n = 0;
  double good_fraction = 0.3;
  double noise_sigma = 0.05;
  double ridge_amplitude = 0.3;
  double ridge_period = 6.0;  // pixels
  std::set<AmbiguousMode> ambiguous_modes;
  std::uint64_t seed = 0;
};

struct CorpusSample {
  LabeledImage labeled;
  TriangleParams truth;
  std::string mode;  // "good", "walls", or an ambiguous mode name
};

/// Deterministic per seed; sample i is generated from an independent stream
/// seeded with splitmix64(seed ^ i). The first round(n*good_fraction)
/// samples are good.
std::vector<CorpusSample> generate_corpus_detailed(const CorpusSpec& spec);
std::vector<LabeledImage> generate_corpus(const CorpusSpec& spec);

/// Draws wall+diagonal parameters of a plausible good plot, rejecting draws
/// until has_triangle_region holds on a 64x64 grid.
TriangleParams sample_good_params(Rng& rng);

/// Writes images (csv-grid), manifest.tsv and ground_truth.tsv under dir.
/// Returns the manifest path.
std::filesystem::path write_corpus(const std::vector<CorpusSample>& samples,
                                   const std::filesystem::path& dir);

/// Reads a ground_truth.tsv sidecar back (id -> params, mode, label).
struct GroundTruthEntry {
  std::string id;
  TriangleParams params;
  std::string mode;
  Label label = Label::bad;
};
std::vector<GroundTruthEntry> read_ground_truth(const std::filesystem::path& path);

}  // namespace tvec
