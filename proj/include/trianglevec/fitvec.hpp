#pragma once

#include <array>
#include <filesystem>
#include <span>

#include "trianglevec/errors.hpp"
#include "trianglevec/features.hpp"
#include "trianglevec/gabor.hpp"
#include "trianglevec/image.hpp"
#include "trianglevec/optimize.hpp"
#include "trianglevec/synthtri.hpp"

namespace tvec {

/// Search vector layout: [m_h, r_h, b_h, m_v, r_v, b_v, m_d, r_d, b_d, theta, sigma].
inline constexpr int kFitDims = 11;

Bounds default_param_bounds(double sigma_lo = 0.5, double sigma_hi = 8.0);

struct FitConfig {
  double blend_weight = 0.5;  // lambda in [0,1]
  double penalty = 1e9;       // C, must be >= 1e6
  double sigma_lo = 0.5;
  double sigma_hi = 8.0;
  Bounds param_bounds = default_param_bounds();
  DeConfig de;

  void validate() const;
};

struct FitResult {
  TriangleParams params;
  double sigma_star = 0.0;
  double fitness = 0.0;
  long evals = 0;
};

/// Raised when the optimum never left the penalty plateau; carries the best
/// parameters found.
class FitFailedError : public Error {
 public:
  FitFailedError(const std::string& msg, TriangleParams best, double fitness)
      : Error(msg), best_params(best), best_fitness(fitness) {}
  TriangleParams best_params;
  double best_fitness;
};

Image transform_identity(const Image& img);
Image transform_grad_gaussian(const Image& img, double sigma);

enum class Transform { identity, grad_gaussian };

/// L2 norm over pixels of the transformed difference. Symmetric, >= 0.
double similarity(const Image& u, const Image& v, Transform t, double sigma = 1.0);

std::array<double, kFitDims> pack_params(const TriangleParams& tp, double sigma);
void unpack_params(std::span<const double> x, TriangleParams& tp, double& sigma);

/// Blended objective; constraint violations return penalty + unpenalized
/// value so the optimizer still sees a gradient out of the infeasible region.
double objective(std::span<const double> x, const Image& img, const FitConfig& cfg);

/// Global fit via differential evolution; deterministic per cfg.de.seed.
FitResult fit_synthetic(const Image& img, const FitConfig& cfg);

/// 12 features: [sigma_star, H_B, H_M, H_R, V_B, V_M, V_R, D_B, D_M, D_R,
/// D_theta, F].
FeatureVector vectorize_synth(const FitResult& fr);

/// Appends the G45_16_16 response norm to the 12-feature synthetic layout.
FeatureVector hybrid_vector(const FeatureVector& synth, const Image& img, const Filterbank& bank);

const std::vector<std::string>& synth_feature_names();
inline constexpr const char* kHybridGaborFeature = "G45_16_16";

/// Overlay with the fitted H_B/V_B/D_B boundary lines over a coarse
/// rendering of the image.
void write_fit_overlay_svg(const Image& img, const FitResult& fr,
                           const std::filesystem::path& path);

}  // namespace tvec
