#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "treeanova/errors.hpp"
#include "treeanova/rng.hpp"

namespace treeanova {

struct NormalParams {
    double mean = 0.0;
    double variance = 1.0;
};

struct SkewNormalParams {
    double location;
    double scale;
    double shape;
};

struct StudentTParams {
    double df;
};

struct LaplaceParams {
    double location;
    double scale;
};

struct MixtureComponent {
    double weight;
    double mean;
    double variance;
};

struct NormalMixtureParams {
    std::vector<MixtureComponent> components;
};

struct ExponentialParams {
    double rate;
};

struct Moments {
    double mean;
    double variance;
};

/// Error-law specification for sample generation. Construction validates the
/// parameter domain (scale > 0, df > 0, rate > 0, positive mixture weights
/// summing to 1 within 1e-12), so a held instance is always usable.
class DistributionSpec {
  public:
    using Params = std::variant<NormalParams, SkewNormalParams, StudentTParams,
                                LaplaceParams, NormalMixtureParams, ExponentialParams>;

    static DistributionSpec normal(double mean = 0.0, double variance = 1.0);
    static DistributionSpec skew_normal(double location, double scale, double shape);
    static DistributionSpec student_t(double df);
    static DistributionSpec laplace(double location, double scale);
    static DistributionSpec normal_mixture(std::vector<MixtureComponent> components);
    static DistributionSpec exponential(double rate);

    const Params& params() const { return params_; }

    /// Kind tag as used in config files: "normal", "skew-normal", "student-t",
    /// "laplace", "normal-mixture", "exponential".
    std::string kind() const;

    /// Compact canonical form, e.g. "laplace(0|1)" (comma-free so it can sit
    /// in a CSV field); stable across runs.
    std::string to_string() const;

    /// True when theoretical_moments() is defined (t requires df > 2).
    bool has_finite_variance() const;

    /// One draw consuming the given engine. Building block for sample();
    /// exposed so hot loops can stream draws without materializing vectors.
    double draw(Xoshiro256PlusPlus& engine) const;

  private:
    explicit DistributionSpec(Params params);

    Params params_;
};

/// Standard normal draw via the Marsaglia polar method.
double draw_standard_normal(Xoshiro256PlusPlus& engine);

/// Two independent standard normals (the polar method yields a pair per
/// accepted point); cheaper than two single draws in bulk loops.
std::pair<double, double> draw_standard_normal_pair(Xoshiro256PlusPlus& engine);

/// n independent draws from spec, deterministic given the seed.
std::vector<double> sample(const DistributionSpec& spec, std::size_t n, const Seed& seed);

/// Exact closed-form mean and variance of spec.
Moments theoretical_moments(const DistributionSpec& spec);

/// Draws standardized by the theoretical moments and then shifted:
/// returns mean + sd * (Y - E[Y]) / SD[Y] elementwise.
std::vector<double> sample_standardized_shifted(const DistributionSpec& spec, double mean,
                                                double sd, std::size_t n, const Seed& seed);

}  // namespace treeanova
