#include "treeanova/distributions.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

namespace treeanova {

namespace {

void require(bool condition, const char* message) {
    if (!condition) throw ParameterError(message);
}

bool finite(double x) { return std::isfinite(x); }

// Marsaglia polar: two standard normals per accepted (u,v) pair.
std::pair<double, double> polar_pair(Xoshiro256PlusPlus& engine) {
    for (;;) {
        const double u = engine.next_symmetric();
        const double v = engine.next_symmetric();
        const double s = u * u + v * v;
        if (s < 1.0) {
            const double factor = std::sqrt(-2.0 * std::log(s) / s);
            return {u * factor, v * factor};
        }
    }
}

struct DrawVisitor {
    Xoshiro256PlusPlus& engine;

    double operator()(const NormalParams& p) const {
        return p.mean + std::sqrt(p.variance) * draw_standard_normal(engine);
    }

    double operator()(const SkewNormalParams& p) const {
        // Exact representation: xi + omega*(delta*|z0| + sqrt(1-delta^2)*z1),
        // delta = shape / sqrt(1 + shape^2).
        const double delta = p.shape / std::sqrt(1.0 + p.shape * p.shape);
        const auto [z0, z1] = polar_pair(engine);
        return p.location +
               p.scale * (delta * std::abs(z0) + std::sqrt(1.0 - delta * delta) * z1);
    }

    double operator()(const StudentTParams& p) const {
        // Bailey's polar method, exact for any df > 0.
        for (;;) {
            const double u = engine.next_symmetric();
            const double v = engine.next_symmetric();
            const double w = u * u + v * v;
            if (w < 1.0) {
                return u * std::sqrt(p.df * (std::pow(w, -2.0 / p.df) - 1.0) / w);
            }
        }
    }

    double operator()(const LaplaceParams& p) const {
        const double u = engine.next_unit();
        return u < 0.5 ? p.location + p.scale * std::log(2.0 * u)
                       : p.location - p.scale * std::log(2.0 * (1.0 - u));
    }

    double operator()(const NormalMixtureParams& p) const {
        const double u = engine.next_unit();
        double cumulative = 0.0;
        const MixtureComponent* chosen = &p.components.back();
        for (const auto& component : p.components) {
            cumulative += component.weight;
            if (u < cumulative) {
                chosen = &component;
                break;
            }
        }
        return chosen->mean + std::sqrt(chosen->variance) * draw_standard_normal(engine);
    }

    double operator()(const ExponentialParams& p) const {
        return -std::log1p(-engine.next_unit()) / p.rate;
    }
};

struct MomentsVisitor {
    Moments operator()(const NormalParams& p) const { return {p.mean, p.variance}; }

    Moments operator()(const SkewNormalParams& p) const {
        const double delta = p.shape / std::sqrt(1.0 + p.shape * p.shape);
        const double mean =
            p.location + p.scale * delta * std::sqrt(2.0 / std::numbers::pi);
        const double variance =
            p.scale * p.scale * (1.0 - 2.0 * delta * delta / std::numbers::pi);
        return {mean, variance};
    }

    Moments operator()(const StudentTParams& p) const {
        if (p.df <= 2.0) {
            throw UnsupportedMomentsError(
                "student-t moments require df > 2 (finite variance)");
        }
        return {0.0, p.df / (p.df - 2.0)};
    }

    Moments operator()(const LaplaceParams& p) const {
        return {p.location, 2.0 * p.scale * p.scale};
    }

    Moments operator()(const NormalMixtureParams& p) const {
        double mean = 0.0;
        double second_moment = 0.0;
        for (const auto& c : p.components) {
            mean += c.weight * c.mean;
            second_moment += c.weight * (c.variance + c.mean * c.mean);
        }
        return {mean, second_moment - mean * mean};
    }

    Moments operator()(const ExponentialParams& p) const {
        return {1.0 / p.rate, 1.0 / (p.rate * p.rate)};
    }
};

struct KindVisitor {
    std::string operator()(const NormalParams&) const { return "normal"; }
    std::string operator()(const SkewNormalParams&) const { return "skew-normal"; }
    std::string operator()(const StudentTParams&) const { return "student-t"; }
    std::string operator()(const LaplaceParams&) const { return "laplace"; }
    std::string operator()(const NormalMixtureParams&) const { return "normal-mixture"; }
    std::string operator()(const ExponentialParams&) const { return "exponential"; }
};

void append_number(std::ostringstream& out, double x) { out << x; }

struct ToStringVisitor {
    std::string operator()(const NormalParams& p) const {
        std::ostringstream out;
        out << "normal(";
        append_number(out, p.mean);
        out << "|";
        append_number(out, p.variance);
        out << ")";
        return out.str();
    }
    std::string operator()(const SkewNormalParams& p) const {
        std::ostringstream out;
        out << "skew-normal(" << p.location << "|" << p.scale << "|" << p.shape << ")";
        return out.str();
    }
    std::string operator()(const StudentTParams& p) const {
        std::ostringstream out;
        out << "student-t(" << p.df << ")";
        return out.str();
    }
    std::string operator()(const LaplaceParams& p) const {
        std::ostringstream out;
        out << "laplace(" << p.location << "|" << p.scale << ")";
        return out.str();
    }
    std::string operator()(const NormalMixtureParams& p) const {
        std::ostringstream out;
        out << "normal-mixture(";
        bool first = true;
        for (const auto& c : p.components) {
            if (!first) out << "|";
            out << c.weight << ":" << c.mean << ":" << c.variance;
            first = false;
        }
        out << ")";
        return out.str();
    }
    std::string operator()(const ExponentialParams& p) const {
        std::ostringstream out;
        out << "exponential(" << p.rate << ")";
        return out.str();
    }
};

}  // namespace

DistributionSpec::DistributionSpec(Params params) : params_(std::move(params)) {}

DistributionSpec DistributionSpec::normal(double mean, double variance) {
    require(finite(mean), "normal: mean must be finite");
    require(finite(variance) && variance > 0.0, "normal: variance must be > 0");
    return DistributionSpec(NormalParams{mean, variance});
}

DistributionSpec DistributionSpec::skew_normal(double location, double scale,
                                               double shape) {
    require(finite(location), "skew-normal: location must be finite");
    require(finite(scale) && scale > 0.0, "skew-normal: scale must be > 0");
    require(finite(shape), "skew-normal: shape must be finite");
    return DistributionSpec(SkewNormalParams{location, scale, shape});
}

DistributionSpec DistributionSpec::student_t(double df) {
    require(finite(df) && df > 0.0, "student-t: df must be > 0");
    return DistributionSpec(StudentTParams{df});
}

DistributionSpec DistributionSpec::laplace(double location, double scale) {
    require(finite(location), "laplace: location must be finite");
    require(finite(scale) && scale > 0.0, "laplace: scale must be > 0");
    return DistributionSpec(LaplaceParams{location, scale});
}

DistributionSpec DistributionSpec::normal_mixture(
    std::vector<MixtureComponent> components) {
    require(!components.empty(), "normal-mixture: at least one component required");
    double weight_sum = 0.0;
    for (const auto& c : components) {
        require(finite(c.weight) && c.weight > 0.0,
                "normal-mixture: weights must be > 0");
        require(finite(c.mean), "normal-mixture: component mean must be finite");
        require(finite(c.variance) && c.variance > 0.0,
                "normal-mixture: component variance must be > 0");
        weight_sum += c.weight;
    }
    require(std::abs(weight_sum - 1.0) <= 1e-12,
            "normal-mixture: weights must sum to 1 within 1e-12");
    return DistributionSpec(NormalMixtureParams{std::move(components)});
}

DistributionSpec DistributionSpec::exponential(double rate) {
    require(finite(rate) && rate > 0.0, "exponential: rate must be > 0");
    return DistributionSpec(ExponentialParams{rate});
}

std::string DistributionSpec::kind() const { return std::visit(KindVisitor{}, params_); }

std::string DistributionSpec::to_string() const {
    return std::visit(ToStringVisitor{}, params_);
}

bool DistributionSpec::has_finite_variance() const {
    if (const auto* t = std::get_if<StudentTParams>(&params_)) return t->df > 2.0;
    return true;
}

double DistributionSpec::draw(Xoshiro256PlusPlus& engine) const {
    return std::visit(DrawVisitor{engine}, params_);
}

double draw_standard_normal(Xoshiro256PlusPlus& engine) {
    return polar_pair(engine).first;
}

std::pair<double, double> draw_standard_normal_pair(Xoshiro256PlusPlus& engine) {
    return polar_pair(engine);
}

std::vector<double> sample(const DistributionSpec& spec, std::size_t n, const Seed& seed) {
    if (n < 1) throw ParameterError("sample: n must be >= 1");
    auto engine = seed.engine();
    std::vector<double> out(n);
    for (auto& value : out) value = spec.draw(engine);
    return out;
}

Moments theoretical_moments(const DistributionSpec& spec) {
    return std::visit(MomentsVisitor{}, spec.params());
}

std::vector<double> sample_standardized_shifted(const DistributionSpec& spec, double mean,
                                                double sd, std::size_t n,
                                                const Seed& seed) {
    if (!(std::isfinite(sd) && sd > 0.0)) {
        throw ParameterError("sample_standardized_shifted: sd must be > 0");
    }
    const Moments moments = theoretical_moments(spec);
    const double scale = sd / std::sqrt(moments.variance);
    std::vector<double> out = sample(spec, n, seed);
    for (auto& value : out) value = mean + scale * (value - moments.mean);
    return out;
}

}  // namespace treeanova
