#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "stackcp/dataset.hpp"
#include "stackcp/errors.hpp"
#include "stackcp/rng.hpp"

namespace stackcp {

// Synthetic regression data: features uniform on [0,1]^d, response
// f(x) + noise. Gaussian noise has constant scale sigma; the heteroscedastic
// variant scales it by (0.5 + 2*x_0), so spread grows along the first feature.
struct SyntheticSpec {
    enum class Func { linear, friedman1, constant };
    enum class Noise { gaussian, heteroscedastic };

    std::size_t n = 500;
    std::size_t d = 4;
    Func func = Func::linear;
    Noise noise = Noise::gaussian;
    double sigma = 1.0;
    std::uint64_t seed = 1;

    static Func func_from_name(const std::string& name) {
        if (name == "linear") return Func::linear;
        if (name == "friedman1") return Func::friedman1;
        if (name == "constant") return Func::constant;
        throw BadConfig("unknown ground-truth function: " + name);
    }
    static Noise noise_from_name(const std::string& name) {
        if (name == "gaussian") return Noise::gaussian;
        if (name == "heteroscedastic") return Noise::heteroscedastic;
        throw BadConfig("unknown noise model: " + name);
    }
    static std::string func_name(Func f) {
        switch (f) {
            case Func::linear: return "linear";
            case Func::friedman1: return "friedman1";
            case Func::constant: return "constant";
        }
        return "?";
    }
    static std::string noise_name(Noise m) {
        return m == Noise::gaussian ? "gaussian" : "heteroscedastic";
    }
};

namespace detail {

inline double truth_value(SyntheticSpec::Func func, const double* x, std::size_t d) {
    switch (func) {
        case SyntheticSpec::Func::linear: {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += static_cast<double>(j + 1) * x[j];
            return s;
        }
        case SyntheticSpec::Func::friedman1: {
            if (d < 5) throw BadConfig("friedman1 needs d >= 5");
            return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) +
                   20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
        }
        case SyntheticSpec::Func::constant:
            return 3.0;
    }
    return 0.0;
}

}  // namespace detail

inline Dataset generate(const SyntheticSpec& spec) {
    if (spec.n < 1 || spec.d < 1) throw BadConfig("synthetic: need n >= 1 and d >= 1");
    if (spec.sigma < 0.0) throw BadConfig("synthetic: sigma must be >= 0");
    Rng rng(derive_stream(spec.seed, "synthetic"));
    Dataset out;
    out.x = Mat(spec.n, spec.d);
    out.y.resize(spec.n);
    out.feature_names.resize(spec.d);
    for (std::size_t j = 0; j < spec.d; ++j) out.feature_names[j] = "x" + std::to_string(j);
    out.response_name = "y";
    for (std::size_t i = 0; i < spec.n; ++i) {
        for (std::size_t j = 0; j < spec.d; ++j) out.x(i, j) = rng.uniform01();
        const double f = detail::truth_value(spec.func, out.x.row_ptr(i), spec.d);
        double scale = spec.sigma;
        if (spec.noise == SyntheticSpec::Noise::heteroscedastic)
            scale *= 0.5 + 2.0 * out.x(i, 0);
        out.y[i] = f + scale * rng.gaussian();
    }
    return out;
}

}  // namespace stackcp
