#include "phasenet/pruning.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "phasenet/errors.hpp"
#include "phasenet/rng.hpp"

namespace phasenet {

namespace {

// Same expression as amplitude(); the unit-circle landing below tests
// against exactly this computation.
double radius(double re, double im) {
    return std::sqrt(re * re + im * im);
}

double nudge(double v, int steps) {
    const double dir = steps > 0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    for (int i = 0; i < std::abs(steps); ++i) v = std::nextafter(v, dir);
    return v;
}

// Maps w to a value of modulus 1 with the phase of w, choosing component
// bits whose computed radius() is exactly 1.0. Plain division by the radius
// can land one ulp off the unit circle, which would make a second
// application renormalize again; searching the few neighbouring
// representations (phase perturbation < 1e-15) removes that drift, so the
// operator is exactly idempotent.
std::pair<double, double> unit_phase(double re, double im) {
    if (!std::isfinite(re) || !std::isfinite(im)) {
        throw std::runtime_error("phase prune: non-finite weight");
    }
    if (re == 0.0 && im == 0.0) return {0.0, 0.0};
    double r = radius(re, im);
    if (r == 1.0) return {re, im};
    if (!std::isfinite(r)) {
        // Finite components whose squares overflow; rescaling by a power
        // of two changes no bits of the phase.
        re *= 0x1p-600;
        im *= 0x1p-600;
        r = radius(re, im);
    } else if (r == 0.0) {
        // Subnormal components whose squares underflow; rescaling by a
        // power of two changes no bits of the phase.
        re *= 0x1p+600;
        im *= 0x1p+600;
        r = radius(re, im);
    }
    const double ur = re / r;
    const double ui = im / r;
    if (radius(ur, ui) == 1.0) return {ur, ui};
    for (int ring = 1; ring <= 4; ++ring) {
        for (int dr = -ring; dr <= ring; ++dr) {
            for (int di = -ring; di <= ring; ++di) {
                if (std::max(std::abs(dr), std::abs(di)) != ring) continue;
                const double cr = nudge(ur, dr);
                const double ci = nudge(ui, di);
                if (radius(cr, ci) == 1.0) return {cr, ci};
            }
        }
    }
    throw std::runtime_error("phase prune: no unit-circle representation found");
}

// Zeroes exactly `count` of the indices [0, n) chosen uniformly without
// replacement: a partial Fisher-Yates shuffle decided by rng.
std::vector<std::uint32_t> pick_indices(std::size_t n, std::size_t count, Rng& rng) {
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

template <typename ZeroAt>
void random_half(const std::vector<std::size_t>& sizes, HalfScope scope,
                 std::uint64_t seed, ZeroAt zero_at) {
    Rng rng(seed);
    if (scope == HalfScope::PerMatrix) {
        for (std::size_t l = 0; l < sizes.size(); ++l) {
            for (std::uint32_t i : pick_indices(sizes[l], sizes[l] / 2, rng)) {
                zero_at(l, i);
            }
        }
        return;
    }
    std::size_t total = 0;
    for (std::size_t s : sizes) total += s;
    for (std::uint32_t flat : pick_indices(total, total / 2, rng)) {
        std::size_t l = 0;
        std::size_t off = flat;
        while (off >= sizes[l]) {
            off -= sizes[l];
            ++l;
        }
        zero_at(l, off);
    }
}

double sign_of(double v) {
    if (v > 0.0) return 1.0;
    if (v < 0.0) return -1.0;
    return 0.0;
}

[[noreturn]] void mismatch(PruneVariant v, const char* kind) {
    throw config_error(std::string(variant_token(v)) +
                       " pruning does not apply to " + kind + " models");
}

} // namespace

bool applies_to_complex(PruneVariant v) {
    return v != PruneVariant::SignOnly && v != PruneVariant::MagnitudeOnly;
}

bool applies_to_real(PruneVariant v) {
    switch (v) {
        case PruneVariant::None:
        case PruneVariant::RandomHalf:
        case PruneVariant::SignOnly:
        case PruneVariant::MagnitudeOnly:
            return true;
        default:
            return false;
    }
}

const char* variant_token(PruneVariant v) {
    switch (v) {
        case PruneVariant::None: return "none";
        case PruneVariant::RandomHalf: return "half";
        case PruneVariant::PhaseOnly: return "phase";
        case PruneVariant::AmplitudeOnly: return "amplitude";
        case PruneVariant::RealOnly: return "real";
        case PruneVariant::ImagOnly: return "imag";
        case PruneVariant::SignOnly: return "sign";
        case PruneVariant::MagnitudeOnly: return "magnitude";
    }
    throw std::runtime_error("variant_token: unknown variant");
}

PruneVariant parse_variant(std::string_view token) {
    if (token == "none") return PruneVariant::None;
    if (token == "half") return PruneVariant::RandomHalf;
    if (token == "phase") return PruneVariant::PhaseOnly;
    if (token == "amplitude") return PruneVariant::AmplitudeOnly;
    if (token == "real") return PruneVariant::RealOnly;
    if (token == "imag") return PruneVariant::ImagOnly;
    if (token == "sign") return PruneVariant::SignOnly;
    if (token == "magnitude") return PruneVariant::MagnitudeOnly;
    throw config_error("unknown prune variant: " + std::string(token));
}

const char* half_scope_token(HalfScope s) {
    return s == HalfScope::PerMatrix ? "per-matrix" : "global";
}

HalfScope parse_half_scope(std::string_view token) {
    if (token == "per-matrix") return HalfScope::PerMatrix;
    if (token == "global") return HalfScope::Global;
    throw config_error("unknown half scope: " + std::string(token));
}

CvnnModel prune_complex(CvnnModel model, PruneVariant v, std::uint64_t rng_seed,
                        HalfScope scope) {
    if (!applies_to_complex(v)) mismatch(v, "complex");
    switch (v) {
        case PruneVariant::None:
            break;
        case PruneVariant::PhaseOnly:
            for (ComplexMatrix& w : model.weights) {
                for (std::size_t i = 0; i < w.re.v.size(); ++i) {
                    const auto [re, im] = unit_phase(w.re.v[i], w.im.v[i]);
                    w.re.v[i] = re;
                    w.im.v[i] = im;
                }
            }
            break;
        case PruneVariant::AmplitudeOnly:
            for (ComplexMatrix& w : model.weights) {
                for (std::size_t i = 0; i < w.re.v.size(); ++i) {
                    // Nonnegative-real values are already fixed points;
                    // skipping them keeps re-pruning bit-identical.
                    if (w.im.v[i] == 0.0 && w.re.v[i] >= 0.0) continue;
                    w.re.v[i] = radius(w.re.v[i], w.im.v[i]);
                    w.im.v[i] = 0.0;
                }
            }
            break;
        case PruneVariant::RealOnly:
            for (ComplexMatrix& w : model.weights) {
                for (double& v2 : w.im.v) v2 = 0.0;
            }
            break;
        case PruneVariant::ImagOnly:
            for (ComplexMatrix& w : model.weights) {
                for (double& v2 : w.re.v) v2 = 0.0;
            }
            break;
        case PruneVariant::RandomHalf: {
            std::vector<std::size_t> sizes;
            for (const ComplexMatrix& w : model.weights) {
                sizes.push_back(w.re.v.size());
            }
            random_half(sizes, scope, rng_seed, [&](std::size_t l, std::size_t i) {
                model.weights[l].re.v[i] = 0.0;
                model.weights[l].im.v[i] = 0.0;
            });
            break;
        }
        default:
            mismatch(v, "complex");
    }
    return model;
}

RvnnModel prune_real(RvnnModel model, PruneVariant v, std::uint64_t rng_seed,
                     HalfScope scope) {
    if (!applies_to_real(v)) mismatch(v, "real");
    switch (v) {
        case PruneVariant::None:
            break;
        case PruneVariant::SignOnly:
            for (RealMatrix& w : model.weights) {
                for (double& x : w.v) x = sign_of(x);
            }
            break;
        case PruneVariant::MagnitudeOnly:
            for (RealMatrix& w : model.weights) {
                for (double& x : w.v) x = std::fabs(x);
            }
            break;
        case PruneVariant::RandomHalf: {
            std::vector<std::size_t> sizes;
            for (const RealMatrix& w : model.weights) sizes.push_back(w.v.size());
            random_half(sizes, scope, rng_seed, [&](std::size_t l, std::size_t i) {
                model.weights[l].v[i] = 0.0;
            });
            break;
        }
        default:
            mismatch(v, "real");
    }
    return model;
}

} // namespace phasenet
