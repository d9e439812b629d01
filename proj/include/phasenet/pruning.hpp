#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "phasenet/cvnn.hpp"
#include "phasenet/rvnn.hpp"

namespace phasenet {

/// Information-preserving prune operators. Phase/Amplitude/Real/Imag apply
/// to complex models, Sign/Magnitude to real models, None/RandomHalf to both.
enum class PruneVariant {
    None,
    RandomHalf,
    PhaseOnly,
    AmplitudeOnly,
    RealOnly,
    ImagOnly,
    SignOnly,
    MagnitudeOnly,
};

/// Whether RandomHalf zeroes floor(N/2) entries of each weight matrix or
/// floor(total/2) over all matrices pooled.
enum class HalfScope { PerMatrix, Global };

bool applies_to_complex(PruneVariant v);
bool applies_to_real(PruneVariant v);

/// Short token used on the command line and in CSV output: none, half,
/// phase, amplitude, real, imag, sign, magnitude.
const char* variant_token(PruneVariant v);
PruneVariant parse_variant(std::string_view token);

const char* half_scope_token(HalfScope s);
HalfScope parse_half_scope(std::string_view token);

/// Returns a pruned copy; the input model is never modified. rng_seed is
/// consumed only by RandomHalf. Deterministic variants are exactly
/// idempotent: PhaseOnly output values satisfy sqrt(re^2+im^2) == 1.0 in
/// double arithmetic (or are exactly zero), so re-pruning returns the same
/// bits.
CvnnModel prune_complex(CvnnModel model, PruneVariant v, std::uint64_t rng_seed,
                        HalfScope scope = HalfScope::PerMatrix);
RvnnModel prune_real(RvnnModel model, PruneVariant v, std::uint64_t rng_seed,
                     HalfScope scope = HalfScope::PerMatrix);

} // namespace phasenet
