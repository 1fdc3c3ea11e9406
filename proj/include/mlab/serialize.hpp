#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "mlab/adversary.hpp"
#include "mlab/fitting.hpp"
#include "mlab/kernel.hpp"
#include "mlab/mdp.hpp"
#include "mlab/perturbation.hpp"
#include "mlab/spectral.hpp"

namespace mlab {

using Json = nlohmann::json;

// Readers throw InvalidArgument naming the offending field.

Json to_json(const KernelSpec& k);
/// {"kind": ..., "bandwidth": b, "input_dim": d} and friends. fourier_spectrum
/// accepts either "spectrum": [...] or the shorthand "decay": a, "terms": L for
/// L_i = i^-a. input_dim may be omitted when default_dim is given.
KernelSpec kernel_from_json(const Json& j, std::optional<std::size_t> default_dim = std::nullopt);

/// {"dim": d, "points": [[...], ...]}
Json to_json(const PointSet& p);
PointSet points_from_json(const Json& j);

/// {"points": ..., "weights": [...], "probability": bool}
Json to_json(const DiscreteMeasure& m);
DiscreteMeasure measure_from_json(const Json& j);

/// {"kernel": ..., "centers": ..., "coefficients": [...]}
Json to_json(const RkhsExpansion& f);
RkhsExpansion expansion_from_json(const Json& j);

/// Dynamics rows are stored sparse as [[next_state, prob], ...] in the
/// row order ((h-1) * S + s) * A + a.
Json to_json(const MdpSpec& m);
MdpSpec mdp_from_json(const Json& j);

Json to_json(const Policy& pi);
Policy policy_from_json(const Json& j);

Json to_json(const SpectralBasis& b);
SpectralBasis basis_from_json(const Json& j);

Json to_json(const ResponseReport& r);
Json to_json(const ComplexityReport& r);
Json to_json(const UnknownComplexityReport& r);
Json to_json(const FitResult& f);
/// Dynamics are referenced by id, not embedded.
Json to_json(const AdversarialPair& p, const std::string& dynamics_id);

}  // namespace mlab
