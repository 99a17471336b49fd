#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "modbridge/core/types.hpp"

namespace mb {

struct GeneratorInfo {
  std::string_view id;
  std::string_view display_name;
  ModalityKind output;
};

// The six baseline generators, two per output modality.
const std::vector<GeneratorInfo>& generator_roster();
// Throws invalid_params for ids outside the roster.
const GeneratorInfo& generator_info(std::string_view id);

// All 42 baseline variants: 6 generator-only, 12 ranked, 24 mined. Order
// follows the published roster listing.
std::vector<VariantSpec> enumerate_variants();

// Roster spelling, e.g. "SD3.5", "FLUX.1 dev+IB", "4o+SA 1.0+MJ".
std::string display_name(const VariantSpec& v);

Paradigm paradigm_of(const VariantSpec& v);

// Looks a variant up by canonical id or display name.
VariantSpec find_variant(std::string_view name);

}  // namespace mb
