#pragma once

#include <string>

#include <json.hpp>

#include "levyconj/inversion.hpp"
#include "levyconj/kernel.hpp"
#include "levyconj/mapping.hpp"
#include "levyconj/measure_core.hpp"
#include "levyconj/simulate.hpp"

namespace levyconj {

inline constexpr const char* kVersion = "0.1.0";

nlohmann::json to_json(const Triplet& t);
Triplet triplet_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MappingKernel& k);
MappingKernel kernel_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ValidationReport& r);
nlohmann::json to_json(const MomentReport& r);
nlohmann::json to_json(const DomainReport& r);
nlohmann::json to_json(const RangeReport& r);
nlohmann::json to_json(const SemistableReport& r);
nlohmann::json to_json(const DiscrepancyReport& r);

Triplet load_triplet(const std::string& path);
MappingKernel load_kernel(const std::string& path);

}  // namespace levyconj
