#pragma once

#include "json.hpp"

#include "obscert/certify.hpp"
#include "obscert/functions.hpp"
#include "obscert/logspace.hpp"

namespace obscert {

using Json = nlohmann::ordered_json;

/// {"log10": ..., "decimal": ...}; decimal is null when the value overflows a double.
Json constant_json(LogValue c);

Json to_json(const GevreyCertificate& c);
Json to_json(const DoublingCertificate& c);
Json to_json(const UcpCertificate& c);
Json to_json(const GevreyReport& r);
Json to_json(const DoublingReport& r);
Json to_json(const UcpReport& r);
Json to_json(const EmpiricalRatio& r);
Json to_json(const SoundnessVerdict& v);
Json to_json(const ObservabilityCertificate& cert);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace obscert
