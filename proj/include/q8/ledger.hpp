#pragma once

// Machine-readable list of every inconsistency the checks detect in the
// printed data: element table rows, wiring rows, the isotropy catalog,
// Hopf branch stability, the existence condition, closed-form indices and
// cycle existence.

#include "json.hpp"

#include "q8/group.hpp"

namespace q8::ledger {

// Deterministic: identical output on every call.
nlohmann::json discrepancy_ledger(const group::GroupTable& t);

}  // namespace q8::ledger
