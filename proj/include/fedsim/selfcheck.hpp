#pragma once

#include <iosfwd>

namespace fedsim {

/// Quick property smoke run (gradient oracle, aggregation identities, partition
/// conservation, determinism). Prints one line per property; true if all pass.
bool run_self_check(std::ostream& out);

} // namespace fedsim
