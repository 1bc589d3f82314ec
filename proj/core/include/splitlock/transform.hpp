#pragma once

#include "splitlock/netlist.hpp"

namespace splitlock {

/// Restrict a netlist by holding the condition's input ports at constants.
/// The fixed ports disappear from the input list; key inputs and outputs are
/// preserved. The result is structurally simplified. Cofactoring on key
/// ports or unknown ports throws NetlistError.
Netlist cofactor(const Netlist &n, const SplitCondition &cond);

/// Function-preserving cleanup with the same I/K/O signature: constant
/// propagation and folding, buffer-chain collapsing, dead-gate removal and
/// structural hashing of identical gates. Gate count never increases.
Netlist structural_simplify(const Netlist &n);

/// Hardwire a key into a locked netlist, yielding an unlocked netlist with
/// the same inputs and outputs (key ports become constants, then the result
/// is simplified).
Netlist apply_key(const Netlist &n, const KeyAssignment &key);

} // namespace splitlock
