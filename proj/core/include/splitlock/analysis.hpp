#pragma once

#include "splitlock/netlist.hpp"

namespace splitlock {

/// Number of key-controlled gates in the transitive fan-out cone of an input
/// port. A gate is key-controlled iff it lies in the transitive fan-out of
/// any key port. Throws NetlistError for an unknown port.
std::size_t key_controlled_fanout_count(const Netlist &n, std::string_view port);

/// key_controlled_fanout_count for every input port, in declaration order.
std::vector<std::size_t> key_controlled_fanout_counts(const Netlist &n);

/// The `count` input ports with the largest key_controlled_fanout_count,
/// in descending-count order; ties broken by ascending declaration order.
/// Throws NetlistError if count > |I|.
std::vector<std::string> select_split_inputs(const Netlist &n, std::size_t count);

} // namespace splitlock
