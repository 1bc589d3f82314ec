#pragma once

#include "splitlock/netlist.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace splitlock {

inline constexpr std::string_view kDefaultKeyPrefix = "keyinput";

/// Parse .bench text. Ports whose names start with key_prefix are classified
/// as key inputs, preserving declaration order. Throws NetlistError with the
/// offending line number on syntax errors, bad arity, undefined nets,
/// duplicate definitions and undriven outputs; combinational cycles are
/// reported without a line.
Netlist parse_bench(std::istream &text, std::string name = "top", std::string_view key_prefix = kDefaultKeyPrefix);
Netlist parse_bench(const std::string &text, std::string name = "top", std::string_view key_prefix = kDefaultKeyPrefix);
Netlist parse_bench_file(const std::filesystem::path &path, std::string_view key_prefix = kDefaultKeyPrefix);

/// Emit .bench text: inputs, then key inputs, then outputs, then gates in
/// declaration order. Names are preserved exactly, so parse(write(n)) is
/// structurally identical to n.
void write_bench(std::ostream &out, const Netlist &n);
std::string write_bench(const Netlist &n);
void write_bench_file(const std::filesystem::path &path, const Netlist &n);

} // namespace splitlock
