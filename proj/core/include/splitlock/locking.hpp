#pragma once

#include "splitlock/netlist.hpp"

#include <cstdint>

namespace splitlock {

enum class LockScheme : std::uint8_t {
	Xor,	  // per-bit XOR/XNOR key gates on internal nets
	Sarlock,  // point-function comparator with a hardwired k* mask
	Lut2Stage // two-stage keyed LUT network XOR-folded into one output
};

std::string_view to_string(LockScheme scheme);
std::optional<LockScheme> lock_scheme_from(std::string_view token);

/// Shape of the two-stage LUT network. Stage 1 is one LUT per entry of
/// stage1_widths, each consuming that many tap signals (disjoint). Stage 2 is
/// a single LUT over all stage-1 outputs plus stage2_extra_taps further tap
/// signals. Every LUT's truth table is exposed as key bits.
struct LutTopology {
	std::vector<std::size_t> stage1_widths{6, 6};
	std::size_t stage2_extra_taps = 2;

	std::size_t tap_count() const;	  // tapped signals consumed (default 14)
	std::size_t stage2_width() const; // stage-1 outputs + extra taps
	std::size_t table_bits() const;	  // key bits stored in LUT tables (default 144)

	bool operator==(const LutTopology &) const = default;
};

struct LockSpec {
	LockScheme scheme = LockScheme::Xor;
	std::size_t key_size = 0;
	KeyAssignment correct_key; // k*; |bits| must equal key_size
	std::uint64_t rng_seed = 1;

	// SARLOCK: inputs compared against the key (default: first key_size
	// inputs) and the output whose value is flipped (default: first).
	std::vector<std::string> tap_ports;
	std::string protected_output;

	// LUT2STAGE: network shape. Key bits beyond table_bits() become
	// XOR/XNOR pad gates on the protected output; key_size below
	// table_bits() is an error.
	LutTopology lut;
};

/// A locking transform's full result: the locked netlist plus the metadata a
/// caller needs to serialize a sidecar description (tap nets, displaced
/// output). Key ports are named keyinput0..keyinput<key_size-1>.
struct AppliedLock {
	Netlist locked;
	std::vector<std::string> tap_nets;
	std::string protected_output; // empty for the XOR scheme
};

/// Dispatch on spec.scheme. All randomness comes from spec.rng_seed, so equal
/// (netlist, spec) pairs produce identical results.
AppliedLock apply_lock(const Netlist &n, const LockSpec &spec);

/// Insert key_size XOR/XNOR key gates on seed-chosen live internal nets.
/// Gate polarity makes spec.correct_key the unique per-gate restoring value,
/// so apply_key(locked, k*) is equivalent to n.
Netlist lock_xor(const Netlist &n, const LockSpec &spec);

/// Point-function lock: flip := (tap slice == k) AND (k != k*); the protected
/// output becomes original XOR flip. Every wrong key errs on exactly the one
/// input slice equal to it; k* errs nowhere.
Netlist lock_sarlock(const Netlist &n, const LockSpec &spec);

/// XOR-fold a keyed two-stage LUT network against its own hardwired k* image
/// on the protected output. The tapped signals are seed-chosen primary
/// inputs, so with the reference key every single-bit key flip is observable
/// at the protected output.
Netlist lock_lut(const Netlist &n, const LockSpec &spec);

/// Uniform random key bits from a dedicated generator.
KeyAssignment random_key(std::size_t width, std::uint64_t seed);

/// Reference k* for lock_lut: non-constant stage-1 tables, a stage-2 table
/// sensitive to every stage-1 output everywhere, random pad bits. These
/// properties make all key_size bits of the lock individually observable.
KeyAssignment lut_reference_key(const LutTopology &lut, std::size_t key_size, std::uint64_t seed);

/// Exhaustive correctness table of a locked netlist against its original:
/// cell(i, k) is true iff the locked outputs match the original's on every
/// output bit.
struct ErrorDistribution {
	std::size_t input_bits = 0;
	std::size_t key_bits = 0;
	std::vector<bool> correct; // index (i << key_bits) | k

	bool cell(std::uint64_t input, std::uint64_t key) const
	{
		return correct[(input << key_bits) | key];
	}
};

/// Build the table by simulating all 2^|I| x 2^|K| pairs. Requires matching
/// input/output signatures, |I| <= 16, |K| <= 16 and |I|+|K| <= 24.
ErrorDistribution error_distribution(const Netlist &original, const Netlist &locked);

} // namespace splitlock
