#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "splitlock/netlist.hpp"

namespace splitlock {

/// Black box implementing the original (unlocked) function. Implementations
/// must be pure: equal queries return equal outputs, and query() must be
/// safe to call from several threads at once.
class Oracle {
      public:
	virtual ~Oracle() = default;

	virtual const std::vector<std::string> &input_ports() const = 0;
	virtual std::size_t output_count() const = 0;
	virtual OutputPattern query(const InputPattern &in) const = 0;
};

/// Reference oracle: simulates an unlocked netlist and counts queries.
class SimulationOracle : public Oracle {
      public:
	/// Throws NetlistError if the circuit still has key ports.
	explicit SimulationOracle(Netlist unlocked);

	const std::vector<std::string> &input_ports() const override { return circuit_.inputs(); }
	std::size_t output_count() const override { return circuit_.output_count(); }
	OutputPattern query(const InputPattern &in) const override;

	std::uint64_t query_count() const { return queries_.load(); }
	const Netlist &circuit() const { return circuit_; }

      private:
	Netlist circuit_;
	mutable std::atomic<std::uint64_t> queries_{0};
};

/// View of another oracle with some input ports held at fixed bits: queries
/// carry only the free ports, and the fixed bits are re-inserted at their
/// original positions before delegation. Holds a pointer to the base oracle,
/// which must outlive this object.
class ConditionalOracle : public Oracle {
      public:
	ConditionalOracle(const Oracle &base, SplitCondition cond);

	const std::vector<std::string> &input_ports() const override { return free_ports_; }
	std::size_t output_count() const override { return base_->output_count(); }
	OutputPattern query(const InputPattern &in) const override;

	const SplitCondition &condition() const { return cond_; }

      private:
	const Oracle *base_;
	SplitCondition cond_;
	std::vector<std::string> free_ports_;
	// Per base input position: free-port index, or -1 / -2 for a bit
	// fixed at 0 / 1.
	std::vector<int> source_;
};

inline ConditionalOracle conditional_oracle(const Oracle &base, SplitCondition cond)
{
	return ConditionalOracle(base, std::move(cond));
}

enum class AttackStatus : std::uint8_t {
	KeyFound,
	NoKeyInfluence, // the key never affects an output: any key is correct
	Timeout,	// a limit hit first; key and trace are partial
};

std::string_view to_string(AttackStatus status);

/// Resource bounds for one attack run. Zero means unlimited. The timeout is
/// checked between solver iterations, so one long final iteration can
/// overshoot it.
struct AttackLimits {
	std::chrono::milliseconds timeout{0};
	std::size_t max_dips = 0;
};

struct DipTraceEntry {
	InputPattern input;
	OutputPattern oracle_output;

	bool operator==(const DipTraceEntry &) const = default;
};

struct AttackResult {
	KeyAssignment key;
	std::vector<DipTraceEntry> dip_trace;
	std::size_t dip_count = 0; // always |dip_trace|
	std::chrono::nanoseconds wall_time{0};
	AttackStatus status = AttackStatus::KeyFound;
};

/// Oracle-guided key recovery: repeatedly solve a two-key miter of the
/// locked circuit for a distinguishing input pattern, query the oracle on
/// it, and constrain both key vectors to reproduce the answer; when no
/// pattern remains, extract any key consistent with the whole trace. On
/// KeyFound the returned key matches the oracle on every trace entry; it
/// unlocks the full function whenever the scheme leaves only functionally
/// correct keys standing. dip_count counts iterations that produced a
/// pattern: the closing unsatisfiable call is not counted.
AttackResult sat_attack(const Netlist &locked, const Oracle &oracle,
			const AttackLimits &limits = {});

/// Cofactor of the locked circuit with the given input ports held at the
/// bits of `b` ('0'/'1', b[i] fixes split_ports[i]), simplified. Key ports
/// are preserved verbatim even when simplification strips their logic.
Netlist generate_conditional_netlist(const Netlist &locked,
				     const std::vector<std::string> &split_ports,
				     const std::string &b);

/// One sub-attack per condition value, in ascending order of b read as an
/// integer (split_ports[0] is the most significant bit).
struct MultiKeyResult {
	std::size_t splitting_effort = 0; // N
	std::vector<std::string> split_ports;
	std::vector<std::pair<SplitCondition, AttackResult>> entries; // 2^N, ascending b

	std::chrono::nanoseconds wall_min{0};
	std::chrono::nanoseconds wall_mean{0};
	std::chrono::nanoseconds wall_max{0};
};

/// The split attack: fix the `splitting_effort` inputs with the largest
/// key-controlled fan-out cones to every possible value, attack each of the
/// 2^N cofactors independently against a conditional view of the oracle,
/// and return all sub-keys. Sub-tasks are distributed over `workers`
/// threads; the result is deterministic and does not depend on the worker
/// count. A sub-task that hits a limit reports Timeout in its entry while
/// the others still complete.
MultiKeyResult split_attack(const Netlist &locked, const Oracle &oracle,
			    std::size_t splitting_effort, std::size_t workers = 1,
			    const AttackLimits &limits = {});

/// Close the loop on a completed split attack: drive the locked circuit's
/// key ports from a balanced MUX2 selector tree over the hardwired sub-keys,
/// selected by the split inputs themselves. The result has the original
/// circuit's signature and no key ports. Throws on Timeout entries;
/// NoKeyInfluence entries are fine (any key is correct for them).
Netlist recombine(const Netlist &locked, const MultiKeyResult &result);

enum class VerifyMode : std::uint8_t {
	Auto,	    // Exhaustive up to 12 inputs, SatMiter beyond
	Exhaustive, // all 2^|I| patterns; requires |I| <= 20
	SatMiter,   // unsatisfiability of a difference miter
};

struct VerifyResult {
	bool equivalent = false;
	std::optional<InputPattern> counterexample; // simulation-checked witness

	explicit operator bool() const { return equivalent; }
};

/// Functional equivalence of two unlocked netlists with identical port
/// signatures. SatMiter counterexamples are re-checked by simulation before
/// being returned.
VerifyResult verify_equivalence(const Netlist &a, const Netlist &b,
				VerifyMode mode = VerifyMode::Auto);

} // namespace splitlock
