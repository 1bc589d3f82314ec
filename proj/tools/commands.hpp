#pragma once

#include "report.hpp"

#include <filesystem>
#include <iosfwd>

namespace splitlock::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitAttackFailure = 2;
inline constexpr int kExitVerifyFailure = 3;

/// Largest accepted splitting effort; 2^N sub-attacks are scheduled.
inline constexpr std::size_t kMaxSplittingEffort = 30;

struct LockOptions {
	std::filesystem::path input;
	std::filesystem::path output;	// default: "<input stem>_<scheme>.bench" next to input
	std::filesystem::path metadata; // default: output with a .json extension
	std::string scheme = "xor";
	std::size_t key_size = 0;
	std::string key_bits; // explicit k*; random from seed when empty
	std::uint64_t seed = 1;
	bool redact_key = false;
	std::vector<std::string> tap_ports; // point-function comparator taps
	std::string protected_output;	    // output carrying the lock's error
};

/// Locks a netlist, writes the locked .bench plus a JSON metadata sidecar,
/// and prints the key size and where the key material went.
int run_lock(const LockOptions &opt, std::ostream &out, std::ostream &err);

struct AttackOptions {
	std::filesystem::path locked;
	std::filesystem::path oracle;	    // original unlocked netlist, simulated
	std::size_t splitting_effort = 0;   // 0 = plain oracle-guided attack
	std::size_t workers = 0;	    // 0 = hardware concurrency capped at 2^N
	double timeout_s = 0.0;		    // per sub-attack; 0 = unlimited
	std::size_t max_dips = 0;	    // per sub-attack; 0 = unlimited
	ReportFormat format = ReportFormat::Text;
	std::filesystem::path report_path;     // empty = print report to stdout
	std::filesystem::path recombined_path; // empty = do not write the recombined netlist
	bool verify = false;
	bool redact_key = false;
};

/// Runs the (split) attack, emits the report, optionally recombines the
/// sub-keys into an unlocked netlist and checks it against the oracle
/// circuit. Timeouts exit with kExitAttackFailure, a failed equivalence
/// check with kExitVerifyFailure.
int run_attack(const AttackOptions &opt, std::ostream &out, std::ostream &err);

struct BenchOptions {
	std::filesystem::path corpus;	    // directory of .bench files
	std::vector<std::string> circuits; // empty = every .bench in name order
	std::string scheme = "sarlock";
	std::vector<std::size_t> key_sizes{4, 8, 12};
	std::vector<std::size_t> splits{0, 1, 2, 3, 4};
	std::size_t workers = 0;
	double timeout_s = 0.0;
	std::size_t max_dips = 0;
	std::uint64_t seed = 1;
	std::filesystem::path output; // empty = print CSV to stdout
};

/// Sweeps the {circuit, key size, splitting effort} grid and streams one CSV
/// row per cell, flushed as soon as the cell finishes so timeouts still
/// leave partial results behind.
int run_bench(const BenchOptions &opt, std::ostream &out, std::ostream &err);

} // namespace splitlock::cli
