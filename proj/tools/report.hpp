#pragma once

#include "splitlock/attack.hpp"
#include "splitlock/netlist.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace splitlock::cli {

inline constexpr std::string_view kAttackReportSchema = "splitlock-attack-report/1";
inline constexpr std::string_view kBenchSchema = "splitlock-bench/1";
inline constexpr std::string_view kLockMetadataSchema = "splitlock-lock-metadata/1";
inline constexpr std::string_view kRedactedKey = "<redacted>";

enum class ReportFormat : std::uint8_t { Json, Csv, Text };

std::optional<ReportFormat> report_format_from(std::string_view token);
std::string_view to_string(ReportFormat format);

/// One sub-attack of a (possibly split) run, flattened for serialization.
struct AttackEntryReport {
	std::string condition; // split-port bits, leftmost = split_ports[0]; "" when N = 0
	std::string status;    // attack status token
	std::size_t dip_count = 0;
	double wall_ms = 0.0;
	std::string key; // recovered sub-key bits in key-port order, or "<redacted>"

	bool operator==(const AttackEntryReport &) const = default;
};

/// Everything a finished attack run reports. Times are wall-clock
/// milliseconds; dip counts and keys are reproducible for fixed seeds while
/// times naturally vary between runs.
struct AttackReport {
	std::string circuit;
	std::size_t key_size = 0;
	std::size_t splitting_effort = 0;
	std::size_t workers = 0;
	std::vector<std::string> split_ports;
	std::uint64_t oracle_queries = 0;
	std::vector<AttackEntryReport> entries;
	double wall_min_ms = 0.0;
	double wall_mean_ms = 0.0;
	double wall_max_ms = 0.0;
	double total_wall_ms = 0.0;
	std::optional<bool> verified; // set only when verification ran

	bool operator==(const AttackReport &) const = default;
};

AttackReport build_attack_report(const Netlist &locked, const MultiKeyResult &result,
				 std::uint64_t oracle_queries, std::size_t workers,
				 double total_wall_ms, bool redact_key);

std::string to_json(const AttackReport &r);
std::string to_csv(const AttackReport &r);
std::string to_text(const AttackReport &r);
std::string render(const AttackReport &r, ReportFormat format);

/// Inverse of to_json. Throws NetlistError on malformed input or a schema
/// tag this build does not understand.
AttackReport attack_report_from_json(const std::string &text);

/// One grid cell of a benchmark sweep: a (circuit, scheme, key size,
/// splitting effort) combination with its dip counts and wall-time spread.
struct BenchRow {
	std::string circuit;
	std::string scheme;
	std::size_t key_size = 0;
	std::size_t splitting_effort = 0;
	std::size_t entries = 0;   // sub-attacks run (2^N)
	std::size_t dip_max = 0;   // largest #DIP over the sub-attacks
	std::size_t dip_total = 0; // summed #DIP over the sub-attacks
	double wall_min_ms = 0.0;
	double wall_mean_ms = 0.0;
	double wall_max_ms = 0.0;
	// Slowest sub-attack relative to the same cell at splitting effort 0;
	// empty when the sweep has no effort-0 run to compare against.
	std::optional<double> max_over_baseline;
	std::string status; // "ok", "timeout" or "error"

	bool operator==(const BenchRow &) const = default;
};

/// Schema comment line plus the CSV column header.
std::string bench_csv_header();
std::string to_csv_row(const BenchRow &row);

/// Parses text produced by bench_csv_header() + to_csv_row() lines. Throws
/// NetlistError on malformed input or an unknown schema tag.
std::vector<BenchRow> bench_rows_from_csv(const std::string &text);

/// Sidecar description of a locking run, written next to the locked netlist.
struct LockMetadata {
	std::string source; // original circuit name
	std::string scheme;
	std::size_t key_size = 0;
	std::uint64_t rng_seed = 0;
	std::string correct_key; // k* bits in key-port order, or "<redacted>"
	std::vector<std::string> key_ports;
	std::vector<std::string> tap_nets;
	std::string protected_output; // empty when the scheme has none

	bool operator==(const LockMetadata &) const = default;
};

std::string to_json(const LockMetadata &m);
LockMetadata lock_metadata_from_json(const std::string &text);

} // namespace splitlock::cli
