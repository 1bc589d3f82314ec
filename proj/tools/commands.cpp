#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <thread>

#include "splitlock/bench_io.hpp"
#include "splitlock/locking.hpp"
#include "splitlock/transform.hpp"

namespace splitlock::cli {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0)
{
	return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t seed)
{
	std::uint64_t h = 0xcbf29ce484222325ull ^ seed;
	for (const char c : text) {
		h ^= static_cast<unsigned char>(c);
		h *= 0x100000001b3ull;
	}
	return h;
}

std::size_t resolve_workers(std::size_t requested, std::size_t splitting_effort)
{
	if (requested > 0)
		return requested;
	const unsigned hw = std::thread::hardware_concurrency();
	const std::size_t cores = hw > 0 ? hw : 1;
	const std::size_t tasks = std::size_t{1} << std::min<std::size_t>(splitting_effort, 30);
	return std::min(cores, tasks);
}

AttackLimits limits_from(double timeout_s, std::size_t max_dips)
{
	AttackLimits limits;
	limits.timeout = std::chrono::milliseconds(std::llround(timeout_s * 1000.0));
	limits.max_dips = max_dips;
	return limits;
}

bool write_text_file(const std::filesystem::path &path, const std::string &text,
		     std::ostream &err)
{
	std::ofstream out(path);
	if (!out) {
		err << "error: cannot open '" << path.string() << "' for writing\n";
		return false;
	}
	out << text;
	return out.good();
}

bool any_timeout(const MultiKeyResult &result)
{
	return std::any_of(result.entries.begin(), result.entries.end(), [](const auto &e) {
		return e.second.status == AttackStatus::Timeout;
	});
}

} // namespace

int run_lock(const LockOptions &opt, std::ostream &out, std::ostream &err)
{
	const auto scheme = lock_scheme_from(opt.scheme);
	if (!scheme) {
		err << "error: unknown scheme '" << opt.scheme << "'\n";
		return kExitUsage;
	}
	if (opt.key_size == 0) {
		err << "error: --key-size must be at least 1\n";
		return kExitUsage;
	}

	LockSpec spec;
	spec.scheme = *scheme;
	spec.key_size = opt.key_size;
	spec.rng_seed = opt.seed;
	spec.tap_ports = opt.tap_ports;
	spec.protected_output = opt.protected_output;
	if (opt.key_bits.empty()) {
		spec.correct_key = spec.scheme == LockScheme::Lut2Stage
					   ? lut_reference_key(spec.lut, spec.key_size, opt.seed)
					   : random_key(opt.key_size, opt.seed);
	} else {
		if (opt.key_bits.size() != opt.key_size ||
		    opt.key_bits.find_first_not_of("01") != std::string::npos) {
			err << "error: --key must be " << opt.key_size << " bits of 0/1\n";
			return kExitUsage;
		}
		spec.correct_key = KeyAssignment{bits_from_string(opt.key_bits)};
	}

	try {
		const Netlist n = parse_bench_file(opt.input);
		if (n.is_locked()) {
			err << "error: '" << opt.input.string() << "' already has key inputs\n";
			return kExitAttackFailure;
		}

		const AppliedLock applied = apply_lock(n, spec);

		std::filesystem::path output = opt.output;
		if (output.empty()) {
			output = opt.input.parent_path() /
				 (opt.input.stem().string() + "_" + opt.scheme + ".bench");
		}
		std::filesystem::path metadata = opt.metadata;
		if (metadata.empty())
			metadata = std::filesystem::path(output).replace_extension(".json");

		write_bench_file(output, applied.locked);

		LockMetadata meta;
		meta.source = n.name();
		meta.scheme = opt.scheme;
		meta.key_size = opt.key_size;
		meta.rng_seed = opt.seed;
		meta.correct_key = opt.redact_key ? std::string(kRedactedKey)
						  : bits_to_string(spec.correct_key.bits);
		meta.key_ports = applied.locked.key_inputs();
		meta.tap_nets = applied.tap_nets;
		meta.protected_output = applied.protected_output;
		if (!write_text_file(metadata, to_json(meta), err))
			return kExitAttackFailure;

		out << "locked netlist: " << output.string() << "\n";
		out << "metadata: " << metadata.string() << "\n";
		out << "key size: " << applied.locked.key_count() << "\n";
		if (opt.redact_key)
			out << "correct key: redacted (reproducible from --seed " << opt.seed
			    << ")\n";
		else
			out << "correct key: " << bits_to_string(spec.correct_key.bits) << "\n";
		return kExitSuccess;
	} catch (const NetlistError &ex) {
		err << "error: " << ex.what() << "\n";
		return kExitAttackFailure;
	}
}

int run_attack(const AttackOptions &opt, std::ostream &out, std::ostream &err)
{
	if (opt.splitting_effort > kMaxSplittingEffort) {
		err << "error: --split must be at most " << kMaxSplittingEffort << "\n";
		return kExitUsage;
	}

	try {
		const Netlist locked = parse_bench_file(opt.locked);
		if (!locked.is_locked()) {
			err << "error: '" << opt.locked.string() << "' has no key inputs\n";
			return kExitAttackFailure;
		}
		const Netlist original = parse_bench_file(opt.oracle);
		if (original.is_locked()) {
			err << "error: oracle netlist '" << opt.oracle.string()
			    << "' must be unlocked\n";
			return kExitAttackFailure;
		}
		if (original.inputs() != locked.inputs() ||
		    original.outputs() != locked.outputs()) {
			err << "error: oracle and locked netlists have different port "
			       "signatures\n";
			return kExitAttackFailure;
		}

		const std::size_t workers = resolve_workers(opt.workers, opt.splitting_effort);
		const SimulationOracle oracle(original);

		const auto t0 = Clock::now();
		const MultiKeyResult result =
			split_attack(locked, oracle, opt.splitting_effort, workers,
				     limits_from(opt.timeout_s, opt.max_dips));
		const double total_ms = elapsed_ms(t0);

		AttackReport report = build_attack_report(locked, result, oracle.query_count(),
							  workers, total_ms, opt.redact_key);

		const bool timed_out = any_timeout(result);
		std::optional<VerifyResult> verdict;
		if (!timed_out && (opt.verify || !opt.recombined_path.empty())) {
			const Netlist recombined = recombine(locked, result);
			if (!opt.recombined_path.empty()) {
				write_bench_file(opt.recombined_path, recombined);
				out << "recombined netlist: " << opt.recombined_path.string()
				    << "\n";
			}
			if (opt.verify) {
				verdict = verify_equivalence(original, recombined);
				report.verified = verdict->equivalent;
			}
		}

		const std::string text = render(report, opt.format);
		if (opt.report_path.empty()) {
			out << text;
		} else {
			if (!write_text_file(opt.report_path, text, err))
				return kExitAttackFailure;
			out << "report: " << opt.report_path.string() << "\n";
		}

		if (verdict) {
			if (verdict->equivalent) {
				out << "verification: VERIFIED\n";
			} else {
				out << "verification: FAILED";
				if (verdict->counterexample)
					out << " (counterexample "
					    << bits_to_string(verdict->counterexample->bits)
					    << ")";
				out << "\n";
			}
		}

		if (timed_out) {
			err << "error: at least one sub-attack hit its limit\n";
			return kExitAttackFailure;
		}
		if (verdict && !verdict->equivalent)
			return kExitVerifyFailure;
		return kExitSuccess;
	} catch (const NetlistError &ex) {
		err << "error: " << ex.what() << "\n";
		return kExitAttackFailure;
	}
}

int run_bench(const BenchOptions &opt, std::ostream &out, std::ostream &err)
{
	const auto scheme = lock_scheme_from(opt.scheme);
	if (!scheme) {
		err << "error: unknown scheme '" << opt.scheme << "'\n";
		return kExitUsage;
	}
	for (const std::size_t n : opt.splits) {
		if (n > kMaxSplittingEffort) {
			err << "error: splitting effort " << n << " exceeds "
			    << kMaxSplittingEffort << "\n";
			return kExitUsage;
		}
	}
	if (!std::filesystem::is_directory(opt.corpus)) {
		err << "error: corpus directory '" << opt.corpus.string() << "' does not exist\n";
		return kExitUsage;
	}

	std::vector<std::string> names = opt.circuits;
	if (names.empty()) {
		for (const auto &entry : std::filesystem::directory_iterator(opt.corpus)) {
			if (entry.is_regular_file() && entry.path().extension() == ".bench")
				names.push_back(entry.path().stem().string());
		}
		std::sort(names.begin(), names.end());
	}

	std::ofstream file;
	if (!opt.output.empty()) {
		file.open(opt.output);
		if (!file) {
			err << "error: cannot open '" << opt.output.string()
			    << "' for writing\n";
			return kExitUsage;
		}
	}
	std::ostream &csv = opt.output.empty() ? out : file;
	csv << bench_csv_header() << std::flush;

	const AttackLimits limits = limits_from(opt.timeout_s, opt.max_dips);

	for (const std::string &name : names) {
		std::filesystem::path path = opt.corpus / name;
		if (path.extension() != ".bench")
			path += ".bench";

		Netlist host("empty", {"i"}, {}, {"i"}, {});
		try {
			host = parse_bench_file(path);
		} catch (const NetlistError &ex) {
			err << "error: skipping '" << path.string() << "': " << ex.what()
			    << "\n";
			continue;
		}

		for (const std::size_t key_size : opt.key_sizes) {
			BenchRow base;
			base.circuit = host.name();
			base.scheme = opt.scheme;
			base.key_size = key_size;

			LockSpec spec;
			spec.scheme = *scheme;
			spec.key_size = key_size;
			spec.rng_seed = fnv1a(name, opt.seed) + key_size;
			spec.correct_key =
				spec.scheme == LockScheme::Lut2Stage
					? lut_reference_key(spec.lut, key_size, spec.rng_seed)
					: random_key(key_size, spec.rng_seed);

			std::optional<Netlist> locked;
			try {
				locked = apply_lock(host, spec).locked;
			} catch (const NetlistError &ex) {
				err << "error: " << name << " |K|=" << key_size << ": "
				    << ex.what() << "\n";
				for (const std::size_t n : opt.splits) {
					BenchRow row = base;
					row.splitting_effort = n;
					row.status = "error";
					csv << to_csv_row(row) << std::flush;
				}
				continue;
			}
			const SimulationOracle oracle(host);

			std::optional<double> baseline_max;
			for (const std::size_t n : opt.splits) {
				BenchRow row = base;
				row.splitting_effort = n;
				try {
					const MultiKeyResult result = split_attack(
						*locked, oracle, n,
						resolve_workers(opt.workers, n), limits);
					row.entries = result.entries.size();
					bool timed_out = false;
					for (const auto &[cond, sub] : result.entries) {
						row.dip_total += sub.dip_count;
						row.dip_max = std::max(row.dip_max,
								       sub.dip_count);
						timed_out |= sub.status ==
							     AttackStatus::Timeout;
					}
					row.wall_min_ms =
						std::chrono::duration<double, std::milli>(
							result.wall_min)
							.count();
					row.wall_mean_ms =
						std::chrono::duration<double, std::milli>(
							result.wall_mean)
							.count();
					row.wall_max_ms =
						std::chrono::duration<double, std::milli>(
							result.wall_max)
							.count();
					row.status = timed_out ? "timeout" : "ok";
					if (n == 0 && !timed_out && !baseline_max)
						baseline_max = row.wall_max_ms;
					if (baseline_max && *baseline_max > 0.0)
						row.max_over_baseline =
							row.wall_max_ms / *baseline_max;
				} catch (const NetlistError &ex) {
					err << "error: " << name << " |K|=" << key_size
					    << " N=" << n << ": " << ex.what() << "\n";
					row.status = "error";
				}
				csv << to_csv_row(row) << std::flush;
			}
		}
	}
	return kExitSuccess;
}

} // namespace splitlock::cli
