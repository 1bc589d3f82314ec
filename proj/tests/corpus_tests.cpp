#include "doctest.h"

#include "splitlock/analysis.hpp"
#include "splitlock/bench_io.hpp"
#include "splitlock/locking.hpp"
#include "splitlock/transform.hpp"

#include <filesystem>
#include <string>
#include <vector>

using namespace splitlock;

namespace {

struct Profile {
	const char *name;
	std::size_t inputs;
	std::size_t outputs;
	std::size_t gates;
};

// Frozen shape of the bundled benchmark corpus. Any regeneration that
// changes these counts is a deliberate corpus change and must update this
// table.
constexpr Profile kCorpus[] = {
	{"c17", 5, 2, 6},      {"c880", 60, 26, 383},	 {"c1355", 41, 32, 546},
	{"c1908", 33, 25, 880}, {"c2670", 233, 140, 1193}, {"c3540", 50, 22, 1669},
	{"c5315", 178, 123, 2307}, {"c6288", 32, 32, 2406}, {"c7552", 207, 108, 3512},
};

std::filesystem::path corpus_path(const char *name)
{
	return std::filesystem::path(SPLITLOCK_DATA_DIR) / "iscas85" / (std::string(name) + ".bench");
}

} // namespace

TEST_CASE("bundled corpus parses to its recorded profiles")
{
	for (const Profile &p : kCorpus) {
		CAPTURE(p.name);
		const Netlist n = parse_bench_file(corpus_path(p.name));
		CHECK(n.name() == p.name);
		CHECK(n.input_count() == p.inputs);
		CHECK(n.output_count() == p.outputs);
		CHECK(n.gate_count() == p.gates);
		CHECK(n.key_count() == 0);

		// Every circuit must be simulatable at its full width.
		const InputPattern zeros{std::vector<bool>(p.inputs, false)};
		CHECK(n.simulate(zeros, KeyAssignment{{}}).size() == p.outputs);
	}
}

TEST_CASE("bundled corpus survives a write/parse round trip byte for byte")
{
	for (const Profile &p : kCorpus) {
		CAPTURE(p.name);
		const Netlist n = parse_bench_file(corpus_path(p.name));
		const std::string text = write_bench(n);
		const Netlist back = parse_bench(text, n.name());
		CHECK(write_bench(back) == text);
	}
}

TEST_CASE("bundled corpus is mostly live logic")
{
	// A benchmark whose gates mostly fold away would make attack and
	// locking measurements meaningless; require at least 90% of gates to
	// survive constant folding, sharing and dead-gate removal.
	for (const Profile &p : kCorpus) {
		CAPTURE(p.name);
		const Netlist n = parse_bench_file(corpus_path(p.name));
		const Netlist s = structural_simplify(n);
		CHECK(s.gate_count() * 10 >= n.gate_count() * 9);
	}
}

TEST_CASE("c17 is the classic six-NAND netlist")
{
	const Netlist n = parse_bench_file(corpus_path("c17"));
	REQUIRE(n.gate_count() == 6);
	for (const Gate &g : n.gates()) {
		CHECK(g.kind == GateKind::Nand);
		CHECK(g.fanin.size() == 2);
	}
	// Spot-check the truth table at the two input corners, evaluated by
	// hand on the NAND tree: all-zero inputs give (0,0); all-one inputs
	// give (1,0) because the second output NANDs two high internal nets.
	const OutputPattern zero = n.simulate(InputPattern{{false, false, false, false, false}},
					      KeyAssignment{{}});
	const OutputPattern one = n.simulate(InputPattern{{true, true, true, true, true}},
					     KeyAssignment{{}});
	CHECK(zero == OutputPattern{false, false});
	CHECK(one == OutputPattern{true, false});
}

TEST_CASE("split selection on a locked corpus circuit prefers key-coupled inputs")
{
	const Netlist host = parse_bench_file(corpus_path("c7552"));
	LockSpec spec;
	spec.scheme = LockScheme::Sarlock;
	spec.key_size = 8;
	spec.correct_key = random_key(8, 21);
	spec.rng_seed = 3;
	const Netlist locked = lock_sarlock(host, spec);

	const std::vector<std::string> picked = select_split_inputs(locked, 4);
	REQUIRE(picked.size() == 4);
	for (const std::string &port : picked) {
		CAPTURE(port);
		CHECK(locked.is_input(port));
		CHECK(key_controlled_fanout_count(locked, port) >= 1);
	}
	// Selection must be reproducible.
	CHECK(select_split_inputs(locked, 4) == picked);
}
