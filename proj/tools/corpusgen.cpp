// Writes the bundled benchmark corpus: the classic 6-gate c17 plus seeded
// stand-ins for the larger circuits, generated to match the well-known
// input/output/gate-count profiles. Regenerating with the same seed is
// byte-identical, so the checked-in files are reproducible.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "splitlock/bench_io.hpp"
#include "splitlock/netlist.hpp"

using namespace splitlock;

namespace {

struct Profile {
	const char *name;
	std::size_t inputs;
	std::size_t outputs;
	std::size_t gates;
	std::uint64_t seed;
};

constexpr Profile kProfiles[] = {
    {"c880", 60, 26, 383, 880},	     {"c1355", 41, 32, 546, 1355},
    {"c1908", 33, 25, 880, 1908},    {"c2670", 233, 140, 1193, 2670},
    {"c3540", 50, 22, 1669, 3540},   {"c5315", 178, 123, 2307, 5315},
    {"c6288", 32, 32, 2406, 6288},   {"c7552", 207, 108, 3512, 7552},
};

const char *kC17 = "INPUT(1)\nINPUT(2)\nINPUT(3)\nINPUT(6)\nINPUT(7)\n"
		   "OUTPUT(22)\nOUTPUT(23)\n\n"
		   "10 = NAND(1, 3)\n11 = NAND(3, 6)\n16 = NAND(2, 11)\n"
		   "19 = NAND(11, 7)\n22 = NAND(10, 16)\n23 = NAND(16, 19)\n";

std::size_t pick(std::mt19937_64 &rng, std::size_t bound)
{
	return static_cast<std::size_t>(rng() % bound);
}

Netlist generate(const Profile &p)
{
	std::mt19937_64 rng(p.seed);

	std::vector<std::string> inputs;
	std::vector<std::string> names; // net name per id, inputs first
	for (std::size_t i = 0; i < p.inputs; i++) {
		inputs.push_back(std::to_string(i + 1));
		names.push_back(inputs.back());
	}

	// Frontier: nets not yet consumed by any gate. Each gate drains
	// `consume` of them, steered so exactly p.outputs nets remain once
	// all gates are placed; those become the output ports.
	std::vector<std::size_t> frontier(p.inputs);
	for (std::size_t i = 0; i < p.inputs; i++)
		frontier[i] = i;
	std::size_t next_input = 0; // unconsumed inputs are drained first

	std::size_t budget = p.inputs + p.gates - p.outputs; // total to consume
	std::vector<Gate> gates;
	gates.reserve(p.gates);

	for (std::size_t g = 0; g < p.gates; g++) {
		const std::size_t remaining = p.gates - g;
		std::size_t lo = budget > 4 * (remaining - 1) ? budget - 4 * (remaining - 1)
							      : std::size_t{1};
		std::size_t hi = std::min<std::size_t>(4, budget - (remaining - 1));
		hi = std::min(hi, frontier.size());
		lo = std::min(lo, hi);
		std::size_t consume = lo;
		if (hi > lo && pick(rng, 4) == 0)
			consume++;

		std::vector<std::string> fanin;
		for (std::size_t c = 0; c < consume; c++) {
			std::size_t idx;
			if (next_input < p.inputs) {
				// Guarantee every input port is read.
				idx = 0;
				while (frontier[idx] != next_input)
					idx++;
				next_input++;
			} else {
				idx = pick(rng, frontier.size());
			}
			fanin.push_back(names[frontier[idx]]);
			frontier[idx] = frontier.back();
			frontier.pop_back();
		}
		budget -= consume;

		std::size_t arity = consume;
		if (arity < 2 && pick(rng, 10) < 9)
			arity = 2;
		if (arity >= 2 && arity < 4 && pick(rng, 5) == 0)
			arity++;
		while (fanin.size() < arity) {
			// Bias toward recent nets for local structure.
			const std::size_t total = names.size();
			const std::size_t window = std::min<std::size_t>(total, 40);
			const std::size_t id = pick(rng, 2) ? total - 1 - pick(rng, window)
							    : pick(rng, total);
			bool dup = false;
			for (const auto &f : fanin)
				dup = dup || f == names[id];
			if (!dup)
				fanin.push_back(names[id]);
		}

		GateKind kind;
		if (fanin.size() == 1) {
			kind = pick(rng, 3) ? GateKind::Not : GateKind::Buf;
		} else if (fanin.size() == 2) {
			constexpr GateKind two[] = {GateKind::Nand, GateKind::Nand, GateKind::Nand,
						    GateKind::Nor,  GateKind::Nor,  GateKind::And,
						    GateKind::Or,   GateKind::Xor};
			kind = two[pick(rng, 8)];
		} else {
			constexpr GateKind wide[] = {GateKind::Nand, GateKind::Nor, GateKind::And,
						     GateKind::Or};
			kind = wide[pick(rng, 4)];
		}

		const std::size_t out_id = names.size();
		names.push_back(std::to_string(out_id + 1));
		gates.push_back({names.back(), kind, std::move(fanin)});
		frontier.push_back(out_id);
	}

	if (frontier.size() != p.outputs)
		throw NetlistError("generator drift for " + std::string(p.name));
	std::vector<std::size_t> out_ids = frontier;
	std::sort(out_ids.begin(), out_ids.end());
	std::vector<std::string> outputs;
	for (const std::size_t id : out_ids)
		outputs.push_back(names[id]);

	return Netlist(p.name, std::move(inputs), {}, std::move(outputs), std::move(gates));
}

} // namespace

int main(int argc, char **argv)
{
	if (argc != 2) {
		std::cerr << "usage: corpusgen <output-directory>\n";
		return 1;
	}
	const std::filesystem::path dir(argv[1]);
	std::filesystem::create_directories(dir);

	write_bench_file(dir / "c17.bench", parse_bench(kC17, "c17"));
	std::cout << "c17: 5 in, 2 out, 6 gates\n";
	for (const Profile &p : kProfiles) {
		const Netlist n = generate(p);
		write_bench_file(dir / (std::string(p.name) + ".bench"), n);
		std::cout << p.name << ": " << n.input_count() << " in, " << n.output_count()
			  << " out, " << n.gate_count() << " gates\n";
	}
	return 0;
}
