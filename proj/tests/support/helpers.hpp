#pragma once

// Test-side reference implementations, kept independent of the library's
// compiled evaluation path so the two can check each other.

#include "splitlock/netlist.hpp"

#include <map>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

// Reference evaluator: recursive name-based evaluation over the gate list.
class RefEval {
      public:
	explicit RefEval(const splitlock::Netlist &n) : n_(n)
	{
		for (const auto &g : n.gates())
			by_name_[g.output] = &g;
	}

	std::vector<bool> outputs(const std::vector<bool> &in, const std::vector<bool> &key = {}) const
	{
		std::map<std::string, bool> env;
		for (std::size_t i = 0; i < n_.inputs().size(); ++i)
			env[n_.inputs()[i]] = in[i];
		for (std::size_t i = 0; i < n_.key_inputs().size(); ++i)
			env[n_.key_inputs()[i]] = key[i];
		std::vector<bool> out;
		for (const auto &o : n_.outputs())
			out.push_back(value(o, env));
		return out;
	}

      private:
	bool value(const std::string &net, std::map<std::string, bool> &env) const
	{
		if (auto it = env.find(net); it != env.end())
			return it->second;
		const splitlock::Gate &g = *by_name_.at(net);
		std::vector<bool> f;
		for (const auto &src : g.fanin)
			f.push_back(value(src, env));
		bool v = false;
		using splitlock::GateKind;
		switch (g.kind) {
		case GateKind::And:
			v = true;
			for (bool b : f)
				v = v && b;
			break;
		case GateKind::Nand:
			v = true;
			for (bool b : f)
				v = v && b;
			v = !v;
			break;
		case GateKind::Or:
			for (bool b : f)
				v = v || b;
			break;
		case GateKind::Nor:
			for (bool b : f)
				v = v || b;
			v = !v;
			break;
		case GateKind::Xor:
			for (bool b : f)
				v = v != b;
			break;
		case GateKind::Xnor:
			for (bool b : f)
				v = v != b;
			v = !v;
			break;
		case GateKind::Not:
			v = !f[0];
			break;
		case GateKind::Buf:
			v = f[0];
			break;
		case GateKind::Const0:
			v = false;
			break;
		case GateKind::Const1:
			v = true;
			break;
		case GateKind::Mux:
			v = f[0] ? f[2] : f[1];
			break;
		}
		env[net] = v;
		return v;
	}

	const splitlock::Netlist &n_;
	std::map<std::string, const splitlock::Gate *> by_name_;
};

inline std::vector<bool> unpack_bits(std::uint64_t v, std::size_t width)
{
	std::vector<bool> bits(width);
	for (std::size_t i = 0; i < width; ++i)
		bits[i] = (v >> (width - 1 - i)) & 1;
	return bits;
}

// Exhaustive functional equivalence. Requires identical port signatures and
// |I| + |K| small enough to enumerate.
inline bool exhaustive_equivalent(const splitlock::Netlist &a, const splitlock::Netlist &b)
{
	if (a.inputs() != b.inputs() || a.key_inputs() != b.key_inputs() || a.outputs() != b.outputs())
		return false;
	std::size_t bits = a.input_count() + a.key_count();
	for (std::uint64_t v = 0; v < (1ull << bits); ++v) {
		auto all = unpack_bits(v, bits);
		splitlock::InputPattern in{{all.begin(), all.begin() + static_cast<long>(a.input_count())}};
		splitlock::KeyAssignment key{{all.begin() + static_cast<long>(a.input_count()), all.end()}};
		if (a.simulate(in, key) != b.simulate(in, key))
			return false;
	}
	return true;
}

// Deterministic random combinational netlist. Inputs in0.., optional key
// ports keyinput0.., gates g0.., outputs drawn from the last gates.
inline splitlock::Netlist random_netlist(std::uint32_t seed, std::size_t ninputs, std::size_t nkeys, std::size_t ngates,
					 std::size_t noutputs)
{
	using namespace splitlock;
	std::mt19937 rng(seed);
	std::vector<std::string> inputs, keys, nets;
	for (std::size_t i = 0; i < ninputs; ++i) {
		inputs.push_back("in" + std::to_string(i));
		nets.push_back(inputs.back());
	}
	for (std::size_t i = 0; i < nkeys; ++i) {
		keys.push_back("keyinput" + std::to_string(i));
		nets.push_back(keys.back());
	}

	const GateKind kinds[] = {GateKind::And,  GateKind::Nand, GateKind::Or,  GateKind::Nor, GateKind::Xor,
				  GateKind::Xnor, GateKind::Not,  GateKind::Buf, GateKind::Mux};
	std::vector<Gate> gates;
	for (std::size_t i = 0; i < ngates; ++i) {
		Gate g;
		g.output = "g" + std::to_string(i);
		g.kind = kinds[rng() % std::size(kinds)];
		std::size_t arity;
		switch (g.kind) {
		case GateKind::Not:
		case GateKind::Buf:
			arity = 1;
			break;
		case GateKind::Mux:
			arity = 3;
			break;
		default:
			arity = 2 + rng() % 2;
			break;
		}
		for (std::size_t a = 0; a < arity; ++a)
			g.fanin.push_back(nets[rng() % nets.size()]);
		nets.push_back(g.output);
		gates.push_back(std::move(g));
	}

	std::vector<std::string> outputs;
	for (std::size_t i = 0; i < noutputs && i < ngates; ++i)
		outputs.push_back(gates[ngates - 1 - i].output);

	return Netlist("rand" + std::to_string(seed), std::move(inputs), std::move(keys), std::move(outputs),
		       std::move(gates));
}

} // namespace testsupport
