#include "splitlock/analysis.hpp"

#include <algorithm>
#include <numeric>

namespace splitlock {

namespace {

// consumers[net_id] = indices of gates reading that net.
std::vector<std::vector<std::uint32_t>> consumer_map(const Netlist &n)
{
	std::vector<std::vector<std::uint32_t>> consumers(n.net_count());
	const auto &gates = n.gates();
	for (std::uint32_t gi = 0; gi < gates.size(); ++gi) {
		for (const auto &net : gates[gi].fanin)
			consumers[*n.net_id(net)].push_back(gi);
	}
	return consumers;
}

// Gates in the transitive fan-out of any of the seed nets.
std::vector<bool> fanout_gates(const Netlist &n, const std::vector<std::vector<std::uint32_t>> &consumers,
			       const std::vector<std::size_t> &seed_nets)
{
	std::size_t nports = n.input_count() + n.key_count();
	std::vector<bool> in_cone(n.gate_count(), false);
	std::vector<std::uint32_t> stack;
	auto visit = [&](std::uint32_t gi) {
		if (!in_cone[gi]) {
			in_cone[gi] = true;
			stack.push_back(gi);
		}
	};
	for (auto nid : seed_nets)
		for (auto gi : consumers[nid])
			visit(gi);
	while (!stack.empty()) {
		std::uint32_t gi = stack.back();
		stack.pop_back();
		// Gate gi drives net id nports + gi.
		for (auto consumer : consumers[nports + gi])
			visit(consumer);
	}
	return in_cone;
}

std::vector<std::size_t> counts_impl(const Netlist &n, const std::vector<std::size_t> &ports)
{
	auto consumers = consumer_map(n);

	std::vector<std::size_t> key_nets(n.key_count());
	std::iota(key_nets.begin(), key_nets.end(), n.input_count());
	auto key_controlled = fanout_gates(n, consumers, key_nets);

	std::vector<std::size_t> counts;
	counts.reserve(ports.size());
	for (auto port_net : ports) {
		auto cone = fanout_gates(n, consumers, {port_net});
		std::size_t count = 0;
		for (std::size_t gi = 0; gi < cone.size(); ++gi)
			if (cone[gi] && key_controlled[gi])
				++count;
		counts.push_back(count);
	}
	return counts;
}

} // namespace

std::size_t key_controlled_fanout_count(const Netlist &n, std::string_view port)
{
	auto idx = n.input_index(port);
	if (!idx)
		throw NetlistError("'" + std::string(port) + "' is not an input port of '" + n.name() + "'");
	return counts_impl(n, {*idx})[0];
}

std::vector<std::size_t> key_controlled_fanout_counts(const Netlist &n)
{
	std::vector<std::size_t> ports(n.input_count());
	std::iota(ports.begin(), ports.end(), 0);
	return counts_impl(n, ports);
}

std::vector<std::string> select_split_inputs(const Netlist &n, std::size_t count)
{
	if (count > n.input_count())
		throw NetlistError("cannot select " + std::to_string(count) + " split inputs from " +
				   std::to_string(n.input_count()) + " input ports");
	auto counts = key_controlled_fanout_counts(n);

	std::vector<std::size_t> order(n.input_count());
	std::iota(order.begin(), order.end(), 0);
	std::stable_sort(order.begin(), order.end(),
			 [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });

	std::vector<std::string> selected;
	selected.reserve(count);
	for (std::size_t i = 0; i < count; ++i)
		selected.push_back(n.inputs()[order[i]]);
	return selected;
}

} // namespace splitlock
