#include "splitlock/transform.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace splitlock {

namespace {

// Where a net ended up after rewriting: a constant, or another net
// (identified by its id in the source netlist's id space). Constant refs
// keep the id of the net they came from so a constant gate can be
// materialized under a stable name when one is unavoidable.
struct Ref {
	bool is_const = false;
	bool cval = false;
	std::uint32_t net = 0;

	static Ref constant(bool v) { return Ref{true, v, 0}; }
	static Ref to(std::uint32_t id) { return Ref{false, false, id}; }
};

struct RewriteResult {
	GateKind kind;
	std::vector<std::uint32_t> fanin;
	bool folded = false;
	Ref fold;
};

RewriteResult fold_const(bool v)
{
	RewriteResult r{GateKind::Const0, {}, true, Ref::constant(v)};
	return r;
}

RewriteResult fold_alias(std::uint32_t id)
{
	RewriteResult r{GateKind::Buf, {}, true, Ref::to(id)};
	return r;
}

std::vector<std::uint32_t> dedupe_keep_order(const std::vector<std::uint32_t> &ids)
{
	std::vector<std::uint32_t> out;
	std::unordered_set<std::uint32_t> seen;
	for (auto id : ids)
		if (seen.insert(id).second)
			out.push_back(id);
	return out;
}

// Simplify one gate whose fanins are already resolved to constants/net ids.
RewriteResult rewrite_gate(GateKind kind, const std::vector<Ref> &fanin)
{
	std::vector<std::uint32_t> nets;
	switch (kind) {
	case GateKind::Const0:
		return fold_const(false);
	case GateKind::Const1:
		return fold_const(true);
	case GateKind::Buf:
		if (fanin[0].is_const)
			return fold_const(fanin[0].cval);
		return fold_alias(fanin[0].net);
	case GateKind::Not:
		if (fanin[0].is_const)
			return fold_const(!fanin[0].cval);
		return RewriteResult{GateKind::Not, {fanin[0].net}, false, {}};
	case GateKind::And:
	case GateKind::Nand: {
		bool neg = kind == GateKind::Nand;
		for (const Ref &r : fanin) {
			if (r.is_const) {
				if (!r.cval)
					return fold_const(neg);
			} else {
				nets.push_back(r.net);
			}
		}
		nets = dedupe_keep_order(nets);
		if (nets.empty())
			return fold_const(!neg);
		if (nets.size() == 1)
			return neg ? RewriteResult{GateKind::Not, {nets[0]}, false, {}} : fold_alias(nets[0]);
		return RewriteResult{kind, std::move(nets), false, {}};
	}
	case GateKind::Or:
	case GateKind::Nor: {
		bool neg = kind == GateKind::Nor;
		for (const Ref &r : fanin) {
			if (r.is_const) {
				if (r.cval)
					return fold_const(!neg);
			} else {
				nets.push_back(r.net);
			}
		}
		nets = dedupe_keep_order(nets);
		if (nets.empty())
			return fold_const(neg);
		if (nets.size() == 1)
			return neg ? RewriteResult{GateKind::Not, {nets[0]}, false, {}} : fold_alias(nets[0]);
		return RewriteResult{kind, std::move(nets), false, {}};
	}
	case GateKind::Xor:
	case GateKind::Xnor: {
		bool parity = kind == GateKind::Xnor;
		// Identical fanins cancel pairwise.
		std::map<std::uint32_t, int> count;
		std::vector<std::uint32_t> order;
		for (const Ref &r : fanin) {
			if (r.is_const) {
				parity ^= r.cval;
			} else {
				if (count[r.net]++ == 0)
					order.push_back(r.net);
			}
		}
		for (auto id : order)
			if (count[id] % 2 != 0)
				nets.push_back(id);
		if (nets.empty())
			return fold_const(parity);
		if (nets.size() == 1)
			return parity ? RewriteResult{GateKind::Not, {nets[0]}, false, {}} : fold_alias(nets[0]);
		return RewriteResult{parity ? GateKind::Xnor : GateKind::Xor, std::move(nets), false, {}};
	}
	case GateKind::Mux: {
		const Ref &sel = fanin[0], &in0 = fanin[1], &in1 = fanin[2];
		if (sel.is_const)
			return (sel.cval ? in1 : in0).is_const ? fold_const((sel.cval ? in1 : in0).cval)
							       : fold_alias((sel.cval ? in1 : in0).net);
		if (in0.is_const && in1.is_const) {
			if (in0.cval == in1.cval)
				return fold_const(in0.cval);
			if (!in0.cval)
				return fold_alias(sel.net); // MUX(s,0,1) = s
			return RewriteResult{GateKind::Not, {sel.net}, false, {}};
		}
		if (!in0.is_const && !in1.is_const && in0.net == in1.net)
			return fold_alias(in0.net);
		if (in0.is_const && !in0.cval) // s ? in1 : 0
			return RewriteResult{GateKind::And, {sel.net, in1.net}, false, {}};
		if (in1.is_const && in1.cval) // s ? 1 : in0
			return RewriteResult{GateKind::Or, {sel.net, in0.net}, false, {}};
		// Remaining mixed cases (MUX(s,1,b), MUX(s,a,0)) would need an
		// extra inverter; keep them as muxes over a synthesized const net
		// (the caller materializes it, marker 0 here).
		std::vector<std::uint32_t> f;
		f.push_back(sel.net);
		f.push_back(in0.is_const ? 0 : in0.net);
		f.push_back(in1.is_const ? 0 : in1.net);
		return RewriteResult{GateKind::Mux, std::move(f), false, {}};
	}
	}
	assert(false);
	return fold_const(false);
}

struct HashKey {
	GateKind kind;
	std::vector<std::uint32_t> fanin;

	bool operator==(const HashKey &) const = default;
};

struct HashKeyHasher {
	std::size_t operator()(const HashKey &k) const
	{
		std::size_t h = static_cast<std::size_t>(k.kind) * 0x9e3779b97f4a7c15ull;
		for (auto id : k.fanin)
			h = (h ^ id) * 0x100000001b3ull;
		return h;
	}
};

bool kind_commutative(GateKind kind)
{
	switch (kind) {
	case GateKind::And:
	case GateKind::Nand:
	case GateKind::Or:
	case GateKind::Nor:
	case GateKind::Xor:
	case GateKind::Xnor:
		return true;
	default:
		return false;
	}
}

// Simplification core shared by cofactor/structural_simplify/apply_key:
// rewrites n with the given ports bound to constants and the remaining port
// lists as supplied.
Netlist simplify_impl(const Netlist &n, std::string new_name, std::vector<std::string> new_inputs,
		      std::vector<std::string> new_keys, const std::unordered_map<std::string, bool> &bound)
{
	std::vector<Ref> resolve(n.net_count());
	std::vector<bool> resolved(n.net_count(), false);

	auto bind_const = [&](std::size_t id, bool v) {
		resolve[id] = Ref::constant(v);
		resolve[id].net = static_cast<std::uint32_t>(id);
		resolved[id] = true;
	};

	std::size_t nports = n.input_count() + n.key_count();
	for (std::size_t id = 0; id < nports; ++id) {
		auto it = bound.find(n.net_name(id));
		if (it != bound.end()) {
			bind_const(id, it->second);
		} else {
			resolve[id] = Ref::to(static_cast<std::uint32_t>(id));
			resolved[id] = true;
		}
	}

	// Gates are resolved in topo order but emitted in declaration order so
	// repeated simplification leaves the gate list untouched. slots[gi]
	// holds what gate gi turned into, plus any constant gate synthesized
	// for it.
	std::vector<std::vector<Gate>> slots(n.gate_count());
	std::vector<Gate> *slot = nullptr;

	// Constant gate per value, materialized only when a MUX corner case
	// needs one; named after the first net that supplied the constant so
	// repeated simplification is stable.
	std::optional<std::uint32_t> const_net[2];
	std::unordered_map<HashKey, std::uint32_t, HashKeyHasher> structural;
	auto materialize_const = [&](const Ref &r) -> std::uint32_t {
		bool v = r.cval;
		if (const_net[v])
			return *const_net[v];
		slot->push_back(Gate{n.net_name(r.net), v ? GateKind::Const1 : GateKind::Const0, {}});
		const_net[v] = r.net;
		return r.net;
	};
	auto id_to_name = [&](std::uint32_t id) -> const std::string & { return n.net_name(id); };

	for (std::uint32_t gi : n.topo_order()) {
		const Gate &g = n.gates()[gi];
		auto out_id = *n.net_id(g.output);
		slot = &slots[gi];

		std::vector<Ref> fanin;
		fanin.reserve(g.fanin.size());
		for (const auto &net : g.fanin) {
			auto fid = *n.net_id(net);
			assert(resolved[fid]);
			fanin.push_back(resolve[fid]);
		}

		RewriteResult rw = rewrite_gate(g.kind, fanin);
		if (rw.folded) {
			if (rw.fold.is_const) {
				bind_const(out_id, rw.fold.cval);
			} else {
				resolve[out_id] = rw.fold;
				resolved[out_id] = true;
			}
			continue;
		}

		// MUX corner cases may reference a constant net (id 0 marker).
		if (rw.kind == GateKind::Mux) {
			const Ref &in0 = fanin[1], &in1 = fanin[2];
			if (in0.is_const)
				rw.fanin[1] = materialize_const(in0);
			if (in1.is_const)
				rw.fanin[2] = materialize_const(in1);
		}

		HashKey key{rw.kind, rw.fanin};
		if (kind_commutative(rw.kind))
			std::sort(key.fanin.begin(), key.fanin.end());
		if (auto it = structural.find(key); it != structural.end()) {
			resolve[out_id] = Ref::to(it->second);
			resolved[out_id] = true;
			continue;
		}

		Gate emitted;
		emitted.output = g.output;
		emitted.kind = rw.kind;
		emitted.fanin.reserve(rw.fanin.size());
		for (auto fid : rw.fanin)
			emitted.fanin.push_back(id_to_name(fid));
		slot->push_back(std::move(emitted));
		structural.emplace(std::move(key), static_cast<std::uint32_t>(out_id));
		resolve[out_id] = Ref::to(static_cast<std::uint32_t>(out_id));
		resolved[out_id] = true;
	}

	std::vector<Gate> out_gates;
	out_gates.reserve(n.gate_count());
	for (std::size_t gi = 0; gi < n.gate_count(); ++gi)
		for (auto &g : slots[gi])
			out_gates.push_back(std::move(g));

	// Outputs must keep their names; synthesize passthroughs where the
	// original driver folded away.
	std::unordered_set<std::string> emitted_nets;
	for (const auto &g : out_gates)
		emitted_nets.insert(g.output);
	auto surviving_port = [&](std::uint32_t id) {
		return id < nports && !bound.count(n.net_name(id));
	};
	for (const auto &o : n.outputs()) {
		auto oid = *n.net_id(o);
		Ref r = resolve[oid];
		if (!r.is_const && r.net == oid && (surviving_port(oid) || emitted_nets.count(o)))
			continue; // still its own driver
		if (r.is_const && emitted_nets.count(o))
			continue; // already driven by a materialized constant
		if (r.is_const) {
			out_gates.push_back(Gate{o, r.cval ? GateKind::Const1 : GateKind::Const0, {}});
		} else {
			out_gates.push_back(Gate{o, GateKind::Buf, {id_to_name(r.net)}});
		}
		emitted_nets.insert(o);
	}

	// Drop gates with no path to any output.
	std::unordered_map<std::string_view, std::size_t> producer;
	for (std::size_t i = 0; i < out_gates.size(); ++i)
		producer[out_gates[i].output] = i;
	std::vector<bool> live(out_gates.size(), false);
	std::vector<std::size_t> stack;
	for (const auto &o : n.outputs()) {
		auto it = producer.find(o);
		if (it != producer.end() && !live[it->second]) {
			live[it->second] = true;
			stack.push_back(it->second);
		}
	}
	while (!stack.empty()) {
		std::size_t gi = stack.back();
		stack.pop_back();
		for (const auto &net : out_gates[gi].fanin) {
			auto it = producer.find(net);
			if (it != producer.end() && !live[it->second]) {
				live[it->second] = true;
				stack.push_back(it->second);
			}
		}
	}
	std::vector<Gate> final_gates;
	final_gates.reserve(out_gates.size());
	for (std::size_t i = 0; i < out_gates.size(); ++i)
		if (live[i])
			final_gates.push_back(std::move(out_gates[i]));

	return Netlist(std::move(new_name), std::move(new_inputs), std::move(new_keys), n.outputs(), std::move(final_gates));
}

} // namespace

Netlist cofactor(const Netlist &n, const SplitCondition &cond)
{
	if (cond.ports.size() != cond.value.size())
		throw NetlistError("split condition has " + std::to_string(cond.ports.size()) + " ports but " +
				   std::to_string(cond.value.size()) + " value bits");
	std::unordered_map<std::string, bool> bound;
	for (std::size_t i = 0; i < cond.ports.size(); ++i) {
		const auto &port = cond.ports[i];
		if (n.is_key_input(port))
			throw NetlistError("cannot cofactor on key port '" + port + "'");
		if (!n.is_input(port))
			throw NetlistError("split port '" + port + "' is not an input of '" + n.name() + "'");
		char c = cond.value[i];
		if (c != '0' && c != '1')
			throw NetlistError("bad bit '" + std::string(1, c) + "' in split condition value");
		if (!bound.emplace(port, c == '1').second)
			throw NetlistError("split port '" + port + "' listed twice");
	}

	std::vector<std::string> remaining;
	remaining.reserve(n.input_count() - cond.ports.size());
	for (const auto &p : n.inputs())
		if (!bound.count(p))
			remaining.push_back(p);

	return simplify_impl(n, n.name(), std::move(remaining), n.key_inputs(), bound);
}

Netlist structural_simplify(const Netlist &n)
{
	return simplify_impl(n, n.name(), n.inputs(), n.key_inputs(), {});
}

Netlist apply_key(const Netlist &n, const KeyAssignment &key)
{
	if (key.bits.size() != n.key_count())
		throw NetlistError("key width " + std::to_string(key.bits.size()) + " does not match |K| = " +
				   std::to_string(n.key_count()));
	std::unordered_map<std::string, bool> bound;
	for (std::size_t i = 0; i < n.key_count(); ++i)
		bound.emplace(n.key_inputs()[i], key.bits[i]);
	return simplify_impl(n, n.name(), n.inputs(), {}, bound);
}

} // namespace splitlock
