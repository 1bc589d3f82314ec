#include "splitlock/locking.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <unordered_set>

namespace splitlock {

namespace {

std::string fresh_name(std::string base, std::unordered_set<std::string> &used)
{
	std::string name = base;
	int suffix = 0;
	while (!used.insert(name).second)
		name = base + "_" + std::to_string(suffix++);
	return name;
}

std::unordered_set<std::string> all_net_names(const Netlist &n)
{
	std::unordered_set<std::string> used;
	for (std::size_t id = 0; id < n.net_count(); ++id)
		used.insert(n.net_name(id));
	return used;
}

// Deterministic Fisher-Yates (std::shuffle's draw sequence is
// implementation-defined, this is not).
template <typename T> void shuffle_values(std::vector<T> &v, std::mt19937_64 &rng)
{
	for (std::size_t i = v.size(); i > 1; --i)
		std::swap(v[i - 1], v[rng() % i]);
}

std::vector<std::string> make_key_ports(const Netlist &n, std::size_t key_size)
{
	std::vector<std::string> ports;
	ports.reserve(key_size);
	for (std::size_t i = 0; i < key_size; ++i) {
		std::string name = "keyinput" + std::to_string(i);
		if (n.has_net(name))
			throw NetlistError("net name '" + name + "' is already in use; cannot add key ports");
		ports.push_back(std::move(name));
	}
	return ports;
}

void validate_spec(const Netlist &n, const LockSpec &spec)
{
	if (n.is_locked())
		throw NetlistError("'" + n.name() + "' is already locked");
	if (spec.key_size == 0)
		throw NetlistError("key_size must be positive");
	if (spec.correct_key.bits.size() != spec.key_size)
		throw NetlistError("correct_key has " + std::to_string(spec.correct_key.bits.size()) + " bits but key_size is " +
				   std::to_string(spec.key_size));
}

// Rename only the driving gate of `net`; existing readers keep referring to
// `net`, which the caller redefines (in-line insertion).
std::string displace_driver(std::vector<Gate> &gates, const std::string &net, std::unordered_set<std::string> &used)
{
	std::string fresh = fresh_name(net + "$pre", used);
	for (auto &g : gates) {
		if (g.output == net) {
			g.output = fresh;
			return fresh;
		}
	}
	throw NetlistError("net '" + net + "' has no driving gate");
}

// Rename the driving gate of `net` and redirect every reader to the renamed
// net; only the caller's new definition of `net` sees the change (tap-off
// insertion, used for protected outputs).
std::string displace_net(std::vector<Gate> &gates, const std::string &net, std::unordered_set<std::string> &used)
{
	std::string fresh = fresh_name(net + "$pre", used);
	bool found = false;
	for (auto &g : gates) {
		if (g.output == net) {
			g.output = fresh;
			found = true;
		}
		for (auto &f : g.fanin)
			if (f == net)
				f = fresh;
	}
	if (!found)
		throw NetlistError("net '" + net + "' has no driving gate");
	return fresh;
}

std::string pick_protected_output(const Netlist &n, const LockSpec &spec)
{
	std::string out = spec.protected_output.empty() ? n.outputs().front() : spec.protected_output;
	auto id = n.net_id(out);
	if (!id || std::find(n.outputs().begin(), n.outputs().end(), out) == n.outputs().end())
		throw NetlistError("'" + out + "' is not an output port of '" + n.name() + "'");
	if (!n.driver(*id))
		throw NetlistError("output '" + out + "' is driven by a port; cannot protect it");
	return out;
}

// Gate indices with a path to at least one output.
std::vector<std::uint32_t> live_gates(const Netlist &n)
{
	std::vector<bool> live(n.gate_count(), false);
	std::vector<std::uint32_t> stack;
	auto visit = [&](std::size_t net_id) {
		if (auto gi = n.driver(net_id); gi && !live[*gi]) {
			live[*gi] = true;
			stack.push_back(*gi);
		}
	};
	for (const auto &o : n.outputs())
		visit(*n.net_id(o));
	while (!stack.empty()) {
		auto gi = stack.back();
		stack.pop_back();
		for (const auto &f : n.gates()[gi].fanin)
			visit(*n.net_id(f));
	}
	std::vector<std::uint32_t> result;
	for (std::uint32_t gi = 0; gi < n.gate_count(); ++gi)
		if (live[gi])
			result.push_back(gi);
	return result;
}

// Build a MUX tree returning entries[address] with address[0] as the most
// significant address bit. Appends node gates named <prefix><counter>.
std::string build_mux_tree(std::vector<Gate> &gates, const std::vector<std::string> &address,
			   std::vector<std::string> layer, const std::string &prefix, std::size_t &counter,
			   std::unordered_set<std::string> &used)
{
	for (std::size_t lvl = address.size(); lvl-- > 0;) {
		std::vector<std::string> next;
		next.reserve(layer.size() / 2);
		for (std::size_t i = 0; i < layer.size(); i += 2) {
			std::string name = fresh_name(prefix + std::to_string(counter++), used);
			gates.push_back(Gate{name, GateKind::Mux, {address[lvl], layer[i], layer[i + 1]}});
			next.push_back(std::move(name));
		}
		layer = std::move(next);
	}
	return layer[0];
}

AppliedLock lock_xor_impl(const Netlist &n, const LockSpec &spec)
{
	validate_spec(n, spec);
	auto key_ports = make_key_ports(n, spec.key_size);

	auto candidates = live_gates(n);
	if (candidates.size() < spec.key_size)
		throw NetlistError("key_size " + std::to_string(spec.key_size) + " exceeds the " +
				   std::to_string(candidates.size()) + " live internal nets available");

	std::mt19937_64 rng(spec.rng_seed);
	shuffle_values(candidates, rng);
	candidates.resize(spec.key_size);

	auto used = all_net_names(n);
	for (const auto &p : key_ports)
		used.insert(p);
	std::vector<Gate> gates = n.gates();
	std::vector<std::string> taps;
	for (std::size_t i = 0; i < spec.key_size; ++i) {
		const std::string net = n.gates()[candidates[i]].output;
		taps.push_back(net);
		std::string pre = displace_driver(gates, net, used);
		GateKind kind = spec.correct_key.bits[i] ? GateKind::Xnor : GateKind::Xor;
		gates.push_back(Gate{net, kind, {pre, key_ports[i]}});
	}

	Netlist locked(n.name(), n.inputs(), key_ports, n.outputs(), std::move(gates));
	return AppliedLock{std::move(locked), std::move(taps), ""};
}

AppliedLock lock_sarlock_impl(const Netlist &n, const LockSpec &spec)
{
	validate_spec(n, spec);
	auto key_ports = make_key_ports(n, spec.key_size);

	std::vector<std::string> taps = spec.tap_ports;
	if (taps.empty()) {
		if (n.input_count() < spec.key_size)
			throw NetlistError("need " + std::to_string(spec.key_size) + " tap inputs but '" + n.name() +
					   "' has " + std::to_string(n.input_count()));
		taps.assign(n.inputs().begin(), n.inputs().begin() + static_cast<long>(spec.key_size));
	}
	if (taps.size() != spec.key_size)
		throw NetlistError("SARLock needs exactly key_size tap ports, got " + std::to_string(taps.size()));
	for (const auto &t : taps)
		if (!n.is_input(t))
			throw NetlistError("tap port '" + t + "' is not an input of '" + n.name() + "'");

	std::string out = pick_protected_output(n, spec);

	auto used = all_net_names(n);
	for (const auto &p : key_ports)
		used.insert(p);
	std::vector<Gate> gates = n.gates();

	// cmp = 1 iff the tapped input slice equals the key.
	std::vector<std::string> eq;
	for (std::size_t i = 0; i < spec.key_size; ++i) {
		eq.push_back(fresh_name("sar$eq" + std::to_string(i), used));
		gates.push_back(Gate{eq.back(), GateKind::Xnor, {taps[i], key_ports[i]}});
	}
	std::string cmp = eq[0];
	if (eq.size() > 1) {
		cmp = fresh_name("sar$cmp", used);
		gates.push_back(Gate{cmp, GateKind::And, eq});
	}

	// mask = 1 iff the key differs from the hardwired k*.
	std::vector<std::string> diff;
	for (std::size_t i = 0; i < spec.key_size; ++i) {
		if (spec.correct_key.bits[i]) {
			diff.push_back(fresh_name("sar$nk" + std::to_string(i), used));
			gates.push_back(Gate{diff.back(), GateKind::Not, {key_ports[i]}});
		} else {
			diff.push_back(key_ports[i]);
		}
	}
	std::string mask = diff[0];
	if (diff.size() > 1) {
		mask = fresh_name("sar$mask", used);
		gates.push_back(Gate{mask, GateKind::Or, diff});
	}

	std::string flip = fresh_name("sar$flip", used);
	gates.push_back(Gate{flip, GateKind::And, {cmp, mask}});

	std::string pre = displace_net(gates, out, used);
	gates.push_back(Gate{out, GateKind::Xor, {pre, flip}});

	Netlist locked(n.name(), n.inputs(), key_ports, n.outputs(), std::move(gates));
	return AppliedLock{std::move(locked), std::move(taps), std::move(out)};
}

AppliedLock lock_lut_impl(const Netlist &n, const LockSpec &spec)
{
	validate_spec(n, spec);
	const LutTopology &lut = spec.lut;
	for (auto w : lut.stage1_widths)
		if (w == 0)
			throw NetlistError("stage-1 LUT width must be positive");
	if (lut.stage1_widths.empty())
		throw NetlistError("topology needs at least one stage-1 LUT");
	std::size_t table_bits = lut.table_bits();
	if (table_bits > spec.key_size)
		throw NetlistError("topology stores " + std::to_string(table_bits) + " key bits but key_size is only " +
				   std::to_string(spec.key_size));
	if (lut.tap_count() > n.input_count())
		throw NetlistError("topology taps " + std::to_string(lut.tap_count()) + " signals but '" + n.name() +
				   "' has " + std::to_string(n.input_count()) + " inputs");

	auto key_ports = make_key_ports(n, spec.key_size);
	std::string out = pick_protected_output(n, spec);

	std::mt19937_64 rng(spec.rng_seed);
	std::vector<std::string> taps = n.inputs();
	shuffle_values(taps, rng);
	taps.resize(lut.tap_count());

	auto used = all_net_names(n);
	for (const auto &p : key_ports)
		used.insert(p);
	std::vector<Gate> gates = n.gates();

	// Hardwired constants for the k* image of the network.
	std::string c0 = fresh_name("lut$c0", used);
	std::string c1 = fresh_name("lut$c1", used);
	gates.push_back(Gate{c0, GateKind::Const0, {}});
	gates.push_back(Gate{c1, GateKind::Const1, {}});
	auto const_net = [&](bool v) { return v ? c1 : c0; };

	// Keyed network reads truth tables from key ports; the mirror reads the
	// same tables hardwired to k*.
	std::size_t bit = 0;	     // running key-bit index
	std::size_t node_keyed = 0;  // node counters for generated net names
	std::size_t node_mirror = 0;
	std::vector<std::string> keyed_s1, mirror_s1;
	std::size_t tap_off = 0;
	for (std::size_t j = 0; j < lut.stage1_widths.size(); ++j) {
		std::size_t w = lut.stage1_widths[j];
		std::vector<std::string> address(taps.begin() + static_cast<long>(tap_off),
						 taps.begin() + static_cast<long>(tap_off + w));
		tap_off += w;
		std::vector<std::string> keyed_entries, mirror_entries;
		for (std::size_t e = 0; e < (std::size_t{1} << w); ++e) {
			keyed_entries.push_back(key_ports[bit + e]);
			mirror_entries.push_back(const_net(spec.correct_key.bits[bit + e]));
		}
		bit += std::size_t{1} << w;
		keyed_s1.push_back(build_mux_tree(gates, address, std::move(keyed_entries), "lut$k", node_keyed, used));
		mirror_s1.push_back(build_mux_tree(gates, address, std::move(mirror_entries), "lut$m", node_mirror, used));
	}

	std::vector<std::string> extras(taps.begin() + static_cast<long>(tap_off), taps.end());
	std::vector<std::string> keyed_addr = keyed_s1, mirror_addr = mirror_s1;
	keyed_addr.insert(keyed_addr.end(), extras.begin(), extras.end());
	mirror_addr.insert(mirror_addr.end(), extras.begin(), extras.end());

	std::size_t s2_entries = std::size_t{1} << lut.stage2_width();
	std::vector<std::string> keyed_entries, mirror_entries;
	for (std::size_t e = 0; e < s2_entries; ++e) {
		keyed_entries.push_back(key_ports[bit + e]);
		mirror_entries.push_back(const_net(spec.correct_key.bits[bit + e]));
	}
	bit += s2_entries;
	std::string keyed_out = build_mux_tree(gates, keyed_addr, std::move(keyed_entries), "lut$k", node_keyed, used);
	std::string mirror_out = build_mux_tree(gates, mirror_addr, std::move(mirror_entries), "lut$m", node_mirror, used);

	// Fold the keyed network against its k* image into the protected
	// output; pad bits continue the chain as plain key gates.
	std::string pre = displace_net(gates, out, used);
	std::string cur = fresh_name("lut$base", used);
	gates.push_back(Gate{cur, GateKind::Xor, {pre, keyed_out, mirror_out}});
	std::size_t pad = spec.key_size - table_bits;
	for (std::size_t p = 0; p < pad; ++p) {
		bool last = p + 1 == pad;
		std::string next = last ? out : fresh_name("lut$pad" + std::to_string(p), used);
		GateKind kind = spec.correct_key.bits[bit + p] ? GateKind::Xnor : GateKind::Xor;
		gates.push_back(Gate{next, kind, {cur, key_ports[bit + p]}});
		cur = std::move(next);
	}
	if (pad == 0)
		gates.push_back(Gate{out, GateKind::Buf, {cur}});

	Netlist locked(n.name(), n.inputs(), key_ports, n.outputs(), std::move(gates));
	return AppliedLock{std::move(locked), std::move(taps), std::move(out)};
}

} // namespace

std::size_t LutTopology::tap_count() const
{
	std::size_t total = stage2_extra_taps;
	for (auto w : stage1_widths)
		total += w;
	return total;
}

std::size_t LutTopology::stage2_width() const
{
	return stage1_widths.size() + stage2_extra_taps;
}

std::size_t LutTopology::table_bits() const
{
	std::size_t total = std::size_t{1} << stage2_width();
	for (auto w : stage1_widths)
		total += std::size_t{1} << w;
	return total;
}

std::string_view to_string(LockScheme scheme)
{
	switch (scheme) {
	case LockScheme::Xor:
		return "xor";
	case LockScheme::Sarlock:
		return "sarlock";
	case LockScheme::Lut2Stage:
		return "lut2stage";
	}
	return "?";
}

std::optional<LockScheme> lock_scheme_from(std::string_view token)
{
	std::string low(token);
	std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
	if (low == "xor")
		return LockScheme::Xor;
	if (low == "sarlock")
		return LockScheme::Sarlock;
	if (low == "lut2stage" || low == "lut")
		return LockScheme::Lut2Stage;
	return std::nullopt;
}

AppliedLock apply_lock(const Netlist &n, const LockSpec &spec)
{
	switch (spec.scheme) {
	case LockScheme::Xor:
		return lock_xor_impl(n, spec);
	case LockScheme::Sarlock:
		return lock_sarlock_impl(n, spec);
	case LockScheme::Lut2Stage:
		return lock_lut_impl(n, spec);
	}
	throw NetlistError("unknown lock scheme");
}

Netlist lock_xor(const Netlist &n, const LockSpec &spec)
{
	return lock_xor_impl(n, spec).locked;
}

Netlist lock_sarlock(const Netlist &n, const LockSpec &spec)
{
	return lock_sarlock_impl(n, spec).locked;
}

Netlist lock_lut(const Netlist &n, const LockSpec &spec)
{
	return lock_lut_impl(n, spec).locked;
}

KeyAssignment random_key(std::size_t width, std::uint64_t seed)
{
	std::mt19937_64 rng(seed);
	KeyAssignment key;
	key.bits.resize(width);
	for (std::size_t i = 0; i < width; ++i)
		key.bits[i] = rng() & 1;
	return key;
}

KeyAssignment lut_reference_key(const LutTopology &lut, std::size_t key_size, std::uint64_t seed)
{
	std::size_t table_bits = lut.table_bits();
	if (table_bits > key_size)
		throw NetlistError("topology stores " + std::to_string(table_bits) + " key bits but key_size is only " +
				   std::to_string(key_size));
	std::mt19937_64 rng(seed);
	KeyAssignment key;
	key.bits.reserve(key_size);

	// Stage-1 tables: uniform random, redrawn until non-constant so every
	// stage-2 address pattern is reachable.
	for (auto w : lut.stage1_widths) {
		std::size_t entries = std::size_t{1} << w;
		std::vector<bool> table(entries);
		bool all0 = true, all1 = true;
		do {
			all0 = all1 = true;
			for (std::size_t e = 0; e < entries; ++e) {
				table[e] = rng() & 1;
				(table[e] ? all0 : all1) = false;
			}
		} while (all0 || all1);
		key.bits.insert(key.bits.end(), table.begin(), table.end());
	}

	// Stage-2 table: XOR of the stage-1 outputs (plus AND of the extra
	// taps), so the table is sensitive to every stage-1 output at every
	// address. Stage-1 outputs occupy the most significant address bits.
	std::size_t m = lut.stage1_widths.size();
	std::size_t width2 = lut.stage2_width();
	for (std::size_t e = 0; e < (std::size_t{1} << width2); ++e) {
		bool parity = false;
		for (std::size_t j = 0; j < m; ++j)
			parity ^= (e >> (width2 - 1 - j)) & 1;
		bool extras_all1 = true;
		for (std::size_t j = m; j < width2; ++j)
			extras_all1 = extras_all1 && ((e >> (width2 - 1 - j)) & 1);
		key.bits.push_back(parity ^ extras_all1);
	}

	for (std::size_t p = table_bits; p < key_size; ++p)
		key.bits.push_back(rng() & 1);
	return key;
}

ErrorDistribution error_distribution(const Netlist &original, const Netlist &locked)
{
	if (original.is_locked())
		throw NetlistError("'" + original.name() + "' must be unlocked to serve as the reference");
	if (original.inputs() != locked.inputs())
		throw NetlistError("input port mismatch between '" + original.name() + "' and '" + locked.name() + "'");
	if (original.outputs() != locked.outputs())
		throw NetlistError("output port mismatch between '" + original.name() + "' and '" + locked.name() + "'");
	std::size_t ibits = original.input_count();
	std::size_t kbits = locked.key_count();
	if (ibits > 16 || kbits > 16 || ibits + kbits > 24)
		throw NetlistError("error_distribution limited to |I| <= 16, |K| <= 16, |I|+|K| <= 24 (got " +
				   std::to_string(ibits) + ", " + std::to_string(kbits) + ")");

	ErrorDistribution dist;
	dist.input_bits = ibits;
	dist.key_bits = kbits;
	dist.correct.resize(std::size_t{1} << (ibits + kbits));
	for (std::uint64_t i = 0; i < (1ull << ibits); ++i) {
		InputPattern in{bits_from_uint(i, ibits)};
		OutputPattern want = original.simulate(in);
		for (std::uint64_t k = 0; k < (1ull << kbits); ++k) {
			KeyAssignment key{bits_from_uint(k, kbits)};
			dist.correct[(i << kbits) | k] = locked.simulate(in, key) == want;
		}
	}
	return dist;
}

} // namespace splitlock
