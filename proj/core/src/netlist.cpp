#include "splitlock/netlist.hpp"

#include <algorithm>
#include <cctype>

namespace splitlock {

std::string NetlistError::format(const std::string &msg, int line)
{
	if (line < 0)
		return msg;
	return "line " + std::to_string(line) + ": " + msg;
}

std::string_view to_string(GateKind kind)
{
	switch (kind) {
	case GateKind::And:
		return "AND";
	case GateKind::Nand:
		return "NAND";
	case GateKind::Or:
		return "OR";
	case GateKind::Nor:
		return "NOR";
	case GateKind::Xor:
		return "XOR";
	case GateKind::Xnor:
		return "XNOR";
	case GateKind::Not:
		return "NOT";
	case GateKind::Buf:
		return "BUFF";
	case GateKind::Const0:
		return "CONST0";
	case GateKind::Const1:
		return "CONST1";
	case GateKind::Mux:
		return "MUX";
	}
	return "?";
}

std::optional<GateKind> gate_kind_from(std::string_view token)
{
	std::string up(token);
	std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
	if (up == "AND")
		return GateKind::And;
	if (up == "NAND")
		return GateKind::Nand;
	if (up == "OR")
		return GateKind::Or;
	if (up == "NOR")
		return GateKind::Nor;
	if (up == "XOR")
		return GateKind::Xor;
	if (up == "XNOR" || up == "NXOR")
		return GateKind::Xnor;
	if (up == "NOT" || up == "INV")
		return GateKind::Not;
	if (up == "BUF" || up == "BUFF")
		return GateKind::Buf;
	if (up == "CONST0" || up == "GND")
		return GateKind::Const0;
	if (up == "CONST1" || up == "VDD")
		return GateKind::Const1;
	if (up == "MUX" || up == "MUX2")
		return GateKind::Mux;
	return std::nullopt;
}

std::pair<std::size_t, std::size_t> gate_arity(GateKind kind)
{
	constexpr std::size_t unbounded = static_cast<std::size_t>(-1);
	switch (kind) {
	case GateKind::Not:
	case GateKind::Buf:
		return {1, 1};
	case GateKind::Const0:
	case GateKind::Const1:
		return {0, 0};
	case GateKind::Mux:
		return {3, 3};
	default:
		return {2, unbounded};
	}
}

bool eval_gate(GateKind kind, const std::vector<bool> &f)
{
	switch (kind) {
	case GateKind::And:
	case GateKind::Nand: {
		bool v = true;
		for (bool b : f)
			v = v && b;
		return kind == GateKind::And ? v : !v;
	}
	case GateKind::Or:
	case GateKind::Nor: {
		bool v = false;
		for (bool b : f)
			v = v || b;
		return kind == GateKind::Or ? v : !v;
	}
	case GateKind::Xor:
	case GateKind::Xnor: {
		bool v = false;
		for (bool b : f)
			v = v != b;
		return kind == GateKind::Xor ? v : !v;
	}
	case GateKind::Not:
		return !f[0];
	case GateKind::Buf:
		return f[0];
	case GateKind::Const0:
		return false;
	case GateKind::Const1:
		return true;
	case GateKind::Mux:
		return f[0] ? f[2] : f[1];
	}
	return false;
}

std::vector<bool> bits_from_string(std::string_view s)
{
	std::vector<bool> bits;
	bits.reserve(s.size());
	for (char c : s) {
		if (c != '0' && c != '1')
			throw NetlistError("bad bit character '" + std::string(1, c) + "' in \"" + std::string(s) + "\"");
		bits.push_back(c == '1');
	}
	return bits;
}

std::string bits_to_string(const std::vector<bool> &bits)
{
	std::string s;
	s.reserve(bits.size());
	for (bool b : bits)
		s.push_back(b ? '1' : '0');
	return s;
}

std::vector<bool> bits_from_uint(std::uint64_t value, std::size_t width)
{
	std::vector<bool> bits(width);
	for (std::size_t i = 0; i < width; ++i)
		bits[i] = (value >> (width - 1 - i)) & 1u;
	return bits;
}

std::uint64_t bits_to_uint(const std::vector<bool> &bits)
{
	std::uint64_t v = 0;
	for (bool b : bits)
		v = (v << 1) | static_cast<std::uint64_t>(b);
	return v;
}

std::string bits_to_hex(const std::vector<bool> &bits)
{
	static const char digits[] = "0123456789abcdef";
	std::size_t ndigits = (bits.size() + 3) / 4;
	// Left-pad to a nibble boundary so the string reads as the same number.
	std::size_t pad = ndigits * 4 - bits.size();
	std::string hex;
	hex.reserve(ndigits);
	unsigned nibble = 0;
	for (std::size_t pos = 0; pos < ndigits * 4; ++pos) {
		bool bit = pos >= pad && bits[pos - pad];
		nibble = (nibble << 1) | static_cast<unsigned>(bit);
		if (pos % 4 == 3) {
			hex.push_back(digits[nibble]);
			nibble = 0;
		}
	}
	return hex;
}

std::vector<bool> bits_from_hex(std::string_view hex, std::size_t width)
{
	std::vector<bool> all;
	all.reserve(hex.size() * 4);
	for (char c : hex) {
		int v;
		if (c >= '0' && c <= '9')
			v = c - '0';
		else if (c >= 'a' && c <= 'f')
			v = c - 'a' + 10;
		else if (c >= 'A' && c <= 'F')
			v = c - 'A' + 10;
		else
			throw NetlistError("bad hex character '" + std::string(1, c) + "'");
		for (int i = 3; i >= 0; --i)
			all.push_back((v >> i) & 1);
	}
	if (all.size() < width)
		all.insert(all.begin(), width - all.size(), false);
	std::size_t excess = all.size() - width;
	for (std::size_t i = 0; i < excess; ++i) {
		if (all[i])
			throw NetlistError("hex value \"" + std::string(hex) + "\" does not fit in " + std::to_string(width) + " bits");
	}
	return std::vector<bool>(all.begin() + static_cast<std::ptrdiff_t>(excess), all.end());
}

Netlist::Netlist(std::string name, std::vector<std::string> inputs, std::vector<std::string> key_inputs,
		 std::vector<std::string> outputs, std::vector<Gate> gates)
    : name_(std::move(name)), inputs_(std::move(inputs)), key_inputs_(std::move(key_inputs)), outputs_(std::move(outputs)),
      gates_(std::move(gates))
{
	validate_and_compile();
}

void Netlist::validate_and_compile()
{
	net_names_.clear();
	net_ids_.clear();
	net_names_.reserve(inputs_.size() + key_inputs_.size() + gates_.size());

	auto declare = [&](const std::string &net) {
		auto [it, inserted] = net_ids_.emplace(net, static_cast<std::uint32_t>(net_names_.size()));
		if (!inserted)
			throw NetlistError("duplicate definition of '" + net + "'");
		net_names_.push_back(net);
		return it->second;
	};

	for (const auto &p : inputs_)
		declare(p);
	for (const auto &p : key_inputs_)
		declare(p);

	gate_out_ids_.clear();
	gate_out_ids_.reserve(gates_.size());
	for (const auto &g : gates_) {
		auto [lo, hi] = gate_arity(g.kind);
		if (g.fanin.size() < lo || g.fanin.size() > hi) {
			throw NetlistError("gate '" + g.output + "': " + std::string(to_string(g.kind)) + " expects " +
					   (lo == hi ? std::to_string(lo) : "at least " + std::to_string(lo)) + " fanin(s), got " +
					   std::to_string(g.fanin.size()));
		}
		gate_out_ids_.push_back(declare(g.output));
	}

	gate_fanin_ids_.clear();
	gate_fanin_ids_.resize(gates_.size());
	for (std::size_t gi = 0; gi < gates_.size(); ++gi) {
		auto &ids = gate_fanin_ids_[gi];
		ids.reserve(gates_[gi].fanin.size());
		for (const auto &net : gates_[gi].fanin) {
			auto it = net_ids_.find(net);
			if (it == net_ids_.end())
				throw NetlistError("undefined net '" + net + "' in fanin of gate '" + gates_[gi].output + "'");
			ids.push_back(it->second);
		}
	}

	output_ids_.clear();
	output_ids_.reserve(outputs_.size());
	{
		std::unordered_map<std::string_view, int> seen;
		for (const auto &p : outputs_) {
			if (++seen[p] > 1)
				throw NetlistError("duplicate output port '" + p + "'");
			auto it = net_ids_.find(p);
			if (it == net_ids_.end())
				throw NetlistError("output port '" + p + "' has no driver");
			output_ids_.push_back(it->second);
		}
	}

	// Kahn's algorithm over gates; ports have no prerequisites.
	std::size_t nports = inputs_.size() + key_inputs_.size();
	std::vector<std::uint32_t> pending(gates_.size(), 0);
	std::vector<std::vector<std::uint32_t>> consumers(net_names_.size());
	for (std::size_t gi = 0; gi < gates_.size(); ++gi) {
		for (std::uint32_t nid : gate_fanin_ids_[gi]) {
			if (nid >= nports) {
				++pending[gi];
				consumers[nid].push_back(static_cast<std::uint32_t>(gi));
			}
		}
	}
	topo_order_.clear();
	topo_order_.reserve(gates_.size());
	std::vector<std::uint32_t> ready;
	for (std::size_t gi = 0; gi < gates_.size(); ++gi)
		if (pending[gi] == 0)
			ready.push_back(static_cast<std::uint32_t>(gi));
	for (std::size_t head = 0; head < ready.size(); ++head) {
		std::uint32_t gi = ready[head];
		topo_order_.push_back(gi);
		for (std::uint32_t consumer : consumers[gate_out_ids_[gi]])
			if (--pending[consumer] == 0)
				ready.push_back(consumer);
	}
	if (topo_order_.size() != gates_.size()) {
		for (std::size_t gi = 0; gi < gates_.size(); ++gi)
			if (pending[gi] != 0)
				throw NetlistError("combinational cycle involving '" + gates_[gi].output + "'");
	}
}

bool Netlist::has_net(std::string_view net) const
{
	return net_ids_.find(std::string(net)) != net_ids_.end();
}

bool Netlist::is_input(std::string_view net) const
{
	auto id = net_id(net);
	return id && *id < inputs_.size();
}

bool Netlist::is_key_input(std::string_view net) const
{
	auto id = net_id(net);
	return id && *id >= inputs_.size() && *id < inputs_.size() + key_inputs_.size();
}

std::optional<std::size_t> Netlist::input_index(std::string_view port) const
{
	auto id = net_id(port);
	if (id && *id < inputs_.size())
		return *id;
	return std::nullopt;
}

std::optional<std::size_t> Netlist::key_index(std::string_view port) const
{
	auto id = net_id(port);
	if (id && *id >= inputs_.size() && *id < inputs_.size() + key_inputs_.size())
		return *id - inputs_.size();
	return std::nullopt;
}

std::optional<std::size_t> Netlist::net_id(std::string_view net) const
{
	auto it = net_ids_.find(std::string(net));
	if (it == net_ids_.end())
		return std::nullopt;
	return it->second;
}

std::optional<std::uint32_t> Netlist::driver(std::size_t id) const
{
	std::size_t nports = inputs_.size() + key_inputs_.size();
	if (id < nports)
		return std::nullopt;
	return static_cast<std::uint32_t>(id - nports);
}

std::vector<bool> Netlist::simulate_nets(const InputPattern &in, const KeyAssignment &key) const
{
	if (in.bits.size() != inputs_.size())
		throw NetlistError("input pattern width " + std::to_string(in.bits.size()) + " does not match |I| = " +
				   std::to_string(inputs_.size()));
	if (key.bits.size() != key_inputs_.size())
		throw NetlistError("key width " + std::to_string(key.bits.size()) + " does not match |K| = " +
				   std::to_string(key_inputs_.size()));

	std::vector<bool> values(net_names_.size(), false);
	for (std::size_t i = 0; i < inputs_.size(); ++i)
		values[i] = in.bits[i];
	for (std::size_t i = 0; i < key_inputs_.size(); ++i)
		values[inputs_.size() + i] = key.bits[i];

	std::vector<bool> fanin_vals;
	for (std::uint32_t gi : topo_order_) {
		const auto &fanin = gate_fanin_ids_[gi];
		fanin_vals.assign(fanin.size(), false);
		for (std::size_t j = 0; j < fanin.size(); ++j)
			fanin_vals[j] = values[fanin[j]];
		values[gate_out_ids_[gi]] = eval_gate(gates_[gi].kind, fanin_vals);
	}
	return values;
}

OutputPattern Netlist::simulate(const InputPattern &in, const KeyAssignment &key) const
{
	std::vector<bool> values = simulate_nets(in, key);
	OutputPattern out(outputs_.size());
	for (std::size_t i = 0; i < outputs_.size(); ++i)
		out[i] = values[output_ids_[i]];
	return out;
}

bool Netlist::operator==(const Netlist &other) const
{
	return name_ == other.name_ && inputs_ == other.inputs_ && key_inputs_ == other.key_inputs_ && outputs_ == other.outputs_ &&
	       gates_ == other.gates_;
}

} // namespace splitlock
