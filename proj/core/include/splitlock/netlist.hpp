#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace splitlock {

/// Error raised for malformed netlists and bad netlist operations.
class NetlistError : public std::runtime_error {
      public:
	explicit NetlistError(const std::string &msg, int line = -1) : std::runtime_error(format(msg, line)), line_(line) {}

	/// 1-based source line for parse errors, -1 otherwise.
	int line() const { return line_; }

      private:
	static std::string format(const std::string &msg, int line);
	int line_;
};

enum class GateKind : std::uint8_t {
	And,
	Nand,
	Or,
	Nor,
	Xor,
	Xnor,
	Not,
	Buf,
	Const0,
	Const1,
	Mux, // fanin order: select, in0, in1; select=0 picks in0
};

std::string_view to_string(GateKind kind);
std::optional<GateKind> gate_kind_from(std::string_view token);

/// Allowed fanin counts for a gate kind, as [min, max] (max = SIZE_MAX for n-ary kinds).
std::pair<std::size_t, std::size_t> gate_arity(GateKind kind);

/// Evaluate one gate over its fanin values.
bool eval_gate(GateKind kind, const std::vector<bool> &fanin);

struct Gate {
	std::string output;
	GateKind kind;
	std::vector<std::string> fanin;

	bool operator==(const Gate &) const = default;
};

/// Bit vector indexed by a netlist's primary input port order.
struct InputPattern {
	std::vector<bool> bits;

	bool operator==(const InputPattern &) const = default;
};

/// Bit vector indexed by a netlist's key port order.
struct KeyAssignment {
	std::vector<bool> bits;

	bool operator==(const KeyAssignment &) const = default;
};

/// Bit vector indexed by a netlist's output port order.
using OutputPattern = std::vector<bool>;

/// A split condition: the listed input ports are held at the given bits.
/// value[i] ('0' or '1') is the value of ports[i].
struct SplitCondition {
	std::vector<std::string> ports;
	std::string value;

	std::size_t size() const { return ports.size(); }
	bool operator==(const SplitCondition &) const = default;
};

/// Bit-string helpers. Strings read left to right in port order, so the
/// leftmost character is port 0 (the most significant bit when a pattern is
/// written as a number, matching how patterns like "101" are usually quoted).
std::vector<bool> bits_from_string(std::string_view s);
std::string bits_to_string(const std::vector<bool> &bits);
std::vector<bool> bits_from_uint(std::uint64_t value, std::size_t width);
std::uint64_t bits_to_uint(const std::vector<bool> &bits);
std::string bits_to_hex(const std::vector<bool> &bits);
std::vector<bool> bits_from_hex(std::string_view hex, std::size_t width);

/// Immutable gate-level combinational netlist.
///
/// Ports and gates keep their declaration order for serialization; a
/// topological evaluation order is computed once at construction. All
/// operations on a constructed Netlist are const, so instances can be shared
/// freely across threads.
class Netlist {
      public:
	Netlist(std::string name, std::vector<std::string> inputs, std::vector<std::string> key_inputs,
		std::vector<std::string> outputs, std::vector<Gate> gates);

	const std::string &name() const { return name_; }
	const std::vector<std::string> &inputs() const { return inputs_; }
	const std::vector<std::string> &key_inputs() const { return key_inputs_; }
	const std::vector<std::string> &outputs() const { return outputs_; }
	const std::vector<Gate> &gates() const { return gates_; }

	std::size_t input_count() const { return inputs_.size(); }
	std::size_t key_count() const { return key_inputs_.size(); }
	std::size_t output_count() const { return outputs_.size(); }
	std::size_t gate_count() const { return gates_.size(); }

	bool is_locked() const { return !key_inputs_.empty(); }

	bool has_net(std::string_view net) const;
	bool is_input(std::string_view net) const;
	bool is_key_input(std::string_view net) const;

	/// Index of a port within its port list, or nullopt.
	std::optional<std::size_t> input_index(std::string_view port) const;
	std::optional<std::size_t> key_index(std::string_view port) const;

	/// Gate indices (into gates()) in a valid evaluation order.
	std::span<const std::uint32_t> topo_order() const { return topo_order_; }

	/// Net ids: [0, input_count) inputs, then key inputs, then one id per
	/// gate output in declaration order.
	std::size_t net_count() const { return net_names_.size(); }
	const std::string &net_name(std::size_t id) const { return net_names_[id]; }
	std::optional<std::size_t> net_id(std::string_view net) const;

	/// Driving gate index for a net id, or nullopt for ports.
	std::optional<std::uint32_t> driver(std::size_t net_id) const;

	/// Evaluate the circuit function: f(i) for unlocked circuits,
	/// f_l(i, k) for locked ones. Throws NetlistError on width mismatch.
	OutputPattern simulate(const InputPattern &in, const KeyAssignment &key = {}) const;

	/// Evaluate and expose every net value (indexed by net id).
	std::vector<bool> simulate_nets(const InputPattern &in, const KeyAssignment &key = {}) const;

	bool operator==(const Netlist &other) const;

      private:
	std::string name_;
	std::vector<std::string> inputs_;
	std::vector<std::string> key_inputs_;
	std::vector<std::string> outputs_;
	std::vector<Gate> gates_;

	// Compiled form, fixed at construction.
	std::vector<std::string> net_names_;
	std::unordered_map<std::string, std::uint32_t> net_ids_;
	std::vector<std::uint32_t> gate_out_ids_;	      // per gate
	std::vector<std::vector<std::uint32_t>> gate_fanin_ids_; // per gate
	std::vector<std::uint32_t> topo_order_;
	std::vector<std::uint32_t> output_ids_;

	void validate_and_compile();
};

} // namespace splitlock
