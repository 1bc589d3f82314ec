#include "splitlock/satcore.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <unordered_set>

#include "splitlock/transform.hpp"

namespace splitlock {

namespace {

void emit(CnfFormula &f, std::vector<int> clause) { f.clauses.push_back(std::move(clause)); }

int fresh(CnfFormula &f) { return ++f.variable_count; }

// y <-> a XOR b. Passing -y as y yields the XNOR schema.
void emit_xor2(CnfFormula &f, int y, int a, int b)
{
	emit(f, {-a, -b, -y});
	emit(f, {a, b, -y});
	emit(f, {-a, b, y});
	emit(f, {a, -b, y});
}

void emit_equal(CnfFormula &f, int y, int a)
{
	emit(f, {-a, y});
	emit(f, {a, -y});
}

void encode_gate(CnfFormula &f, GateKind kind, int y, const std::vector<int> &in)
{
	switch (kind) {
	case GateKind::And: {
		std::vector<int> big;
		for (int a : in) {
			big.push_back(-a);
			emit(f, {a, -y});
		}
		big.push_back(y);
		emit(f, std::move(big));
		break;
	}
	case GateKind::Nand: {
		std::vector<int> big;
		for (int a : in) {
			big.push_back(-a);
			emit(f, {a, y});
		}
		big.push_back(-y);
		emit(f, std::move(big));
		break;
	}
	case GateKind::Or: {
		std::vector<int> big;
		for (int a : in) {
			big.push_back(a);
			emit(f, {-a, y});
		}
		big.push_back(-y);
		emit(f, std::move(big));
		break;
	}
	case GateKind::Nor: {
		std::vector<int> big;
		for (int a : in) {
			big.push_back(a);
			emit(f, {-a, -y});
		}
		big.push_back(y);
		emit(f, std::move(big));
		break;
	}
	case GateKind::Xor:
	case GateKind::Xnor: {
		const int out = kind == GateKind::Xor ? y : -y;
		if (in.size() == 1) {
			emit_equal(f, out, in[0]);
			break;
		}
		int cur = in[0];
		for (std::size_t k = 1; k + 1 < in.size(); k++) {
			const int t = fresh(f);
			emit_xor2(f, t, cur, in[k]);
			cur = t;
		}
		emit_xor2(f, out, cur, in.back());
		break;
	}
	case GateKind::Not:
		emit_equal(f, y, -in[0]);
		break;
	case GateKind::Buf:
		emit_equal(f, y, in[0]);
		break;
	case GateKind::Const0:
		emit(f, {-y});
		break;
	case GateKind::Const1:
		emit(f, {y});
		break;
	case GateKind::Mux: {
		const int s = in[0], a = in[1], b = in[2];
		emit(f, {-s, -b, y});
		emit(f, {-s, b, -y});
		emit(f, {s, -a, y});
		emit(f, {s, a, -y});
		break;
	}
	}
}

} // namespace

int VarMap::var(int instance, std::string_view net) const
{
	const auto v = find(instance, net);
	if (!v) {
		throw NetlistError("no variable bound for net '" + std::string(net) +
				   "' of instance " + std::to_string(instance));
	}
	return *v;
}

std::optional<int> VarMap::find(int instance, std::string_view net) const
{
	const auto inst = by_instance_.find(instance);
	if (inst == by_instance_.end())
		return std::nullopt;
	const auto it = inst->second.find(std::string(net));
	if (it == inst->second.end())
		return std::nullopt;
	return it->second;
}

std::vector<int> VarMap::vars(int instance, const std::vector<std::string> &nets) const
{
	std::vector<int> out;
	out.reserve(nets.size());
	for (const std::string &net : nets)
		out.push_back(var(instance, net));
	return out;
}

void VarMap::bind(int instance, std::string net, int variable)
{
	const auto [it, inserted] = by_instance_[instance].emplace(std::move(net), variable);
	if (!inserted) {
		throw NetlistError("net '" + it->first + "' of instance " +
				   std::to_string(instance) + " is already bound");
	}
}

void tseitin_encode(const Netlist &n, int instance, CnfFormula &formula, VarMap &map,
		    const std::vector<NetPin> &pinned)
{
	std::unordered_map<std::string, int> pins;
	for (const NetPin &p : pinned) {
		if (!n.has_net(p.net))
			throw NetlistError("pinned net '" + p.net + "' does not exist in '" +
					   n.name() + "'");
		if (p.variable < 1 || p.variable > formula.variable_count)
			throw NetlistError("pinned variable " + std::to_string(p.variable) +
					   " for net '" + p.net + "' is not a formula variable");
		if (!pins.emplace(p.net, p.variable).second)
			throw NetlistError("net '" + p.net + "' is pinned twice");
	}

	std::vector<int> var_of(n.net_count());
	for (std::size_t id = 0; id < n.net_count(); id++) {
		const std::string &name = n.net_name(id);
		const auto it = pins.find(name);
		var_of[id] = it != pins.end() ? it->second : fresh(formula);
		map.bind(instance, name, var_of[id]);
	}

	std::vector<int> fanin_vars;
	for (const Gate &g : n.gates()) {
		fanin_vars.clear();
		for (const std::string &net : g.fanin)
			fanin_vars.push_back(var_of[*n.net_id(net)]);
		encode_gate(formula, g.kind, var_of[*n.net_id(g.output)], fanin_vars);
	}
}

int SolverSession::add_variable()
{
	return solver_.new_var() + 1;
}

void SolverSession::add_clause(const std::vector<int> &dimacs_lits)
{
	if (dimacs_lits.empty())
		throw NetlistError("empty clause");
	std::vector<sat::Lit> lits;
	lits.reserve(dimacs_lits.size());
	for (const int l : dimacs_lits) {
		const int v = std::abs(l);
		if (v < 1 || v > variable_count())
			throw NetlistError("literal " + std::to_string(l) +
					   " references an unknown variable");
		lits.push_back(sat::mk_lit(v - 1, l < 0));
	}
	if (record_)
		recorded_.push_back(dimacs_lits);
	clause_count_++;
	solver_.add_clause(std::move(lits));
}

void SolverSession::encode(const Netlist &n, int instance, const std::vector<NetPin> &pinned)
{
	CnfFormula f;
	f.variable_count = variable_count();
	const int before = f.variable_count;
	tseitin_encode(n, instance, f, map_, pinned);
	for (int v = before; v < f.variable_count; v++)
		add_variable();
	for (const std::vector<int> &clause : f.clauses)
		add_clause(clause);
}

int SolverSession::shared_gate(GateKind kind, std::vector<int> operands, CnfFormula &f)
{
	switch (kind) {
	case GateKind::Buf:
		return operands[0];
	case GateKind::And:
	case GateKind::Nand:
	case GateKind::Or:
	case GateKind::Nor:
		std::sort(operands.begin(), operands.end());
		break;
	case GateKind::Xor:
	case GateKind::Xnor:
		// Canonical reduction tree: sort, then repeatedly fold the two
		// smallest operands through a shared two-input XOR step, so any
		// permutation of the same operand set reuses the same chain.
		std::sort(operands.begin(), operands.end());
		while (operands.size() > 2) {
			const int step = shared_gate(GateKind::Xor, {operands[0], operands[1]}, f);
			operands.erase(operands.begin(), operands.begin() + 2);
			operands.insert(std::lower_bound(operands.begin(), operands.end(), step),
					step);
		}
		break;
	default:
		break;
	}
	GateSig sig{kind, std::move(operands)};
	if (const auto it = shared_.find(sig); it != shared_.end())
		return it->second;
	const int y = fresh(f);
	encode_gate(f, kind, y, sig.operands);
	shared_.emplace(std::move(sig), y);
	return y;
}

void SolverSession::encode_shared(const Netlist &n, int instance, const std::vector<NetPin> &pinned)
{
	std::unordered_map<std::string, int> pins;
	for (const NetPin &p : pinned) {
		if (!n.has_net(p.net))
			throw NetlistError("pinned net '" + p.net + "' does not exist in '" +
					   n.name() + "'");
		if (p.variable < 1 || p.variable > variable_count())
			throw NetlistError("pinned variable " + std::to_string(p.variable) +
					   " for net '" + p.net + "' is not a formula variable");
		if (!pins.emplace(p.net, p.variable).second)
			throw NetlistError("net '" + p.net + "' is pinned twice");
	}

	CnfFormula f;
	f.variable_count = variable_count();
	const int before = f.variable_count;

	std::vector<int> var_of(n.net_count(), 0);
	const std::size_t nports = n.input_count() + n.key_count();
	for (std::size_t id = 0; id < nports; id++) {
		const auto it = pins.find(n.net_name(id));
		var_of[id] = it != pins.end() ? it->second : fresh(f);
	}

	std::vector<int> operands;
	for (const std::uint32_t gi : n.topo_order()) {
		const Gate &g = n.gates()[gi];
		operands.clear();
		for (const std::string &net : g.fanin)
			operands.push_back(var_of[*n.net_id(net)]);
		const int y = shared_gate(g.kind, operands, f);
		const std::size_t out_id = *n.net_id(g.output);
		const auto it = pins.find(g.output);
		if (it == pins.end()) {
			var_of[out_id] = y;
		} else {
			// A pinned gate output keeps the caller's variable and is
			// constrained to equal the (possibly shared) gate function.
			var_of[out_id] = it->second;
			if (y != it->second)
				emit_equal(f, it->second, y);
		}
	}
	for (std::size_t id = 0; id < n.net_count(); id++)
		map_.bind(instance, n.net_name(id), var_of[id]);

	for (int v = before; v < f.variable_count; v++)
		add_variable();
	for (const std::vector<int> &clause : f.clauses)
		add_clause(clause);
}

bool SolverSession::solve(const std::vector<int> &assumptions)
{
	std::vector<sat::Lit> lits;
	lits.reserve(assumptions.size());
	for (const int l : assumptions) {
		const int v = std::abs(l);
		if (v < 1 || v > variable_count())
			throw NetlistError("assumption " + std::to_string(l) +
					   " references an unknown variable");
		lits.push_back(sat::mk_lit(v - 1, l < 0));
	}
	return solver_.solve(lits);
}

bool SolverSession::value(int variable) const
{
	return solver_.model_value(variable - 1) == sat::Value::True;
}

std::vector<bool> SolverSession::values(const std::vector<int> &variables) const
{
	std::vector<bool> out;
	out.reserve(variables.size());
	for (const int v : variables)
		out.push_back(value(v));
	return out;
}

void SolverSession::write_dimacs(std::ostream &out) const
{
	out << "p cnf " << variable_count() << ' ' << recorded_.size() << '\n';
	for (const std::vector<int> &clause : recorded_) {
		for (const int l : clause)
			out << l << ' ';
		out << "0\n";
	}
}

Miter build_miter(const Netlist &locked)
{
	if (!locked.is_locked())
		throw NetlistError("netlist '" + locked.name() + "' has no key inputs");

	Miter m(locked);
	const Netlist &n = m.locked;
	m.session.encode(n, 0);
	m.inputs = m.session.vars().vars(0, n.inputs());
	m.key1 = m.session.vars().vars(0, n.key_inputs());
	m.outputs1 = m.session.vars().vars(0, n.outputs());

	// Only nets in the fan-out cone of the key ports can differ between the
	// two halves; everything else is the same function of the shared inputs.
	// The second half therefore re-encodes just that cone against fresh key
	// variables and reads every boundary net from the first half, keeping
	// the formula proportional to the key-affected logic instead of twice
	// the circuit.
	std::vector<bool> cone(n.net_count(), false);
	for (std::size_t i = 0; i < n.key_count(); i++)
		cone[n.input_count() + i] = true;
	for (const std::uint32_t gi : n.topo_order()) {
		const Gate &g = n.gates()[gi];
		for (const std::string &net : g.fanin) {
			if (cone[*n.net_id(net)]) {
				cone[*n.net_id(g.output)] = true;
				break;
			}
		}
	}

	m.key2.reserve(n.key_count());
	for (std::size_t i = 0; i < n.key_count(); i++)
		m.key2.push_back(m.session.add_variable());

	std::vector<Gate> cone_gates;
	std::vector<std::string> boundary;
	std::unordered_set<std::string> boundary_seen;
	for (const std::uint32_t gi : n.topo_order()) {
		const Gate &g = n.gates()[gi];
		if (!cone[*n.net_id(g.output)])
			continue;
		cone_gates.push_back(g);
		for (const std::string &net : g.fanin)
			if (!cone[*n.net_id(net)] && boundary_seen.insert(net).second)
				boundary.push_back(net);
	}
	std::vector<std::string> cone_outputs;
	for (const std::string &out : n.outputs())
		if (cone[*n.net_id(out)])
			cone_outputs.push_back(out);

	if (!cone_outputs.empty()) {
		std::vector<NetPin> pins;
		pins.reserve(boundary.size() + m.key2.size());
		for (const std::string &net : boundary)
			pins.push_back({net, m.session.var(0, net)});
		for (std::size_t i = 0; i < m.key2.size(); i++)
			pins.push_back({n.key_inputs()[i], m.key2[i]});
		const Netlist half(n.name() + "$cone", boundary, n.key_inputs(), cone_outputs,
				   std::move(cone_gates));
		m.session.encode(half, 1, pins);
	}

	m.outputs2.reserve(n.outputs().size());
	for (std::size_t j = 0; j < n.outputs().size(); j++) {
		const std::string &out = n.outputs()[j];
		m.outputs2.push_back(cone[*n.net_id(out)] ? m.session.var(1, out) : m.outputs1[j]);
	}

	std::vector<int> any;
	for (std::size_t j = 0; j < m.outputs1.size(); j++) {
		if (m.outputs1[j] == m.outputs2[j])
			continue; // shared net: the halves agree on it by construction
		const int d = m.session.add_variable();
		const int a = m.outputs1[j], b = m.outputs2[j];
		m.session.add_clause({-a, -b, -d});
		m.session.add_clause({a, b, -d});
		m.session.add_clause({-a, b, d});
		m.session.add_clause({a, -b, d});
		any.push_back(d);
	}
	m.diff = m.session.add_variable();
	for (const int d : any)
		m.session.add_clause({-d, m.diff});
	std::vector<int> big = any;
	big.push_back(-m.diff);
	m.session.add_clause(big);
	m.session.add_clause({m.diff});

	m.next_instance = 2;
	return m;
}

void add_dip_constraint(Miter &m, const InputPattern &dip, const OutputPattern &oracle_out)
{
	if (dip.bits.size() != m.locked.input_count())
		throw NetlistError("pattern width " + std::to_string(dip.bits.size()) +
				   " does not match " + std::to_string(m.locked.input_count()) +
				   " inputs");
	if (oracle_out.size() != m.locked.output_count())
		throw NetlistError("output width " + std::to_string(oracle_out.size()) +
				   " does not match " + std::to_string(m.locked.output_count()) +
				   " outputs");

	// Hardwire the pattern and shrink: what is left is a pure function of
	// the key, typically a few gates, so each recorded pattern stays cheap
	// even over thousands of attack iterations.
	const Netlist keyed = cofactor(m.locked, SplitCondition{m.locked.inputs(),
								bits_to_string(dip.bits)});

	for (int half = 0; half < 2; half++) {
		const std::vector<int> &key_vars = half == 0 ? m.key1 : m.key2;
		const int instance = m.next_instance++;
		std::vector<NetPin> pins;
		pins.reserve(key_vars.size());
		for (std::size_t i = 0; i < key_vars.size(); i++)
			pins.push_back({m.locked.key_inputs()[i], key_vars[i]});
		m.session.encode(keyed, instance, pins);
		for (std::size_t j = 0; j < keyed.outputs().size(); j++) {
			const int v = m.session.var(instance, keyed.outputs()[j]);
			m.session.add_clause({oracle_out[j] ? v : -v});
		}
	}
	m.dip_count++;
}

} // namespace splitlock
