#include "splitlock/attack.hpp"

#include <functional>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "splitlock/analysis.hpp"
#include "splitlock/satcore.hpp"
#include "splitlock/transform.hpp"

namespace splitlock {

namespace {

// Encode "this key vector reproduces the oracle answer on this pattern"
// into any session: cofactor the locked circuit at the pattern and pin the
// surviving key logic onto the given key variables.
void constrain_key_vars(SolverSession &s, const Netlist &locked, int instance,
			const std::vector<int> &key_vars, const DipTraceEntry &entry)
{
	const Netlist keyed =
	    cofactor(locked, SplitCondition{locked.inputs(), bits_to_string(entry.input.bits)});
	std::vector<NetPin> pins;
	pins.reserve(key_vars.size());
	for (std::size_t i = 0; i < key_vars.size(); i++)
		pins.push_back({locked.key_inputs()[i], key_vars[i]});
	s.encode(keyed, instance, pins);
	for (std::size_t j = 0; j < keyed.outputs().size(); j++) {
		const int v = s.var(instance, keyed.outputs()[j]);
		s.add_clause({entry.oracle_output[j] ? v : -v});
	}
}

} // namespace

SimulationOracle::SimulationOracle(Netlist unlocked) : circuit_(std::move(unlocked))
{
	if (circuit_.is_locked())
		throw NetlistError("oracle circuit '" + circuit_.name() + "' still has key ports");
}

OutputPattern SimulationOracle::query(const InputPattern &in) const
{
	queries_.fetch_add(1, std::memory_order_relaxed);
	return circuit_.simulate(in);
}

ConditionalOracle::ConditionalOracle(const Oracle &base, SplitCondition cond)
    : base_(&base), cond_(std::move(cond))
{
	const auto &ports = base_->input_ports();
	if (cond_.value.size() != cond_.ports.size())
		throw NetlistError("condition value width " + std::to_string(cond_.value.size()) +
				   " does not match " + std::to_string(cond_.ports.size()) +
				   " ports");

	std::unordered_map<std::string, char> fixed;
	for (std::size_t i = 0; i < cond_.ports.size(); i++) {
		const char bit = cond_.value[i];
		if (bit != '0' && bit != '1')
			throw NetlistError("condition bit '" + std::string(1, bit) +
					   "' is not 0 or 1");
		bool known = false;
		for (const auto &p : ports)
			known = known || p == cond_.ports[i];
		if (!known)
			throw NetlistError("condition port '" + cond_.ports[i] +
					   "' is not an oracle input");
		if (!fixed.emplace(cond_.ports[i], bit).second)
			throw NetlistError("condition fixes port '" + cond_.ports[i] + "' twice");
	}

	source_.reserve(ports.size());
	for (const auto &p : ports) {
		const auto it = fixed.find(p);
		if (it == fixed.end()) {
			source_.push_back(static_cast<int>(free_ports_.size()));
			free_ports_.push_back(p);
		} else {
			source_.push_back(it->second == '1' ? -2 : -1);
		}
	}
}

OutputPattern ConditionalOracle::query(const InputPattern &in) const
{
	if (in.bits.size() != free_ports_.size())
		throw NetlistError("query width " + std::to_string(in.bits.size()) +
				   " does not match " + std::to_string(free_ports_.size()) +
				   " free ports");
	InputPattern full;
	full.bits.reserve(source_.size());
	for (const int s : source_)
		full.bits.push_back(s >= 0 ? static_cast<bool>(in.bits[static_cast<std::size_t>(s)])
					   : s == -2);
	return base_->query(full);
}

std::string_view to_string(AttackStatus status)
{
	switch (status) {
	case AttackStatus::KeyFound:
		return "key_found";
	case AttackStatus::NoKeyInfluence:
		return "no_key_influence";
	case AttackStatus::Timeout:
		return "timeout";
	}
	return "unknown";
}

AttackResult sat_attack(const Netlist &locked, const Oracle &oracle, const AttackLimits &limits)
{
	const auto start = std::chrono::steady_clock::now();
	if (!locked.is_locked())
		throw NetlistError("netlist '" + locked.name() + "' has no key inputs to attack");
	if (oracle.input_ports().size() != locked.input_count())
		throw NetlistError("oracle has " + std::to_string(oracle.input_ports().size()) +
				   " inputs but the locked circuit has " +
				   std::to_string(locked.input_count()));

	AttackResult res;
	res.key = KeyAssignment{std::vector<bool>(locked.key_count(), false)};
	const auto finish = [&](AttackStatus status) {
		res.status = status;
		res.dip_count = res.dip_trace.size();
		res.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(
		    std::chrono::steady_clock::now() - start);
		return std::move(res);
	};
	const auto timed_out = [&] {
		return limits.timeout.count() > 0 &&
		       std::chrono::steady_clock::now() - start >= limits.timeout;
	};

	Miter m = build_miter(locked);
	while (m.session.solve()) {
		if (timed_out())
			return finish(AttackStatus::Timeout);
		if (limits.max_dips > 0 && res.dip_trace.size() >= limits.max_dips)
			return finish(AttackStatus::Timeout);

		const InputPattern dip{m.session.values(m.inputs)};
		OutputPattern out = oracle.query(dip);
		if (out.size() != locked.output_count())
			throw NetlistError("oracle returned " + std::to_string(out.size()) +
					   " outputs, expected " +
					   std::to_string(locked.output_count()));
		add_dip_constraint(m, dip, out);
		res.dip_trace.push_back({dip, std::move(out)});
	}

	if (res.dip_trace.empty())
		return finish(AttackStatus::NoKeyInfluence);

	// The miter session permanently asserts a disagreement, so a surviving
	// key comes from a fresh session holding only the trace constraints.
	SolverSession candidate;
	std::vector<int> key_vars;
	key_vars.reserve(locked.key_count());
	for (std::size_t i = 0; i < locked.key_count(); i++)
		key_vars.push_back(candidate.add_variable());
	int instance = 0;
	for (const DipTraceEntry &entry : res.dip_trace)
		constrain_key_vars(candidate, locked, instance++, key_vars, entry);
	if (!candidate.solve())
		throw NetlistError("no key is consistent with the recorded oracle responses");
	res.key = KeyAssignment{candidate.values(key_vars)};
	return finish(AttackStatus::KeyFound);
}

Netlist generate_conditional_netlist(const Netlist &locked,
				     const std::vector<std::string> &split_ports,
				     const std::string &b)
{
	return cofactor(locked, SplitCondition{split_ports, b});
}

MultiKeyResult split_attack(const Netlist &locked, const Oracle &oracle,
			    std::size_t splitting_effort, std::size_t workers,
			    const AttackLimits &limits)
{
	if (workers == 0)
		throw NetlistError("at least one worker is required");
	if (!locked.is_locked())
		throw NetlistError("netlist '" + locked.name() + "' has no key inputs to attack");
	if (oracle.input_ports().size() != locked.input_count())
		throw NetlistError("oracle has " + std::to_string(oracle.input_ports().size()) +
				   " inputs but the locked circuit has " +
				   std::to_string(locked.input_count()));

	MultiKeyResult r;
	r.splitting_effort = splitting_effort;
	r.split_ports = select_split_inputs(locked, splitting_effort);

	const std::size_t tasks = std::size_t{1} << splitting_effort;
	std::vector<std::optional<std::pair<SplitCondition, AttackResult>>> slots(tasks);
	std::atomic<std::size_t> cursor{0};
	std::mutex error_mutex;
	std::exception_ptr error;

	const auto run_task = [&](std::size_t b) {
		SplitCondition cond{r.split_ports,
				    bits_to_string(bits_from_uint(b, splitting_effort))};
		const Netlist conditional =
		    generate_conditional_netlist(locked, r.split_ports, cond.value);
		const ConditionalOracle view(oracle, cond);
		AttackResult res = sat_attack(conditional, view, limits);
		slots[b].emplace(std::move(cond), std::move(res));
	};
	const auto pump = [&] {
		while (true) {
			const std::size_t b = cursor.fetch_add(1);
			if (b >= tasks)
				return;
			try {
				run_task(b);
			} catch (...) {
				const std::lock_guard<std::mutex> lock(error_mutex);
				if (!error)
					error = std::current_exception();
				cursor.store(tasks);
				return;
			}
		}
	};

	const std::size_t pool = std::min(workers, tasks);
	if (pool <= 1) {
		pump();
	} else {
		std::vector<std::thread> threads;
		threads.reserve(pool);
		for (std::size_t t = 0; t < pool; t++)
			threads.emplace_back(pump);
		for (auto &t : threads)
			t.join();
	}
	if (error)
		std::rethrow_exception(error);

	r.entries.reserve(tasks);
	std::chrono::nanoseconds total{0};
	for (auto &slot : slots) {
		r.entries.push_back(std::move(*slot));
		const auto wall = r.entries.back().second.wall_time;
		total += wall;
		if (r.entries.size() == 1) {
			r.wall_min = r.wall_max = wall;
		} else {
			r.wall_min = std::min(r.wall_min, wall);
			r.wall_max = std::max(r.wall_max, wall);
		}
	}
	r.wall_mean = total / static_cast<std::int64_t>(tasks);
	return r;
}

Netlist recombine(const Netlist &locked, const MultiKeyResult &result)
{
	const std::size_t tasks = std::size_t{1} << result.splitting_effort;
	if (result.split_ports.size() != result.splitting_effort)
		throw NetlistError("split port list does not match the splitting effort");
	if (result.entries.size() != tasks)
		throw NetlistError("expected " + std::to_string(tasks) + " entries, found " +
				   std::to_string(result.entries.size()));
	for (const auto &p : result.split_ports) {
		if (!locked.is_input(p))
			throw NetlistError("split port '" + p + "' is not an input of '" +
					   locked.name() + "'");
	}
	for (std::size_t b = 0; b < tasks; b++) {
		const auto &[cond, res] = result.entries[b];
		// NoKeyInfluence entries pass: any key, including their default
		// all-zeros one, is correct for a cofactor the key cannot touch.
		if (res.status == AttackStatus::Timeout)
			throw NetlistError("entry " + std::to_string(b) + " has status '" +
					   std::string(to_string(res.status)) + "'");
		if (res.key.bits.size() != locked.key_count())
			throw NetlistError("entry " + std::to_string(b) + " key width " +
					   std::to_string(res.key.bits.size()) + ", expected " +
					   std::to_string(locked.key_count()));
		if (cond.ports != result.split_ports ||
		    cond.value != bits_to_string(bits_from_uint(b, result.splitting_effort)))
			throw NetlistError("entries are not in ascending condition order");
	}

	std::unordered_set<std::string> used;
	for (std::size_t id = 0; id < locked.net_count(); id++)
		used.insert(locked.net_name(id));
	const auto fresh = [&used](const std::string &base) {
		std::string name = base;
		for (int i = 0; used.count(name); i++)
			name = base + "_" + std::to_string(i);
		used.insert(name);
		return name;
	};

	std::vector<Gate> gates;
	if (result.splitting_effort == 0) {
		const KeyAssignment &key = result.entries[0].second.key;
		for (std::size_t j = 0; j < locked.key_count(); j++) {
			gates.push_back({locked.key_inputs()[j],
					 key.bits[j] ? GateKind::Const1 : GateKind::Const0,
					 {}});
		}
	} else {
		const std::string zero = fresh("mux$zero");
		const std::string one = fresh("mux$one");
		gates.push_back({zero, GateKind::Const0, {}});
		gates.push_back({one, GateKind::Const1, {}});

		for (std::size_t j = 0; j < locked.key_count(); j++) {
			int counter = 0;
			std::function<std::string(std::size_t, std::size_t, std::size_t)> build =
			    [&](std::size_t lo, std::size_t hi, std::size_t depth) -> std::string {
				if (hi - lo == 1)
					return result.entries[lo].second.key.bits[j] ? one : zero;
				const std::size_t mid = lo + (hi - lo) / 2;
				const std::string low = build(lo, mid, depth + 1);
				const std::string high = build(mid, hi, depth + 1);
				const std::string out =
				    depth == 0 ? locked.key_inputs()[j]
					       : fresh("mux$k" + std::to_string(j) + "n" +
						       std::to_string(counter++));
				gates.push_back({out,
						 GateKind::Mux,
						 {result.split_ports[depth], low, high}});
				return out;
			};
			build(0, tasks, 0);
		}
	}
	gates.insert(gates.end(), locked.gates().begin(), locked.gates().end());
	return Netlist(locked.name() + "_recombined", locked.inputs(), {}, locked.outputs(),
		       std::move(gates));
}

VerifyResult verify_equivalence(const Netlist &a, const Netlist &b, VerifyMode mode)
{
	if (a.is_locked() || b.is_locked())
		throw NetlistError("equivalence checking requires unlocked netlists");
	if (a.inputs() != b.inputs() || a.outputs() != b.outputs())
		throw NetlistError("netlists '" + a.name() + "' and '" + b.name() +
				   "' have different port signatures");

	if (mode == VerifyMode::Auto)
		mode = a.input_count() <= 12 ? VerifyMode::Exhaustive : VerifyMode::SatMiter;

	if (mode == VerifyMode::Exhaustive) {
		if (a.input_count() > 20)
			throw NetlistError("exhaustive equivalence is limited to 20 inputs");
		for (std::uint64_t v = 0; v < (std::uint64_t{1} << a.input_count()); v++) {
			const InputPattern in{bits_from_uint(v, a.input_count())};
			if (a.simulate(in) != b.simulate(in))
				return {false, in};
		}
		return {true, std::nullopt};
	}

	if (a.output_count() == 0)
		return {true, std::nullopt};

	// Hash-consed encoding collapses whatever the two circuits share
	// structurally, which is most of them when b is a relocked or unlocked
	// variant of a; the solver then only reasons about the genuinely
	// different logic.
	SolverSession s;
	s.encode_shared(a, 0);
	std::vector<NetPin> pins;
	pins.reserve(a.input_count());
	for (const auto &port : a.inputs())
		pins.push_back({port, s.var(0, port)});
	s.encode_shared(b, 1, pins);

	std::vector<int> any_diff;
	for (std::size_t j = 0; j < a.output_count(); j++) {
		const int oa = s.var(0, a.outputs()[j]);
		const int ob = s.var(1, b.outputs()[j]);
		const int d = s.add_variable();
		s.add_clause({-oa, -ob, -d});
		s.add_clause({oa, ob, -d});
		s.add_clause({-oa, ob, d});
		s.add_clause({oa, -ob, d});
		any_diff.push_back(d);
	}
	s.add_clause(any_diff);

	if (!s.solve())
		return {true, std::nullopt};

	std::vector<int> in_vars;
	for (const auto &port : a.inputs())
		in_vars.push_back(s.var(0, port));
	const InputPattern witness{s.values(in_vars)};
	if (a.simulate(witness) == b.simulate(witness))
		throw NetlistError("solver produced a witness that simulation rejects");
	return {false, witness};
}

} // namespace splitlock
