#include "doctest.h"

#include "splitlock/bench_io.hpp"
#include "splitlock/locking.hpp"
#include "splitlock/satcore.hpp"
#include "splitlock/solver.hpp"
#include "splitlock/transform.hpp"
#include "support/helpers.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <random>
#include <set>
#include <sstream>

using namespace splitlock;
using testsupport::exhaustive_equivalent;
using testsupport::random_netlist;
using testsupport::unpack_bits;

namespace {

struct RandomCnf {
	int vars = 0;
	std::vector<std::vector<int>> clauses;
};

RandomCnf random_cnf(std::uint64_t seed, int max_vars = 10, int max_clauses = 45)
{
	std::mt19937_64 rng(seed);
	RandomCnf f;
	f.vars = 1 + static_cast<int>(rng() % max_vars);
	const auto n_clauses = 1 + rng() % static_cast<std::uint64_t>(max_clauses);
	for (std::uint64_t c = 0; c < n_clauses; c++) {
		const auto len = 1 + rng() % 4;
		std::vector<int> clause;
		for (std::uint64_t i = 0; i < len; i++) {
			const int v = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(f.vars));
			clause.push_back(rng() % 2 ? v : -v);
		}
		f.clauses.push_back(std::move(clause));
	}
	return f;
}

bool satisfies(const std::vector<std::vector<int>> &clauses, std::uint64_t bits)
{
	for (const auto &clause : clauses) {
		bool sat = false;
		for (const int l : clause)
			sat = sat || (((bits >> (std::abs(l) - 1)) & 1) == (l > 0 ? 1u : 0u));
		if (!sat)
			return false;
	}
	return true;
}

std::optional<std::uint64_t> brute_force(const RandomCnf &f, const std::vector<int> &forced = {})
{
	for (std::uint64_t m = 0; m < (1ull << f.vars); m++) {
		bool ok = satisfies(f.clauses, m);
		for (const int a : forced)
			ok = ok && ((m >> (std::abs(a) - 1)) & 1) == (a > 0 ? 1u : 0u);
		if (ok)
			return m;
	}
	return std::nullopt;
}

sat::Solver make_solver(const RandomCnf &f)
{
	sat::Solver s;
	for (int i = 0; i < f.vars; i++)
		s.new_var();
	for (const auto &clause : f.clauses) {
		std::vector<sat::Lit> lits;
		for (const int l : clause)
			lits.push_back(sat::mk_lit(std::abs(l) - 1, l < 0));
		s.add_clause(std::move(lits));
	}
	return s;
}

bool model_satisfies(const sat::Solver &s, const RandomCnf &f)
{
	std::uint64_t bits = 0;
	for (int v = 0; v < f.vars; v++) {
		if (s.model_value(v) == sat::Value::True)
			bits |= 1ull << v;
	}
	return satisfies(f.clauses, bits);
}

Netlist c17()
{
	return parse_bench(std::string("INPUT(1)\nINPUT(2)\nINPUT(3)\nINPUT(6)\nINPUT(7)\n"
				       "OUTPUT(22)\nOUTPUT(23)\n"
				       "10 = NAND(1, 3)\n11 = NAND(3, 6)\n16 = NAND(2, 11)\n"
				       "19 = NAND(11, 7)\n22 = NAND(10, 16)\n23 = NAND(16, 19)\n"),
			   "c17");
}

Netlist tiny3()
{
	return parse_bench(std::string("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\n"
				       "u = AND(a, b)\ny = XOR(u, c)\n"),
			   "tiny3");
}

Netlist sarlocked_tiny3(std::uint64_t kstar = 5)
{
	LockSpec spec;
	spec.scheme = LockScheme::Sarlock;
	spec.key_size = 3;
	spec.correct_key = KeyAssignment{unpack_bits(kstar, 3)};
	return lock_sarlock(tiny3(), spec);
}

// Assumption literals pinning a miter half's key variables to a value.
std::vector<int> key_probe(const std::vector<int> &key_vars, std::uint64_t key)
{
	const auto bits = unpack_bits(key, key_vars.size());
	std::vector<int> out;
	for (std::size_t i = 0; i < key_vars.size(); i++)
		out.push_back(bits[i] ? key_vars[i] : -key_vars[i]);
	return out;
}

std::vector<int> port_probe(const SolverSession &s, int instance,
			    const std::vector<std::string> &ports, std::uint64_t value)
{
	const auto bits = unpack_bits(value, ports.size());
	std::vector<int> out;
	for (std::size_t i = 0; i < ports.size(); i++) {
		const int v = s.var(instance, ports[i]);
		out.push_back(bits[i] ? v : -v);
	}
	return out;
}

// Clause lists compared as sets, ignoring literal and clause order.
std::set<std::vector<int>> clause_set(const std::vector<std::vector<int>> &clauses)
{
	std::set<std::vector<int>> out;
	for (auto clause : clauses) {
		std::sort(clause.begin(), clause.end());
		out.insert(std::move(clause));
	}
	return out;
}

} // namespace

TEST_CASE("solver agrees with exhaustive search on random formulas")
{
	for (std::uint64_t seed = 0; seed < 300; seed++) {
		const auto f = random_cnf(seed);
		auto s = make_solver(f);
		const bool sat = s.solve();
		CHECK(sat == brute_force(f).has_value());
		if (sat)
			CHECK(model_satisfies(s, f));
	}
}

TEST_CASE("solving under assumptions matches hardwired bits")
{
	for (std::uint64_t seed = 0; seed < 200; seed++) {
		const auto f = random_cnf(seed + 1000);
		auto s = make_solver(f);

		std::mt19937_64 rng(seed);
		std::vector<int> forced;
		std::vector<sat::Lit> assumptions;
		const auto count = rng() % 4;
		for (std::uint64_t i = 0; i < count; i++) {
			const int v = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(f.vars));
			const bool neg = rng() % 2;
			forced.push_back(neg ? -v : v);
			assumptions.push_back(sat::mk_lit(v - 1, neg));
		}

		CHECK(s.solve(assumptions) == brute_force(f, forced).has_value());
		// The solver stays usable for the unrestricted question.
		CHECK(s.solve() == brute_force(f).has_value());
	}
}

TEST_CASE("clauses added between solves keep narrowing the instance")
{
	for (std::uint64_t seed = 0; seed < 100; seed++) {
		const auto f = random_cnf(seed + 2000, 8, 30);
		RandomCnf partial{f.vars, {}};
		sat::Solver s;
		for (int i = 0; i < f.vars; i++)
			s.new_var();

		for (std::size_t c = 0; c < f.clauses.size(); c++) {
			std::vector<sat::Lit> lits;
			for (const int l : f.clauses[c])
				lits.push_back(sat::mk_lit(std::abs(l) - 1, l < 0));
			s.add_clause(std::move(lits));
			partial.clauses.push_back(f.clauses[c]);
			if (c % 7 == 3 || c + 1 == f.clauses.size()) {
				const bool sat = s.solve();
				CHECK(sat == brute_force(partial).has_value());
				if (sat)
					CHECK(model_satisfies(s, partial));
			}
		}
	}
}

TEST_CASE("identical runs produce identical models and statistics")
{
	const auto f = random_cnf(42, 12, 60);
	auto a = make_solver(f);
	auto b = make_solver(f);
	const bool sat_a = a.solve();
	const bool sat_b = b.solve();
	CHECK(sat_a == sat_b);
	CHECK(a.conflicts() == b.conflicts());
	CHECK(a.decisions() == b.decisions());
	CHECK(a.propagations() == b.propagations());
	if (sat_a) {
		for (int v = 0; v < f.vars; v++)
			CHECK(a.model_value(v) == b.model_value(v));
	}
}

TEST_CASE("root-level contradictions poison the solver")
{
	sat::Solver s;
	const auto x = s.new_var();
	CHECK(s.add_clause({sat::mk_lit(x)}));
	CHECK_FALSE(s.add_clause({sat::mk_lit(x, true)}));
	CHECK_FALSE(s.okay());
	CHECK_FALSE(s.solve());
}

TEST_CASE("tautologies and duplicate literals are absorbed")
{
	sat::Solver s;
	const auto x = s.new_var();
	const auto y = s.new_var();
	CHECK(s.add_clause({sat::mk_lit(x), sat::mk_lit(x, true)})); // always true
	CHECK(s.add_clause({sat::mk_lit(y), sat::mk_lit(y)}));	     // collapses to a unit
	CHECK(s.solve());
	CHECK(s.model_value(y) == sat::Value::True);
	CHECK(s.solve({sat::mk_lit(y, true)}) == false);
	CHECK(s.okay()); // failing assumptions do not poison the instance
}

TEST_CASE("and gate emits the textbook clause triple")
{
	const auto n = parse_bench(std::string("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n"));
	CnfFormula f;
	VarMap map;
	tseitin_encode(n, 0, f, map);

	CHECK(f.variable_count == 3);
	CHECK(map.var(0, "a") == 1);
	CHECK(map.var(0, "b") == 2);
	CHECK(map.var(0, "y") == 3);
	CHECK(clause_set(f.clauses) ==
	      clause_set({{-1, -2, 3}, {1, -3}, {2, -3}}));
}

TEST_CASE("every gate kind encodes its truth table")
{
	const char *bodies[] = {
	    "y = AND(a, b, c)\n",  "y = NAND(a, b, c)\n", "y = OR(a, b, c)\n",
	    "y = NOR(a, b, c)\n",  "y = XOR(a, b, c)\n",  "y = XNOR(a, b, c)\n",
	    "y = NOT(a)\n",	   "y = BUFF(a)\n",	  "y = CONST0()\n",
	    "y = CONST1()\n",	   "y = MUX(a, b, c)\n",
	};
	for (const char *body : bodies) {
		const auto n = parse_bench(std::string("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\n") +
					   body);
		SolverSession s;
		s.encode(n, 0);
		for (std::uint64_t v = 0; v < 8; v++) {
			REQUIRE(s.solve(port_probe(s, 0, n.inputs(), v)));
			const auto expected = n.simulate(InputPattern{unpack_bits(v, 3)});
			CHECK(s.value(s.var(0, "y")) == expected[0]);
		}
	}
}

TEST_CASE("wide parity chains add auxiliaries outside the map")
{
	const auto n = parse_bench(std::string("INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nINPUT(e)\n"
					       "OUTPUT(y)\ny = XOR(a, b, c, d, e)\n"));
	CnfFormula f;
	VarMap map;
	tseitin_encode(n, 3, f, map);
	// 6 nets plus 3 chain auxiliaries for the 5-wide parity.
	CHECK(f.variable_count == 9);
	CHECK(map.var(3, "y") <= 6);

	SolverSession s;
	s.encode(n, 0);
	for (std::uint64_t v = 0; v < 32; v++) {
		REQUIRE(s.solve(port_probe(s, 0, n.inputs(), v)));
		CHECK(s.value(s.var(0, "y")) == n.simulate(InputPattern{unpack_bits(v, 5)})[0]);
	}
}

TEST_CASE("encoded instances reproduce simulation bit for bit")
{
	for (std::uint64_t seed = 0; seed < 30; seed++) {
		const auto n = random_netlist(seed + 500, 5, 2, 14, 3);
		SolverSession s;
		s.encode(n, 7);
		for (std::uint64_t v = 0; v < (1ull << 7); v++) {
			const auto in = unpack_bits(v >> 2, 5);
			const auto key = unpack_bits(v & 3, 2);
			auto assumptions = port_probe(s, 7, n.inputs(), v >> 2);
			const auto key_lits = port_probe(s, 7, n.key_inputs(), v & 3);
			assumptions.insert(assumptions.end(), key_lits.begin(), key_lits.end());
			REQUIRE(s.solve(assumptions));

			const auto expected = n.simulate(InputPattern{in}, KeyAssignment{key});
			for (std::size_t j = 0; j < n.output_count(); j++)
				CHECK(s.value(s.var(7, n.outputs()[j])) == expected[j]);
		}
	}
}

TEST_CASE("one model per input assignment: the encoding is functional")
{
	const auto n = random_netlist(77, 4, 0, 12, 2);
	SolverSession s;
	s.encode(n, 0);
	std::vector<int> projection = s.vars().vars(0, n.inputs());
	const auto out_vars = s.vars().vars(0, n.outputs());
	projection.insert(projection.end(), out_vars.begin(), out_vars.end());

	int models = 0;
	while (s.solve()) {
		std::vector<int> blocking;
		for (const int v : projection)
			blocking.push_back(s.value(v) ? -v : v);
		s.add_clause(blocking);
		models++;
		REQUIRE(models <= 16);
	}
	CHECK(models == 16);
}

TEST_CASE("instances are independent unless nets are pinned")
{
	const auto n = parse_bench(std::string("INPUT(a)\nOUTPUT(y)\ny = BUFF(a)\n"));

	SolverSession loose;
	loose.encode(n, 0);
	loose.encode(n, 1);
	CHECK(loose.var(0, "a") != loose.var(1, "a"));
	const std::vector<int> split = {loose.var(0, "a"), -loose.var(1, "a")};
	REQUIRE(loose.solve(split));
	CHECK(loose.value(loose.var(0, "y")));
	CHECK_FALSE(loose.value(loose.var(1, "y")));

	SolverSession shared;
	shared.encode(n, 0);
	shared.encode(n, 1, {{"a", shared.var(0, "a")}});
	CHECK(shared.var(0, "a") == shared.var(1, "a"));
	CHECK_FALSE(shared.solve({shared.var(0, "y"), -shared.var(1, "y")}));
}

TEST_CASE("hash-consed encoding reproduces simulation bit for bit")
{
	for (std::uint64_t seed = 0; seed < 30; seed++) {
		const auto n = random_netlist(seed + 900, 5, 2, 14, 3);
		SolverSession s;
		s.encode_shared(n, 7);
		for (std::uint64_t v = 0; v < (1ull << 7); v++) {
			const auto in = unpack_bits(v >> 2, 5);
			const auto key = unpack_bits(v & 3, 2);
			auto assumptions = port_probe(s, 7, n.inputs(), v >> 2);
			const auto key_lits = port_probe(s, 7, n.key_inputs(), v & 3);
			assumptions.insert(assumptions.end(), key_lits.begin(), key_lits.end());
			REQUIRE(s.solve(assumptions));

			const auto expected = n.simulate(InputPattern{in}, KeyAssignment{key});
			for (std::size_t j = 0; j < n.output_count(); j++)
				CHECK(s.value(s.var(7, n.outputs()[j])) == expected[j]);
		}
	}
}

TEST_CASE("hash-consing collapses an identical second instance completely")
{
	const auto n = random_netlist(4242, 6, 2, 40, 3);
	SolverSession s;
	s.encode_shared(n, 0);
	const std::size_t before = s.clause_count();
	const int vars_before = s.variable_count();

	std::vector<NetPin> pins;
	for (const auto &p : n.inputs())
		pins.push_back({p, s.var(0, p)});
	for (const auto &p : n.key_inputs())
		pins.push_back({p, s.var(0, p)});
	s.encode_shared(n, 1, pins);

	CHECK(s.clause_count() == before);
	CHECK(s.variable_count() == vars_before);
	for (const auto &o : n.outputs())
		CHECK(s.var(0, o) == s.var(1, o));
}

TEST_CASE("buffers alias and commuted parity operands share one gate")
{
	const auto n = parse_bench(std::string("INPUT(a)\nINPUT(b)\nINPUT(c)\n"
					       "OUTPUT(y)\nOUTPUT(z)\nOUTPUT(w)\n"
					       "y = XOR(a, b, c)\n"
					       "z = XOR(c, b, a)\n"
					       "w = BUFF(a)\n"));
	SolverSession s;
	s.encode_shared(n, 0);
	CHECK(s.var(0, "y") == s.var(0, "z"));
	CHECK(s.var(0, "w") == s.var(0, "a"));
}

TEST_CASE("pin and instance bookkeeping is validated")
{
	const auto n = parse_bench(std::string("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\n"));
	SolverSession s;
	s.encode(n, 0);
	CHECK_THROWS_AS(s.encode(n, 0), NetlistError); // instance id reuse
	CHECK_THROWS_AS(s.encode(n, 1, {{"ghost", 1}}), NetlistError);
	CHECK_THROWS_AS(s.encode(n, 2, {{"a", 99}}), NetlistError);
	CHECK_THROWS_AS(s.encode(n, 3, {{"a", 1}, {"a", 2}}), NetlistError);
	CHECK(s.vars().find(1, "a") == std::nullopt);
	CHECK(s.vars().find(0, "ghost") == std::nullopt);
	CHECK_THROWS_AS(s.var(0, "ghost"), NetlistError);
}

TEST_CASE("session validates clauses and dumps dimacs when recording")
{
	SolverSession s;
	s.record_clauses(true);
	const int a = s.add_variable();
	const int b = s.add_variable();
	s.add_clause({a, -b});
	s.add_clause({b});
	CHECK(s.clause_count() == 2);
	CHECK_THROWS_AS(s.add_clause({}), NetlistError);
	CHECK_THROWS_AS(s.add_clause({3}), NetlistError);
	CHECK_THROWS_AS(s.solve({99}), NetlistError);

	std::ostringstream out;
	s.write_dimacs(out);
	CHECK(out.str() == "p cnf 2 2\n1 -2 0\n2 0\n");

	REQUIRE(s.solve());
	CHECK(s.values({a, b}) == std::vector<bool>{true, true});
}

TEST_CASE("miter models are genuine distinguishing patterns")
{
	LockSpec spec;
	spec.scheme = LockScheme::Xor;
	spec.key_size = 4;
	spec.correct_key = KeyAssignment{{true, false, true, true}};
	spec.rng_seed = 2;
	const auto locked = lock_xor(c17(), spec);

	auto m = build_miter(locked);
	REQUIRE(m.session.solve());
	const InputPattern dip{m.session.values(m.inputs)};
	const KeyAssignment k1{m.session.values(m.key1)};
	const KeyAssignment k2{m.session.values(m.key2)};
	CHECK(k1.bits != k2.bits);
	CHECK(locked.simulate(dip, k1) != locked.simulate(dip, k2));
	CHECK(m.session.value(m.diff));
}

TEST_CASE("a key with no influence leaves nothing to distinguish")
{
	// keyinput0 feeds an even number of XOR legs, cancelling itself.
	const auto inert = parse_bench(
	    std::string("INPUT(a)\nINPUT(keyinput0)\nOUTPUT(y)\n"
			"y = XOR(a, keyinput0, keyinput0)\n"));
	auto m = build_miter(inert);
	CHECK_FALSE(m.session.solve());

	const auto unused = parse_bench(
	    std::string("INPUT(a)\nINPUT(keyinput0)\nOUTPUT(y)\ny = BUFF(a)\n"));
	auto m2 = build_miter(unused);
	CHECK_FALSE(m2.session.solve());
}

TEST_CASE("unlocked circuits cannot form a miter")
{
	CHECK_THROWS_AS(build_miter(c17()), NetlistError);
}

TEST_CASE("a recorded pattern eliminates exactly the keys that disagree")
{
	const auto original = tiny3();
	const auto locked = sarlocked_tiny3();
	auto m = build_miter(locked);

	// For this point-function lock, input slice i errs only under key i,
	// so recording pattern i should eliminate key i alone.
	add_dip_constraint(m, InputPattern{unpack_bits(0, 3)},
			   original.simulate(InputPattern{unpack_bits(0, 3)}));
	for (std::uint64_t k = 0; k < 8; k++)
		CHECK(m.session.solve(key_probe(m.key1, k)) == (k != 0));

	add_dip_constraint(m, InputPattern{unpack_bits(1, 3)},
			   original.simulate(InputPattern{unpack_bits(1, 3)}));
	for (std::uint64_t k = 0; k < 8; k++)
		CHECK(m.session.solve(key_probe(m.key1, k)) == (k != 0 && k != 1));
	CHECK(m.dip_count == 2);
}

TEST_CASE("re-recording a pattern is sound and keeps the database growing")
{
	const auto original = tiny3();
	auto m = build_miter(sarlocked_tiny3());

	const InputPattern dip{unpack_bits(0, 3)};
	const auto oracle_out = original.simulate(dip);
	add_dip_constraint(m, dip, oracle_out);
	const auto clauses_once = m.session.clause_count();
	add_dip_constraint(m, dip, oracle_out);
	CHECK(m.session.clause_count() > clauses_once);
	CHECK(m.dip_count == 2);

	for (std::uint64_t k = 0; k < 8; k++)
		CHECK(m.session.solve(key_probe(m.key1, k)) == (k != 0));
}

TEST_CASE("pattern and oracle widths are checked")
{
	auto m = build_miter(sarlocked_tiny3());
	CHECK_THROWS_AS(add_dip_constraint(m, InputPattern{{true}}, OutputPattern{true}),
			NetlistError);
	CHECK_THROWS_AS(
	    add_dip_constraint(m, InputPattern{unpack_bits(0, 3)}, OutputPattern{true, false}),
	    NetlistError);
}

TEST_CASE("the refinement loop terminates with only correct keys viable")
{
	struct Case {
		Netlist original;
		Netlist locked;
		std::size_t expected_iterations; // 0 = no fixed expectation
	};
	LockSpec xor_spec;
	xor_spec.scheme = LockScheme::Xor;
	xor_spec.key_size = 2;
	xor_spec.correct_key = KeyAssignment{{false, true}};
	xor_spec.rng_seed = 3;

	// The point-function lock needs one pattern per wrong key: 2^3 - 1.
	Case cases[] = {
	    {tiny3(), lock_xor(tiny3(), xor_spec), 0},
	    {tiny3(), sarlocked_tiny3(), 7},
	};

	for (const auto &c : cases) {
		auto m = build_miter(c.locked);
		std::vector<InputPattern> trace;
		while (m.session.solve()) {
			REQUIRE(trace.size() < 64);
			const InputPattern dip{m.session.values(m.inputs)};
			add_dip_constraint(m, dip, c.original.simulate(dip));
			trace.push_back(dip);
		}
		if (c.expected_iterations > 0)
			CHECK(trace.size() == c.expected_iterations);

		const std::size_t kbits = c.locked.key_count();
		std::size_t survivors = 0;
		for (std::uint64_t k = 0; k < (1ull << kbits); k++) {
			const KeyAssignment key{unpack_bits(k, kbits)};
			bool viable = true;
			for (const auto &dip : trace)
				viable = viable &&
					 c.locked.simulate(dip, key) == c.original.simulate(dip);
			if (!viable)
				continue;
			survivors++;
			CHECK(exhaustive_equivalent(apply_key(c.locked, key), c.original));
		}
		CHECK(survivors >= 1);
	}
}
