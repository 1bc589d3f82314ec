#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "splitlock/netlist.hpp"
#include "splitlock/solver.hpp"

namespace splitlock {

/// Clause database in DIMACS conventions: variables are 1-based, a negative
/// literal negates its variable, no clause is empty.
struct CnfFormula {
	int variable_count = 0;
	std::vector<std::vector<int>> clauses;
};

/// Maps (circuit instance, net name) pairs to CNF variables. Multiple
/// encoded instances of the same netlist coexist in one formula; the
/// instance id keeps their nets apart. The mapping is injective unless two
/// nets were deliberately pinned to one variable.
class VarMap {
      public:
	/// Registered variable for a net; throws NetlistError if absent.
	int var(int instance, std::string_view net) const;

	std::optional<int> find(int instance, std::string_view net) const;

	/// Variables for a list of nets of one instance, in list order.
	std::vector<int> vars(int instance, const std::vector<std::string> &nets) const;

	void bind(int instance, std::string net, int variable);

      private:
	std::unordered_map<int, std::unordered_map<std::string, int>> by_instance_;
};

/// Pins a net of the instance being encoded to an existing CNF variable
/// instead of a fresh one. Used to share primary inputs between miter halves
/// and to tie key ports of circuit copies together.
struct NetPin {
	std::string net;
	int variable;
};

/// Incremental solver facade: owns the solver and the net-to-variable map,
/// grows the clause database monotonically, and answers repeated solve()
/// calls under different assumptions. Optionally mirrors every clause for
/// DIMACS export (off by default; the mirror doubles clause memory).
class SolverSession {
      public:
	/// Fresh 1-based CNF variable.
	int add_variable();

	int variable_count() const { return solver_.var_count(); }

	/// dimacs_lits uses signed 1-based literals. Empty clauses are
	/// rejected with NetlistError.
	void add_clause(const std::vector<int> &dimacs_lits);

	/// Tseitin-encodes one instance of a netlist into the session,
	/// registering every port and gate output net in vars().
	void encode(const Netlist &n, int instance, const std::vector<NetPin> &pinned = {});

	/// Like encode(), but hash-conses gates: a gate whose kind and operand
	/// variables (operands sorted for commutative kinds) match one already
	/// encoded through this method — in any instance — reuses that gate's
	/// output variable instead of re-encoding, and BUF gates alias their
	/// operand outright. Wide XOR/XNOR gates are decomposed into shared
	/// two-input steps. Encoding two structurally similar circuits this way
	/// collapses their common logic to one copy, which keeps equivalence
	/// checks of near-identical netlists cheap.
	void encode_shared(const Netlist &n, int instance, const std::vector<NetPin> &pinned = {});

	/// True = satisfiable under the assumptions (signed literals).
	bool solve(const std::vector<int> &assumptions = {});

	/// Model value of a variable after a satisfiable solve().
	bool value(int variable) const;

	std::vector<bool> values(const std::vector<int> &variables) const;

	const VarMap &vars() const { return map_; }
	int var(int instance, std::string_view net) const { return map_.var(instance, net); }

	/// When enabled, subsequently added clauses are recorded and
	/// write_dimacs() can dump them.
	void record_clauses(bool on) { record_ = on; }
	void write_dimacs(std::ostream &out) const;

	std::uint64_t solver_conflicts() const { return solver_.conflicts(); }
	std::uint64_t solver_decisions() const { return solver_.decisions(); }
	std::uint64_t solver_propagations() const { return solver_.propagations(); }
	std::size_t clause_count() const { return clause_count_; }

      private:
	struct GateSig {
		GateKind kind;
		std::vector<int> operands;

		bool operator==(const GateSig &) const = default;
	};
	struct GateSigHash {
		std::size_t operator()(const GateSig &sig) const
		{
			std::size_t h = static_cast<std::size_t>(sig.kind) * 0x9e3779b97f4a7c15ull;
			for (const int v : sig.operands)
				h = (h ^ static_cast<std::size_t>(v)) * 0x100000001b3ull;
			return h;
		}
	};

	int shared_gate(GateKind kind, std::vector<int> operands, CnfFormula &f);

	sat::Solver solver_;
	VarMap map_;
	std::vector<std::vector<int>> recorded_;
	std::unordered_map<GateSig, int, GateSigHash> shared_;
	std::size_t clause_count_ = 0;
	bool record_ = false;
};

/// Appends the Tseitin encoding of `n` to `formula`, registering nets in
/// `map` under `instance`. Pinned nets reuse the given variables; all other
/// ports and gate outputs get fresh ones. Auxiliary variables introduced for
/// wide XOR/XNOR chains stay out of the map.
void tseitin_encode(const Netlist &n, int instance, CnfFormula &formula, VarMap &map,
		    const std::vector<NetPin> &pinned = {});

/// Two copies of a locked circuit sharing primary inputs, with independent
/// key variables and the constraint that some output differs. Satisfying
/// models are distinguishing input patterns; refining with observed oracle
/// outputs via add_dip_constraint drives the attack loop.
struct Miter {
	explicit Miter(Netlist locked_circuit) : locked(std::move(locked_circuit)) {}

	SolverSession session;
	std::vector<int> inputs; // shared, input port order
	std::vector<int> key1;
	std::vector<int> key2;
	std::vector<int> outputs1;
	std::vector<int> outputs2; // equals outputs1 where the key cannot reach
	int diff = 0; // variable asserted true: at least one output pair differs

	Netlist locked;
	int next_instance = 0;
	std::size_t dip_count = 0;
};

/// Instance ids 0 and 1 are the two miter halves. The first half encodes the
/// whole circuit; the second re-encodes only the fan-out cone of the key
/// ports against fresh key variables and shares every other net with the
/// first half, so the formula grows with the key-affected logic rather than
/// with the whole circuit. Output pairs outside that cone share one variable
/// and get no difference detector; when no output lies in the cone the
/// session is unsatisfiable outright. Throws NetlistError when the circuit
/// has no key inputs.
Miter build_miter(const Netlist &locked);

/// Constrains both key vectors of the miter to reproduce `oracle_out` on
/// input `dip`: the locked circuit is cofactored at the pattern, simplified,
/// and the resulting key-input-only circuit is encoded once per miter half
/// with its key nets pinned to that half's key variables. Re-adding the same
/// pattern is sound (the added clauses are implied by the first copy).
void add_dip_constraint(Miter &m, const InputPattern &dip, const OutputPattern &oracle_out);

} // namespace splitlock
