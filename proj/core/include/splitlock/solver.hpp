#pragma once

#include <cstdint>
#include <vector>

namespace splitlock::sat {

using Var = int;

/// Literal packed as 2*var + sign (sign 1 = negated), MiniSat style.
struct Lit {
	int x = -2;

	bool operator==(const Lit &) const = default;
};

inline Lit mk_lit(Var v, bool sign = false) { return Lit{v + v + (sign ? 1 : 0)}; }
inline Lit operator~(Lit p) { return Lit{p.x ^ 1}; }
inline bool sign(Lit p) { return p.x & 1; }
inline Var var(Lit p) { return p.x >> 1; }
inline constexpr Lit lit_undef{-2};

enum class Value : std::uint8_t { False = 0, True = 1, Undef = 2 };

inline Value operator^(Value v, bool s)
{
	return v == Value::Undef ? v : static_cast<Value>(static_cast<std::uint8_t>(v) ^ (s ? 1 : 0));
}

/// Conflict-driven clause-learning solver: two-watched-literal propagation,
/// VSIDS decisions with phase saving, Luby restarts, first-UIP learning with
/// basic clause minimization, learnt-clause reduction and incremental solving
/// under assumptions. Fully deterministic: no randomized decisions, so equal
/// clause/assumption sequences produce equal runs.
class Solver {
      public:
	Var new_var();
	int var_count() const { return static_cast<int>(assigns_.size()); }

	/// False means the formula is already unsatisfiable at the root.
	bool add_clause(std::vector<Lit> lits);

	bool okay() const { return ok_; }

	/// True = SAT under the assumptions; the model is then available.
	bool solve(const std::vector<Lit> &assumptions = {});

	/// Model value of a variable after a satisfiable solve().
	Value model_value(Var v) const { return model_[static_cast<std::size_t>(v)]; }

	std::uint64_t conflicts() const { return conflicts_; }
	std::uint64_t decisions() const { return decisions_; }
	std::uint64_t propagations() const { return propagations_; }

      private:
	struct Clause {
		std::vector<Lit> lits;
		double activity = 0.0;
		bool learnt = false;
		bool dead = false;
	};
	struct Watcher {
		int cref;
		Lit blocker;
	};

	static constexpr int kNoReason = -1;

	Value value(Lit p) const { return assigns_[static_cast<std::size_t>(var(p))] ^ sign(p); }
	Value value_var(Var v) const { return assigns_[static_cast<std::size_t>(v)]; }
	int decision_level() const { return static_cast<int>(trail_lim_.size()); }

	void attach(int cref);
	void unchecked_enqueue(Lit p, int from = kNoReason);
	int propagate(); // returns conflicting cref or kNoReason
	void analyze(int confl, std::vector<Lit> &learnt, int &bt_level);
	bool lit_redundant(Lit p) const;
	void cancel_until(int level);
	Var pick_branch_var();
	void new_decision_level() { trail_lim_.push_back(static_cast<int>(trail_.size())); }
	void bump_var(Var v);
	void bump_clause(Clause &c);
	void decay_activities();
	void reduce_db();
	void rebuild_watches();
	bool locked(int cref) const;
	int search(int conflict_budget, const std::vector<Lit> &assumptions, bool &done);

	std::vector<Clause> store_;
	std::vector<int> problem_refs_;
	std::vector<int> learnt_refs_;
	std::vector<std::vector<Watcher>> watches_; // indexed by Lit.x

	std::vector<Value> assigns_;
	std::vector<char> polarity_; // saved phase, 1 = assign false next time
	std::vector<double> activity_;
	std::vector<int> level_;
	std::vector<int> reason_;
	std::vector<Lit> trail_;
	std::vector<int> trail_lim_;
	std::size_t qhead_ = 0;

	// Max-heap over activity keyed by variable, with an index table.
	std::vector<Var> heap_;
	std::vector<int> heap_pos_;
	void heap_insert(Var v);
	void heap_sift_up(int i);
	void heap_sift_down(int i);
	bool heap_less(Var a, Var b) const;

	std::vector<Value> model_;
	std::vector<char> seen_;

	bool ok_ = true;
	double var_inc_ = 1.0;
	double cla_inc_ = 1.0;
	double max_learnts_ = 0.0;
	std::uint64_t conflicts_ = 0;
	std::uint64_t decisions_ = 0;
	std::uint64_t propagations_ = 0;
};

} // namespace splitlock::sat
